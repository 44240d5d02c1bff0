//! Shared fixtures for unit tests.

use crate::graph::ConflictGraph;

/// 11-node chordal graph used across the test suite (0-based ids). Its
/// maximal cliques are {1,2}, {3,4,5,6,7}, {2,3,7,8}, {7,8,10}, {8,9}
/// and {7,8,11} in 1-based ids.
pub(crate) fn example_chordal_11() -> ConflictGraph {
    let edges_1b = [
        (1, 2),
        (2, 3),
        (2, 7),
        (2, 8),
        (3, 4),
        (3, 5),
        (3, 6),
        (3, 7),
        (3, 8),
        (4, 5),
        (4, 6),
        (4, 7),
        (5, 6),
        (5, 7),
        (6, 7),
        (7, 8),
        (7, 10),
        (7, 11),
        (8, 9),
        (8, 10),
        (8, 11),
    ];
    let edges: Vec<(usize, usize)> = edges_1b.iter().map(|&(a, b)| (a - 1, b - 1)).collect();
    ConflictGraph::from_edges(11, &edges).unwrap()
}
