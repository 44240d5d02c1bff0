//! Conflict graphs, throughput and rate vectors, graph generators and
//! exact independent-set enumeration.
//!
//! Node ids are 0-based everywhere in code and in file formats.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the node count for state-space enumeration. The state
/// space can be exponential in `n`, so larger graphs are rejected loudly.
pub const DEFAULT_ENUM_CAP: usize = 30;

/// Undirected simple graph on nodes `0..n`; an edge marks a pair of nodes
/// that cannot transmit simultaneously.
///
/// Invariants (enforced on construction): adjacency is symmetric,
/// irreflexive, sorted, and all ids are in `0..n`. Values are immutable
/// after construction and safe to share across threads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictGraph {
    n: usize,
    adj: Vec<Vec<usize>>,
}

impl ConflictGraph {
    /// Graph with `n` nodes and no edges.
    pub fn edgeless(n: usize) -> Self {
        Self { n, adj: vec![Vec::new(); n] }
    }

    /// Builds a graph from an edge list. Duplicate edges are merged;
    /// self-loops and out-of-range ids are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(i, j) in edges {
            if i >= n {
                return Err(Error::NodeOutOfRange { node: i, n });
            }
            if j >= n {
                return Err(Error::NodeOutOfRange { node: j, n });
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { n, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Neighbor set of node `i`, sorted ascending.
    pub fn neighbors(&self, i: usize) -> Result<&[usize]> {
        if i >= self.n {
            return Err(Error::NodeOutOfRange { node: i, n: self.n });
        }
        Ok(&self.adj[i])
    }

    /// Unchecked neighbor access for internal loops.
    pub(crate) fn nbrs(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.adj[i].binary_search(&j).is_ok()
    }

    /// All edges as `(i, j)` pairs with `i < j`, sorted lexicographically.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for &j in &self.adj[i] {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Closed neighborhood of `i`: the node itself plus its neighbors, sorted.
    pub fn closed_neighborhood(&self, i: usize) -> Result<Vec<usize>> {
        let nbrs = self.neighbors(i)?;
        let mut out = Vec::with_capacity(nbrs.len() + 1);
        out.extend_from_slice(nbrs);
        out.push(i);
        out.sort_unstable();
        Ok(out)
    }

    /// Returns true if the nodes of `s` are pairwise adjacent.
    pub fn is_clique(&self, s: &[usize]) -> bool {
        for (a, &i) in s.iter().enumerate() {
            for &j in &s[a + 1..] {
                if i == j || !self.has_edge(i, j) {
                    return false;
                }
            }
        }
        true
    }

    /// Subgraph induced by the node set `s`, relabeled to `0..s.len()`.
    ///
    /// Returns the subgraph together with the map `new id -> old id`
    /// (the sorted, deduplicated `s`); the inverse map is a binary search
    /// on the returned vector.
    pub fn induced_subgraph(&self, s: &[usize]) -> Result<(ConflictGraph, Vec<usize>)> {
        let mut nodes: Vec<usize> = s.to_vec();
        nodes.sort_unstable();
        nodes.dedup();
        if nodes.is_empty() {
            return Err(Error::EmptySubset);
        }
        if let Some(&node) = nodes.iter().find(|&&v| v >= self.n) {
            return Err(Error::NodeOutOfRange { node, n: self.n });
        }
        let mut edges = Vec::new();
        for (new_i, &old_i) in nodes.iter().enumerate() {
            for &old_j in &self.adj[old_i] {
                if old_j > old_i {
                    if let Ok(new_j) = nodes.binary_search(&old_j) {
                        edges.push((new_i, new_j));
                    }
                }
            }
        }
        let sub = ConflictGraph::from_edges(nodes.len(), &edges)?;
        Ok((sub, nodes))
    }

    /// Connected components, each a sorted node list.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut comps = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            let mut comp = Vec::new();
            seen[start] = true;
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// True if the graph contains no cycle.
    pub fn is_acyclic(&self) -> bool {
        // A forest has exactly n - #components edges.
        self.edge_count() + self.components().len() == self.n
    }

    /// Structural invariant check: symmetry, irreflexivity, sortedness.
    pub fn validate(&self) -> Result<()> {
        for i in 0..self.n {
            let mut prev: Option<usize> = None;
            for &j in &self.adj[i] {
                if j >= self.n {
                    return Err(Error::NodeOutOfRange { node: j, n: self.n });
                }
                if j == i {
                    return Err(Error::SelfLoop(i));
                }
                if prev.is_some_and(|p| p >= j) {
                    return Err(Error::Parse(format!("adjacency of {i} not sorted/unique")));
                }
                if self.adj[j].binary_search(&i).is_err() {
                    return Err(Error::Parse(format!("edge ({i},{j}) not symmetric")));
                }
                prev = Some(j);
            }
        }
        Ok(())
    }

    /// Serializes to the JSON graph format, optionally with coordinates.
    pub fn to_json(&self, coords: Option<&[(f64, f64)]>) -> String {
        let file = GraphFile {
            n: self.n,
            edges: self.edges(),
            coords: coords.map(<[(f64, f64)]>::to_vec),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("graph serialization");
        s.push('\n');
        s
    }

    /// Parses the JSON graph format `{"n": ..., "edges": [[i,j],...], "coords": ...?}`.
    pub fn from_json(s: &str) -> Result<(ConflictGraph, Option<Vec<(f64, f64)>>)> {
        let file: GraphFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if let Some(coords) = &file.coords {
            if coords.len() != file.n {
                return Err(Error::LengthMismatch { expected: file.n, got: coords.len() });
            }
        }
        let g = ConflictGraph::from_edges(file.n, &file.edges)?;
        Ok((g, file.coords))
    }

    /// Parses a plain-text edge list: one `i j` pair per line, `#` starts a
    /// comment. The node count is `max id + 1`.
    pub fn from_edge_list(s: &str) -> Result<ConflictGraph> {
        let mut edges = Vec::new();
        let mut max_id = 0usize;
        for (lineno, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<usize> {
                tok.ok_or_else(|| Error::Parse(format!("line {}: expected `i j`", lineno + 1)))?
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            let i = parse(it.next())?;
            let j = parse(it.next())?;
            if it.next().is_some() {
                return Err(Error::Parse(format!("line {}: trailing tokens", lineno + 1)));
            }
            max_id = max_id.max(i).max(j);
            edges.push((i, j));
        }
        if edges.is_empty() {
            return Err(Error::Parse("edge list is empty".into()));
        }
        ConflictGraph::from_edges(max_id + 1, &edges)
    }
}

/// JSON representation of a graph file.
#[derive(Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<(f64, f64)>>,
}

/// Per-node target throughputs: fractions of time transmitting, each
/// strictly inside (0, 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ThroughputVector(Vec<f64>);

impl ThroughputVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0 && **v < 1.0)) {
            return Err(Error::InvalidParameter(format!(
                "throughput {bad} outside the open interval (0, 1)"
            )));
        }
        Ok(Self(values))
    }

    /// Uniform target `value` for `n` nodes.
    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Per-node mean back-off rates (inverse mean back-off durations, with
/// transmissions of mean length 1); strictly positive and finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RateVector(Vec<f64>);

impl RateVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "back-off rate {bad} is not strictly positive and finite"
            )));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// All independent sets of a graph, each as a bitmask over node ids.
/// The empty set comes first; no duplicates.
#[derive(Clone, Debug)]
pub struct IndependentSetFamily {
    n: usize,
    sets: Vec<u32>,
}

impl IndependentSetFamily {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn masks(&self) -> &[u32] {
        &self.sets
    }

    /// Decodes a bitmask into a sorted node list.
    pub fn nodes_of(mask: u32) -> Vec<usize> {
        (0..32).filter(|b| mask & (1 << b) != 0).collect()
    }
}

/// Per-node neighbor bitmasks for graphs small enough to enumerate.
pub(crate) fn neighbor_masks(g: &ConflictGraph, cap: usize) -> Result<Vec<u32>> {
    if g.n() > cap || g.n() > 32 {
        return Err(Error::EnumerationCap { n: g.n(), cap: cap.min(32) });
    }
    Ok((0..g.n())
        .map(|i| g.nbrs(i).iter().fold(0u32, |m, &j| m | (1 << j)))
        .collect())
}

/// Enumerates the state space: every independent set of `g`, empty set
/// first, by recursive branching on the lowest-id undecided node.
pub fn enumerate_independent_sets(g: &ConflictGraph) -> Result<IndependentSetFamily> {
    enumerate_independent_sets_capped(g, DEFAULT_ENUM_CAP)
}

/// As [`enumerate_independent_sets`] with an explicit node-count cap.
pub fn enumerate_independent_sets_capped(
    g: &ConflictGraph,
    cap: usize,
) -> Result<IndependentSetFamily> {
    let masks = neighbor_masks(g, cap)?;
    let mut sets = Vec::new();
    fn rec(i: usize, n: usize, current: u32, masks: &[u32], out: &mut Vec<u32>) {
        if i == n {
            out.push(current);
            return;
        }
        rec(i + 1, n, current, masks, out);
        if masks[i] & current == 0 {
            rec(i + 1, n, current | (1 << i), masks, out);
        }
    }
    rec(0, g.n(), 0, &masks, &mut sets);
    Ok(IndependentSetFamily { n: g.n(), sets })
}

/// Random geometric graph: `n` points i.i.d. uniform on the unit square,
/// an edge whenever the Euclidean distance is strictly below `r`.
///
/// The point stream is drawn from `ChaCha12Rng::seed_from_u64(seed)`
/// (x then y per node, in node order), so a given `(n, r, seed)` triple
/// yields the same graph in every build.
pub fn random_geometric_graph(
    n: usize,
    r: f64,
    seed: u64,
) -> Result<(ConflictGraph, Vec<(f64, f64)>)> {
    if n == 0 {
        return Err(Error::InvalidParameter("node count must be positive".into()));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidParameter(format!("radius {r} must be positive")));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let coords: Vec<(f64, f64)> =
        (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let dx = coords[i].0 - coords[j].0;
            let dy = coords[i].1 - coords[j].1;
            if (dx * dx + dy * dy).sqrt() < r {
                edges.push((i, j));
            }
        }
    }
    Ok((ConflictGraph::from_edges(n, &edges)?, coords))
}

/// Line network: nodes `0..n` with an edge whenever `|i - j| <= beta`.
pub fn make_line(n: usize, beta: usize) -> Result<ConflictGraph> {
    if n == 0 {
        return Err(Error::InvalidParameter("node count must be positive".into()));
    }
    if beta >= n {
        return Err(Error::InvalidParameter(format!(
            "interference range {beta} must be smaller than the node count {n}"
        )));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n.min(i + beta + 1) {
            edges.push((i, j));
        }
    }
    ConflictGraph::from_edges(n, &edges)
}

/// Validates an inhomogeneous-line range vector (length `n + 1`, entry `k`
/// holds the range of node `k`; the final entry is a 0 sentinel).
///
/// Requirements: first and last entries are 0, interior entries are
/// positive, and each entry grows by at most one over its predecessor.
pub(crate) fn validate_iline(beta: &[usize]) -> Result<usize> {
    if beta.len() < 2 {
        return Err(Error::InvalidParameter(
            "range vector needs at least two entries".into(),
        ));
    }
    let n = beta.len() - 1;
    if beta[0] != 0 {
        return Err(Error::InvalidParameter("first range entry must be 0".into()));
    }
    if beta[n] != 0 {
        return Err(Error::InvalidParameter("last range entry must be 0".into()));
    }
    for i in 1..n {
        if beta[i] == 0 {
            return Err(Error::InvalidParameter(format!(
                "interior range entry {i} must be positive"
            )));
        }
    }
    for i in 0..n {
        if beta[i + 1] > beta[i] + 1 {
            return Err(Error::InvalidParameter(format!(
                "range entry {} jumps from {} to {}; growth is capped at one",
                i + 1,
                beta[i],
                beta[i + 1]
            )));
        }
    }
    Ok(n)
}

/// Inhomogeneous line network: node `i` (0-based) interferes with the
/// previous `beta[i]` nodes. `beta` has `n + 1` entries; see
/// [`iline_maximal_cliques`](crate::rates::iline_maximal_cliques) for the
/// induced clique structure.
pub fn make_iline(beta: &[usize]) -> Result<ConflictGraph> {
    let n = validate_iline(beta)?;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i - beta[i])..i {
            edges.push((j, i));
        }
    }
    ConflictGraph::from_edges(n, &edges)
}

/// Ring (cycle) network on `n >= 3` nodes.
pub fn make_ring(n: usize) -> Result<ConflictGraph> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("ring needs at least 3 nodes, got {n}")));
    }
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    ConflictGraph::from_edges(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> ConflictGraph {
        make_line(n, 1).unwrap()
    }

    #[test]
    fn neighbors_on_path_and_ring() {
        let g = path(3);
        assert_eq!(g.neighbors(1).unwrap(), &[0, 2]);
        assert_eq!(g.neighbors(0).unwrap(), &[1]);
        assert!(g.neighbors(3).is_err());

        let lonely = ConflictGraph::edgeless(4);
        assert!(lonely.neighbors(2).unwrap().is_empty());

        let ring = make_ring(4).unwrap();
        assert_eq!(ring.neighbors(0).unwrap(), &[1, 3]);
        assert!(!ring.has_edge(0, 2));
    }

    #[test]
    fn construction_rejects_bad_edges() {
        assert!(matches!(
            ConflictGraph::from_edges(3, &[(0, 0)]),
            Err(Error::SelfLoop(0))
        ));
        assert!(matches!(
            ConflictGraph::from_edges(3, &[(0, 5)]),
            Err(Error::NodeOutOfRange { node: 5, n: 3 })
        ));
        // Duplicates merge.
        let g = ConflictGraph::from_edges(3, &[(0, 1), (1, 0), (0, 1)]).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn induced_subgraph_examples() {
        // Ring of 4: closed neighborhood of node 2 induces a path.
        let ring = make_ring(4).unwrap();
        let s = ring.closed_neighborhood(2).unwrap();
        assert_eq!(s, vec![1, 2, 3]);
        let (sub, map) = ring.induced_subgraph(&s).unwrap();
        assert_eq!(map, vec![1, 2, 3]);
        assert_eq!(sub.edges(), vec![(0, 1), (1, 2)]);

        // Full node set gives an isomorphic copy under the identity map.
        let all: Vec<usize> = (0..4).collect();
        let (copy, map) = ring.induced_subgraph(&all).unwrap();
        assert_eq!(map, all);
        assert_eq!(copy, ring);

        assert!(matches!(ring.induced_subgraph(&[]), Err(Error::EmptySubset)));
    }

    #[test]
    fn induced_subgraph_of_clique_neighborhood_is_triangle() {
        // 11-node chordal example: the closed neighborhood {6, 7, 9}
        // (0-based) induces a triangle.
        let g = crate::testutil::example_chordal_11();
        let (sub, _) = g.induced_subgraph(&[6, 7, 9]).unwrap();
        assert_eq!(sub.edge_count(), 3);
        assert!(sub.is_clique(&[0, 1, 2]));
    }

    #[test]
    fn enumeration_examples() {
        let single_edge = ConflictGraph::from_edges(2, &[(0, 1)]).unwrap();
        let fam = enumerate_independent_sets(&single_edge).unwrap();
        let mut sorted = fam.masks().to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0b00, 0b01, 0b10]);
        assert_eq!(fam.masks()[0], 0, "empty set first");

        let edgeless = ConflictGraph::edgeless(3);
        assert_eq!(enumerate_independent_sets(&edgeless).unwrap().len(), 8);

        let ring = make_ring(4).unwrap();
        let fam = enumerate_independent_sets(&ring).unwrap();
        let mut got: Vec<u32> = fam.masks().to_vec();
        got.sort_unstable();
        // Brute force over all 16 subsets.
        let mut expect: Vec<u32> = (0u32..16)
            .filter(|&m| {
                (0..4).all(|i| {
                    (0..4).all(|j| {
                        i == j || !ring.has_edge(i, j) || m & (1 << i) == 0 || m & (1 << j) == 0
                    })
                })
            })
            .collect();
        expect.sort_unstable();
        assert_eq!(got, expect);
        assert_eq!(fam.len(), 7);
        assert_eq!(fam.masks()[0], 0, "empty set first");
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let g = ConflictGraph::edgeless(31);
        assert!(matches!(
            enumerate_independent_sets(&g),
            Err(Error::EnumerationCap { n: 31, cap: 30 })
        ));
        // Tighter custom cap.
        let g = ConflictGraph::edgeless(10);
        assert!(enumerate_independent_sets_capped(&g, 9).is_err());
    }

    #[test]
    fn enumerated_sets_are_independent_and_unique() {
        for seed in 0..20 {
            let (g, _) = random_geometric_graph(10, 0.5, seed).unwrap();
            let fam = enumerate_independent_sets(&g).unwrap();
            let mut seen = std::collections::HashSet::new();
            for &m in fam.masks() {
                assert!(seen.insert(m), "duplicate state");
                let nodes = IndependentSetFamily::nodes_of(m);
                for (a, &i) in nodes.iter().enumerate() {
                    for &j in &nodes[a + 1..] {
                        assert!(!g.has_edge(i, j), "dependent set enumerated");
                    }
                }
            }
        }
    }

    #[test]
    fn path_independent_set_counts_follow_fibonacci() {
        // |Omega| for a path of n nodes is Fibonacci(n + 2).
        let mut fib = vec![0u64, 1];
        for i in 2..25 {
            let v = fib[i - 1] + fib[i - 2];
            fib.push(v);
        }
        assert_eq!(enumerate_independent_sets(&ConflictGraph::edgeless(1)).unwrap().len(), 2);
        for n in 2..=20 {
            let fam = enumerate_independent_sets(&path(n)).unwrap();
            assert_eq!(fam.len() as u64, fib[n + 2], "n = {n}");
        }
    }

    #[test]
    fn line_and_ring_generators() {
        assert_eq!(path(4).edges(), vec![(0, 1), (1, 2), (2, 3)]);
        let tri = make_line(3, 2).unwrap();
        assert_eq!(tri.edge_count(), 3);
        assert!(make_line(3, 3).is_err());

        assert_eq!(make_ring(3).unwrap().edge_count(), 3);
        assert!(make_ring(2).is_err());
    }

    #[test]
    fn iline_generator_matches_conventions() {
        // Worked 9-node example.
        let beta = [0, 1, 1, 2, 1, 2, 3, 2, 2, 0];
        let g = make_iline(&beta).unwrap();
        assert_eq!(g.n(), 9);
        // Expected edges from the definition: j in [i - beta_i, i).
        let mut expect = Vec::new();
        for i in 0..9 {
            for j in (i - beta[i])..i {
                expect.push((j, i));
            }
        }
        expect.sort_unstable();
        assert_eq!(g.edges(), expect);
        // Cliques {3,4,5,6} (0-based) etc. are checked in the chordal tests.

        // All-ones interior ranges give a path.
        let beta = [0, 1, 1, 1, 0];
        assert_eq!(make_iline(&beta).unwrap(), path(4));

        // Saturating ranges give the homogeneous line.
        let beta = [0, 1, 2, 2, 2, 0];
        assert_eq!(make_iline(&beta).unwrap(), make_line(5, 2).unwrap());

        assert!(make_iline(&[0, 2, 1, 0]).is_err(), "growth capped at one");
        assert!(make_iline(&[0, 1, 0, 1, 0]).is_err(), "interior zero");
        assert!(make_iline(&[1, 1, 0]).is_err(), "first entry not zero");
    }

    #[test]
    fn geometric_generator_basics() {
        let (g, coords) = random_geometric_graph(1, 0.3, 7).unwrap();
        assert_eq!(g.n(), 1);
        assert_eq!(coords.len(), 1);
        assert_eq!(g.edge_count(), 0);

        // Radius beyond the square diagonal yields a complete graph.
        let (g, _) = random_geometric_graph(12, std::f64::consts::SQRT_2 * 1.01, 3).unwrap();
        assert_eq!(g.edge_count(), 12 * 11 / 2);

        assert!(random_geometric_graph(0, 0.2, 1).is_err());
        assert!(random_geometric_graph(5, 0.0, 1).is_err());
    }

    #[test]
    fn geometric_edge_count_in_plausible_band() {
        // Expected edge count at n = 100, r = 0.2 is about 560 (border
        // effects push it below the open-plane value); accept a wide band.
        let (g, _) = random_geometric_graph(100, 0.2, 7).unwrap();
        let e = g.edge_count();
        assert!((300..900).contains(&e), "edge count {e} implausible");
    }

    #[test]
    fn geometric_generator_is_reproducible() {
        let (g1, c1) = random_geometric_graph(50, 0.25, 99).unwrap();
        let (g2, c2) = random_geometric_graph(50, 0.25, 99).unwrap();
        assert_eq!(g1, g2);
        assert_eq!(g1.to_json(Some(&c1)), g2.to_json(Some(&c2)));
        let (g3, _) = random_geometric_graph(50, 0.25, 100).unwrap();
        assert_ne!(g1, g3);
    }

    #[test]
    fn generators_uphold_graph_invariants() {
        for seed in 0..10 {
            let (g, _) = random_geometric_graph(40, 0.3, seed).unwrap();
            g.validate().unwrap();
        }
        make_iline(&[0, 1, 2, 3, 2, 1, 1, 0]).unwrap().validate().unwrap();
        make_ring(9).unwrap().validate().unwrap();
        make_line(9, 3).unwrap().validate().unwrap();
        let (sub, _) = make_ring(8).unwrap().induced_subgraph(&[0, 1, 2, 5]).unwrap();
        sub.validate().unwrap();
    }

    #[test]
    fn json_round_trip_and_edge_list() {
        let (g, coords) = random_geometric_graph(8, 0.4, 5).unwrap();
        let s = g.to_json(Some(&coords));
        let (g2, c2) = ConflictGraph::from_json(&s).unwrap();
        assert_eq!(g, g2);
        assert_eq!(Some(coords), c2);

        let text = "# a path\n0 1\n1 2\n\n2 3 # tail\n";
        let g = ConflictGraph::from_edge_list(text).unwrap();
        assert_eq!(g, path(4));
        assert!(ConflictGraph::from_edge_list("0\n").is_err());
        assert!(ConflictGraph::from_edge_list("# nothing\n").is_err());
    }

    #[test]
    fn throughput_and_rate_vector_validation() {
        assert!(ThroughputVector::new(vec![0.3, 0.999]).is_ok());
        assert!(ThroughputVector::new(vec![0.0]).is_err());
        assert!(ThroughputVector::new(vec![1.0]).is_err());
        assert!(ThroughputVector::new(vec![f64::NAN]).is_err());
        assert!(RateVector::new(vec![1e-9, 5.0]).is_ok());
        assert!(RateVector::new(vec![0.0]).is_err());
        assert!(RateVector::new(vec![f64::INFINITY]).is_err());
    }
}
