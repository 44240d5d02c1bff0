//! Shared generators for the integration suites: random trees, random
//! inhomogeneous-line range vectors and achievable target vectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use csma_core::chordal::{maximal_cliques_chordal, mcs_peo};
use csma_core::graph::enumerate_independent_sets;
use csma_core::{ConflictGraph, ThroughputVector};

/// Random labelled tree: each node attaches to a uniformly random earlier
/// node.
pub fn random_tree(n: usize, seed: u64) -> ConflictGraph {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let edges: Vec<(usize, usize)> =
        (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    ConflictGraph::from_edges(n, &edges).unwrap()
}

/// Random valid range vector for an inhomogeneous line on `n` nodes:
/// entries grow by at most one and stay positive in the interior.
pub fn random_iline_beta(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut beta = vec![0usize; n + 1];
    for i in 1..n {
        beta[i] = rng.gen_range(1..=beta[i - 1] + 1);
    }
    beta
}

/// Achievable targets for a chordal graph: random positive raw values
/// scaled so the worst maximal-clique sum equals `load` (< 1).
pub fn random_achievable_theta(g: &ConflictGraph, load: f64, seed: u64) -> ThroughputVector {
    assert!(load > 0.0 && load < 1.0);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..g.n()).map(|_| 0.2 + 0.8 * rng.gen::<f64>()).collect();
    let peo = mcs_peo(g, None).unwrap();
    let cliques = maximal_cliques_chordal(g, &peo).expect("chordal input");
    let worst: f64 = cliques
        .iter()
        .map(|k| k.iter().map(|&i| raw[i]).sum::<f64>())
        .fold(f64::MIN, f64::max);
    ThroughputVector::new(raw.iter().map(|r| r * load / worst).collect()).unwrap()
}

/// Strictly interior achievable targets for an arbitrary small graph:
/// a random positive mixture over the enumerated state space.
pub fn random_interior_theta(g: &ConflictGraph, seed: u64) -> ThroughputVector {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let fam = enumerate_independent_sets(g).unwrap();
    let weights: Vec<f64> = (0..fam.len()).map(|_| 0.05 + rng.gen::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    let mut theta = vec![0.0f64; g.n()];
    for (&mask, w) in fam.masks().iter().zip(&weights) {
        for i in 0..g.n() {
            if mask & (1 << i) != 0 {
                theta[i] += w / total;
            }
        }
    }
    ThroughputVector::new(theta).unwrap()
}
