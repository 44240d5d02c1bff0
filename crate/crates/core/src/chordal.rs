//! Chordality machinery: maximum cardinality search, perfect elimination
//! orderings, maximal cliques, clique trees, maximal chordal subgraphs
//! (MAXCHORD) and minimum-degree chordal completion.
//!
//! A graph is chordal iff it admits a perfect elimination ordering (PEO):
//! an ordering in which every node forms a clique with its neighbors that
//! occur later in the ordering. All functions here are pure and operate
//! per connected component, so disconnected graphs yield clique forests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ConflictGraph;

/// A node ordering with the per-node sets of later neighbors.
///
/// `alpha[k]` is the node at position `k`; positions run from first
/// eliminated (0) to last (n-1). `later_neighbors[v]` is the neighbor set
/// of `v` restricted to nodes at later positions, sorted ascending. The
/// ordering is a valid PEO iff every such set is a clique, which
/// [`verify_peo`] checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeoOrder {
    alpha: Vec<usize>,
    later_neighbors: Vec<Vec<usize>>,
}

impl PeoOrder {
    /// Builds the ordering data from a candidate permutation.
    pub fn from_alpha(g: &ConflictGraph, alpha: Vec<usize>) -> Result<Self> {
        let n = g.n();
        if alpha.len() != n {
            return Err(Error::NotAPermutation);
        }
        let mut position = vec![usize::MAX; n];
        for (k, &v) in alpha.iter().enumerate() {
            if v >= n || position[v] != usize::MAX {
                return Err(Error::NotAPermutation);
            }
            position[v] = k;
        }
        let later_neighbors = (0..n)
            .map(|v| {
                let mut m: Vec<usize> =
                    g.nbrs(v).iter().copied().filter(|&w| position[w] > position[v]).collect();
                m.sort_unstable();
                m
            })
            .collect();
        Ok(Self { alpha, later_neighbors })
    }

    pub fn alpha(&self) -> &[usize] {
        &self.alpha
    }

    /// Later-neighbor set of `v`, sorted ascending.
    pub fn later_neighbors(&self, v: usize) -> &[usize] {
        &self.later_neighbors[v]
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// Position of each node in the ordering.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.alpha.len()];
        for (k, &v) in self.alpha.iter().enumerate() {
            pos[v] = k;
        }
        pos
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct PeoFile<'a> {
            alpha: &'a [usize],
        }
        let mut s =
            serde_json::to_string_pretty(&PeoFile { alpha: &self.alpha }).expect("peo json");
        s.push('\n');
        s
    }

    pub fn from_json(g: &ConflictGraph, s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct PeoFile {
            alpha: Vec<usize>,
        }
        let file: PeoFile =
            serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_alpha(g, file.alpha)
    }
}

/// Maximum cardinality search. Picks the last position first (`start`, or
/// a maximum-degree node), then repeatedly takes the unordered node with
/// the most already-ordered neighbors. Ties go to the node of highest
/// degree, then lowest id. The result is a valid PEO iff `g` is chordal.
pub fn mcs_peo(g: &ConflictGraph, start: Option<usize>) -> Result<PeoOrder> {
    mcs_with(g, start, |g, cands| {
        *cands
            .iter()
            .max_by(|&&a, &&b| {
                (g.degree(a), std::cmp::Reverse(a)).cmp(&(g.degree(b), std::cmp::Reverse(b)))
            })
            .expect("non-empty candidates")
    })
}

/// Maximum cardinality search with seeded random tie-breaking (and random
/// start), used to exercise PEO-independence properties.
pub fn mcs_peo_seeded(g: &ConflictGraph, seed: u64) -> Result<PeoOrder> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    if g.n() == 0 {
        return PeoOrder::from_alpha(g, Vec::new());
    }
    let start = rng.gen_range(0..g.n());
    mcs_with(g, Some(start), move |_, cands| {
        *cands.choose(&mut rng).expect("non-empty candidates")
    })
}

fn mcs_with(
    g: &ConflictGraph,
    start: Option<usize>,
    mut pick: impl FnMut(&ConflictGraph, &[usize]) -> usize,
) -> Result<PeoOrder> {
    let n = g.n();
    if let Some(s) = start {
        if s >= n {
            return Err(Error::NodeOutOfRange { node: s, n });
        }
    }
    let mut alpha = vec![0usize; n];
    let mut ordered = vec![false; n];
    let mut labels = vec![0usize; n];
    for k in (0..n).rev() {
        let v = if k == n - 1 && start.is_some() {
            start.unwrap()
        } else {
            // All unordered nodes of maximal label; the pick rule breaks
            // ties (highest degree then lowest id by default).
            let best = (0..n).filter(|&v| !ordered[v]).map(|v| labels[v]).max().unwrap();
            let cands: Vec<usize> =
                (0..n).filter(|&v| !ordered[v] && labels[v] == best).collect();
            pick(g, &cands)
        };
        alpha[k] = v;
        ordered[v] = true;
        for &w in g.nbrs(v) {
            if !ordered[w] {
                labels[w] += 1;
            }
        }
    }
    PeoOrder::from_alpha(g, alpha)
}

/// True iff every later-neighbor set of the ordering is a clique.
pub fn verify_peo(g: &ConflictGraph, order: &PeoOrder) -> bool {
    if order.len() != g.n() {
        return false;
    }
    (0..g.n()).all(|v| g.is_clique(order.later_neighbors(v)))
}

/// Chordality test: run MCS and validate the resulting ordering.
pub fn is_chordal(g: &ConflictGraph) -> bool {
    mcs_peo(g, None).map(|peo| verify_peo(g, &peo)).unwrap_or(false)
}

/// Maximal cliques of the cliques and the clique tree/forest, built
/// incrementally along the reversed PEO: each node either extends the
/// maximal clique equal to its later-neighbor set, or starts a new clique
/// attached to one that contains that set.
fn build_cliques_and_tree(
    g: &ConflictGraph,
    peo: &PeoOrder,
) -> Result<(Vec<Vec<usize>>, Vec<(usize, usize)>)> {
    let n = g.n();
    let mut cliques: Vec<Vec<usize>> = Vec::new();
    let mut tree_edges: Vec<(usize, usize)> = Vec::new();
    if n == 0 {
        return Ok((cliques, tree_edges));
    }
    cliques.push(vec![peo.alpha()[n - 1]]);
    for k in (0..n - 1).rev() {
        let v = peo.alpha()[k];
        let m = peo.later_neighbors(v);
        if m.is_empty() {
            // New connected component.
            cliques.push(vec![v]);
            continue;
        }
        let equal = cliques.iter().position(|k_set| k_set.as_slice() == m);
        if let Some(c) = equal {
            let mut grown = cliques[c].clone();
            grown.push(v);
            grown.sort_unstable();
            cliques[c] = grown;
        } else if let Some(c) = cliques.iter().position(|k_set| is_subset(m, k_set)) {
            let mut fresh = m.to_vec();
            fresh.push(v);
            fresh.sort_unstable();
            cliques.push(fresh);
            tree_edges.push((cliques.len() - 1, c));
        } else {
            // The later-neighbor set is not a clique of the processed
            // suffix, so the ordering is not a PEO.
            return Err(Error::InvalidPeo);
        }
    }
    Ok((cliques, tree_edges))
}

/// Subset test on sorted slices.
fn is_subset(a: &[usize], b: &[usize]) -> bool {
    let mut it = b.iter();
    'outer: for x in a {
        for y in it.by_ref() {
            match y.cmp(x) {
                std::cmp::Ordering::Less => continue,
                std::cmp::Ordering::Equal => continue 'outer,
                std::cmp::Ordering::Greater => return false,
            }
        }
        return false;
    }
    true
}

fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// The maximal cliques of a chordal graph, via the given PEO.
pub fn maximal_cliques_chordal(g: &ConflictGraph, peo: &PeoOrder) -> Result<Vec<Vec<usize>>> {
    if !verify_peo(g, peo) {
        return Err(Error::InvalidPeo);
    }
    Ok(build_cliques_and_tree(g, peo)?.0)
}

/// Maximal cliques plus the tree (or forest) edges and per-edge separators.
///
/// The tree satisfies the induced-subtree property: for every node, the
/// cliques containing it form a connected subtree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueTree {
    pub cliques: Vec<Vec<usize>>,
    pub tree_edges: Vec<(usize, usize)>,
    pub separators: Vec<Vec<usize>>,
}

impl CliqueTree {
    /// Structural validation against the graph: every listed set is a
    /// clique, cliques are pairwise non-nested and cover all edges, the tree
    /// is a spanning forest with one tree per component, the
    /// induced-subtree property holds and separators match.
    pub fn validate(&self, g: &ConflictGraph) -> Result<()> {
        let m = self.cliques.len();
        let fail = |msg: String| Err(Error::InvalidCliqueTree(msg));
        for (idx, k) in self.cliques.iter().enumerate() {
            if k.is_empty() || k.windows(2).any(|w| w[0] >= w[1]) {
                return fail(format!("clique {idx} is empty or not sorted"));
            }
            if !g.is_clique(k) {
                return fail(format!("set {idx} is not a clique"));
            }
        }
        for i in 0..m {
            for j in 0..m {
                if i != j && is_subset(&self.cliques[i], &self.cliques[j]) {
                    return fail(format!("clique {i} contained in clique {j}"));
                }
            }
        }
        // Edge coverage.
        for (i, j) in g.edges() {
            if !self
                .cliques
                .iter()
                .any(|k| k.binary_search(&i).is_ok() && k.binary_search(&j).is_ok())
            {
                return fail(format!("edge ({i},{j}) not covered by any clique"));
            }
        }
        // Node coverage.
        let mut covered = vec![false; g.n()];
        for k in &self.cliques {
            for &v in k {
                if v >= g.n() {
                    return fail(format!("clique node {v} out of range"));
                }
                covered[v] = true;
            }
        }
        if covered.iter().any(|c| !c) {
            return fail("some node is in no clique".into());
        }
        if self.separators.len() != self.tree_edges.len() {
            return fail("separator list length mismatch".into());
        }
        let mut tree_adj = vec![Vec::new(); m];
        for (e, &(a, b)) in self.tree_edges.iter().enumerate() {
            if a >= m || b >= m || a == b {
                return fail(format!("tree edge ({a},{b}) out of range"));
            }
            let sep = intersect_sorted(&self.cliques[a], &self.cliques[b]);
            if sep != self.separators[e] {
                return fail(format!("separator of edge ({a},{b}) inconsistent"));
            }
            tree_adj[a].push(b);
            tree_adj[b].push(a);
        }
        // Forest with one tree per connected component of g.
        let comps = g.components().len();
        if self.tree_edges.len() + comps != m {
            return fail("tree edges do not form a spanning forest".into());
        }
        let mut seen = vec![false; m];
        for start in 0..m {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            seen[start] = true;
            let mut count = 0;
            while let Some(c) = stack.pop() {
                count += 1;
                for &d in &tree_adj[c] {
                    if !seen[d] {
                        seen[d] = true;
                        stack.push(d);
                    }
                }
            }
            let _ = count;
        }
        // Acyclic (forest) follows from edge count + full reachability per
        // component; check the induced-subtree property per node.
        for v in 0..g.n() {
            let holders: Vec<usize> = (0..m)
                .filter(|&c| self.cliques[c].binary_search(&v).is_ok())
                .collect();
            let mut reach = vec![false; m];
            let mut stack = vec![holders[0]];
            reach[holders[0]] = true;
            while let Some(c) = stack.pop() {
                for &d in &tree_adj[c] {
                    if !reach[d] && self.cliques[d].binary_search(&v).is_ok() {
                        reach[d] = true;
                        stack.push(d);
                    }
                }
            }
            if holders.iter().any(|&c| !reach[c]) {
                return fail(format!("cliques containing node {v} are not connected"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct TreeFile<'a> {
            cliques: &'a [Vec<usize>],
            tree_edges: &'a [(usize, usize)],
        }
        let mut s = serde_json::to_string_pretty(&TreeFile {
            cliques: &self.cliques,
            tree_edges: &self.tree_edges,
        })
        .expect("clique tree json");
        s.push('\n');
        s
    }

    /// Parses `{"cliques": [[...],...], "tree_edges": [[a,b],...]}` and
    /// recomputes separators.
    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct TreeFile {
            cliques: Vec<Vec<usize>>,
            tree_edges: Vec<(usize, usize)>,
        }
        let mut file: TreeFile =
            serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        for k in &mut file.cliques {
            k.sort_unstable();
        }
        let separators = file
            .tree_edges
            .iter()
            .map(|&(a, b)| {
                if a >= file.cliques.len() || b >= file.cliques.len() {
                    return Err(Error::InvalidCliqueTree(format!(
                        "tree edge ({a},{b}) out of range"
                    )));
                }
                Ok(intersect_sorted(&file.cliques[a], &file.cliques[b]))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { cliques: file.cliques, tree_edges: file.tree_edges, separators })
    }
}

/// Builds a clique tree (forest for disconnected graphs) of a chordal
/// graph from a valid PEO.
pub fn clique_tree(g: &ConflictGraph, peo: &PeoOrder) -> Result<CliqueTree> {
    if !verify_peo(g, peo) {
        return Err(Error::NotChordal);
    }
    let (cliques, tree_edges) = build_cliques_and_tree(g, peo)?;
    let separators = tree_edges
        .iter()
        .map(|&(a, b)| intersect_sorted(&cliques[a], &cliques[b]))
        .collect();
    let tree = CliqueTree { cliques, tree_edges, separators };
    tree.validate(g)?;
    Ok(tree)
}

/// The multiset of per-edge separators, canonically sorted. It is
/// invariant across all clique trees of the same chordal graph.
pub fn separator_multiset(t: &CliqueTree) -> Vec<Vec<usize>> {
    let mut seps = t.separators.clone();
    seps.sort();
    seps
}

/// A maximal chordal subgraph together with a PEO that certifies it.
#[derive(Clone, Debug)]
pub struct ChordalSubgraphResult {
    pub subgraph: ConflictGraph,
    pub peo: PeoOrder,
}

/// MAXCHORD: extracts a maximal chordal subgraph of `g`.
///
/// Scans nodes in MCS fashion starting from `v0`; an edge from the
/// current pivot to an unordered neighbor `u` is accepted iff the clique
/// label set `C(u)` is contained in `C(v0)`. Neighbors are scanned in
/// ascending id; the next pivot maximizes `|C(v)|`, with ties broken by
/// highest degree, then lowest id. Adding any rejected edge to the result
/// breaks chordality.
pub fn maxchord(g: &ConflictGraph, v0: usize) -> Result<ChordalSubgraphResult> {
    let n = g.n();
    if v0 >= n {
        return Err(Error::NodeOutOfRange { node: v0, n });
    }
    let mut labels: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut selected = vec![false; n];
    let mut alpha = vec![0usize; n];
    let mut accepted: Vec<(usize, usize)> = Vec::new();
    let mut pivot = v0;
    selected[pivot] = true;
    alpha[n - 1] = pivot;
    for k in (0..n - 1).rev() {
        for &u in g.nbrs(pivot) {
            if !selected[u] && is_subset(&labels[u], &labels[pivot]) {
                let pos = labels[u].binary_search(&pivot).unwrap_err();
                labels[u].insert(pos, pivot);
                accepted.push((u, pivot));
            }
        }
        let next = (0..n)
            .filter(|&v| !selected[v])
            .max_by(|&a, &b| {
                (labels[a].len(), g.degree(a), std::cmp::Reverse(a))
                    .cmp(&(labels[b].len(), g.degree(b), std::cmp::Reverse(b)))
            })
            .expect("unselected node exists");
        alpha[k] = next;
        selected[next] = true;
        pivot = next;
    }
    let subgraph = ConflictGraph::from_edges(n, &accepted)?;
    let peo = PeoOrder::from_alpha(&subgraph, alpha)?;
    debug_assert!(verify_peo(&subgraph, &peo));
    Ok(ChordalSubgraphResult { subgraph, peo })
}

/// Minimum-degree chordal completion. Repeatedly eliminates a node of
/// minimum degree (preferring simplicial nodes among ties, then lowest
/// id), turning its remaining neighborhood into a clique; the added fill
/// edges `E'` are returned alongside the completed graph, and the
/// elimination order is a PEO of the completion.
pub fn min_degree_completion(g: &ConflictGraph) -> (ConflictGraph, Vec<(usize, usize)>) {
    let n = g.n();
    let mut adj: Vec<std::collections::BTreeSet<usize>> =
        (0..n).map(|v| g.nbrs(v).iter().copied().collect()).collect();
    let mut alive = vec![true; n];
    let mut fill: Vec<(usize, usize)> = Vec::new();
    for _ in 0..n {
        let min_deg = (0..n).filter(|&v| alive[v]).map(|v| adj[v].len()).min().unwrap();
        let mut pick = None;
        for v in (0..n).filter(|&v| alive[v] && adj[v].len() == min_deg) {
            let nbrs: Vec<usize> = adj[v].iter().copied().collect();
            let simplicial = nbrs
                .iter()
                .enumerate()
                .all(|(a, &x)| nbrs[a + 1..].iter().all(|&y| adj[x].contains(&y)));
            if simplicial {
                pick = Some(v);
                break;
            }
            if pick.is_none() {
                pick = Some(v);
            }
        }
        let v = pick.unwrap();
        let nbrs: Vec<usize> = adj[v].iter().copied().collect();
        for (a, &x) in nbrs.iter().enumerate() {
            for &y in &nbrs[a + 1..] {
                if adj[x].insert(y) {
                    adj[y].insert(x);
                    fill.push((x.min(y), x.max(y)));
                }
            }
        }
        for &x in &nbrs {
            adj[x].remove(&v);
        }
        adj[v].clear();
        alive[v] = false;
    }
    fill.sort_unstable();
    let mut all_edges = g.edges();
    all_edges.extend_from_slice(&fill);
    let completed = ConflictGraph::from_edges(n, &all_edges).expect("valid fill edges");
    (completed, fill)
}

/// Random chordal graph on `n` nodes, chordal by construction.
///
/// Nodes are attached one at a time to a random subset of an existing
/// maximal clique; the subset size is geometric with continuation
/// probability `density` (so `density = 1.0` yields the complete graph).
/// Node labels are shuffled afterwards. Deterministic per seed.
pub fn random_chordal_graph(n: usize, density: f64, seed: u64) -> Result<ConflictGraph> {
    if n == 0 {
        return Err(Error::InvalidParameter("node count must be positive".into()));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "density {density} outside (0, 1]"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut cliques: Vec<Vec<usize>> = vec![vec![0]];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for v in 1..n {
        let c = rng.gen_range(0..cliques.len());
        let k = cliques[c].len();
        let mut size = 1usize;
        while size < k && (density >= 1.0 || rng.gen::<f64>() < density) {
            size += 1;
        }
        let mut pool = cliques[c].clone();
        pool.partial_shuffle(&mut rng, size);
        let mut subset: Vec<usize> = pool[..size].to_vec();
        subset.sort_unstable();
        for &u in &subset {
            edges.push((u, v));
        }
        if size == k {
            let mut grown = cliques[c].clone();
            grown.push(v);
            grown.sort_unstable();
            cliques[c] = grown;
        } else {
            subset.push(v);
            cliques.push(subset);
        }
    }
    let mut relabel: Vec<usize> = (0..n).collect();
    relabel.shuffle(&mut rng);
    let edges: Vec<(usize, usize)> =
        edges.iter().map(|&(a, b)| (relabel[a], relabel[b])).collect();
    ConflictGraph::from_edges(n, &edges)
}
