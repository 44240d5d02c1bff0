//! Back-off rate calculators: exact closed forms for acyclic, line,
//! inhomogeneous-line and chordal conflict graphs, the distributed
//! per-node variant, chordal approximations for general graphs (local
//! chordal subgraph, Bethe, completion), the light-traffic expansion and
//! the node-addition update.
//!
//! Every exact calculator targets the same object: the unique rate vector
//! under which the product-form chain realizes the requested throughputs.

use serde::{Deserialize, Serialize};

use crate::chordal::{
    maximal_cliques_chordal, maxchord, mcs_peo, min_degree_completion, verify_peo, CliqueTree,
    PeoOrder,
};
use crate::error::{Error, Result};
use crate::graph::{validate_iline, ConflictGraph, RateVector, ThroughputVector};
use crate::numeric::product_ratio;

/// Achievability margins at or below this value are rejected: the rate
/// formulas divide by margin terms and blow up at the boundary.
pub const MARGIN_EPS: f64 = 1e-9;

/// Tag identifying which calculator produced a rate report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Tree,
    Line,
    Iline,
    ChordalCt,
    ChordalPeo,
    Distributed,
    Lcs,
    Bethe,
    Completion,
    LightTraffic,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::Tree => "tree",
            Method::Line => "line",
            Method::Iline => "iline",
            Method::ChordalCt => "chordal-ct",
            Method::ChordalPeo => "chordal-peo",
            Method::Distributed => "distributed",
            Method::Lcs => "lcs",
            Method::Bethe => "bethe",
            Method::Completion => "completion",
            Method::LightTraffic => "light-traffic",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tree" => Ok(Method::Tree),
            "line" => Ok(Method::Line),
            "iline" => Ok(Method::Iline),
            "chordal-ct" => Ok(Method::ChordalCt),
            "chordal-peo" => Ok(Method::ChordalPeo),
            "distributed" => Ok(Method::Distributed),
            "lcs" => Ok(Method::Lcs),
            "bethe" => Ok(Method::Bethe),
            "completion" => Ok(Method::Completion),
            "light-traffic" => Ok(Method::LightTraffic),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

/// Rates plus the method tag and the achievability margin
/// `1 - max_K sum_{s in K} theta_s` of the structure the method used.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateReport {
    pub method: Method,
    pub rates: RateVector,
    pub margin: f64,
}

impl RateReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("rate report json");
        s.push('\n');
        s
    }
}

fn check_theta_len(g: &ConflictGraph, theta: &ThroughputVector) -> Result<()> {
    if theta.len() != g.n() {
        return Err(Error::LengthMismatch { expected: g.n(), got: theta.len() });
    }
    Ok(())
}

fn require_margin(margin: f64, context: &str) -> Result<()> {
    if margin <= MARGIN_EPS {
        return Err(Error::Unachievable { margin, context: context.to_string() });
    }
    Ok(())
}

/// Margin over edges: `1 - max_(i,j) (theta_i + theta_j)`, falling back to
/// `1 - max theta_i` on edgeless graphs.
pub fn edge_margin(g: &ConflictGraph, theta: &ThroughputVector) -> f64 {
    let th = theta.values();
    let single = th.iter().copied().fold(0.0f64, f64::max);
    let pair = g
        .edges()
        .iter()
        .map(|&(i, j)| th[i] + th[j])
        .fold(single, f64::max);
    1.0 - pair
}

/// Achievability on chordal graphs: every maximal-clique throughput sum
/// stays below one. Returns the verdict and the margin.
pub fn achievable(g: &ConflictGraph, theta: &ThroughputVector) -> Result<(bool, f64)> {
    check_theta_len(g, theta)?;
    let peo = mcs_peo(g, None)?;
    if !verify_peo(g, &peo) {
        return Err(Error::NotChordal);
    }
    let cliques = maximal_cliques_chordal(g, &peo)?;
    Ok(clique_margin_of(&cliques, theta.values()))
}

fn clique_margin_of(cliques: &[Vec<usize>], th: &[f64]) -> (bool, f64) {
    let worst = cliques
        .iter()
        .map(|k| k.iter().map(|&s| th[s]).sum::<f64>())
        .fold(0.0f64, f64::max);
    let margin = 1.0 - worst;
    (margin > MARGIN_EPS, margin)
}

/// Exact rates for an acyclic conflict graph:
/// `nu_i = theta_i (1-theta_i)^(deg-1) / prod_j (1 - theta_i - theta_j)`.
/// Isolated nodes get `theta / (1 - theta)`.
pub fn tree_rates(g: &ConflictGraph, theta: &ThroughputVector) -> Result<RateVector> {
    check_theta_len(g, theta)?;
    if !g.is_acyclic() {
        return Err(Error::NotAcyclic);
    }
    bethe_rates(g, theta)
}

/// The tree formula applied to an arbitrary conflict graph, cycles and
/// all. Exact on trees; an approximation elsewhere.
pub fn bethe_rates(g: &ConflictGraph, theta: &ThroughputVector) -> Result<RateVector> {
    check_theta_len(g, theta)?;
    let th = theta.values();
    for (k, j) in g.edges() {
        require_margin(1.0 - th[k] - th[j], &format!("edge ({k},{j}) throughput sum"))?;
    }
    let mut nu = Vec::with_capacity(g.n());
    for i in 0..g.n() {
        let d = g.degree(i);
        if d == 0 {
            nu.push(th[i] / (1.0 - th[i]));
            continue;
        }
        let num: Vec<f64> = std::iter::repeat(1.0 - th[i]).take(d - 1).collect();
        let den: Vec<f64> = g.nbrs(i).iter().map(|&j| 1.0 - th[i] - th[j]).collect();
        nu.push(th[i] * product_ratio(&num, &den));
    }
    RateVector::new(nu)
}

/// Exact rates for the homogeneous line network with interference range
/// `beta` (nodes interfere iff their indices differ by at most `beta`).
pub fn line_rates(n: usize, beta: usize, theta: &ThroughputVector) -> Result<RateVector> {
    if theta.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: theta.len() });
    }
    if n == 0 || beta >= n {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= beta < n, got beta = {beta}, n = {n}"
        )));
    }
    let th = theta.values();
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + th[i];
    }
    let window = |a: isize, b: isize| -> f64 {
        if a > b {
            0.0
        } else {
            prefix[(b + 1) as usize] - prefix[a.max(0) as usize]
        }
    };
    for i in 0..n.saturating_sub(beta) {
        require_margin(
            1.0 - window(i as isize, (i + beta) as isize),
            &format!("window starting at node {i}"),
        )?;
    }
    let b = beta as isize;
    let mut nu = Vec::with_capacity(n);
    for i0 in 0..n {
        // 1-based index ranges, shifted as we go.
        let i = (i0 + 1) as isize;
        let jlo = i.max(b + 1);
        let jhi = (i + b).min(n as isize);
        let num: Vec<f64> =
            (jlo..jhi).map(|j| 1.0 - window(j - b, j - 1)).collect();
        let den: Vec<f64> =
            (jlo..=jhi).map(|j| 1.0 - window(j - b - 1, j - 1)).collect();
        nu.push(th[i0] * product_ratio(&num, &den));
    }
    RateVector::new(nu)
}

/// Per-clique rates for a line of cliques: clique `i` holds `k[i]` nodes
/// and interferes with the previous and next `beta` cliques; every node
/// targets throughput `gamma`. Returns one rate per clique (all of its
/// members share it).
pub fn clique_line_rates(k: &[usize], beta: usize, gamma: f64) -> Result<Vec<f64>> {
    let n = k.len();
    if n == 0 || beta >= n {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= beta < n, got beta = {beta}, n = {n}"
        )));
    }
    if k.iter().any(|&ki| ki == 0) {
        return Err(Error::InvalidParameter("clique sizes must be positive".into()));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!("gamma {gamma} outside (0, 1)")));
    }
    let mut prefix = vec![0usize; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + k[i];
    }
    let window = |a: isize, b: isize| -> usize {
        if a > b {
            0
        } else {
            prefix[(b + 1) as usize] - prefix[a.max(0) as usize]
        }
    };
    let big_k = (0..n.saturating_sub(beta))
        .map(|i| window(i as isize, (i + beta) as isize))
        .max()
        .unwrap_or(k[0]);
    require_margin(1.0 - gamma * big_k as f64, "largest clique window")?;
    let b = beta as isize;
    let mut nu = Vec::with_capacity(n);
    for i0 in 0..n {
        let i = (i0 + 1) as isize;
        let jlo = i.max(b + 1);
        let jhi = (i + b).min(n as isize);
        let num: Vec<f64> =
            (jlo..jhi).map(|j| 1.0 - gamma * window(j - b, j - 1) as f64).collect();
        let den: Vec<f64> =
            (jlo..=jhi).map(|j| 1.0 - gamma * window(j - b - 1, j - 1) as f64).collect();
        nu.push(gamma * product_ratio(&num, &den));
    }
    Ok(nu)
}

/// The ordered maximal cliques of an inhomogeneous line network given its
/// range vector (see [`make_iline`](crate::graph::make_iline)): whenever
/// `beta[i] >= beta[i+1]`, the nodes `i - beta[i] ..= i` form one, and
/// they are ordered by minimum element.
pub fn iline_maximal_cliques(beta: &[usize]) -> Result<Vec<Vec<usize>>> {
    let n = validate_iline(beta)?;
    let mut cliques = Vec::new();
    for i in 0..n {
        if beta[i] >= beta[i + 1] {
            cliques.push(((i - beta[i])..=i).collect::<Vec<usize>>());
        }
    }
    cliques.sort_by_key(|k| k[0]);
    Ok(cliques)
}

/// Exact rates for an inhomogeneous line network, built from the margins
/// of the consecutive maximal cliques containing each node.
pub fn iline_rates(beta: &[usize], theta: &ThroughputVector) -> Result<RateVector> {
    let n = validate_iline(beta)?;
    if theta.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: theta.len() });
    }
    let th = theta.values();
    let cliques = iline_maximal_cliques(beta)?;
    let clique_sum: Vec<f64> =
        cliques.iter().map(|k| k.iter().map(|&s| th[s]).sum()).collect();
    for (k, sum) in cliques.iter().zip(&clique_sum) {
        require_margin(1.0 - sum, &format!("clique {k:?} throughput sum"))?;
    }
    let sep_sum: Vec<f64> = cliques
        .windows(2)
        .map(|w| w[0].iter().filter(|v| w[1].contains(v)).map(|&s| th[s]).sum())
        .collect();
    let mut nu = Vec::with_capacity(n);
    for i in 0..n {
        let first = cliques.iter().position(|k| k.contains(&i)).expect("node in a clique");
        let last = cliques.iter().rposition(|k| k.contains(&i)).unwrap();
        // Nodes in a single clique get an empty separator product.
        let num: Vec<f64> = (first..last).map(|j| 1.0 - sep_sum[j]).collect();
        let den: Vec<f64> = (first..=last).map(|j| 1.0 - clique_sum[j]).collect();
        nu.push(th[i] * product_ratio(&num, &den));
    }
    RateVector::new(nu)
}

/// Exact rates for a chordal conflict graph from a clique tree: for each
/// node, the product of its separator margins over the product of its
/// clique margins.
pub fn chordal_rates_clique_tree(
    g: &ConflictGraph,
    t: &CliqueTree,
    theta: &ThroughputVector,
) -> Result<RateVector> {
    check_theta_len(g, theta)?;
    t.validate(g)?;
    let th = theta.values();
    let clique_margins: Vec<f64> = t
        .cliques
        .iter()
        .map(|k| 1.0 - k.iter().map(|&s| th[s]).sum::<f64>())
        .collect();
    for (k, &m) in t.cliques.iter().zip(&clique_margins) {
        require_margin(m, &format!("clique {k:?} throughput sum"))?;
    }
    let sep_margins: Vec<f64> = t
        .separators
        .iter()
        .map(|s| 1.0 - s.iter().map(|&v| th[v]).sum::<f64>())
        .collect();
    let mut nu = Vec::with_capacity(g.n());
    for i in 0..g.n() {
        let num: Vec<f64> = t
            .separators
            .iter()
            .zip(&sep_margins)
            .filter(|(s, _)| s.binary_search(&i).is_ok())
            .map(|(_, &m)| m)
            .collect();
        let den: Vec<f64> = t
            .cliques
            .iter()
            .zip(&clique_margins)
            .filter(|(k, _)| k.binary_search(&i).is_ok())
            .map(|(_, &m)| m)
            .collect();
        nu.push(th[i] * product_ratio(&num, &den));
    }
    RateVector::new(nu)
}

/// Exact chordal rates along a perfect elimination ordering.
///
/// Positions run from last to first: the final node is rated as if alone,
/// and each earlier node `v` is rated as if its later neighbors `M` and
/// itself formed the whole network, while every rate in `M` picks up the
/// factor `(1 - sum_M theta) / (1 - theta_v - sum_M theta)`. The result
/// does not depend on which PEO is used.
pub fn chordal_rates_peo(
    g: &ConflictGraph,
    peo: &PeoOrder,
    theta: &ThroughputVector,
) -> Result<RateVector> {
    check_theta_len(g, theta)?;
    if !verify_peo(g, peo) {
        return Err(Error::InvalidPeo);
    }
    let th = theta.values();
    let n = g.n();
    let mut nu = vec![0.0f64; n];
    if n == 0 {
        return RateVector::new(nu);
    }
    let last = peo.alpha()[n - 1];
    require_margin(1.0 - th[last], &format!("node {last} throughput"))?;
    nu[last] = th[last] / (1.0 - th[last]);
    for k in (0..n - 1).rev() {
        let v = peo.alpha()[k];
        let m_sum: f64 = peo.later_neighbors(v).iter().map(|&s| th[s]).sum();
        let denom = 1.0 - th[v] - m_sum;
        require_margin(denom, &format!("clique at node {v} throughput sum"))?;
        nu[v] = th[v] / denom;
        let factor = (1.0 - m_sum) / denom;
        for &j in peo.later_neighbors(v) {
            nu[j] *= factor;
        }
    }
    RateVector::new(nu)
}

/// The back-off rate of node `i` computed from local information only:
/// the subgraph induced by its closed neighborhood and the targets of the
/// nodes in it. Equals the rate obtained from the whole graph.
pub fn distributed_rate(g: &ConflictGraph, i: usize, theta: &ThroughputVector) -> Result<f64> {
    check_theta_len(g, theta)?;
    let hood = g.closed_neighborhood(i)?;
    let (local, map) = g.induced_subgraph(&hood)?;
    let local_theta =
        ThroughputVector::new(map.iter().map(|&v| theta.values()[v]).collect())?;
    let peo = mcs_peo(&local, None)?;
    if !verify_peo(&local, &peo) {
        // Cannot happen when g is chordal; raised defensively.
        return Err(Error::NotChordal);
    }
    let nu = chordal_rates_peo(&local, &peo, &local_theta)?;
    let local_i = map.binary_search(&i).expect("i in its own neighborhood");
    Ok(nu.values()[local_i])
}

/// Local chordal subgraph approximation, exact on chordal graphs. Each
/// node extracts a maximal chordal subgraph of its closed neighborhood
/// (pivoting on itself) and rates itself there.
pub fn lcs_rates(g: &ConflictGraph, theta: &ThroughputVector) -> Result<RateVector> {
    Ok(lcs_rates_with_margin(g, theta)?.0)
}

/// As [`lcs_rates`], also returning the worst local achievability margin.
pub fn lcs_rates_with_margin(
    g: &ConflictGraph,
    theta: &ThroughputVector,
) -> Result<(RateVector, f64)> {
    check_theta_len(g, theta)?;
    let th = theta.values();
    let mut nu = Vec::with_capacity(g.n());
    let mut worst_margin = 1.0f64;
    for i in 0..g.n() {
        let hood = g.closed_neighborhood(i)?;
        let (local, map) = g.induced_subgraph(&hood)?;
        let local_i = map.binary_search(&i).expect("i in its own neighborhood");
        let chordal = maxchord(&local, local_i)?;
        let local_theta = ThroughputVector::new(map.iter().map(|&v| th[v]).collect())?;
        let rate = chordal_rates_peo(&chordal.subgraph, &chordal.peo, &local_theta).map_err(
            |e| match e {
                Error::Unachievable { margin, .. } => Error::LocallyUnachievable { node: i, margin },
                other => other,
            },
        )?;
        let cliques =
            maximal_cliques_chordal(&chordal.subgraph, &chordal.peo)?;
        let (_, margin) = clique_margin_of(&cliques, local_theta.values());
        worst_margin = worst_margin.min(margin);
        nu.push(rate.values()[local_i]);
    }
    Ok((RateVector::new(nu)?, worst_margin))
}

/// Chordal-completion approximation: rate the minimum-degree completion
/// of `g` exactly and reuse those rates on the original graph. Far less
/// accurate than the subgraph approximations when the fill is large.
pub fn completion_rates(g: &ConflictGraph, theta: &ThroughputVector) -> Result<RateVector> {
    check_theta_len(g, theta)?;
    let (completed, _fill) = min_degree_completion(g);
    let peo = mcs_peo(&completed, None)?;
    chordal_rates_peo(&completed, &peo, theta)
}

/// Third-order light-traffic expansion:
/// `nu_i = theta_i (1 + theta_i + sum_{j in N_i} theta_j)`.
pub fn light_traffic_rates(g: &ConflictGraph, theta: &ThroughputVector) -> Result<RateVector> {
    check_theta_len(g, theta)?;
    let th = theta.values();
    let nu = (0..g.n())
        .map(|i| {
            let s: f64 = g.nbrs(i).iter().map(|&j| th[j]).sum();
            th[i] * (1.0 + th[i] + s)
        })
        .collect();
    RateVector::new(nu)
}

/// Adjusts rates when a node joins the network with a clique as its
/// neighborhood: clique members scale by a common factor, everyone else
/// keeps their rate, and the newcomer is rated as if the clique plus
/// itself were the whole network. Exactness of the old rates carries over
/// to the extended network.
pub fn add_node_update(
    g: &ConflictGraph,
    nu: &RateVector,
    theta: &ThroughputVector,
    clique_neighbors: &[usize],
    theta_new: f64,
) -> Result<(RateVector, f64)> {
    check_theta_len(g, theta)?;
    if nu.len() != g.n() {
        return Err(Error::LengthMismatch { expected: g.n(), got: nu.len() });
    }
    if !(theta_new > 0.0 && theta_new < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "new throughput {theta_new} outside the open interval (0, 1)"
        )));
    }
    let mut clique: Vec<usize> = clique_neighbors.to_vec();
    clique.sort_unstable();
    clique.dedup();
    if let Some(&node) = clique.iter().find(|&&v| v >= g.n()) {
        return Err(Error::NodeOutOfRange { node, n: g.n() });
    }
    if !g.is_clique(&clique) {
        return Err(Error::NotAClique(clique));
    }
    let th = theta.values();
    let clique_sum: f64 = clique.iter().map(|&j| th[j]).sum();
    let denom = 1.0 - theta_new - clique_sum;
    require_margin(denom, "new node plus clique throughput sum")?;
    let factor = (1.0 - clique_sum) / denom;
    let mut out = nu.values().to_vec();
    for &j in &clique {
        out[j] *= factor;
    }
    let rate_new = theta_new / denom;
    Ok((RateVector::new(out)?, rate_new))
}
