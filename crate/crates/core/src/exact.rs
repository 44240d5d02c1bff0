//! Ground-truth engine: product-form stationary analysis by state-space
//! enumeration, closed-form normalizing constants, achievability via LP
//! feasibility over the enumerated state space, and brute-force rate
//! inversion for small general graphs.
//!
//! The stationary law of the idealized dynamics puts probability
//! proportional to the product of the active nodes' back-off rates on
//! each independent set; the normalizing constant `Z` sums those weights
//! over the whole state space.

use serde::Serialize;

use crate::chordal::CliqueTree;
use crate::error::{Error, Result};
use crate::graph::{neighbor_masks, ConflictGraph, RateVector, ThroughputVector};
use crate::graph::DEFAULT_ENUM_CAP;
use crate::numeric::{product_ratio, NeumaierSum};
use crate::rates::MARGIN_EPS;

/// Default node cap for the brute-force fixed-point inverter.
pub const DEFAULT_INVERT_CAP: usize = 20;
/// Iteration cap of the fixed-point inverter.
pub const INVERT_ITERATION_CAP: u64 = 1_000_000;
/// Interior slack used by [`achievable_general`]: state weights must admit
/// a representation with at least this much mass on every state.
pub const DEFAULT_INTERIOR_SLACK: f64 = 1e-12;

/// Exact stationary solution of the product-form chain.
#[derive(Clone, Debug, Serialize)]
pub struct ProductFormSolution {
    /// Normalizing constant.
    #[serde(rename = "Z")]
    pub z: f64,
    /// Exact per-node throughputs under the given rates.
    pub throughputs: ThroughputVector,
    /// Stationary probability per state, parallel to the enumeration
    /// order of [`enumerate_independent_sets`](crate::graph::enumerate_independent_sets);
    /// only filled on request (it can be huge).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<f64>>,
}

fn check_rate_len(g: &ConflictGraph, nu: &RateVector) -> Result<()> {
    if nu.len() != g.n() {
        return Err(Error::LengthMismatch { expected: g.n(), got: nu.len() });
    }
    Ok(())
}

/// Walks every independent set, calling `visit(mask, weight)` where
/// `weight` is the product of the rates of the active nodes.
fn fold_states(
    g: &ConflictGraph,
    nu: &[f64],
    cap: usize,
    mut visit: impl FnMut(u32, f64),
) -> Result<()> {
    let masks = neighbor_masks(g, cap)?;
    fn rec(
        i: usize,
        n: usize,
        current: u32,
        weight: f64,
        nu: &[f64],
        masks: &[u32],
        visit: &mut impl FnMut(u32, f64),
    ) {
        if i == n {
            visit(current, weight);
            return;
        }
        rec(i + 1, n, current, weight, nu, masks, visit);
        if masks[i] & current == 0 {
            rec(i + 1, n, current | (1 << i), weight * nu[i], nu, masks, visit);
        }
    }
    rec(0, g.n(), 0, 1.0, nu, &masks, &mut visit);
    Ok(())
}

/// Normalizing constant by enumeration, with compensated summation.
pub fn partition_function(g: &ConflictGraph, nu: &RateVector) -> Result<f64> {
    partition_function_capped(g, nu, DEFAULT_ENUM_CAP)
}

pub fn partition_function_capped(g: &ConflictGraph, nu: &RateVector, cap: usize) -> Result<f64> {
    check_rate_len(g, nu)?;
    let mut z = NeumaierSum::default();
    fold_states(g, nu.values(), cap, |_, w| z.add(w))?;
    Ok(z.value())
}

/// Exact per-node throughputs under back-off rates `nu`.
pub fn stationary_throughputs(g: &ConflictGraph, nu: &RateVector) -> Result<ThroughputVector> {
    stationary_throughputs_capped(g, nu, DEFAULT_ENUM_CAP)
}

pub fn stationary_throughputs_capped(
    g: &ConflictGraph,
    nu: &RateVector,
    cap: usize,
) -> Result<ThroughputVector> {
    Ok(solve_capped(g, nu, false, cap)?.throughputs)
}

/// Full solution; set `with_pi` to also materialize the per-state law.
pub fn solve(g: &ConflictGraph, nu: &RateVector, with_pi: bool) -> Result<ProductFormSolution> {
    solve_capped(g, nu, with_pi, DEFAULT_ENUM_CAP)
}

pub fn solve_capped(
    g: &ConflictGraph,
    nu: &RateVector,
    with_pi: bool,
    cap: usize,
) -> Result<ProductFormSolution> {
    check_rate_len(g, nu)?;
    let n = g.n();
    let mut z = NeumaierSum::default();
    let mut per_node = vec![NeumaierSum::default(); n];
    let mut weights = Vec::new();
    fold_states(g, nu.values(), cap, |mask, w| {
        z.add(w);
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            per_node[i].add(w);
            m &= m - 1;
        }
        if with_pi {
            weights.push(w);
        }
    })?;
    let z = z.value();
    let throughputs =
        ThroughputVector::new(per_node.iter().map(|s| s.value() / z).collect::<Vec<_>>())?;
    let pi = with_pi.then(|| weights.iter().map(|w| w / z).collect());
    Ok(ProductFormSolution { z, throughputs, pi })
}

/// Closed-form normalizing constant for an acyclic conflict graph under
/// the exact tree rates: a product of `(1 - theta_j)` degree powers over
/// a product of edge margins.
pub fn z_tree_closed_form(g: &ConflictGraph, theta: &ThroughputVector) -> Result<f64> {
    if theta.len() != g.n() {
        return Err(Error::LengthMismatch { expected: g.n(), got: theta.len() });
    }
    if !g.is_acyclic() {
        return Err(Error::NotAcyclic);
    }
    let th = theta.values();
    let mut num = Vec::new();
    let mut den = Vec::new();
    for i in 0..g.n() {
        let d = g.degree(i);
        if d == 0 {
            den.push(1.0 - th[i]);
        } else {
            num.extend(std::iter::repeat(1.0 - th[i]).take(d - 1));
        }
    }
    for (k, j) in g.edges() {
        let margin = 1.0 - th[k] - th[j];
        if margin <= MARGIN_EPS {
            return Err(Error::Unachievable {
                margin,
                context: format!("edge ({k},{j}) throughput sum"),
            });
        }
        den.push(margin);
    }
    Ok(product_ratio(&num, &den))
}

/// Closed-form normalizing constant for a homogeneous line network with
/// interference range `beta` under the exact line rates.
pub fn z_line_closed_form(n: usize, beta: usize, theta: &ThroughputVector) -> Result<f64> {
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
    // Window sum over 0-based inclusive range [a, b]; empty when a > b.
    let window = |a: isize, b: isize| -> f64 {
        if a > b {
            0.0
        } else {
            prefix[(b + 1) as usize] - prefix[a.max(0) as usize]
        }
    };
    for i in 0..n.saturating_sub(beta) {
        let s = window(i as isize, (i + beta) as isize);
        if s >= 1.0 - MARGIN_EPS {
            return Err(Error::Unachievable {
                margin: 1.0 - s,
                context: format!("window starting at node {i}"),
            });
        }
    }
    let b = beta as isize;
    let mut num = Vec::new();
    let mut den = Vec::new();
    for j in b..(n as isize - 1) {
        num.push(1.0 - window(j - b + 1, j));
    }
    for j in b..(n as isize) {
        den.push(1.0 - window(j - b, j));
    }
    Ok(product_ratio(&num, &den))
}

fn sum_over(th: &[f64], set: &[usize]) -> f64 {
    set.iter().map(|&s| th[s]).sum()
}

fn check_tree_margins(t: &CliqueTree, th: &[f64]) -> Result<()> {
    for k in &t.cliques {
        let margin = 1.0 - sum_over(th, k);
        if margin <= MARGIN_EPS {
            return Err(Error::Unachievable {
                margin,
                context: format!("clique {k:?} throughput sum"),
            });
        }
    }
    Ok(())
}

/// Closed-form normalizing constant for a chordal graph under the exact
/// chordal rates: separator margins over clique margins.
pub fn z_chordal_closed_form(t: &CliqueTree, theta: &ThroughputVector) -> Result<f64> {
    let th = theta.values();
    check_tree_margins(t, th)?;
    let num: Vec<f64> = t.separators.iter().map(|s| 1.0 - sum_over(th, s)).collect();
    let den: Vec<f64> = t.cliques.iter().map(|k| 1.0 - sum_over(th, k)).collect();
    Ok(product_ratio(&num, &den))
}

/// Normalizing constant of the sub-network on one side of a clique-tree
/// edge, under the global chordal rates.
///
/// Removing `removed_edge` splits the tree in two; `side` names one of
/// its endpoints, and the value refers to the network restricted to the
/// nodes covered by that subtree minus the separator.
pub fn z_chordal_subtree(
    t: &CliqueTree,
    removed_edge: (usize, usize),
    side: usize,
    theta: &ThroughputVector,
) -> Result<f64> {
    let th = theta.values();
    check_tree_margins(t, th)?;
    let edge_idx = t
        .tree_edges
        .iter()
        .position(|&(a, b)| (a, b) == removed_edge || (b, a) == removed_edge)
        .ok_or_else(|| {
            Error::InvalidCliqueTree(format!("edge {removed_edge:?} not in the tree"))
        })?;
    let (a, b) = t.tree_edges[edge_idx];
    if side != a && side != b {
        return Err(Error::InvalidCliqueTree(format!(
            "clique {side} is not an endpoint of {removed_edge:?}"
        )));
    }
    // Cliques reachable from `side` without crossing the removed edge.
    let m = t.cliques.len();
    let mut tree_adj = vec![Vec::new(); m];
    for (e, &(x, y)) in t.tree_edges.iter().enumerate() {
        if e != edge_idx {
            tree_adj[x].push((y, e));
            tree_adj[y].push((x, e));
        }
    }
    let mut in_side = vec![false; m];
    let mut side_edges = Vec::new();
    let mut stack = vec![side];
    in_side[side] = true;
    while let Some(c) = stack.pop() {
        for &(d, e) in &tree_adj[c] {
            if !in_side[d] {
                in_side[d] = true;
                side_edges.push(e);
                stack.push(d);
            }
        }
    }
    let mut num: Vec<f64> =
        side_edges.iter().map(|&e| 1.0 - sum_over(th, &t.separators[e])).collect();
    num.push(1.0 - sum_over(th, &t.separators[edge_idx]));
    let den: Vec<f64> = (0..m)
        .filter(|&c| in_side[c])
        .map(|c| 1.0 - sum_over(th, &t.cliques[c]))
        .collect();
    Ok(product_ratio(&num, &den))
}

/// Achievability for general graphs: is `theta` in the interior of the
/// convex hull of the state space? Decided by LP feasibility of a convex
/// representation with at least [`DEFAULT_INTERIOR_SLACK`] mass per state.
pub fn achievable_general(g: &ConflictGraph, theta: &ThroughputVector) -> Result<bool> {
    achievable_general_with_slack(g, theta, DEFAULT_INTERIOR_SLACK, DEFAULT_INVERT_CAP)
}

/// As [`achievable_general`] with explicit slack and node cap.
pub fn achievable_general_with_slack(
    g: &ConflictGraph,
    theta: &ThroughputVector,
    slack: f64,
    cap: usize,
) -> Result<bool> {
    if theta.len() != g.n() {
        return Err(Error::LengthMismatch { expected: g.n(), got: theta.len() });
    }
    if g.n() > cap {
        return Err(Error::EnumerationCap { n: g.n(), cap });
    }
    let states = crate::graph::enumerate_independent_sets_capped(g, cap)?;
    feasible_with_slack(g.n(), states.masks(), theta.values(), slack)
}

/// Phase-1 simplex feasibility for: find xi over states with
/// `sum xi = 1`, `sum_{states containing i} xi = theta_i`, `xi >= slack`.
///
/// After substituting out the slack the problem is membership of a
/// shifted target in the convex cone of the columns `(1, state)`; we
/// minimize the total artificial mass with Bland's rule (dropping
/// artificials once they leave the basis) and declare feasibility when
/// the optimum vanishes relative to the slack scale.
fn feasible_with_slack(n: usize, masks: &[u32], theta: &[f64], slack: f64) -> Result<bool> {
    let m = n + 1;
    let col = |mask: u32, row: usize| -> f64 {
        if row == 0 {
            1.0
        } else if mask & (1 << (row - 1)) != 0 {
            1.0
        } else {
            0.0
        }
    };
    // Right-hand side after xi = slack + eta.
    let mut rhs = vec![0.0f64; m];
    rhs[0] = 1.0 - slack * masks.len() as f64;
    for (i, item) in rhs.iter_mut().enumerate().skip(1) {
        let count = masks.iter().filter(|&&z| z & (1 << (i - 1)) != 0).count();
        *item = theta[i - 1] - slack * count as f64;
    }
    if rhs.iter().any(|&b| b < 0.0) {
        return Ok(false);
    }
    // Basis starts as the artificial identity.
    let mut binv: Vec<Vec<f64>> = (0..m)
        .map(|r| (0..m).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut basis: Vec<Option<usize>> = (0..m).map(|_| None).collect(); // None = artificial
    let mut xb = rhs.clone();
    let tol = 1e-12;
    let iter_cap: u64 = 200_000;
    for iter in 0u64.. {
        if iter >= iter_cap {
            return Err(Error::IterationCap { cap: iter_cap, residual: objective(&basis, &xb) });
        }
        // Simplex multipliers y = c_B B^{-1}; artificial costs are 1.
        let mut y = vec![0.0f64; m];
        for (r, b) in basis.iter().enumerate() {
            if b.is_none() {
                for c in 0..m {
                    y[c] += binv[r][c];
                }
            }
        }
        // Bland's rule: first column with negative reduced cost.
        let mut entering = None;
        'scan: for (j, &mask) in masks.iter().enumerate() {
            if basis.iter().any(|&b| b == Some(j)) {
                continue;
            }
            let mut red = 0.0;
            for (row, yr) in y.iter().enumerate() {
                if *yr != 0.0 {
                    red -= yr * col(mask, row);
                }
            }
            if red < -tol {
                // Ratio test; skip columns with no positive direction.
                let d: Vec<f64> = (0..m)
                    .map(|r| (0..m).map(|c| binv[r][c] * col(mask, c)).sum())
                    .collect();
                let mut leave: Option<(usize, f64)> = None;
                for (r, &dr) in d.iter().enumerate() {
                    if dr > tol {
                        let ratio = xb[r] / dr;
                        let better = match leave {
                            None => true,
                            Some((lr, lratio)) => {
                                ratio < lratio - tol
                                    || (ratio < lratio + tol
                                        && basis[r].unwrap_or(usize::MAX)
                                            < basis[lr].unwrap_or(usize::MAX))
                            }
                        };
                        if better {
                            leave = Some((r, ratio));
                        }
                    }
                }
                let Some((r, _)) = leave else { continue 'scan };
                // Pivot.
                let dr = d[r];
                for c in 0..m {
                    binv[r][c] /= dr;
                }
                xb[r] /= dr;
                for rr in 0..m {
                    if rr != r && d[rr] != 0.0 {
                        let f = d[rr];
                        for c in 0..m {
                            binv[rr][c] -= f * binv[r][c];
                        }
                        xb[rr] -= f * xb[r];
                        if xb[rr] < 0.0 {
                            xb[rr] = 0.0;
                        }
                    }
                }
                basis[r] = Some(j);
                entering = Some(j);
                break 'scan;
            }
        }
        if entering.is_none() {
            break;
        }
        if objective(&basis, &xb) <= feasibility_threshold(slack) {
            return Ok(true);
        }
    }
    Ok(objective(&basis, &xb) <= feasibility_threshold(slack))
}

fn objective(basis: &[Option<usize>], xb: &[f64]) -> f64 {
    basis
        .iter()
        .zip(xb)
        .filter_map(|(b, &x)| b.is_none().then_some(x))
        .sum()
}

fn feasibility_threshold(slack: f64) -> f64 {
    0.5 * slack.max(1e-12)
}

/// Brute-force rate inversion for small general graphs: damped
/// multiplicative fixed point on the exact solver.
///
/// Each sweep rescales `nu_i` by `theta_i / theta_hat_i`; when the update
/// direction flips sign the factor is square-root damped. Fails if
/// `theta` is not strictly achievable or the iteration cap is reached.
pub fn invert_rates_bruteforce(
    g: &ConflictGraph,
    theta: &ThroughputVector,
    tol: f64,
) -> Result<RateVector> {
    invert_rates_bruteforce_capped(g, theta, tol, DEFAULT_INVERT_CAP)
}

pub fn invert_rates_bruteforce_capped(
    g: &ConflictGraph,
    theta: &ThroughputVector,
    tol: f64,
    cap: usize,
) -> Result<RateVector> {
    if theta.len() != g.n() {
        return Err(Error::LengthMismatch { expected: g.n(), got: theta.len() });
    }
    if g.n() > cap {
        return Err(Error::EnumerationCap { n: g.n(), cap });
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    if !achievable_general_with_slack(g, theta, 1e-9, cap)? {
        return Err(Error::Unachievable {
            margin: 0.0,
            context: "target is not interior to the achievable region".into(),
        });
    }
    let th = theta.values();
    // Light-traffic starting point.
    let mut nu: Vec<f64> = (0..g.n())
        .map(|i| {
            let s: f64 = g.nbrs(i).iter().map(|&j| th[j]).sum();
            th[i] * (1.0 + th[i] + s)
        })
        .collect();
    let mut prev_dir = vec![0.0f64; g.n()];
    for _ in 0..INVERT_ITERATION_CAP {
        let hat = stationary_throughputs_capped(g, &RateVector::new(nu.clone())?, cap)?;
        let hat = hat.values();
        let residual = th
            .iter()
            .zip(hat)
            .map(|(t, h)| (t - h).abs())
            .fold(0.0f64, f64::max);
        if residual <= tol {
            return RateVector::new(nu);
        }
        for i in 0..g.n() {
            let mut factor = th[i] / hat[i];
            let dir = factor.ln();
            if dir * prev_dir[i] < 0.0 {
                factor = factor.sqrt();
            }
            prev_dir[i] = dir;
            nu[i] *= factor;
        }
    }
    let hat = stationary_throughputs_capped(g, &RateVector::new(nu.clone())?, cap)?;
    let residual = th
        .iter()
        .zip(hat.values())
        .map(|(t, h)| (t - h).abs())
        .fold(0.0f64, f64::max);
    Err(Error::IterationCap { cap: INVERT_ITERATION_CAP, residual })
}
