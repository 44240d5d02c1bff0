//! Event-driven continuous-time simulator of the idealized CSMA/CA
//! dynamics: inactive, unblocked nodes hold exponential back-off clocks;
//! a clock that fires starts a transmission which blocks all neighbors;
//! blocked clocks are resampled once the neighborhood clears (equivalent
//! in law to freezing, by memorylessness of the exponential).
//!
//! A single run is strictly sequential and deterministic in
//! `(graph, rates, config)`. Replications run concurrently on independent
//! RNG streams and aggregate order-independently.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ConflictGraph, RateVector, ThroughputVector};

/// Rates above this trigger a mixing warning: a node with an enormous
/// back-off rate hogs the channel in long bursts, slowing convergence of
/// the chain to its steady state.
pub const HIGH_RATE_WARNING: f64 = 1e4;

/// Transmission length law; both have mean 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransmissionDist {
    /// Exponential with mean 1.
    Exponential,
    /// Constant length 1 (the insensitivity spot-check).
    Deterministic,
}

impl std::str::FromStr for TransmissionDist {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp" | "exponential" => Ok(TransmissionDist::Exponential),
            "det" | "deterministic" => Ok(TransmissionDist::Deterministic),
            other => Err(Error::InvalidParameter(format!(
                "unknown transmission distribution `{other}`"
            ))),
        }
    }
}

/// Simulation parameters.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SimConfig {
    /// Simulated time horizon.
    pub horizon: f64,
    /// Base seed; replication `k` runs on stream `k` of
    /// `ChaCha12Rng::seed_from_u64(seed)`.
    pub seed: u64,
    pub transmission: TransmissionDist,
    /// Fraction of the horizon discarded before measurement, in [0, 0.5].
    pub warmup: f64,
}

impl SimConfig {
    pub fn new(horizon: f64, seed: u64) -> Self {
        Self { horizon, seed, transmission: TransmissionDist::Exponential, warmup: 0.0 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "horizon {} must be positive and finite",
                self.horizon
            )));
        }
        if !(0.0..=0.5).contains(&self.warmup) {
            return Err(Error::InvalidParameter(format!(
                "warmup fraction {} outside [0, 0.5]",
                self.warmup
            )));
        }
        Ok(())
    }
}

/// Per-node estimates from one run.
#[derive(Clone, Debug, Serialize)]
pub struct SimResult {
    /// Busy-time fraction per node (the primary throughput estimate).
    pub busy_fraction: Vec<f64>,
    /// Transmissions completed inside the measurement window.
    pub packets: Vec<u64>,
    /// Packet-count estimate: completed transmissions times mean length
    /// over the window; matches `busy_fraction` in expectation.
    pub packet_rate: Vec<f64>,
    pub min_estimate: f64,
    pub max_estimate: f64,
    /// Events processed (deterministic).
    pub events: u64,
    /// Wall-clock seconds (not serialized; timing is not part of artifacts).
    #[serde(skip)]
    pub elapsed_seconds: f64,
    pub warnings: Vec<String>,
}

/// Replicated runs with normal-approximation confidence half-widths.
#[derive(Clone, Debug, Serialize)]
pub struct ReplicatedSimResult {
    pub replications: usize,
    /// Mean busy-fraction estimate per node.
    pub estimates: Vec<f64>,
    /// 95% confidence half-width per node.
    pub ci_half_width: Vec<f64>,
    pub min_estimate: f64,
    pub max_estimate: f64,
    pub warnings: Vec<String>,
}

/// Mean and maximum relative deviation of estimates from targets.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DeviationReport {
    pub mean_rel_dev: f64,
    pub max_rel_dev: f64,
}

#[derive(Clone, Copy, PartialEq)]
struct Event {
    time: f64,
    seq: u64,
    node: u32,
    epoch: u32,
    kind: EventKind,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum EventKind {
    BackoffExpired,
    TransmissionEnd,
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Reversed: BinaryHeap is a max-heap, we need earliest-first.
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Simulates the network once. Deterministic given `(g, nu, cfg)`.
pub fn simulate(g: &ConflictGraph, nu: &RateVector, cfg: &SimConfig) -> Result<SimResult> {
    simulate_stream(g, nu, cfg, 0)
}

fn simulate_stream(
    g: &ConflictGraph,
    nu: &RateVector,
    cfg: &SimConfig,
    stream: u64,
) -> Result<SimResult> {
    cfg.validate()?;
    if nu.len() != g.n() {
        return Err(Error::LengthMismatch { expected: g.n(), got: nu.len() });
    }
    let started = std::time::Instant::now();
    let n = g.n();
    let rates = nu.values();
    let mut warnings = Vec::new();
    if let Some((i, &r)) = rates.iter().enumerate().find(|(_, &r)| r > HIGH_RATE_WARNING) {
        warnings.push(format!(
            "node {i} has back-off rate {r:.3e} > {HIGH_RATE_WARNING:.0e}; expect bursty \
             channel holding and slow mixing"
        ));
    }

    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    // Inverse-CDF exponential sampling keeps the stream stable across
    // library versions.
    let mut sample_exp = move |rate: f64| -> f64 {
        let u: f64 = rng.gen();
        -(-u).ln_1p() / rate
    };

    let horizon = cfg.horizon;
    let window_start = cfg.warmup * horizon;
    let window_len = horizon - window_start;

    let mut heap = std::collections::BinaryHeap::with_capacity(2 * n);
    let mut seq = 0u64;
    let mut push = |heap: &mut std::collections::BinaryHeap<Event>,
                    time: f64,
                    node: usize,
                    epoch: u32,
                    kind: EventKind| {
        heap.push(Event { time, seq, node: node as u32, epoch, kind });
        seq += 1;
    };

    let mut active = vec![false; n];
    let mut blockers = vec![0u32; n];
    let mut epoch = vec![0u32; n];
    let mut busy_since = vec![0.0f64; n];
    let mut busy_time = vec![0.0f64; n];
    let mut packets = vec![0u64; n];
    let mut events = 0u64;

    // Window overlap of an activity interval [a, b].
    let overlap = |a: f64, b: f64| -> f64 { (b.min(horizon) - a.max(window_start)).max(0.0) };

    for i in 0..n {
        let t = sample_exp(rates[i]);
        push(&mut heap, t, i, 0, EventKind::BackoffExpired);
    }

    while let Some(&ev) = heap.peek() {
        if ev.time > horizon {
            break;
        }
        let ev = heap.pop().unwrap();
        let i = ev.node as usize;
        match ev.kind {
            EventKind::BackoffExpired => {
                if ev.epoch != epoch[i] {
                    continue; // Stale clock (frozen or consumed).
                }
                events += 1;
                // Hard model invariant: activation requires a silent
                // neighborhood.
                assert!(
                    !active[i] && blockers[i] == 0,
                    "activation of node {i} with busy bookkeeping"
                );
                assert!(
                    g.nbrs(i).iter().all(|&j| !active[j]),
                    "adjacent nodes active simultaneously at node {i}"
                );
                active[i] = true;
                busy_since[i] = ev.time;
                epoch[i] = epoch[i].wrapping_add(1);
                let dur = match cfg.transmission {
                    TransmissionDist::Exponential => sample_exp(1.0),
                    TransmissionDist::Deterministic => 1.0,
                };
                push(&mut heap, ev.time + dur, i, epoch[i], EventKind::TransmissionEnd);
                for &j in g.nbrs(i) {
                    blockers[j] += 1;
                    if !active[j] && blockers[j] == 1 {
                        // Freeze j's clock; it is resampled on unfreeze.
                        epoch[j] = epoch[j].wrapping_add(1);
                    }
                }
            }
            EventKind::TransmissionEnd => {
                debug_assert_eq!(ev.epoch, epoch[i]);
                events += 1;
                active[i] = false;
                busy_time[i] += overlap(busy_since[i], ev.time);
                if ev.time > window_start {
                    packets[i] += 1;
                }
                for &j in g.nbrs(i) {
                    blockers[j] -= 1;
                    if !active[j] && blockers[j] == 0 {
                        epoch[j] = epoch[j].wrapping_add(1);
                        let t = ev.time + sample_exp(rates[j]);
                        push(&mut heap, t, j, epoch[j], EventKind::BackoffExpired);
                    }
                }
                if blockers[i] == 0 {
                    epoch[i] = epoch[i].wrapping_add(1);
                    let t = ev.time + sample_exp(rates[i]);
                    push(&mut heap, t, i, epoch[i], EventKind::BackoffExpired);
                }
            }
        }
    }
    // Close out transmissions still running at the horizon.
    for i in 0..n {
        if active[i] {
            busy_time[i] += overlap(busy_since[i], horizon);
        }
    }

    let busy_fraction: Vec<f64> = busy_time.iter().map(|b| b / window_len).collect();
    let packet_rate: Vec<f64> = packets.iter().map(|&p| p as f64 / window_len).collect();
    let min_estimate = busy_fraction.iter().copied().fold(f64::INFINITY, f64::min);
    let max_estimate = busy_fraction.iter().copied().fold(0.0f64, f64::max);
    Ok(SimResult {
        busy_fraction,
        packets,
        packet_rate,
        min_estimate,
        max_estimate,
        events,
        elapsed_seconds: started.elapsed().as_secs_f64(),
        warnings,
    })
}

/// Independent replications; replication `k` uses RNG stream `k` of the
/// base seed, so results do not depend on scheduling.
pub fn simulate_replicated(
    g: &ConflictGraph,
    nu: &RateVector,
    cfg: &SimConfig,
    replications: usize,
) -> Result<ReplicatedSimResult> {
    if replications == 0 {
        return Err(Error::InvalidParameter("need at least one replication".into()));
    }
    let runs: Vec<SimResult> = (0..replications)
        .into_par_iter()
        .map(|k| simulate_stream(g, nu, cfg, k as u64))
        .collect::<Result<Vec<_>>>()?;
    let n = g.n();
    let r = replications as f64;
    let mut estimates = vec![0.0f64; n];
    for run in &runs {
        for (e, b) in estimates.iter_mut().zip(&run.busy_fraction) {
            *e += b / r;
        }
    }
    let mut ci_half_width = vec![0.0f64; n];
    if replications > 1 {
        for (i, hw) in ci_half_width.iter_mut().enumerate() {
            let var: f64 = runs
                .iter()
                .map(|run| (run.busy_fraction[i] - estimates[i]).powi(2))
                .sum::<f64>()
                / (r - 1.0);
            *hw = 1.96 * (var / r).sqrt();
        }
    }
    let min_estimate = estimates.iter().copied().fold(f64::INFINITY, f64::min);
    let max_estimate = estimates.iter().copied().fold(0.0f64, f64::max);
    let warnings = runs.first().map(|r| r.warnings.clone()).unwrap_or_default();
    Ok(ReplicatedSimResult {
        replications,
        estimates,
        ci_half_width,
        min_estimate,
        max_estimate,
        warnings,
    })
}

/// Relative deviation of a run's estimates from the targets.
pub fn deviation_report(targets: &ThroughputVector, result: &SimResult) -> Result<DeviationReport> {
    deviation_of(targets, &result.busy_fraction)
}

/// Relative deviation of arbitrary per-node estimates from the targets.
pub fn deviation_of(targets: &ThroughputVector, estimates: &[f64]) -> Result<DeviationReport> {
    if targets.len() != estimates.len() {
        return Err(Error::LengthMismatch { expected: targets.len(), got: estimates.len() });
    }
    let mut mean = 0.0;
    let mut max = 0.0f64;
    for (t, e) in targets.values().iter().zip(estimates) {
        let rel = (e - t).abs() / t;
        mean += rel / targets.len() as f64;
        max = max.max(rel);
    }
    Ok(DeviationReport { mean_rel_dev: mean, max_rel_dev: max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chordal::{clique_tree, mcs_peo, random_chordal_graph};
    use crate::exact::stationary_throughputs;
    use crate::graph::{make_ring, ThroughputVector};
    use crate::rates::chordal_rates_clique_tree;

    fn rv(v: &[f64]) -> RateVector {
        RateVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn single_node_alternating_renewal() {
        let g = ConflictGraph::edgeless(1);
        let cfg = SimConfig::new(1e6, 42);
        let res = simulate(&g, &rv(&[1.0]), &cfg).unwrap();
        assert!(
            (res.busy_fraction[0] - 0.5).abs() < 0.002,
            "estimate {}",
            res.busy_fraction[0]
        );
        assert!((res.packet_rate[0] - 0.5).abs() < 0.002);
    }

    #[test]
    fn identical_configs_reproduce_bitwise() {
        let g = make_ring(5).unwrap();
        let nu = rv(&[0.4, 0.6, 0.5, 0.7, 0.3]);
        let cfg = SimConfig::new(2e4, 9);
        let a = simulate(&g, &nu, &cfg).unwrap();
        let b = simulate(&g, &nu, &cfg).unwrap();
        assert_eq!(a.busy_fraction, b.busy_fraction);
        assert_eq!(a.packets, b.packets);
        assert_eq!(a.events, b.events);
        let c = simulate(&g, &nu, &SimConfig::new(2e4, 10)).unwrap();
        assert_ne!(a.busy_fraction, c.busy_fraction);
    }

    #[test]
    fn replication_ci_covers_the_truth() {
        let g = ConflictGraph::edgeless(1);
        let cfg = SimConfig::new(2e4, 7);
        let rep = simulate_replicated(&g, &rv(&[1.0]), &cfg, 10).unwrap();
        assert!(
            (rep.estimates[0] - 0.5).abs() <= rep.ci_half_width[0] * 1.5,
            "estimate {} hw {}",
            rep.estimates[0],
            rep.ci_half_width[0]
        );
        // Same seed, same aggregate.
        let rep2 = simulate_replicated(&g, &rv(&[1.0]), &cfg, 10).unwrap();
        assert_eq!(rep.estimates, rep2.estimates);
        // Replication 0 coincides with the single run.
        let single = simulate(&g, &rv(&[1.0]), &cfg).unwrap();
        let rep1 = simulate_replicated(&g, &rv(&[1.0]), &cfg, 1).unwrap();
        assert_eq!(rep1.estimates[0], single.busy_fraction[0]);
    }

    #[test]
    fn ci_width_shrinks_with_replications() {
        let g = ConflictGraph::edgeless(1);
        let cfg = SimConfig::new(5e3, 11);
        let few = simulate_replicated(&g, &rv(&[1.0]), &cfg, 10).unwrap();
        let many = simulate_replicated(&g, &rv(&[1.0]), &cfg, 40).unwrap();
        let ratio = many.ci_half_width[0] / few.ci_half_width[0];
        // Expect about 1/2; allow a generous band.
        assert!((0.25..0.9).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn estimates_converge_with_horizon() {
        // Quadrupling the horizon roughly halves the error, checked on
        // the mean absolute deviation over replications.
        let g = make_ring(6).unwrap();
        let theta = ThroughputVector::new(vec![0.2; 6]).unwrap();
        let nu = crate::exact::invert_rates_bruteforce(&g, &theta, 1e-10).unwrap();
        let mean_abs_dev = |horizon: f64| -> f64 {
            let cfg =
                SimConfig { horizon, seed: 5, transmission: TransmissionDist::Exponential, warmup: 0.0 };
            let rep = simulate_replicated(&g, &nu, &cfg, 16).unwrap();
            rep.estimates.iter().map(|e| (e - 0.2).abs()).sum::<f64>() / 6.0
        };
        let coarse = mean_abs_dev(4e3);
        let fine = mean_abs_dev(1.6e4);
        let ratio = coarse / fine;
        assert!((1.0..4.0).contains(&ratio), "convergence ratio {ratio}");
    }

    #[test]
    fn deterministic_transmissions_are_insensitive() {
        let g = random_chordal_graph(10, 0.5, 33).unwrap();
        let peo = mcs_peo(&g, None).unwrap();
        let t = clique_tree(&g, &peo).unwrap();
        let theta = ThroughputVector::new(vec![0.07; 10]).unwrap();
        let nu = chordal_rates_clique_tree(&g, &t, &theta).unwrap();
        let mk = |dist| SimConfig { horizon: 4e4, seed: 3, transmission: dist, warmup: 0.0 };
        let exp =
            simulate_replicated(&g, &nu, &mk(TransmissionDist::Exponential), 8).unwrap();
        let det =
            simulate_replicated(&g, &nu, &mk(TransmissionDist::Deterministic), 8).unwrap();
        for i in 0..10 {
            let gap = (exp.estimates[i] - det.estimates[i]).abs();
            let slack = exp.ci_half_width[i] + det.ci_half_width[i];
            assert!(gap <= slack, "node {i}: gap {gap} exceeds CI overlap {slack}");
        }
    }

    #[test]
    fn simulator_tracks_exact_solver_within_three_sigma() {
        let mut passes = 0;
        let total = 40;
        for seed in 0..total {
            let g = random_chordal_graph(9, 0.5, 1000 + seed).unwrap();
            let peo = mcs_peo(&g, None).unwrap();
            let t = clique_tree(&g, &peo).unwrap();
            let theta = ThroughputVector::new(vec![0.06; 9]).unwrap();
            let nu = chordal_rates_clique_tree(&g, &t, &theta).unwrap();
            let exact = stationary_throughputs(&g, &nu).unwrap();
            // Many replications keep the standard-error estimate tight, so
            // the three-sigma band has close to its nominal coverage.
            let cfg = SimConfig {
                horizon: 2e4,
                seed,
                transmission: TransmissionDist::Exponential,
                warmup: 0.05,
            };
            let rep = simulate_replicated(&g, &nu, &cfg, 60).unwrap();
            let ok = (0..9).all(|i| {
                let se = (rep.ci_half_width[i] / 1.96).max(1e-12);
                (rep.estimates[i] - exact.values()[i]).abs() <= 3.0 * se
            });
            if ok {
                passes += 1;
            }
        }
        assert!(
            passes * 100 >= total * 95,
            "only {passes}/{total} seeds within three standard errors"
        );
    }

    #[test]
    fn warmup_and_validation() {
        let g = ConflictGraph::edgeless(2);
        let mut cfg = SimConfig::new(1e4, 1);
        cfg.warmup = 0.25;
        let res = simulate(&g, &rv(&[1.0, 0.5]), &cfg).unwrap();
        assert!(res.busy_fraction.iter().all(|b| (0.0..=1.0).contains(b)));

        cfg.warmup = 0.7;
        assert!(simulate(&g, &rv(&[1.0, 0.5]), &cfg).is_err());
        assert!(simulate(&g, &rv(&[1.0, 0.5]), &SimConfig::new(0.0, 1)).is_err());
        assert!(simulate(&g, &rv(&[1.0]), &SimConfig::new(1.0, 1)).is_err());
    }

    #[test]
    fn high_rate_warning_is_emitted() {
        let g = ConflictGraph::edgeless(1);
        let res = simulate(&g, &rv(&[2e4]), &SimConfig::new(10.0, 1)).unwrap();
        assert_eq!(res.warnings.len(), 1);
        assert!(res.warnings[0].contains("node 0"));
    }

    #[test]
    fn deviation_report_basics() {
        let targets = ThroughputVector::new(vec![0.2, 0.4]).unwrap();
        let rep = deviation_of(&targets, &[0.2, 0.4]).unwrap();
        assert_eq!(rep.mean_rel_dev, 0.0);
        let rep = deviation_of(&targets, &[0.202, 0.404]).unwrap();
        assert!((rep.mean_rel_dev - 0.01).abs() < 1e-12);
        assert!((rep.max_rel_dev - 0.01).abs() < 1e-12);
        assert!(deviation_of(&targets, &[0.2]).is_err());
    }
}
