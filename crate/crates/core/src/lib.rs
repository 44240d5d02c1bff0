//! Back-off rate calibration for idealized CSMA/CA networks.
//!
//! Given a conflict graph and a target throughput vector, this crate
//! computes the unique back-off rates that realize those throughputs
//! exactly whenever the conflict graph is chordal, along with distributed
//! per-node variants and chordal approximations (local chordal subgraph,
//! Bethe, completion) for general graphs. An exact product-form solver
//! and an event-driven continuous-time simulator provide independent
//! verification at small and large scale respectively.
//!
//! Module map:
//! - [`graph`]: conflict graphs, generators, independent-set enumeration;
//! - [`chordal`]: MCS, perfect elimination orderings, clique trees,
//!   MAXCHORD, minimum-degree completion;
//! - [`rates`]: all rate calculators;
//! - [`exact`]: enumeration solver, closed-form normalizing constants,
//!   achievability LP, brute-force inversion;
//! - [`sim`]: continuous-time event-driven simulator.

pub mod chordal;
pub mod error;
pub mod exact;
pub mod graph;
mod numeric;
pub mod rates;
pub mod sim;
#[cfg(test)]
pub(crate) mod testutil;

pub use chordal::{ChordalSubgraphResult, CliqueTree, PeoOrder};
pub use error::{Error, Result};
pub use graph::{ConflictGraph, IndependentSetFamily, RateVector, ThroughputVector};
pub use rates::{Method, RateReport};
pub use sim::{SimConfig, SimResult, TransmissionDist};
