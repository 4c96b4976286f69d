//! Fixed-budget best-arm identification.
//!
//! Given `K` Bernoulli arms and a sampling budget `T`, the goal is to
//! recommend the arm with the highest mean after exactly `T` pulls. This
//! crate provides:
//!
//! - the sequential-elimination sampling policies `SR`, `CR-C` and `CR-A`,
//!   plus the `SH` and `UGapE` baselines, behind one round-by-round state
//!   machine ([`policies`]);
//! - closed-form evaluation of the instance-specific error exponents that
//!   upper bound each policy's error probability, together with brute-force
//!   oracles for every solver ([`guarantees`] and [`oracle`]);
//! - a seeded, parallel Monte Carlo harness that estimates empirical error
//!   rates over the standard experiment families ([`montecarlo`]);
//! - the acceptance battery wiring all of the above together
//!   ([`acceptance`]).
//!
//! Arm indices are 0-based everywhere. All exponent formulas assume means
//! sorted in decreasing order; [`SortedInstance`] carries the permutation
//! back to the original arm labels.

pub mod acceptance;
mod error;
pub mod guarantees;
pub mod instance;
pub mod math;
pub mod montecarlo;
pub mod oracle;
pub mod policies;
pub mod rng;

pub use error::{Error, Result};
pub use instance::{Instance, SortedInstance};
pub use policies::{run_policy, PolicyKind, PolicyParams, PolicyState, RunOutcome};
pub use rng::{sample_reward, RngStream};
