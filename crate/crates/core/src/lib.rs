//! Seed scheduling for coverage-guided greybox fuzzers, framed as a
//! Beta-Bernoulli multi-armed bandit solved with Thompson sampling.
//!
//! The crate is organised bottom-up:
//!
//! - [`bandit`]: posterior state, rewards, Beta sampling, rareness correction
//!   and the arg-max selection rules.
//! - [`coverage`]: coverage maps, interestingness, hit counts and the favored
//!   input table that maps bandit arms onto concrete inputs.
//! - [`schedulers`]: the scheduler contract, the three Thompson variants and
//!   the greedy / uniform / round-robin baselines.
//! - [`simulator`]: Bernoulli-arm and synthetic CFG environments and the
//!   campaign loop that drives a scheduler against them.
//! - [`metrics`]: AUC, Mann-Whitney U, bootstrap intervals, consistency and
//!   overhead summaries.
//! - [`snapshot`]: versioned, checksummed campaign snapshots.

pub mod bandit;
pub mod coverage;
mod error;
pub mod metrics;
pub mod rng;
pub mod schedulers;
pub mod simulator;
pub mod snapshot;

pub use error::{Error, Result};
