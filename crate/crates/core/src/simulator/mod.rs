//! Ground-truth environments and the campaign loop.
//!
//! Two environments are provided: independent Bernoulli arms, where regret
//! is well defined, and synthetic control-flow targets, where edges unlock
//! with a per-edge probability once their prerequisites are covered.
//! Schedulers only ever see coverage maps and the interesting flag.

mod campaign;
mod env;
pub mod fig2;
mod log;
mod target;

pub use campaign::{run_bandit_trial, run_fuzz_campaign, Campaign};
pub use env::{BanditEnv, BernoulliArms, Environment, FuzzEnv};
pub use log::{StepRecord, TrialLog};
pub use target::{CfgTarget, Edge};
