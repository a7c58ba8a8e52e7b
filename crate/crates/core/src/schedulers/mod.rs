//! The scheduler contract and its implementations.
//!
//! A scheduler is fed every execution through [`Scheduler::observe`] and is
//! asked for the next input to mutate through [`Scheduler::next`]. It never
//! sees the environment's ground truth, only coverage maps and the
//! interesting flag.

mod baseline;
mod thompson;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bandit::Variant;
use crate::coverage::{Corpus, CoverageMap, InputId, InputRecord};
use crate::{Error, Result};

pub use baseline::{Greedy, RoundRobin, Uniform};
pub use thompson::TScheduler;

/// Outcome of one [`Scheduler::next`] call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub input: InputId,
    /// Bandit arm behind the choice, for schedulers that have one.
    pub action: Option<usize>,
    /// Abstract operation count spent selecting.
    pub ops: u64,
}

pub trait Scheduler {
    fn k_size(&self) -> usize;

    /// Retain a seed input without recording an observation.
    fn register(&mut self, input: InputRecord) -> Result<()>;

    /// Record one execution of `input`. Interesting inputs are retained.
    /// Returns the abstract operation count of the update.
    fn observe(&mut self, input: &InputRecord, cov: &CoverageMap, interesting: bool)
        -> Result<u64>;

    /// Choose the next retained input to fuzz.
    fn next(&mut self) -> Result<Selection>;

    fn corpus(&self) -> &Corpus;
}

/// Registered scheduler names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchedulerKind {
    RareMinus,
    RarePlus,
    Sample,
    Greedy,
    Uniform,
    RoundRobin,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 6] = [
        SchedulerKind::RareMinus,
        SchedulerKind::RarePlus,
        SchedulerKind::Sample,
        SchedulerKind::Greedy,
        SchedulerKind::Uniform,
        SchedulerKind::RoundRobin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchedulerKind::RareMinus => "rare-minus",
            SchedulerKind::RarePlus => "rare-plus",
            SchedulerKind::Sample => "sample",
            SchedulerKind::Greedy => "greedy",
            SchedulerKind::Uniform => "uniform",
            SchedulerKind::RoundRobin => "round-robin",
        }
    }

    pub fn variant(self) -> Option<Variant> {
        match self {
            SchedulerKind::RareMinus => Some(Variant::RareMinus),
            SchedulerKind::RarePlus => Some(Variant::RarePlus),
            SchedulerKind::Sample => Some(Variant::Sample),
            _ => None,
        }
    }

    /// Fresh scheduler over `k_size` features.
    pub fn build(self, k_size: usize, seed: u64) -> Result<AnyScheduler> {
        Ok(match self.variant() {
            Some(v) => AnyScheduler::Thompson(TScheduler::new(v, k_size, seed)?),
            None => match self {
                SchedulerKind::Greedy => AnyScheduler::Greedy(Greedy::new(k_size)?),
                SchedulerKind::Uniform => AnyScheduler::Uniform(Uniform::new(k_size, seed)),
                SchedulerKind::RoundRobin => AnyScheduler::RoundRobin(RoundRobin::new(k_size)),
                _ => unreachable!(),
            },
        })
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchedulerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownScheduler(s.to_owned()))
    }
}

/// Closed set of schedulers, serializable for campaign snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AnyScheduler {
    Thompson(TScheduler),
    Greedy(Greedy),
    Uniform(Uniform),
    RoundRobin(RoundRobin),
}

macro_rules! delegate {
    ($self:ident, $s:ident => $e:expr) => {
        match $self {
            AnyScheduler::Thompson($s) => $e,
            AnyScheduler::Greedy($s) => $e,
            AnyScheduler::Uniform($s) => $e,
            AnyScheduler::RoundRobin($s) => $e,
        }
    };
}

impl Scheduler for AnyScheduler {
    fn k_size(&self) -> usize {
        delegate!(self, s => s.k_size())
    }

    fn register(&mut self, input: InputRecord) -> Result<()> {
        delegate!(self, s => s.register(input))
    }

    fn observe(&mut self, input: &InputRecord, cov: &CoverageMap, interesting: bool) -> Result<u64> {
        delegate!(self, s => s.observe(input, cov, interesting))
    }

    fn next(&mut self) -> Result<Selection> {
        delegate!(self, s => s.next())
    }

    fn corpus(&self) -> &Corpus {
        delegate!(self, s => s.corpus())
    }
}
