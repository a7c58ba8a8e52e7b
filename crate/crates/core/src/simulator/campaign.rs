use serde::{Deserialize, Serialize};

use super::{BanditEnv, BernoulliArms, CfgTarget, Environment, FuzzEnv, TrialLog};
use crate::coverage::InterestingPolicy;
use crate::schedulers::{AnyScheduler, Scheduler, SchedulerKind};
use crate::{Error, Result};

/// A scheduler driven against an environment, one scheduled execution per
/// step. The whole struct is plain data, so a snapshot of it resumes to the
/// same trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Campaign<S = AnyScheduler> {
    pub scheduler: S,
    pub env: Environment,
    pub log: TrialLog,
}

impl<S: Scheduler> Campaign<S> {
    /// Bootstraps `env` into `scheduler`.
    pub fn new(mut scheduler: S, mut env: Environment) -> Result<Self> {
        if scheduler.k_size() != env.k_size() {
            return Err(Error::Dimension {
                expected: env.k_size(),
                actual: scheduler.k_size(),
            });
        }
        let initial_covered = env.bootstrap(&mut scheduler)?;
        Ok(Self {
            scheduler,
            env,
            log: TrialLog {
                initial_covered,
                records: Vec::new(),
            },
        })
    }

    pub fn steps_done(&self) -> u64 {
        self.log.len() as u64
    }

    pub fn step(&mut self) -> Result<()> {
        let t = self.steps_done() + 1;
        let record = self.env.step(&mut self.scheduler, t)?;
        self.log.records.push(record);
        Ok(())
    }

    /// Step until `total` steps have been taken.
    pub fn run_until(&mut self, total: u64) -> Result<()> {
        while self.steps_done() < total {
            self.step()?;
        }
        Ok(())
    }
}

impl Campaign<AnyScheduler> {
    pub fn bandit(arms: BernoulliArms, kind: SchedulerKind, seed: u64) -> Result<Self> {
        let scheduler = kind.build(arms.k_size(), seed)?;
        Self::new(scheduler, Environment::Bandit(BanditEnv::new(arms, seed)))
    }

    pub fn fuzz(
        target: CfgTarget,
        kind: SchedulerKind,
        policy: InterestingPolicy,
        seed: u64,
    ) -> Result<Self> {
        let scheduler = kind.build(target.k_size(), seed)?;
        Self::new(scheduler, Environment::Fuzz(FuzzEnv::new(target, policy, seed)))
    }
}

/// `steps` pulls of a Bernoulli bandit.
pub fn run_bandit_trial<S: Scheduler>(
    arms: &BernoulliArms,
    scheduler: S,
    steps: u64,
    seed: u64,
) -> Result<TrialLog> {
    if steps == 0 {
        return Err(Error::InvalidArgument("campaign needs at least one step".into()));
    }
    let env = Environment::Bandit(BanditEnv::new(arms.clone(), seed));
    let mut c = Campaign::new(scheduler, env)?;
    c.run_until(steps)?;
    Ok(c.log)
}

/// `iterations` scheduled mutations of a synthetic target.
pub fn run_fuzz_campaign<S: Scheduler>(
    target: &CfgTarget,
    scheduler: S,
    iterations: u64,
    policy: InterestingPolicy,
    seed: u64,
) -> Result<TrialLog> {
    if !scheduler.corpus().is_empty() {
        return Err(Error::InvalidArgument("scheduler must start empty".into()));
    }
    let env = Environment::Fuzz(FuzzEnv::new(target.clone(), policy, seed));
    let mut c = Campaign::new(scheduler, env)?;
    c.run_until(iterations)?;
    Ok(c.log)
}
