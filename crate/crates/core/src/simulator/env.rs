use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CfgTarget, StepRecord};
use crate::coverage::{CoverageMap, GlobalCoverage, InputId, InputRecord, InterestingPolicy};
use crate::rng::SeededRng;
use crate::schedulers::Scheduler;
use crate::{Error, Result};

/// Latent success probabilities, one per arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BernoulliArms(Vec<f64>);

impl BernoulliArms {
    pub fn new(theta_star: Vec<f64>) -> Result<Self> {
        if theta_star.is_empty() {
            return Err(Error::EmptyBandit);
        }
        if let Some(p) = theta_star.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidArgument(format!(
                "arm probability {p} outside [0, 1]"
            )));
        }
        Ok(Self(theta_star))
    }

    pub fn theta_star(&self) -> &[f64] {
        &self.0
    }

    pub fn k_size(&self) -> usize {
        self.0.len()
    }

    pub fn best(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl TryFrom<Vec<f64>> for BernoulliArms {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<BernoulliArms> for Vec<f64> {
    fn from(a: BernoulliArms) -> Self {
        a.0
    }
}

/// Arm `k` is input `k`, which covers exactly feature `k`. Executing it is
/// interesting with probability `theta_star[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditEnv {
    arms: BernoulliArms,
    global: GlobalCoverage,
    rng: SeededRng,
}

impl BanditEnv {
    pub fn new(arms: BernoulliArms, seed: u64) -> Self {
        let k = arms.k_size();
        Self {
            arms,
            global: GlobalCoverage::new(k),
            rng: SeededRng::with_stream(seed, 1),
        }
    }

    fn input(&self, arm: usize) -> InputRecord {
        InputRecord::new(InputId(arm as u64), 1, 1.0, vec![arm])
    }

    /// Every arm is selectable from step 1; seeds are registered without an
    /// observation so the posterior starts at the uniform prior.
    fn bootstrap<S: Scheduler>(&mut self, scheduler: &mut S) -> Result<usize> {
        for arm in 0..self.arms.k_size() {
            scheduler.register(self.input(arm))?;
        }
        Ok(self.global.covered())
    }

    fn step<S: Scheduler>(&mut self, scheduler: &mut S, step: u64) -> Result<StepRecord> {
        let k = self.arms.k_size();
        let pick = scheduler.next()?;
        let arm = pick.input.0 as usize;
        let p = self.arms.theta_star()[arm];
        let interesting = self.rng.random::<f64>() < p;
        let cov = CoverageMap::from_features(k, &[arm]);
        self.global.absorb(&cov)?;
        let update_ops = scheduler.observe(&self.input(arm), &cov, interesting)?;
        Ok(StepRecord {
            step,
            action: pick.input.0,
            interesting,
            regret: Some(self.arms.best() - p),
            covered_features: self.global.covered(),
            corpus_size: scheduler.corpus().len(),
            select_ops: pick.ops,
            update_ops,
        })
    }
}

/// Greybox loop over a [`CfgTarget`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzEnv {
    target: CfgTarget,
    policy: InterestingPolicy,
    global: GlobalCoverage,
    /// Every input ever synthesized, indexed by id.
    inputs: Vec<InputRecord>,
    rng: SeededRng,
}

impl FuzzEnv {
    pub fn new(target: CfgTarget, policy: InterestingPolicy, seed: u64) -> Self {
        let k = target.k_size();
        Self {
            target,
            policy,
            global: GlobalCoverage::new(k),
            inputs: Vec::new(),
            rng: SeededRng::with_stream(seed, 1),
        }
    }

    pub fn target(&self) -> &CfgTarget {
        &self.target
    }

    pub fn global(&self) -> &GlobalCoverage {
        &self.global
    }

    pub fn inputs(&self) -> &[InputRecord] {
        &self.inputs
    }

    /// New input whose size and execution time come from `edge`'s ranges.
    fn synthesize(&mut self, edge: usize, features: Vec<usize>) -> InputRecord {
        let e = self.target.edge(edge);
        let [tlo, thi] = e.time_range;
        let [slo, shi] = e.size_range;
        let exec_time = tlo + (thi - tlo) * self.rng.random::<f64>();
        let size = self.rng.random_range(slo..=shi);
        let id = InputId(self.inputs.len() as u64);
        let input = InputRecord::new(id, size, exec_time, features);
        self.inputs.push(input.clone());
        input
    }

    fn execute<S: Scheduler>(
        &mut self,
        scheduler: &mut S,
        input: &InputRecord,
        forced_interesting: Option<bool>,
    ) -> Result<(bool, u64)> {
        let cov = CoverageMap::from_features(self.target.k_size(), &input.features);
        let interesting = match forced_interesting {
            Some(i) => i,
            None => self.global.classify(&cov, self.policy)?,
        };
        self.global.absorb(&cov)?;
        let ops = scheduler.observe(input, &cov, interesting)?;
        Ok((interesting, ops))
    }

    /// One seed per root edge, each interesting by definition.
    fn bootstrap<S: Scheduler>(&mut self, scheduler: &mut S) -> Result<usize> {
        let roots: Vec<usize> = self.target.roots().map(|e| e.id).collect();
        for root in roots {
            let seed = self.synthesize(root, vec![root]);
            self.execute(scheduler, &seed, Some(true))?;
        }
        Ok(self.global.covered())
    }

    /// Mutate the chosen input once. Each undiscovered edge whose
    /// prerequisites the input covers unlocks independently with its own
    /// probability; a discovery yields a new input covering the parent's
    /// features plus the unlocked edges.
    fn step<S: Scheduler>(&mut self, scheduler: &mut S, step: u64) -> Result<StepRecord> {
        let pick = scheduler.next()?;
        let parent = self
            .inputs
            .get(pick.input.0 as usize)
            .cloned()
            .ok_or_else(|| Error::InvalidArgument(format!("unknown input {}", pick.input)))?;

        let mut covered_by_parent = vec![false; self.target.k_size()];
        for &k in &parent.features {
            covered_by_parent[k] = true;
        }
        let mut unlocked = Vec::new();
        for e in self.target.edges() {
            let fresh = self.global.total_hits()[e.id] == 0;
            if fresh && e.prereqs.iter().all(|&p| covered_by_parent[p]) {
                // Draw even for p = 0 or 1 to keep the stream layout fixed.
                if self.rng.random::<f64>() < e.p {
                    unlocked.push(e.id);
                }
            }
        }

        let executed = match unlocked.first() {
            Some(&first) => {
                let mut features = parent.features.clone();
                features.extend_from_slice(&unlocked);
                self.synthesize(first, features)
            }
            None => parent,
        };
        let (interesting, update_ops) = self.execute(scheduler, &executed, None)?;
        Ok(StepRecord {
            step,
            action: pick.input.0,
            interesting,
            regret: None,
            covered_features: self.global.covered(),
            corpus_size: scheduler.corpus().len(),
            select_ops: pick.ops,
            update_ops,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Environment {
    Bandit(BanditEnv),
    Fuzz(FuzzEnv),
}

impl Environment {
    pub fn k_size(&self) -> usize {
        match self {
            Environment::Bandit(e) => e.arms.k_size(),
            Environment::Fuzz(e) => e.target.k_size(),
        }
    }

    /// Seed the scheduler; returns the covered-feature count afterwards.
    pub fn bootstrap<S: Scheduler>(&mut self, scheduler: &mut S) -> Result<usize> {
        match self {
            Environment::Bandit(e) => e.bootstrap(scheduler),
            Environment::Fuzz(e) => e.bootstrap(scheduler),
        }
    }

    pub fn step<S: Scheduler>(&mut self, scheduler: &mut S, step: u64) -> Result<StepRecord> {
        match self {
            Environment::Bandit(e) => e.step(scheduler, step),
            Environment::Fuzz(e) => e.step(scheduler, step),
        }
    }
}
