use serde::{Deserialize, Serialize};

use crate::metrics::{CoverageTimeline, OverheadCounters};
use crate::Result;

/// One campaign step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based.
    pub step: u64,
    /// Id of the input the scheduler chose.
    pub action: u64,
    pub interesting: bool,
    /// Latent best success probability minus the chosen arm's. Only defined
    /// for Bernoulli-arm environments.
    pub regret: Option<f64>,
    pub covered_features: usize,
    pub corpus_size: usize,
    pub select_ops: u64,
    pub update_ops: u64,
}

/// Per-step history of one trial.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialLog {
    /// Covered features after bootstrap, before step 1.
    pub initial_covered: usize,
    pub records: Vec<StepRecord>,
}

impl TrialLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn final_covered(&self) -> usize {
        self.records
            .last()
            .map_or(self.initial_covered, |r| r.covered_features)
    }

    /// Mean regret over 1-based steps `first..=last`, or `None` if no step in
    /// the window carries a regret value.
    pub fn mean_regret(&self, first: u64, last: u64) -> Option<f64> {
        let window: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.step >= first && r.step <= last)
            .filter_map(|r| r.regret)
            .collect();
        (!window.is_empty()).then(|| window.iter().sum::<f64>() / window.len() as f64)
    }

    /// Mean regret over the last tenth of the campaign (at least one step).
    pub fn final_window_regret(&self) -> Option<f64> {
        let t = self.records.len() as u64;
        let width = (t / 10).max(1);
        self.mean_regret(t + 1 - width.min(t), t)
    }

    /// Covered-feature count at step 0, every `interval` steps, and at the
    /// final step.
    pub fn timeline(&self, interval: u64) -> Result<CoverageTimeline> {
        let interval = interval.max(1);
        let mut points = vec![(0, self.initial_covered as f64)];
        for r in &self.records {
            if r.step % interval == 0 || r.step == self.records.len() as u64 {
                points.push((r.step, r.covered_features as f64));
            }
        }
        CoverageTimeline::new(points)
    }

    pub fn overhead(&self) -> OverheadCounters {
        OverheadCounters {
            update_count: self.records.len() as u64,
            update_costs: self.records.iter().map(|r| r.update_ops).collect(),
            select_costs: self.records.iter().map(|r| r.select_ops).collect(),
        }
    }
}
