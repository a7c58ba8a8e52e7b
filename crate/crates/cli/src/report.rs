//! CSV layouts and the per-scheduler summary.

use std::io::Write;

use serde::Serialize;
use tscheduler::metrics::{auc, bootstrap_ci, mann_whitney_u};
use tscheduler::simulator::{StepRecord, TrialLog};

use crate::Result;

pub const CI_CONFIDENCE: f64 = 0.95;
pub const CI_RESAMPLES: usize = 10_000;

#[derive(Debug, Serialize)]
struct TrialRow<'a> {
    step: u64,
    scheduler: &'a str,
    trial: u64,
    action: u64,
    interesting: bool,
    regret: Option<f64>,
    covered_features: usize,
    corpus_size: usize,
    select_ops: u64,
    update_ops: u64,
}

/// Writes the header and one row per record.
pub fn write_trial_log<W: Write>(
    out: W,
    scheduler: &str,
    trial: u64,
    records: &[StepRecord],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(TrialRow {
            step: r.step,
            scheduler,
            trial,
            action: r.action,
            interesting: r.interesting,
            regret: r.regret,
            covered_features: r.covered_features,
            corpus_size: r.corpus_size,
            select_ops: r.select_ops,
            update_ops: r.update_ops,
        })?;
    }
    if records.is_empty() {
        w.write_record([
            "step",
            "scheduler",
            "trial",
            "action",
            "interesting",
            "regret",
            "covered_features",
            "corpus_size",
            "select_ops",
            "update_ops",
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One summary line. Statistics that need more data than available are empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub scheduler: String,
    pub trials: u64,
    pub final_cov_mean: f64,
    pub final_cov_ci_lo: Option<f64>,
    pub final_cov_ci_hi: Option<f64>,
    pub auc_mean: f64,
    pub auc_ci_lo: Option<f64>,
    pub auc_ci_hi: Option<f64>,
    pub mean_final_regret: Option<f64>,
    pub mwu_p_vs_baseline: Option<f64>,
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn ci(xs: &[f64], seed: u64) -> Result<(Option<f64>, Option<f64>)> {
    if xs.len() < 2 {
        return Ok((None, None));
    }
    let (lo, hi) = bootstrap_ci(xs, CI_CONFIDENCE, CI_RESAMPLES, seed)?;
    Ok((Some(lo), Some(hi)))
}

/// The quantity compared against the baseline scheduler: final-window
/// regret where regret exists, final coverage otherwise.
fn comparison_metric(log: &TrialLog) -> f64 {
    log.final_window_regret()
        .unwrap_or(log.final_covered() as f64)
}

/// Summaries in input order; the first group is the Mann-Whitney baseline.
pub fn summarize(
    groups: &[(&str, &[TrialLog])],
    sampling_interval: u64,
    seed: u64,
) -> Result<Vec<SummaryRow>> {
    let baseline: Option<Vec<f64>> = groups
        .first()
        .map(|(_, logs)| logs.iter().map(comparison_metric).collect());
    let mut rows = Vec::with_capacity(groups.len());
    for (i, (name, logs)) in groups.iter().enumerate() {
        let finals: Vec<f64> = logs.iter().map(|l| l.final_covered() as f64).collect();
        let aucs = logs
            .iter()
            .map(|l| Ok(auc(&l.timeline(sampling_interval)?)?))
            .collect::<Result<Vec<f64>>>()?;
        let regrets: Vec<f64> = logs.iter().filter_map(TrialLog::final_window_regret).collect();
        let (final_cov_ci_lo, final_cov_ci_hi) = ci(&finals, seed)?;
        let (auc_ci_lo, auc_ci_hi) = ci(&aucs, seed)?;
        let mwu_p_vs_baseline = match (&baseline, i) {
            (Some(base), 1..) => {
                let mine: Vec<f64> = logs.iter().map(comparison_metric).collect();
                Some(mann_whitney_u(&mine, base)?.p_value)
            }
            _ => None,
        };
        rows.push(SummaryRow {
            scheduler: name.to_string(),
            trials: logs.len() as u64,
            final_cov_mean: mean(&finals),
            final_cov_ci_lo,
            final_cov_ci_hi,
            auc_mean: mean(&aucs),
            auc_ci_lo,
            auc_ci_hi,
            mean_final_regret: (!regrets.is_empty()).then(|| mean(&regrets)),
            mwu_p_vs_baseline,
        });
    }
    Ok(rows)
}
