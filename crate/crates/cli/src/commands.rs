use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use tscheduler::schedulers::SchedulerKind;
use tscheduler::simulator::{fig2, Campaign, TrialLog};
use tscheduler::snapshot::CampaignSnapshot;

use crate::config::{EnvironmentKind, Experiment};
use crate::report::{self, SummaryRow};
use crate::{CliError, Result};

/// A fresh, bootstrapped campaign for one (scheduler, trial) pair.
pub fn build_campaign(exp: &Experiment, kind: SchedulerKind, trial: u64) -> Result<Campaign> {
    let seed = exp.seed(trial);
    Ok(match &exp.environment {
        EnvironmentKind::Bandit(arms) => Campaign::bandit(arms.clone(), kind, seed)?,
        EnvironmentKind::Target(target) => {
            Campaign::fuzz(target.clone(), kind, exp.interestingness, seed)?
        }
    })
}

pub fn run_trial(exp: &Experiment, kind: SchedulerKind, trial: u64) -> Result<TrialLog> {
    let mut c = build_campaign(exp, kind, trial)?;
    c.run_until(exp.steps)?;
    Ok(c.log)
}

pub fn trial_log_path(exp: &Experiment, kind: SchedulerKind, trial: u64) -> PathBuf {
    exp.output_dir
        .join("trials")
        .join(format!("{}_trial{trial}.csv", kind.name()))
}

pub fn summary_path(exp: &Experiment) -> PathBuf {
    exp.output_dir.join("summary.csv")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| CliError::Output {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Output {
            path: path.to_path_buf(),
            source,
        })
}

/// Runs every (scheduler, trial) pair, at most `jobs` at a time, then writes
/// the per-trial logs and the summary.
pub fn simulate(exp: &Experiment, jobs: Option<usize>) -> Result<Vec<SummaryRow>> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let tasks: Vec<(SchedulerKind, u64)> = exp
        .schedulers
        .iter()
        .flat_map(|&k| (0..exp.trials).map(move |t| (k, t)))
        .collect();
    let logs: Vec<TrialLog> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(kind, trial)| run_trial(exp, kind, trial))
            .collect::<Result<_>>()
    })?;

    for (&(kind, trial), log) in tasks.iter().zip(&logs) {
        let path = trial_log_path(exp, kind, trial);
        let mut out = create(&path)?;
        report::write_trial_log(&mut out, kind.name(), trial, &log.records)?;
        out.flush().map_err(|source| CliError::Output { path, source })?;
    }

    let per = exp.trials as usize;
    let groups: Vec<(&str, &[TrialLog])> = exp
        .schedulers
        .iter()
        .zip(logs.chunks(per))
        .map(|(k, chunk)| (k.name(), chunk))
        .collect();
    let rows = report::summarize(&groups, exp.sampling_interval, exp.base_seed)?;
    let path = summary_path(exp);
    let mut out = create(&path)?;
    report::write_summary(&mut out, &rows)?;
    out.flush().map_err(|source| CliError::Output { path, source })?;
    Ok(rows)
}

/// Prints the replay table to `out`, optionally writes its CSV, and returns
/// the cells that differ from the reference.
pub fn replay_fig2<W: Write>(csv: Option<&Path>, mut out: W) -> Result<Vec<fig2::Mismatch>> {
    let rows = fig2::replay();
    writeln!(out, "{:>2}  {:<6}  {:>5}  {:>4}  {:>4}", "t", "node", "alpha", "beta", "pbar")?;
    for r in &rows {
        writeln!(
            out,
            "{:>2}  {:<6}  {:>5}  {:>4}  {:.2}",
            r.t, r.node, r.alpha, r.beta, r.pbar
        )?;
    }
    if let Some(path) = csv {
        let mut f = create(path)?;
        f.write_all(fig2::to_csv(&rows).as_bytes())
            .and_then(|()| f.flush())
            .map_err(|source| CliError::Output {
                path: path.to_path_buf(),
                source,
            })?;
    }
    Ok(fig2::compare(&rows))
}

/// Runs one trial of `exp` to step `at` and writes a snapshot that will
/// finish at `exp.steps`.
pub fn snapshot(
    exp: &Experiment,
    kind: SchedulerKind,
    trial: u64,
    at: u64,
    path: &Path,
) -> Result<()> {
    if at > exp.steps {
        return Err(CliError::Config(format!(
            "snapshot step {at} is past the configured {} steps",
            exp.steps
        )));
    }
    let mut campaign = build_campaign(exp, kind, trial)?;
    campaign.run_until(at)?;
    let snap = CampaignSnapshot {
        scheduler: kind.name().into(),
        trial,
        total_steps: exp.steps,
        campaign,
    };
    let mut f = create(path)?;
    f.write_all(snap.to_json()?.as_bytes())
        .and_then(|()| f.flush())
        .map_err(|source| CliError::Output {
            path: path.to_path_buf(),
            source,
        })
}

/// Finishes a snapshotted campaign and writes the log rows after the
/// snapshot point, in the per-trial CSV layout.
pub fn resume<W: Write>(path: &Path, out: W) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })?;
    let mut snap = CampaignSnapshot::from_json(&text)?;
    let from = snap.step() as usize;
    snap.campaign.run_until(snap.total_steps)?;
    report::write_trial_log(
        out,
        &snap.scheduler,
        snap.trial,
        &snap.campaign.log.records[from..],
    )
}
