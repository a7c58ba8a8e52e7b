use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tscheduler::schedulers::SchedulerKind;
use tscheduler_cli::commands;
use tscheduler_cli::config::Experiment;
use tscheduler_cli::{CliError, Result};

#[derive(Parser)]
#[command(name = "tsched", version, about = "Seed-scheduling bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scheduler for every trial and write CSV logs and a summary.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; defaults to the number of CPUs.
        #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
        jobs: Option<u16>,
    },
    /// Replay the four-line motivating example and check it against the
    /// reference table.
    ReplayFig2 {
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run one trial part-way and save its full state.
    Snapshot {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        scheduler: SchedulerKind,
        #[arg(long, default_value_t = 0)]
        trial: u64,
        /// Steps to run before saving.
        #[arg(long)]
        at: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Finish a saved trial and write the remaining log rows.
    Resume {
        #[arg(long)]
        snapshot: PathBuf,
        /// Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, jobs } => {
            let exp = Experiment::load(&config)?;
            let rows = commands::simulate(&exp, jobs.map(usize::from))?;
            tscheduler_cli::report::write_summary(io::stdout().lock(), &rows)?;
            eprintln!("wrote {}", commands::summary_path(&exp).display());
        }
        Command::ReplayFig2 { csv } => {
            let mismatches = commands::replay_fig2(csv.as_deref(), io::stdout().lock())?;
            for m in &mismatches {
                eprintln!(
                    "mismatch t={} {} {}: reference {} replay {:.4}",
                    m.t, m.node, m.field, m.expected, m.actual
                );
            }
            if !mismatches.is_empty() {
                return Err(CliError::ReplayMismatch(mismatches.len()));
            }
        }
        Command::Snapshot {
            config,
            scheduler,
            trial,
            at,
            out,
        } => {
            let exp = Experiment::load(&config)?;
            if !exp.schedulers.contains(&scheduler) {
                return Err(CliError::Config(format!(
                    "scheduler `{scheduler}` is not in the config"
                )));
            }
            if trial >= exp.trials {
                return Err(CliError::Config(format!(
                    "trial {trial} is out of range for {} trials",
                    exp.trials
                )));
            }
            commands::snapshot(&exp, scheduler, trial, at, &out)?;
        }
        Command::Resume { snapshot, out } => match out {
            Some(path) => {
                let file = std::fs::File::create(&path)
                    .map_err(|source| CliError::Output { path: path.clone(), source })?;
                let mut w = io::BufWriter::new(file);
                commands::resume(&snapshot, &mut w)?;
                w.flush()
                    .map_err(|source| CliError::Output { path, source })?;
            }
            None => commands::resume(&snapshot, io::stdout().lock())?,
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tsched: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
