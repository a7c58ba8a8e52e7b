use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use tscheduler::coverage::InterestingPolicy;
use tscheduler::schedulers::SchedulerKind;
use tscheduler::simulator::{BernoulliArms, CfgTarget};

use crate::{CliError, Result};

fn default_sampling_interval() -> u64 {
    100
}

/// On-disk experiment description. Unknown keys are rejected.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvironmentSpec,
    pub schedulers: Vec<String>,
    pub trials: u64,
    pub steps: u64,
    #[serde(default)]
    pub base_seed: u64,
    pub output_dir: PathBuf,
    #[serde(default = "default_sampling_interval")]
    pub sampling_interval: u64,
    #[serde(default)]
    pub interestingness: InterestingPolicy,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnvironmentSpec {
    Bandit { arms: Vec<f64> },
    /// Relative paths resolve against the config file's directory.
    Target { path: PathBuf },
}

/// A loaded environment.
#[derive(Debug, Clone)]
pub enum EnvironmentKind {
    Bandit(BernoulliArms),
    Target(CfgTarget),
}

impl EnvironmentKind {
    pub fn is_bandit(&self) -> bool {
        matches!(self, EnvironmentKind::Bandit(_))
    }
}

/// A validated config with the environment loaded.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub environment: EnvironmentKind,
    pub schedulers: Vec<SchedulerKind>,
    pub trials: u64,
    pub steps: u64,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    pub sampling_interval: u64,
    pub interestingness: InterestingPolicy,
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_config(config, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn from_config(config: ExperimentConfig, base_dir: &Path) -> Result<Self> {
        let bad = |m: String| Err(CliError::Config(m));
        if config.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if config.steps == 0 {
            return bad("steps must be at least 1".into());
        }
        if config.sampling_interval == 0 {
            return bad("sampling_interval must be at least 1".into());
        }
        if config.schedulers.is_empty() {
            return bad("at least one scheduler is required".into());
        }
        let mut seen = HashSet::new();
        let mut schedulers = Vec::with_capacity(config.schedulers.len());
        for name in &config.schedulers {
            let kind: SchedulerKind = name
                .parse()
                .map_err(|e: tscheduler::Error| CliError::Config(e.to_string()))?;
            if !seen.insert(kind) {
                return bad(format!("scheduler `{name}` listed twice"));
            }
            schedulers.push(kind);
        }
        let environment = match config.environment {
            EnvironmentSpec::Bandit { arms } => EnvironmentKind::Bandit(
                BernoulliArms::new(arms).map_err(|e| CliError::Config(e.to_string()))?,
            ),
            EnvironmentSpec::Target { path } => {
                let path = base_dir.join(path);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                EnvironmentKind::Target(
                    CfgTarget::from_json(&text)
                        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
                )
            }
        };
        Ok(Self {
            environment,
            schedulers,
            trials: config.trials,
            steps: config.steps,
            base_seed: config.base_seed,
            output_dir: base_dir.join(config.output_dir),
            sampling_interval: config.sampling_interval,
            interestingness: config.interestingness,
        })
    }

    /// Trial `i` runs with seed `base_seed + i`.
    pub fn seed(&self, trial: u64) -> u64 {
        self.base_seed.wrapping_add(trial)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(json: &str) -> Result<Experiment> {
        let config: ExperimentConfig =
            serde_json::from_str(json).map_err(|e| CliError::Config(e.to_string()))?;
        Experiment::from_config(config, Path::new("/tmp"))
    }

    #[test]
    fn bandit_config_with_defaults() {
        let exp = parse(
            r#"{"environment": {"type": "bandit", "arms": [0.7, 0.8, 0.9]},
                "schedulers": ["greedy", "sample"], "trials": 3, "steps": 10,
                "output_dir": "out"}"#,
        )
        .unwrap();
        assert_eq!(exp.schedulers, [SchedulerKind::Greedy, SchedulerKind::Sample]);
        assert_eq!(exp.sampling_interval, 100);
        assert_eq!(exp.interestingness, InterestingPolicy::NewFeature);
        assert_eq!(exp.output_dir, Path::new("/tmp/out"));
        assert_eq!(exp.seed(2), 2);
    }

    #[test]
    fn rejects_bad_configs() {
        let cases = [
            (r#""schedulers": ["gredy"]"#, "gredy"),
            (r#""schedulers": []"#, "at least one"),
            (r#""schedulers": ["sample", "sample"]"#, "twice"),
        ];
        for (field, needle) in cases {
            let json = format!(
                r#"{{"environment": {{"type": "bandit", "arms": [0.5]}}, {field},
                    "trials": 1, "steps": 1, "output_dir": "o"}}"#
            );
            let err = parse(&json).unwrap_err();
            assert_eq!(err.exit_code(), 2);
            assert!(err.to_string().contains(needle), "{err}");
        }
        let base = r#""environment": {"type": "bandit", "arms": [0.5]}, "schedulers": ["greedy"], "output_dir": "o""#;
        for extra in [
            r#""trials": 0, "steps": 1"#,
            r#""trials": 1, "steps": 0"#,
            r#""trials": 1, "steps": 1, "colour": 3"#,
            r#""trials": 1, "steps": 1, "sampling_interval": 0"#,
        ] {
            assert!(parse(&format!("{{{base}, {extra}}}")).is_err(), "{extra}");
        }
        assert!(parse(
            r#"{"environment": {"type": "bandit", "arms": [1.5]}, "schedulers": ["greedy"],
                "trials": 1, "steps": 1, "output_dir": "o"}"#
        )
        .is_err());
        assert!(parse(
            r#"{"environment": {"type": "bandit", "arms": [0.5], "extra": 1},
                "schedulers": ["greedy"], "trials": 1, "steps": 1, "output_dir": "o"}"#
        )
        .is_err());
    }
}
