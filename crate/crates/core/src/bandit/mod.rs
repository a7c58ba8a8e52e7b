//! Beta-Bernoulli posterior over coverage-map features.
//!
//! Every coverage feature is one bandit arm. `alpha[k] - 1` counts hits of
//! feature `k` by interesting inputs and `beta[k] - 1` counts hits by
//! uninteresting ones. Selection draws a fresh Thompson sample per arm,
//! optionally scaled by a rareness correction, and takes the arg max over the
//! arms that currently have a favored input.

mod beta;
mod sampler;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coverage::CoverageMap;
use crate::{Error, Result};

pub use beta::{beta_variate, gamma_variate};
pub use sampler::{sample_psi, sample_theta, PosteriorSampler, ThompsonSampler};

/// Which correction is applied to the Thompson sample before the arg max.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Plain Thompson sampling: arg max of theta.
    RareMinus,
    /// theta scaled by the expected correction phi.
    RarePlus,
    /// theta scaled by a sampled correction psi.
    Sample,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::RareMinus, Variant::RarePlus, Variant::Sample];

    pub fn name(self) -> &'static str {
        match self {
            Variant::RareMinus => "rare-minus",
            Variant::RarePlus => "rare-plus",
            Variant::Sample => "sample",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::UnknownScheduler(s.to_owned()))
    }
}

/// Per-feature outcome of one execution: `Some(true)` for a hit by an
/// interesting input, `Some(false)` for a hit by an uninteresting one, `None`
/// when the feature was not hit at all.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewardObservation(Vec<Option<bool>>);

impl RewardObservation {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Reward value for feature `k` as 1 / 0, or `None` if not hit.
    pub fn get(&self, k: usize) -> Option<u8> {
        self.0[k].map(u8::from)
    }

    /// `(feature, reward)` pairs for hit features only.
    pub fn present(&self) -> impl Iterator<Item = (usize, u8)> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(k, r)| r.map(|r| (k, u8::from(r))))
    }
}

/// Reward vector for one execution: 1 on every hit feature when the input is
/// interesting, 0 on every hit feature otherwise, absent elsewhere.
pub fn compute_reward(coverage: &CoverageMap, interesting: bool) -> RewardObservation {
    RewardObservation(
        coverage
            .hits()
            .iter()
            .map(|&x| (x != 0).then_some(interesting))
            .collect(),
    )
}

/// Learned bandit state: Beta(alpha[k], beta[k]) per feature.
///
/// Counts are stored as `f64` because the rareness correction squares alpha;
/// integers up to 2^53 remain exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorState {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

const POSTERIOR_MAGIC: &str = "tsched-posterior";
const POSTERIOR_VERSION: u32 = 1;

impl PosteriorState {
    /// Uniform prior, Beta(1, 1), on every feature.
    pub fn new(k_size: usize) -> Result<Self> {
        if k_size == 0 {
            return Err(Error::EmptyBandit);
        }
        Ok(Self {
            alpha: vec![1.0; k_size],
            beta: vec![1.0; k_size],
        })
    }

    /// Build from explicit parameters. Both vectors must have the same
    /// non-zero length and every entry must be finite and at least 1.
    pub fn from_parts(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::EmptyBandit);
        }
        if alpha.len() != beta.len() {
            return Err(Error::Dimension {
                expected: alpha.len(),
                actual: beta.len(),
            });
        }
        if let Some(bad) = alpha
            .iter()
            .chain(&beta)
            .find(|x| !x.is_finite() || **x < 1.0)
        {
            return Err(Error::InvalidArgument(format!(
                "posterior parameter {bad} is not a finite value >= 1"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn k_size(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Conjugate update: alpha += r, beta += 1 - r on every hit feature.
    /// Returns the number of entries written.
    pub fn update(&mut self, reward: &RewardObservation) -> Result<usize> {
        self.check_dim(reward.len())?;
        let mut touched = 0;
        for (k, r) in reward.present() {
            if r == 1 {
                self.alpha[k] += 1.0;
            } else {
                self.beta[k] += 1.0;
            }
            touched += 1;
        }
        Ok(touched)
    }

    /// Expected rareness correction per feature:
    /// (alpha + beta) / (alpha^2 + alpha + beta).
    pub fn expected_phi(&self) -> Vec<f64> {
        self.alpha
            .iter()
            .zip(&self.beta)
            .map(|(&a, &b)| phi(a, b))
            .collect()
    }

    /// Posterior means normalised to sum to one. Reporting only; selection
    /// never needs it.
    pub fn pbar(&self) -> Vec<f64> {
        let means: Vec<f64> = self
            .alpha
            .iter()
            .zip(&self.beta)
            .map(|(&a, &b)| a / (a + b))
            .collect();
        let total: f64 = means.iter().sum();
        means.into_iter().map(|m| m / total).collect()
    }

    /// Posterior mean alpha / (alpha + beta) per feature.
    pub fn means(&self) -> Vec<f64> {
        self.alpha
            .iter()
            .zip(&self.beta)
            .map(|(&a, &b)| a / (a + b))
            .collect()
    }

    pub(crate) fn check_dim(&self, actual: usize) -> Result<()> {
        if actual != self.k_size() {
            return Err(Error::Dimension {
                expected: self.k_size(),
                actual,
            });
        }
        Ok(())
    }

    /// Versioned text record. Values are written with 17 significant digits
    /// so [`PosteriorState::from_text`] restores them bit for bit.
    pub fn to_text(&self) -> String {
        let join = |xs: &[f64]| {
            xs.iter()
                .map(|x| format!("{x:.16e}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        format!(
            "{POSTERIOR_MAGIC} {POSTERIOR_VERSION}\n{}\n{}\n{}\n",
            self.k_size(),
            join(&self.alpha),
            join(&self.beta)
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::MalformedPosterior(msg.to_owned());
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty record"))?;
        let (magic, version) = header
            .split_once(' ')
            .ok_or_else(|| bad("missing version tag"))?;
        if magic != POSTERIOR_MAGIC {
            return Err(bad("unknown record type"));
        }
        if version != POSTERIOR_VERSION.to_string() {
            return Err(Error::SnapshotVersion {
                expected: POSTERIOR_VERSION.to_string(),
                found: version.to_owned(),
            });
        }
        let k: usize = lines
            .next()
            .and_then(|l| l.trim().parse().ok())
            .ok_or_else(|| bad("missing feature count"))?;
        let mut parse_row = |name: &str| -> Result<Vec<f64>> {
            let row = lines
                .next()
                .ok_or_else(|| bad(&format!("missing {name} row")))?;
            let values = row
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| bad(&format!("{name}: {e}")))?;
            if values.len() != k {
                return Err(Error::Dimension {
                    expected: k,
                    actual: values.len(),
                });
            }
            Ok(values)
        };
        let alpha = parse_row("alpha")?;
        let beta = parse_row("beta")?;
        Self::from_parts(alpha, beta)
    }
}

fn phi(a: f64, b: f64) -> f64 {
    (a + b) / (a * a + a + b)
}

/// Op cost of one selection: one posterior entry read per feature plus one
/// sample per draw.
pub fn select_cost(variant: Variant, k_size: usize) -> u64 {
    let draws_per_arm = match variant {
        Variant::RareMinus | Variant::RarePlus => 1,
        Variant::Sample => 2,
    };
    (k_size * (1 + draws_per_arm)) as u64
}

/// Thompson selection under `variant`, restricted to `selectable` arms.
///
/// theta (and psi for [`Variant::Sample`]) are drawn fresh for every arm on
/// every call, selectable or not, in index order: all theta first, then all
/// psi. Ties go to the smallest index.
pub fn select_action<S: PosteriorSampler + ?Sized>(
    state: &PosteriorState,
    variant: Variant,
    selectable: &[bool],
    sampler: &mut S,
) -> Result<usize> {
    state.check_dim(selectable.len())?;
    if !selectable.iter().any(|&s| s) {
        return Err(Error::EmptyCorpus);
    }
    let mut scores = sampler.theta(state);
    match variant {
        Variant::RareMinus => {}
        Variant::RarePlus => {
            for (s, p) in scores.iter_mut().zip(state.expected_phi()) {
                *s *= p;
            }
        }
        Variant::Sample => {
            for (s, p) in scores.iter_mut().zip(sampler.psi(state)) {
                *s *= p;
            }
        }
    }
    Ok(masked_argmax(&scores, selectable).expect("mask has a selectable entry"))
}

/// Arg max over entries whose mask is set; first maximum wins.
pub fn masked_argmax(scores: &[f64], mask: &[bool]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, (&s, &m)) in scores.iter().zip(mask).enumerate() {
        if m && best.is_none_or(|(_, b)| s > b) {
            best = Some((k, s));
        }
    }
    best.map(|(k, _)| k)
}
