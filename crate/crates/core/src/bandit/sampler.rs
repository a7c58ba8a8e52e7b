use rand::Rng;
use serde::{Deserialize, Serialize};

use super::beta::beta_variate;
use super::PosteriorState;
use crate::rng::SeededRng;

/// Source of the per-arm draws used by selection. The production
/// implementation is [`ThompsonSampler`]; tests substitute fixed vectors.
pub trait PosteriorSampler {
    /// theta[k] ~ Beta(alpha[k], beta[k]) for k = 0..K.
    fn theta(&mut self, state: &PosteriorState) -> Vec<f64>;

    /// psi[k] ~ Beta(alpha[k] + beta[k], alpha[k]^2) for k = 0..K.
    fn psi(&mut self, state: &PosteriorState) -> Vec<f64>;
}

/// Seeded Beta sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThompsonSampler {
    rng: SeededRng,
}

impl ThompsonSampler {
    pub fn new(rng: SeededRng) -> Self {
        Self { rng }
    }

    pub fn rng_mut(&mut self) -> &mut SeededRng {
        &mut self.rng
    }
}

impl PosteriorSampler for ThompsonSampler {
    fn theta(&mut self, state: &PosteriorState) -> Vec<f64> {
        sample_theta(state, &mut self.rng)
    }

    fn psi(&mut self, state: &PosteriorState) -> Vec<f64> {
        sample_psi(state, &mut self.rng)
    }
}

pub fn sample_theta<R: Rng + ?Sized>(state: &PosteriorState, rng: &mut R) -> Vec<f64> {
    state
        .alpha()
        .iter()
        .zip(state.beta())
        .map(|(&a, &b)| beta_variate(a, b, rng))
        .collect()
}

pub fn sample_psi<R: Rng + ?Sized>(state: &PosteriorState, rng: &mut R) -> Vec<f64> {
    state
        .alpha()
        .iter()
        .zip(state.beta())
        .map(|(&a, &b)| beta_variate(a + b, a * a, rng))
        .collect()
}
