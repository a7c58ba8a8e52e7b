use serde::{Deserialize, Serialize};

use super::{Scheduler, Selection};
use crate::bandit::{
    compute_reward, select_action, select_cost, PosteriorSampler, PosteriorState,
    ThompsonSampler, Variant,
};
use crate::coverage::{Corpus, CoverageMap, FavoredTable, GlobalCoverage, InputRecord};
use crate::rng::SeededRng;
use crate::{Error, Result};

/// Posterior, favored table, hit counts and corpus: the state shared by
/// every scheduler that reasons over coverage features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(super) struct FeatureBook {
    pub posterior: PosteriorState,
    pub favored: FavoredTable,
    pub global: GlobalCoverage,
    pub corpus: Corpus,
}

impl FeatureBook {
    pub fn new(k_size: usize) -> Result<Self> {
        Ok(Self {
            posterior: PosteriorState::new(k_size)?,
            favored: FavoredTable::new(k_size),
            global: GlobalCoverage::new(k_size),
            corpus: Corpus::new(),
        })
    }

    pub fn k_size(&self) -> usize {
        self.posterior.k_size()
    }

    pub fn register(&mut self, input: InputRecord) -> Result<()> {
        self.favored.update(&input)?;
        self.corpus.insert(input);
        Ok(())
    }

    /// Reward, conjugate update, hit-count absorption and, for interesting
    /// inputs, retention and favoring. Op cost is one read per map entry
    /// plus one write per posterior entry changed.
    pub fn observe(
        &mut self,
        input: &InputRecord,
        cov: &CoverageMap,
        interesting: bool,
    ) -> Result<u64> {
        if cov.len() != self.k_size() {
            return Err(Error::Dimension {
                expected: self.k_size(),
                actual: cov.len(),
            });
        }
        let reward = compute_reward(cov, interesting);
        let touched = self.posterior.update(&reward)?;
        self.global.absorb(cov)?;
        if interesting {
            self.favored.update(input)?;
            self.corpus.insert(input.clone());
        }
        Ok((cov.len() + touched) as u64)
    }

    pub fn pick(&mut self, action: usize, ops: u64) -> Selection {
        let entry = self.favored.get(action).expect("selected arm is favored");
        self.corpus.mark_fuzzed(entry.input);
        Selection {
            input: entry.input,
            action: Some(action),
            ops,
        }
    }
}

/// Thompson-sampling seed scheduler.
///
/// Construction takes only the variant, the coverage-map size and a seed;
/// there is nothing to tune.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TScheduler<S = ThompsonSampler> {
    variant: Variant,
    book: FeatureBook,
    sampler: S,
}

impl TScheduler<ThompsonSampler> {
    pub fn new(variant: Variant, k_size: usize, seed: u64) -> Result<Self> {
        Self::with_sampler(variant, k_size, ThompsonSampler::new(SeededRng::new(seed)))
    }
}

impl<S: PosteriorSampler> TScheduler<S> {
    pub fn with_sampler(variant: Variant, k_size: usize, sampler: S) -> Result<Self> {
        Ok(Self {
            variant,
            book: FeatureBook::new(k_size)?,
            sampler,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn posterior(&self) -> &PosteriorState {
        &self.book.posterior
    }

    pub fn favored(&self) -> &FavoredTable {
        &self.book.favored
    }

    pub fn global(&self) -> &GlobalCoverage {
        &self.book.global
    }

    pub fn sampler_mut(&mut self) -> &mut S {
        &mut self.sampler
    }
}

impl<S: PosteriorSampler> Scheduler for TScheduler<S> {
    fn k_size(&self) -> usize {
        self.book.k_size()
    }

    fn register(&mut self, input: InputRecord) -> Result<()> {
        self.book.register(input)
    }

    fn observe(&mut self, input: &InputRecord, cov: &CoverageMap, interesting: bool) -> Result<u64> {
        self.book.observe(input, cov, interesting)
    }

    fn next(&mut self) -> Result<Selection> {
        let mask = self.book.favored.selectable();
        let action = select_action(&self.book.posterior, self.variant, &mask, &mut self.sampler)?;
        let ops = select_cost(self.variant, self.k_size());
        Ok(self.book.pick(action, ops))
    }

    fn corpus(&self) -> &Corpus {
        &self.book.corpus
    }
}
