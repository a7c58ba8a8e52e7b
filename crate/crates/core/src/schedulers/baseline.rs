//! Comparison schedulers: greedy posterior mean, uniform and round-robin.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::thompson::FeatureBook;
use super::{Scheduler, Selection};
use crate::bandit::masked_argmax;
use crate::coverage::{Corpus, CoverageMap, InputRecord};
use crate::rng::SeededRng;
use crate::{Error, Result};

/// Always exploits: arg max of the posterior mean over selectable features,
/// smallest index on ties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Greedy {
    book: FeatureBook,
}

impl Greedy {
    pub fn new(k_size: usize) -> Result<Self> {
        Ok(Self {
            book: FeatureBook::new(k_size)?,
        })
    }

    pub fn posterior(&self) -> &crate::bandit::PosteriorState {
        &self.book.posterior
    }
}

impl Scheduler for Greedy {
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
        let action =
            masked_argmax(&self.book.posterior.means(), &mask).ok_or(Error::EmptyCorpus)?;
        let ops = self.k_size() as u64;
        Ok(self.book.pick(action, ops))
    }

    fn corpus(&self) -> &Corpus {
        &self.book.corpus
    }
}

/// Retains interesting inputs; no model, so update cost is zero.
fn retain(corpus: &mut Corpus, k_size: usize, input: &InputRecord, cov: &CoverageMap, interesting: bool) -> Result<u64> {
    if cov.len() != k_size {
        return Err(Error::Dimension {
            expected: k_size,
            actual: cov.len(),
        });
    }
    if interesting {
        corpus.insert(input.clone());
    }
    Ok(0)
}

/// Picks a retained input uniformly at random.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Uniform {
    k_size: usize,
    corpus: Corpus,
    rng: SeededRng,
}

impl Uniform {
    pub fn new(k_size: usize, seed: u64) -> Self {
        Self {
            k_size,
            corpus: Corpus::new(),
            rng: SeededRng::new(seed),
        }
    }
}

impl Scheduler for Uniform {
    fn k_size(&self) -> usize {
        self.k_size
    }

    fn register(&mut self, input: InputRecord) -> Result<()> {
        self.corpus.insert(input);
        Ok(())
    }

    fn observe(&mut self, input: &InputRecord, cov: &CoverageMap, interesting: bool) -> Result<u64> {
        retain(&mut self.corpus, self.k_size, input, cov, interesting)
    }

    fn next(&mut self) -> Result<Selection> {
        if self.corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let id = self.corpus.at(self.rng.random_range(0..self.corpus.len())).id;
        self.corpus.mark_fuzzed(id);
        Ok(Selection {
            input: id,
            action: None,
            ops: 1,
        })
    }

    fn corpus(&self) -> &Corpus {
        &self.corpus
    }
}

/// Cycles through retained inputs in insertion order. Inputs added mid-cycle
/// join the current cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRobin {
    k_size: usize,
    corpus: Corpus,
    cursor: usize,
}

impl RoundRobin {
    pub fn new(k_size: usize) -> Self {
        Self {
            k_size,
            corpus: Corpus::new(),
            cursor: 0,
        }
    }
}

impl Scheduler for RoundRobin {
    fn k_size(&self) -> usize {
        self.k_size
    }

    fn register(&mut self, input: InputRecord) -> Result<()> {
        self.corpus.insert(input);
        Ok(())
    }

    fn observe(&mut self, input: &InputRecord, cov: &CoverageMap, interesting: bool) -> Result<u64> {
        retain(&mut self.corpus, self.k_size, input, cov, interesting)
    }

    fn next(&mut self) -> Result<Selection> {
        if self.corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let id = self.corpus.at(self.cursor % self.corpus.len()).id;
        self.cursor = (self.cursor + 1) % self.corpus.len();
        self.corpus.mark_fuzzed(id);
        Ok(Selection {
            input: id,
            action: None,
            ops: 1,
        })
    }

    fn corpus(&self) -> &Corpus {
        &self.corpus
    }
}
