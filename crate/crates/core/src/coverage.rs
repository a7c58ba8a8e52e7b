//! Greybox bookkeeping: coverage maps, novelty, hit counts, rareness and the
//! favored-input table.
//!
//! The favored table keeps, for every feature, the cheapest retained input
//! (by `exec_time * size`) that covers it. Its entries are exactly the bandit
//! arms that can be selected.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Per-feature hit counts from one execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageMap(Vec<u32>);

impl CoverageMap {
    pub fn new(hits: Vec<u32>) -> Self {
        Self(hits)
    }

    /// Map of length `k_size` with a hit count of one on each listed feature.
    pub fn from_features(k_size: usize, features: &[usize]) -> Self {
        let mut hits = vec![0; k_size];
        for &k in features {
            hits[k] = 1;
        }
        Self(hits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn hits(&self) -> &[u32] {
        &self.0
    }

    /// Indices with a non-zero hit count.
    pub fn features(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(k, &x)| (x != 0).then_some(k))
            .collect()
    }
}

/// AFL-style hit-count class: {1}, {2}, {3}, {4-7}, {8-15}, {16-31},
/// {32-127}, {128+}, numbered 0 through 7.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bucket(u8);

impl Bucket {
    pub fn index(self) -> u8 {
        self.0
    }
}

pub fn bucketize(hit_count: u32) -> Result<Bucket> {
    let class = match hit_count {
        0 => return Err(Error::ZeroHitCount),
        1 => 0,
        2 => 1,
        3 => 2,
        4..=7 => 3,
        8..=15 => 4,
        16..=31 => 5,
        32..=127 => 6,
        _ => 7,
    };
    Ok(Bucket(class))
}

/// Novelty test deciding whether an execution is retained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterestingPolicy {
    /// Some feature is hit for the first time.
    #[default]
    NewFeature,
    /// Some feature is hit in a hit-count bucket not seen before.
    NewBucket,
}

impl FromStr for InterestingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "new-feature" => Ok(Self::NewFeature),
            "new-bucket" => Ok(Self::NewBucket),
            other => Err(Error::InvalidArgument(format!(
                "unknown interestingness policy `{other}`"
            ))),
        }
    }
}

/// Hit counts accumulated over every executed input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalCoverage {
    total_hits: Vec<u64>,
    /// Bit `b` of entry `k` is set once bucket `b` was observed on feature `k`.
    seen_buckets: Vec<u8>,
}

impl GlobalCoverage {
    pub fn new(k_size: usize) -> Self {
        Self {
            total_hits: vec![0; k_size],
            seen_buckets: vec![0; k_size],
        }
    }

    pub fn k_size(&self) -> usize {
        self.total_hits.len()
    }

    pub fn total_hits(&self) -> &[u64] {
        &self.total_hits
    }

    pub fn has_seen(&self, k: usize, bucket: Bucket) -> bool {
        self.seen_buckets[k] & (1 << bucket.0) != 0
    }

    /// Number of features hit at least once.
    pub fn covered(&self) -> usize {
        self.total_hits.iter().filter(|&&h| h > 0).count()
    }

    fn check_dim(&self, cov: &CoverageMap) -> Result<()> {
        if cov.len() != self.k_size() {
            return Err(Error::Dimension {
                expected: self.k_size(),
                actual: cov.len(),
            });
        }
        Ok(())
    }

    /// Would `cov` count as interesting under `policy`? Does not mutate.
    pub fn classify(&self, cov: &CoverageMap, policy: InterestingPolicy) -> Result<bool> {
        self.check_dim(cov)?;
        let mut hit = cov.hits().iter().enumerate().filter(|(_, &x)| x != 0);
        Ok(match policy {
            InterestingPolicy::NewFeature => hit.any(|(k, _)| self.total_hits[k] == 0),
            InterestingPolicy::NewBucket => hit.any(|(k, &x)| {
                let bucket = bucketize(x).expect("zero counts filtered");
                !self.has_seen(k, bucket)
            }),
        })
    }

    /// Add one execution's hit counts.
    pub fn absorb(&mut self, cov: &CoverageMap) -> Result<()> {
        self.check_dim(cov)?;
        for (k, &x) in cov.hits().iter().enumerate() {
            if x != 0 {
                self.total_hits[k] += u64::from(x);
                let bucket = bucketize(x).expect("non-zero");
                self.seen_buckets[k] |= 1 << bucket.0;
            }
        }
        Ok(())
    }

    /// Inverse hit count per feature; `None` for features never hit.
    pub fn rareness(&self) -> Vec<Option<f64>> {
        self.total_hits
            .iter()
            .map(|&h| (h > 0).then(|| 1.0 / h as f64))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InputId(pub u64);

impl fmt::Display for InputId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One corpus entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub id: InputId,
    /// Bytes.
    pub size: u64,
    /// Simulated time units.
    pub exec_time: f64,
    /// Sorted feature indices with a non-zero hit count.
    pub features: Vec<usize>,
    pub times_fuzzed: u64,
}

impl InputRecord {
    pub fn new(id: InputId, size: u64, exec_time: f64, mut features: Vec<usize>) -> Self {
        features.sort_unstable();
        features.dedup();
        Self {
            id,
            size,
            exec_time,
            features,
            times_fuzzed: 0,
        }
    }

    /// Favoring weight: faster and smaller is better.
    pub fn weight(&self) -> f64 {
        self.exec_time * self.size as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FavoredEntry {
    pub input: InputId,
    pub weight: f64,
}

/// Feature index to cheapest covering input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FavoredTable {
    entries: Vec<Option<FavoredEntry>>,
}

impl FavoredTable {
    pub fn new(k_size: usize) -> Self {
        Self {
            entries: vec![None; k_size],
        }
    }

    pub fn k_size(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, k: usize) -> Option<FavoredEntry> {
        self.entries[k]
    }

    pub fn entries(&self) -> &[Option<FavoredEntry>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.iter().all(Option::is_none)
    }

    /// Offer a retained input. It replaces an entry only on a strictly
    /// smaller weight; the incumbent keeps ties. Returns the number of
    /// entries replaced or created.
    pub fn update(&mut self, input: &InputRecord) -> Result<usize> {
        let weight = input.weight();
        let mut changed = 0;
        for &k in &input.features {
            let k_size = self.entries.len();
            let slot = self.entries.get_mut(k).ok_or(Error::Dimension {
                expected: k_size,
                actual: k + 1,
            })?;
            if slot.is_none_or(|e| weight < e.weight) {
                *slot = Some(FavoredEntry {
                    input: input.id,
                    weight,
                });
                changed += 1;
            }
        }
        Ok(changed)
    }

    /// Features that currently map to an input.
    pub fn selectable(&self) -> Vec<bool> {
        self.entries.iter().map(Option::is_some).collect()
    }
}

/// Retained inputs in insertion order.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Corpus {
    inputs: Vec<InputRecord>,
    #[serde(skip)]
    index: HashMap<InputId, usize>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.inputs == other.inputs
    }
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Retain `input` unless an input with the same id is already present.
    /// Returns whether it was inserted.
    pub fn insert(&mut self, input: InputRecord) -> bool {
        self.reindex();
        if self.index.contains_key(&input.id) {
            return false;
        }
        self.index.insert(input.id, self.inputs.len());
        self.inputs.push(input);
        true
    }

    pub fn get(&self, id: InputId) -> Option<&InputRecord> {
        match self.index.get(&id) {
            Some(&i) => self.inputs.get(i),
            None => self.inputs.iter().find(|r| r.id == id),
        }
    }

    pub fn at(&self, position: usize) -> &InputRecord {
        &self.inputs[position]
    }

    pub fn iter(&self) -> impl Iterator<Item = &InputRecord> {
        self.inputs.iter()
    }

    /// Bump `times_fuzzed` for `id`.
    pub fn mark_fuzzed(&mut self, id: InputId) {
        self.reindex();
        if let Some(&i) = self.index.get(&id) {
            self.inputs[i].times_fuzzed += 1;
        }
    }

    // The index is not serialized; rebuild it lazily after a load.
    fn reindex(&mut self) {
        if self.index.len() != self.inputs.len() {
            self.index = self
                .inputs
                .iter()
                .enumerate()
                .map(|(i, r)| (r.id, i))
                .collect();
        }
    }
}
