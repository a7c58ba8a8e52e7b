//! Reported quantities: coverage AUC, Mann-Whitney U, percentile bootstrap
//! intervals, consistency and scheduler overhead in abstract op counts.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::rng::SeededRng;
use crate::{Error, Result};

/// `(step, covered features)` samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageTimeline {
    points: Vec<(u64, f64)>,
}

impl CoverageTimeline {
    /// Steps must be strictly increasing and counts non-decreasing.
    pub fn new(points: Vec<(u64, f64)>) -> Result<Self> {
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidArgument("timeline steps must increase".into()));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::InvalidArgument("coverage counts must not decrease".into()));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(u64, f64)] {
        &self.points
    }
}

/// Trapezoidal area under the coverage curve.
pub fn auc(timeline: &CoverageTimeline) -> Result<f64> {
    let p = timeline.points();
    if p.len() < 2 {
        return Err(Error::TooFewSamples {
            what: "AUC",
            needed: 2,
            got: p.len(),
        });
    }
    Ok(p.windows(2)
        .map(|w| (w[1].0 - w[0].0) as f64 * (w[0].1 + w[1].1) / 2.0)
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    /// Pairs `(x, y)` with x from `a`, y from `b` and x > y; ties count 1/2.
    pub u: f64,
    /// Two-sided.
    pub p_value: f64,
}

/// Below this size in either sample the p-value is computed exactly.
const MWU_EXACT_BELOW: usize = 8;

/// Mann-Whitney U of `a` against `b` using midranks.
///
/// With both samples of size 8 or more the p-value comes from the normal
/// approximation with tie and continuity corrections; otherwise from the
/// exact permutation distribution of the midrank sum.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    for (s, what) in [(a, "Mann-Whitney sample a"), (b, "Mann-Whitney sample b")] {
        if s.is_empty() {
            return Err(Error::TooFewSamples {
                what,
                needed: 1,
                got: 0,
            });
        }
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(Error::InvalidArgument("NaN in Mann-Whitney sample".into()));
    }
    let (n, m) = (a.len(), b.len());
    let total = n + m;

    let mut pooled: Vec<(f64, bool)> = a
        .iter()
        .map(|&x| (x, true))
        .chain(b.iter().map(|&x| (x, false)))
        .collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));

    // Doubled midranks are integers: first + last (1-based) of each tie run.
    let mut doubled_ranks = vec![0u64; total];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < total {
        let mut j = i;
        while j + 1 < total && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        let doubled = (i + 1 + j + 1) as u64;
        doubled_ranks[i..=j].fill(doubled);
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }

    let rank_sum_a: f64 = pooled
        .iter()
        .zip(&doubled_ranks)
        .filter(|((_, in_a), _)| *in_a)
        .map(|(_, &r)| r as f64 / 2.0)
        .sum();
    let u = rank_sum_a - (n * (n + 1)) as f64 / 2.0;
    let mean = (n * m) as f64 / 2.0;

    let p_value = if n < MWU_EXACT_BELOW || m < MWU_EXACT_BELOW {
        exact_p(&pooled, &doubled_ranks, n, m)
    } else {
        let (nf, mf, tf) = (n as f64, m as f64, total as f64);
        let var = nf * mf / 12.0 * ((tf + 1.0) - tie_term / (tf * (tf - 1.0)));
        if var <= 0.0 {
            1.0
        } else {
            let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
            erfc(z / std::f64::consts::SQRT_2).min(1.0)
        }
    };
    Ok(MannWhitney { u, p_value })
}

/// Two-sided exact p-value, `2 * min(P(U <= u), P(U >= u))` capped at 1,
/// from the distribution of the smaller group's doubled rank sum over all
/// equally likely group assignments.
fn exact_p(pooled: &[(f64, bool)], doubled_ranks: &[u64], n: usize, m: usize) -> f64 {
    let small_is_a = n <= m;
    let s = n.min(m);
    let observed: u64 = pooled
        .iter()
        .zip(doubled_ranks)
        .filter(|((_, in_a), _)| *in_a == small_is_a)
        .map(|(_, &r)| r)
        .sum();

    let max_sum: u64 = doubled_ranks.iter().rev().take(s).sum();
    let width = max_sum as usize + 1;
    // ways[j * width + sum]: subsets of size j with that doubled rank sum.
    let mut ways = vec![0u128; (s + 1) * width];
    ways[0] = 1;
    for &r in doubled_ranks {
        let r = r as usize;
        for j in (1..=s).rev() {
            for sum in (r..width).rev() {
                let from = ways[(j - 1) * width + sum - r];
                if from != 0 {
                    ways[j * width + sum] += from;
                }
            }
        }
    }
    let dist = &ways[s * width..];
    let all: u128 = dist.iter().sum();
    let low: u128 = dist[..=observed as usize].iter().sum();
    let high: u128 = dist[observed as usize..].iter().sum();
    // A smaller rank sum for the small group is a smaller U for that group;
    // the two-sided value is symmetric in orientation.
    let tail = low.min(high) as f64 / all as f64;
    (2.0 * tail).min(1.0)
}

/// Percentile bootstrap interval for the mean.
pub fn bootstrap_ci(
    samples: &[f64],
    confidence: f64,
    resamples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples {
            what: "bootstrap",
            needed: 2,
            got: samples.len(),
        });
    }
    if !(confidence > 0.0 && confidence < 1.0) || resamples == 0 {
        return Err(Error::InvalidArgument(
            "confidence must be in (0, 1) and resamples positive".into(),
        ));
    }
    let n = samples.len();
    let mut rng = SeededRng::new(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| samples[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - confidence) / 2.0;
    Ok((quantile(&means, tail), quantile(&means, 1.0 - tail)))
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Mean number of unique discoveries per trial: total / unique / trials.
pub fn consistency(total: u64, unique: u64, trials: u64) -> Result<f64> {
    if unique == 0 || trials == 0 {
        return Err(Error::InvalidArgument(
            "consistency needs unique >= 1 and trials >= 1".into(),
        ));
    }
    Ok(total as f64 / unique as f64 / trials as f64)
}

/// Abstract operation counts collected over a campaign.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OverheadCounters {
    pub update_count: u64,
    pub update_costs: Vec<u64>,
    pub select_costs: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverheadSummary {
    pub count: u64,
    pub mean: f64,
    /// Population variance.
    pub variance: f64,
}

/// Count, mean and population variance of per-update costs.
pub fn overhead_summary(counters: &OverheadCounters) -> Result<OverheadSummary> {
    let mut s = cost_summary(&counters.update_costs)?;
    s.count = counters.update_count;
    Ok(s)
}

/// Count, mean and population variance of any cost series.
pub fn cost_summary(costs: &[u64]) -> Result<OverheadSummary> {
    if costs.is_empty() {
        return Err(Error::TooFewSamples {
            what: "overhead summary",
            needed: 1,
            got: 0,
        });
    }
    let n = costs.len() as f64;
    let mean = costs.iter().map(|&c| c as f64).sum::<f64>() / n;
    let variance = costs.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / n;
    Ok(OverheadSummary {
        count: costs.len() as u64,
        mean,
        variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn timeline(points: &[(u64, f64)]) -> CoverageTimeline {
        CoverageTimeline::new(points.to_vec()).unwrap()
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&timeline(&[(0, 100.0), (10, 100.0)])).unwrap(), 1000.0);
        assert_eq!(auc(&timeline(&[(0, 0.0), (5, 5.0), (10, 10.0)])).unwrap(), 50.0);
        assert!(matches!(
            auc(&timeline(&[(3, 1.0)])),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn timeline_rejects_bad_points() {
        assert!(CoverageTimeline::new(vec![(1, 0.0), (1, 1.0)]).is_err());
        assert!(CoverageTimeline::new(vec![(1, 2.0), (2, 1.0)]).is_err());
    }

    /// Count of pairs x > y plus half the ties.
    fn brute_u(a: &[f64], b: &[f64]) -> f64 {
        let mut u = 0.0;
        for x in a {
            for y in b {
                if x > y {
                    u += 1.0;
                } else if x == y {
                    u += 0.5;
                }
            }
        }
        u
    }

    #[test]
    fn mwu_complete_separation() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.u, 0.0);
        assert!((r.p_value - 0.1).abs() < 1e-12);
        let r = mann_whitney_u(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.u, 9.0);
    }

    #[test]
    fn mwu_small_exact() {
        let (a, b) = ([1.0, 2.0, 4.0], [3.0, 5.0]);
        let r = mann_whitney_u(&a, &b).unwrap();
        assert_eq!(r.u, brute_u(&a, &b));
        assert_eq!(r.u, 1.0);
        assert!((r.p_value - 0.4).abs() < 1e-12);

        let a = [1.0, 2.0, 3.0, 4.0];
        let b: Vec<f64> = (5..=13).map(f64::from).collect();
        let r = mann_whitney_u(&a, &b).unwrap();
        assert!((r.p_value - 0.002797202797202797).abs() < 1e-12);
    }

    #[test]
    fn mwu_normal_approximation_matches_reference() {
        // Reference p-values from an independent implementation.
        let a = [1.1, 2.3, 2.3, 4.0, 5.5, 6.1, 7.2, 8.8, 9.0, 10.5];
        let b = [3.3, 4.0, 6.6, 7.7, 8.8, 11.0, 12.5, 13.1, 14.2];
        let r = mann_whitney_u(&a, &b).unwrap();
        assert_eq!(r.u, 23.0);
        assert!((r.p_value - 0.07878460174045175).abs() < 1e-9, "{}", r.p_value);

        let a: Vec<f64> = (0..20).map(f64::from).collect();
        let b: Vec<f64> = (0..15).map(|x| f64::from(x) + 7.5).collect();
        let r = mann_whitney_u(&a, &b).unwrap();
        assert_eq!(r.u, 78.0);
        assert!((r.p_value - 0.017156651336835287).abs() < 1e-9, "{}", r.p_value);
    }

    #[test]
    fn mwu_identical_samples() {
        let a = [3.0, 1.0, 4.0, 1.0, 5.0];
        let r = mann_whitney_u(&a, &a).unwrap();
        assert_eq!(r.u, 12.5);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        let all_same = [2.0; 10];
        assert_eq!(mann_whitney_u(&all_same, &all_same).unwrap().p_value, 1.0);
    }

    /// Exact two-sided p by enumerating every split of the pooled data.
    fn brute_p(a: &[f64], b: &[f64]) -> f64 {
        let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
        let (n, total) = (a.len(), pooled.len());
        let u_obs = brute_u(a, b);
        let (mut le, mut ge, mut count) = (0u64, 0u64, 0u64);
        for mask in 0u32..(1 << total) {
            if mask.count_ones() as usize != n {
                continue;
            }
            let (mut x, mut y) = (Vec::new(), Vec::new());
            for (i, &v) in pooled.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    x.push(v)
                } else {
                    y.push(v)
                }
            }
            let u = brute_u(&x, &y);
            count += 1;
            le += (u <= u_obs) as u64;
            ge += (u >= u_obs) as u64;
        }
        (2.0 * le.min(ge) as f64 / count as f64).min(1.0)
    }

    #[test]
    fn mwu_exact_with_ties_matches_enumeration() {
        let cases: [(&[f64], &[f64]); 4] = [
            (&[1.0, 2.0, 2.0, 3.0], &[2.0, 3.0, 3.0, 4.0, 5.0]),
            (&[0.0, 0.0, 1.0], &[0.0, 1.0, 1.0, 1.0, 2.0, 2.0]),
            (&[5.0], &[1.0, 2.0, 3.0, 4.0, 6.0, 7.0]),
            (&[1.0, 1.0, 1.0, 2.0, 9.0, 9.0, 9.0], &[1.0, 2.0, 2.0, 3.0, 4.0, 9.0, 10.0, 11.0]),
        ];
        for (a, b) in cases {
            let r = mann_whitney_u(a, b).unwrap();
            assert_eq!(r.u, brute_u(a, b));
            assert!((r.p_value - brute_p(a, b)).abs() < 1e-12, "{a:?} {b:?}");
        }
    }

    #[test]
    fn mwu_rejects_empty() {
        assert!(mann_whitney_u(&[], &[1.0]).is_err());
        assert!(mann_whitney_u(&[1.0], &[]).is_err());
    }

    #[test]
    fn bootstrap_examples() {
        assert_eq!(bootstrap_ci(&[4.0; 12], 0.95, 1000, 1).unwrap(), (4.0, 4.0));
        let data: Vec<f64> = (0..40).map(|i| (i % 7) as f64).collect();
        let a = bootstrap_ci(&data, 0.95, 2000, 3).unwrap();
        assert_eq!(a, bootstrap_ci(&data, 0.95, 2000, 3).unwrap());
        assert!(a.0 < a.1);
        assert!(bootstrap_ci(&[1.0], 0.95, 10, 0).is_err());
        assert!(bootstrap_ci(&[1.0, 2.0], 1.5, 10, 0).is_err());
    }

    #[test]
    fn consistency_examples() {
        assert_eq!(consistency(70, 7, 10).unwrap(), 1.0);
        assert!((consistency(238, 29, 10).unwrap() - 0.82).abs() <= 0.005);
        assert_eq!(consistency(0, 1, 10).unwrap(), 0.0);
        assert!(consistency(1, 0, 10).is_err());
        assert!(consistency(1, 1, 0).is_err());
    }

    #[test]
    fn overhead_examples() {
        let c = OverheadCounters {
            update_count: 2,
            update_costs: vec![1, 3],
            select_costs: vec![],
        };
        let s = overhead_summary(&c).unwrap();
        assert_eq!((s.count, s.mean, s.variance), (2, 2.0, 1.0));
        let s = cost_summary(&[7; 5]).unwrap();
        assert_eq!(s.variance, 0.0);
        assert!(overhead_summary(&OverheadCounters::default()).is_err());
    }
}
