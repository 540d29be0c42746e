//! Angular multi-threshold clustering objective.
//!
//! Node angles are quantised into `L` bins and treated like grey levels of
//! an image histogram. A [`ThresholdSet`] cuts the bins into `K` contiguous
//! segments without wrap-around at angle zero:
//! `[0, t₁)`, `[t₁, t₂)`, …, `[t_{K−1}, L)`.
//!
//! The clustering objective combines the Otsu between-class variance of the
//! bin indices (normalised by the total histogram variance) with a load
//! balance term `1 / (1 + f2)` over segment node counts. Higher is better.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Cluster, ClusterAssignment, Node};

/// Integer-degree quantisation.
pub const DEFAULT_BIN_COUNT: usize = 360;

/// Enumeration cap for [`exhaustive_best_threshold`].
pub const EXHAUSTIVE_CAP: u128 = 10_000_000;

/// Histogram of node angle bins, with integer prefix sums so any segment's
/// count, first and second moment is O(1).
#[derive(Debug, Clone, PartialEq)]
pub struct AngleHistogram {
    counts: Vec<u64>,
    total: u64,
    cum_count: Vec<u64>,
    cum_moment: Vec<u128>,
}

impl AngleHistogram {
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidParameter("histogram needs at least one bin".into()));
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptyNetwork);
        }
        let mut cum_count = Vec::with_capacity(counts.len() + 1);
        let mut cum_moment = Vec::with_capacity(counts.len() + 1);
        cum_count.push(0);
        cum_moment.push(0);
        for (i, &c) in counts.iter().enumerate() {
            cum_count.push(cum_count[i] + c);
            cum_moment.push(cum_moment[i] + i as u128 * c as u128);
        }
        Ok(Self {
            counts,
            total,
            cum_count,
            cum_moment,
        })
    }

    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.total as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Mean bin index.
    pub fn mean(&self) -> f64 {
        self.cum_moment[self.counts.len()] as f64 / self.total as f64
    }

    /// Variance of the bin index over all nodes.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| c as f64 * (i as f64 - mean).powi(2))
            .sum::<f64>()
            / self.total as f64
    }

    fn segment_count(&self, lo: usize, hi: usize) -> u64 {
        self.cum_count[hi] - self.cum_count[lo]
    }

    fn segment_moment(&self, lo: usize, hi: usize) -> u128 {
        self.cum_moment[hi] - self.cum_moment[lo]
    }
}

/// Bin of an angle in `[0, 2π)` for `bin_count` equal bins.
pub fn angle_bin(angle: f64, bin_count: usize) -> usize {
    let width = TAU / bin_count as f64;
    ((angle / width).floor() as usize).min(bin_count - 1)
}

pub fn build_histogram(angles: &[f64], bin_count: usize) -> Result<AngleHistogram> {
    if bin_count == 0 {
        return Err(Error::InvalidParameter("bin_count must be >= 1".into()));
    }
    if angles.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    let mut counts = vec![0u64; bin_count];
    for &a in angles {
        if !(0.0..TAU).contains(&a) {
            return Err(Error::InvalidParameter(format!(
                "angle {a} outside [0, 2π)"
            )));
        }
        counts[angle_bin(a, bin_count)] += 1;
    }
    AngleHistogram::from_counts(counts)
}

/// Strictly increasing cut points in `[1, L−1]`; `K = len + 1` segments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ThresholdSet {
    thresholds: Vec<usize>,
}

impl ThresholdSet {
    pub fn new(thresholds: Vec<usize>, bin_count: usize) -> Result<Self> {
        let valid_range = |t: usize| t >= 1 && t < bin_count;
        if !thresholds.iter().all(|&t| valid_range(t)) {
            return Err(Error::InvalidParameter(format!(
                "thresholds {thresholds:?} must lie in [1, {}]",
                bin_count.saturating_sub(1)
            )));
        }
        if !thresholds.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(format!(
                "thresholds {thresholds:?} must be strictly increasing"
            )));
        }
        Ok(Self { thresholds })
    }

    /// The single-segment partition.
    pub fn empty() -> Self {
        Self { thresholds: vec![] }
    }

    pub(crate) fn from_sorted_unchecked(thresholds: Vec<usize>) -> Self {
        Self { thresholds }
    }

    pub fn thresholds(&self) -> &[usize] {
        &self.thresholds
    }

    pub fn k(&self) -> usize {
        self.thresholds.len() + 1
    }

    /// Segment of a bin.
    pub fn segment_of(&self, bin: usize) -> usize {
        self.thresholds.partition_point(|&t| t <= bin)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub alpha1: f64,
    pub alpha2: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self {
            alpha1: 0.5,
            alpha2: 0.5,
        }
    }
}

impl ObjectiveWeights {
    pub fn new(alpha1: f64, alpha2: f64) -> Result<Self> {
        let w = Self { alpha1, alpha2 };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.alpha1) || !unit(self.alpha2) || (self.alpha1 + self.alpha2 - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidParameter(format!(
                "objective weights must lie in [0,1] and sum to 1, got ({}, {})",
                self.alpha1, self.alpha2
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentStats {
    /// Cumulative probability `w_k`.
    pub weight: f64,
    /// Mean bin index `u_k`; zero for an empty segment.
    pub mean: f64,
    pub count: u64,
}

fn check_thresholds(h: &AngleHistogram, t: &ThresholdSet) -> Result<()> {
    match t.thresholds.last() {
        Some(&last) if last >= h.bin_count() => Err(Error::InvalidParameter(format!(
            "threshold {last} out of range for {} bins",
            h.bin_count()
        ))),
        _ => Ok(()),
    }
}

/// Calls `f(lo, hi)` for each half-open segment `[lo, hi)`.
fn for_each_segment(bins: usize, thresholds: &[usize], mut f: impl FnMut(usize, usize)) {
    let mut lo = 0;
    for &t in thresholds {
        f(lo, t);
        lo = t;
    }
    f(lo, bins);
}

pub fn segment_stats(h: &AngleHistogram, t: &ThresholdSet) -> Result<Vec<SegmentStats>> {
    check_thresholds(h, t)?;
    let n = h.total as f64;
    let mut out = Vec::with_capacity(t.k());
    for_each_segment(h.bin_count(), &t.thresholds, |lo, hi| {
        let count = h.segment_count(lo, hi);
        let weight = count as f64 / n;
        let mean = if count == 0 {
            0.0
        } else {
            h.segment_moment(lo, hi) as f64 / count as f64
        };
        out.push(SegmentStats {
            weight,
            mean,
            count,
        });
    });
    Ok(out)
}

/// Between-class variance of the bin index.
pub fn f1_angle_variance(h: &AngleHistogram, t: &ThresholdSet) -> Result<f64> {
    check_thresholds(h, t)?;
    Ok(Evaluator::new(h, ObjectiveWeights::default()).between_class(&t.thresholds))
}

/// `(1/N)·Σ (NC_k − N/K)²`.
pub fn f2_count_variance(h: &AngleHistogram, t: &ThresholdSet) -> Result<f64> {
    check_thresholds(h, t)?;
    Ok(Evaluator::new(h, ObjectiveWeights::default()).count_variance(&t.thresholds))
}

pub fn objective_f1(h: &AngleHistogram, t: &ThresholdSet, w: ObjectiveWeights) -> Result<f64> {
    check_thresholds(h, t)?;
    Ok(Evaluator::new(h, w).score(&t.thresholds))
}

/// Allocation-free objective evaluation over raw threshold slices. The
/// slice must be a valid threshold set for the histogram.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    h: &'a AngleHistogram,
    w: ObjectiveWeights,
    mean: f64,
    variance: f64,
}

impl<'a> Evaluator<'a> {
    pub fn new(h: &'a AngleHistogram, w: ObjectiveWeights) -> Self {
        Self {
            h,
            w,
            mean: h.mean(),
            variance: h.variance(),
        }
    }

    pub fn histogram(&self) -> &AngleHistogram {
        self.h
    }

    pub fn between_class(&self, thresholds: &[usize]) -> f64 {
        let n = self.h.total as f64;
        let mut acc = 0.0;
        for_each_segment(self.h.bin_count(), thresholds, |lo, hi| {
            let c = self.h.segment_count(lo, hi);
            if c > 0 {
                let mean = self.h.segment_moment(lo, hi) as f64 / c as f64;
                acc += (c as f64 / n) * (mean - self.mean).powi(2);
            }
        });
        acc
    }

    pub fn count_variance(&self, thresholds: &[usize]) -> f64 {
        let n = self.h.total as f64;
        let target = n / (thresholds.len() + 1) as f64;
        let mut acc = 0.0;
        for_each_segment(self.h.bin_count(), thresholds, |lo, hi| {
            let c = self.h.segment_count(lo, hi) as f64;
            acc += (c - target).powi(2);
        });
        acc / n
    }

    /// `α₁·f1/σ²_T + α₂/(1 + f2)`.
    pub fn score(&self, thresholds: &[usize]) -> f64 {
        let f1_norm = if self.variance > 0.0 {
            (self.between_class(thresholds) / self.variance).min(1.0)
        } else {
            0.0
        };
        let f2_norm = 1.0 / (1.0 + self.count_variance(thresholds));
        self.w.alpha1 * f1_norm + self.w.alpha2 * f2_norm
    }
}

/// `C(n, r)` saturating at `u128::MAX`.
pub fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Global maximiser of [`objective_f1`] by enumerating every threshold set
/// in lexicographic order. Ties keep the lexicographically smallest set.
pub fn exhaustive_best_threshold(
    h: &AngleHistogram,
    k: usize,
    w: ObjectiveWeights,
) -> Result<(ThresholdSet, f64)> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let eval = Evaluator::new(h, w);
    if k == 1 {
        return Ok((ThresholdSet::empty(), eval.score(&[])));
    }
    let levels = h.bin_count() - 1;
    let dims = k - 1;
    let candidates = binomial(levels, dims);
    if candidates == 0 {
        return Err(Error::InvalidParameter(format!(
            "{k} segments do not fit in {} bins",
            h.bin_count()
        )));
    }
    if candidates > EXHAUSTIVE_CAP {
        return Err(Error::SearchTooLarge {
            candidates,
            cap: EXHAUSTIVE_CAP,
        });
    }

    let mut cur: Vec<usize> = (1..=dims).collect();
    let mut best = cur.clone();
    let mut best_score = eval.score(&cur);
    loop {
        // advance to the next combination of {1..=levels}
        let mut i = dims;
        loop {
            if i == 0 {
                return Ok((ThresholdSet::from_sorted_unchecked(best), best_score));
            }
            i -= 1;
            if cur[i] < levels - (dims - 1 - i) {
                break;
            }
        }
        cur[i] += 1;
        for j in i + 1..dims {
            cur[j] = cur[j - 1] + 1;
        }
        let s = eval.score(&cur);
        if s > best_score {
            best_score = s;
            best.copy_from_slice(&cur);
        }
    }
}

/// Splits alive nodes into `t.k()` clusters by angle bin, in segment order.
/// Dead nodes are skipped. Heads are left unset.
pub fn materialize_clusters(
    nodes: &[Node],
    t: &ThresholdSet,
    bin_count: usize,
) -> Result<ClusterAssignment> {
    if t.thresholds.last().map_or(false, |&last| last >= bin_count) {
        return Err(Error::InvalidParameter(format!(
            "threshold set {:?} out of range for {bin_count} bins",
            t.thresholds
        )));
    }
    let mut members = vec![Vec::new(); t.k()];
    for n in nodes.iter().filter(|n| n.alive) {
        members[t.segment_of(angle_bin(n.angle, bin_count))].push(n.id);
    }
    Ok(ClusterAssignment {
        clusters: members.into_iter().map(Cluster::new).collect(),
        round_created: 0,
    })
}
