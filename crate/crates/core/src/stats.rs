//! Histogram and goodness-of-fit helpers for the experiment summaries.

use serde::{Deserialize, Serialize};

/// Fixed-width histogram with explicit bin edges (`counts.len() + 1` edges).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Equal-width bins spanning [lo, hi]; a degenerate span is widened by
    /// half a unit on each side so every value still lands in a bin.
    pub fn with_range(mut lo: f64, mut hi: f64, bins: usize) -> Self {
        assert!(bins >= 1);
        if !(hi - lo).is_normal() {
            lo -= 0.5;
            hi += 0.5;
        }
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins)
            .map(|k| if k == bins { hi } else { lo + k as f64 * width })
            .collect();
        Histogram {
            edges,
            counts: vec![0; bins],
        }
    }

    /// Bins spanning the data's own min/max.
    pub fn from_values(values: &[f64], bins: usize) -> Self {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if values.is_empty() { (0.0, 1.0) } else { (lo, hi) };
        let mut histogram = Self::with_range(lo, hi, bins);
        histogram.fill(values);
        histogram
    }

    /// Two histograms over the pooled min/max of both samples, so the panels
    /// share axes.
    pub fn pooled(a: &[f64], b: &[f64], bins: usize) -> (Self, Self) {
        let lo = a
            .iter()
            .chain(b.iter())
            .copied()
            .fold(f64::INFINITY, f64::min);
        let hi = a
            .iter()
            .chain(b.iter())
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if a.is_empty() && b.is_empty() {
            (0.0, 1.0)
        } else {
            (lo, hi)
        };
        let mut left = Self::with_range(lo, hi, bins);
        left.fill(a);
        let mut right = Self::with_range(lo, hi, bins);
        right.fill(b);
        (left, right)
    }

    pub fn fill(&mut self, values: &[f64]) {
        let bins = self.counts.len();
        let lo = self.edges[0];
        let hi = self.edges[bins];
        let width = (hi - lo) / bins as f64;
        for &v in values {
            let k = (((v - lo) / width) as usize).min(bins - 1);
            self.counts[k] += 1;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Two-sided one-sample Kolmogorov-Smirnov statistic against a reference CDF.
///
/// Sorts the sample in place.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut statistic: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let reference = cdf(x);
        let above = (i as f64 + 1.0) / n - reference;
        let below = reference - i as f64 / n;
        statistic = statistic.max(above.max(below));
    }
    statistic
}
