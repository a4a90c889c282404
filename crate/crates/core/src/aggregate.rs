//! Collapses a Monte Carlo prediction stack into the final mask and the
//! pixel-level uncertainty map.
//!
//! The predicted mask thresholds the per-pixel mean across iterations with a
//! strict `>`; the uncertainty map is the spread between two percentiles of
//! the per-pixel samples (67th minus 33rd by default).

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{BinaryMask, ProbStack, ScoreGrid, UncertaintyMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregationConfig {
    threshold: f64,
    percentile_high: f64,
    percentile_low: f64,
}

impl Default for AggregationConfig {
    fn default() -> Self {
        AggregationConfig { threshold: 0.95, percentile_high: 67.0, percentile_low: 33.0 }
    }
}

impl AggregationConfig {
    pub fn new(threshold: f64, percentile_high: f64, percentile_low: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::InvalidConfig("threshold must lie in (0, 1)"));
        }
        if !(0.0 <= percentile_low && percentile_low < percentile_high && percentile_high <= 100.0)
        {
            return Err(Error::InvalidConfig("percentiles must satisfy 0 <= low < high <= 100"));
        }
        Ok(AggregationConfig { threshold, percentile_high, percentile_low })
    }

    pub fn with_threshold(self, threshold: f64) -> Result<Self> {
        Self::new(threshold, self.percentile_high, self.percentile_low)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn percentile_high(&self) -> f64 {
        self.percentile_high
    }

    pub fn percentile_low(&self) -> f64 {
        self.percentile_low
    }
}

/// Percentile `q` (0..=100) of ascending `sorted`, linearly interpolated
/// between the order statistics around index `q / 100 * (n - 1)`.
///
/// Panics on an empty slice.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = libm::ceil(pos) as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub(crate) fn sort_f64(values: &mut [f64]) {
    values.sort_unstable_by(f64::total_cmp);
}

/// Per-pixel arithmetic mean across the iterations.
pub fn mean_prediction(stack: &ProbStack) -> ScoreGrid {
    let shape = stack.shape();
    let mut sums = alloc::vec![0.0f64; shape.len()];
    for plane in stack.planes() {
        for (acc, &v) in sums.iter_mut().zip(plane) {
            *acc += f64::from(v);
        }
    }
    let alpha = stack.alpha() as f64;
    // Rounding can push a mean of values in [0, 1] a hair past 1.
    let means: Vec<f64> = sums.into_iter().map(|s| (s / alpha).clamp(0.0, 1.0)).collect();
    ScoreGrid::new(shape.width, shape.height, means).expect("mean of unit-interval values")
}

/// 1 where the mean strictly exceeds the threshold, else 0.
pub fn threshold_prediction(mean: &ScoreGrid, cfg: &AggregationConfig) -> BinaryMask {
    let shape = mean.shape();
    let bits = mean.values().iter().map(|&m| m > cfg.threshold).collect();
    BinaryMask::new(shape.width, shape.height, bits).expect("shape carried over")
}

/// Per-pixel `P_high - P_low` of the iteration samples.
pub fn uncertainty_map(stack: &ProbStack, cfg: &AggregationConfig) -> UncertaintyMap {
    let shape = stack.shape();
    let mut samples = Vec::with_capacity(stack.alpha());
    let mut values = Vec::with_capacity(shape.len());
    for pixel in 0..shape.len() {
        stack.pixel_samples_into(pixel, &mut samples);
        sort_f64(&mut samples);
        let spread = percentile_sorted(&samples, cfg.percentile_high)
            - percentile_sorted(&samples, cfg.percentile_low);
        values.push(spread.clamp(0.0, 1.0));
    }
    UncertaintyMap::from_parts(shape, values)
}

/// Everything the downstream stages need from one stack.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregation {
    pub mean: ScoreGrid,
    pub mask: BinaryMask,
    pub uncertainty: UncertaintyMap,
}

pub fn aggregate(stack: &ProbStack, cfg: &AggregationConfig) -> Aggregation {
    let mean = mean_prediction(stack);
    let mask = threshold_prediction(&mean, cfg);
    let uncertainty = uncertainty_map(stack, cfg);
    Aggregation { mean, mask, uncertainty }
}
