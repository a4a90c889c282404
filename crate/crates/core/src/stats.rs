//! Rank statistics and resampling.
//!
//! * Spearman's rho as the Pearson correlation of midranks, with a two-sided
//!   p-value from the Student-t approximation (and an exact permutation
//!   p-value for small samples).
//! * Empirical (basic) bootstrap confidence intervals with a fixed seed
//!   schedule, see [`crate::rng`].

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng as _;

use crate::aggregate::{percentile_sorted, sort_f64};
use crate::error::{Error, Result};
use crate::model::{ClassLabel, ImageSummary};
use crate::regression::Predictor;
use crate::rng::stream_rng;

/// Median with the mean of the two middle values for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    sort_f64(&mut v);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[mid] } else { (v[mid - 1] + v[mid]) / 2.0 })
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = alloc::vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Ranks start+1 ..= end, averaged.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpearmanResult {
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 4 {
        return Err(Error::TooFewSamples { needed: 4, available: x.len() });
    }
    let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
    if constant(x) || constant(y) {
        return Err(Error::ConstantInput);
    }
    Ok(())
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<SpearmanResult> {
    check_pair(x, y)?;
    let rho = pearson(&midranks(x), &midranks(y));
    let n = x.len();
    Ok(SpearmanResult { rho, p_value: t_test_p_value(rho, n), n })
}

/// Two-sided p-value of `rho` under `t = rho * sqrt((n - 2) / (1 - rho^2))`
/// with `n - 2` degrees of freedom.
pub fn t_test_p_value(rho: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    let r2 = rho * rho;
    if r2 >= 1.0 {
        return 0.0;
    }
    let t2 = r2 * df / (1.0 - r2);
    // P(|T| >= t) = I_{df / (df + t^2)}(df / 2, 1 / 2)
    regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t2)).clamp(0.0, 1.0)
}

/// Regularized incomplete beta function `I_x(a, b)` by Lentz's continued fraction.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b)
        + a * libm::log(x)
        + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=500 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Largest sample accepted by [`spearman_exact_p`]; 12! orderings.
pub const EXACT_PERMUTATION_MAX_N: usize = 12;

/// Two-sided exact permutation p-value for Spearman's rho: the fraction of
/// all `n!` pairings of the y-ranks with the x-ranks whose |rho| is at least
/// the observed one.
pub fn spearman_exact_p(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len();
    if n > EXACT_PERMUTATION_MAX_N {
        return Err(Error::InvalidConfig("exact permutation test supports at most 12 samples"));
    }
    // Doubled, centred midranks are integers, so the statistic is exact.
    let centred = |v: &[f64]| -> Vec<i64> {
        midranks(v).iter().map(|r| (2.0 * r) as i64 - (n as i64 + 1)).collect()
    };
    let cx = centred(x);
    let mut cy = centred(y);
    let dot = |a: &[i64], b: &[i64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<i64>();
    let observed = dot(&cx, &cy).abs();

    // Heap's algorithm; each swap changes two terms of the dot product.
    let mut s = dot(&cx, &cy);
    let mut hits: u64 = u64::from(s.abs() >= observed);
    let mut total: u64 = 1;
    let mut counters = alloc::vec![0usize; n];
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            let j = if i % 2 == 0 { 0 } else { counters[i] };
            s += (cx[j] - cx[i]) * (cy[i] - cy[j]);
            cy.swap(i, j);
            total += 1;
            if s.abs() >= observed {
                hits += 1;
            }
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(hits as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Median,
    Mean,
}

impl Statistic {
    pub fn as_str(self) -> &'static str {
        match self {
            Statistic::Median => "median",
            Statistic::Mean => "mean",
        }
    }

    /// Panics on an empty sample.
    pub fn evaluate(self, sample: &[f64]) -> f64 {
        match self {
            Statistic::Median => median(sample),
            Statistic::Mean => mean(sample),
        }
        .expect("statistic of an empty sample")
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Statistic {
    type Err = &'static str;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        match s {
            "median" => Ok(Statistic::Median),
            "mean" => Ok(Statistic::Mean),
            _ => Err("expected `median` or `mean`"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BootstrapMethod {
    /// `[2θ - q_hi, 2θ - q_lo]` of the resampled statistic.
    #[default]
    Basic,
    /// `[q_lo, q_hi]` of the resampled statistic.
    Percentile,
}

impl BootstrapMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            BootstrapMethod::Basic => "basic",
            BootstrapMethod::Percentile => "percentile",
        }
    }
}

impl FromStr for BootstrapMethod {
    type Err = &'static str;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        match s {
            "basic" => Ok(BootstrapMethod::Basic),
            "percentile" => Ok(BootstrapMethod::Percentile),
            _ => Err("expected `basic` or `percentile`"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub statistic: Statistic,
    pub n_sims: usize,
    pub seed: u64,
    pub level: f64,
    pub method: BootstrapMethod,
}

impl BootstrapConfig {
    pub fn new(statistic: Statistic, seed: u64) -> Self {
        BootstrapConfig {
            statistic,
            n_sims: 5000,
            seed,
            level: 0.95,
            method: BootstrapMethod::Basic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapCi {
    /// The statistic on the original sample.
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub config: BootstrapConfig,
}

/// Statistic of resample `sim`; depends only on `(seed, sim)`.
pub fn bootstrap_replicate(sample: &[f64], statistic: Statistic, seed: u64, sim: u64, buf: &mut Vec<f64>) -> f64 {
    let mut rng = stream_rng(seed, sim);
    buf.clear();
    buf.extend((0..sample.len()).map(|_| sample[rng.random_range(0..sample.len())]));
    statistic.evaluate(buf)
}

pub fn bootstrap_ci(sample: &[f64], cfg: &BootstrapConfig) -> Result<BootstrapCi> {
    if sample.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, available: sample.len() });
    }
    if cfg.n_sims < 100 {
        return Err(Error::InvalidConfig("bootstrap needs at least 100 simulations"));
    }
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(Error::InvalidConfig("confidence level must lie in (0, 1)"));
    }
    let point = cfg.statistic.evaluate(sample);
    let mut buf = Vec::with_capacity(sample.len());
    let mut reps: Vec<f64> = (0..cfg.n_sims as u64)
        .map(|sim| bootstrap_replicate(sample, cfg.statistic, cfg.seed, sim, &mut buf))
        .collect();
    sort_f64(&mut reps);
    let tail = (1.0 - cfg.level) / 2.0 * 100.0;
    let q_lo = percentile_sorted(&reps, tail);
    let q_hi = percentile_sorted(&reps, 100.0 - tail);
    let (lower, upper) = match cfg.method {
        BootstrapMethod::Basic => (2.0 * point - q_hi, 2.0 * point - q_lo),
        BootstrapMethod::Percentile => (q_lo, q_hi),
    };
    Ok(BootstrapCi { point, lower, upper, config: *cfg })
}

/// Spearman correlation of one region uncertainty with Dice within one class.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCell {
    pub class: ClassLabel,
    pub predictor: Predictor,
    pub result: Result<SpearmanResult>,
}

/// Region uncertainties correlated with Dice, per class and predictor
/// (`X0`, `X1`, `X2`). Rows with an undefined region are dropped per cell;
/// classes without rows are skipped.
pub fn correlate_suite(rows: &[ImageSummary]) -> Vec<CorrelationCell> {
    let mut cells = Vec::new();
    for class in ClassLabel::ALL {
        let in_class: Vec<&ImageSummary> = rows.iter().filter(|r| r.class == class).collect();
        if in_class.is_empty() {
            continue;
        }
        for predictor in [Predictor::X0, Predictor::X1, Predictor::X2] {
            let (xs, ys): (Vec<f64>, Vec<f64>) = in_class
                .iter()
                .filter_map(|r| predictor.region_value(r).map(|x| (x, r.dice)))
                .unzip();
            cells.push(CorrelationCell { class, predictor, result: spearman(&xs, &ys) });
        }
    }
    cells
}
