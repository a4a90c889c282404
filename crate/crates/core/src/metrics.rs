//! Pixel confusion counts and the per-image performance metrics: Dice,
//! true/false positive rates and pixel-level AUROC.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{BinaryMask, ScoreGrid};
use crate::stats::{median, midranks};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

pub fn confusion(pred: &BinaryMask, gt: &BinaryMask) -> Result<ConfusionCounts> {
    gt.shape().ensure_same(pred.shape())?;
    let mut c = ConfusionCounts::default();
    for (&p, &g) in pred.bits().iter().zip(gt.bits()) {
        match (p, g) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// `2tp / (2tp + fp + fn)`, or 1 when both masks are empty.
pub fn dice(c: &ConfusionCounts) -> f64 {
    let denom = 2 * c.tp + c.fp + c.fn_;
    if denom == 0 {
        1.0
    } else {
        (2 * c.tp) as f64 / denom as f64
    }
}

/// `(tp / (tp + fn), fp / (fp + tn))`; a rate is `None` when its class is absent.
pub fn tpr_fpr(c: &ConfusionCounts) -> (Option<f64>, Option<f64>) {
    let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
    (ratio(c.tp, c.tp + c.fn_), ratio(c.fp, c.fp + c.tn))
}

/// Pixel-level AUROC of `scores` against `gt` from the Mann-Whitney U
/// statistic with midranks for ties. `None` when `gt` has a single class.
pub fn auroc(scores: &ScoreGrid, gt: &BinaryMask) -> Result<Option<f64>> {
    gt.shape().ensure_same(scores.shape())?;
    let n_pos = gt.count_ones();
    let n_neg = gt.bits().len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Ok(None);
    }
    let ranks = midranks(scores.values());
    let rank_sum: f64 = ranks.iter().zip(gt.bits()).filter(|(_, &g)| g).map(|(r, _)| r).sum();
    let (p, n) = (n_pos as f64, n_neg as f64);
    Ok(Some((rank_sum - p * (p + 1.0) / 2.0) / (p * n)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub dice: f64,
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
    pub auroc: Option<f64>,
    pub counts: ConfusionCounts,
}

impl MetricsRecord {
    pub fn evaluate(pred: &BinaryMask, gt: &BinaryMask, scores: &ScoreGrid) -> Result<Self> {
        let counts = confusion(pred, gt)?;
        let (tpr, fpr) = tpr_fpr(&counts);
        Ok(MetricsRecord { dice: dice(&counts), tpr, fpr, auroc: auroc(scores, gt)?, counts })
    }
}

/// Median of one metric plus how many records left it undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MedianSummary {
    pub median: Option<f64>,
    pub excluded: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsSummary {
    pub n: usize,
    pub dice: MedianSummary,
    pub tpr: MedianSummary,
    pub fpr: MedianSummary,
    pub auroc: MedianSummary,
}

fn median_of(records: &[MetricsRecord], get: impl Fn(&MetricsRecord) -> Option<f64>) -> MedianSummary {
    let defined: Vec<f64> = records.iter().filter_map(get).collect();
    MedianSummary { median: median(&defined), excluded: records.len() - defined.len() }
}

/// Per-metric medians over the defined values.
pub fn summarize(records: &[MetricsRecord]) -> Result<MetricsSummary> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(MetricsSummary {
        n: records.len(),
        dice: median_of(records, |r| Some(r.dice)),
        tpr: median_of(records, |r| r.tpr),
        fpr: median_of(records, |r| r.fpr),
        auroc: median_of(records, |r| r.auroc),
    })
}
