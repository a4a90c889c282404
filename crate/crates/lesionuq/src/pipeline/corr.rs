use std::path::Path;

use lesionuq_core::stats::{bootstrap_ci, correlate_suite, BootstrapConfig, BootstrapMethod, Statistic};
use lesionuq_core::ClassLabel;
use serde::{Deserialize, Serialize};

use super::{load_summaries, par_map, write_json, Layout, Summaries, BOOTSTRAP, CORRELATIONS};
use crate::error::{Error, Result};
use crate::io::tables::{write_table, CorrelationRow};

/// Per-image columns that get bootstrap intervals.
pub const METRIC_COLUMNS: [&str; 5] = ["dice", "tpr", "fpr", "auroc", "x0"];

#[derive(Debug, Clone, PartialEq)]
pub struct CorrOptions {
    pub statistics: Vec<Statistic>,
    pub n_sims: usize,
    pub level: f64,
    pub method: BootstrapMethod,
    pub seed: u64,
}

impl Default for CorrOptions {
    fn default() -> Self {
        let base = BootstrapConfig::new(Statistic::Median, 0);
        CorrOptions {
            statistics: vec![Statistic::Median, Statistic::Mean],
            n_sims: base.n_sims,
            level: base.level,
            method: base.method,
            seed: base.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalRecord {
    pub statistic: String,
    pub metric: String,
    /// `all` or a class name.
    pub group: String,
    /// Images with the metric defined.
    pub n: usize,
    pub point: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub error: Option<String>,
}

/// Contents of `bootstrap.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapFile {
    pub method: String,
    pub n_sims: usize,
    pub level: f64,
    pub seed: u64,
    pub intervals: Vec<IntervalRecord>,
}

impl BootstrapFile {
    pub fn find(&self, statistic: Statistic, metric: &str, group: &str) -> Option<&IntervalRecord> {
        self.intervals
            .iter()
            .find(|r| r.statistic == statistic.as_str() && r.metric == metric && r.group == group)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrOutput {
    pub correlations: Vec<CorrelationRow>,
    pub bootstrap: BootstrapFile,
}

pub(crate) fn metric_column(s: &Summaries, metric: &str, group: Option<ClassLabel>) -> Vec<f64> {
    s.metrics
        .iter()
        .zip(&s.regions)
        .zip(&s.rows)
        .filter(|(_, row)| group.map_or(true, |c| row.class == c))
        .filter_map(|((m, r), _)| match metric {
            "dice" => Some(m.dice),
            "tpr" => m.tpr,
            "fpr" => m.fpr,
            "auroc" => m.auroc,
            "x0" => Some(r.x0),
            _ => unreachable!("unknown metric column {metric}"),
        })
        .collect()
}

pub(crate) fn groups() -> impl Iterator<Item = (&'static str, Option<ClassLabel>)> {
    std::iter::once(("all", None)).chain(ClassLabel::ALL.into_iter().map(|c| (c.as_str(), Some(c))))
}

/// Writes `correlations.csv` and `bootstrap.json`.
pub fn corr(out: &Path, opts: &CorrOptions, jobs: usize) -> Result<CorrOutput> {
    if opts.n_sims < 100 {
        return Err(Error::Config(format!("bootstrap needs at least 100 simulations, got {}", opts.n_sims)));
    }
    if !(opts.level > 0.0 && opts.level < 1.0) {
        return Err(Error::Config(format!("confidence level must lie in (0, 1), got {}", opts.level)));
    }
    let s = load_summaries(out)?;
    let correlations: Vec<CorrelationRow> = correlate_suite(&s.rows)
        .iter()
        .map(|cell| {
            let available = s
                .rows
                .iter()
                .filter(|r| r.class == cell.class && cell.predictor.region_value(r).is_some())
                .count();
            if let Err(e) = &cell.result {
                log::warn!("{} {}: {e}", cell.class, cell.predictor);
            }
            CorrelationRow::new(cell, available)
        })
        .collect();

    let mut cells = Vec::new();
    for &statistic in &opts.statistics {
        for metric in METRIC_COLUMNS {
            for (name, group) in groups() {
                cells.push((statistic, metric, name, group));
            }
        }
    }
    let intervals = par_map(jobs, cells.len(), |i| {
        let (statistic, metric, name, group) = cells[i];
        let sample = metric_column(&s, metric, group);
        let cfg = BootstrapConfig { statistic, n_sims: opts.n_sims, seed: opts.seed, level: opts.level, method: opts.method };
        let mut rec = IntervalRecord {
            statistic: statistic.as_str().to_owned(),
            metric: metric.to_owned(),
            group: name.to_owned(),
            n: sample.len(),
            point: None,
            lower: None,
            upper: None,
            error: None,
        };
        match bootstrap_ci(&sample, &cfg) {
            Ok(ci) => {
                rec.point = Some(ci.point);
                rec.lower = Some(ci.lower);
                rec.upper = Some(ci.upper);
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
        rec
    })?;
    let bootstrap = BootstrapFile {
        method: opts.method.as_str().to_owned(),
        n_sims: opts.n_sims,
        level: opts.level,
        seed: opts.seed,
        intervals,
    };
    let layout = Layout::new(out);
    write_table(&correlations, &layout.file(CORRELATIONS))?;
    write_json(&bootstrap, &layout.file(BOOTSTRAP))?;
    Ok(CorrOutput { correlations, bootstrap })
}
