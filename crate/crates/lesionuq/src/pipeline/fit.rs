use std::fmt::Write as _;
use std::path::Path;

use lesionuq_core::regression::{fit_model_suite, pooled_spec, ModelSpec, ModelSuite, Predictor, RegressionFit};
use lesionuq_core::rng::seeded_subset;
use lesionuq_core::stats::{correlate_suite, CorrelationCell};
use lesionuq_core::{ClassLabel, ImageSummary};
use serde::{Deserialize, Serialize};

use super::{write_json, Layout, FITS, METRICS, REGIONS};
use crate::error::{Error, Result};
use crate::io::tables::{join_summaries, read_table, MetricsRow, RegionRow};

/// The joined analysis tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Summaries {
    pub metrics: Vec<MetricsRow>,
    pub regions: Vec<RegionRow>,
    pub rows: Vec<ImageSummary>,
}

impl Summaries {
    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.metrics.iter().map(|m| m.image_id.as_str())
    }
}

pub fn load_summaries(out: &Path) -> Result<Summaries> {
    let layout = Layout::new(out);
    let metrics: Vec<MetricsRow> = read_table(&layout.file(METRICS), "analyze")?;
    let regions_path = layout.file(REGIONS);
    let regions: Vec<RegionRow> = read_table(&regions_path, "analyze")?;
    let rows = join_summaries(&metrics, &regions, &regions_path)?;
    Ok(Summaries { metrics, regions, rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Share of rows, drawn without replacement, that the models see.
    pub fit_fraction: f64,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { fit_fraction: 1.0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub value: f64,
}

/// Difference between two class effects, `left - right`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contrast {
    pub left: String,
    pub right: String,
    pub value: f64,
}

/// One fitted model, or the reason it could not be fitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    /// `None` for the pooled model.
    pub class: Option<String>,
    pub model: String,
    pub spec: String,
    pub intercept: Option<f64>,
    pub coefficients: Vec<Coefficient>,
    pub rmse: Option<f64>,
    pub n_used: Option<usize>,
    pub n_dropped: Option<usize>,
    pub rank_deficient: Option<bool>,
    pub contrasts: Vec<Contrast>,
    pub error: Option<String>,
}

impl FitRecord {
    fn new(class: Option<ClassLabel>, model: &str, spec: &ModelSpec, result: &lesionuq_core::Result<RegressionFit>) -> Self {
        let mut rec = FitRecord {
            class: class.map(|c| c.as_str().to_owned()),
            model: model.to_owned(),
            spec: spec.to_string(),
            intercept: None,
            coefficients: Vec::new(),
            rmse: None,
            n_used: None,
            n_dropped: None,
            rank_deficient: None,
            contrasts: Vec::new(),
            error: None,
        };
        match result {
            Ok(f) => {
                rec.intercept = f.intercept;
                rec.coefficients =
                    f.coefficients.iter().map(|&(p, value)| Coefficient { name: p.as_str().to_owned(), value }).collect();
                rec.rmse = Some(f.rmse);
                rec.n_used = Some(f.n_used);
                rec.n_dropped = Some(f.n_dropped);
                rec.rank_deficient = Some(f.rank_deficient);
                rec.contrasts = f
                    .class_contrasts()
                    .into_iter()
                    .map(|(a, b, value)| Contrast { left: a.as_str().to_owned(), right: b.as_str().to_owned(), value })
                    .collect();
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
        rec
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.coefficients.iter().find(|c| c.name == name).map(|c| c.value)
    }
}

/// Contents of `fits.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitsFile {
    pub fit_fraction: f64,
    pub seed: u64,
    pub n_rows: usize,
    /// Image ids the models were fitted on, in table order.
    pub rows_used: Vec<String>,
    pub fits: Vec<FitRecord>,
}

fn suite_records(suite: &ModelSuite) -> Vec<FitRecord> {
    let mut out = Vec::new();
    for cs in &suite.classes {
        for (model, result) in &cs.fits {
            out.push(FitRecord::new(Some(cs.class), model.as_str(), &model.spec(), result));
        }
    }
    out.push(FitRecord::new(None, "pooled_categorical", &pooled_spec(), &suite.pooled));
    out
}

/// Fits the per-class and pooled models and writes `fits.json`.
pub fn fit(out: &Path, opts: &FitOptions) -> Result<FitsFile> {
    if !(opts.fit_fraction > 0.0 && opts.fit_fraction <= 1.0) {
        return Err(Error::Config(format!("--fit-fraction must lie in (0, 1], got {}", opts.fit_fraction)));
    }
    let all = load_summaries(out)?;
    let n = all.rows.len();
    let indices: Vec<usize> = if opts.fit_fraction < 1.0 {
        let k = ((opts.fit_fraction * n as f64).round() as usize).max(1);
        seeded_subset(n, k, opts.seed)
    } else {
        (0..n).collect()
    };
    let rows: Vec<ImageSummary> = indices.iter().map(|&i| all.rows[i]).collect();
    let suite = fit_model_suite(&rows);
    let file = FitsFile {
        fit_fraction: opts.fit_fraction,
        seed: opts.seed,
        n_rows: n,
        rows_used: indices.iter().map(|&i| all.metrics[i].image_id.clone()).collect(),
        fits: suite_records(&suite),
    };
    for f in &file.fits {
        if let Some(e) = &f.error {
            log::warn!("{} {}: {e}", f.class.as_deref().unwrap_or("pooled"), f.model);
        }
    }
    write_json(&file, &Layout::new(out).file(FITS))?;
    Ok(file)
}

fn num(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |v| format!("{v:.4}"))
}

/// Plain-text coefficient table, one line per fit. With `correlations`, each
/// class line also gets Spearman rho of X0, X1 and X2 against Dice.
pub fn fit_table(fits: &FitsFile, correlations: Option<&[CorrelationCell]>) -> String {
    let mut s = String::new();
    let _ = write!(s, "{:<22} {:<18} {:>5} {:>9} {:<56} {:>8}", "class", "model", "n", "intercept", "coefficients", "rmse");
    if correlations.is_some() {
        let _ = write!(s, " {:>8} {:>8} {:>8}", "rho_X0", "rho_X1", "rho_X2");
    }
    s.push('\n');
    for f in &fits.fits {
        let coefs = if let Some(e) = &f.error {
            e.clone()
        } else {
            f.coefficients.iter().map(|c| format!("{}={:.4}", c.name, c.value)).collect::<Vec<_>>().join(" ")
        };
        let n = f.n_used.map_or_else(|| "-".to_owned(), |n| n.to_string());
        let _ = write!(
            s,
            "{:<22} {:<18} {:>5} {:>9} {:<56} {:>8}",
            f.class.as_deref().unwrap_or("pooled"),
            f.model,
            n,
            num(f.intercept),
            coefs,
            num(f.rmse)
        );
        if let Some(cells) = correlations {
            for p in [Predictor::X0, Predictor::X1, Predictor::X2] {
                let rho = cells
                    .iter()
                    .find(|c| Some(c.class.as_str()) == f.class.as_deref() && c.predictor == p)
                    .and_then(|c| c.result.as_ref().ok())
                    .map(|r| r.rho);
                let _ = write!(s, " {:>8}", num(rho));
            }
        }
        s.push('\n');
    }
    s
}

/// Correlations over the rows the models were fitted on.
pub(crate) fn fitted_correlations(out: &Path, fits: &FitsFile) -> Result<Vec<CorrelationCell>> {
    let all = load_summaries(out)?;
    let used: std::collections::HashSet<&str> = fits.rows_used.iter().map(String::as_str).collect();
    let rows: Vec<ImageSummary> =
        all.rows.iter().zip(all.ids()).filter(|(_, id)| used.contains(id)).map(|(r, _)| *r).collect();
    Ok(correlate_suite(&rows))
}
