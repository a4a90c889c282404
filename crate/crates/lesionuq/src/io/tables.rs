//! CSV tables with fixed header rows. Floats are written in shortest
//! round-trip form; an undefined value is an empty field.

use std::path::Path;

use lesionuq_core::metrics::MetricsRecord;
use lesionuq_core::roi::RegionUncertainty;
use lesionuq_core::stats::CorrelationCell;
use lesionuq_core::{ClassLabel, ImageSummary};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub trait Table: Serialize + DeserializeOwned {
    const HEADER: &'static [&'static str];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub image_id: String,
    pub class: String,
    pub dice: f64,
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
    pub auroc: Option<f64>,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl Table for MetricsRow {
    const HEADER: &'static [&'static str] = &["image_id", "class", "dice", "tpr", "fpr", "auroc", "tp", "fp", "fn", "tn"];
}

impl MetricsRow {
    pub fn new(image_id: &str, class: ClassLabel, m: &MetricsRecord) -> Self {
        MetricsRow {
            image_id: image_id.to_owned(),
            class: class.as_str().to_owned(),
            dice: m.dice,
            tpr: m.tpr,
            fpr: m.fpr,
            auroc: m.auroc,
            tp: m.counts.tp,
            fp: m.counts.fp,
            fn_: m.counts.fn_,
            tn: m.counts.tn,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRow {
    pub image_id: String,
    pub class: String,
    pub x0: f64,
    pub x1: Option<f64>,
    pub x2: Option<f64>,
    pub lesion_pixels: usize,
    pub normalization: String,
}

impl Table for RegionRow {
    const HEADER: &'static [&'static str] =
        &["image_id", "class", "x0", "x1", "x2", "lesion_pixels", "normalization"];
}

impl RegionRow {
    pub fn new(image_id: &str, class: ClassLabel, r: &RegionUncertainty) -> Self {
        RegionRow {
            image_id: image_id.to_owned(),
            class: class.as_str().to_owned(),
            x0: r.x0_overall,
            x1: r.x1_lesion,
            x2: r.x2_nonlesion,
            lesion_pixels: r.lesion_pixels,
            normalization: r.normalization.as_str().to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub image_id: String,
    pub class: String,
    pub noise_mode: String,
    pub noise_level: f64,
}

impl Table for TruthRow {
    const HEADER: &'static [&'static str] = &["image_id", "class", "noise_mode", "noise_level"];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub class: String,
    pub predictor: String,
    pub rho: Option<f64>,
    pub p_value: Option<f64>,
    pub n: usize,
}

impl Table for CorrelationRow {
    const HEADER: &'static [&'static str] = &["class", "predictor", "rho", "p_value", "n"];
}

impl CorrelationRow {
    /// A failed cell keeps its row with empty `rho` and `p_value`.
    pub fn new(cell: &CorrelationCell, n_available: usize) -> Self {
        let (rho, p_value, n) = match &cell.result {
            Ok(r) => (Some(r.rho), Some(r.p_value), r.n),
            Err(_) => (None, None, n_available),
        };
        CorrelationRow {
            class: cell.class.as_str().to_owned(),
            predictor: cell.predictor.as_str().to_owned(),
            rho,
            p_value,
            n,
        }
    }
}

pub fn encode_table<T: Table>(rows: &[T]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(T::HEADER).expect("in-memory csv write");
    for row in rows {
        w.serialize(row).expect("in-memory csv write");
    }
    w.into_inner().expect("in-memory csv flush")
}

pub fn write_table<T: Table>(rows: &[T], path: &Path) -> Result<()> {
    super::write_file(path, &encode_table(rows))
}

pub fn decode_table<T: Table>(bytes: &[u8], path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().map_err(Error::csv(path))?;
    if !header.iter().eq(T::HEADER.iter().copied()) {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: format!("expected header `{}`", T::HEADER.join(",")),
        });
    }
    r.deserialize().collect::<Result<Vec<T>, _>>().map_err(Error::csv(path))
}

/// Reads a table produced by an earlier stage; `hint` names that stage.
pub fn read_table<T: Table>(path: &Path, hint: &'static str) -> Result<Vec<T>> {
    decode_table(&super::read_upstream(path, hint)?, path)
}

pub(crate) fn parse_class(class: &str, path: &Path, line: usize) -> Result<ClassLabel> {
    class.parse().map_err(|_| Error::UnknownClass { path: path.to_path_buf(), line, class: class.to_owned() })
}

/// Joins the two analysis tables row by row; both must list the same ids in
/// the same order.
pub fn join_summaries(metrics: &[MetricsRow], regions: &[RegionRow], path: &Path) -> Result<Vec<ImageSummary>> {
    if metrics.len() != regions.len() {
        return Err(Error::Inconsistent(format!(
            "metrics.csv has {} rows but region_uncertainty.csv has {}",
            metrics.len(),
            regions.len()
        )));
    }
    metrics
        .iter()
        .zip(regions)
        .enumerate()
        .map(|(i, (m, r))| {
            if m.image_id != r.image_id || m.class != r.class {
                return Err(Error::Inconsistent(format!(
                    "row {}: metrics.csv has {} ({}) but region_uncertainty.csv has {} ({})",
                    i + 2,
                    m.image_id,
                    m.class,
                    r.image_id,
                    r.class
                )));
            }
            Ok(ImageSummary { class: parse_class(&m.class, path, i + 2)?, x0: r.x0, x1: r.x1, x2: r.x2, dice: m.dice })
        })
        .collect()
}
