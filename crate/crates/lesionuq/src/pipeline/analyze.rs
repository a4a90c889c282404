use std::path::Path;

use lesionuq_core::aggregate::Aggregation;
use lesionuq_core::metrics::MetricsRecord;
use lesionuq_core::roi::{decompose, RegionUncertainty};
use lesionuq_core::{aggregate, AggregationConfig, BinaryMask, Normalization, ProbStack};

use super::{par_map, Layout, MAPS_DIR, METRICS, REGIONS};
use crate::error::{Error, Result};
use crate::io::stack::write_map;
use crate::io::tables::{write_table, MetricsRow, RegionRow};
use crate::io::{read_manifest, read_mask, read_stack};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AnalyzeOptions {
    pub aggregation: AggregationConfig,
    pub normalization: Normalization,
    /// Also write each uncertainty map to `maps/<id>.uqs`.
    pub save_maps: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageAnalysis {
    pub aggregation: Aggregation,
    pub metrics: MetricsRecord,
    pub regions: RegionUncertainty,
}

/// Aggregates one stack and scores it against its ground-truth mask.
pub fn analyze_image(
    stack: &ProbStack,
    gt: &BinaryMask,
    opts: &AnalyzeOptions,
) -> lesionuq_core::Result<ImageAnalysis> {
    stack.shape().ensure_same(gt.shape())?;
    let aggregation = aggregate(stack, &opts.aggregation);
    let metrics = MetricsRecord::evaluate(&aggregation.mask, gt, &aggregation.mean)?;
    let regions = decompose(&aggregation.uncertainty, gt, opts.normalization)?;
    Ok(ImageAnalysis { aggregation, metrics, regions })
}

#[derive(Debug)]
pub struct AnalyzeOutput {
    pub rows: usize,
    /// Images that could not be analysed, in manifest order.
    pub failures: Vec<(String, Error)>,
}

/// Writes `metrics.csv` and `region_uncertainty.csv` with one row per
/// successfully analysed image. Per-image failures are logged and returned.
pub fn analyze(manifest: &Path, out: &Path, opts: &AnalyzeOptions, jobs: usize) -> Result<AnalyzeOutput> {
    let manifest = read_manifest(manifest)?;
    let layout = Layout::new(out);
    let results = par_map(jobs, manifest.len(), |i| -> Result<(MetricsRow, RegionRow)> {
        let record = &manifest.records[i];
        let stack = read_stack(&manifest.stack_path(record))?;
        let gt = read_mask(&manifest.gt_path(record))?;
        let a = analyze_image(&stack, &gt, opts).map_err(Error::analysis(&record.id))?;
        if opts.save_maps {
            write_map(&a.aggregation.uncertainty, &layout.file(&format!("{MAPS_DIR}/{}.uqs", record.id)))?;
        }
        Ok((MetricsRow::new(&record.id, record.class, &a.metrics), RegionRow::new(&record.id, record.class, &a.regions)))
    })?;
    let mut metrics = Vec::with_capacity(results.len());
    let mut regions = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (record, result) in manifest.records.iter().zip(results) {
        match result {
            Ok((m, r)) => {
                metrics.push(m);
                regions.push(r);
            }
            Err(e) => {
                log::error!("{}: {e}", record.id);
                failures.push((record.id.clone(), e));
            }
        }
    }
    write_table(&metrics, &layout.file(METRICS))?;
    write_table(&regions, &layout.file(REGIONS))?;
    if !failures.is_empty() {
        log::error!("{} of {} images failed", failures.len(), manifest.len());
    }
    Ok(AnalyzeOutput { rows: metrics.len(), failures })
}
