//! The staged pipeline. Each stage reads the previous stage's files from the
//! output directory and writes its own; per-image work runs on a pool of
//! `jobs` threads and results are written in manifest order.

mod analyze;
mod corr;
mod fit;
mod render;
mod report;
mod simulate;

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};

pub use analyze::{analyze, analyze_image, AnalyzeOptions, AnalyzeOutput, ImageAnalysis};
pub use corr::{corr, BootstrapFile, CorrOptions, CorrOutput, IntervalRecord, METRIC_COLUMNS};
pub(crate) use fit::fitted_correlations;
pub use fit::{fit, fit_table, load_summaries, Coefficient, Contrast, FitOptions, FitRecord, FitsFile, Summaries};
pub use render::{render, RenderOptions, Selection};
pub use report::{report, uncertainty_summary, UncertaintySummary};
pub use simulate::{simulate, SimulateOutput};

pub const MANIFEST: &str = "manifest.jsonl";
pub const TRUTH: &str = "truth.csv";
pub const METRICS: &str = "metrics.csv";
pub const REGIONS: &str = "region_uncertainty.csv";
pub const FITS: &str = "fits.json";
pub const CORRELATIONS: &str = "correlations.csv";
pub const BOOTSTRAP: &str = "bootstrap.json";
pub const REPORT: &str = "report.md";
pub const STACKS_DIR: &str = "stacks";
pub const MASKS_DIR: &str = "masks";
pub const MAPS_DIR: &str = "maps";
pub const PANELS_DIR: &str = "panels";

/// Paths of every artifact under one output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Layout { root: root.into() }
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn manifest(&self) -> PathBuf {
        self.file(MANIFEST)
    }
}

/// `f(0..n)` on a pool of `jobs` threads, collected in index order.
pub(crate) fn par_map<R: Send>(jobs: usize, n: usize, f: impl Fn(usize) -> R + Sync + Send) -> Result<Vec<R>> {
    if jobs == 0 {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(f).collect()))
}

/// Serializes `value` as pretty JSON with a trailing newline.
pub(crate) fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(Error::json(path))?;
    bytes.push(b'\n');
    crate::io::write_file(path, &bytes)
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path, hint: &'static str) -> Result<T> {
    let bytes = crate::io::read_upstream(path, hint)?;
    serde_json::from_slice(&bytes).map_err(Error::json(path))
}
