//! Optional JSON configuration file. Every key is optional; command-line
//! flags take precedence over the file, and the file over built-in defaults.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "jobs": 4,
//!   "out": "runs/a",
//!   "threshold": 0.95,
//!   "normalization": "region",
//!   "n": 200,
//!   "noise_mode": "mixed",
//!   "n_sims": 5000,
//!   "scale": "auto"
//! }
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub manifest: Option<PathBuf>,

    pub threshold: Option<f64>,
    pub percentile_high: Option<f64>,
    pub percentile_low: Option<f64>,
    pub normalization: Option<String>,
    pub save_maps: Option<bool>,

    pub n: Option<usize>,
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub alpha: Option<usize>,
    pub noise_mode: Option<String>,
    pub noise_grid: Option<Vec<f64>>,
    pub class_noise_multipliers: Option<[f64; 3]>,
    pub boundary_width: Option<f64>,
    pub sharpness: Option<f64>,

    pub fit_fraction: Option<f64>,

    pub n_sims: Option<usize>,
    pub level: Option<f64>,
    pub bootstrap_method: Option<String>,
    pub statistics: Option<Vec<String>>,

    pub scale: Option<String>,
    pub panels: Option<Vec<String>>,
    pub upscale: Option<usize>,
    pub per_class: Option<usize>,
    pub ids: Option<Vec<String>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Parses a string-valued key with the type's `FromStr`.
pub(crate) fn parse_key<T>(key: &str, value: Option<&String>) -> Result<Option<T>>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    value
        .map(|s| s.parse().map_err(|e| Error::Config(format!("config key `{key}`: {s:?}: {e}"))))
        .transpose()
}

pub(crate) fn parse_list<T>(key: &str, values: Option<&Vec<String>>) -> Result<Option<Vec<T>>>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    values
        .map(|vs| vs.iter().map(|s| parse_key(key, Some(s)).map(Option::unwrap)).collect())
        .transpose()
}
