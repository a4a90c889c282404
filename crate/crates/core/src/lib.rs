//! Monte Carlo segmentation uncertainty, decomposed by clinical region and
//! used to predict segmentation quality.
//!
//! The pipeline, per image:
//!
//! 1. [`aggregate`] a stack of stochastic probability maps into a thresholded
//!    mask and a percentile-spread uncertainty map;
//! 2. [`roi::decompose`] the map into lesion, non-lesion and overall means
//!    using the ground-truth lesion mask;
//! 3. score the mask against ground truth with [`metrics`].
//!
//! Across images, [`regression`] fits linear models of Dice on the region
//! uncertainties and [`stats`] supplies Spearman correlations and bootstrap
//! intervals. [`simulate`] generates seeded stand-in data; [`render`] draws
//! heatmaps.
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod aggregate;
pub mod distance;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod regression;
pub mod render;
pub mod rng;
pub mod roi;
pub mod simulate;
pub mod stats;

pub use aggregate::{aggregate, AggregationConfig};
pub use error::{Error, Result};
pub use model::{BinaryMask, ClassLabel, ImageSummary, ProbStack, ScoreGrid, Shape, UncertaintyMap};
pub use roi::Normalization;
