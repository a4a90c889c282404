//! Staged pipeline and file formats around [`lesionuq_core`].
//!
//! Stages communicate through files in one output directory:
//!
//! | stage      | reads                                  | writes                                          |
//! |------------|----------------------------------------|-------------------------------------------------|
//! | `simulate` |                                        | `stacks/`, `masks/`, `manifest.jsonl`, `truth.csv` |
//! | `analyze`  | manifest, stacks, masks                | `metrics.csv`, `region_uncertainty.csv`, `maps/` |
//! | `fit`      | analysis tables                        | `fits.json`                                     |
//! | `corr`     | analysis tables                        | `correlations.csv`, `bootstrap.json`            |
//! | `render`   | manifest, stacks, masks                | `panels/*.ppm`                                  |
//! | `report`   | all of the above                       | `report.md`                                     |

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;

pub use error::{Error, Result};
