//! On-disk formats: UQS1 stacks, binary PGM masks, PPM renders, the JSON-lines
//! manifest and the CSV tables exchanged between pipeline stages.

pub mod manifest;
pub mod netpbm;
pub mod stack;
pub mod tables;

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub use manifest::{read_manifest, write_manifest, ImageRecord, Manifest};
pub use netpbm::{read_mask, write_mask, write_ppm};
pub use stack::{read_stack, write_stack};

/// Writes `bytes` to `path`, creating parent directories.
pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(Error::io(parent))?;
    }
    fs::write(path, bytes).map_err(Error::io(path))
}

/// Like [`fs::read`], but reports a missing file as [`Error::MissingUpstream`].
pub(crate) fn read_upstream(path: &Path, hint: &'static str) -> Result<Vec<u8>> {
    match fs::read(path) {
        Ok(b) => Ok(b),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            Err(Error::MissingUpstream { path: path.to_path_buf(), hint })
        }
        Err(e) => Err(Error::io(path)(e)),
    }
}
