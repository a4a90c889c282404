use std::path::{Path, PathBuf};

use lesionuq_core::simulate::{simulate_image, SimulatorConfig};

use super::{par_map, Layout, MASKS_DIR, STACKS_DIR, TRUTH};
use crate::error::{Error, Result};
use crate::io::tables::{write_table, TruthRow};
use crate::io::{write_manifest, write_mask, write_stack, ImageRecord};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulateOutput {
    pub manifest: PathBuf,
    pub n_images: usize,
}

/// Writes `stacks/`, `masks/`, `manifest.jsonl` and `truth.csv` under `out`.
pub fn simulate(cfg: &SimulatorConfig, out: &Path, jobs: usize) -> Result<SimulateOutput> {
    cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
    let layout = Layout::new(out);
    let rows = par_map(jobs, cfg.n_images(), |index| -> Result<(ImageRecord, TruthRow)> {
        let img = simulate_image(cfg, index);
        let stack = format!("{STACKS_DIR}/{}.uqs", img.id);
        let gt = format!("{MASKS_DIR}/{}.pgm", img.id);
        write_stack(&img.stack, &layout.file(&stack))?;
        write_mask(&img.gt, &layout.file(&gt))?;
        let truth = TruthRow {
            image_id: img.id.clone(),
            class: img.class.as_str().to_owned(),
            noise_mode: cfg.noise_mode.as_str().to_owned(),
            noise_level: img.injected_noise_level,
        };
        Ok((ImageRecord { id: img.id, class: img.class, stack, gt }, truth))
    })?;
    let (records, truth): (Vec<_>, Vec<_>) = rows.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
    let manifest = layout.manifest();
    write_manifest(&records, &manifest)?;
    write_table(&truth, &layout.file(TRUTH))?;
    log::info!("simulated {} images into {}", records.len(), out.display());
    Ok(SimulateOutput { manifest, n_images: records.len() })
}
