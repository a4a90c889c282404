use std::collections::HashMap;
use std::path::{Path, PathBuf};

use lesionuq_core::render::{panel_file_stem, render_heatmap, render_mask, render_panel, Panel, PanelInputs, RenderConfig, Scale};
use lesionuq_core::roi::masked_uncertainty;
use lesionuq_core::{aggregate, AggregationConfig, ClassLabel};

use super::{par_map, Layout, PANELS_DIR};
use crate::error::{Error, Result};
use crate::io::{read_manifest, read_mask, read_stack, write_ppm, ImageRecord};

/// Which manifest images to draw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    All,
    /// The first `n` images of each class, in manifest order.
    PerClass(usize),
    Ids(Vec<String>),
}

impl Default for Selection {
    fn default() -> Self {
        Selection::PerClass(1)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RenderOptions {
    pub render: RenderConfig,
    pub aggregation: AggregationConfig,
    pub selection: Selection,
}

fn select<'a>(records: &'a [ImageRecord], selection: &Selection) -> Result<Vec<&'a ImageRecord>> {
    match selection {
        Selection::All => Ok(records.iter().collect()),
        Selection::PerClass(n) => {
            let mut taken: HashMap<ClassLabel, usize> = HashMap::new();
            Ok(records
                .iter()
                .filter(|r| {
                    let k = taken.entry(r.class).or_default();
                    *k += 1;
                    *k <= *n
                })
                .collect())
        }
        Selection::Ids(ids) => ids
            .iter()
            .map(|id| {
                records
                    .iter()
                    .find(|r| &r.id == id)
                    .ok_or_else(|| Error::Config(format!("image id {id:?} is not in the manifest")))
            })
            .collect(),
    }
}

/// Writes `panels/<id>_<panel>.ppm` for every requested panel and
/// `panels/<id>_composite.ppm`; returns the composite paths.
pub fn render(manifest: &Path, out: &Path, opts: &RenderOptions, jobs: usize) -> Result<Vec<PathBuf>> {
    opts.render.validate().map_err(|e| Error::Config(e.to_string()))?;
    let manifest = read_manifest(manifest)?;
    let selected = select(&manifest.records, &opts.selection)?;
    let layout = Layout::new(out);
    let results = par_map(jobs, selected.len(), |i| -> Result<PathBuf> {
        let record = selected[i];
        let stack = read_stack(&manifest.stack_path(record))?;
        let gt = read_mask(&manifest.gt_path(record))?;
        let context = || Error::analysis(&record.id);
        stack.shape().ensure_same(gt.shape()).map_err(context())?;
        let a = aggregate(&stack, &opts.aggregation);
        let lesion = masked_uncertainty(&a.uncertainty, &gt).map_err(context())?;
        let nonlesion = masked_uncertainty(&a.uncertainty, &gt.complement()).map_err(context())?;
        let inputs = PanelInputs {
            gt: Some(&gt),
            pred: Some(&a.mask),
            unc_overall: Some(&a.uncertainty),
            unc_lesion: Some(&lesion),
            unc_nonlesion: Some(&nonlesion),
        };
        let composite = render_panel(&inputs, &opts.render).map_err(context())?;
        if composite.degenerate_scale {
            log::warn!("{}: uncertainty map is all zero; heatmaps are uniform blue", record.id);
        }
        // Single panels use the composite's shared scale.
        let single = RenderConfig {
            scale: composite.scale_max.filter(|m| *m > 0.0).map_or(opts.render.scale, Scale::Fixed),
            panels: opts.render.panels.clone(),
            upscale: opts.render.upscale,
        };
        for &panel in &opts.render.panels {
            let image = match panel {
                Panel::Gt => render_mask(&gt, single.upscale),
                Panel::Pred => render_mask(&a.mask, single.upscale),
                Panel::UncOverall => render_heatmap(&a.uncertainty, &single).map_err(context())?.image,
                Panel::UncLesion => render_heatmap(&lesion, &single).map_err(context())?.image,
                Panel::UncNonLesion => render_heatmap(&nonlesion, &single).map_err(context())?.image,
            };
            let name = format!("{PANELS_DIR}/{}.ppm", panel_file_stem(&record.id, panel));
            write_ppm(&image, &layout.file(&name))?;
        }
        let path = layout.file(&format!("{PANELS_DIR}/{}_composite.ppm", record.id));
        write_ppm(&composite.image, &path)?;
        Ok(path)
    })?;
    results.into_iter().collect()
}
