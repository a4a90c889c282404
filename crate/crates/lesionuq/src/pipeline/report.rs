use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lesionuq_core::stats::{median, Statistic};

use super::corr::{groups, metric_column};
use super::{load_summaries, read_json, BootstrapFile, FitsFile, Layout, BOOTSTRAP, CORRELATIONS, FITS, PANELS_DIR, REPORT};
use crate::error::{Error, Result};
use crate::io::tables::{read_table, CorrelationRow};

/// Maximum, minimum, mean and sample standard deviation of one column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintySummary {
    pub n: usize,
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    /// `None` below two values.
    pub std_dev: Option<f64>,
}

pub fn uncertainty_summary(values: &[f64]) -> Option<UncertaintySummary> {
    if values.is_empty() {
        return None;
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std_dev = (n > 1).then(|| {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1) as f64).sqrt()
    });
    Some(UncertaintySummary {
        n,
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        mean,
        std_dev,
    })
}

fn f4(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_owned(), |v| format!("{v:.4}"))
}

fn f6(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_owned(), |v| format!("{v:.6}"))
}

fn p_value(v: Option<f64>) -> String {
    match v {
        Some(p) if p < 1e-4 => format!("{p:.2e}"),
        other => f4(other),
    }
}

fn composites(out: &Path) -> Result<Vec<PathBuf>> {
    let dir = out.join(PANELS_DIR);
    let entries = match std::fs::read_dir(&dir) {
        Ok(entries) => entries,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(&dir)(e)),
    };
    let mut found = Vec::new();
    for entry in entries {
        let name = entry.map_err(Error::io(&dir))?.file_name();
        if name.to_string_lossy().ends_with("_composite.ppm") {
            found.push(PathBuf::from(PANELS_DIR).join(name));
        }
    }
    found.sort();
    Ok(found)
}

/// Writes `report.md` from every upstream artifact and returns its path.
pub fn report(out: &Path) -> Result<PathBuf> {
    let layout = Layout::new(out);
    let s = load_summaries(out)?;
    let fits: FitsFile = read_json(&layout.file(FITS), "fit")?;
    let correlations: Vec<CorrelationRow> = read_table(&layout.file(CORRELATIONS), "corr")?;
    let bootstrap: BootstrapFile = read_json(&layout.file(BOOTSTRAP), "corr")?;

    let mut md = String::new();
    let _ = writeln!(md, "# Segmentation uncertainty report\n");
    let counts: Vec<String> = groups()
        .skip(1)
        .map(|(name, class)| format!("{name} {}", s.rows.iter().filter(|r| Some(r.class) == class).count()))
        .collect();
    let normalization = s.regions.first().map_or("n/a", |r| r.normalization.as_str());
    let _ = writeln!(
        md,
        "Images analysed: {} ({}). Region normalization: {normalization}.\n",
        s.rows.len(),
        counts.join(", ")
    );

    let _ = writeln!(md, "## Segmentation metrics\n");
    let _ = writeln!(
        md,
        "Median per image, with the {:.0}% {} bootstrap interval ({} resamples, seed {}).\n",
        bootstrap.level * 100.0,
        bootstrap.method,
        bootstrap.n_sims,
        bootstrap.seed
    );
    let _ = writeln!(md, "| Group | n | Dice | TPR | FPR | AUROC |");
    let _ = writeln!(md, "|---|---:|---|---|---|---|");
    for (name, class) in groups() {
        let n = s.rows.iter().filter(|r| class.is_none() || Some(r.class) == class).count();
        if n == 0 {
            continue;
        }
        let cells: Vec<String> = ["dice", "tpr", "fpr", "auroc"]
            .iter()
            .map(|metric| {
                let m = median(&metric_column(&s, metric, class));
                match bootstrap.find(Statistic::Median, metric, name) {
                    Some(ci) if ci.error.is_none() => format!("{} [{}, {}]", f4(m), f4(ci.lower), f4(ci.upper)),
                    _ => f4(m),
                }
            })
            .collect();
        let _ = writeln!(md, "| {name} | {n} | {} |", cells.join(" | "));
    }

    let _ = writeln!(md, "\n## Uncertainty summary\n");
    let _ = writeln!(md, "Mean uncertainty over the whole image (`x0`), across images.\n");
    let _ = writeln!(md, "| Group | n | Maximum | Minimum | Mean | Std. dev. |");
    let _ = writeln!(md, "|---|---:|---:|---:|---:|---:|");
    for (name, class) in groups() {
        if let Some(u) = uncertainty_summary(&metric_column(&s, "x0", class)) {
            let _ = writeln!(
                md,
                "| {name} | {} | {} | {} | {} | {} |",
                u.n,
                f6(Some(u.max)),
                f6(Some(u.min)),
                f6(Some(u.mean)),
                f6(u.std_dev)
            );
        }
    }

    let _ = writeln!(md, "\n## Regression fits\n");
    let _ = writeln!(
        md,
        "Dice regressed on region uncertainty; {} of {} images used.\n",
        fits.rows_used.len(),
        fits.n_rows
    );
    let _ = writeln!(md, "| Class | Model | Spec | n | Intercept | Coefficients | RMSE |");
    let _ = writeln!(md, "|---|---|---|---:|---:|---|---:|");
    for f in &fits.fits {
        let coefs = match &f.error {
            Some(e) => e.clone(),
            None => f.coefficients.iter().map(|c| format!("{} {:.4}", c.name, c.value)).collect::<Vec<_>>().join(", "),
        };
        let rank = if f.rank_deficient == Some(true) { " (rank deficient)" } else { "" };
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} | {} | {coefs}{rank} | {} |",
            f.class.as_deref().unwrap_or("pooled"),
            f.model,
            f.spec,
            f.n_used.map_or_else(|| "n/a".to_owned(), |n| n.to_string()),
            f4(f.intercept),
            f4(f.rmse)
        );
    }

    let _ = writeln!(md, "\n## Spearman correlations with Dice\n");
    let _ = writeln!(md, "| Class | Predictor | rho | p-value | n |");
    let _ = writeln!(md, "|---|---|---:|---:|---:|");
    for c in &correlations {
        let _ = writeln!(md, "| {} | {} | {} | {} | {} |", c.class, c.predictor, f4(c.rho), p_value(c.p_value), c.n);
    }

    let panels = composites(out)?;
    if !panels.is_empty() {
        let _ = writeln!(md, "\n## Panels\n");
        for p in panels {
            let link = p.to_string_lossy().replace('\\', "/");
            let stem = p.file_name().unwrap_or_default().to_string_lossy().trim_end_matches("_composite.ppm").to_owned();
            let _ = writeln!(md, "- [{stem}]({link})");
        }
    }

    let path = layout.file(REPORT);
    crate::io::write_file(&path, md.as_bytes())?;
    Ok(path)
}
