//! Acceptance suite: one PASS/FAIL line per criterion, checked against
//! independent oracles (brute-force loops, set arithmetic, pair counting,
//! nalgebra least squares, exhaustive permutation).

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use lesionuq::io::stack::{decode_stack, encode_stack};
use lesionuq::pipeline::{self, AnalyzeOptions, CorrOptions, FitOptions, FitsFile, RenderOptions};
use lesionuq_core::aggregate::{mean_prediction, threshold_prediction, uncertainty_map};
use lesionuq_core::distance::signed_distance;
use lesionuq_core::metrics::{auroc, confusion, dice};
use lesionuq_core::regression::{fit, pooled_spec, ModelSpec, Predictor, SuiteModel};
use lesionuq_core::rng::{stream_rng, Rng};
use lesionuq_core::roi::{decompose, masked_uncertainty, region_sum};
use lesionuq_core::simulate::{generate_lesion_mask, simulate_stack, NoiseLevels, NoiseMode, SimulatorConfig};
use lesionuq_core::stats::{
    bootstrap_ci, correlate_suite, spearman, spearman_exact_p, BootstrapConfig, Statistic,
};
use lesionuq_core::{
    aggregate, AggregationConfig, BinaryMask, ClassLabel, ImageSummary, Normalization, ProbStack, ScoreGrid,
    UncertaintyMap,
};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let e = start.elapsed();
    if e <= limit {
        Ok(())
    } else {
        Err(format!("took {e:.2?}, limit {limit:?}"))
    }
}

// ---------------------------------------------------------------- oracles

fn oracle_percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let below = pos.floor();
    let i = below as usize;
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (pos - below) * (sorted[j] - sorted[i])
}

fn oracle_auroc(scores: &[f64], gt: &[bool]) -> Option<f64> {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate().filter(|(i, _)| gt[*i]) {
        let _ = i;
        for (_, &sj) in scores.iter().enumerate().filter(|(j, _)| !gt[*j]) {
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    (pairs > 0.0).then(|| wins / pairs)
}

/// Rank = 1 + #smaller + (#equal - 1) / 2.
fn oracle_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&a| {
            let smaller = v.iter().filter(|&&b| b < a).count() as f64;
            let equal = v.iter().filter(|&&b| b == a).count() as f64;
            1.0 + smaller + (equal - 1.0) / 2.0
        })
        .collect()
}

fn oracle_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

/// Lexicographic successor; false after the last permutation.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Share of all pairings whose rank cross-product is at least as far from
/// its null mean as the observed one.
fn oracle_exact_p(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (oracle_ranks(x), oracle_ranks(y));
    let n = x.len() as f64;
    let centre = n * ((n + 1.0) / 2.0) * ((n + 1.0) / 2.0);
    let stat = |perm: &[usize]| (rx.iter().zip(perm).map(|(a, &k)| a * ry[k]).sum::<f64>() - centre).abs();
    let mut perm: Vec<usize> = (0..x.len()).collect();
    let observed = stat(&perm);
    let (mut hits, mut total) = (0u64, 0u64);
    loop {
        total += 1;
        if stat(&perm) >= observed - 1e-9 {
            hits += 1;
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    hits as f64 / total as f64
}

fn nalgebra_ols(rows: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let a = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let b = DVector::from_column_slice(y);
    a.svd(true, true).solve(&b, 1e-12).unwrap().iter().copied().collect()
}

// -------------------------------------------------------------- criteria

fn random_stack(rng: &mut Rng, max: usize) -> ProbStack {
    let (w, h, a) = (rng.random_range(1..=max), rng.random_range(1..=max), rng.random_range(1..=max));
    let values = (0..w * h * a)
        .map(|_| match rng.random_range(0..4) {
            0 => 0.0,
            1 => rng.random_range(0..=8) as f32 / 8.0,
            _ => rng.random::<f32>(),
        })
        .collect();
    ProbStack::new(w, h, a, values).unwrap()
}

fn c1_aggregation() -> Outcome {
    let start = Instant::now();
    let cfg = AggregationConfig::default();
    let mut rng = stream_rng(101, 0);
    let mut pixels = 0;
    for case in 0..200 {
        let stack = random_stack(&mut rng, 8);
        let (n, a) = (stack.width() * stack.height(), stack.alpha());
        let mean = mean_prediction(&stack);
        let mask = threshold_prediction(&mean, &cfg);
        let unc = uncertainty_map(&stack, &cfg);
        for p in 0..n {
            let mut samples: Vec<f64> = (0..a).map(|j| f64::from(stack.values()[j * n + p])).collect();
            let m = samples.iter().sum::<f64>() / a as f64;
            ensure!(close(mean.values()[p], m, 1e-12), "case {case} pixel {p}: mean {} vs {m}", mean.values()[p]);
            if !close(m, cfg.threshold(), 1e-12) {
                ensure!(mask.bits()[p] == (m > cfg.threshold()), "case {case} pixel {p}: mask disagrees at mean {m}");
            }
            samples.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let spread = oracle_percentile(&samples, 67.0) - oracle_percentile(&samples, 33.0);
            ensure!(close(unc.values()[p], spread, 1e-12), "case {case} pixel {p}: spread {} vs {spread}", unc.values()[p]);
            pixels += 1;
        }
    }
    // A mean exactly at the threshold is background; the next float above is lesion.
    let at = ProbStack::new(1, 1, 2, vec![0.875, 1.0]).unwrap();
    let cfg_dyadic = AggregationConfig::default().with_threshold(0.9375).unwrap();
    ensure!(mean_prediction(&at).values()[0] == 0.9375, "dyadic mean not exact");
    ensure!(!aggregate(&at, &cfg_dyadic).mask.bits()[0], "mean == threshold labelled lesion");
    let just_above = f32::from_bits(0.95f32.to_bits() + 1);
    let below = ProbStack::new(2, 1, 1, vec![0.95, just_above]).unwrap();
    let bits = aggregate(&below, &cfg).mask.to_u8();
    ensure!(bits == [0, 1], "0.95 boundary gave {bits:?}");
    within(Duration::from_secs(5), start)?;
    Ok(format!("200 stacks, {pixels} pixels"))
}

fn c2_metrics() -> Outcome {
    let start = Instant::now();
    let mut rng = stream_rng(202, 0);
    let mut undefined = 0;
    for case in 0..200 {
        let (pp, pg) = (rng.random::<f64>(), rng.random::<f64>());
        let mut gt: Vec<bool> = (0..64).map(|_| rng.random_bool(pg)).collect();
        let mut pred: Vec<bool> = (0..64).map(|_| rng.random_bool(pp)).collect();
        match case % 20 {
            0 => gt.fill(false),
            1 => gt.fill(true),
            2 => {
                gt.fill(false);
                pred.fill(false);
            }
            _ => {}
        }
        let scores: Vec<f64> = (0..64)
            .map(|_| if rng.random_bool(0.5) { f64::from(rng.random_range(0..5u8)) / 4.0 } else { rng.random() })
            .collect();
        let a: HashSet<usize> = (0..64).filter(|&i| pred[i]).collect();
        let b: HashSet<usize> = (0..64).filter(|&i| gt[i]).collect();
        let expected = if a.is_empty() && b.is_empty() {
            1.0
        } else {
            2.0 * a.intersection(&b).count() as f64 / (a.len() + b.len()) as f64
        };
        let pm = BinaryMask::new(8, 8, pred).unwrap();
        let gm = BinaryMask::new(8, 8, gt.clone()).unwrap();
        let got = dice(&confusion(&pm, &gm).unwrap());
        ensure!(got == expected, "case {case}: dice {got} vs {expected}");
        let got = auroc(&ScoreGrid::new(8, 8, scores.clone()).unwrap(), &gm).unwrap();
        let want = oracle_auroc(&scores, &gt);
        match (got, want) {
            (Some(g), Some(w)) => ensure!(close(g, w, 1e-12), "case {case}: auroc {g} vs {w}"),
            (None, None) => undefined += 1,
            _ => return Err(format!("case {case}: auroc {got:?} vs {want:?}")),
        }
    }
    within(Duration::from_secs(5), start)?;
    Ok(format!("200 pairs, {undefined} single-class AUROC cases"))
}

fn c3_roi() -> Outcome {
    let mut rng = stream_rng(303, 0);
    for case in 0..200 {
        let (w, h) = (rng.random_range(1..=16), rng.random_range(1..=16));
        let n = w * h;
        let dyadic = case % 2 == 0;
        let values: Vec<f64> = (0..n)
            .map(|_| if dyadic { f64::from(rng.random_range(0..=1024u32)) / 1024.0 } else { rng.random() })
            .collect();
        let p = rng.random::<f64>();
        let mut bits: Vec<bool> = (0..n).map(|_| rng.random_bool(p)).collect();
        if case % 25 == 1 {
            bits.fill(false);
        }
        let map = UncertaintyMap::new(w, h, values.clone()).unwrap();
        let lesion = BinaryMask::new(w, h, bits.clone()).unwrap();
        let rest = lesion.complement();

        let (ml, mr) = (masked_uncertainty(&map, &lesion).unwrap(), masked_uncertainty(&map, &rest).unwrap());
        for i in 0..n {
            ensure!(ml.values()[i] + mr.values()[i] == values[i], "case {case}: pixel {i} not partitioned");
            ensure!(ml.values()[i] == if bits[i] { values[i] } else { 0.0 }, "case {case}: Hadamard product wrong");
        }
        let total: f64 = values.iter().sum();
        let (s1, s2) = (region_sum(&map, &lesion).unwrap(), region_sum(&map, &rest).unwrap());
        if dyadic {
            ensure!(s1 + s2 == total, "case {case}: dyadic sums {s1} + {s2} != {total}");
        } else {
            ensure!(close(s1 + s2, total, 1e-12), "case {case}: sums {s1} + {s2} vs {total}");
        }

        let n1 = bits.iter().filter(|&&b| b).count();
        let r = decompose(&map, &lesion, Normalization::RegionMean).unwrap();
        ensure!(close(r.x0_overall, total / n as f64, 1e-12), "case {case}: x0");
        let combined = (n1 as f64 * r.x1_lesion.unwrap_or(0.0) + (n - n1) as f64 * r.x2_nonlesion.unwrap_or(0.0)) / n as f64;
        ensure!(close(r.x0_overall, combined, 1e-12), "case {case}: x0 {} vs weighted {combined}", r.x0_overall);
        ensure!(r.x1_lesion.is_none() == (n1 == 0), "case {case}: empty lesion must leave x1 undefined");
        let f = decompose(&map, &lesion, Normalization::FullImageMean).unwrap();
        ensure!(close(f.x0_overall, f.x1_lesion.unwrap() + f.x2_nonlesion.unwrap(), 1e-12), "case {case}: full-image sum");
    }
    Ok("200 map/mask pairs".into())
}

fn planted_rows(rng: &mut Rng, n: usize, span: f64, sigma: f64) -> Vec<ImageSummary> {
    (0..n)
        .map(|i| {
            let class = ClassLabel::ALL[i % 3];
            let (x1, x2) = (rng.random::<f64>() * span, rng.random::<f64>() * span);
            let noise: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
            let x0 = 0.3 * x1 + 0.7 * x2;
            ImageSummary { class, x0, x1: Some(x1), x2: Some(x2), dice: 0.95 - 0.3 * x1 - 0.2 * x2 + noise }
        })
        .collect()
}

fn c4_regression() -> Outcome {
    let start = Instant::now();
    let combined = SuiteModel::Combined.spec();
    let mut rng = stream_rng(404, 0);

    let rows = planted_rows(&mut rng, 60, 0.5, 0.0);
    let f = fit(&rows, &combined).map_err(|e| e.to_string())?;
    let got = [f.intercept.unwrap(), f.coefficient(Predictor::X1).unwrap(), f.coefficient(Predictor::X2).unwrap()];
    for (g, w) in got.iter().zip([0.95, -0.3, -0.2]) {
        ensure!(close(*g, w, 1e-9), "noiseless coefficient {g} vs {w}");
    }
    ensure!(f.rmse < 1e-9, "noiseless rmse {}", f.rmse);

    // Pooled categorical model with planted class offsets: the intercept and
    // three dummies are collinear, so only contrasts and fitted values are
    // identified.
    let offsets = [0.0, -0.05, 0.03];
    let pooled_rows: Vec<ImageSummary> = rows
        .iter()
        .map(|r| ImageSummary { dice: r.dice + offsets[r.class.index()], ..*r })
        .collect();
    let p = fit(&pooled_rows, &pooled_spec()).map_err(|e| e.to_string())?;
    ensure!(p.rank_deficient && p.rmse < 1e-9, "pooled: rank_deficient {} rmse {}", p.rank_deficient, p.rmse);
    ensure!(close(p.coefficient(Predictor::X1).unwrap(), -0.3, 1e-9), "pooled X1");
    for (a, b, v) in p.class_contrasts() {
        let want = offsets[a as usize - Predictor::C1 as usize] - offsets[b as usize - Predictor::C1 as usize];
        ensure!(close(v, want, 1e-9), "contrast {a}-{b}: {v} vs {want}");
    }

    let sigma = 0.02;
    let rows = planted_rows(&mut stream_rng(404, 1), 500, 1.0, sigma);
    let f = fit(&rows, &combined).map_err(|e| e.to_string())?;
    let got = [f.intercept.unwrap(), f.coefficient(Predictor::X1).unwrap(), f.coefficient(Predictor::X2).unwrap()];
    for (g, w) in got.iter().zip([0.95, -0.3, -0.2]) {
        ensure!(close(*g, w, 0.05), "noisy coefficient {g} vs planted {w}");
    }
    ensure!(close(f.rmse, sigma, 0.005), "noisy rmse {} vs sigma {sigma}", f.rmse);
    let design: Vec<Vec<f64>> = rows.iter().map(|r| vec![1.0, r.x1.unwrap(), r.x2.unwrap()]).collect();
    let dice: Vec<f64> = rows.iter().map(|r| r.dice).collect();
    let reference = nalgebra_ols(&design, &dice);
    for (g, w) in got.iter().zip(&reference) {
        ensure!(close(*g, *w, 1e-9), "coefficient {g} vs nalgebra {w}");
    }
    let overall = fit(&rows, &ModelSpec::new(&[Predictor::X0], true).unwrap()).map_err(|e| e.to_string())?;
    let x0_design: Vec<Vec<f64>> = rows.iter().map(|r| vec![1.0, r.x0]).collect();
    let reference = nalgebra_ols(&x0_design, &dice);
    ensure!(close(overall.coefficient(Predictor::X0).unwrap(), reference[1], 1e-9), "X0 slope vs nalgebra");
    within(Duration::from_secs(10), start)?;
    Ok(format!("noisy fit {:.4} {:+.4} X1 {:+.4} X2, rmse {:.4}", got[0], got[1], got[2], f.rmse))
}

/// Default-size corpus taken through every stage once.
struct Corpus {
    dir: tempfile::TempDir,
    fit_elapsed: Duration,
    total_elapsed: Duration,
}

fn run_default_corpus() -> Result<Corpus, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path();
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cfg = SimulatorConfig::default();
    let err = |e: lesionuq::Error| e.to_string();
    let start = Instant::now();
    let manifest = pipeline::simulate(&cfg, out, jobs).map_err(err)?.manifest;
    let analysed = pipeline::analyze(&manifest, out, &AnalyzeOptions::default(), jobs).map_err(err)?;
    if !analysed.failures.is_empty() {
        return Err(format!("{} images failed analysis", analysed.failures.len()));
    }
    pipeline::fit(out, &FitOptions::default()).map_err(err)?;
    let fit_elapsed = start.elapsed();
    pipeline::corr(out, &CorrOptions::default(), jobs).map_err(err)?;
    pipeline::render(&manifest, out, &RenderOptions::default(), jobs).map_err(err)?;
    pipeline::report(out).map_err(err)?;
    Ok(Corpus { dir, fit_elapsed, total_elapsed: start.elapsed() })
}

fn c5_suite(corpus: &Corpus) -> Outcome {
    let fits: FitsFile =
        serde_json::from_slice(&fs::read(corpus.dir.path().join(pipeline::FITS)).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    ensure!(fits.fits.len() == 13, "{} fits", fits.fits.len());
    ensure!(fits.rows_used.len() == 600, "{} rows used", fits.rows_used.len());
    let mut slopes = 0;
    let mut worst_rmse: f64 = 0.0;
    for f in &fits.fits {
        let label = format!("{} {}", f.class.as_deref().unwrap_or("pooled"), f.model);
        ensure!(f.error.is_none(), "{label}: {:?}", f.error);
        for c in f.coefficients.iter().filter(|c| c.name.starts_with('X')) {
            ensure!(c.value < 0.0, "{label}: {} slope {} is not negative", c.name, c.value);
            slopes += 1;
        }
        let rmse = f.rmse.unwrap();
        ensure!(rmse <= 0.19, "{label}: rmse {rmse}");
        worst_rmse = worst_rmse.max(rmse);
    }
    within(Duration::from_secs(120), Instant::now() - corpus.fit_elapsed)?;
    Ok(format!(
        "13 fits, {slopes} uncertainty slopes all negative, max rmse {worst_rmse:.4}, simulate+analyze+fit {:.1?}",
        corpus.fit_elapsed
    ))
}

fn c6_correlation(corpus: &Corpus) -> Outcome {
    let s = pipeline::load_summaries(corpus.dir.path()).map_err(|e| e.to_string())?;
    let mut detail = Vec::new();
    for cell in correlate_suite(&s.rows).iter().filter(|c| c.predictor == Predictor::X0) {
        let r = cell.result.as_ref().map_err(|e| format!("{}: {e}", cell.class))?;
        ensure!(r.rho < -0.3 && r.p_value < 0.05, "{}: rho {} p {}", cell.class, r.rho, r.p_value);
        detail.push(format!("{} {:.3}", cell.class, r.rho));
    }
    ensure!(detail.len() == 3, "expected three classes");

    let mut worst = usize::MAX;
    for class in ClassLabel::ALL {
        let rows: Vec<&ImageSummary> = s.rows.iter().filter(|r| r.class == class).collect();
        let x0: Vec<f64> = rows.iter().map(|r| r.x0).collect();
        let mut dice: Vec<f64> = rows.iter().map(|r| r.dice).collect();
        let mut not_significant = 0;
        for rep in 0..100 {
            dice.shuffle(&mut stream_rng(606 + class.index() as u64, rep));
            let r = spearman(&x0, &dice).map_err(|e| e.to_string())?;
            if r.p_value > 0.05 {
                not_significant += 1;
            }
        }
        ensure!(not_significant >= 90, "{class}: only {not_significant}/100 null replications had p > 0.05");
        worst = worst.min(not_significant);
    }
    Ok(format!("rho(x0, dice): {}; null p > 0.05 in >= {worst}/100 per class", detail.join(", ")))
}

fn c7_spearman() -> Outcome {
    let mut rng = stream_rng(707, 0);
    let mut resolution_checks = 0;
    for case in 0..60 {
        let n = if case == 59 { 12 } else { 4 + case % 7 };
        let draw = |rng: &mut Rng| -> Vec<f64> { (0..n).map(|_| f64::from(rng.random_range(0..4u8))).collect() };
        let (x, y) = loop {
            let (x, y) = (draw(&mut rng), draw(&mut rng));
            if x.iter().any(|&v| v != x[0]) && y.iter().any(|&v| v != y[0]) {
                break (x, y);
            }
        };
        let r = spearman(&x, &y).map_err(|e| e.to_string())?;
        let want = oracle_pearson(&oracle_ranks(&x), &oracle_ranks(&y));
        ensure!(close(r.rho, want, 1e-12), "case {case}: rho {} vs {want}", r.rho);

        if n <= 10 || case == 59 {
            let exact = spearman_exact_p(&x, &y).map_err(|e| e.to_string())?;
            let reference = oracle_exact_p(&x, &y);
            let resolution = 1.0 / (1..=n).map(|k| k as f64).product::<f64>();
            ensure!(close(exact, reference, resolution), "case {case} (n {n}): exact p {exact} vs {reference}");
            resolution_checks += 1;
        }
    }
    Ok(format!("60 tied sequences (n 4..=12), {resolution_checks} exhaustive permutation cross-checks"))
}

fn c8_bootstrap() -> Outcome {
    let sample: Vec<f64> = {
        let mut rng = stream_rng(808, 0);
        (0..200).map(|_| rng.random()).collect()
    };
    for statistic in [Statistic::Median, Statistic::Mean] {
        let cfg = BootstrapConfig::new(statistic, 42);
        let (a, b) = (bootstrap_ci(&sample, &cfg).unwrap(), bootstrap_ci(&sample, &cfg).unwrap());
        let bytes = |c: &lesionuq_core::stats::BootstrapCi| [c.point, c.lower, c.upper].map(f64::to_bits);
        ensure!(bytes(&a) == bytes(&b), "{statistic}: same seed gave different intervals");
        let c = bootstrap_ci(&sample, &BootstrapConfig::new(statistic, 43)).unwrap();
        ensure!(bytes(&a) != bytes(&c), "{statistic}: different seeds gave identical intervals");
    }

    let reps = 200;
    let mut covered = 0;
    for rep in 0..reps {
        let mut rng = stream_rng(809, rep);
        let sample: Vec<f64> = (0..500).map(|_| rng.random()).collect();
        let cfg = BootstrapConfig { n_sims: 2000, ..BootstrapConfig::new(Statistic::Median, 10_000 + rep) };
        let ci = bootstrap_ci(&sample, &cfg).unwrap();
        if ci.lower <= 0.5 && 0.5 <= ci.upper {
            covered += 1;
        }
    }
    let coverage = f64::from(covered) / reps as f64;
    ensure!((0.90..=0.99).contains(&coverage), "coverage {coverage}");
    Ok(format!("identical bytes per seed; median coverage {covered}/{reps} = {coverage:.3}"))
}

fn c9_localization() -> Outcome {
    let agg = AggregationConfig::default();
    let mut detail = Vec::new();
    for mode in [NoiseMode::Interior, NoiseMode::Boundary] {
        let cfg = SimulatorConfig { noise_mode: mode, ..SimulatorConfig::default() };
        let band = 2.0 * cfg.boundary_width;
        let mut worst: f64 = 1.0;
        for seed in 0..100 {
            let mut rng = stream_rng(seed, 0);
            let gt = generate_lesion_mask(&cfg, &mut rng);
            let stack = simulate_stack(&gt, &cfg, NoiseLevels::uniform(0.1), &mut rng);
            let unc = uncertainty_map(&stack, &agg);
            let total: f64 = unc.values().iter().sum();
            ensure!(total > 0.0, "{mode} seed {seed}: no uncertainty");
            let inside: f64 = match mode {
                NoiseMode::Interior => {
                    unc.values().iter().zip(gt.bits()).filter(|(_, &g)| g).map(|(u, _)| u).sum()
                }
                _ => unc
                    .values()
                    .iter()
                    .zip(signed_distance(&gt))
                    .filter(|(_, d)| d.abs() <= band)
                    .map(|(u, _)| u)
                    .sum(),
            };
            let share = inside / total;
            ensure!(share >= 0.70, "{mode} seed {seed}: {share:.3} of mass in region");
            worst = worst.min(share);
        }
        detail.push(format!("{mode} min share {worst:.3}"));
    }
    Ok(format!("100 seeds each: {}", detail.join(", ")))
}

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut pending = vec![dir.to_path_buf()];
    while let Some(d) = pending.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                pending.push(p);
            } else {
                files.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    files
}

fn cli_pipeline(out: &Path, jobs: usize) -> Result<(), String> {
    let steps: [&[&str]; 6] = [
        &["simulate", "--n", "20", "--alpha", "20"],
        &["analyze", "--save-maps"],
        &["fit", "--corr"],
        &["corr"],
        &["render", "--per-class", "2"],
        &["report"],
    ];
    for step in steps {
        let o = Command::new(env!("CARGO_BIN_EXE_lesionuq"))
            .arg("--out")
            .arg(out)
            .args(["--seed", "17", "--jobs", &jobs.to_string()])
            .args(step)
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(o.status.success(), "{step:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    }
    Ok(())
}

fn c10_determinism(corpus: &Corpus) -> Outcome {
    let mut rng = stream_rng(1010, 0);
    for case in 0..200 {
        let stack = random_stack(&mut rng, 8);
        let bytes = encode_stack(&stack);
        let back = decode_stack(&bytes, Path::new("mem.uqs")).map_err(|e| e.to_string())?;
        ensure!(encode_stack(&back) == bytes, "case {case}: UQS1 round trip changed bytes");
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs = [("a", 1), ("b", 1), ("c", 8)];
    for (name, jobs) in runs {
        cli_pipeline(&dir.path().join(name), jobs)?;
    }
    let reference = tree(&dir.path().join("a"));
    for (name, jobs) in &runs[1..] {
        let other = tree(&dir.path().join(name));
        ensure!(reference.keys().eq(other.keys()), "run {name} (--jobs {jobs}) wrote a different file set");
        for (path, bytes) in &reference {
            ensure!(other[path] == *bytes, "{} differs in run {name} (--jobs {jobs})", path.display());
        }
    }
    ensure!(corpus.total_elapsed < Duration::from_secs(180), "default pipeline took {:.1?}", corpus.total_elapsed);
    Ok(format!(
        "200 UQS1 round trips; {} files identical across 2 runs and --jobs 1/8; default simulate->report {:.1?}",
        reference.len(),
        corpus.total_elapsed
    ))
}

// ----------------------------------------------------------------- driver

fn run(id: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| (*s).to_owned()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let elapsed = start.elapsed();
    match &outcome {
        Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail} [{elapsed:.2?}]"),
        Err(why) => println!("criterion {id:>2} FAIL  {name}: {why} [{elapsed:.2?}]"),
    }
    outcome.is_ok()
}

fn main() {
    // `cargo test -- --list` and filters are not meaningful here.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    println!("\nrunning acceptance criteria");
    let mut results = vec![
        run(1, "aggregation oracle equivalence", c1_aggregation),
        run(2, "metrics oracle equivalence", c2_metrics),
        run(3, "ROI decomposition identity", c3_roi),
        run(4, "regression recovery", c4_regression),
    ];
    let corpus = run_default_corpus();
    let with_corpus = |f: fn(&Corpus) -> Outcome| {
        let corpus = &corpus;
        move || match corpus {
            Ok(c) => f(c),
            Err(e) => Err(format!("default corpus pipeline failed: {e}")),
        }
    };
    results.push(run(5, "fitted model suite", with_corpus(c5_suite)));
    results.push(run(6, "correlation significance", with_corpus(c6_correlation)));
    results.push(run(7, "Spearman oracle", c7_spearman));
    results.push(run(8, "bootstrap determinism and coverage", c8_bootstrap));
    results.push(run(9, "uncertainty localization", c9_localization));
    results.push(run(10, "format and pipeline determinism", with_corpus(c10_determinism)));
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("\nacceptance: {passed}/{} criteria passed\n", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
