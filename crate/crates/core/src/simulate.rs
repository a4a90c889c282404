//! Deterministic stand-in for a stochastic segmentation network.
//!
//! Each simulated image has a ground-truth lesion (a perturbed ellipse) and a
//! prediction stack built from a signed-distance logistic base score plus
//! Gaussian noise. The noise is localised either inside the lesion
//! (`Interior`, the dropout-like signature) or in a band around its boundary
//! (`Boundary`, the variational-like signature), or both (`Mixed`).
//!
//! The base score is `logistic(k * d + ln 19)`, where `d` is the signed
//! distance (positive inside). It crosses 0.95 exactly on the lesion boundary, so a
//! noise-free stack thresholds back to the ground truth.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::fmt;
use core::str::FromStr;

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::distance::signed_distance;
use crate::error::{Error, Result};
use crate::model::{BinaryMask, ClassLabel, ProbStack, Shape};
use crate::rng::{stream_rng, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseMode {
    Boundary,
    Interior,
    #[default]
    Mixed,
}

impl NoiseMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseMode::Boundary => "boundary",
            NoiseMode::Interior => "interior",
            NoiseMode::Mixed => "mixed",
        }
    }
}

impl fmt::Display for NoiseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseMode {
    type Err = &'static str;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        match s {
            "boundary" => Ok(NoiseMode::Boundary),
            "interior" => Ok(NoiseMode::Interior),
            "mixed" => Ok(NoiseMode::Mixed),
            _ => Err("expected `boundary`, `interior` or `mixed`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatorConfig {
    pub width: usize,
    pub height: usize,
    /// Monte Carlo iterations per stack.
    pub alpha: usize,
    pub n_per_class: usize,
    pub noise_mode: NoiseMode,
    /// Noise scales `σ` an image may draw, before the class multiplier.
    pub noise_grid: Vec<f64>,
    /// Per-class multipliers on `σ`, indexed by [`ClassLabel::index`].
    pub class_noise_multipliers: [f64; 3],
    /// Width `w` of the boundary band, in pixels.
    pub boundary_width: f64,
    /// Logistic slope `k` of the base score per pixel of signed distance.
    pub sharpness: f64,
    pub seed: u64,
}

impl Default for SimulatorConfig {
    fn default() -> Self {
        SimulatorConfig {
            width: 64,
            height: 64,
            alpha: 50,
            n_per_class: 200,
            noise_mode: NoiseMode::Mixed,
            noise_grid: default_noise_grid(),
            class_noise_multipliers: [1.0, 1.2, 0.8],
            boundary_width: 2.0,
            sharpness: 1.0,
            seed: 0,
        }
    }
}

/// `0.000, 0.016, ..., 0.160`.
///
/// Above roughly 0.25 the clamped noise drags deep-interior means under the
/// 0.95 threshold and whole lesions vanish at once, which breaks the gradual
/// noise-to-Dice relationship the corpus is meant to exhibit.
pub fn default_noise_grid() -> Vec<f64> {
    (0..=10).map(|i| f64::from(i) * 0.016).collect()
}

impl SimulatorConfig {
    pub fn validate(&self) -> Result<()> {
        Shape::new(self.width, self.height)?;
        if self.alpha == 0 {
            return Err(Error::EmptyDimension);
        }
        if self.noise_grid.is_empty() || self.noise_grid.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::InvalidConfig("noise grid must be non-empty and non-negative"));
        }
        if self.class_noise_multipliers.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidConfig("class noise multipliers must be non-negative"));
        }
        if !(self.boundary_width > 0.0) || !(self.sharpness > 0.0) {
            return Err(Error::InvalidConfig("boundary width and sharpness must be positive"));
        }
        Ok(())
    }

    pub fn shape(&self) -> Shape {
        Shape { width: self.width, height: self.height }
    }

    pub fn n_images(&self) -> usize {
        self.n_per_class * ClassLabel::ALL.len()
    }
}

/// Noise scales of the interior and boundary components of one image.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseLevels {
    pub interior: f64,
    pub boundary: f64,
}

impl NoiseLevels {
    pub fn uniform(sigma: f64) -> Self {
        NoiseLevels { interior: sigma, boundary: sigma }
    }

    /// The single scale reported for the image under `mode`.
    pub fn injected(&self, mode: NoiseMode) -> f64 {
        match mode {
            NoiseMode::Boundary => self.boundary,
            NoiseMode::Interior => self.interior,
            NoiseMode::Mixed => (self.interior + self.boundary) / 2.0,
        }
    }
}

pub fn image_id(class: ClassLabel, k: usize) -> String {
    let prefix = match class {
        ClassLabel::Melanoma => "mel",
        ClassLabel::Nevus => "nev",
        ClassLabel::SeborrheicKeratosis => "seb",
    };
    format!("{prefix}_{k:04}")
}

/// Class and within-class ordinal of corpus image `index` (class-major order).
pub fn image_slot(cfg: &SimulatorConfig, index: usize) -> (ClassLabel, usize) {
    (ClassLabel::ALL[index / cfg.n_per_class], index % cfg.n_per_class)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedImage {
    pub id: String,
    pub class: ClassLabel,
    pub gt: BinaryMask,
    pub stack: ProbStack,
    pub noise: NoiseLevels,
    pub injected_noise_level: f64,
}

/// Corpus image `index`; a pure function of `(cfg, index)`.
pub fn simulate_image(cfg: &SimulatorConfig, index: usize) -> SimulatedImage {
    let (class, k) = image_slot(cfg, index);
    let mut rng = stream_rng(cfg.seed, index as u64);
    let multiplier = cfg.class_noise_multipliers[class.index()];
    let grid = &cfg.noise_grid;
    let interior = grid[rng.random_range(0..grid.len())] * multiplier;
    let boundary = grid[rng.random_range(0..grid.len())] * multiplier;
    let noise = NoiseLevels { interior, boundary };
    let gt = generate_lesion_mask(cfg, &mut rng);
    let stack = simulate_stack(&gt, cfg, noise, &mut rng);
    SimulatedImage {
        id: image_id(class, k),
        class,
        gt,
        stack,
        noise,
        injected_noise_level: noise.injected(cfg.noise_mode),
    }
}

/// Random perturbed ellipse kept clear of the frame edge, reduced to its
/// largest 4-connected component.
pub fn generate_lesion_mask(cfg: &SimulatorConfig, rng: &mut Rng) -> BinaryMask {
    let (w, h) = (cfg.width as f64, cfg.height as f64);
    let min_dim = w.min(h);
    let margin = 2.0_f64.min(min_dim / 4.0);

    let mean_radius = rng.random_range(0.12..0.30) * min_dim;
    let aspect = rng.random_range(0.7..1.0);
    let rotation = rng.random_range(0.0..PI);
    let amp2 = rng.random_range(0.0..0.12);
    let amp3 = rng.random_range(0.0..0.08);
    let phase2 = rng.random_range(0.0..TAU);
    let phase3 = rng.random_range(0.0..TAU);

    // Largest radius the outline can reach, capped to fit inside the margin.
    let reach = mean_radius / libm::sqrt(aspect) * (1.0 + amp2 + amp3);
    let room = (min_dim / 2.0 - margin).max(0.5);
    let scale = if reach > room { room / reach } else { 1.0 };
    let (rx, ry) = (mean_radius * scale / libm::sqrt(aspect), mean_radius * scale * libm::sqrt(aspect));
    let reach = reach * scale;
    let centre = |extent: f64, rng: &mut Rng| {
        let (lo, hi) = (margin + reach, extent - margin - reach);
        if lo < hi { rng.random_range(lo..hi) } else { extent / 2.0 }
    };
    let cx = centre(w, rng);
    let cy = centre(h, rng);

    let (sin_r, cos_r) = (libm::sin(rotation), libm::cos(rotation));
    let raw = BinaryMask::from_fn(cfg.shape(), |x, y| {
        let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
        let (u, v) = (cos_r * dx + sin_r * dy, -sin_r * dx + cos_r * dy);
        let dist = libm::sqrt(u * u + v * v);
        if dist == 0.0 {
            return true;
        }
        let phi = libm::atan2(v, u);
        let (c, s) = (libm::cos(phi), libm::sin(phi));
        let ellipse = 1.0 / libm::sqrt((c / rx) * (c / rx) + (s / ry) * (s / ry));
        let bump = 1.0 + amp2 * libm::cos(2.0 * phi + phase2) + amp3 * libm::cos(3.0 * phi + phase3);
        dist < ellipse * bump
    });
    largest_component(&raw)
}

/// Largest 4-connected component of the set pixels; ties go to the first in
/// raster order.
pub fn largest_component(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let bits = mask.bits();
    let mut label = alloc::vec![0u32; bits.len()];
    let mut best = (0u32, 0usize);
    let mut next = 0u32;
    let mut queue = Vec::new();
    for start in 0..bits.len() {
        if !bits[start] || label[start] != 0 {
            continue;
        }
        next += 1;
        label[start] = next;
        queue.clear();
        queue.push(start);
        let mut size = 0;
        while let Some(p) = queue.pop() {
            size += 1;
            let (x, y) = (p % w, p / w);
            let neighbours = [
                (x > 0).then(|| p - 1),
                (x + 1 < w).then(|| p + 1),
                (y > 0).then(|| p - w),
                (y + 1 < h).then(|| p + w),
            ];
            for q in neighbours.into_iter().flatten() {
                if bits[q] && label[q] == 0 {
                    label[q] = next;
                    queue.push(q);
                }
            }
        }
        if size > best.1 {
            best = (next, size);
        }
    }
    let keep = best.0;
    BinaryMask::new(w, h, label.iter().map(|&l| keep != 0 && l == keep).collect())
        .expect("shape carried over")
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-z))
}

/// `ln(0.95 / 0.05)`: shifts the logistic so it crosses 0.95 at `d = 0`.
const THRESHOLD_LOGIT: f64 = 2.944_438_979_166_440_4;

/// Noise-free per-pixel score.
pub fn base_scores(gt: &BinaryMask, sharpness: f64) -> Vec<f64> {
    signed_distance(gt).into_iter().map(|d| logistic(sharpness * d + THRESHOLD_LOGIT)).collect()
}

/// Per-pixel noise standard deviation for `mode`.
pub fn noise_profile(gt: &BinaryMask, cfg: &SimulatorConfig, noise: NoiseLevels) -> Vec<f64> {
    let w2 = cfg.boundary_width * cfg.boundary_width;
    signed_distance(gt)
        .into_iter()
        .zip(gt.bits())
        .map(|(d, &inside)| {
            let interior = if inside { noise.interior } else { 0.0 };
            let boundary = noise.boundary * libm::exp(-d * d / w2);
            match cfg.noise_mode {
                NoiseMode::Interior => interior,
                NoiseMode::Boundary => boundary,
                NoiseMode::Mixed => (interior + boundary) / 2.0,
            }
        })
        .collect()
}

/// Iteration `j`, pixel `p`: `clamp(s(p) + σ(p) z, 0, 1)` with `z` standard
/// normal, drawn iteration-major and skipping pixels with `σ(p) = 0`.
pub fn simulate_stack(gt: &BinaryMask, cfg: &SimulatorConfig, noise: NoiseLevels, rng: &mut Rng) -> ProbStack {
    let base = base_scores(gt, cfg.sharpness);
    let sigma = noise_profile(gt, cfg, noise);
    let n = base.len();
    let mut values = Vec::with_capacity(n * cfg.alpha);
    for _ in 0..cfg.alpha {
        for (&s, &sd) in base.iter().zip(&sigma) {
            let v = if sd > 0.0 {
                let z: f64 = rng.sample(StandardNormal);
                (s + sd * z).clamp(0.0, 1.0)
            } else {
                s
            };
            values.push(v as f32);
        }
    }
    ProbStack::new(gt.width(), gt.height(), cfg.alpha, values).expect("clamped to [0, 1]")
}
