//! Validated grid types shared by every stage of the pipeline.
//!
//! All grids are row-major. A [`ProbStack`] holds `alpha` stochastic
//! probability planes, iteration-major: plane `j` occupies
//! `values[j * width * height..(j + 1) * width * height]`.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Width and height of a 2D grid, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shape {
    pub width: usize,
    pub height: usize,
}

impl Shape {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyDimension);
        }
        Ok(Shape { width, height })
    }

    pub fn len(self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }

    /// [`Error::GridMismatch`] unless `other` equals `self`.
    pub fn ensure_same(self, other: Shape) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch { expected: self, found: other })
        }
    }
}

fn check_unit_interval<T: Copy + Into<f64>>(values: &[T]) -> Result<()> {
    for (index, &v) in values.iter().enumerate() {
        let v: f64 = v.into();
        // NaN fails both comparisons.
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::ValueOutOfRange { index, value: v });
        }
    }
    Ok(())
}

fn check_len(shape: Shape, depth: usize, found: usize) -> Result<()> {
    let expected = shape.len() * depth;
    if expected != found {
        return Err(Error::ShapeMismatch { expected, found });
    }
    Ok(())
}

/// Stack of `alpha` stochastic per-pixel probability maps for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbStack {
    shape: Shape,
    alpha: usize,
    values: Vec<f32>,
}

impl ProbStack {
    /// Validates dimensions, payload length and the `[0, 1]` bound.
    pub fn new(width: usize, height: usize, alpha: usize, values: Vec<f32>) -> Result<Self> {
        let shape = Shape::new(width, height)?;
        if alpha == 0 {
            return Err(Error::EmptyDimension);
        }
        check_len(shape, alpha, values.len())?;
        check_unit_interval(&values)?;
        Ok(ProbStack { shape, alpha, values })
    }

    /// Builds a stack from individual planes, each `width * height` long.
    pub fn from_planes(width: usize, height: usize, planes: &[Vec<f32>]) -> Result<Self> {
        let values = planes.iter().flat_map(|p| p.iter().copied()).collect();
        for plane in planes {
            check_len(Shape::new(width, height)?, 1, plane.len())?;
        }
        Self::new(width, height, planes.len(), values)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn width(&self) -> usize {
        self.shape.width
    }

    pub fn height(&self) -> usize {
        self.shape.height
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn plane(&self, iteration: usize) -> &[f32] {
        let n = self.shape.len();
        &self.values[iteration * n..(iteration + 1) * n]
    }

    pub fn planes(&self) -> impl Iterator<Item = &[f32]> {
        self.values.chunks_exact(self.shape.len())
    }

    /// Collects the `alpha` samples of one pixel into `out`.
    pub fn pixel_samples_into(&self, pixel: usize, out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.planes().map(|plane| f64::from(plane[pixel])));
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }
}

/// Binary {0, 1} grid: a ground-truth label or a predicted segmentation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    shape: Shape,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        let shape = Shape::new(width, height)?;
        check_len(shape, 1, bits.len())?;
        Ok(BinaryMask { shape, bits })
    }

    /// Accepts only 0 and 1.
    pub fn from_u8(width: usize, height: usize, bits: &[u8]) -> Result<Self> {
        let mut out = Vec::with_capacity(bits.len());
        for (index, &b) in bits.iter().enumerate() {
            match b {
                0 => out.push(false),
                1 => out.push(true),
                _ => return Err(Error::ValueOutOfRange { index, value: f64::from(b) }),
            }
        }
        Self::new(width, height, out)
    }

    pub fn filled(shape: Shape, value: bool) -> Self {
        BinaryMask { shape, bits: alloc::vec![value; shape.len()] }
    }

    pub fn from_fn(shape: Shape, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(shape.len());
        for y in 0..shape.height {
            for x in 0..shape.width {
                bits.push(f(x, y));
            }
        }
        BinaryMask { shape, bits }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn width(&self) -> usize {
        self.shape.width
    }

    pub fn height(&self) -> usize {
        self.shape.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.shape.width + x]
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Flips every pixel: the non-lesion region of a lesion mask.
    pub fn complement(&self) -> BinaryMask {
        BinaryMask { shape: self.shape, bits: self.bits.iter().map(|b| !b).collect() }
    }

    pub fn to_u8(&self) -> Vec<u8> {
        self.bits.iter().map(|&b| u8::from(b)).collect()
    }
}

/// Per-pixel real scores in `[0, 1]`, e.g. the mean prediction across iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreGrid {
    shape: Shape,
    values: Vec<f64>,
}

impl ScoreGrid {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        let shape = Shape::new(width, height)?;
        check_len(shape, 1, values.len())?;
        check_unit_interval(&values)?;
        Ok(ScoreGrid { shape, values })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Per-pixel inter-percentile spread; 0 means the model is fully certain.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyMap {
    shape: Shape,
    values: Vec<f64>,
}

impl UncertaintyMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        let shape = Shape::new(width, height)?;
        check_len(shape, 1, values.len())?;
        check_unit_interval(&values)?;
        Ok(UncertaintyMap { shape, values })
    }

    pub(crate) fn from_parts(shape: Shape, values: Vec<f64>) -> Self {
        debug_assert_eq!(shape.len(), values.len());
        UncertaintyMap { shape, values }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn width(&self) -> usize {
        self.shape.width
    }

    pub fn height(&self) -> usize {
        self.shape.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Multiplies every value by `factor`, which must lie in `[0, 1]`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&factor) {
            return Err(Error::InvalidConfig("scale factor must lie in [0, 1]"));
        }
        Ok(Self::from_parts(self.shape, self.values.iter().map(|v| v * factor).collect()))
    }
}

/// Diagnosis class of an image; the three most prevalent classes of the source dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassLabel {
    Melanoma,
    Nevus,
    SeborrheicKeratosis,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 3] =
        [ClassLabel::Melanoma, ClassLabel::Nevus, ClassLabel::SeborrheicKeratosis];

    /// Manifest / CSV spelling.
    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Melanoma => "melanoma",
            ClassLabel::Nevus => "nevus",
            ClassLabel::SeborrheicKeratosis => "seborrheic_keratosis",
        }
    }

    pub fn index(self) -> usize {
        match self {
            ClassLabel::Melanoma => 0,
            ClassLabel::Nevus => 1,
            ClassLabel::SeborrheicKeratosis => 2,
        }
    }

    /// One-hot dummy encoding (C1, C2, C3).
    pub fn dummies(self) -> [f64; 3] {
        let mut d = [0.0; 3];
        d[self.index()] = 1.0;
        d
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownClass;

impl fmt::Display for UnknownClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("expected one of melanoma, nevus, seborrheic_keratosis")
    }
}

impl FromStr for ClassLabel {
    type Err = UnknownClass;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        ClassLabel::ALL.into_iter().find(|c| c.as_str() == s).ok_or(UnknownClass)
    }
}

/// Per-image scalars feeding the regression and correlation stages.
///
/// `x1` is `None` for an empty lesion, `x2` for a lesion covering the frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageSummary {
    pub class: ClassLabel,
    pub x0: f64,
    pub x1: Option<f64>,
    pub x2: Option<f64>,
    pub dice: f64,
}
