//! Ordinary least-squares models predicting Dice from region uncertainties
//! and, optionally, the diagnosis class as dummy variables.
//!
//! The per-class suite fits four models:
//!
//! | model      | predictors  | coefficients |
//! |------------|-------------|--------------|
//! | combined   | X1, X2      | α0, α1, α2   |
//! | lesion     | X1          | β0, β1       |
//! | non-lesion | X2          | γ0, γ1       |
//! | overall    | X0          | θa, θb       |
//!
//! and one pooled model over all classes with predictors X1, X2, C1, C2, C3
//! (φ1..φ3 for the class dummies). With an intercept the dummies are exactly
//! collinear, so that fit is rank deficient by construction; the solver then
//! returns the minimum-norm coefficients, and only differences between class
//! coefficients are identifiable (see [`RegressionFit::class_contrasts`]).

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::model::{ClassLabel, ImageSummary};

/// Candidate regressors, in the fixed column order used for every design matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Predictor {
    /// Lesion-region mean uncertainty.
    X1,
    /// Non-lesion-region mean uncertainty.
    X2,
    /// Whole-image mean uncertainty.
    X0,
    /// Melanoma dummy.
    C1,
    /// Nevus dummy.
    C2,
    /// Seborrheic keratosis dummy.
    C3,
}

impl Predictor {
    pub fn as_str(self) -> &'static str {
        match self {
            Predictor::X1 => "X1",
            Predictor::X2 => "X2",
            Predictor::X0 => "X0",
            Predictor::C1 => "C1",
            Predictor::C2 => "C2",
            Predictor::C3 => "C3",
        }
    }

    /// Lower-case name of the region column this predictor reads, if any.
    pub fn column_name(self) -> &'static str {
        match self {
            Predictor::X1 => "x1",
            Predictor::X2 => "x2",
            Predictor::X0 => "x0",
            Predictor::C1 => "c1",
            Predictor::C2 => "c2",
            Predictor::C3 => "c3",
        }
    }

    fn dummy_class(self) -> Option<ClassLabel> {
        match self {
            Predictor::C1 => Some(ClassLabel::Melanoma),
            Predictor::C2 => Some(ClassLabel::Nevus),
            Predictor::C3 => Some(ClassLabel::SeborrheicKeratosis),
            _ => None,
        }
    }

    /// Uncertainty value for X0/X1/X2; `None` for the class dummies.
    pub fn region_value(self, row: &ImageSummary) -> Option<f64> {
        match self {
            Predictor::X0 => Some(row.x0),
            Predictor::X1 => row.x1,
            Predictor::X2 => row.x2,
            _ => None,
        }
    }

    fn value(self, row: &PredictorRow) -> Option<f64> {
        match self {
            Predictor::X0 => row.x0,
            Predictor::X1 => row.x1,
            Predictor::X2 => row.x2,
            _ => {
                let class = self.dummy_class()?;
                row.class.map(|c| if c == class { 1.0 } else { 0.0 })
            }
        }
    }
}

impl fmt::Display for Predictor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Predictor values for one image; any may be absent.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PredictorRow {
    pub x0: Option<f64>,
    pub x1: Option<f64>,
    pub x2: Option<f64>,
    pub class: Option<ClassLabel>,
}

impl From<&ImageSummary> for PredictorRow {
    fn from(s: &ImageSummary) -> Self {
        PredictorRow { x0: Some(s.x0), x1: s.x1, x2: s.x2, class: Some(s.class) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModelSpec {
    predictors: Vec<Predictor>,
    intercept: bool,
}

impl ModelSpec {
    pub fn new(predictors: &[Predictor], intercept: bool) -> Result<Self> {
        if predictors.is_empty() {
            return Err(Error::InvalidModelSpec("at least one predictor is required"));
        }
        let mut sorted = predictors.to_vec();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != predictors.len() {
            return Err(Error::InvalidModelSpec("duplicate predictor"));
        }
        let has = |p| sorted.contains(&p);
        if has(Predictor::X0) && (has(Predictor::X1) || has(Predictor::X2)) {
            return Err(Error::InvalidModelSpec("X0 cannot be combined with X1 or X2"));
        }
        Ok(ModelSpec { predictors: sorted, intercept })
    }

    pub fn predictors(&self) -> &[Predictor] {
        &self.predictors
    }

    pub fn intercept(&self) -> bool {
        self.intercept
    }

    pub fn n_coefficients(&self) -> usize {
        self.predictors.len() + usize::from(self.intercept)
    }

    /// Design row, or `None` if a required predictor is missing.
    fn design_row(&self, row: &PredictorRow, out: &mut Vec<f64>) -> Option<()> {
        if self.intercept {
            out.push(1.0);
        }
        for p in &self.predictors {
            out.push(p.value(row)?);
        }
        Some(())
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intercept {
            f.write_str("1")?;
        }
        for (i, p) in self.predictors.iter().enumerate() {
            if i > 0 || self.intercept {
                f.write_str(" + ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub spec: ModelSpec,
    pub intercept: Option<f64>,
    /// In canonical predictor order.
    pub coefficients: Vec<(Predictor, f64)>,
    pub rmse: f64,
    pub rss: f64,
    pub n_used: usize,
    pub n_dropped: usize,
    pub rank: usize,
    pub rank_deficient: bool,
}

impl RegressionFit {
    pub fn coefficient(&self, p: Predictor) -> Option<f64> {
        self.coefficients.iter().find(|(q, _)| *q == p).map(|&(_, c)| c)
    }

    /// Raw linear prediction; may fall outside `[0, 1]`.
    pub fn predict(&self, row: &PredictorRow) -> Result<f64> {
        let mut y = self.intercept.unwrap_or(0.0);
        for &(p, c) in &self.coefficients {
            y += c * p.value(row).ok_or(Error::MissingPredictor(p))?;
        }
        Ok(y)
    }

    /// Prediction clamped to the valid Dice range.
    pub fn predict_clamped(&self, row: &PredictorRow) -> Result<f64> {
        self.predict(row).map(|y| y.clamp(0.0, 1.0))
    }

    /// `φ_i - φ_j` for every pair of class dummies in the model. These are
    /// identifiable even when the dummies and intercept are collinear.
    pub fn class_contrasts(&self) -> Vec<(Predictor, Predictor, f64)> {
        let dummies: Vec<(Predictor, f64)> =
            self.coefficients.iter().copied().filter(|(p, _)| p.dummy_class().is_some()).collect();
        let mut out = Vec::new();
        for (i, &(a, ca)) in dummies.iter().enumerate() {
            for &(b, cb) in &dummies[i + 1..] {
                out.push((a, b, ca - cb));
            }
        }
        out
    }
}

/// Fits `dice ~ spec` by least squares on the rows that define every predictor.
pub fn fit(data: &[ImageSummary], spec: &ModelSpec) -> Result<RegressionFit> {
    let cols = spec.n_coefficients();
    let mut design = Vec::with_capacity(data.len() * cols);
    let mut y = Vec::with_capacity(data.len());
    for row in data {
        let start = design.len();
        if spec.design_row(&PredictorRow::from(row), &mut design).is_some() {
            y.push(row.dice);
        } else {
            design.truncate(start);
        }
    }
    let n_used = y.len();
    if n_used <= cols {
        return Err(Error::InsufficientData { needed: cols, available: n_used });
    }
    let ls = least_squares(&design, n_used, cols, &y);
    let rss: f64 = design
        .chunks_exact(cols)
        .zip(&y)
        .map(|(x, yi)| {
            let r = yi - x.iter().zip(&ls.solution).map(|(a, b)| a * b).sum::<f64>();
            r * r
        })
        .sum();
    let (intercept, slopes) = if spec.intercept {
        (Some(ls.solution[0]), &ls.solution[1..])
    } else {
        (None, &ls.solution[..])
    };
    Ok(RegressionFit {
        spec: spec.clone(),
        intercept,
        coefficients: spec.predictors.iter().copied().zip(slopes.iter().copied()).collect(),
        rmse: libm::sqrt(rss / n_used as f64),
        rss,
        n_used,
        n_dropped: data.len() - n_used,
        rank: ls.rank,
        rank_deficient: ls.rank < cols,
    })
}

/// The four per-class models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteModel {
    Combined,
    Lesion,
    NonLesion,
    Overall,
}

impl SuiteModel {
    pub const ALL: [SuiteModel; 4] =
        [SuiteModel::Combined, SuiteModel::Lesion, SuiteModel::NonLesion, SuiteModel::Overall];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteModel::Combined => "combined",
            SuiteModel::Lesion => "lesion",
            SuiteModel::NonLesion => "nonlesion",
            SuiteModel::Overall => "overall",
        }
    }

    pub fn spec(self) -> ModelSpec {
        let predictors: &[Predictor] = match self {
            SuiteModel::Combined => &[Predictor::X1, Predictor::X2],
            SuiteModel::Lesion => &[Predictor::X1],
            SuiteModel::NonLesion => &[Predictor::X2],
            SuiteModel::Overall => &[Predictor::X0],
        };
        ModelSpec::new(predictors, true).expect("suite specs are valid")
    }
}

pub fn pooled_spec() -> ModelSpec {
    use Predictor::*;
    ModelSpec::new(&[X1, X2, C1, C2, C3], true).expect("pooled spec is valid")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassSuite {
    pub class: ClassLabel,
    pub fits: Vec<(SuiteModel, Result<RegressionFit>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSuite {
    pub classes: Vec<ClassSuite>,
    pub pooled: Result<RegressionFit>,
}

impl ModelSuite {
    /// Every fit in output order: per class (combined, lesion, non-lesion,
    /// overall), then the pooled categorical model.
    pub fn iter(&self) -> impl Iterator<Item = (Option<ClassLabel>, &'static str, &Result<RegressionFit>)> {
        self.classes
            .iter()
            .flat_map(|cs| cs.fits.iter().map(move |(m, f)| (Some(cs.class), m.as_str(), f)))
            .chain(core::iter::once((None, "pooled_categorical", &self.pooled)))
    }
}

/// Four models per class plus the pooled categorical model.
pub fn fit_model_suite(data: &[ImageSummary]) -> ModelSuite {
    let classes = ClassLabel::ALL
        .into_iter()
        .map(|class| {
            let rows: Vec<ImageSummary> = data.iter().filter(|r| r.class == class).copied().collect();
            let fits = SuiteModel::ALL.into_iter().map(|m| (m, fit(&rows, &m.spec()))).collect();
            ClassSuite { class, fits }
        })
        .collect();
    ModelSuite { classes, pooled: fit(data, &pooled_spec()) }
}
