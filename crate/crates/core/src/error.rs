use core::fmt;

use crate::model::Shape;
use crate::regression::Predictor;
use crate::render::Panel;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the analysis core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A width, height or iteration count of zero.
    EmptyDimension,
    /// A probability or uncertainty value outside `[0, 1]` (or NaN).
    ValueOutOfRange { index: usize, value: f64 },
    /// A buffer whose length does not match the declared dimensions.
    ShapeMismatch { expected: usize, found: usize },
    /// Two grids that must be paired have different dimensions.
    GridMismatch { expected: Shape, found: Shape },
    /// Two sample sequences that must be paired have different lengths.
    LengthMismatch { left: usize, right: usize },
    InvalidConfig(&'static str),
    InvalidModelSpec(&'static str),
    EmptyInput,
    InsufficientData { needed: usize, available: usize },
    TooFewSamples { needed: usize, available: usize },
    ConstantInput,
    MissingPredictor(Predictor),
    MissingPanel(Panel),
}

impl Error {
    /// True for failures of a statistical precondition (sample size, variance),
    /// as opposed to malformed data or configuration.
    pub fn is_statistical(&self) -> bool {
        matches!(
            self,
            Error::EmptyInput
                | Error::InsufficientData { .. }
                | Error::TooFewSamples { .. }
                | Error::ConstantInput
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyDimension => f.write_str("width, height and iteration count must be at least 1"),
            Error::ValueOutOfRange { index, value } => {
                write!(f, "value {value} at index {index} is outside [0, 1]")
            }
            Error::ShapeMismatch { expected, found } => {
                write!(f, "expected {expected} values, found {found}")
            }
            Error::GridMismatch { expected, found } => write!(
                f,
                "grid is {}x{}, expected {}x{}",
                found.width, found.height, expected.width, expected.height
            ),
            Error::LengthMismatch { left, right } => {
                write!(f, "paired sequences have lengths {left} and {right}")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::InvalidModelSpec(msg) => write!(f, "invalid model spec: {msg}"),
            Error::EmptyInput => f.write_str("no input values"),
            Error::InsufficientData { needed, available } => write!(
                f,
                "insufficient data: need more than {needed} usable rows, have {available}"
            ),
            Error::TooFewSamples { needed, available } => {
                write!(f, "too few samples: need at least {needed}, have {available}")
            }
            Error::ConstantInput => f.write_str("input sequence is constant"),
            Error::MissingPredictor(p) => write!(f, "row does not supply predictor {p}"),
            Error::MissingPanel(p) => write!(f, "panel {p} was requested but not supplied"),
        }
    }
}

impl core::error::Error for Error {}
