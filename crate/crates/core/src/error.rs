//! Crate-wide error type.

use thiserror::Error;

use crate::control::Trajectory;
use crate::optimizer::AscentTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("value at index {index} is not finite")]
    NonFiniteValue { index: usize },

    #[error("eigenvalue {value} at index {index} is not positive; the system is not completely unstable")]
    NonPositiveEigenvalue { index: usize, value: f64 },

    #[error("eigenvalues {first} and {second} are not distinct (relative gap below 1e-10)")]
    DuplicateEigenvalue { first: f64, second: f64 },

    #[error("dimension {n} exceeds the supported maximum {max}")]
    DimensionTooLarge { n: usize, max: usize },

    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric at entry ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector norm {norm} is not one")]
    NotUnitVector { norm: f64 },

    #[error("cannot normalize the zero vector")]
    ZeroVector,

    #[error("parameter lists have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("actuator entry {index} is zero; the point is outside Z")]
    ZeroEntryActuator { index: usize },

    #[error(
        "ascent did not converge within {iterations} iterations (gradient norm {gradient_norm:e})"
    )]
    NotConverged {
        iterations: usize,
        gradient_norm: f64,
        trace: Box<AscentTrace>,
    },

    #[error("controllability Gramian is singular")]
    SingularGramian,

    #[error("terminal state norm {terminal_norm:e} exceeds tolerance {tolerance:e}")]
    HorizonTooShort {
        terminal_norm: f64,
        tolerance: f64,
        trajectory: Box<Trajectory>,
    },

    #[error("spectral ratio {ratio} exceeds the supported maximum {max}")]
    SpectralRatioTooLarge { ratio: f64, max: f64 },

    #[error("sweep supports dimensions 2 and 3 only, got {n}")]
    UnsupportedDimension { n: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid rational literal `{0}`")]
    InvalidRational(String),

    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),
}

impl Error {
    /// Stable identifier used in machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyInput => "EmptyInput",
            Error::NonFiniteValue { .. } => "NonFiniteValue",
            Error::NonPositiveEigenvalue { .. } => "NonPositiveEigenvalue",
            Error::DuplicateEigenvalue { .. } => "DuplicateEigenvalue",
            Error::DimensionTooLarge { .. } => "DimensionTooLarge",
            Error::NotSquare { .. } => "NotSquare",
            Error::NotSymmetric { .. } => "NotSymmetric",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotUnitVector { .. } => "NotUnitVector",
            Error::ZeroVector => "ZeroVector",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::ZeroEntryActuator { .. } => "ZeroEntryActuator",
            Error::NotConverged { .. } => "NotConverged",
            Error::SingularGramian => "SingularGramian",
            Error::HorizonTooShort { .. } => "HorizonTooShort",
            Error::SpectralRatioTooLarge { .. } => "SpectralRatioTooLarge",
            Error::UnsupportedDimension { .. } => "UnsupportedDimension",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::InvalidRational(_) => "InvalidRational",
            Error::InternalInvariant(_) => "InternalInvariant",
        }
    }

    /// True for errors caused by the caller's input rather than by a bug.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::InternalInvariant(_)
                | Error::NotConverged { .. }
                | Error::HorizonTooShort { .. }
        )
    }
}
