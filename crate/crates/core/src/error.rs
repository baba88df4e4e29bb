use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the estimators, the simulation harness and the input layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("sample is empty")]
    EmptySample,

    #[error("non-positive income {value} at index {index}")]
    NonPositiveValue { index: usize, value: f64 },

    #[error("non-finite income at index {index}")]
    NonFiniteValue { index: usize },

    #[error("{what} = {value} is out of range")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("sample too small: need at least {needed} observations, got {got}")]
    SampleTooSmall { needed: usize, got: usize },

    #[error("mean income is zero")]
    ZeroMean,

    #[error("GPI normalizer B is zero")]
    ZeroNormalizer,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("GPI configuration `{0}` carries no residual functions (g, nu)")]
    MissingResidualFunctions(String),

    #[error("NearZeroDenominator: Gini variation {delta:e} is below the floor {floor:e}")]
    NearZeroDenominator { delta: f64, floor: f64 },

    #[error("negative variance {value:e} (beyond round-off tolerance)")]
    NegativeVariance { value: f64 },

    #[error("bad parameters: {0}")]
    BadParameters(String),

    #[error("quadrature failed: {0}")]
    NonIntegrable(String),

    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("non-positive value {value} in column `{column}` at data row {row}")]
    NonPositiveRow {
        row: usize,
        column: String,
        value: f64,
    },

    #[error("cannot parse `{text}` in column `{column}` at data row {row}")]
    Parse {
        row: usize,
        column: String,
        text: String,
    },

    #[error("no usable rows remain after filtering")]
    EmptyAfterFilter,

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Coarse classification used by front ends to pick an exit status.
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            ZeroMean
            | ZeroNormalizer
            | NearZeroDenominator { .. }
            | NegativeVariance { .. }
            | NonIntegrable(_) => ErrorClass::Numeric,
            Config(_) | BadParameters(_) | MissingResidualFunctions(_) | OutOfRange { .. } => {
                ErrorClass::Usage
            }
            _ => ErrorClass::Data,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numeric,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
