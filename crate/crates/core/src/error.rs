use thiserror::Error;

use crate::dsl::Diagnostic;

/// Location-tagged syntax error from the program parser.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Failures reading or writing one of the supported file formats.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("binvox: bad magic, expected `#binvox 1`")]
    BadMagic,
    #[error("binvox: {0}")]
    BinvoxHeader(String),
    #[error("binvox: dim mismatch ({0} x {1} x {2}); only cubic grids are supported")]
    DimMismatch(usize, usize, usize),
    #[error("binvox: run-length data overruns the grid at voxel {0}")]
    Overrun(usize),
    #[error("binvox: run-length data ends after {got} of {expected} voxels")]
    Underrun { got: usize, expected: usize },
    #[error("obj line {line}: {message}")]
    Obj { line: usize, message: String },
    #[error("ply: {0}")]
    Ply(String),
    #[error("xyz line {line}: {message}")]
    Xyz { line: usize, message: String },
    #[error("json: {0}")]
    Json(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {0}")]
    Parse(#[from] ParseError),
    #[error("unknown statement `{name}` at {line}:{column}")]
    UnknownStatement {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("statement `{name}` at {line}:{column} expects {expected} parameters, got {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
        line: usize,
        column: usize,
    },
    #[error("loop count must be a positive integer at {line}:{column}")]
    NonPositiveLoopCount { line: usize, column: usize },
    #[error("statement `{0}` is already registered")]
    DuplicateStatement(String),
    #[error("invalid statement definition `{name}`: {reason}")]
    InvalidDefinition { name: String, reason: String },
    #[error("program failed validation: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("degenerate line: start and end coincide")]
    DegenerateLine,
    #[error("non-positive size or radius")]
    NonPositiveSize,
    #[error("primitive set is empty")]
    EmptySet,
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("sample count must be at least 1")]
    InvalidCount,
    #[error("mesh has zero total surface area")]
    ZeroArea,
    #[error("parameter layout mismatch: expected {expected} values, got {got}")]
    LayoutMismatch { expected: usize, got: usize },
    #[error("finite-difference step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite loss at step {step}")]
    NonFinite { step: usize },
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
