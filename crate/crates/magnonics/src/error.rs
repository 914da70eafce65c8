//! Crate-wide error types.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value for {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("fit: {0}")]
    Fit(#[from] FitError),
    #[error("sweep: {0}")]
    Sweep(String),
    #[error("sweep file: {0}")]
    SweepFile(#[from] SweepFileError),
    #[error("config: {0}")]
    Config(String),
    #[error("pipeline: {0}")]
    Pipeline(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Failures of the least-squares engine and the concrete fits.
#[derive(Debug, Error)]
pub enum FitError {
    #[error("initial parameter {index} = {value} outside bounds [{lo}, {hi}]")]
    InitOutOfBounds {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("model produced a non-finite value at the initial parameters")]
    NonFiniteModel,
    #[error("malformed fit problem: {0}")]
    Malformed(String),
    #[error("no resonance dip above the noise floor")]
    NoDip,
    #[error("parameter '{name}' pinned at a bound; fit rejected as unphysical")]
    AtBound { name: String },
    #[error("degenerate sampling: {0}")]
    Degenerate(String),
    #[error("grid of {points} points exceeds the cap of {cap}")]
    GridCapExceeded { points: usize, cap: usize },
}

/// Parse/validation failures of the sweep file container, one variant per
/// failure class so callers can map them to distinct exit codes.
#[derive(Debug, Error)]
pub enum SweepFileError {
    #[error("unknown version '{0}'")]
    UnknownVersion(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("{0} axis is not sorted as declared")]
    UnsortedAxis(&'static str),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
