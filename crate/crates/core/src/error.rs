use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("axis {axis} out of range for a {dim}-dimensional grid")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("shape mismatch: expected {expected} entries, got {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("grids differ: {0}")]
    GridMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("phi_1 table near resonance: |phi_1(i k_x eps)| = {min_abs:e} at k_x = {kx}")]
    NearResonance { kx: f64, min_abs: f64 },

    #[error("exponential overflow (u = {max_u}) at t = {t}")]
    Overflow { t: f64, max_u: f64 },

    #[error("NaN in solution; last good time t = {last_good_t}")]
    NotANumber { last_good_t: f64 },

    #[error("fit needs at least {needed} points above the magnitude floor, found {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error("spectrum shows {found} oscillation peaks, need at least {needed}")]
    NoOscillation { needed: usize, found: usize },

    #[error("regression needs at least 3 points, got {0}")]
    TooFewPoints(usize),

    #[error("snapshot magic mismatch: found {0:?}")]
    BadMagic(String),

    #[error("snapshot header: {0}")]
    BadHeader(String),

    #[error("snapshot payload truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("snapshot payload has {extra} trailing bytes beyond the declared fields")]
    SizeMismatch { extra: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
