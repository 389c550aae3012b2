use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid radar parameters: {0}")]
    InvalidParams(String),

    #[error("length mismatch: expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-invertible subcarrier weight at index {index} (|S_k| = {magnitude:e})")]
    NonInvertibleWeight { index: usize, magnitude: f64 },

    #[error("root {root} not coprime with N = {n}")]
    RootNotCoprime { root: usize, n: usize },

    #[error("sequence has zero energy")]
    ZeroEnergy,

    #[error("non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("scatterer {index} at slant range {slant_range:.3} m falls outside the swath (cell {cell})")]
    OutOfSwath {
        index: usize,
        slant_range: f64,
        cell: i64,
    },

    #[error("degenerate SNR: {0}")]
    DegenerateSnr(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
