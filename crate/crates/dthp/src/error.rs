//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by model construction, evaluation, simulation, and I/O.
#[derive(Debug, Error)]
pub enum DthpError {
    #[error("invalid count series: {0}")]
    InvalidSeries(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid prior configuration: {0}")]
    InvalidPrior(String),

    #[error("dimension mismatch: model has K={model_k}, series has K={series_k}")]
    DimensionMismatch { model_k: usize, series_k: usize },

    #[error("non-finite log-likelihood at dimension {k}, time {t}: intensity {lambda}")]
    NonFiniteLikelihood { k: usize, t: usize, lambda: f64 },

    #[error(
        "unstable process: intensity {lambda:.3e} exceeds ceiling {ceiling:.3e} \
         at dimension {k}, time {t}"
    )]
    UnstableProcess {
        k: usize,
        t: usize,
        lambda: f64,
        ceiling: f64,
    },

    #[error("chain initialisation failed after {retries} prior draws (non-finite likelihood)")]
    InitializationFailed { retries: u32 },

    #[error("chain {chain} failed: {source}")]
    ChainFailed {
        chain: usize,
        #[source]
        source: Box<DthpError>,
    },

    #[error("empty trace")]
    EmptyTrace,

    #[error("trace/truth s_max mismatch: {left} vs {right}")]
    SmaxMismatch { left: u32, right: u32 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("data error at row {row}: {message}")]
    DataRow { row: usize, message: String },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
