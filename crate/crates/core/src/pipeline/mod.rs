//! Batch orchestration: configuration, auction-log ingest, account-level
//! inference and plot-ready exports.

mod account;
mod config;
mod export;
mod log;

pub use account::{
    infer_account, AccountArtifacts, AccountSummary, HistogramBucket, ListingArtifact, ListingFailure,
    ScatterPoint, ShadingEntry,
};
pub use config::{simulation_setup, Config, InferenceSettings};
pub use export::{export, read_artifacts, write_artifacts, write_rate_study};
pub use log::{ingest, read_histories, write_log, AuctionLogRecord, CompetitorRecord, ListingHeader};

use std::path::PathBuf;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::inference::InferenceError;
use crate::market::MarketError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: field `{field}`: {message}")]
    Field {
        line: usize,
        field: String,
        message: String,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("unsupported log format `{0}`")]
    Format(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl PipelineError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.into(),
            source,
        }
    }
}
