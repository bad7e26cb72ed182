//! The error type shared by the dataset pipelines and the CLI.

use std::path::PathBuf;

use hazealign_core::image::Channel;

use crate::io::IoError;
use crate::manifest::ManifestError;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Stats(#[from] hazealign_core::StatsError),
    #[error(transparent)]
    Gamma(#[from] hazealign_core::GammaError),
    #[error(transparent)]
    Metric(#[from] hazealign_core::MetricError),
    #[error(transparent)]
    Augment(#[from] hazealign_core::AugmentError),
    #[error(transparent)]
    Image(#[from] hazealign_core::ImageError),
    #[error("{subset} channel {channel}: {source}")]
    UnachievableChannel {
        subset: &'static str,
        channel: Channel,
        source: hazealign_core::GammaError,
    },
    #[error("output directory {0} exists and is not empty")]
    OutputDirNotEmpty(PathBuf),
    #[error("no records selected: {0}")]
    EmptySelection(String),
    #[error("missing prediction for pair {id:?} (expected {path})")]
    MissingPrediction { id: String, path: PathBuf },
    #[error("pair {id:?}: {source}")]
    PairMetric {
        id: String,
        source: hazealign_core::MetricError,
    },
    #[error("cannot write {path}: {source}")]
    WriteFile {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot read {path}: {source}")]
    ReadFile {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    PlanParse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
}

impl PipelineError {
    /// A flag/argument validation failure, reported as a single line.
    pub fn usage(message: impl Into<String>) -> Self {
        PipelineError::Usage(message.into())
    }
}
