use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Warc(#[from] crate::corpus::warc::WarcError),

    #[error("{0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Csv(#[from] csv::Error),

    #[error("manifest schema version mismatch: file has {found}, expected {expected}")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("duplicate example id `{0}`")]
    DuplicateId(String),

    #[error("malformed manifest at line {line}: {reason}")]
    Manifest { line: usize, reason: String },

    #[error("no <table> element found")]
    NoTable,

    #[error("render failed for {example_id}: {reason}")]
    RenderFailed {
        example_id: String,
        reason: RenderFailure,
        stderr: String,
    },

    #[error("image error: {0}")]
    Image(String),

    #[error("model configuration error: {0}")]
    ModelConfig(String),

    #[error("inference error: {0}")]
    Inference(String),

    #[error("invalid training data: {0}")]
    InvalidData(String),

    #[error("feature column `{0}` contains NaN")]
    NanFeature(String),

    #[error("dimension mismatch: model expects {expected} features, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("training diverged (loss is NaN at epoch {epoch}); try a smaller learning rate")]
    Diverged { epoch: usize },

    #[error("model file version {found} is not supported (expected {expected})")]
    ModelVersion { found: u32, expected: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RenderFailure {
    Timeout,
    ExitStatus(Option<i32>),
    EmptyOutput,
    Spawn(String),
}

impl std::fmt::Display for RenderFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RenderFailure::Timeout => f.write_str("timeout"),
            RenderFailure::ExitStatus(Some(code)) => write!(f, "renderer exited with status {code}"),
            RenderFailure::ExitStatus(None) => f.write_str("renderer killed by signal"),
            RenderFailure::EmptyOutput => f.write_str("renderer produced no image"),
            RenderFailure::Spawn(msg) => write!(f, "could not start renderer: {msg}"),
        }
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
