use std::path::PathBuf;

use thiserror::Error;

/// Pipeline stage tags attached to errors surfaced by [`crate::pipeline::run_pipeline`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Scene,
    Alignment,
    Joint,
    Output,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Stage::Scene => "scene",
            Stage::Alignment => "alignment",
            Stage::Joint => "joint",
            Stage::Output => "output",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {index} has non-positive depth {depth}")]
    NonPositiveDepth { index: usize, depth: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("empty point set")]
    EmptySet,
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("insufficient overlap: {found} usable pixels, need {needed}")]
    InsufficientOverlap { found: usize, needed: usize },
    #[error("no consensus: best inlier fraction {best_fraction:.3} below {required:.3}")]
    NoConsensus { best_fraction: f64, required: f64 },
    #[error("too few points: {found}, need {needed}")]
    TooFewPoints { found: usize, needed: usize },
    #[error("insufficient pixels for focal estimate: {found}, need {needed}")]
    InsufficientPixels { found: usize, needed: usize },
    #[error("scene point cloud is empty")]
    EmptyScene,
    #[error("non-finite gradient")]
    NonFiniteGradient,
    #[error("non-finite loss")]
    NonFiniteLoss,
    #[error("invariant violated in `{field}`: {detail}")]
    InvariantViolation { field: String, detail: String },
    #[error("parse error in {context}: {detail}")]
    Parse { context: String, detail: String },
    #[error("raster alignment mismatch: {0}")]
    AlignmentMismatch(String),
    #[error("missing component `{0}`")]
    MissingComponent(String),
    #[error("cardinality mismatch: {0}")]
    CardinalityMismatch(String),
    #[error("bundle validation failed: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    Validation(Vec<Error>),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{stage} stage: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn parse(context: impl Into<String>, detail: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            detail: detail.to_string(),
        }
    }

    pub fn invariant(field: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::InvariantViolation {
            field: field.into(),
            detail: detail.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: Stage) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True for errors caused by malformed or inconsistent inputs rather than
    /// failures during computation.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Parse { .. }
            | Error::InvariantViolation { .. }
            | Error::AlignmentMismatch(_)
            | Error::MissingComponent(_)
            | Error::CardinalityMismatch(_)
            | Error::Validation(_) => true,
            Error::Io { source, .. } => source.kind() == std::io::ErrorKind::NotFound,
            Error::Stage { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
