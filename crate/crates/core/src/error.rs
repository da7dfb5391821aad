use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed record at line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("missing required key `{key}` at line {line}")]
    MissingKey { line: usize, key: &'static str },

    #[error("vad out of range at line {line}")]
    VadOutOfRange { line: usize },

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("vad component out of range [0,1]: {0}")]
    InvalidVad(f64),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),

    #[error("wav decode failed: {0}")]
    Wav(#[from] hound::Error),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no neutral records (label `{0}`)")]
    NoNeutralRecords(String),

    #[error("emotion class `{emotion}` has {count} records, at least {required} required")]
    TooFewRecords {
        emotion: String,
        count: usize,
        required: usize,
    },

    #[error("degenerate interquartile bounds for class `{0}` (r_min == r_max)")]
    DegenerateBounds(String),

    #[error("unknown emotion class `{0}`")]
    UnknownEmotion(String),

    #[error("unknown intensity label `{0}` (expected weak, medium or strong)")]
    UnknownIntensityLabel(String),

    #[error("unknown style octant `{0}` (expected I..VIII)")]
    UnknownOctant(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("zero-norm vector")]
    ZeroNorm,

    #[error("degenerate radius: point coincides with the center, angle undefined")]
    DegenerateRadius,

    #[error("audio too short: {samples} samples, need at least {required}")]
    AudioTooShort { samples: usize, required: usize },

    #[error("frame count mismatch: {left} vs {right}")]
    FrameCountMismatch { left: usize, right: usize },

    #[error("no frame is voiced in both tracks")]
    NoCommonVoicedFrames,

    #[error("reference track is entirely unvoiced, F1 undefined")]
    ReferenceUnvoiced,

    #[error("id `{0}` not found in manifest")]
    UnresolvedId(String),

    #[error("missing prosody for id `{0}`")]
    MissingProsody(String),

    #[error("{what}: {reason}")]
    Parse { what: String, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(what: impl Into<String>, reason: impl std::fmt::Display) -> Self {
        Error::Parse {
            what: what.into(),
            reason: reason.to_string(),
        }
    }
}
