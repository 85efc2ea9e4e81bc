//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by analysis, synthesis, and evaluation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed wav file {path}: {reason}")]
    WavFormat { path: PathBuf, reason: String },

    #[error("unsupported wav encoding in {path}: {reason}")]
    UnsupportedWav { path: PathBuf, reason: String },

    #[error("audio stream contains no samples")]
    EmptyAudio,

    #[error("non-finite sample at index {0}")]
    NonFiniteSample(usize),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("frame length {frame_len} exceeds signal length {signal_len}")]
    FrameTooLong { frame_len: usize, signal_len: usize },

    #[error("frame too short for analysis: {len} samples, need at least {min}")]
    FrameTooShort { len: usize, min: usize },

    /// Silent or otherwise rank-deficient frame: LPC has nothing to model.
    #[error("degenerate frame: zero or non-finite energy")]
    DegenerateFrame,

    #[error("unstable filter: {0}")]
    UnstableFilter(String),

    #[error("no voiced frames found")]
    NoVoicedFrames,

    #[error("found {found} harmonics below {limit_hz} Hz, need at least {min}")]
    TooFewHarmonics {
        found: usize,
        min: usize,
        limit_hz: f64,
    },

    #[error("sample too small for rank-sum test: n1={n1}, n2={n2} (need at least 2 each)")]
    UndersizedSample { n1: usize, n2: usize },

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("all {0} corpus rows failed")]
    AllRowsFailed(usize),

    #[error("effort class {0} has too few usable results")]
    MissingClass(String),
}

impl Error {
    /// Whether the error stems from user input (files, formats, CLI
    /// parameters) as opposed to a numerical failure inside the analysis
    /// chain. Drives the process exit code of the command-line tool.
    pub fn is_user_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::WavFormat { .. }
                | Error::UnsupportedWav { .. }
                | Error::EmptyAudio
                | Error::InvalidParam(_)
                | Error::FrameTooLong { .. }
                | Error::Manifest(_)
                | Error::UndersizedSample { .. }
                | Error::MissingClass(_)
        )
    }
}
