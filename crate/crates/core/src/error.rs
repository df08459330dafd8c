use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bad IDX magic: expected {expected}, found {found}")]
    BadMagic { expected: u32, found: u32 },

    #[error("truncated IDX payload: header promises {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("label {label} at index {index} is outside [0, 9]")]
    LabelOutOfRange { index: usize, label: u8 },

    #[error("requested subset of {requested} examples but only {available} are available")]
    SubsetTooLarge { requested: usize, available: usize },

    #[error("shape mismatch in {what}: expected {expected}, got {got}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("dropout rate {0} is outside [0, 1)")]
    RateOutOfRange(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("test set is empty")]
    EmptyTestSet,

    #[error("need 0 < mod_hz ({mod_hz}) < carrier_hz ({carrier_hz}) < sample_rate/2 ({nyquist})")]
    NyquistViolation {
        carrier_hz: f64,
        mod_hz: f64,
        nyquist: f64,
    },

    #[error("segment length {segment} is not a power of two no longer than the signal ({samples} samples)")]
    SegmentTooLong { segment: usize, samples: usize },

    #[error("no spectrum bin within {tolerance_hz} Hz of {signal_hz} Hz")]
    SignalBinMissing { signal_hz: f64, tolerance_hz: f64 },

    #[error("refusing to write empty data to {0}")]
    EmptyData(PathBuf),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
