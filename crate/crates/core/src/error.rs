use std::io;

use thiserror::Error;

/// Errors produced by the codec stages.
///
/// Every variant has a stable machine-readable name (see [`Error::name`])
/// which the command-line frontend prints so scripts can branch on it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed image file: {0}")]
    MalformedFormat(String),

    #[error("unsupported sample depth: maxval {0} (only 255 is accepted)")]
    UnsupportedDepth(u32),

    #[error("image is {width}x{height}; both sides must be multiples of 4 and at least 8")]
    DimensionError { width: usize, height: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("prediction-error planes disagree with the overflow map at pixel {index}")]
    InconsistentLabels { index: usize },

    #[error("reconstructed sample {value} at pixel {index} is outside 0..=255")]
    RangeError { index: usize, value: i32 },

    #[error("label map has {got} entries, plane has {expected} classifiable blocks")]
    LabelLengthMismatch { expected: usize, got: usize },

    #[error("arithmetic code exhausted after {decoded} of {expected} symbols")]
    DecodeOverrun { decoded: usize, expected: usize },

    #[error("no bit plane can hold its auxiliary record together with the global record")]
    CapacityError,

    #[error("layout does not match the plane set: {0}")]
    LayoutMismatch(String),

    #[error("auxiliary data is malformed: {0}")]
    MalformedAux(String),

    #[error("container version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u8, expected: u8 },

    #[error("payload needs {needed} bits but only {available} are available")]
    CapacityExceeded { needed: usize, available: usize },

    #[error("decrypted payload length {bits} bits is out of range (capacity {capacity} bits)")]
    PrefixOutOfRange { bits: u64, capacity: usize },

    #[error("invalid key: {0}")]
    InvalidKey(String),

    #[error("round-trip check failed: {0}")]
    CycleMismatch(String),
}

impl Error {
    /// Stable identifier used in CLI diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::MalformedFormat(_) => "MalformedFormat",
            Error::UnsupportedDepth(_) => "UnsupportedDepth",
            Error::DimensionError { .. } => "DimensionError",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::Io(_) => "IoError",
            Error::InconsistentLabels { .. } => "InconsistentLabels",
            Error::RangeError { .. } => "RangeError",
            Error::LabelLengthMismatch { .. } => "LabelLengthMismatch",
            Error::DecodeOverrun { .. } => "DecodeOverrun",
            Error::CapacityError => "CapacityError",
            Error::LayoutMismatch(_) => "LayoutMismatch",
            Error::MalformedAux(_) => "MalformedAux",
            Error::VersionMismatch { .. } => "VersionMismatch",
            Error::CapacityExceeded { .. } => "CapacityExceeded",
            Error::PrefixOutOfRange { .. } => "PrefixOutOfRange",
            Error::InvalidKey(_) => "InvalidKey",
            Error::CycleMismatch(_) => "CycleMismatch",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
