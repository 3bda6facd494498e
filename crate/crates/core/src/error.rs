use thiserror::Error;

use crate::image::PixelKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("decode error at byte {offset}: {message}")]
    Decode { offset: usize, message: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("expected a {expected:?} image, got {found:?}")]
    KindMismatch { expected: PixelKind, found: PixelKind },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unknown color '{name}'; valid names: {}", valid.join(", "))]
    UnknownColor { name: String, valid: Vec<String> },

    #[error("invalid color table: {0}")]
    ColorTable(String),

    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),

    #[error("need at least {needed} correspondences, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("homography estimation failed: {0}")]
    EstimationFailure(String),

    #[error("point {index} maps to infinity (w = {w:e})")]
    PointAtInfinity { index: usize, w: f64 },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn decode(offset: usize, message: impl Into<String>) -> Self {
        Error::Decode {
            offset,
            message: message.into(),
        }
    }

    pub(crate) fn param(message: impl Into<String>) -> Self {
        Error::Parameter(message.into())
    }
}
