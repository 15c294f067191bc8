use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the image, segmentation, inpainting, mesh and render
/// operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    NotFound(PathBuf),

    #[error("cannot decode image {}: {reason}", path.display())]
    Decode { path: PathBuf, reason: String },

    #[error("image has zero width or height ({width}x{height})")]
    ZeroDimension { width: u32, height: u32 },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("pixel buffer holds {actual} bytes, expected {expected}")]
    BufferSize { expected: usize, actual: usize },

    #[error("dimension mismatch: expected {expected_w}x{expected_h}, got {actual_w}x{actual_h}")]
    DimensionMismatch {
        expected_w: u32,
        expected_h: u32,
        actual_w: u32,
        actual_h: u32,
    },

    #[error("click ({x}, {y}) lies outside the {width}x{height} image")]
    ClickOutOfBounds { x: u32, y: u32, width: u32, height: u32 },

    #[error("pixel ({x}, {y}) is both a positive and a negative click")]
    ConflictingClick { x: u32, y: u32 },

    #[error("at least one positive click is required")]
    NoPositiveClick,

    #[error("clicks conflict: a negative click shares a region with a positive click")]
    ClicksConflict,

    #[error("image is {width}x{height}, smaller than the {min}x{min} kernel")]
    ImageTooSmall { width: u32, height: u32, min: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("k = {k} exceeds the pixel count {pixels}")]
    TooManyClusters { k: usize, pixels: usize },

    #[error("hole covers the whole image, no boundary data to fill from")]
    NoBoundaryData,

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh topology differs from the rest mesh")]
    TopologyMismatch,

    #[error("no frames to encode")]
    EmptyClip,

    #[error("frame index exceeds padding: {count} frames, at most {max} supported")]
    FrameIndexOverflow { count: usize, max: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
