//! Mesh and image assets: OBJ/MTL, PPM/PGM, and the baseline JPEG codec.

mod image;
pub mod jpeg;
mod mesh;
mod obj;

pub use image::{decode_image, encode_ppm, ColorSpace, CoverageMask, TextureImage};
pub use jpeg::{decode_jpeg, encode_jpeg, encode_jpeg_with_restarts};
pub use mesh::{Aabb, Corner, IndexedMesh, ValidationReport};
pub(crate) use mesh::{cross, dot, norm, sub};
pub use obj::{parse_mtl, parse_obj, write_obj, Material};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AssetError {
    #[error("malformed statement on line {line}")]
    MalformedStatement { line: usize },
    #[error("index out of range on line {line}")]
    IndexOutOfRange { line: usize },
    #[error("unsupported image format")]
    UnsupportedFormat,
    #[error("truncated stream")]
    TruncatedStream,
    #[error("invalid image dimensions {width}x{height}")]
    InvalidDimensions { width: u32, height: u32 },
    #[error("invalid channel count {0}; expected 1 or 3")]
    InvalidChannels(u8),
    #[error("sample buffer has {actual} bytes, expected {expected}")]
    DataLength { expected: usize, actual: usize },
    #[error("JPEG quality {0} outside 1..=100")]
    InvalidQuality(u8),
    #[error("unsupported JPEG feature: {0}")]
    UnsupportedJpegFeature(&'static str),
}
