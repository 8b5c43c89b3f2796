//! Baseline JPEG: a 4:2:0 encoder with the Annex K tables and a sequential Huffman decoder.

mod decoder;
mod encoder;
pub mod tables;

use super::{AssetError, TextureImage};

pub(crate) struct HuffmanSpec {
    pub bits: [u8; 16],
    pub values: &'static [u8],
}

impl HuffmanSpec {
    pub fn dc_luma() -> Self {
        Self {
            bits: tables::DC_LUMA_BITS,
            values: &tables::DC_VALUES,
        }
    }

    pub fn dc_chroma() -> Self {
        Self {
            bits: tables::DC_CHROMA_BITS,
            values: &tables::DC_VALUES,
        }
    }

    pub fn ac_luma() -> Self {
        Self {
            bits: tables::AC_LUMA_BITS,
            values: &tables::AC_LUMA_VALUES,
        }
    }

    pub fn ac_chroma() -> Self {
        Self {
            bits: tables::AC_CHROMA_BITS,
            values: &tables::AC_CHROMA_VALUES,
        }
    }
}

/// Encodes a baseline JFIF stream. RGB input is stored as YCbCr with 4:2:0 chroma
/// subsampling; gray input is a single-component frame. `quality` must be in `1..=100`.
pub fn encode_jpeg(image: &TextureImage, quality: u8) -> Result<Vec<u8>, AssetError> {
    encoder::encode(image, quality, 0)
}

/// Same as [`encode_jpeg`] but emits a restart marker every `interval` MCUs.
pub fn encode_jpeg_with_restarts(image: &TextureImage, quality: u8, interval: u16) -> Result<Vec<u8>, AssetError> {
    encoder::encode(image, quality, interval)
}

/// Decodes baseline (and extended 8-bit Huffman) sequential JPEG with any sampling factors
/// and restart intervals. Progressive, lossless, hierarchical and arithmetic-coded
/// streams are rejected with [`AssetError::UnsupportedJpegFeature`].
pub fn decode_jpeg(bytes: &[u8]) -> Result<TextureImage, AssetError> {
    decoder::decode(bytes)
}
