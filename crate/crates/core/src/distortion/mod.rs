//! Compression-style distortions of textured meshes and their size accounting.

mod hrc;
mod qem;
mod quantize;
mod resample;
mod size;
mod spec;

pub use hrc::{
    apply_hrc, distort_texture, mesh_variants, quantize_mesh, texture_variants, HrcOutput, ManifestRow, MeshVariant,
    TextureVariant, CHROMA_SUBSAMPLING, PIPELINE_ORDER, POSITION_RANGE_RULE,
};
pub use qem::{simplify_levels, simplify_qem, target_faces, LEVELS, MIN_FACES};
pub use quantize::{quantize_positions, quantize_uvs, Quantized};
pub use resample::resample_texture;
pub use size::{estimate_mesh_bytes, mesh_bytes_for_counts, SizeReport, MESH_HEADER_BYTES};
pub use spec::{enumerate_hrcs, DistortionSpec, LOD_LEVELS, QP_LEVELS, QT_LEVELS, TQ_LEVELS, TS_LEVELS};

use crate::asset::AssetError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DistortionError {
    #[error("mesh has {faces} faces; simplification needs more than 2000")]
    TooFewFaces { faces: usize },
    #[error("simplification stalled at {reached} faces (target {target})")]
    TargetUnreachable { target: usize, reached: usize },
    #[error("mesh has triangles without texture coordinates")]
    NoUVs,
    #[error("mesh has out-of-range indices")]
    InvalidMesh,
    #[error("invalid distortion level: {0}")]
    InvalidLevel(String),
    #[error("texture must be square, got {width}x{height}")]
    NonSquareTexture { width: u32, height: u32 },
    #[error(transparent)]
    Asset(#[from] AssetError),
}
