//! Software rasterizer for stimulus frames and coverage masks.
//!
//! World space is Y-up. A viewpoint at azimuth 0 and elevation 0 looks from +Z towards the
//! model's bounding-sphere center. Triangles are two-sided and drawn with the top-left fill
//! rule into a z-buffer with a strict `<` test in triangle order, so coplanar ties go to the
//! lower triangle index.

mod camera;
mod config;
mod mip;
mod raster;

pub use camera::{
    bounding_sphere, focal_length, frame_model, framing_distance, ring_viewpoints, BoundingSphere, Camera,
    Viewpoint, FRAME_FILL,
};
pub use config::{Albedo, Material, RenderConfig};
pub use mip::{build_mipchain, MipChain, MipLevel};
pub use raster::{render, render_with_mips};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RenderError {
    #[error("mesh has faces without texture coordinates")]
    NoUVs,
    #[error("mesh has no renderable geometry")]
    EmptyMesh,
    #[error("invalid render configuration: {0}")]
    InvalidConfig(String),
}
