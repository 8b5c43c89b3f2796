//! Textured-mesh quality assessment: asset I/O, distortion generation, rendering,
//! content characterization, a learned patch metric, and evaluation statistics.

pub mod asset;
pub mod characterize;
pub mod distortion;
pub mod fixtures;
pub mod glpips;
pub mod render;
pub mod stats;

pub use asset::{AssetError, CoverageMask, IndexedMesh, TextureImage};
pub use distortion::{DistortionError, DistortionSpec, ManifestRow};
pub use glpips::{GlpipsError, QualityModel, TrainConfig};
pub use render::{RenderConfig, RenderError, Viewpoint};
pub use stats::{MosRecord, StatsError, VoteRecord};
