use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    estimate_mesh_bytes, quantize_positions, quantize_uvs, resample_texture, simplify_levels, simplify_qem,
    DistortionError, DistortionSpec, SizeReport,
};
use crate::asset::{decode_jpeg, encode_jpeg, IndexedMesh, TextureImage};

/// Order in which the five distortions are applied, as recorded in manifests.
pub const PIPELINE_ORDER: &str = "lod,qp,qt,ts,tq";
pub const CHROMA_SUBSAMPLING: &str = "4:2:0";
pub const POSITION_RANGE_RULE: &str = "longest-aabb-extent";

#[derive(Debug, Clone, PartialEq)]
pub struct HrcOutput {
    pub mesh: IndexedMesh,
    /// The decoded JPEG, i.e. the texture a viewer would see.
    pub texture: TextureImage,
    pub jpeg: Vec<u8>,
    pub size: SizeReport,
}

fn check_texture(texture: &TextureImage) -> Result<(), DistortionError> {
    if texture.width() != texture.height() {
        return Err(DistortionError::NonSquareTexture {
            width: texture.width(),
            height: texture.height(),
        });
    }
    Ok(())
}

/// Geometry half of an HRC applied to an already simplified mesh.
pub fn quantize_mesh(simplified: &IndexedMesh, qp: u8, qt: u8) -> Result<(IndexedMesh, u64), DistortionError> {
    let q = quantize_positions(simplified, qp)?.mesh;
    let q = quantize_uvs(&q, qt)?;
    let bytes = estimate_mesh_bytes(&q, qp, qt);
    Ok((q, bytes))
}

/// Texture half of an HRC: Lanczos resize then a JPEG round trip.
pub fn distort_texture(texture: &TextureImage, ts: u32, tq: u8) -> Result<(TextureImage, Vec<u8>), DistortionError> {
    check_texture(texture)?;
    let resized = resample_texture(&texture.to_rgb(), ts);
    let jpeg = encode_jpeg(&resized, tq)?;
    let decoded = decode_jpeg(&jpeg)?;
    Ok((decoded, jpeg))
}

/// Applies simplification, position quantization, UV quantization, resampling and JPEG
/// compression, in that order.
pub fn apply_hrc(mesh: &IndexedMesh, texture: &TextureImage, spec: DistortionSpec) -> Result<HrcOutput, DistortionError> {
    check_texture(texture)?;
    let simplified = simplify_qem(mesh, spec.lod)?;
    let (mesh, mesh_bytes) = quantize_mesh(&simplified, spec.qp, spec.qt)?;
    let (texture, jpeg) = distort_texture(texture, spec.ts, spec.tq)?;
    let size = SizeReport::new(jpeg.len() as u64, mesh_bytes);
    Ok(HrcOutput {
        mesh,
        texture,
        jpeg,
        size,
    })
}

#[derive(Debug, Clone)]
pub struct MeshVariant {
    pub lod: u8,
    pub qp: u8,
    pub qt: u8,
    pub mesh: IndexedMesh,
    pub mesh_bytes: u64,
}

#[derive(Debug, Clone)]
pub struct TextureVariant {
    pub ts: u32,
    pub tq: u8,
    pub jpeg: Vec<u8>,
}

/// Every (lod, qp, qt) combination, sharing one simplification run across the ten levels.
/// Identical to the geometry produced by [`apply_hrc`] for the same parameters.
pub fn mesh_variants(mesh: &IndexedMesh, qps: &[u8], qts: &[u8]) -> Result<Vec<MeshVariant>, DistortionError> {
    let levels = simplify_levels(mesh)?;
    let jobs: Vec<(u8, u8, u8)> = (1..=levels.len() as u8)
        .flat_map(|l| qps.iter().flat_map(move |&qp| qts.iter().map(move |&qt| (l, qp, qt))))
        .collect();
    jobs.par_iter()
        .map(|&(lod, qp, qt)| {
            let (mesh, mesh_bytes) = quantize_mesh(&levels[lod as usize - 1], qp, qt)?;
            Ok(MeshVariant {
                lod,
                qp,
                qt,
                mesh,
                mesh_bytes,
            })
        })
        .collect()
}

/// Every (ts, tq) combination, resizing once per side.
pub fn texture_variants(texture: &TextureImage, sides: &[u32], qualities: &[u8]) -> Result<Vec<TextureVariant>, DistortionError> {
    check_texture(texture)?;
    let rgb = texture.to_rgb();
    let resized: Vec<(u32, TextureImage)> = sides.par_iter().map(|&s| (s, resample_texture(&rgb, s))).collect();
    let jobs: Vec<(usize, u8)> = (0..resized.len())
        .flat_map(|i| qualities.iter().map(move |&q| (i, q)))
        .collect();
    jobs.par_iter()
        .map(|&(i, tq)| {
            let (ts, img) = &resized[i];
            Ok(TextureVariant {
                ts: *ts,
                tq,
                jpeg: encode_jpeg(img, tq)?,
            })
        })
        .collect()
}

/// One generated stimulus in a batch manifest (one JSON object per line).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub model_id: String,
    pub lod: u8,
    pub qp: u8,
    pub qt: u8,
    pub ts: u32,
    pub tq: u8,
    pub texture_bytes: u64,
    pub mesh_bytes: u64,
    pub total_bytes: u64,
    pub mesh_path: String,
    pub texture_path: String,
    pub pipeline_order: String,
    pub chroma_subsampling: String,
    pub position_range: String,
}

impl ManifestRow {
    pub fn new(model_id: &str, spec: DistortionSpec, size: SizeReport, mesh_path: String, texture_path: String) -> Self {
        Self {
            model_id: model_id.to_owned(),
            lod: spec.lod,
            qp: spec.qp,
            qt: spec.qt,
            ts: spec.ts,
            tq: spec.tq,
            texture_bytes: size.texture_bytes,
            mesh_bytes: size.mesh_bytes,
            total_bytes: size.total_bytes,
            mesh_path,
            texture_path,
            pipeline_order: PIPELINE_ORDER.to_owned(),
            chroma_subsampling: CHROMA_SUBSAMPLING.to_owned(),
            position_range: POSITION_RANGE_RULE.to_owned(),
        }
    }

    pub fn spec(&self) -> Result<DistortionSpec, DistortionError> {
        DistortionSpec::new(self.lod, self.qp, self.qt, self.ts, self.tq)
    }
}
