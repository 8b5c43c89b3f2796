use serde::{Deserialize, Serialize};

use crate::asset::IndexedMesh;

/// Fixed container overhead assumed by the mesh-size estimator.
pub const MESH_HEADER_BYTES: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeReport {
    pub texture_bytes: u64,
    pub mesh_bytes: u64,
    pub total_bytes: u64,
}

impl SizeReport {
    pub fn new(texture_bytes: u64, mesh_bytes: u64) -> Self {
        Self {
            texture_bytes,
            mesh_bytes,
            total_bytes: texture_bytes + mesh_bytes,
        }
    }
}

/// Upper-bound proxy for an entropy-coded mesh stream: fixed-width quantized attributes,
/// two bits of connectivity per triangle and a fixed header.
pub fn estimate_mesh_bytes(mesh: &IndexedMesh, qp: u8, qt: u8) -> u64 {
    mesh_bytes_for_counts(
        mesh.positions.len() as u64,
        mesh.uvs.len() as u64,
        mesh.triangles.len() as u64,
        qp,
        qt,
    )
}

pub fn mesh_bytes_for_counts(v: u64, vuv: u64, f: u64, qp: u8, qt: u8) -> u64 {
    (v * 3 * qp as u64).div_ceil(8) + (vuv * 2 * qt as u64).div_ceil(8) + (f * 2).div_ceil(8) + MESH_HEADER_BYTES
}
