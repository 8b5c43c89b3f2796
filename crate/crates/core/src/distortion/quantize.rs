use super::DistortionError;
use crate::asset::IndexedMesh;

#[derive(Debug, Clone, PartialEq)]
pub struct Quantized {
    pub mesh: IndexedMesh,
    /// Set when the grid range was zero and coordinates were left unchanged.
    pub degenerate_range: bool,
}

fn snap(c: f64, min: f64, range: f64, steps: f64) -> f64 {
    let k = ((c - min) / range * steps).round();
    min + k * range / steps
}

fn check_bits(bits: u8, allowed: std::ops::RangeInclusive<u8>, what: &str) -> Result<f64, DistortionError> {
    if !allowed.contains(&bits) {
        return Err(DistortionError::InvalidLevel(format!("{what} {bits}")));
    }
    Ok(((1u32 << bits) - 1) as f64)
}

/// Snaps positions to a uniform grid of `2^qp - 1` steps anchored at the per-axis minimum,
/// spaced by the longest bounding-box extent on every axis.
pub fn quantize_positions(mesh: &IndexedMesh, qp: u8) -> Result<Quantized, DistortionError> {
    let steps = check_bits(qp, 7..=11, "qp")?;
    let Some(aabb) = mesh.aabb() else {
        return Ok(Quantized {
            mesh: mesh.clone(),
            degenerate_range: true,
        });
    };
    let range = aabb.longest_extent();
    if range == 0.0 {
        log::warn!("position range is zero; positions left unquantized");
        return Ok(Quantized {
            mesh: mesh.clone(),
            degenerate_range: true,
        });
    }
    let mut out = mesh.clone();
    for p in out.positions.iter_mut() {
        for (v, &lo) in p.iter_mut().zip(&aabb.min) {
            *v = snap(*v, lo, range, steps);
        }
    }
    Ok(Quantized {
        mesh: out,
        degenerate_range: false,
    })
}

/// Clamps texture coordinates to the unit square and snaps them to `2^qt - 1` steps.
pub fn quantize_uvs(mesh: &IndexedMesh, qt: u8) -> Result<IndexedMesh, DistortionError> {
    let steps = check_bits(qt, 6..=10, "qt")?;
    let mut out = mesh.clone();
    for t in out.uvs.iter_mut() {
        for c in t.iter_mut() {
            *c = snap(c.clamp(0.0, 1.0), 0.0, 1.0, steps);
        }
    }
    Ok(out)
}
