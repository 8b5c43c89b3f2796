use ndarray::Array3;
use serde::{Deserialize, Serialize};

use super::GlpipsError;
use crate::asset::{CoverageMask, TextureImage};

pub const PATCH_SIZE: u32 = 64;
pub const PATCH_STRIDE: u32 = 32;
/// Minimum fraction of covered pixels for a patch to be retained.
pub const MIN_COVERAGE: f64 = 0.65;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    pub x: u32,
    pub y: u32,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchSet {
    pub patches: Vec<Patch>,
}

impl PatchSet {
    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }
}

/// Grid positions every 32 px whose 64x64 window lies inside the image and is at least 65%
/// covered by the mask.
pub fn patchify(image: &TextureImage, mask: &CoverageMask) -> Result<PatchSet, GlpipsError> {
    let (w, h) = (image.width(), image.height());
    if w < PATCH_SIZE || h < PATCH_SIZE {
        return Err(GlpipsError::ImageTooSmall { width: w, height: h });
    }
    if !mask.matches(image) {
        return Err(GlpipsError::ShapeMismatch);
    }
    // Summed-area table of covered pixels.
    let wi = w as usize + 1;
    let mut sat = vec![0u32; wi * (h as usize + 1)];
    for y in 0..h as usize {
        let mut row = 0;
        for x in 0..w as usize {
            row += mask.get(x as u32, y as u32) as u32;
            sat[(y + 1) * wi + x + 1] = sat[y * wi + x + 1] + row;
        }
    }
    let area = (PATCH_SIZE * PATCH_SIZE) as f64;
    let mut patches = Vec::new();
    for y in (0..=h - PATCH_SIZE).step_by(PATCH_STRIDE as usize) {
        for x in (0..=w - PATCH_SIZE).step_by(PATCH_STRIDE as usize) {
            let (x0, y0, x1, y1) = (x as usize, y as usize, (x + PATCH_SIZE) as usize, (y + PATCH_SIZE) as usize);
            let covered = sat[y1 * wi + x1] + sat[y0 * wi + x0] - sat[y0 * wi + x1] - sat[y1 * wi + x0];
            let coverage = covered as f64 / area;
            if coverage >= MIN_COVERAGE {
                patches.push(Patch { x, y, coverage });
            }
        }
    }
    if patches.is_empty() {
        return Err(GlpipsError::EmptyPatchSet);
    }
    Ok(PatchSet { patches })
}

/// A `(3, 64, 64)` tensor of the patch with pixels mapped to `[-1, 1]`.
pub fn patch_tensor(image: &TextureImage, patch: &Patch) -> Array3<f32> {
    let rgb = image.to_rgb();
    let (ps, w) = (PATCH_SIZE as usize, rgb.width() as usize);
    let data = rgb.data();
    Array3::from_shape_fn((3, ps, ps), |(c, y, x)| {
        let i = ((patch.y as usize + y) * w + patch.x as usize + x) * 3 + c;
        data[i] as f32 / 127.5 - 1.0
    })
}
