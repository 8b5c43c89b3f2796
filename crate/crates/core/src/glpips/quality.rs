use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::extractor::FeatureExtractor;
use super::model::{check_compatible, head_distance, layer_errors, LayerErrors, QualityModel};
use super::patches::{patch_tensor, patchify, PatchSet};
use super::GlpipsError;
use crate::asset::{CoverageMask, TextureImage};

/// Patch grid of one stimulus pair with the head-independent errors of every patch.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchErrors {
    pub patches: PatchSet,
    pub errors: Vec<LayerErrors>,
}

/// Runs the extractor on every retained patch of both images.
pub fn patch_errors(
    reference: &TextureImage,
    distorted: &TextureImage,
    mask: &CoverageMask,
    extractor: &dyn FeatureExtractor,
) -> Result<PatchErrors, GlpipsError> {
    if (reference.width(), reference.height()) != (distorted.width(), distorted.height()) {
        return Err(GlpipsError::ShapeMismatch);
    }
    let patches = patchify(reference, mask)?;
    let (r, d) = (reference.to_rgb(), distorted.to_rgb());
    let errors = patches
        .patches
        .par_iter()
        .map(|p| {
            let fa = extractor.features(patch_tensor(&r, p).view())?;
            let fb = extractor.features(patch_tensor(&d, p).view())?;
            layer_errors(&fa, &fb)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PatchErrors { patches, errors })
}

/// How patch distances are pooled into an image score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Pooling {
    #[default]
    Mean,
    L2,
    L3,
    Max,
}

pub fn pool(distances: &[f64], pooling: Pooling) -> Result<f64, GlpipsError> {
    if distances.is_empty() {
        return Err(GlpipsError::EmptyPatchSet);
    }
    let n = distances.len() as f64;
    Ok(match pooling {
        Pooling::Mean => distances.iter().sum::<f64>() / n,
        Pooling::L2 => (distances.iter().map(|d| d * d).sum::<f64>() / n).sqrt(),
        Pooling::L3 => (distances.iter().map(|d| d.powi(3)).sum::<f64>() / n).cbrt(),
        Pooling::Max => distances.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Mean patch distance over every retained patch.
pub fn image_quality(
    reference: &TextureImage,
    distorted: &TextureImage,
    mask: &CoverageMask,
    extractor: &dyn FeatureExtractor,
    model: &QualityModel,
) -> Result<f64, GlpipsError> {
    image_quality_pooled(reference, distorted, mask, extractor, model, Pooling::Mean)
}

pub fn image_quality_pooled(
    reference: &TextureImage,
    distorted: &TextureImage,
    mask: &CoverageMask,
    extractor: &dyn FeatureExtractor,
    model: &QualityModel,
    pooling: Pooling,
) -> Result<f64, GlpipsError> {
    check_compatible(extractor, model)?;
    let pe = patch_errors(reference, distorted, mask, extractor)?;
    let d: Vec<f64> = pe.errors.iter().map(|e| head_distance(model, e)).collect();
    pool(&d, pooling)
}

/// A view-independent score: patches of all views are pooled, optionally subsampled to
/// `sample_size` patches with a seeded draw.
pub fn multiview_quality(
    views: &[(&TextureImage, &TextureImage, &CoverageMask)],
    extractor: &dyn FeatureExtractor,
    model: &QualityModel,
    sample_size: Option<(usize, u64)>,
) -> Result<f64, GlpipsError> {
    check_compatible(extractor, model)?;
    let mut d = Vec::new();
    for (r, x, m) in views {
        match patch_errors(r, x, m, extractor) {
            Ok(pe) => d.extend(pe.errors.iter().map(|e| head_distance(model, e))),
            Err(GlpipsError::EmptyPatchSet) => {}
            Err(e) => return Err(e),
        }
    }
    if let Some((n, seed)) = sample_size {
        if n < d.len() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            d = sample(&mut rng, d.len(), n).into_iter().map(|i| d[i]).collect();
        }
    }
    pool(&d, Pooling::Mean)
}

/// Regression target for a MOS on the 1..5 scale: 0 for perfect quality, 1 for the worst.
pub fn target_from_mos(mos: f64) -> f64 {
    (5.0 - mos) / 4.0
}

/// Maps a pooled distance back to the MOS scale, clamped to `[1, 5]`.
pub fn mos_from_quality(q: f64) -> f64 {
    (5.0 - 4.0 * q).clamp(1.0, 5.0)
}

pub fn predict_mos(
    reference: &TextureImage,
    distorted: &TextureImage,
    mask: &CoverageMask,
    extractor: &dyn FeatureExtractor,
    model: &QualityModel,
) -> Result<f64, GlpipsError> {
    image_quality(reference, distorted, mask, extractor, model).map(mos_from_quality)
}
