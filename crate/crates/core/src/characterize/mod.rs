//! Content-complexity measures: geometric and color spatial information, and visual
//! attention complexity from a saliency map.

mod saliency;
mod si;

use serde::{Deserialize, Serialize};

use crate::asset::{AssetError, IndexedMesh, TextureImage};
use crate::render::{build_mipchain, render_with_mips, ring_viewpoints, Albedo, MipChain, RenderConfig, RenderError, Viewpoint};

pub use saliency::{vac_from_map, ImportedSaliency, SaliencyModel, SpectralResidual};
pub use si::{erode, sobel_magnitude, spatial_information, spatial_information_masked};

/// Pixels within this distance of the silhouette are excluded from `si_col`.
pub const SILHOUETTE_MARGIN: u32 = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CharacterizeError {
    #[error("image {width}x{height} is smaller than 3x3")]
    ImageTooSmall { width: u32, height: u32 },
    #[error("no pixels left to measure")]
    EmptyMask,
    #[error("image, mask and saliency sizes differ")]
    SizeMismatch,
    #[error("invalid saliency map: {0}")]
    InvalidSaliency(String),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Asset(#[from] AssetError),
}

/// Which views a measure is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViewMode {
    /// The configured main viewpoint.
    Main,
    /// Maximum over `n` ring viewpoints.
    RingMax(usize),
}

impl ViewMode {
    fn viewpoints(&self, config: &RenderConfig) -> Vec<Viewpoint> {
        match *self {
            ViewMode::Main => vec![Viewpoint::main(config)],
            ViewMode::RingMax(n) => ring_viewpoints(n.max(1), config),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterizationScores {
    pub model_id: String,
    pub si_geo: f64,
    pub si_col: f64,
    pub vac: f64,
    /// Min-max normalized `(si_geo, si_col, vac)` over a corpus, once computed.
    pub normalized: Option<[f64; 3]>,
}

/// SI of the white-albedo shaded render over covered pixels, silhouette included.
pub fn si_geo(mesh: &IndexedMesh, config: &RenderConfig, viewpoint: &Viewpoint) -> Result<f64, CharacterizeError> {
    let cfg = RenderConfig {
        albedo: Albedo::White,
        lit: true,
        ..config.clone()
    };
    let (img, mask) = render_with_mips(mesh, None, &cfg, viewpoint)?;
    spatial_information_masked(&img, Some(&mask), 0)
}

fn si_col_with(mesh: &IndexedMesh, mips: &MipChain, config: &RenderConfig, viewpoint: &Viewpoint) -> Result<f64, CharacterizeError> {
    let cfg = RenderConfig {
        albedo: Albedo::Texture,
        lit: false,
        ..config.clone()
    };
    let (img, mask) = render_with_mips(mesh, Some(mips), &cfg, viewpoint)?;
    spatial_information_masked(&img, Some(&mask), SILHOUETTE_MARGIN)
}

/// SI of the unlit textured render, ignoring pixels near the silhouette.
pub fn si_col(mesh: &IndexedMesh, texture: &TextureImage, config: &RenderConfig, viewpoint: &Viewpoint) -> Result<f64, CharacterizeError> {
    si_col_with(mesh, &build_mipchain(texture), config, viewpoint)
}

fn vac_with(
    mesh: &IndexedMesh,
    mips: &MipChain,
    config: &RenderConfig,
    viewpoint: &Viewpoint,
    saliency: &dyn SaliencyModel,
) -> Result<f64, CharacterizeError> {
    let cfg = RenderConfig {
        albedo: Albedo::Texture,
        lit: true,
        ..config.clone()
    };
    let (img, mask) = render_with_mips(mesh, Some(mips), &cfg, viewpoint)?;
    let map = saliency.saliency(&img)?;
    vac_from_map(&map, &mask)
}

/// VAC of the full render: normalized entropy of the saliency over covered pixels.
pub fn vac(
    mesh: &IndexedMesh,
    texture: &TextureImage,
    config: &RenderConfig,
    viewpoint: &Viewpoint,
    saliency: &dyn SaliencyModel,
) -> Result<f64, CharacterizeError> {
    vac_with(mesh, &build_mipchain(texture), config, viewpoint, saliency)
}

fn max_over(views: &[Viewpoint], mut f: impl FnMut(&Viewpoint) -> Result<f64, CharacterizeError>) -> Result<f64, CharacterizeError> {
    let mut best = f64::NEG_INFINITY;
    for v in views {
        best = best.max(f(v)?);
    }
    Ok(best)
}

/// All three measures for one model.
pub fn characterize(
    model_id: &str,
    mesh: &IndexedMesh,
    texture: &TextureImage,
    config: &RenderConfig,
    saliency: &dyn SaliencyModel,
    mode: ViewMode,
) -> Result<CharacterizationScores, CharacterizeError> {
    let mips = build_mipchain(texture);
    let views = mode.viewpoints(config);
    Ok(CharacterizationScores {
        model_id: model_id.to_owned(),
        si_geo: max_over(&views, |v| si_geo(mesh, config, v))?,
        si_col: max_over(&views, |v| si_col_with(mesh, &mips, config, v))?,
        vac: max_over(&views, |v| vac_with(mesh, &mips, config, v, saliency))?,
        normalized: None,
    })
}

/// Min-max normalizes each measure over the set. A measure with zero range maps to 0.
pub fn normalize_corpus(scores: &mut [CharacterizationScores]) {
    let pick = |s: &CharacterizationScores, k: usize| [s.si_geo, s.si_col, s.vac][k];
    let ranges: Vec<(f64, f64)> = (0..3)
        .map(|k| {
            scores
                .iter()
                .map(|s| pick(s, k))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        })
        .collect();
    for s in scores.iter_mut() {
        let n = [0, 1, 2].map(|k| {
            let (lo, hi) = ranges[k];
            if hi > lo {
                (pick(s, k) - lo) / (hi - lo)
            } else {
                0.0
            }
        });
        s.normalized = Some(n);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub model_id: String,
    pub si_geo_raw: f64,
    pub si_col_raw: f64,
    pub vac: f64,
    pub si_geo_norm: Option<f64>,
    pub si_col_norm: Option<f64>,
    pub vac_norm: Option<f64>,
}

impl From<&CharacterizationScores> for ScoreRow {
    fn from(s: &CharacterizationScores) -> Self {
        Self {
            model_id: s.model_id.clone(),
            si_geo_raw: s.si_geo,
            si_col_raw: s.si_col,
            vac: s.vac,
            si_geo_norm: s.normalized.map(|n| n[0]),
            si_col_norm: s.normalized.map(|n| n[1]),
            vac_norm: s.normalized.map(|n| n[2]),
        }
    }
}

pub fn write_scores_csv<W: std::io::Write>(out: W, scores: &[CharacterizationScores]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in scores {
        w.serialize(ScoreRow::from(s))?;
    }
    w.flush()?;
    Ok(())
}
