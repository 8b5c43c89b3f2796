use std::fmt::Write as _;

use ndarray::{Array3, ArrayView3};
use serde::{Deserialize, Serialize};

use super::extractor::{digest_hex, AlexNetExtractor, ExtractorDescriptor, FeatureExtractor, WeightSource, ALEXNET_ARCH};
use super::GlpipsError;

/// Guard added to feature norms before channel normalization.
pub const NORM_EPS: f64 = 1e-10;

const FORMAT: &str = "meshqa-glpips 1";

/// Learned head: per layer a nonnegative channel weighting `omega` and a nonnegative scale
/// `omega0`, both bias-free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityModel {
    pub extractor: ExtractorDescriptor,
    pub omega: Vec<Vec<f32>>,
    pub omega0: Vec<f32>,
}

impl QualityModel {
    /// Unit weights everywhere: the untrained distance is the plain sum over layers of the
    /// normalized feature distance.
    pub fn initial(extractor: ExtractorDescriptor) -> Self {
        let l = extractor.channels.len();
        Self {
            omega: extractor.channels.iter().map(|&c| vec![1.0; c]).collect(),
            omega0: vec![1.0; l],
            extractor,
        }
    }

    pub fn zeros(extractor: ExtractorDescriptor) -> Self {
        Self {
            omega: extractor.channels.iter().map(|&c| vec![0.0; c]).collect(),
            omega0: vec![0.0; extractor.channels.len()],
            extractor,
        }
    }

    pub fn validate(&self) -> Result<(), GlpipsError> {
        let shapes_ok = self.omega.len() == self.extractor.channels.len()
            && self.omega0.len() == self.omega.len()
            && self.omega.iter().zip(&self.extractor.channels).all(|(w, &c)| w.len() == c);
        if !shapes_ok {
            return Err(GlpipsError::ManifestMismatch("head shape differs from extractor channels".into()));
        }
        let nonneg = self.omega.iter().flatten().chain(&self.omega0).all(|&v| v >= 0.0 && v.is_finite());
        if !nonneg {
            return Err(GlpipsError::ManifestMismatch("head weights must be finite and nonnegative".into()));
        }
        Ok(())
    }
}

/// Per layer and channel, the spatial mean of the squared difference of channel-normalized
/// features. The head is linear in these values.
pub type LayerErrors = Vec<Vec<f64>>;

fn normalized_sites(f: &Array3<f32>) -> Vec<f64> {
    let (c, h, w) = f.dim();
    let sites = h * w;
    let mut out = vec![0.0; c * sites];
    for s in 0..sites {
        let (y, x) = (s / w, s % w);
        let n: f64 = (0..c).map(|k| (f[[k, y, x]] as f64).powi(2)).sum::<f64>().sqrt();
        for k in 0..c {
            out[k * sites + s] = f[[k, y, x]] as f64 / (n + NORM_EPS);
        }
    }
    out
}

pub fn layer_errors(reference: &[Array3<f32>], distorted: &[Array3<f32>]) -> Result<LayerErrors, GlpipsError> {
    if reference.len() != distorted.len() {
        return Err(GlpipsError::ShapeMismatch);
    }
    reference
        .iter()
        .zip(distorted)
        .map(|(a, b)| {
            if a.dim() != b.dim() {
                return Err(GlpipsError::ShapeMismatch);
            }
            let (c, h, w) = a.dim();
            let sites = h * w;
            let (na, nb) = (normalized_sites(a), normalized_sites(b));
            Ok((0..c)
                .map(|k| {
                    let r = k * sites..(k + 1) * sites;
                    na[r.clone()].iter().zip(&nb[r]).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() / sites as f64
                })
                .collect())
        })
        .collect()
}

/// `sum_l omega0_l * sum_c omega_lc * e_lc`.
pub fn head_distance(model: &QualityModel, errors: &LayerErrors) -> f64 {
    model
        .omega
        .iter()
        .zip(&model.omega0)
        .zip(errors)
        .map(|((w, &w0), e)| w0 as f64 * w.iter().zip(e).map(|(&a, &b)| a as f64 * b).sum::<f64>())
        .sum()
}

/// Distance between two patch tensors under the model's head.
pub fn patch_distance(
    reference: ArrayView3<'_, f32>,
    distorted: ArrayView3<'_, f32>,
    extractor: &dyn FeatureExtractor,
    model: &QualityModel,
) -> Result<f64, GlpipsError> {
    if reference.dim() != distorted.dim() {
        return Err(GlpipsError::ShapeMismatch);
    }
    check_compatible(extractor, model)?;
    let e = layer_errors(&extractor.features(reference)?, &extractor.features(distorted)?)?;
    Ok(head_distance(model, &e))
}

pub(crate) fn check_compatible(extractor: &dyn FeatureExtractor, model: &QualityModel) -> Result<(), GlpipsError> {
    let d = extractor.descriptor();
    if d.channels != model.extractor.channels || d.architecture != model.extractor.architecture {
        return Err(GlpipsError::ShapeMismatch);
    }
    Ok(())
}

fn push_floats(out: &mut Vec<u8>, v: impl IntoIterator<Item = f32>) {
    for x in v {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

/// Serializes the model as a `key = value` manifest ending in an `end` line, followed by the
/// little-endian f32 head blob (all `omega` layers, then `omega0`) and, when given, the
/// extractor weight blob.
///
/// Keys: `format`, `architecture`, `layer_channels`, `weights` (`seeded:<seed>`, `blob`,
/// `none`), `head_floats`, `head_digest`, and for bundled extractors `extractor_floats` and
/// `extractor_digest`. Digests are SHA-256 hex.
pub fn save_model(model: &QualityModel, bundled: Option<&AlexNetExtractor>) -> Result<Vec<u8>, GlpipsError> {
    model.validate()?;
    let mut head = Vec::new();
    for w in &model.omega {
        push_floats(&mut head, w.iter().copied());
    }
    push_floats(&mut head, model.omega0.iter().copied());
    let channels: Vec<String> = model.extractor.channels.iter().map(|c| c.to_string()).collect();
    let mut text = String::new();
    let _ = writeln!(text, "format = {FORMAT}");
    let _ = writeln!(text, "architecture = {}", model.extractor.architecture);
    let _ = writeln!(text, "layer_channels = {}", channels.join(","));
    let weights = match &model.extractor.source {
        WeightSource::Seeded(s) => format!("seeded:{s}"),
        WeightSource::Blob(_) => "blob".into(),
        WeightSource::None => "none".into(),
    };
    let _ = writeln!(text, "weights = {weights}");
    let _ = writeln!(text, "head_floats = {}", head.len() / 4);
    let _ = writeln!(text, "head_digest = {}", digest_hex(&head));
    let ext_blob = bundled.map(|e| e.to_blob());
    if let Some(blob) = &ext_blob {
        let _ = writeln!(text, "extractor_floats = {}", blob.len() / 4);
        let _ = writeln!(text, "extractor_digest = {}", digest_hex(blob));
    }
    text.push_str("end\n");
    let mut out = text.into_bytes();
    out.extend(head);
    if let Some(blob) = ext_blob {
        out.extend(blob);
    }
    Ok(out)
}

/// Inverse of [`save_model`]; returns the bundled extractor when one was stored.
pub fn load_model(bytes: &[u8]) -> Result<(QualityModel, Option<AlexNetExtractor>), GlpipsError> {
    let bad = |m: &str| GlpipsError::ManifestMismatch(m.to_owned());
    let end = bytes
        .windows(4)
        .position(|w| w == b"end\n")
        .filter(|&p| p == 0 || bytes[p - 1] == b'\n')
        .ok_or_else(|| bad("missing end of manifest"))?;
    let text = std::str::from_utf8(&bytes[..end]).map_err(|_| bad("manifest is not UTF-8"))?;
    let blob = &bytes[end + 4..];
    let mut keys = std::collections::HashMap::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let (k, v) = line.split_once('=').ok_or_else(|| bad("malformed manifest line"))?;
        keys.insert(k.trim().to_owned(), v.trim().to_owned());
    }
    let get = |k: &str| keys.get(k).ok_or_else(|| bad(&format!("missing key {k}")));
    if get("format")? != FORMAT {
        return Err(bad("unknown format"));
    }
    let architecture = get("architecture")?.clone();
    let channels: Vec<usize> = get("layer_channels")?
        .split(',')
        .map(|c| c.trim().parse().map_err(|_| bad("bad layer_channels")))
        .collect::<Result<_, _>>()?;
    let head_floats: usize = get("head_floats")?.parse().map_err(|_| bad("bad head_floats"))?;
    let expected_head = channels.iter().sum::<usize>() + channels.len();
    if head_floats != expected_head {
        return Err(bad("head_floats differs from layer_channels"));
    }
    let ext_floats: usize = match keys.get("extractor_floats") {
        Some(v) => v.parse().map_err(|_| bad("bad extractor_floats"))?,
        None => 0,
    };
    if blob.len() != 4 * (head_floats + ext_floats) {
        return Err(bad("blob length differs from manifest"));
    }
    let (head, ext) = blob.split_at(4 * head_floats);
    if &digest_hex(head) != get("head_digest")? {
        return Err(GlpipsError::DigestMismatch);
    }
    let floats: Vec<f32> = head.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
    let mut it = floats.into_iter();
    let omega: Vec<Vec<f32>> = channels.iter().map(|&c| it.by_ref().take(c).collect()).collect();
    let omega0: Vec<f32> = it.collect();
    let bundled = if ext_floats > 0 {
        if &digest_hex(ext) != get("extractor_digest")? {
            return Err(GlpipsError::DigestMismatch);
        }
        if architecture != ALEXNET_ARCH {
            return Err(bad("bundled weights need the alexnet architecture"));
        }
        Some(AlexNetExtractor::from_blob(ext)?)
    } else {
        None
    };
    let source = match get("weights")?.as_str() {
        "none" => WeightSource::None,
        "blob" => match &bundled {
            Some(e) => e.descriptor().source,
            None => return Err(bad("weights = blob without a bundled extractor")),
        },
        s => WeightSource::Seeded(
            s.strip_prefix("seeded:")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad("bad weights key"))?,
        ),
    };
    let model = QualityModel {
        extractor: ExtractorDescriptor {
            architecture,
            channels,
            source,
        },
        omega,
        omega0,
    };
    model.validate()?;
    Ok((model, bundled))
}

/// Builds the extractor a model was trained with.
pub fn extractor_for(model: &QualityModel, bundled: Option<AlexNetExtractor>) -> Result<Box<dyn FeatureExtractor>, GlpipsError> {
    match (&model.extractor.source, bundled) {
        (_, Some(e)) => Ok(Box::new(e)),
        (WeightSource::Seeded(seed), None) if model.extractor.architecture == ALEXNET_ARCH => {
            Ok(Box::new(AlexNetExtractor::seeded(*seed)))
        }
        (WeightSource::None, None) if model.extractor.architecture == "identity" && model.extractor.channels.len() == 1 => {
            Ok(Box::new(super::extractor::IdentityExtractor {
                channels: model.extractor.channels[0],
            }))
        }
        _ => Err(GlpipsError::ManifestMismatch("extractor weights are not available".into())),
    }
}
