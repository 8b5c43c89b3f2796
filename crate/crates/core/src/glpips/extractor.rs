use ndarray::{s, Array2, Array3, ArrayView3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::GlpipsError;

/// Where extractor weights come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightSource {
    /// Drawn from a seeded normal distribution.
    Seeded(u64),
    /// Loaded from a weight blob with this SHA-256 digest (hex).
    Blob(String),
    /// Parameter-free test extractor.
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractorDescriptor {
    pub architecture: String,
    pub channels: Vec<usize>,
    pub source: WeightSource,
}

/// A frozen multi-layer feature extractor. Features are `(channels, height, width)` maps.
pub trait FeatureExtractor: Send + Sync {
    fn descriptor(&self) -> ExtractorDescriptor;

    /// Expected input channel count.
    fn input_channels(&self) -> usize;

    fn features(&self, input: ArrayView3<'_, f32>) -> Result<Vec<Array3<f32>>, GlpipsError>;
}

/// Uses the input tensor itself as the single feature layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdentityExtractor {
    pub channels: usize,
}

impl FeatureExtractor for IdentityExtractor {
    fn descriptor(&self) -> ExtractorDescriptor {
        ExtractorDescriptor {
            architecture: "identity".into(),
            channels: vec![self.channels],
            source: WeightSource::None,
        }
    }

    fn input_channels(&self) -> usize {
        self.channels
    }

    fn features(&self, input: ArrayView3<'_, f32>) -> Result<Vec<Array3<f32>>, GlpipsError> {
        if input.shape()[0] != self.channels {
            return Err(GlpipsError::ShapeMismatch);
        }
        Ok(vec![input.to_owned()])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ConvShape {
    out: usize,
    kernel: usize,
    stride: usize,
    pad: usize,
    /// Max pooling (3x3, stride 2) applied before this convolution.
    pool_before: bool,
}

const ALEXNET: [ConvShape; 5] = [
    ConvShape { out: 64, kernel: 11, stride: 4, pad: 2, pool_before: false },
    ConvShape { out: 192, kernel: 5, stride: 1, pad: 2, pool_before: true },
    ConvShape { out: 384, kernel: 3, stride: 1, pad: 1, pool_before: true },
    ConvShape { out: 256, kernel: 3, stride: 1, pad: 1, pool_before: false },
    ConvShape { out: 256, kernel: 3, stride: 1, pad: 1, pool_before: false },
];

/// Architecture name of the five-convolution stack.
pub const ALEXNET_ARCH: &str = "alexnet-conv5";

#[derive(Debug, Clone, PartialEq)]
struct ConvLayer {
    shape: ConvShape,
    /// `(out, in * k * k)`.
    weight: Array2<f32>,
    bias: Vec<f32>,
}

/// AlexNet-shaped convolution stack tapping each layer after its ReLU. For a 64x64 input the
/// taps are 64x15x15, 192x7x7, 384x3x3, 256x3x3 and 256x3x3.
#[derive(Debug, Clone, PartialEq)]
pub struct AlexNetExtractor {
    layers: Vec<ConvLayer>,
    source: WeightSource,
}

fn layer_inputs() -> [usize; 5] {
    [3, 64, 192, 384, 256]
}

impl AlexNetExtractor {
    /// He-normal weights and zero biases from a seed.
    pub fn seeded(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = ALEXNET
            .iter()
            .zip(layer_inputs())
            .map(|(shape, cin)| {
                let fan_in = cin * shape.kernel * shape.kernel;
                let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("positive std");
                let weight = Array2::from_shape_fn((shape.out, fan_in), |_| normal.sample(&mut rng) as f32);
                ConvLayer {
                    shape: *shape,
                    weight,
                    bias: vec![0.0; shape.out],
                }
            })
            .collect();
        Self {
            layers,
            source: WeightSource::Seeded(seed),
        }
    }

    /// Number of f32 values in a weight blob.
    pub fn blob_len() -> usize {
        ALEXNET
            .iter()
            .zip(layer_inputs())
            .map(|(s, cin)| s.out * cin * s.kernel * s.kernel + s.out)
            .sum()
    }

    /// Layer by layer: weights in `(out, in, kh, kw)` order, then biases; little-endian f32.
    pub fn to_blob(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::blob_len() * 4);
        for l in &self.layers {
            for v in l.weight.iter().chain(&l.bias) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_blob(bytes: &[u8]) -> Result<Self, GlpipsError> {
        if bytes.len() != Self::blob_len() * 4 {
            return Err(GlpipsError::ManifestMismatch(format!(
                "extractor blob has {} bytes, expected {}",
                bytes.len(),
                Self::blob_len() * 4
            )));
        }
        let mut floats = bytes.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]));
        let layers = ALEXNET
            .iter()
            .zip(layer_inputs())
            .map(|(shape, cin)| {
                let fan_in = cin * shape.kernel * shape.kernel;
                let w: Vec<f32> = floats.by_ref().take(shape.out * fan_in).collect();
                let bias: Vec<f32> = floats.by_ref().take(shape.out).collect();
                ConvLayer {
                    shape: *shape,
                    weight: Array2::from_shape_vec((shape.out, fan_in), w).expect("length checked"),
                    bias,
                }
            })
            .collect();
        Ok(Self {
            layers,
            source: WeightSource::Blob(digest_hex(bytes)),
        })
    }
}

pub(crate) fn digest_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn max_pool(x: &Array3<f32>) -> Array3<f32> {
    let (c, h, w) = x.dim();
    let (ho, wo) = ((h.saturating_sub(3)) / 2 + 1, (w.saturating_sub(3)) / 2 + 1);
    Array3::from_shape_fn((c, ho, wo), |(k, i, j)| {
        let win = x.slice(s![k, 2 * i..(2 * i + 3).min(h), 2 * j..(2 * j + 3).min(w)]);
        win.iter().cloned().fold(f32::NEG_INFINITY, f32::max)
    })
}

fn conv_relu(x: &Array3<f32>, layer: &ConvLayer) -> Array3<f32> {
    let (c, h, w) = x.dim();
    let ConvShape { kernel: k, stride, pad, .. } = layer.shape;
    let ho = (h + 2 * pad - k) / stride + 1;
    let wo = (w + 2 * pad - k) / stride + 1;
    let mut cols = Array2::<f32>::zeros((c * k * k, ho * wo));
    for ch in 0..c {
        for ky in 0..k {
            for kx in 0..k {
                let row = (ch * k + ky) * k + kx;
                for oy in 0..ho {
                    let iy = (oy * stride + ky) as isize - pad as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    for ox in 0..wo {
                        let ix = (ox * stride + kx) as isize - pad as isize;
                        if ix >= 0 && ix < w as isize {
                            cols[[row, oy * wo + ox]] = x[[ch, iy as usize, ix as usize]];
                        }
                    }
                }
            }
        }
    }
    let mut out = layer.weight.dot(&cols);
    for (mut row, &b) in out.rows_mut().into_iter().zip(&layer.bias) {
        row.mapv_inplace(|v| (v + b).max(0.0));
    }
    out.into_shape_with_order((layer.shape.out, ho, wo)).expect("conv output shape")
}

impl FeatureExtractor for AlexNetExtractor {
    fn descriptor(&self) -> ExtractorDescriptor {
        ExtractorDescriptor {
            architecture: ALEXNET_ARCH.into(),
            channels: ALEXNET.iter().map(|s| s.out).collect(),
            source: self.source.clone(),
        }
    }

    fn input_channels(&self) -> usize {
        3
    }

    fn features(&self, input: ArrayView3<'_, f32>) -> Result<Vec<Array3<f32>>, GlpipsError> {
        let (c, h, w) = input.dim();
        if c != 3 || h < 11 || w < 11 {
            return Err(GlpipsError::ShapeMismatch);
        }
        let mut x = input.to_owned();
        let mut taps = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            if layer.shape.pool_before {
                x = max_pool(&x);
            }
            x = conv_relu(&x, layer);
            taps.push(x.clone());
        }
        Ok(taps)
    }
}
