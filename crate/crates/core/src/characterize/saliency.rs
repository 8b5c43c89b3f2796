use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::CharacterizeError;
use crate::asset::{decode_image, CoverageMask, TextureImage};

/// Maps an image to a nonnegative per-pixel saliency map of the same size (row-major).
pub trait SaliencyModel: Send + Sync {
    fn saliency(&self, image: &TextureImage) -> Result<Vec<f64>, CharacterizeError>;
}

/// Spectral-residual saliency on a downscaled luma image.
///
/// Frequencies whose amplitude is numerically zero carry no image content and are dropped
/// from the residual spectrum, so a constant image maps to a uniform saliency map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralResidual {
    /// Longer side of the working resolution.
    pub scale: usize,
    /// Gaussian blur sigma at working resolution.
    pub sigma: f64,
}

impl Default for SpectralResidual {
    fn default() -> Self {
        Self { scale: 64, sigma: 3.0 }
    }
}

/// Precomputed saliency map, e.g. from an external model exported as PGM.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportedSaliency {
    pub width: u32,
    pub height: u32,
    pub map: Vec<f64>,
}

impl ImportedSaliency {
    pub fn from_pgm(bytes: &[u8]) -> Result<Self, CharacterizeError> {
        let img = decode_image(bytes)?;
        if img.channels() != 1 {
            return Err(CharacterizeError::InvalidSaliency("expected a single-channel map".into()));
        }
        Ok(Self {
            width: img.width(),
            height: img.height(),
            map: img.data().iter().map(|&v| v as f64).collect(),
        })
    }
}

impl SaliencyModel for ImportedSaliency {
    fn saliency(&self, image: &TextureImage) -> Result<Vec<f64>, CharacterizeError> {
        if (self.width, self.height) != (image.width(), image.height()) {
            return Err(CharacterizeError::SizeMismatch);
        }
        Ok(self.map.clone())
    }
}

/// Box-average downscale to `(dw, dh)`.
fn area_resize(src: &[f64], w: usize, h: usize, dw: usize, dh: usize) -> Vec<f64> {
    let mut out = vec![0.0; dw * dh];
    for y in 0..dh {
        let (y0, y1) = (y * h / dh, ((y + 1) * h / dh).max(y * h / dh + 1));
        for x in 0..dw {
            let (x0, x1) = (x * w / dw, ((x + 1) * w / dw).max(x * w / dw + 1));
            let mut s = 0.0;
            for yy in y0..y1 {
                for xx in x0..x1 {
                    s += src[yy * w + xx];
                }
            }
            out[y * dw + x] = s / ((y1 - y0) * (x1 - x0)) as f64;
        }
    }
    out
}

fn bilinear_resize(src: &[f64], w: usize, h: usize, dw: usize, dh: usize) -> Vec<f64> {
    let mut out = vec![0.0; dw * dh];
    for y in 0..dh {
        let fy = ((y as f64 + 0.5) * h as f64 / dh as f64 - 0.5).clamp(0.0, (h - 1) as f64);
        let (y0, ty) = (fy.floor() as usize, fy - fy.floor());
        let y1 = (y0 + 1).min(h - 1);
        for x in 0..dw {
            let fx = ((x as f64 + 0.5) * w as f64 / dw as f64 - 0.5).clamp(0.0, (w - 1) as f64);
            let (x0, tx) = (fx.floor() as usize, fx - fx.floor());
            let x1 = (x0 + 1).min(w - 1);
            let top = src[y0 * w + x0] * (1.0 - tx) + src[y0 * w + x1] * tx;
            let bottom = src[y1 * w + x0] * (1.0 - tx) + src[y1 * w + x1] * tx;
            out[y * dw + x] = top * (1.0 - ty) + bottom * ty;
        }
    }
    out
}

/// Separable blur with kernel weights renormalized at the borders.
fn blur(src: &[f64], w: usize, h: usize, kernel: &[f64]) -> Vec<f64> {
    let r = (kernel.len() / 2) as isize;
    let pass = |src: &[f64], horizontal: bool| {
        let mut out = vec![0.0; w * h];
        for y in 0..h as isize {
            for x in 0..w as isize {
                let (mut acc, mut wsum) = (0.0, 0.0);
                for (k, &kw) in kernel.iter().enumerate() {
                    let o = k as isize - r;
                    let (sx, sy) = if horizontal { (x + o, y) } else { (x, y + o) };
                    if sx < 0 || sy < 0 || sx >= w as isize || sy >= h as isize {
                        continue;
                    }
                    acc += kw * src[sy as usize * w + sx as usize];
                    wsum += kw;
                }
                out[y as usize * w + x as usize] = acc / wsum;
            }
        }
        out
    };
    pass(&pass(src, true), false)
}

fn fft2(data: &mut [Complex<f64>], w: usize, h: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let (row, col) = if inverse {
        (planner.plan_fft_inverse(w), planner.plan_fft_inverse(h))
    } else {
        (planner.plan_fft_forward(w), planner.plan_fft_forward(h))
    };
    for r in data.chunks_exact_mut(w) {
        row.process(r);
    }
    let mut column = vec![Complex::new(0.0, 0.0); h];
    for x in 0..w {
        for y in 0..h {
            column[y] = data[y * w + x];
        }
        col.process(&mut column);
        for y in 0..h {
            data[y * w + x] = column[y];
        }
    }
}

/// Amplitudes below this fraction of the peak are treated as exact zeros.
const ZERO_AMPLITUDE: f64 = 1e-9;
/// Log-amplitude floor relative to the peak, so near-zero bins do not dominate the residual.
const LOG_FLOOR: f64 = 1e-6;

impl SaliencyModel for SpectralResidual {
    fn saliency(&self, image: &TextureImage) -> Result<Vec<f64>, CharacterizeError> {
        let (w, h) = (image.width() as usize, image.height() as usize);
        let s = self.scale.max(1) as f64 / w.max(h) as f64;
        let (dw, dh) = if s < 1.0 {
            (((w as f64 * s).round() as usize).max(1), ((h as f64 * s).round() as usize).max(1))
        } else {
            (w, h)
        };
        let small = area_resize(&image.luma(), w, h, dw, dh);
        let mut spec: Vec<Complex<f64>> = small.iter().map(|&v| Complex::new(v, 0.0)).collect();
        fft2(&mut spec, dw, dh, false);
        let amp: Vec<f64> = spec.iter().map(|c| c.norm()).collect();
        let peak = amp.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let floor = ZERO_AMPLITUDE * peak;
        let log_amp: Vec<f64> = amp.iter().map(|&a| a.max(LOG_FLOOR * peak).ln()).collect();
        let avg = blur(&log_amp, dw, dh, &[1.0, 1.0, 1.0]);
        for i in 0..spec.len() {
            spec[i] = if amp[i] <= floor {
                Complex::new(0.0, 0.0)
            } else {
                let phase = spec[i].arg();
                Complex::from_polar((log_amp[i] - avg[i]).exp(), phase)
            };
        }
        fft2(&mut spec, dw, dh, true);
        let map: Vec<f64> = spec.iter().map(|c| c.norm_sqr()).collect();
        let r = (3.0 * self.sigma).ceil() as i64;
        let kernel: Vec<f64> = (-r..=r)
            .map(|i| (-(i * i) as f64 / (2.0 * self.sigma * self.sigma)).exp())
            .collect();
        let map = if self.sigma > 0.0 { blur(&map, dw, dh, &kernel) } else { map };
        let map = if (dw, dh) == (w, h) { map } else { bilinear_resize(&map, dw, dh, w, h) };
        Ok(map.into_iter().map(|v| v.max(0.0)).collect())
    }
}

/// Normalized Shannon entropy of the saliency distribution over covered pixels, in `[0, 1]`.
///
/// An all-zero map over the mask falls back to a uniform map (result 1) with a warning. A
/// single covered pixel yields 1.
pub fn vac_from_map(map: &[f64], mask: &CoverageMask) -> Result<f64, CharacterizeError> {
    if map.len() != mask.data().len() {
        return Err(CharacterizeError::SizeMismatch);
    }
    let values: Vec<f64> = map
        .iter()
        .zip(mask.data())
        .filter(|(_, &m)| m)
        .map(|(&v, _)| v)
        .collect();
    if values.is_empty() {
        return Err(CharacterizeError::EmptyMask);
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(CharacterizeError::InvalidSaliency("values must be finite and nonnegative".into()));
    }
    let n = values.len();
    let total: f64 = values.iter().sum();
    if total == 0.0 {
        log::warn!("saliency map is zero over the mask; using a uniform map");
        return Ok(1.0);
    }
    if n == 1 {
        return Ok(1.0);
    }
    let h: f64 = values
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| {
            let p = v / total;
            -p * p.ln()
        })
        .sum();
    Ok((h / (n as f64).ln()).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_gives_uniform_map() {
        let img = TextureImage::filled(130, 90, [123, 45, 200]);
        let map = SpectralResidual::default().saliency(&img).unwrap();
        let (lo, hi) = map.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(hi > 0.0);
        assert!((hi - lo) / hi < 1e-9);
        let vac = vac_from_map(&map, &CoverageMask::full(130, 90)).unwrap();
        assert!((vac - 1.0).abs() < 1e-9);
    }

    #[test]
    fn isolated_spot_is_salient() {
        let img = TextureImage::from_fn_rgb(64, 64, |x, y| {
            let (dx, dy) = (x as f64 - 42.0, y as f64 - 12.0);
            let stripes = 20.0 * ((x as f64) * 1.3).sin();
            [(100.0 + stripes + 120.0 * (-(dx * dx + dy * dy) / 8.0).exp()) as u8; 3]
        });
        let map = SpectralResidual::default().saliency(&img).unwrap();
        let argmax = (0..map.len()).max_by(|&a, &b| map[a].total_cmp(&map[b])).unwrap();
        let (x, y) = (argmax % 64, argmax / 64);
        assert!((36..48).contains(&x) && (6..18).contains(&y), "peak at ({x},{y})");
    }

    #[test]
    fn entropy_extremes() {
        let mask = CoverageMask::full(4, 4);
        assert!((vac_from_map(&[2.0; 16], &mask).unwrap() - 1.0).abs() < 1e-12);
        let mut spike = [0.0; 16];
        spike[5] = 3.0;
        assert_eq!(vac_from_map(&spike, &mask).unwrap(), 0.0);
        assert_eq!(vac_from_map(&[0.0; 16], &mask).unwrap(), 1.0);
        let none = CoverageMask::from_fn(4, 4, |_, _| false);
        assert_eq!(vac_from_map(&[1.0; 16], &none), Err(CharacterizeError::EmptyMask));
    }

    #[test]
    fn uncovered_saliency_is_ignored() {
        let mask = CoverageMask::from_fn(4, 1, |x, _| x < 2);
        let vac = vac_from_map(&[1.0, 1.0, 50.0, 0.0], &mask).unwrap();
        assert!((vac - 1.0).abs() < 1e-12);
    }

    #[test]
    fn imported_map_round_trip() {
        let pgm = [b"P5\n3 1\n255\n".as_slice(), &[0, 10, 20]].concat();
        let s = ImportedSaliency::from_pgm(&pgm).unwrap();
        let img = TextureImage::filled(3, 1, [0; 3]);
        assert_eq!(s.saliency(&img).unwrap(), vec![0.0, 10.0, 20.0]);
        assert_eq!(s.saliency(&TextureImage::filled(2, 1, [0; 3])), Err(CharacterizeError::SizeMismatch));
    }
}
