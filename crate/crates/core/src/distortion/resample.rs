use rayon::prelude::*;

use crate::asset::TextureImage;

const LOBES: f64 = 3.0;

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

fn lanczos(x: f64) -> f64 {
    if x.abs() < LOBES {
        sinc(x) * sinc(x / LOBES)
    } else {
        0.0
    }
}

/// Normalized filter taps for each output sample of a 1D resize.
fn weights(src: usize, dst: usize) -> Vec<(usize, Vec<f64>)> {
    let ratio = src as f64 / dst as f64;
    // Widen the kernel when downsampling so it also acts as the low-pass filter.
    let stretch = ratio.max(1.0);
    let support = LOBES * stretch;
    (0..dst)
        .map(|i| {
            let center = (i as f64 + 0.5) * ratio;
            let lo = ((center - support).floor() as isize).max(0) as usize;
            let hi = ((center + support).ceil() as usize).min(src);
            let mut w: Vec<f64> = (lo..hi)
                .map(|j| lanczos((j as f64 + 0.5 - center) / stretch))
                .collect();
            let sum: f64 = w.iter().sum();
            for v in w.iter_mut() {
                *v /= sum;
            }
            (lo, w)
        })
        .collect()
}

/// Separable Lanczos-3 resampling of a square texture to `side × side`.
pub fn resample_texture(image: &TextureImage, side: u32) -> TextureImage {
    let (w, h, c) = (image.width() as usize, image.height() as usize, image.channels() as usize);
    let (dw, dh) = (side as usize, side as usize);
    if (w, h) == (dw, dh) {
        return image.clone();
    }
    let src = image.data();
    let wx = weights(w, dw);
    let wy = weights(h, dh);

    let mut tmp = vec![0f64; dw * h * c];
    tmp.par_chunks_mut(dw * c).enumerate().for_each(|(y, row)| {
        let line = &src[y * w * c..(y + 1) * w * c];
        for (x, (lo, taps)) in wx.iter().enumerate() {
            for ch in 0..c {
                row[x * c + ch] = taps
                    .iter()
                    .enumerate()
                    .map(|(k, t)| t * line[(lo + k) * c + ch] as f64)
                    .sum();
            }
        }
    });
    let mut out = vec![0u8; dw * dh * c];
    out.par_chunks_mut(dw * c).enumerate().for_each(|(y, row)| {
        let (lo, taps) = &wy[y];
        for x in 0..dw * c {
            let v: f64 = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * tmp[(lo + k) * dw * c + x])
                .sum();
            row[x] = v.round().clamp(0.0, 255.0) as u8;
        }
    });
    TextureImage::new(side, side, image.channels(), out).expect("valid output size")
}
