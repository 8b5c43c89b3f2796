use super::CharacterizeError;
use crate::asset::{CoverageMask, TextureImage};

/// Sobel gradient magnitude for interior pixels; the 1-px frame is left at `None`.
pub fn sobel_magnitude(luma: &[f64], width: usize, height: usize) -> Vec<Option<f64>> {
    let mut out = vec![None; width * height];
    if width < 3 || height < 3 {
        return out;
    }
    let at = |x: usize, y: usize| luma[y * width + x];
    for y in 1..height - 1 {
        for x in 1..width - 1 {
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            out[y * width + x] = Some(gx.hypot(gy));
        }
    }
    out
}

fn population_std(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut n, mut mean, mut m2) = (0usize, 0.0, 0.0);
    for v in values {
        n += 1;
        let d = v - mean;
        mean += d / n as f64;
        m2 += d * (v - mean);
    }
    (n > 0).then(|| (m2 / n as f64).max(0.0).sqrt())
}

/// Population standard deviation of the Sobel magnitude of the Rec.601 luma, over all pixels
/// except the 1-px frame.
pub fn spatial_information(image: &TextureImage) -> Result<f64, CharacterizeError> {
    spatial_information_masked(image, None, 0)
}

/// Like [`spatial_information`] but restricted to covered pixels. With `margin > 0`, covered
/// pixels within `margin` px (Chebyshev distance) of an uncovered pixel or the image edge are
/// dropped as well.
pub fn spatial_information_masked(
    image: &TextureImage,
    mask: Option<&CoverageMask>,
    margin: u32,
) -> Result<f64, CharacterizeError> {
    let (w, h) = (image.width() as usize, image.height() as usize);
    if w.min(h) < 3 {
        return Err(CharacterizeError::ImageTooSmall {
            width: image.width(),
            height: image.height(),
        });
    }
    if let Some(m) = mask {
        if !m.matches(image) {
            return Err(CharacterizeError::SizeMismatch);
        }
    }
    let keep = match mask {
        None => vec![true; w * h],
        Some(m) if margin == 0 => m.data().to_vec(),
        Some(m) => erode(m, margin),
    };
    let mag = sobel_magnitude(&image.luma(), w, h);
    let values = mag.iter().zip(&keep).filter_map(|(g, &k)| if k { *g } else { None });
    population_std(values).ok_or(CharacterizeError::EmptyMask)
}

/// Covered pixels whose whole `(2r+1)²` neighbourhood is covered and inside the image.
pub fn erode(mask: &CoverageMask, r: u32) -> Vec<bool> {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let r = r as usize;
    let data = mask.data();
    // Horizontal then vertical run tests via prefix counts of uncovered pixels.
    let mut horiz = vec![false; w * h];
    for y in 0..h {
        let mut prefix = vec![0usize; w + 1];
        for x in 0..w {
            prefix[x + 1] = prefix[x] + (!data[y * w + x]) as usize;
        }
        for x in r..w.saturating_sub(r) {
            horiz[y * w + x] = prefix[x + r + 1] - prefix[x - r] == 0;
        }
    }
    let mut out = vec![false; w * h];
    for x in 0..w {
        let mut prefix = vec![0usize; h + 1];
        for y in 0..h {
            prefix[y + 1] = prefix[y] + (!horiz[y * w + x]) as usize;
        }
        for y in r..h.saturating_sub(r) {
            out[y * w + x] = prefix[y + r + 1] - prefix[y - r] == 0;
        }
    }
    out
}
