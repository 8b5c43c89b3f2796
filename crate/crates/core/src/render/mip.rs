use crate::asset::TextureImage;

/// One RGB level stored as linear f32 in `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MipLevel {
    pub width: usize,
    pub height: usize,
    pub data: Vec<[f32; 3]>,
}

impl MipLevel {
    fn texel(&self, x: isize, y: isize, wrap: bool) -> [f32; 3] {
        let (w, h) = (self.width as isize, self.height as isize);
        let (x, y) = if wrap {
            (x.rem_euclid(w), y.rem_euclid(h))
        } else {
            (x.clamp(0, w - 1), y.clamp(0, h - 1))
        };
        self.data[y as usize * self.width + x as usize]
    }

    /// Bilinear lookup; `v = 0` is the bottom row of the image.
    pub fn bilinear(&self, u: f64, v: f64, wrap: bool) -> [f32; 3] {
        let x = u * self.width as f64 - 0.5;
        let y = (1.0 - v) * self.height as f64 - 0.5;
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = ((x - x0) as f32, (y - y0) as f32);
        let (x0, y0) = (x0 as isize, y0 as isize);
        let a = self.texel(x0, y0, wrap);
        let b = self.texel(x0 + 1, y0, wrap);
        let c = self.texel(x0, y0 + 1, wrap);
        let d = self.texel(x0 + 1, y0 + 1, wrap);
        [0, 1, 2].map(|k| {
            let top = a[k] + (b[k] - a[k]) * fx;
            let bottom = c[k] + (d[k] - c[k]) * fx;
            top + (bottom - top) * fy
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MipChain {
    pub levels: Vec<MipLevel>,
}

/// Successive 2x box-filtered levels down to 1x1. Odd dimensions fold the last row or column
/// into the final output texel.
pub fn build_mipchain(texture: &TextureImage) -> MipChain {
    let rgb = texture.to_rgb();
    let base = MipLevel {
        width: rgb.width() as usize,
        height: rgb.height() as usize,
        data: rgb
            .data()
            .chunks_exact(3)
            .map(|p| [p[0] as f32, p[1] as f32, p[2] as f32])
            .collect(),
    };
    let mut levels = vec![base];
    loop {
        let prev = levels.last().unwrap();
        if prev.width == 1 && prev.height == 1 {
            break;
        }
        let next = downsample(prev);
        levels.push(next);
    }
    MipChain { levels }
}

fn downsample(src: &MipLevel) -> MipLevel {
    let w = (src.width / 2).max(1);
    let h = (src.height / 2).max(1);
    let span = |i: usize, n_src: usize, n_dst: usize| {
        let lo = i * n_src / n_dst;
        let hi = if i + 1 == n_dst { n_src } else { (i + 1) * n_src / n_dst };
        lo..hi
    };
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        let ys = span(y, src.height, h);
        for x in 0..w {
            let xs = span(x, src.width, w);
            let mut acc = [0f32; 3];
            let mut n = 0f32;
            for sy in ys.clone() {
                for sx in xs.clone() {
                    let p = src.data[sy * src.width + sx];
                    for k in 0..3 {
                        acc[k] += p[k];
                    }
                    n += 1.0;
                }
            }
            data.push(acc.map(|a| a / n));
        }
    }
    MipLevel {
        width: w,
        height: h,
        data,
    }
}

impl MipChain {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Trilinear sample at level-of-detail `lod` (0 = full resolution).
    pub fn trilinear(&self, u: f64, v: f64, lod: f64, wrap: bool) -> [f32; 3] {
        let max = (self.levels.len() - 1) as f64;
        let lod = lod.clamp(0.0, max);
        let l0 = lod.floor() as usize;
        let t = (lod - l0 as f64) as f32;
        let a = self.levels[l0].bilinear(u, v, wrap);
        if t == 0.0 || l0 + 1 >= self.levels.len() {
            return a;
        }
        let b = self.levels[l0 + 1].bilinear(u, v, wrap);
        [0, 1, 2].map(|k| a[k] + (b[k] - a[k]) * t)
    }

    /// Level of detail from screen-space UV derivatives, in texels of the base level.
    pub fn lod(&self, du_dx: f64, dv_dx: f64, du_dy: f64, dv_dy: f64) -> f64 {
        let (w, h) = (self.levels[0].width as f64, self.levels[0].height as f64);
        let lx = (du_dx * w).hypot(dv_dx * h);
        let ly = (du_dy * w).hypot(dv_dy * h);
        let rho = lx.max(ly);
        if rho > 1.0 {
            rho.log2()
        } else {
            0.0
        }
    }
}
