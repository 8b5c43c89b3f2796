use rayon::prelude::*;

use super::camera::{frame_model, Camera, Viewpoint};
use super::config::{Albedo, RenderConfig};
use super::mip::{build_mipchain, MipChain};
use super::RenderError;
use crate::asset::{cross, dot, norm, CoverageMask, IndexedMesh, TextureImage};

/// Rows per rasterization band; bands are processed in parallel.
const BAND_ROWS: usize = 16;
/// Highlight strength of dielectric materials.
const DIELECTRIC_SPECULAR: f64 = 0.5;

#[derive(Clone, Copy)]
struct ClipVertex {
    p: [f64; 3],
    n: [f64; 3],
    uv: [f64; 2],
}

fn lerp_vertex(a: &ClipVertex, b: &ClipVertex, t: f64) -> ClipVertex {
    let l3 = |x: [f64; 3], y: [f64; 3]| [0, 1, 2].map(|k| x[k] + (y[k] - x[k]) * t);
    ClipVertex {
        p: l3(a.p, b.p),
        n: l3(a.n, b.n),
        uv: [a.uv[0] + (b.uv[0] - a.uv[0]) * t, a.uv[1] + (b.uv[1] - a.uv[1]) * t],
    }
}

/// A projected triangle ready for scan conversion.
struct ScreenTri {
    s: [[f64; 2]; 3],
    inv_w: [f64; 3],
    /// View-space attributes of the three vertices.
    v: [ClipVertex; 3],
    area: f64,
    /// Geometric normal in view space, oriented towards the viewer.
    face_n: [f64; 3],
    x0: usize,
    x1: usize,
    y0: usize,
    y1: usize,
}

impl ScreenTri {
    fn edge(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
        (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
    }

    /// Screen-space barycentrics at `p` (may lie outside the triangle).
    fn barycentric(&self, p: [f64; 2]) -> [f64; 3] {
        let [a, b, c] = self.s;
        [
            Self::edge(b, c, p) / self.area,
            Self::edge(c, a, p) / self.area,
            Self::edge(a, b, p) / self.area,
        ]
    }

    /// Perspective-correct weights from screen barycentrics.
    fn perspective(&self, l: [f64; 3]) -> [f64; 3] {
        let q = [l[0] * self.inv_w[0], l[1] * self.inv_w[1], l[2] * self.inv_w[2]];
        let s = q[0] + q[1] + q[2];
        q.map(|x| x / s)
    }

    fn uv_at(&self, p: [f64; 2]) -> [f64; 2] {
        let w = self.perspective(self.barycentric(p));
        [0, 1].map(|k| w[0] * self.v[0].uv[k] + w[1] * self.v[1].uv[k] + w[2] * self.v[2].uv[k])
    }
}

fn is_top_left(a: [f64; 2], b: [f64; 2]) -> bool {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    dy < 0.0 || (dy == 0.0 && dx > 0.0)
}

/// Clips a polygon against the near plane `z = -near` (camera looks down -Z).
fn clip_near(poly: &[ClipVertex], near: f64) -> Vec<ClipVertex> {
    let inside = |v: &ClipVertex| v.p[2] <= -near;
    let mut out = Vec::with_capacity(4);
    for i in 0..poly.len() {
        let a = &poly[i];
        let b = &poly[(i + 1) % poly.len()];
        match (inside(a), inside(b)) {
            (true, true) => out.push(*b),
            (true, false) | (false, true) => {
                let t = (-near - a.p[2]) / (b.p[2] - a.p[2]);
                out.push(lerp_vertex(a, b, t));
                if inside(b) {
                    out.push(*b);
                }
            }
            (false, false) => {}
        }
    }
    out
}

fn setup(mesh: &IndexedMesh, camera: &Camera, config: &RenderConfig, use_uv: bool) -> Vec<(u32, ScreenTri)> {
    let (w, h) = (config.width as f64, config.height as f64);
    let view_pos: Vec<[f64; 3]> = mesh.positions.iter().map(|p| camera.to_view(*p)).collect();
    let view_n: Vec<[f64; 3]> = mesh
        .vertex_normals()
        .into_iter()
        .map(|n| [dot(n, camera.right), dot(n, camera.up), dot(n, camera.back)])
        .collect();
    let mut out = Vec::with_capacity(mesh.triangles.len());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let corners = tri.map(|c| ClipVertex {
            p: view_pos[c.position as usize],
            n: view_n[c.position as usize],
            uv: match (use_uv, c.uv) {
                (true, Some(i)) => mesh.uvs[i as usize],
                _ => [0.0, 0.0],
            },
        });
        let geo = cross(
            crate::asset::sub(corners[1].p, corners[0].p),
            crate::asset::sub(corners[2].p, corners[0].p),
        );
        let gl = norm(geo);
        if gl == 0.0 {
            continue;
        }
        let mut face_n = geo.map(|x| x / gl);
        if dot(face_n, corners[0].p) > 0.0 {
            face_n = face_n.map(|x| -x);
        }
        let poly = if corners.iter().all(|v| v.p[2] <= -camera.near) {
            corners.to_vec()
        } else {
            clip_near(&corners, camera.near)
        };
        for k in 1..poly.len().saturating_sub(1) {
            let mut v = [poly[0], poly[k], poly[k + 1]];
            let project = |p: [f64; 3]| {
                let iw = -1.0 / p[2];
                [0.5 * w + camera.focal * p[0] * iw, 0.5 * h - camera.focal * p[1] * iw]
            };
            let mut s = v.map(|c| project(c.p));
            let mut area = ScreenTri::edge(s[0], s[1], s[2]);
            if area == 0.0 || !area.is_finite() {
                continue;
            }
            if area < 0.0 {
                v.swap(1, 2);
                s.swap(1, 2);
                area = -area;
            }
            let xs = [s[0][0], s[1][0], s[2][0]];
            let ys = [s[0][1], s[1][1], s[2][1]];
            let min_x = xs.iter().cloned().fold(f64::INFINITY, f64::min);
            let max_x = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min_y = ys.iter().cloned().fold(f64::INFINITY, f64::min);
            let max_y = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            // Pixel centers sit at integer + 0.5.
            let x0 = (min_x - 0.5).ceil().max(0.0);
            let x1 = (max_x - 0.5).floor().min(w - 1.0);
            let y0 = (min_y - 0.5).ceil().max(0.0);
            let y1 = (max_y - 0.5).floor().min(h - 1.0);
            if x0 > x1 || y0 > y1 {
                continue;
            }
            out.push((
                t as u32,
                ScreenTri {
                    s,
                    inv_w: v.map(|c| -1.0 / c.p[2]),
                    v,
                    area,
                    face_n,
                    x0: x0 as usize,
                    x1: x1 as usize,
                    y0: y0 as usize,
                    y1: y1 as usize,
                },
            ));
        }
    }
    out
}

/// Scan converts one band of rows into a depth buffer and triangle ids.
fn rasterize_band(tris: &[(u32, ScreenTri)], ids: &[usize], width: usize, row0: usize, rows: usize, depth: &mut [f64], winner: &mut [u32]) {
    for &i in ids {
        let tri = &tris[i].1;
        let [a, b, c] = tri.s;
        let bias = [is_top_left(b, c), is_top_left(c, a), is_top_left(a, b)];
        let y_lo = tri.y0.max(row0);
        let y_hi = tri.y1.min(row0 + rows - 1);
        for y in y_lo..=y_hi {
            let py = y as f64 + 0.5;
            for x in tri.x0..=tri.x1 {
                let p = [x as f64 + 0.5, py];
                let e = [ScreenTri::edge(b, c, p), ScreenTri::edge(c, a, p), ScreenTri::edge(a, b, p)];
                if !(0..3).all(|k| e[k] > 0.0 || (e[k] == 0.0 && bias[k])) {
                    continue;
                }
                let l = e.map(|v| v / tri.area);
                let inv_w = l[0] * tri.inv_w[0] + l[1] * tri.inv_w[1] + l[2] * tri.inv_w[2];
                let z = 1.0 / inv_w;
                let idx = (y - row0) * width + x;
                if z < depth[idx] {
                    depth[idx] = z;
                    winner[idx] = i as u32;
                }
            }
        }
    }
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let l = norm(v);
    if l > 0.0 {
        v.map(|x| x / l)
    } else {
        v
    }
}

struct Shader<'a> {
    config: &'a RenderConfig,
    mips: Option<&'a MipChain>,
    wrap: bool,
    light: [f64; 3],
    glossiness: f64,
    metalness: f64,
}

impl Shader<'_> {
    fn shade(&self, tri: &ScreenTri, px: [f64; 2]) -> [u8; 3] {
        let w = tri.perspective(tri.barycentric(px));
        let mix3 = |f: fn(&ClipVertex) -> [f64; 3]| {
            [0, 1, 2].map(|k| w[0] * f(&tri.v[0])[k] + w[1] * f(&tri.v[1])[k] + w[2] * f(&tri.v[2])[k])
        };
        let albedo: [f64; 3] = match (self.config.albedo, self.mips) {
            (Albedo::White, _) | (_, None) => [255.0; 3],
            (Albedo::Texture, Some(mips)) => {
                let uv = tri.uv_at(px);
                let s = if self.config.mipmap {
                    let ux = tri.uv_at([px[0] + 1.0, px[1]]);
                    let uy = tri.uv_at([px[0], px[1] + 1.0]);
                    let lod = mips.lod(ux[0] - uv[0], ux[1] - uv[1], uy[0] - uv[0], uy[1] - uv[1]);
                    mips.trilinear(uv[0], uv[1], lod, self.wrap)
                } else {
                    mips.levels[0].bilinear(uv[0], uv[1], self.wrap)
                };
                s.map(|c| c as f64)
            }
        };
        if !self.config.lit {
            return albedo.map(|c| c.round().clamp(0.0, 255.0) as u8);
        }
        let mut n = normalize(mix3(|v| v.n));
        if dot(n, tri.face_n) < 0.0 {
            n = n.map(|x| -x);
        }
        let ndl = dot(n, self.light);
        let a = self.config.ambient;
        let diffuse = (a + (1.0 - a) * ndl.max(0.0) * self.config.light_intensity).clamp(0.0, 1.0);
        let mut color = albedo.map(|c| diffuse * c);
        if (self.glossiness > 0.0 || self.metalness > 0.0) && ndl > 0.0 {
            let view = normalize(mix3(|v| v.p).map(|x| -x));
            let half = normalize([0, 1, 2].map(|k| view[k] + self.light[k]));
            let exponent = 2f64.powf(10.0 * self.glossiness);
            let s = self.config.light_intensity * dot(n, half).max(0.0).powf(exponent);
            let m = self.metalness;
            for k in 0..3 {
                color[k] += s * ((1.0 - m) * DIELECTRIC_SPECULAR * 255.0 + m * albedo[k]);
            }
        }
        color.map(|c| c.round().clamp(0.0, 255.0) as u8)
    }
}

/// Renders with a prebuilt mip chain (ignored for white albedo).
pub fn render_with_mips(
    mesh: &IndexedMesh,
    mips: Option<&MipChain>,
    config: &RenderConfig,
    viewpoint: &Viewpoint,
) -> Result<(TextureImage, CoverageMask), RenderError> {
    config.validate()?;
    if mesh.is_empty() || mesh.positions.is_empty() {
        return Err(RenderError::EmptyMesh);
    }
    let textured = config.albedo == Albedo::Texture;
    if textured && !mesh.has_uvs() {
        return Err(RenderError::NoUVs);
    }
    if textured && mips.is_none() {
        return Err(RenderError::InvalidConfig("textured render needs a texture".into()));
    }
    let camera = frame_model(mesh, config, viewpoint)?;
    let tris = setup(mesh, &camera, config, textured);
    let (width, height) = (config.width as usize, config.height as usize);
    let bands = height.div_ceil(BAND_ROWS);
    let mut bins: Vec<Vec<usize>> = vec![Vec::new(); bands];
    for (i, (_, tri)) in tris.iter().enumerate() {
        for bin in &mut bins[tri.y0 / BAND_ROWS..=tri.y1 / BAND_ROWS] {
            bin.push(i);
        }
    }
    let (gloss, metal) = config.material.parameters();
    let shader = Shader {
        config,
        mips,
        wrap: mesh.uv_wrap,
        light: config.light_direction_camera(),
        glossiness: gloss,
        metalness: metal,
    };
    let bg = config.background;
    let results: Vec<(Vec<u8>, Vec<bool>)> = bins
        .par_iter()
        .enumerate()
        .map(|(band, ids)| {
            let row0 = band * BAND_ROWS;
            let rows = BAND_ROWS.min(height - row0);
            let mut depth = vec![f64::INFINITY; rows * width];
            let mut winner = vec![u32::MAX; rows * width];
            rasterize_band(&tris, ids, width, row0, rows, &mut depth, &mut winner);
            let mut rgb = vec![bg; rows * width * 3];
            let mut mask = vec![false; rows * width];
            for (idx, &t) in winner.iter().enumerate() {
                if t == u32::MAX {
                    continue;
                }
                let (x, y) = (idx % width, row0 + idx / width);
                let c = shader.shade(&tris[t as usize].1, [x as f64 + 0.5, y as f64 + 0.5]);
                rgb[idx * 3..idx * 3 + 3].copy_from_slice(&c);
                mask[idx] = true;
            }
            (rgb, mask)
        })
        .collect();
    let mut rgb = Vec::with_capacity(width * height * 3);
    let mut mask = Vec::with_capacity(width * height);
    for (r, m) in results {
        rgb.extend(r);
        mask.extend(m);
    }
    let image = TextureImage::new(config.width, config.height, 3, rgb).expect("buffer sized to config");
    let mask = CoverageMask::new(config.width, config.height, mask).expect("buffer sized to config");
    Ok((image, mask))
}

/// Renders `mesh` from `viewpoint`. Returns the RGB frame and its coverage mask; the
/// texture is only required for textured albedo.
pub fn render(
    mesh: &IndexedMesh,
    texture: &TextureImage,
    config: &RenderConfig,
    viewpoint: &Viewpoint,
) -> Result<(TextureImage, CoverageMask), RenderError> {
    if mesh.is_empty() {
        return Err(RenderError::EmptyMesh);
    }
    if config.albedo == Albedo::Texture && !mesh.has_uvs() {
        return Err(RenderError::NoUVs);
    }
    let mips = (config.albedo == Albedo::Texture).then(|| build_mipchain(texture));
    render_with_mips(mesh, mips.as_ref(), config, viewpoint)
}
