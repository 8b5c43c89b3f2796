//! Procedural assets for tests, benchmarks and demos.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::asset::{CoverageMask, Corner, IndexedMesh, TextureImage};
use crate::distortion::{DistortionSpec, LOD_LEVELS, QP_LEVELS, QT_LEVELS, TQ_LEVELS, TS_LEVELS};
use crate::glpips::TrainSample;
use crate::stats::{Candidate, GoldenScores, ScoreMatrix};

/// Latitude/longitude sphere of radius 1 with a UV seam at longitude 0.
///
/// Positions are shared across the seam and at the poles; UVs are not.
/// Face count is `2 * segments * (rings - 1)`.
pub fn uv_sphere(rings: usize, segments: usize) -> IndexedMesh {
    assert!(rings >= 2 && segments >= 3);
    let mut positions = vec![[0.0, 1.0, 0.0]];
    for r in 1..rings {
        let theta = std::f64::consts::PI * r as f64 / rings as f64;
        for s in 0..segments {
            let phi = 2.0 * std::f64::consts::PI * s as f64 / segments as f64;
            positions.push([theta.sin() * phi.cos(), theta.cos(), theta.sin() * phi.sin()]);
        }
    }
    positions.push([0.0, -1.0, 0.0]);
    let south = positions.len() as u32 - 1;
    let pos = |r: usize, s: usize| -> u32 {
        match r {
            0 => 0,
            r if r == rings => south,
            r => (1 + (r - 1) * segments + s % segments) as u32,
        }
    };
    let mut uvs = Vec::with_capacity((rings + 1) * (segments + 1));
    for r in 0..=rings {
        for s in 0..=segments {
            uvs.push([s as f64 / segments as f64, 1.0 - r as f64 / rings as f64]);
        }
    }
    let uv = |r: usize, s: usize| -> u32 { (r * (segments + 1) + s) as u32 };
    let mut triangles = Vec::new();
    for r in 0..rings {
        for s in 0..segments {
            let a = Corner::new(pos(r, s), uv(r, s));
            let b = Corner::new(pos(r + 1, s), uv(r + 1, s));
            let c = Corner::new(pos(r + 1, s + 1), uv(r + 1, s + 1));
            let d = Corner::new(pos(r, s + 1), uv(r, s + 1));
            if r != 0 {
                triangles.push([a, c, d]);
            }
            if r != rings - 1 {
                triangles.push([a, b, c]);
            }
        }
    }
    IndexedMesh {
        name: "sphere".into(),
        positions,
        uvs,
        triangles,
        ..Default::default()
    }
    .compact()
}

/// Displaces every position radially by a seeded uniform amount in `[-amplitude, amplitude]`.
pub fn perturbed(mesh: &IndexedMesh, amplitude: f64, seed: u64) -> IndexedMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = mesh.clone();
    for p in out.positions.iter_mut() {
        let l = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt().max(1e-12);
        let k = 1.0 + rng.random_range(-amplitude..=amplitude) / l;
        *p = [p[0] * k, p[1] * k, p[2] * k];
    }
    out
}

/// Regular `n × n` quad grid in the z = 0 plane spanning `[-1,1]²`, facing +Z, UVs over the unit square.
pub fn grid_plane(n: usize) -> IndexedMesh {
    let mut positions = Vec::with_capacity((n + 1) * (n + 1));
    let mut uvs = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
            positions.push([2.0 * u - 1.0, 2.0 * v - 1.0, 0.0]);
            uvs.push([u, v]);
        }
    }
    let id = |i: usize, j: usize| (j * (n + 1) + i) as u32;
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let c = |i, j| Corner::new(id(i, j), id(i, j));
            triangles.push([c(i, j), c(i + 1, j), c(i + 1, j + 1)]);
            triangles.push([c(i, j), c(i + 1, j + 1), c(i, j + 1)]);
        }
    }
    IndexedMesh {
        name: "plane".into(),
        positions,
        uvs,
        triangles,
        ..Default::default()
    }
}

/// Torus around the Y axis with a UV seam in both directions.
pub fn torus(major: usize, minor: usize, r_major: f64, r_minor: f64) -> IndexedMesh {
    let mut positions = Vec::with_capacity(major * minor);
    for i in 0..major {
        let a = 2.0 * std::f64::consts::PI * i as f64 / major as f64;
        for j in 0..minor {
            let b = 2.0 * std::f64::consts::PI * j as f64 / minor as f64;
            let rr = r_major + r_minor * b.cos();
            positions.push([rr * a.cos(), r_minor * b.sin(), rr * a.sin()]);
        }
    }
    let mut uvs = Vec::with_capacity((major + 1) * (minor + 1));
    for i in 0..=major {
        for j in 0..=minor {
            uvs.push([i as f64 / major as f64, j as f64 / minor as f64]);
        }
    }
    let p = |i: usize, j: usize| ((i % major) * minor + j % minor) as u32;
    let t = |i: usize, j: usize| (i * (minor + 1) + j) as u32;
    let mut triangles = Vec::with_capacity(2 * major * minor);
    for i in 0..major {
        for j in 0..minor {
            let c = |i, j| Corner::new(p(i, j), t(i, j));
            triangles.push([c(i, j), c(i, j + 1), c(i + 1, j + 1)]);
            triangles.push([c(i, j), c(i + 1, j + 1), c(i + 1, j)]);
        }
    }
    IndexedMesh {
        name: "torus".into(),
        positions,
        uvs,
        triangles,
        ..Default::default()
    }
}

fn value_noise(grid: &[f64], cells: usize, x: f64, y: f64) -> f64 {
    let (fx, fy) = (x * cells as f64, y * cells as f64);
    let (x0, y0) = (fx.floor() as usize % cells, fy.floor() as usize % cells);
    let (x1, y1) = ((x0 + 1) % cells, (y0 + 1) % cells);
    let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
    let (tx, ty) = (smooth(fx.fract()), smooth(fy.fract()));
    let g = |i: usize, j: usize| grid[j * cells + i];
    let top = g(x0, y0) * (1.0 - tx) + g(x1, y0) * tx;
    let bottom = g(x0, y1) * (1.0 - tx) + g(x1, y1) * tx;
    top * (1.0 - ty) + bottom * ty
}

/// Square RGB texture with a roughly 1/f spectrum: octaves of smooth value noise per channel
/// plus a few hard-edged shapes, standing in for photographic content.
pub fn natural_texture(side: u32, seed: u64) -> TextureImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let octaves: Vec<(usize, f64, [Vec<f64>; 3])> = (0..6)
        .map(|o| {
            let cells = 2usize << o;
            let amp = 0.5f64.powi(o);
            let grids = [0; 3].map(|_| (0..cells * cells).map(|_| rng.random::<f64>() - 0.5).collect());
            (cells, amp, grids)
        })
        .collect();
    let discs: Vec<([f64; 2], f64, [f64; 3])> = (0..6)
        .map(|_| {
            (
                [rng.random(), rng.random()],
                rng.random_range(0.04..0.15),
                [rng.random_range(-60.0..60.0), rng.random_range(-60.0..60.0), rng.random_range(-60.0..60.0)],
            )
        })
        .collect();
    let base = [rng.random_range(90.0..160.0), rng.random_range(90.0..160.0), rng.random_range(90.0..160.0)];
    TextureImage::from_fn_rgb(side, side, |x, y| {
        let (u, v) = ((x as f64 + 0.5) / side as f64, (y as f64 + 0.5) / side as f64);
        let mut c = base;
        for (cells, amp, grids) in &octaves {
            for k in 0..3 {
                c[k] += 110.0 * amp * value_noise(&grids[k], *cells, u, v);
            }
        }
        for (center, radius, tint) in &discs {
            let d = ((u - center[0]).powi(2) + (v - center[1]).powi(2)).sqrt();
            if d < *radius {
                for k in 0..3 {
                    c[k] += tint[k];
                }
            }
        }
        c.map(|v| v.round().clamp(0.0, 255.0) as u8)
    })
}

/// Uniform noise of the given amplitude added to every sample, clamped.
pub fn add_noise(image: &TextureImage, amplitude: f64, seed: u64) -> TextureImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = image.clone();
    if amplitude > 0.0 {
        for v in out.data_mut() {
            let n = rng.random_range(-amplitude..=amplitude);
            *v = (*v as f64 + n).round().clamp(0.0, 255.0) as u8;
        }
    }
    out
}

/// Noise amplitude of sample `i` among `count` pairs: a fixed permutation of an even ramp
/// from 2 to 62.
pub fn noise_amplitude(i: usize, count: usize) -> f64 {
    let k = (i * 37) % count;
    2.0 + 60.0 * k as f64 / (count - 1).max(1) as f64
}

/// Reference/noisy pairs over fully covered `side²` textures whose MOS falls linearly with
/// the noise amplitude from 5 (no noise) towards 1.
pub fn noise_pairs(count: usize, side: u32, seed: u64) -> Vec<TrainSample> {
    (0..count)
        .map(|i| {
            let amp = noise_amplitude(i, count);
            let reference = natural_texture(side, seed.wrapping_add(i as u64));
            TrainSample {
                distorted: add_noise(&reference, amp, seed ^ (i as u64) << 20),
                reference,
                mask: CoverageMask::full(side, side),
                mos: 5.0 - 4.0 * amp / 62.0,
            }
        })
        .collect()
}

/// `models × per_model` selection candidates with seeded uniform distortion levels, pivot
/// pseudo-MOS uniform on `[1, 5]` and a second pseudo-MOS that scatters around the pivot.
pub fn selection_candidates(models: usize, per_model: usize, seed: u64) -> Vec<Candidate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(models * per_model);
    for m in 0..models {
        for k in 0..per_model {
            let spec = DistortionSpec::new(
                LOD_LEVELS[rng.random_range(0..LOD_LEVELS.len())],
                QP_LEVELS[rng.random_range(0..5)],
                QT_LEVELS[rng.random_range(0..5)],
                TS_LEVELS[rng.random_range(0..5)],
                TQ_LEVELS[rng.random_range(0..5)],
            )
            .expect("levels from the tables");
            let a: f64 = rng.random_range(1.0..=5.0);
            let b = (a + rng.random_range(-1.0..1.0)).clamp(1.0, 5.0);
            out.push(Candidate {
                id: format!("m{m:03}_{k:03}"),
                pseudo_mos_a: a,
                pseudo_mos_b: b,
                model_id: format!("m{m:03}"),
                spec,
            });
        }
    }
    out
}

/// A 30-stimulus panel of honest raters plus planted unreliable ones: three vote against the
/// consensus on every stimulus and three fail a golden unit. Returns the matrix and the
/// indices of the planted participants. Stimulus 0 is the repeated one.
pub fn screening_panel(honest: usize, seed: u64) -> (ScoreMatrix, std::collections::BTreeSet<usize>) {
    const STIMULI: usize = 30;
    let truth = |s: usize| [1u8, 5, 2, 4][s % 4];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scores = Vec::new();
    let mut golden = Vec::new();
    let mut planted = std::collections::BTreeSet::new();
    let failing = [(4, 5, 0), (3, 3, 0), (1, 5, 3)];
    for p in 0..honest + 6 {
        let row: Vec<Option<u8>> = (0..STIMULI)
            .map(|s| {
                let t = truth(s) as i32;
                let v = if (honest..honest + 3).contains(&p) {
                    6 - t
                } else {
                    let r: f64 = rng.random();
                    t + if r < 0.2 { -1 } else if r > 0.8 { 1 } else { 0 }
                };
                Some(v.clamp(1, 5) as u8)
            })
            .collect();
        let rep1 = row[0].expect("every stimulus voted");
        let g = if p >= honest + 3 {
            let (poor, high, gap) = failing[p - honest - 3];
            GoldenScores {
                poor: Some(poor),
                high: Some(high),
                rep1: Some(rep1),
                rep2: Some(if rep1 > 2 { rep1 - gap } else { rep1 + gap }),
            }
        } else {
            let jitter = rng.random_range(0..=1u8);
            GoldenScores {
                poor: Some(rng.random_range(1..=2)),
                high: Some(rng.random_range(4..=5)),
                rep1: Some(rep1),
                rep2: Some(if rep1 == 5 { rep1 - jitter } else { rep1 + jitter }),
            }
        };
        if p >= honest {
            planted.insert(p);
        }
        scores.push(row);
        golden.push(g);
    }
    let matrix = ScoreMatrix::new(
        (0..honest + 6).map(|p| format!("p{p:02}")).collect(),
        (0..STIMULI).map(|s| format!("s{s:02}")).collect(),
        scores,
        golden,
    )
    .expect("scores in range");
    (matrix, planted)
}

/// Responses over the full 10×5×5×5×5 distortion factorial (row-major, last factor fastest):
/// additive lod and qp effects, a non-additive lod×qp term, a small qt effect, no tq effect
/// at all, and Gaussian noise of the given standard deviation.
pub fn planted_factorial(noise: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = rand_distr::Normal::new(0.0, noise.max(0.0)).expect("finite std");
    let mut out = Vec::with_capacity(6250);
    for lod in 0..10 {
        for qp in 0..5 {
            for qt in 0..5 {
                for ts in 0..5 {
                    for _tq in 0..5 {
                        let (l, q) = (lod as f64 / 9.0, qp as f64 / 4.0);
                        let y = 4.5 - 1.0 * l - 1.2 * q - 1.5 * l * q - 0.1 * qt as f64 / 4.0 - 0.05 * ts as f64 / 4.0;
                        out.push(y + rng.sample(normal));
                    }
                }
            }
        }
    }
    out
}
