use meshqa_core::asset::{CoverageMask, TextureImage};
use meshqa_core::characterize::{
    characterize, si_col, si_geo, spatial_information, spatial_information_masked, vac_from_map,
    SaliencyModel, SpectralResidual, ViewMode,
};
use meshqa_core::fixtures::{grid_plane, natural_texture, perturbed, uv_sphere};
use meshqa_core::render::{render, RenderConfig, Viewpoint};
use proptest::prelude::*;

/// Direct 3x3 correlation with the Sobel kernels, written independently of the library.
fn brute_sobel_std(luma: &[f64], w: usize, h: usize, keep: impl Fn(usize, usize) -> bool) -> f64 {
    const KX: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
    let mut mags = Vec::new();
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            if !keep(x, y) {
                continue;
            }
            let (mut gx, mut gy) = (0.0, 0.0);
            for j in 0..3 {
                for i in 0..3 {
                    let v = luma[(y + j - 1) * w + (x + i - 1)];
                    gx += KX[j][i] * v;
                    gy += KX[i][j] * v;
                }
            }
            mags.push((gx * gx + gy * gy).sqrt());
        }
    }
    let n = mags.len() as f64;
    let mean = mags.iter().sum::<f64>() / n;
    (mags.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / n).sqrt()
}

#[test]
fn vertical_step_edge_matches_brute_force() {
    let img = TextureImage::from_fn_rgb(64, 64, |x, _| if x < 32 { [0; 3] } else { [255; 3] });
    let expected = brute_sobel_std(&img.luma(), 64, 64, |_, _| true);
    // Two edge columns carry magnitude 4·255 out of 62.
    let p: f64 = 2.0 / 62.0;
    let closed_form = 1020.0 * (p * (1.0 - p)).sqrt();
    assert!((expected - closed_form).abs() < 1e-9);
    assert!((spatial_information(&img).unwrap() - expected).abs() < 1e-9);
}

#[test]
fn sphere_is_simpler_than_a_bumpy_sphere() {
    let cfg = RenderConfig::default();
    let vp = Viewpoint::main(&cfg);
    let smooth = si_geo(&uv_sphere(64, 128), &cfg, &vp).unwrap();
    let rough = si_geo(&perturbed(&uv_sphere(64, 128), 0.03, 9), &cfg, &vp).unwrap();
    assert!(rough > smooth, "{rough} vs {smooth}");
}

#[test]
fn flat_quad_has_only_silhouette_geometry() {
    let plane = grid_plane(4);
    let cfg = RenderConfig {
        albedo: meshqa_core::render::Albedo::White,
        ..Default::default()
    };
    let vp = Viewpoint::main(&cfg);
    let (img, mask) = render(&plane, &TextureImage::filled(1, 1, [0; 3]), &cfg, &vp).unwrap();
    assert!(si_geo(&plane, &cfg, &vp).unwrap() > 0.0);
    assert_eq!(spatial_information_masked(&img, Some(&mask), 2).unwrap(), 0.0);
}

fn checker(side: u32, cell: u32) -> TextureImage {
    TextureImage::from_fn_rgb(side, side, |x, y| if (x / cell + y / cell).is_multiple_of(2) { [30, 60, 90] } else { [220, 200, 180] })
}

#[test]
fn uniform_texture_has_zero_color_information() {
    let cfg = RenderConfig::default();
    let vp = Viewpoint::main(&cfg);
    let v = si_col(&uv_sphere(32, 64), &TextureImage::filled(64, 64, [10, 150, 60]), &cfg, &vp).unwrap();
    assert_eq!(v, 0.0);
}

#[test]
fn checker_quad_matches_brute_force_on_unlit_render() {
    let plane = grid_plane(1);
    let tex = checker(64, 8);
    let cfg = RenderConfig::default();
    let vp = Viewpoint {
        azimuth_deg: 25.0,
        elevation_deg: 10.0,
        ..Viewpoint::main(&cfg)
    };
    let unlit = RenderConfig {
        lit: false,
        ..cfg.clone()
    };
    let (img, mask) = render(&plane, &tex, &unlit, &vp).unwrap();
    let (w, h) = (650usize, 550usize);
    let keep = |x: usize, y: usize| {
        (-2i64..=2).all(|dy| {
            (-2i64..=2).all(|dx| {
                let (xx, yy) = (x as i64 + dx, y as i64 + dy);
                xx >= 0 && yy >= 0 && (xx as usize) < w && (yy as usize) < h && mask.get(xx as u32, yy as u32)
            })
        })
    };
    let expected = brute_sobel_std(&img.luma(), w, h, keep);
    let got = si_col(&plane, &tex, &cfg, &vp).unwrap();
    assert!(expected > 10.0);
    assert!((got - expected).abs() < 1e-9 * expected, "{got} vs {expected}");
}

#[test]
fn color_information_ignores_the_light() {
    let (mesh, tex) = (uv_sphere(32, 64), natural_texture(256, 2));
    let base = RenderConfig::default();
    let vp = Viewpoint::main(&base);
    let a = si_col(&mesh, &tex, &base, &vp).unwrap();
    let moved = RenderConfig {
        light_azimuth_deg: -120.0,
        light_elevation_deg: -30.0,
        ..base.clone()
    };
    assert_eq!(a, si_col(&mesh, &tex, &moved, &vp).unwrap());
}

#[test]
fn constant_render_gives_full_attention_complexity() {
    let img = TextureImage::filled(650, 550, [200; 3]);
    let map = SpectralResidual::default().saliency(&img).unwrap();
    let vac = vac_from_map(&map, &CoverageMask::full(650, 550)).unwrap();
    assert!((vac - 1.0).abs() < 1e-9);
}

#[test]
fn ring_max_dominates_the_main_view() {
    let (mesh, tex) = (perturbed(&uv_sphere(24, 48), 0.02, 4), natural_texture(128, 8));
    let cfg = RenderConfig {
        width: 160,
        height: 140,
        ..Default::default()
    };
    let sal = SpectralResidual::default();
    let main = characterize("m", &mesh, &tex, &cfg, &sal, ViewMode::Main).unwrap();
    let ring = characterize("m", &mesh, &tex, &cfg, &sal, ViewMode::RingMax(4)).unwrap();
    assert!(ring.si_geo >= main.si_geo && ring.si_col >= main.si_col && ring.vac >= main.vac);
    assert!((0.0..=1.0).contains(&main.vac));
}

fn gray(w: u32, h: u32, data: &[u8]) -> TextureImage {
    TextureImage::new(w, h, 1, data.to_vec()).unwrap()
}

proptest! {
    #[test]
    fn si_ignores_offset_and_scales_with_contrast(
        data in prop::collection::vec(0u8..=80, 48),
        offset in 0u8..=15,
        a in 1u8..=3,
    ) {
        let base = gray(8, 6, &data);
        let si = spatial_information(&base).unwrap();
        let shifted: Vec<u8> = data.iter().map(|v| v + offset).collect();
        prop_assert!((spatial_information(&gray(8, 6, &shifted)).unwrap() - si).abs() < 1e-9);
        let scaled: Vec<u8> = data.iter().map(|v| v * a).collect();
        let s2 = spatial_information(&gray(8, 6, &scaled)).unwrap();
        prop_assert!((s2 - a as f64 * si).abs() < 1e-9 * (1.0 + si));
    }

    #[test]
    fn vac_is_bounded_and_order_free(
        values in prop::collection::vec(0.0f64..10.0, 2..60),
        rot in 0usize..60,
    ) {
        let n = values.len() as u32;
        let mask = CoverageMask::full(n, 1);
        let v = vac_from_map(&values, &mask).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        let mut permuted = values.clone();
        permuted.rotate_left(rot % values.len());
        permuted.reverse();
        prop_assert!((vac_from_map(&permuted, &mask).unwrap() - v).abs() < 1e-12);
    }
}
