use std::time::Instant;

use meshqa_core::asset::{CoverageMask, TextureImage};
use meshqa_core::fixtures::{add_noise, natural_texture, noise_pairs};
use meshqa_core::glpips::*;
use meshqa_core::stats::srocc;
use ndarray::{Array3, ArrayView3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two layers: the input itself and a 2×2 average-pooled, squared copy.
struct ToyExtractor;

impl FeatureExtractor for ToyExtractor {
    fn descriptor(&self) -> ExtractorDescriptor {
        ExtractorDescriptor {
            architecture: "toy".into(),
            channels: vec![3, 3],
            source: WeightSource::None,
        }
    }

    fn input_channels(&self) -> usize {
        3
    }

    fn features(&self, input: ArrayView3<'_, f32>) -> Result<Vec<Array3<f32>>, GlpipsError> {
        let (c, h, w) = input.dim();
        let pooled = Array3::from_shape_fn((c, h / 2, w / 2), |(k, y, x)| {
            let s = input[[k, 2 * y, 2 * x]] + input[[k, 2 * y + 1, 2 * x]] + input[[k, 2 * y, 2 * x + 1]] + input[[k, 2 * y + 1, 2 * x + 1]];
            (0.25 * s).powi(2) + 0.1
        });
        Ok(vec![input.to_owned(), pooled])
    }
}

fn grid_positions(w: u32, h: u32, mask: &CoverageMask) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    let mut y = 0;
    while y + 64 <= h {
        let mut x = 0;
        while x + 64 <= w {
            let mut covered = 0;
            for yy in y..y + 64 {
                for xx in x..x + 64 {
                    covered += mask.get(xx, yy) as u32;
                }
            }
            if covered as f64 / 4096.0 >= 0.65 {
                out.push((x, y));
            }
            x += 32;
        }
        y += 32;
    }
    out
}

#[test]
fn patch_grid_on_the_default_frame() {
    let img = natural_texture(650, 1);
    let img = TextureImage::from_fn_rgb(650, 550, |x, y| img.rgb(x, y));
    let t = Instant::now();
    let set = patchify(&img, &CoverageMask::full(650, 550)).unwrap();
    assert!(t.elapsed().as_secs_f64() < 1.0);
    assert_eq!(set.len(), 304);

    let empty = CoverageMask::from_fn(650, 550, |_, _| false);
    assert_eq!(patchify(&img, &empty), Err(GlpipsError::EmptyPatchSet));

    let left = CoverageMask::from_fn(650, 550, |x, _| x < 64);
    let set = patchify(&img, &left).unwrap();
    assert_eq!(set.len(), 16);
    let got: Vec<(u32, u32)> = set.patches.iter().map(|p| (p.x, p.y)).collect();
    assert_eq!(got, grid_positions(650, 550, &left));
}

#[test]
fn irregular_masks_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let (w, h) = (rng.random_range(64..200), rng.random_range(64..200));
        let (cx, cy, r) = (rng.random_range(0.0..w as f64), rng.random_range(0.0..h as f64), rng.random_range(20.0..120.0));
        let mask = CoverageMask::from_fn(w, h, |x, y| (x as f64 - cx).hypot(y as f64 - cy) < r);
        let img = TextureImage::filled(w, h, [9; 3]);
        let expected = grid_positions(w, h, &mask);
        match patchify(&img, &mask) {
            Ok(set) => assert_eq!(set.patches.iter().map(|p| (p.x, p.y)).collect::<Vec<_>>(), expected),
            Err(GlpipsError::EmptyPatchSet) => assert!(expected.is_empty()),
            Err(e) => panic!("{e}"),
        }
    }
}

fn random_model(ext: &dyn FeatureExtractor, rng: &mut ChaCha8Rng) -> QualityModel {
    let mut m = QualityModel::initial(ext.descriptor());
    for w in m.omega.iter_mut().flatten() {
        *w = rng.random_range(0.0..2.0);
    }
    for w in m.omega0.iter_mut() {
        *w = rng.random_range(0.0..2.0);
    }
    m
}

#[test]
fn metric_identities_on_random_cases() {
    let ext = AlexNetExtractor::seeded(21);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..100 {
        let (w, h) = (rng.random_range(64..140), rng.random_range(64..140));
        let tex = natural_texture(w.max(h), 500 + case);
        let reference = TextureImage::from_fn_rgb(w, h, |x, y| tex.rgb(x, y));
        let distorted = add_noise(&reference, rng.random_range(1.0..40.0), case);
        let mask = CoverageMask::full(w, h);
        let model = random_model(&ext, &mut rng);

        let set = patchify(&reference, &mask).unwrap();
        let first = patch_tensor(&reference, &set.patches[0]);
        assert_eq!(patch_distance(first.view(), first.view(), &ext, &model).unwrap(), 0.0);
        assert_eq!(predict_mos(&reference, &reference, &mask, &ext, &model).unwrap(), 5.0);

        let per_patch: Vec<f64> = set
            .patches
            .iter()
            .map(|p| patch_distance(patch_tensor(&reference, p).view(), patch_tensor(&distorted, p).view(), &ext, &model).unwrap())
            .collect();
        let brute = per_patch.iter().sum::<f64>() / per_patch.len() as f64;
        let q = image_quality(&reference, &distorted, &mask, &ext, &model).unwrap();
        assert!((q - brute).abs() <= 1e-12 * brute.max(1.0), "case {case}: {q} vs {brute}");
        let mos = predict_mos(&reference, &distorted, &mask, &ext, &model).unwrap();
        assert_eq!(mos, (5.0 - 4.0 * brute).clamp(1.0, 5.0));
    }
}

#[test]
fn hand_computed_toy_distance() {
    // One layer with two channels at a 1×2 grid of sites.
    let a = Array3::from_shape_vec((2, 1, 2), vec![1.0f32, 0.0, 0.0, 1.0]).unwrap();
    let b = Array3::from_shape_vec((2, 1, 2), vec![0.0f32, 0.0, 1.0, 1.0]).unwrap();
    // Normalized site vectors: a = (1,0), (0,1); b = (0,1), (0,1).
    // Squared differences per channel: site 0 (1, 1), site 1 (0, 0) -> channel means (0.5, 0.5).
    let e = layer_errors(&[a], &[b]).unwrap();
    assert!((e[0][0] - 0.5).abs() < 1e-9 && (e[0][1] - 0.5).abs() < 1e-9);
    let model = QualityModel {
        extractor: ExtractorDescriptor {
            architecture: "identity".into(),
            channels: vec![2],
            source: WeightSource::None,
        },
        omega: vec![vec![2.0, 0.5]],
        omega0: vec![3.0],
    };
    assert!((head_distance(&model, &e) - 3.0 * (2.0 * 0.5 + 0.5 * 0.5)).abs() < 1e-9);
}

fn fd_loss(head: &Head, patches: &[Vec<LayerErrors>], targets: &[f64]) -> f64 {
    let n = patches.len() as f64;
    patches
        .iter()
        .zip(targets)
        .map(|(p, t)| {
            let q = p.iter().map(|e| head.distance(e)).sum::<f64>() / p.len() as f64;
            (q - t).powi(2) / n
        })
        .sum()
}

#[test]
fn gradient_matches_central_differences() {
    let start = Instant::now();
    let ext = ToyExtractor;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let patches: Vec<Vec<LayerErrors>> = (0..4)
        .map(|i| {
            let r = natural_texture(96, 40 + i);
            let d = add_noise(&r, 10.0 + 10.0 * i as f64, i);
            patch_errors(&r, &d, &CoverageMask::full(96, 96), &ext).unwrap().errors
        })
        .collect();
    let targets = [0.1, 0.3, 0.55, 0.9];
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let model = random_model(&ext, &mut rng);
        let head = Head::from_model(&model);
        let batch: Vec<ImageErrors> = patches
            .iter()
            .zip(&targets)
            .map(|(p, &t)| {
                let mut mean: LayerErrors = p[0].iter().map(|l| vec![0.0; l.len()]).collect();
                for e in p {
                    for (m, l) in mean.iter_mut().zip(e) {
                        for (a, b) in m.iter_mut().zip(l) {
                            *a += b / p.len() as f64;
                        }
                    }
                }
                ImageErrors { errors: mean, target: t }
            })
            .collect();
        let (loss, grad) = loss_and_gradient(&head, &batch);
        assert!((loss - fd_loss(&head, &patches, &targets)).abs() < 1e-12);
        let analytic: Vec<f64> = grad.params().copied().collect();
        let step = 1e-5;
        for (k, &a) in analytic.iter().enumerate() {
            let mut plus = head.clone();
            let mut minus = head.clone();
            *plus.params_mut().nth(k).unwrap() += step;
            *minus.params_mut().nth(k).unwrap() -= step;
            let numeric = (fd_loss(&plus, &patches, &targets) - fd_loss(&minus, &patches, &targets)) / (2.0 * step);
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-10);
            worst = worst.max(rel);
        }
    }
    assert!(worst <= 1e-3, "worst relative error {worst}");
    assert!(start.elapsed().as_secs() < 30);
}

#[test]
fn identical_pairs_have_zero_loss_with_zero_head() {
    let r = natural_texture(96, 2);
    let set = vec![TrainSample {
        reference: r.clone(),
        distorted: r,
        mask: CoverageMask::full(96, 96),
        mos: 5.0,
    }];
    let ext = AlexNetExtractor::seeded(1);
    let prepared = prepare(&set, &ext).unwrap();
    let cfg = TrainConfig {
        epochs: 1,
        ..TrainConfig::default()
    };
    let report = train_prepared(&prepared, &QualityModel::zeros(ext.descriptor()), &cfg).unwrap();
    assert_eq!(report.epoch_losses, vec![0.0]);
}

#[test]
fn training_improves_and_ranks_held_out_pairs() {
    let ext = AlexNetExtractor::seeded(11);
    let data = noise_pairs(50, 160, 100);
    let prepared = prepare(&data, &ext).unwrap();
    let report = train_prepared(&prepared[..40], &QualityModel::initial(ext.descriptor()), &TrainConfig::default()).unwrap();
    assert_eq!(report.epoch_losses.len(), 10);
    assert!(report.epoch_losses[9] < report.epoch_losses[0]);
    let head = Head::from_model(&report.model);
    let (pred, truth): (Vec<f64>, Vec<f64>) = prepared[40..]
        .iter()
        .map(|p| (p.patch_errors.iter().map(|e| head.distance(e)).sum::<f64>() / p.patch_errors.len() as f64, p.target))
        .unzip();
    assert!(srocc(&pred, &truth).unwrap() >= 0.8);
    assert!(report.model.omega.iter().flatten().chain(&report.model.omega0).all(|&w| w >= 0.0));
}

#[test]
fn saved_models_predict_identically() {
    let ext = AlexNetExtractor::seeded(5);
    let data = noise_pairs(8, 96, 7);
    let cfg = TrainConfig {
        epochs: 2,
        constant_epochs: 1,
        learning_rate: 1e-2,
        ..TrainConfig::default()
    };
    let model = train(&data, &ext, &cfg).unwrap().model;
    for bundled in [None, Some(&ext)] {
        let (loaded, extractor) = load_model(&save_model(&model, bundled).unwrap()).unwrap();
        assert_eq!(loaded, model);
        let ext2 = extractor_for(&loaded, extractor).unwrap();
        for s in &data {
            let a = image_quality(&s.reference, &s.distorted, &s.mask, &ext, &model).unwrap();
            let b = image_quality(&s.reference, &s.distorted, &s.mask, ext2.as_ref(), &loaded).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn folds_partition_models() {
    let ids: Vec<String> = (0..23).map(|i| format!("m{i}")).collect();
    let folds = kfold_split(&ids, 5, 3).unwrap();
    let mut tested: Vec<&String> = folds.iter().flat_map(|f| &f.test).collect();
    tested.sort();
    let mut all: Vec<&String> = ids.iter().collect();
    all.sort();
    assert_eq!(tested, all);
    for f in &folds {
        assert!(f.test.iter().all(|t| !f.train.contains(t)));
        assert_eq!(f.test.len() + f.train.len(), 23);
        assert!((4..=5).contains(&f.test.len()));
    }
    assert!(matches!(kfold_split(&ids, 1, 0), Err(GlpipsError::TooFewModels { .. })));
    assert!(matches!(kfold_split(&ids[..3], 4, 0), Err(GlpipsError::TooFewModels { .. })));
}
