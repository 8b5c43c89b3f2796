use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use meshqa_core::asset::{encode_jpeg, CoverageMask, TextureImage};
use meshqa_core::distortion::{quantize_positions, simplify_levels};
use meshqa_core::fixtures::{add_noise, natural_texture, selection_candidates, uv_sphere};
use meshqa_core::glpips::{image_quality, patchify, AlexNetExtractor, FeatureExtractor, QualityModel};
use meshqa_core::stats::{select_stimuli, srocc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn frame() -> TextureImage {
    let tex = natural_texture(650, 1);
    TextureImage::from_fn_rgb(650, 550, |x, y| tex.rgb(x, y))
}

fn glpips(c: &mut Criterion) {
    let img = frame();
    let mask = CoverageMask::full(650, 550);
    c.bench_function("patchify 650x550", |b| b.iter(|| patchify(black_box(&img), &mask).unwrap()));

    let ext = AlexNetExtractor::seeded(1);
    let model = QualityModel::initial(ext.descriptor());
    let reference = natural_texture(256, 2);
    let distorted = add_noise(&reference, 20.0, 3);
    let mask = CoverageMask::full(256, 256);
    let mut g = c.benchmark_group("quality");
    g.sample_size(10);
    g.bench_function("image_quality 256x256 seeded alexnet", |b| {
        b.iter(|| image_quality(&reference, black_box(&distorted), &mask, &ext, &model).unwrap())
    });
    g.finish();
}

fn distortion(c: &mut Criterion) {
    let tex = natural_texture(1024, 4);
    c.bench_function("encode_jpeg 1024x1024 q75", |b| b.iter(|| encode_jpeg(black_box(&tex), 75).unwrap()));

    let sphere = uv_sphere(90, 120);
    c.bench_function("quantize_positions qp9 21k faces", |b| b.iter(|| quantize_positions(black_box(&sphere), 9).unwrap()));
    let mut g = c.benchmark_group("qem");
    g.sample_size(10);
    g.bench_function("simplify_levels 21k faces", |b| b.iter(|| simplify_levels(black_box(&sphere)).unwrap()));
    g.finish();
}

fn stats(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x: Vec<f64> = (0..10_000).map(|_| rng.random()).collect();
    let y: Vec<f64> = x.iter().map(|v| v + rng.random_range(-0.2..0.2)).collect();
    c.bench_function("srocc 10k", |b| b.iter(|| srocc(black_box(&x), &y).unwrap()));

    let cands = selection_candidates(50, 100, 1);
    let mut g = c.benchmark_group("selection");
    g.sample_size(10);
    g.bench_function("select 500 of 5000", |b| {
        b.iter_batched(|| cands.clone(), |c| select_stimuli(&c, 500, 9).unwrap(), BatchSize::LargeInput)
    });
    g.finish();
}

criterion_group!(benches, glpips, distortion, stats);
criterion_main!(benches);
