use meshqa_core::asset::{decode_jpeg, encode_jpeg, parse_obj, write_obj, Corner, IndexedMesh, TextureImage};
use proptest::prelude::*;

fn tobj_triangles(text: &str) -> (Vec<u32>, Vec<u32>) {
    let mut reader = std::io::BufReader::new(text.as_bytes());
    let opts = tobj::LoadOptions {
        triangulate: true,
        single_index: false,
        ..Default::default()
    };
    let (models, _) = tobj::load_obj_buf(&mut reader, &opts, |_| Err(tobj::LoadError::OpenFileFailed)).unwrap();
    let m = &models[0].mesh;
    (m.indices.clone(), m.texcoord_indices.clone())
}

#[test]
fn negative_indices_match_reference_loader() {
    let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nf -3/-3 -2/-2 -1/-1\n\
                v 1 1 0\nvt 1 1\nf -4/-4 -2/-2 -1/-1\n";
    let ours = parse_obj(text).unwrap();
    let (pos, uv) = tobj_triangles(text);
    let ours_pos: Vec<u32> = ours.triangles.iter().flat_map(|t| t.map(|c| c.position)).collect();
    let ours_uv: Vec<u32> = ours.triangles.iter().flat_map(|t| t.map(|c| c.uv.unwrap())).collect();
    assert_eq!(ours_pos, pos);
    assert_eq!(ours_uv, uv);
    assert_eq!(ours_pos[..3], [0, 1, 2]);
}

#[test]
fn quad_triangulation_matches_reference_loader() {
    let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 1 1\nvt 0 1\nf 1/1 2/2 3/3 4/4\n";
    let ours = parse_obj(text).unwrap();
    let (pos, _) = tobj_triangles(text);
    let ours_pos: Vec<u32> = ours.triangles.iter().flat_map(|t| t.map(|c| c.position)).collect();
    assert_eq!(ours_pos, pos);
}

fn random_mesh(n: usize, seed: u64) -> IndexedMesh {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let positions = (0..n)
        .map(|_| [rng.random_range(-1e3..1e3), rng.random::<f64>(), rng.random_range(-1e-6..1e-6)])
        .collect();
    let uvs = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
    let triangles = (0..2 * n)
        .map(|_| {
            [0; 3].map(|_| Corner::new(rng.random_range(0..n as u32), rng.random_range(0..n as u32)))
        })
        .collect();
    IndexedMesh {
        name: "random".into(),
        positions,
        uvs,
        triangles,
        ..Default::default()
    }
}

#[test]
fn ten_thousand_vertex_round_trip() {
    let m = random_mesh(10_000, 7);
    let back = parse_obj(&write_obj(&m)).unwrap();
    assert_eq!(back, m);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn obj_round_trip(n in 3usize..200, seed in any::<u64>()) {
        let m = random_mesh(n, seed);
        prop_assert_eq!(parse_obj(&write_obj(&m)).unwrap(), m);
    }

    #[test]
    fn jpeg_framing_and_dimensions(w in 1u32..70, h in 1u32..70, q in 1u8..=100, seed in any::<u64>()) {
        let img = TextureImage::from_fn_rgb(w, h, |x, y| {
            let v = seed.wrapping_mul((x * 31 + y * 17 + 1) as u64) >> 40;
            [v as u8, (v >> 8) as u8, (v >> 16) as u8]
        });
        let bytes = encode_jpeg(&img, q).unwrap();
        prop_assert_eq!(&bytes[..2], &[0xFF, 0xD8]);
        prop_assert_eq!(&bytes[bytes.len() - 2..], &[0xFF, 0xD9]);
        let back = decode_jpeg(&bytes).unwrap();
        prop_assert_eq!((back.width(), back.height(), back.channels()), (w, h, 3));
    }
}

fn reference_decode(bytes: &[u8]) -> image::RgbImage {
    image::load_from_memory_with_format(bytes, image::ImageFormat::Jpeg)
        .unwrap()
        .to_rgb8()
}

#[test]
fn mid_gray_at_quality_90_against_reference_decoder() {
    let img = TextureImage::filled(128, 96, [128, 128, 128]);
    let bytes = encode_jpeg(&img, 90).unwrap();
    let reference = reference_decode(&bytes);
    let ours = decode_jpeg(&bytes).unwrap();
    for (p, q) in img.data().iter().zip(reference.as_raw()) {
        assert!(p.abs_diff(*q) <= 2);
    }
    for (p, q) in img.data().iter().zip(ours.data()) {
        assert!(p.abs_diff(*q) <= 2);
    }
}

#[test]
fn our_stream_decodes_close_to_reference_decoder() {
    let img = meshqa_core::fixtures::natural_texture(200, 3);
    let bytes = encode_jpeg(&img, 75).unwrap();
    let reference = reference_decode(&bytes);
    let ours = decode_jpeg(&bytes).unwrap();
    // Decoders differ only in IDCT rounding and chroma upsampling.
    let mean: f64 = ours
        .data()
        .iter()
        .zip(reference.as_raw())
        .map(|(a, b)| a.abs_diff(*b) as f64)
        .sum::<f64>()
        / ours.data().len() as f64;
    assert!(mean < 2.0, "mean abs difference {mean}");
}

#[test]
fn decodes_reference_encoder_output() {
    let img = meshqa_core::fixtures::natural_texture(130, 11);
    let mut bytes = Vec::new();
    let rgb = image::RgbImage::from_raw(img.width(), img.height(), img.data().to_vec()).unwrap();
    image::codecs::jpeg::JpegEncoder::new_with_quality(&mut bytes, 85)
        .encode_image(&rgb)
        .unwrap();
    let reference = reference_decode(&bytes);
    let ours = decode_jpeg(&bytes).unwrap();
    assert_eq!((ours.width(), ours.height()), (130, 130));
    let mean: f64 = ours
        .data()
        .iter()
        .zip(reference.as_raw())
        .map(|(a, b)| a.abs_diff(*b) as f64)
        .sum::<f64>()
        / ours.data().len() as f64;
    assert!(mean < 2.0, "mean abs difference {mean}");
}
