mod common;

use proptest::prelude::*;

use matrec::augment::{augment_image, AugmentConfig};
use matrec::backbone::{Backbone, ToyBackbone};
use matrec::dataset::{make_splits, ClassCatalog, DatasetManifest, ImageRecord, Partition, DEFAULT_FRACTIONS};
use matrec::head::{build_head, softmax_rows, Checkpoint, HeadSpec, Matrix};
use matrec::inference::{material_argmax_index, Classifier, TtaConfig};
use matrec::raster::RgbImage;
use matrec::rng::SampleRng;

fn manifest(counts: &[usize]) -> DatasetManifest {
    let names: Vec<String> = (0..counts.len()).map(|i| format!("class{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let catalog = ClassCatalog::from_names(&refs, false).unwrap();
    let records = counts
        .iter()
        .enumerate()
        .flat_map(|(c, &n)| {
            (0..n).map(move |i| ImageRecord {
                id: format!("class{c}/{i:03}.png"),
                class_index: c,
                width: 300,
                height: 300,
                sha256: format!("{:064x}", c * 1000 + i),
                digest64: format!("{:016x}", c * 1000 + i),
            })
        })
        .collect();
    DatasetManifest::from_records("/d".into(), catalog, records, Vec::new())
}

proptest! {
    #[test]
    fn softmax_rows_sum_to_one(rows in 1usize..6, cols in 1usize..12, vals in prop::collection::vec(-50.0f64..50.0, 72)) {
        let m = Matrix::from_vec(rows, cols, vals[..rows * cols].to_vec());
        let p = softmax_rows(&m);
        for i in 0..rows {
            let s: f64 = p.row(i).iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
            prop_assert!(p.row(i).iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn argmax_never_returns_the_outlier(v in prop::collection::vec(0.0f64..1.0, 2..13), o in 0usize..13, exp in -8i32..8) {
        let outlier = o % v.len();
        let got = material_argmax_index(&v, Some(outlier));
        prop_assert_ne!(got, outlier);
        // powers of two scale exactly, so ties and order are preserved
        let scaled: Vec<f64> = v.iter().map(|x| x * 2f64.powi(exp)).collect();
        prop_assert_eq!(material_argmax_index(&scaled, Some(outlier)), got);
        // reference: first index holding the maximum among materials
        let max = v.iter().enumerate().filter(|(i, _)| *i != outlier).map(|(_, x)| *x).fold(f64::MIN, f64::max);
        let first = (0..v.len()).find(|&i| i != outlier && v[i] == max).unwrap();
        prop_assert_eq!(got, first);
    }

    #[test]
    fn splits_partition_every_class(counts in prop::collection::vec(3usize..80, 1..6), seed in any::<u64>()) {
        let m = manifest(&counts);
        let s = make_splits(&m, DEFAULT_FRACTIONS, seed).unwrap();
        s.check_invariants().unwrap();
        for (c, &n) in counts.iter().enumerate() {
            let of = |p: Partition| s.partition(p).iter().filter(|id| s.entries[*id].class_index == c).count();
            let expect = (15 * n + 50) / 100;
            prop_assert_eq!(of(Partition::Test), expect);
            prop_assert_eq!(of(Partition::Val), expect);
            prop_assert_eq!(of(Partition::Train), n - 2 * expect);
        }
        prop_assert_eq!(s.digest().unwrap(), make_splits(&m, DEFAULT_FRACTIONS, seed).unwrap().digest().unwrap());
    }

    #[test]
    fn augmentation_draws_stay_in_range(w in 2u32..200, h in 2u32..200, seed in any::<u64>(), epoch in 0u32..50, index in any::<u32>()) {
        let cfg = AugmentConfig { input_side: 8, ..AugmentConfig::default() };
        let (out, trace) = augment_image(&RgbImage::new(w, h), &cfg, SampleRng::new(seed, epoch, index)).unwrap();
        prop_assert_eq!(out.dimensions(), (8, 8));
        let c = trace.crop.unwrap();
        prop_assert!(c.height >= h.div_ceil(2) && c.height <= h);
        prop_assert!(c.width >= w.div_ceil(2) && c.width <= w);
        prop_assert!(c.top + c.height <= h && c.left + c.width <= w);
        let p = trace.illumination.unwrap();
        prop_assert!(p.contrast > 0.3 && p.contrast < 1.0);
        prop_assert!(p.gamma > 0.5 && p.gamma < 5.0);
        prop_assert!(p.saturation > 0.7 && p.saturation < 1.0);
    }

    #[test]
    fn checkpoint_round_trips(seed in any::<u64>(), width in 1usize..6, hidden in 1usize..9, outlier in any::<bool>()) {
        let toy = ToyBackbone::new(seed % 100, width).unwrap();
        let catalog = ClassCatalog::from_names(&["a", "b", "c"], outlier).unwrap();
        let head = HeadSpec::two_block("two-block", toy.spec().flatten_size(), [hidden, hidden], catalog.total_classes());
        let mut params = build_head(&head, seed).unwrap();
        common::jitter_params(&mut params, 0.5, seed);
        params.tensors_mut().into_iter().for_each(|t| t.iter_mut().for_each(|v| *v = matrec::head::snap(*v)));
        let ckpt = Checkpoint { head, backbone: toy.spec().clone(), catalog, params };
        let back = Checkpoint::from_bytes(&ckpt.to_bytes().unwrap()).unwrap();
        prop_assert_eq!(back, ckpt);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn five_crop_mean_is_a_distribution(w in 8u32..120, h in 8u32..120, seed in 0u64..1000) {
        let toy = ToyBackbone::new(seed, 4).unwrap();
        let catalog = ClassCatalog::from_names(&["a", "b"], true).unwrap();
        let head = HeadSpec::single_dense("single-dense", toy.spec().flatten_size(), 3);
        let params = build_head(&head, seed).unwrap();
        let classifier = Classifier::new(&toy, &head, &params, &catalog).unwrap();
        let img = RgbImage::from_fn(w, h, |x, y| image::Rgb([(x * 7 + seed as u32) as u8, (y * 3) as u8, ((x ^ y) * 5) as u8]));
        let p = classifier.predict(&img, &TtaConfig::on()).unwrap();
        prop_assert!((p.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(p.probs.iter().all(|v| *v >= 0.0));
        prop_assert_ne!(p.predicted_index, 2);
    }
}
