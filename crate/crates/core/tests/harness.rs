mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use common::{gaussian, rng};
use itra_core::decomposition::{KeySequence, KeySequenceSet};
use itra_core::harness::{
    ablation_inter_only, ablation_shared_dictionary, baseline_uniform_keyframes, evaluate, ingest, kmeans,
    keyframes_from_centers, synth_gen, Dataset, ExperimentConfig, LabeledVideo, Split, SynthConfig,
};
use itra_core::descriptors::PhogConfig;
use itra_core::itra::{itra, BankConfig, DictionaryBank, ItraConfig};
use itra_core::sparse_solvers::Dictionary;
use itra_core::video::{Frame, VideoTensor};

fn mean_frame(v: &VideoTensor) -> DVector<f64> {
    let n = v.len() as f64;
    let mut acc = DVector::zeros(v.width() * v.height());
    for f in v.frames() {
        for (a, &p) in acc.iter_mut().zip(f.pixels()) {
            *a += p as f64 / n;
        }
    }
    acc
}

#[test]
fn synthetic_classes_are_learnable() {
    for seed in 0..3 {
        let ds = synth_gen(&SynthConfig::default(), seed).unwrap();
        let c = ds.num_classes();
        let mut centroids = vec![DVector::zeros(32 * 32); c];
        let mut counts = vec![0.0; c];
        for v in ds.split(Split::Train) {
            centroids[v.class_id] += mean_frame(&v.video);
            counts[v.class_id] += 1.0;
        }
        for (m, n) in centroids.iter_mut().zip(&counts) {
            *m /= *n;
        }
        let tests: Vec<&LabeledVideo> = ds.split(Split::Test).collect();
        let hits = tests
            .iter()
            .filter(|v| {
                let f = mean_frame(&v.video);
                let pred = (0..c)
                    .min_by(|&a, &b| (&f - &centroids[a]).norm().total_cmp(&(&f - &centroids[b]).norm()))
                    .unwrap();
                pred == v.class_id
            })
            .count();
        assert!(hits as f64 / tests.len() as f64 > 1.0 / c as f64, "seed {seed}");
    }
}

#[test]
fn kmeans_single_cluster_is_the_mean() {
    let mut r = rng(4);
    let pts = gaussian(3, 17, &mut r);
    let km = kmeans(&pts, 1, 100, 2).unwrap();
    assert!((km.centers.column(0) - pts.column_mean()).norm() < 1e-12);

    let frames = (0..9).map(|i| Frame::from_fn(8, 8, |x, y| ((x * y + i) % 5) as f32 / 5.0)).collect();
    let video = VideoTensor::new("v", frames, None).unwrap();
    let phog = PhogConfig::default();
    let emb = itra_core::harness::window_embeddings(&video, 1, &phog).unwrap();
    let mean = DMatrix::from_columns(&[emb.column_mean()]);
    let picked = keyframes_from_centers(&video, &mean, 1, &phog).unwrap();
    assert_eq!(picked.len(), 1);
    let best = (0..emb.ncols())
        .min_by(|&a, &b| (emb.column(a) - mean.column(0)).norm().total_cmp(&(emb.column(b) - mean.column(0)).norm()))
        .unwrap();
    assert_eq!(picked[0], best + 1);
}

fn toy_bank(classes: usize, positions: usize, delta: usize, seed: u64) -> DictionaryBank {
    let mut r = rng(seed);
    let dicts = (0..classes * positions)
        .map(|_| Dictionary::from_unnormalized(gaussian(delta, 4, &mut r)).unwrap())
        .collect();
    let cfg = BankConfig { mu: 1, delta, ..BankConfig::default() };
    DictionaryBank::from_parts(classes, positions, dicts, cfg).unwrap()
}

fn toy_keyseqs(positions: usize, delta: usize, seed: u64) -> KeySequenceSet {
    let mut r = rng(seed);
    KeySequenceSet {
        sequences: (0..positions)
            .map(|j| KeySequence {
                key_frame_index: 2 * j,
                frames: vec![],
                cuboid_descriptors: gaussian(delta, 6, &mut r),
            })
            .collect(),
        t: 1,
        source_video: "toy".into(),
        reference_class: Some(1),
    }
}

#[test]
fn inter_only_is_the_phi_block() {
    let bank = toy_bank(3, 3, 4, 1);
    let ks = toy_keyseqs(3, 4, 2);
    let cfg = ItraConfig::default();
    let inter = ablation_inter_only(&ks, &bank, &cfg).unwrap();
    assert_eq!(inter.len(), 9);
    let full = itra(&ks, &bank, 1, &cfg).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(inter.as_slice()), bits(&full.flat.as_slice()[..9]));
}

#[test]
fn shared_dictionary_pools_everything() {
    let mut cfg = ExperimentConfig::desk();
    cfg.bank.delta = 4;
    let sets: Vec<KeySequenceSet> = (0..6).map(|s| toy_keyseqs(3, 4, s)).collect();
    let refs: Vec<&KeySequenceSet> = sets.iter().collect();
    let shared = ablation_shared_dictionary(&refs, &cfg, 3).unwrap();
    assert_eq!(shared.dictionary.n_atoms(), cfg.bank.n_atoms());
    assert_eq!(shared.describe(&sets[0]).unwrap().len(), 3);
}

fn small_dataset() -> impl Strategy<Value = Dataset> {
    let video = (1usize..4, 1usize..4, 1usize..4).prop_flat_map(|(n, w, h)| {
        prop::collection::vec(prop::collection::vec(0.0f32..1.0, w * h), n)
            .prop_map(move |fs| fs.into_iter().map(|p| Frame::new(w, h, p).unwrap()).collect::<Vec<_>>())
    });
    (1usize..4)
        .prop_flat_map(move |c| prop::collection::vec((0..c, any::<bool>(), video.clone()), c..c + 4).prop_map(move |v| (c, v)))
        .prop_map(|(c, raw)| {
            let classes: Vec<String> = (0..c).map(|i| format!("class{i}")).collect();
            // every class needs a training video
            let mut entries: Vec<(Split, usize, Vec<Frame>)> = raw
                .into_iter()
                .enumerate()
                .map(|(i, (class, test, frames))| {
                    let split = if test && i >= c { Split::Test } else { Split::Train };
                    (split, if i < c { i } else { class }, frames)
                })
                .collect();
            entries.sort_by_key(|e| (e.0 == Split::Test, e.1));
            let videos = entries
                .into_iter()
                .enumerate()
                .map(|(i, (split, class, frames))| {
                    let name = format!("v{i:03}");
                    let id = format!("{}/{}/{name}", split.dir_name(), classes[class]);
                    LabeledVideo {
                        video: VideoTensor::new(id, frames, Some(class)).unwrap(),
                        class_id: class,
                        split,
                        name,
                    }
                })
                .collect();
            Dataset { classes, videos }
        })
}

fn labels(c: usize) -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((0..c, 0..c), 1..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ingest_reads_back_what_was_written(ds in small_dataset()) {
        let dir = tempfile::tempdir().unwrap();
        ds.write_vidf(dir.path()).unwrap();
        let back = ingest(dir.path()).unwrap();
        prop_assert_eq!(back, ds);
    }

    #[test]
    fn evaluation_invariants(pairs in labels(4), shift in 0usize..40) {
        let (preds, truth): (Vec<usize>, Vec<usize>) = pairs.iter().copied().unzip();
        let rep = evaluate(&preds, &truth, 4, "h", 0).unwrap();
        prop_assert!((0.0..=1.0).contains(&rep.accuracy));
        let trace: u64 = (0..4).map(|c| rep.confusion[c][c]).sum();
        prop_assert!((rep.accuracy - trace as f64 / truth.len() as f64).abs() < 1e-15);
        for c in 0..4 {
            let n = truth.iter().filter(|&&t| t == c).count() as u64;
            prop_assert_eq!(rep.confusion[c].iter().sum::<u64>(), n);
        }
        let mut rotated = pairs.clone();
        rotated.rotate_left(shift % pairs.len());
        rotated.reverse();
        let (p2, t2): (Vec<usize>, Vec<usize>) = rotated.into_iter().unzip();
        prop_assert_eq!(evaluate(&p2, &t2, 4, "h", 0).unwrap(), rep);
    }

    #[test]
    fn uniform_keyframes_are_segment_midpoints(n in 1usize..200, k in 1usize..10) {
        prop_assume!(n >= k);
        let got = baseline_uniform_keyframes(n, k).unwrap();
        let expect: Vec<usize> = (0..k).map(|i| ((i as f64 + 0.5) * n as f64 / k as f64).floor() as usize).collect();
        prop_assert_eq!(&got, &expect);
        prop_assert!(got.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(*got.last().unwrap() < n);
    }

    #[test]
    fn lloyd_finds_both_cluster_means(
        a in prop::collection::vec(-1.0f64..1.0, 2..15),
        b in prop::collection::vec(-1.0f64..1.0, 2..15),
        gap in 10.0f64..100.0,
        seed in any::<u64>(),
    ) {
        let pts: Vec<f64> = a.iter().copied().chain(b.iter().map(|x| x + gap)).collect();
        let km = kmeans(&DMatrix::from_row_slice(1, pts.len(), &pts), 2, 100, seed).unwrap();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let mut centers = [km.centers[(0, 0)], km.centers[(0, 1)]];
        centers.sort_by(f64::total_cmp);
        prop_assert!((centers[0] - mean(&a)).abs() < 1e-6);
        prop_assert!((centers[1] - (mean(&b) + gap)).abs() < 1e-6);
    }
}
