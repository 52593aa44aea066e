//! Checkpoint round trips, prediction range and search determinism.

use holab_core::dataset::{Dataset, LabeledSequence, NormalizationSpec, SequenceMeta};
use holab_core::NUM_FEATURES;
use holab_models::model_io::{from_checkpoint, to_checkpoint};
use holab_models::predict::rescale_prediction;
use holab_models::search::{search_cw, search_lstm, search_mlp};
use holab_models::{
    load_model, save_model, AeShape, LstmRegressor, MlpRegressor, Predictor, SeqAutoencoder,
    TrainConfig,
};
use holab_neural::{Params, Tensor2D};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WINDOWS: usize = 4;

fn random_dataset(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = Dataset::empty(WINDOWS);
    for i in 0..n {
        d.push(LabeledSequence {
            features: (0..WINDOWS * NUM_FEATURES).map(|_| rng.gen()).collect(),
            label: rng.gen_range(0.5..40.0),
            meta: SequenceMeta {
                run_id: 1,
                ue_id: i as u32,
                rank: 1,
                target_cell: 0,
            },
        })
        .unwrap();
    }
    d
}

fn norm(seed: u64) -> NormalizationSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min: Vec<f64> = (0..NUM_FEATURES)
        .map(|_| rng.gen_range(-100.0..0.0))
        .collect();
    let max = min.iter().map(|m| m + rng.gen_range(0.0..50.0)).collect();
    NormalizationSpec::from_parts(min, max).unwrap()
}

fn widths() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..6, 1..3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn regressor_checkpoint_round_trips(hidden in widths(), seed in 0u64..1000, with_norm: bool) {
        let m = LstmRegressor::new(NUM_FEATURES, &hidden, seed);
        let n = with_norm.then(|| norm(seed));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.holab");
        save_model(&m, n.as_ref(), &path).unwrap();
        let (back, back_norm) = load_model::<LstmRegressor>(&path).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(back_norm, n);
    }

    #[test]
    fn autoencoder_and_mlp_checkpoints_round_trip(
        enc in widths(), dec in widths(), mlp in widths(), seed in 0u64..1000,
    ) {
        let shape = AeShape { encoder: enc, decoder: dec };
        let ae = SeqAutoencoder::new(NUM_FEATURES, &shape, seed);
        let (back, _) = from_checkpoint::<SeqAutoencoder>(to_checkpoint(&ae, None).unwrap()).unwrap();
        prop_assert_eq!(back.shape(), shape);
        prop_assert_eq!(back.checksum(), ae.checksum());
        let m = MlpRegressor::new(ae.cw(), &mlp, seed);
        let (back, _) = from_checkpoint::<MlpRegressor>(to_checkpoint(&m, Some(&norm(seed))).unwrap()).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn predictions_lie_in_horizon(raw in -1e6f64..1e6) {
        let s = rescale_prediction(raw).unwrap();
        prop_assert!(s > 0.0 && s <= 40.0);
    }

    #[test]
    fn model_predictions_lie_in_horizon(seed in 0u64..200) {
        let d = random_dataset(3, seed);
        let seqs: Vec<&[f64]> = d.sequences.iter().map(|s| s.features.as_slice()).collect();
        let lstm = Predictor::Lstm(LstmRegressor::new(NUM_FEATURES, &[3], seed));
        let ae = SeqAutoencoder::new(NUM_FEATURES, &AeShape::symmetric(3), seed);
        let both = Predictor::ae_mlp(ae, MlpRegressor::new(3, &[4], seed)).unwrap();
        for p in [lstm, both] {
            for s in p.predict_seconds(&seqs, WINDOWS).unwrap() {
                prop_assert!(s > 0.0 && s <= 40.0);
            }
        }
    }
}

#[test]
fn checkpoint_kind_is_checked() {
    let m = LstmRegressor::new(NUM_FEATURES, &[3], 1);
    let ck = to_checkpoint(&m, None).unwrap();
    assert!(from_checkpoint::<MlpRegressor>(ck.clone()).is_err());
    let mut bad = ck;
    bad.tensors.pop();
    assert!(from_checkpoint::<LstmRegressor>(bad).is_err());
}

#[test]
fn unnormalized_sequence_is_rejected() {
    let p = Predictor::Lstm(LstmRegressor::new(NUM_FEATURES, &[3], 1));
    let mut raw = vec![0.5; WINDOWS * NUM_FEATURES];
    raw[7] = -87.0;
    assert!(holab_models::predict_download_time(&p, &raw, WINDOWS).is_err());
    raw[7] = 0.4;
    assert!(holab_models::predict_download_time(&p, &raw, WINDOWS).is_ok());
}

#[test]
fn duplicated_candidates_score_identically() {
    let d = random_dataset(12, 5);
    let cfg = TrainConfig {
        epochs: 3,
        batch_size: 4,
        ..TrainConfig::default()
    };
    let r = search_lstm(&d, &[vec![4], vec![4]], &cfg).unwrap();
    assert_eq!(r.ranked.len(), 2);
    assert_eq!(r.ranked[0].score, r.ranked[1].score);

    let r = search_cw(&d, &[3, 3, 5], &cfg).unwrap();
    let threes: Vec<f64> = r
        .ranked
        .iter()
        .filter(|c| c.name == "cw=3")
        .map(|c| c.score)
        .collect();
    assert_eq!(threes.len(), 2);
    assert_eq!(threes[0], threes[1]);

    let codes = Tensor2D::from_vec(12, 3, (0..36).map(|i| (i % 7) as f64 / 7.0).collect()).unwrap();
    let r = search_mlp(&codes, &d.labels(), &[vec![5], vec![5, 3]], &cfg).unwrap();
    assert!(r.ranked[0].score <= r.ranked[1].score);
    let mut text = Vec::new();
    r.write_text(&mut text).unwrap();
    assert!(String::from_utf8(text).unwrap().lines().count() == 3);

    assert!(search_lstm(&d, &[], &cfg).is_err());
}
