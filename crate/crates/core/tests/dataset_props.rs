use holab_core::dataset::*;
use holab_core::NUM_FEATURES;
use proptest::prelude::*;

fn arb_dataset() -> impl Strategy<Value = Dataset> {
    (1usize..4, 0usize..4).prop_flat_map(|(windows, n)| {
        let seq = (
            prop::collection::vec(-1e4f64..1e4, windows * NUM_FEATURES),
            0.01f64..=40.0,
            (1u32..25, 1u32..211, 0u32..9, 0u32..22),
        )
            .prop_map(|(features, label, (run_id, ue_id, rank, target_cell))| {
                LabeledSequence {
                    features,
                    label,
                    meta: SequenceMeta {
                        run_id,
                        ue_id,
                        rank,
                        target_cell,
                    },
                }
            });
        prop::collection::vec(seq, n).prop_map(move |sequences| Dataset { windows, sequences })
    })
}

fn to_f32(ds: &Dataset) -> Dataset {
    let mut out = ds.clone();
    for s in &mut out.sequences {
        s.label = s.label as f32 as f64;
        s.features.iter_mut().for_each(|x| *x = *x as f32 as f64);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn binary_round_trip_at_f32(ds in arb_dataset()) {
        let mut bytes = Vec::new();
        write_binary(&ds, &mut bytes).unwrap();
        let back = read_binary(&bytes[..]).unwrap();
        prop_assert_eq!(back.sequences, to_f32(&ds).sequences);
    }

    #[test]
    fn csv_round_trip_at_f32(ds in arb_dataset()) {
        let mut bytes = Vec::new();
        write_csv(&ds, &mut bytes).unwrap();
        let back = read_csv(&bytes[..]).unwrap();
        prop_assert_eq!(back.sequences, to_f32(&ds).sequences);
    }

    #[test]
    fn binary_truncation_never_yields_data(ds in arb_dataset(), frac in 0.0f64..1.0) {
        let mut bytes = Vec::new();
        write_binary(&ds, &mut bytes).unwrap();
        let cut = ((bytes.len() as f64) * frac) as usize;
        prop_assume!(cut < bytes.len());
        prop_assert!(read_binary(&bytes[..cut]).is_err());
    }

    #[test]
    fn normalization_is_idempotent(ds in arb_dataset()) {
        prop_assume!(!ds.is_empty());
        let runs: Vec<u32> = ds.run_ids().into_iter().collect();
        let spec = fit_normalizer(&ds, &runs[..1]).unwrap();
        let once = normalize(&ds, &spec);
        let twice = normalize(&once, &NormalizationSpec::identity());
        prop_assert_eq!(&once, &twice);
        for s in &once.sequences {
            prop_assert!(s.features.iter().all(|x| (CLIP_LOW..=CLIP_HIGH).contains(x)));
        }
    }

    #[test]
    fn training_runs_scale_into_unit_interval(ds in arb_dataset()) {
        let runs: Vec<u32> = ds.run_ids().into_iter().collect();
        prop_assume!(!runs.is_empty());
        let spec = fit_normalizer(&ds, &runs).unwrap();
        for s in &normalize(&ds, &spec).sequences {
            prop_assert!(s.features.iter().all(|x| (0.0..=1.0).contains(x)));
        }
    }

    #[test]
    fn flatten_reshape_round_trip(ds in arb_dataset()) {
        for s in &ds.sequences {
            let row = flatten_for_inference(s);
            prop_assert_eq!(row.len(), ds.windows * NUM_FEATURES);
            prop_assert_eq!(reshape(&row, ds.windows).unwrap().concat(), row);
        }
    }
}
