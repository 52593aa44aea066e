//! Selection, regret and report invariants on synthetic campaigns.

use holab::eval::{assemble_report, oracle_select, regret, select_target, Scorer};
use holab::{ecdf, evaluate};
use holab_core::handover::HandoverPolicy;
use holab_core::sim::{TraceLog, TraceMeta};
use holab_core::{build_scenario, ScenarioConfig};
use proptest::prelude::*;

const HORIZON: f64 = 40.0;

fn trace(ue: u32, policy: HandoverPolicy, time: f64) -> TraceLog {
    TraceLog {
        meta: TraceMeta {
            run_id: 9,
            ue_id: ue,
            policy,
            target_cell: 0,
        },
        windows: Vec::new(),
        download_time: time,
        finished: time < HORIZON,
        handovers: 0,
        rlfs: 0,
    }
}

/// Per UE: benchmark time and eight forced-rank times, some censored.
fn campaign() -> impl Strategy<Value = Vec<(f64, Vec<f64>)>> {
    let time = prop_oneof![3 => 0.5f64..39.9, 1 => Just(HORIZON)];
    prop::collection::vec((time.clone(), prop::collection::vec(time, 8)), 1..12)
}

fn traces(c: &[(f64, Vec<f64>)]) -> (Vec<TraceLog>, Vec<TraceLog>) {
    let mut bench = Vec::new();
    let mut forced = Vec::new();
    for (ue, (b, ranks)) in c.iter().enumerate() {
        bench.push(trace(ue as u32, HandoverPolicy::Benchmark, *b));
        // Reverse order: the report must regroup by rank itself.
        for (k, t) in ranks.iter().enumerate().rev() {
            forced.push(trace(ue as u32, HandoverPolicy::Forced(k as u8 + 1), *t));
        }
    }
    (bench, forced)
}

proptest! {
    #[test]
    fn argmin_ignores_positive_shifts(p in prop::collection::vec(0.0f64..40.0, 1..9), c in 0.0f64..100.0) {
        let shifted: Vec<f64> = p.iter().map(|x| x + c).collect();
        // Shifts that merge distinct values through rounding are not shifts
        // of the ordering; skip them.
        let order_kept = p.iter().zip(&shifted).all(|(a, sa)| p.iter().zip(&shifted).all(|(b, sb)| (a < b) == (sa < sb)));
        prop_assume!(order_kept);
        prop_assert_eq!(select_target(&p).unwrap(), select_target(&shifted).unwrap());
    }

    #[test]
    fn regret_is_never_negative(r in prop::collection::vec(0.0f64..40.0, 1..9), pick in 1usize..9) {
        prop_assume!(pick <= r.len());
        prop_assert!(regret(&r, pick).unwrap() >= 0.0);
        let (k, best) = oracle_select(&r).unwrap();
        prop_assert_eq!(regret(&r, k).unwrap(), 0.0);
        prop_assert!(r.iter().all(|&x| x >= best));
    }

    #[test]
    fn report_invariants(c in campaign()) {
        let (bench, forced) = traces(&c);
        let r = assemble_report(&bench, &forced, &[("perfect", &Scorer::Realized)], HORIZON, 1).unwrap();
        prop_assert_eq!(r.total_ues(), c.len());
        let oracle = r.oracle().finishing_count(HORIZON);
        for p in &r.policies {
            prop_assert!(p.finishing_count(HORIZON) <= r.total_ues());
            prop_assert!(p.regrets.iter().all(|&x| x >= 0.0));
        }
        for p in r.learned() {
            prop_assert!(oracle >= p.finishing_count(HORIZON));
        }
        // The perfect predictor is the oracle.
        prop_assert_eq!(r.finishing_count("perfect"), Some(oracle));
        prop_assert!(r.policy("perfect").unwrap().regrets.iter().all(|&x| x == 0.0));
        let d = r.differences("perfect").unwrap();
        prop_assert_eq!(d.len(), r.common_finishers.len());
        prop_assert!(d.iter().all(|x| x.abs() <= HORIZON));
        for (i, id) in r.ue_ids.iter().enumerate() {
            if r.common_finishers.contains(id) {
                prop_assert!(r.benchmark().times[i] < HORIZON);
                prop_assert!(r.policy("perfect").unwrap().times[i] < HORIZON);
            }
        }
        // Benchmark regret is that of always taking rank 1.
        for (i, (_, ranks)) in c.iter().enumerate() {
            prop_assert_eq!(r.benchmark().regrets[i], regret(ranks, 1).unwrap());
        }
    }

    #[test]
    fn positive_differences_have_positive_support(v in prop::collection::vec(1e-6f64..40.0, 1..50)) {
        let e = ecdf(&v).unwrap();
        prop_assert!(e.x.iter().all(|&x| x > 0.0));
        prop_assert_eq!(e.at(0.0), 0.0);
        prop_assert!(e.x.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(e.f.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(*e.f.last().unwrap(), 1.0);
    }
}

#[test]
fn mismatched_campaigns_are_rejected() {
    let (bench, forced) = traces(&[(5.0, vec![6.0; 8]), (7.0, vec![8.0; 8])]);
    assert!(assemble_report(&bench[..1], &forced, &[], HORIZON, 1).is_err());
    assert!(assemble_report(&bench, &forced, &[], HORIZON, 1).is_ok());
    assert!(assemble_report(&forced, &forced, &[], HORIZON, 1).is_err());
}

fn small_scenario() -> holab_core::Scenario {
    let cfg = ScenarioConfig {
        num_sites: 1,
        ues_per_sector: 1,
        sim_duration: 10.0,
        ..Default::default()
    };
    build_scenario(&cfg, 1).unwrap()
}

#[test]
fn perfect_predictor_matches_oracle_in_simulation() {
    let s = small_scenario();
    let r = evaluate(&s, 4, 2, &[("perfect", &Scorer::Realized)]).unwrap();
    assert_eq!(r.total_ues(), 3);
    assert_eq!(r.finishing_count("perfect"), r.finishing_count("oracle"));
}

#[test]
fn cross_evaluation_with_original_seed_is_plain_evaluation() {
    let s = small_scenario();
    let a = evaluate(&s, 4, 2, &[("perfect", &Scorer::Realized)]).unwrap();
    let b = holab::cross_scenario_eval(&s, 1, 4, 2, &[("perfect", &Scorer::Realized)]).unwrap();
    assert_eq!(a, b);
}
