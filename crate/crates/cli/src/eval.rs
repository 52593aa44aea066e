//! Offline target selection on a held-out run, scored against the A2-RSRP
//! benchmark and the exhaustive oracle.
//!
//! Every UE of the evaluation run is simulated once per forced neighbor rank.
//! A learned policy scores the eight traces of a UE, hands over to the rank
//! with the lowest predicted download time, and is credited with that
//! trace's realized time. The oracle picks the best realized rank.

use std::collections::BTreeMap;
use std::io::Write;

use holab_core::dataset::{LabeledSequence, NormalizationSpec};
use holab_core::sim::{benchmark_campaign, forced_campaign};
use holab_core::{Scenario, TraceLog};
use holab_models::Predictor;

use crate::ecdf::{ecdf, EcdfSeries};
use crate::error::{Error, Result};

pub const BENCHMARK: &str = "benchmark";
pub const ORACLE: &str = "oracle";

/// Neighbor rank (1-based) with the smallest prediction; ties go to the
/// smaller rank.
pub fn select_target(predictions: &[f64]) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &p) in predictions.iter().enumerate() {
        if p.is_nan() {
            return Err(Error::Eval(format!("prediction for rank {} is NaN", i + 1)));
        }
        if best.is_none_or(|(_, b)| p < b) {
            best = Some((i, p));
        }
    }
    best.map(|(i, _)| i + 1)
        .ok_or_else(|| Error::Eval("no predictions to select from".into()))
}

/// Best realized rank and its download time.
pub fn oracle_select(realized: &[f64]) -> Result<(usize, f64)> {
    let k = select_target(realized)?;
    Ok((k, realized[k - 1]))
}

/// Extra download time of picking rank `pick` over the oracle's pick.
pub fn regret(realized: &[f64], pick: usize) -> Result<f64> {
    let (_, best) = oracle_select(realized)?;
    let chosen = realized
        .get(pick.wrapping_sub(1))
        .ok_or_else(|| Error::Eval(format!("rank {pick} outside 1..={}", realized.len())))?;
    Ok(chosen - best)
}

/// Turns the forced traces of one UE (rank order) into per-rank predictions.
pub enum Scorer {
    /// A trained model and the normalizer it was trained with.
    Model {
        predictor: Predictor,
        norm: NormalizationSpec,
    },
    /// Realized download times; the perfect predictor.
    Realized,
}

impl Scorer {
    pub fn score(&self, traces: &[&TraceLog]) -> Result<Vec<f64>> {
        match self {
            Scorer::Realized => Ok(traces.iter().map(|t| t.download_time).collect()),
            Scorer::Model { predictor, norm } => {
                let Some(first) = traces.first() else {
                    return Ok(Vec::new());
                };
                let windows = first.windows.len();
                let seqs: Vec<Vec<f64>> = traces
                    .iter()
                    .map(|t| {
                        let mut s = LabeledSequence::from_trace(t);
                        norm.apply_sequence(&mut s);
                        s.features
                    })
                    .collect();
                let refs: Vec<&[f64]> = seqs.iter().map(Vec::as_slice).collect();
                Ok(predictor.predict_seconds(&refs, windows)?)
            }
        }
    }
}

/// Per-UE outcome of one policy, in UE order.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyResult {
    pub name: String,
    /// Realized download time, the horizon when unfinished.
    pub times: Vec<f64>,
    /// Chosen neighbor rank; rank 1 for the benchmark, whose regret is that
    /// of always taking the strongest neighbor.
    pub picks: Vec<usize>,
    pub regrets: Vec<f64>,
}

impl PolicyResult {
    pub fn finishing_count(&self, horizon: f64) -> usize {
        self.times.iter().filter(|&&t| t < horizon).count()
    }

    pub fn median_regret(&self) -> f64 {
        median(&self.regrets)
    }
}

fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub run_id: u32,
    pub obstacle_seed: u64,
    pub horizon: f64,
    pub ue_ids: Vec<u32>,
    /// Benchmark first, learned policies in scorer order, oracle last.
    pub policies: Vec<PolicyResult>,
    /// UEs finishing under the benchmark and every learned policy.
    pub common_finishers: Vec<u32>,
}

impl EvalReport {
    pub fn total_ues(&self) -> usize {
        self.ue_ids.len()
    }

    pub fn policy(&self, name: &str) -> Option<&PolicyResult> {
        self.policies.iter().find(|p| p.name == name)
    }

    pub fn benchmark(&self) -> &PolicyResult {
        &self.policies[0]
    }

    pub fn oracle(&self) -> &PolicyResult {
        self.policies
            .last()
            .expect("report always holds the oracle")
    }

    pub fn learned(&self) -> &[PolicyResult] {
        &self.policies[1..self.policies.len() - 1]
    }

    pub fn finishing_count(&self, name: &str) -> Option<usize> {
        self.policy(name).map(|p| p.finishing_count(self.horizon))
    }

    /// Benchmark minus `name` download time for each common finisher.
    pub fn differences(&self, name: &str) -> Option<Vec<f64>> {
        let p = self.policy(name)?;
        let b = self.benchmark();
        Some(
            self.ue_ids
                .iter()
                .enumerate()
                .filter(|(_, id)| self.common_finishers.binary_search(id).is_ok())
                .map(|(i, _)| b.times[i] - p.times[i])
                .collect(),
        )
    }

    pub fn difference_ecdf(&self, name: &str) -> Option<Result<EcdfSeries>> {
        self.differences(name).map(|d| ecdf(&d))
    }

    /// Finishing-count gain over the benchmark, relative to the benchmark
    /// count and to the policy's own count.
    pub fn relative_gain(&self, name: &str) -> Option<(f64, f64)> {
        let b = self.benchmark().finishing_count(self.horizon) as f64;
        let l = self.finishing_count(name)? as f64;
        Some(((l - b) / b, (l - b) / l))
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "evaluation run {} (obstacle seed {}), {} UEs, horizon {} s",
            self.run_id,
            self.obstacle_seed,
            self.total_ues(),
            self.horizon
        )?;
        for p in &self.policies {
            writeln!(
                w,
                "  {:<10} finishing {:>4}/{:<4} median regret {:>7.3} s",
                p.name,
                p.finishing_count(self.horizon),
                self.total_ues(),
                p.median_regret()
            )?;
        }
        writeln!(w, "  common finishers: {}", self.common_finishers.len())?;
        for p in self.learned() {
            let (vs_b, vs_l) = self.relative_gain(&p.name).unwrap();
            let d = self.differences(&p.name).unwrap();
            let improved = d.iter().filter(|&&x| x > 0.0).count();
            let worse = d.iter().filter(|&&x| x < 0.0).count();
            writeln!(
                w,
                "  {}: gain {:+.1}% of benchmark count, {:+.1}% of own count; \
                 faster for {improved}, slower for {worse} of {} common UEs",
                p.name,
                100.0 * vs_b,
                100.0 * vs_l,
                d.len()
            )?;
        }
        Ok(())
    }

    /// One row per (UE, policy).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "ue_id,policy,rank,download_time,finished,regret,common")?;
        for (i, id) in self.ue_ids.iter().enumerate() {
            let common = self.common_finishers.binary_search(id).is_ok();
            for p in &self.policies {
                writeln!(
                    w,
                    "{id},{},{},{},{},{},{}",
                    p.name,
                    p.picks[i],
                    p.times[i],
                    p.times[i] < self.horizon,
                    p.regrets[i],
                    common
                )?;
            }
        }
        Ok(())
    }
}

/// Builds the report from one run's benchmark traces and its forced traces
/// (any order; grouped by UE and rank here).
pub fn assemble_report(
    benchmark: &[TraceLog],
    forced: &[TraceLog],
    scorers: &[(&str, &Scorer)],
    horizon: f64,
    obstacle_seed: u64,
) -> Result<EvalReport> {
    let mut by_ue: BTreeMap<u32, Vec<&TraceLog>> = BTreeMap::new();
    for t in forced {
        if t.meta.policy.rank() == 0 {
            return Err(Error::Eval("benchmark trace among forced traces".into()));
        }
        by_ue.entry(t.meta.ue_id).or_default().push(t);
    }
    for v in by_ue.values_mut() {
        v.sort_by_key(|t| t.meta.policy.rank());
    }
    if benchmark.iter().any(|t| t.meta.policy.rank() != 0) {
        return Err(Error::Eval("forced trace among benchmark traces".into()));
    }
    let bench: BTreeMap<u32, &TraceLog> = benchmark.iter().map(|t| (t.meta.ue_id, t)).collect();
    if bench.len() != benchmark.len() {
        return Err(Error::Eval("more than one benchmark trace per UE".into()));
    }
    let ue_ids: Vec<u32> = by_ue.keys().copied().collect();
    if ue_ids.is_empty() || bench.keys().ne(by_ue.keys()) {
        return Err(Error::Eval(
            "benchmark and forced campaigns cover different UEs".into(),
        ));
    }
    let run_id = forced[0].meta.run_id;
    if forced
        .iter()
        .chain(benchmark)
        .any(|t| t.meta.run_id != run_id)
    {
        return Err(Error::Eval("traces from more than one run".into()));
    }
    let realized: Vec<Vec<f64>> = by_ue
        .values()
        .map(|v| v.iter().map(|t| t.download_time).collect())
        .collect();

    let selector = |name: &str, picks: Vec<usize>| -> Result<PolicyResult> {
        let mut times = Vec::with_capacity(picks.len());
        let mut regrets = Vec::with_capacity(picks.len());
        for (r, &k) in realized.iter().zip(&picks) {
            regrets.push(regret(r, k)?);
            times.push(r[k - 1]);
        }
        Ok(PolicyResult {
            name: name.to_string(),
            times,
            picks,
            regrets,
        })
    };

    let mut policies = Vec::with_capacity(scorers.len() + 2);
    let mut b = selector(BENCHMARK, vec![1; ue_ids.len()])?;
    b.times = ue_ids.iter().map(|id| bench[id].download_time).collect();
    policies.push(b);
    for (name, scorer) in scorers {
        let picks = by_ue
            .values()
            .map(|traces| select_target(&scorer.score(traces)?))
            .collect::<Result<Vec<_>>>()?;
        policies.push(selector(name, picks)?);
    }
    let oracle_picks = realized
        .iter()
        .map(|r| Ok(oracle_select(r)?.0))
        .collect::<Result<Vec<_>>>()?;
    policies.push(selector(ORACLE, oracle_picks)?);

    let common_finishers = ue_ids
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            policies[..policies.len() - 1]
                .iter()
                .all(|p| p.times[*i] < horizon)
        })
        .map(|(_, &id)| id)
        .collect();
    Ok(EvalReport {
        run_id,
        obstacle_seed,
        horizon,
        ue_ids,
        policies,
        common_finishers,
    })
}

/// Runs the benchmark and forced campaigns of `run_id` and scores every policy.
pub fn evaluate(
    scenario: &Scenario,
    base_seed: u64,
    run_id: u32,
    scorers: &[(&str, &Scorer)],
) -> Result<EvalReport> {
    let benchmark = benchmark_campaign(scenario, base_seed, run_id);
    let forced = forced_campaign(scenario, base_seed, run_id);
    assemble_report(
        &benchmark,
        &forced,
        scorers,
        scenario.config.sim_duration,
        scenario.config.obstacle_seed,
    )
}

/// [`evaluate`] with obstacles re-drawn from `obstacle_seed`, no retraining.
pub fn cross_scenario_eval(
    scenario: &Scenario,
    obstacle_seed: u64,
    base_seed: u64,
    run_id: u32,
    scorers: &[(&str, &Scorer)],
) -> Result<EvalReport> {
    evaluate(
        &scenario.with_obstacle_seed(obstacle_seed)?,
        base_seed,
        run_id,
        scorers,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_examples() {
        assert_eq!(select_target(&[12.3, 7.1, 40.0]).unwrap(), 2);
        assert_eq!(select_target(&[5.0, 5.0]).unwrap(), 1);
        assert_eq!(select_target(&[40.0]).unwrap(), 1);
        assert!(select_target(&[]).is_err());
        assert!(select_target(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn regret_examples() {
        assert_eq!(regret(&[10.0, 8.0, 40.0], 1).unwrap(), 2.0);
        assert_eq!(regret(&[10.0, 8.0, 40.0], 2).unwrap(), 0.0);
        assert_eq!(regret(&[40.0, 40.0], 2).unwrap(), 0.0);
        assert_eq!(oracle_select(&[10.0, 8.0, 40.0]).unwrap(), (2, 8.0));
        assert!(regret(&[1.0], 0).is_err());
        assert!(regret(&[1.0], 2).is_err());
        assert!(oracle_select(&[]).is_err());
    }
}
