//! Labeled sequences, min-max normalization, and the CSV / binary dataset files.
//!
//! A sequence is stored window-major: `features[w * NUM_FEATURES + f]`.
//! Rank 0 marks a benchmark trace; forced traces carry their neighbor rank.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::{feature_names, NUM_FEATURES};
use crate::handover::HandoverPolicy;
use crate::sim::TraceLog;

/// Label assigned to downloads that never finish.
pub const LABEL_HORIZON: f64 = 40.0;
/// Lower and upper clip applied after scaling.
pub const CLIP_LOW: f64 = -0.5;
pub const CLIP_HIGH: f64 = 1.5;

const MAGIC: &[u8; 4] = b"HODS";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 20;
const META_COLUMNS: [&str; 6] = ["window", "label", "run_id", "ue_id", "rank", "target_cell"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SequenceMeta {
    pub run_id: u32,
    pub ue_id: u32,
    /// Forced neighbor rank, 0 for benchmark traces.
    pub rank: u32,
    pub target_cell: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSequence {
    pub features: Vec<f64>,
    /// Download time in seconds, censored at the horizon.
    pub label: f64,
    pub meta: SequenceMeta,
}

impl LabeledSequence {
    pub fn from_trace(trace: &TraceLog) -> Self {
        let mut features = Vec::with_capacity(trace.windows.len() * NUM_FEATURES);
        for w in &trace.windows {
            features.extend_from_slice(w.as_slice());
        }
        LabeledSequence {
            features,
            label: trace.download_time,
            meta: SequenceMeta {
                run_id: trace.meta.run_id,
                ue_id: trace.meta.ue_id,
                rank: trace.meta.policy.rank() as u32,
                target_cell: trace.meta.target_cell,
            },
        }
    }

    pub fn windows(&self) -> usize {
        self.features.len() / NUM_FEATURES
    }

    pub fn window(&self, w: usize) -> &[f64] {
        &self.features[w * NUM_FEATURES..(w + 1) * NUM_FEATURES]
    }

    /// Finished downloads have a label strictly below the horizon.
    pub fn finished(&self) -> bool {
        self.label < LABEL_HORIZON
    }
}

/// Window-major flattening, `windows * 84` values.
pub fn flatten_for_inference(seq: &LabeledSequence) -> Vec<f64> {
    seq.features.clone()
}

/// Inverse of [`flatten_for_inference`]: splits a flat row into `windows` rows.
pub fn reshape(row: &[f64], windows: usize) -> Result<Vec<Vec<f64>>> {
    if windows == 0 || row.len() != windows * NUM_FEATURES {
        return Err(Error::Dataset(format!(
            "row of length {} cannot hold {windows} windows of {NUM_FEATURES} features",
            row.len()
        )));
    }
    Ok(row.chunks(NUM_FEATURES).map(<[f64]>::to_vec).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub windows: usize,
    pub sequences: Vec<LabeledSequence>,
}

impl Dataset {
    pub fn empty(windows: usize) -> Self {
        Dataset {
            windows,
            sequences: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn push(&mut self, seq: LabeledSequence) -> Result<()> {
        if seq.features.len() != self.windows * NUM_FEATURES {
            return Err(Error::Dataset(format!(
                "sequence has {} windows, dataset expects {}",
                seq.windows(),
                self.windows
            )));
        }
        self.sequences.push(seq);
        Ok(())
    }

    pub fn append(&mut self, other: Dataset) -> Result<()> {
        if other.is_empty() {
            return Ok(());
        }
        if self.is_empty() {
            self.windows = other.windows;
        }
        for s in other.sequences {
            self.push(s)?;
        }
        Ok(())
    }

    pub fn run_ids(&self) -> BTreeSet<u32> {
        self.sequences.iter().map(|s| s.meta.run_id).collect()
    }

    /// Sequences of forced traces (rank ≥ 1).
    pub fn forced_only(&self) -> Dataset {
        self.filter(|s| s.meta.rank >= 1)
    }

    pub fn filter(&self, keep: impl Fn(&LabeledSequence) -> bool) -> Dataset {
        Dataset {
            windows: self.windows,
            sequences: self.sequences.iter().filter(|s| keep(s)).cloned().collect(),
        }
    }

    /// Splits by run id: sequences of `eval_runs` go to the second part.
    pub fn split_by_runs(&self, eval_runs: &[u32]) -> (Dataset, Dataset) {
        let train = self.filter(|s| !eval_runs.contains(&s.meta.run_id));
        let eval = self.filter(|s| eval_runs.contains(&s.meta.run_id));
        (train, eval)
    }

    pub fn labels(&self) -> Vec<f64> {
        self.sequences.iter().map(|s| s.label).collect()
    }

    /// Mean over features of the per-feature variance across all windows.
    pub fn mean_feature_variance(&self) -> f64 {
        let mut sum = [0.0; NUM_FEATURES];
        let mut sq = [0.0; NUM_FEATURES];
        let mut n = 0.0;
        for s in &self.sequences {
            for w in s.features.chunks(NUM_FEATURES) {
                for (f, &x) in w.iter().enumerate() {
                    sum[f] += x;
                    sq[f] += x * x;
                }
                n += 1.0;
            }
        }
        if n == 0.0 {
            return 0.0;
        }
        let var: f64 = (0..NUM_FEATURES)
            .map(|f| {
                let mean = sum[f] / n;
                (sq[f] / n - mean * mean).max(0.0)
            })
            .sum();
        var / NUM_FEATURES as f64
    }
}

/// One labeled sequence per forced trace, in input order.
pub fn build_dataset(traces: &[TraceLog], windows: usize) -> Result<Dataset> {
    let mut ds = Dataset::empty(windows);
    for t in traces {
        if !matches!(t.meta.policy, HandoverPolicy::Forced(_)) {
            return Err(Error::Trace(format!(
                "trace of UE {} run {} is not from a forced campaign",
                t.meta.ue_id, t.meta.run_id
            )));
        }
        if t.windows.len() != windows {
            return Err(Error::Trace(format!(
                "trace of UE {} run {} has {} windows, expected {windows}",
                t.meta.ue_id,
                t.meta.run_id,
                t.windows.len()
            )));
        }
        ds.push(LabeledSequence::from_trace(t))?;
    }
    Ok(ds)
}

/// Per-feature minimum and maximum over a training split.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationSpec {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormalizationSpec {
    /// The spec that maps `[0, 1]` onto itself.
    pub fn identity() -> Self {
        NormalizationSpec {
            min: vec![0.0; NUM_FEATURES],
            max: vec![1.0; NUM_FEATURES],
        }
    }

    pub fn from_parts(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != NUM_FEATURES || max.len() != NUM_FEATURES {
            return Err(Error::Dataset(format!(
                "normalizer needs {NUM_FEATURES} bounds, got {} and {}",
                min.len(),
                max.len()
            )));
        }
        if min
            .iter()
            .zip(&max)
            .any(|(lo, hi)| !(hi >= lo) || !lo.is_finite() || !hi.is_finite())
        {
            return Err(Error::Dataset(
                "normalizer bounds must be finite with max >= min".into(),
            ));
        }
        Ok(NormalizationSpec { min, max })
    }

    /// Scales one window in place; constant features map to 0.
    pub fn apply(&self, window: &mut [f64]) {
        for (f, x) in window.iter_mut().enumerate() {
            let span = self.max[f] - self.min[f];
            *x = if span > 0.0 {
                ((*x - self.min[f]) / span).clamp(CLIP_LOW, CLIP_HIGH)
            } else {
                0.0
            };
        }
    }

    pub fn apply_sequence(&self, seq: &mut LabeledSequence) {
        for w in seq.features.chunks_mut(NUM_FEATURES) {
            self.apply(w);
        }
    }
}

pub fn fit_normalizer(dataset: &Dataset, train_run_ids: &[u32]) -> Result<NormalizationSpec> {
    let mut min = vec![f64::INFINITY; NUM_FEATURES];
    let mut max = vec![f64::NEG_INFINITY; NUM_FEATURES];
    let mut seen = false;
    for s in dataset
        .sequences
        .iter()
        .filter(|s| train_run_ids.contains(&s.meta.run_id))
    {
        seen = true;
        for w in s.features.chunks(NUM_FEATURES) {
            for (f, &x) in w.iter().enumerate() {
                min[f] = min[f].min(x);
                max[f] = max[f].max(x);
            }
        }
    }
    if !seen {
        return Err(Error::Dataset("training split is empty".into()));
    }
    NormalizationSpec::from_parts(min, max)
}

pub fn normalize(dataset: &Dataset, spec: &NormalizationSpec) -> Dataset {
    let mut out = dataset.clone();
    for s in &mut out.sequences {
        spec.apply_sequence(s);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Binary,
}

impl Format {
    /// `.csv` selects CSV, anything else binary.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Binary,
        }
    }
}

pub fn save_dataset(dataset: &Dataset, path: &Path, format: Format) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    match format {
        Format::Csv => write_csv(dataset, file),
        Format::Binary => write_binary(dataset, file),
    }
}

pub fn load_dataset(path: &Path, format: Format) -> Result<Dataset> {
    let file = BufReader::new(File::open(path)?);
    match format {
        Format::Csv => read_csv(file),
        Format::Binary => read_binary(file),
    }
}

fn checked_f32(x: f64) -> Result<f32> {
    let v = x as f32;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Format(format!("non-finite value {x}")))
    }
}

pub fn write_binary<W: Write>(dataset: &Dataset, mut w: W) -> Result<()> {
    let n = u32::try_from(dataset.len()).map_err(|_| Error::Format("too many sequences".into()))?;
    w.write_all(MAGIC)?;
    for v in [VERSION, n, dataset.windows as u32, NUM_FEATURES as u32] {
        w.write_all(&v.to_le_bytes())?;
    }
    for s in &dataset.sequences {
        let m = s.meta;
        for v in [m.run_id, m.ue_id, m.rank, m.target_cell] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&checked_f32(s.label)?.to_le_bytes())?;
        for &x in &s.features {
            w.write_all(&checked_f32(x)?.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<Dataset> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    if buf.len() < HEADER_LEN || &buf[..4] != MAGIC {
        return Err(Error::Format("missing dataset header".into()));
    }
    let word = |i: usize| u32::from_le_bytes(buf[i..i + 4].try_into().unwrap());
    let (version, n, m, f) = (
        word(4),
        word(8) as usize,
        word(12) as usize,
        word(16) as usize,
    );
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    if f != NUM_FEATURES {
        return Err(Error::Format(format!(
            "feature count {f}, expected {NUM_FEATURES}"
        )));
    }
    let record = 4 * (5 + m * f);
    let expected = n
        .checked_mul(record)
        .and_then(|b| b.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::Format("header sizes overflow".into()))?;
    if buf.len() != expected {
        return Err(Error::Format(format!(
            "file holds {} bytes, header implies {expected}",
            buf.len()
        )));
    }
    let mut ds = Dataset::empty(m);
    ds.sequences.reserve(n);
    for rec in buf[HEADER_LEN..].chunks_exact(record) {
        let word = |i: usize| u32::from_le_bytes(rec[4 * i..4 * i + 4].try_into().unwrap());
        let meta = SequenceMeta {
            run_id: word(0),
            ue_id: word(1),
            rank: word(2),
            target_cell: word(3),
        };
        let mut values = rec[16..].chunks_exact(4).map(|b| {
            let v = f32::from_le_bytes(b.try_into().unwrap());
            if v.is_finite() {
                Ok(v as f64)
            } else {
                Err(Error::Format(format!(
                    "non-finite value in UE {} record",
                    meta.ue_id
                )))
            }
        });
        let label = values.next().unwrap()?;
        let features = values.collect::<Result<Vec<f64>>>()?;
        ds.sequences.push(LabeledSequence {
            features,
            label,
            meta,
        });
    }
    Ok(ds)
}

pub fn csv_header() -> Vec<String> {
    feature_names()
        .map(str::to_owned)
        .chain(META_COLUMNS.iter().map(|s| s.to_string()))
        .collect()
}

pub fn write_csv<W: Write>(dataset: &Dataset, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(csv_header())?;
    let mut row: Vec<String> = Vec::with_capacity(NUM_FEATURES + META_COLUMNS.len());
    for s in &dataset.sequences {
        let label = checked_f32(s.label)?;
        for (wi, win) in s.features.chunks(NUM_FEATURES).enumerate() {
            row.clear();
            for &x in win {
                row.push(checked_f32(x)?.to_string());
            }
            row.push(wi.to_string());
            row.push(label.to_string());
            let m = s.meta;
            row.extend([m.run_id, m.ue_id, m.rank, m.target_cell].map(|v| v.to_string()));
            wr.write_record(&row)?;
        }
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Dataset> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if header != csv_header() {
        return Err(Error::Format("unexpected CSV header".into()));
    }
    let mut sequences: Vec<LabeledSequence> = Vec::new();
    let mut windows: Option<usize> = None;
    let mut next_window = 0usize;
    for rec in rd.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            let v: f32 = rec[i].parse().map_err(|_| {
                Error::Format(format!("bad number `{}` in column {}", &rec[i], i + 1))
            })?;
            if v.is_finite() {
                Ok(v as f64)
            } else {
                Err(Error::Format(format!(
                    "non-finite value in column {}",
                    i + 1
                )))
            }
        };
        let int = |i: usize| -> Result<u32> {
            rec[i].parse().map_err(|_| {
                Error::Format(format!("bad integer `{}` in column {}", &rec[i], i + 1))
            })
        };
        let window = int(NUM_FEATURES)? as usize;
        let meta = SequenceMeta {
            run_id: int(NUM_FEATURES + 2)?,
            ue_id: int(NUM_FEATURES + 3)?,
            rank: int(NUM_FEATURES + 4)?,
            target_cell: int(NUM_FEATURES + 5)?,
        };
        let label = num(NUM_FEATURES + 1)?;
        if window == 0 {
            if let Some(prev) = sequences.last() {
                let m = prev.windows();
                if *windows.get_or_insert(m) != m {
                    return Err(Error::Format(
                        "sequences have different window counts".into(),
                    ));
                }
            }
            sequences.push(LabeledSequence {
                features: Vec::new(),
                label,
                meta,
            });
        } else {
            let cur = sequences
                .last()
                .filter(|s| s.meta == meta && s.label == label && window == next_window)
                .ok_or_else(|| Error::Format(format!("window {window} out of sequence")))?;
            debug_assert_eq!(cur.windows(), window);
        }
        let cur = sequences.last_mut().unwrap();
        for i in 0..NUM_FEATURES {
            cur.features.push(num(i)?);
        }
        next_window = window + 1;
    }
    let m = match sequences.last() {
        Some(last) => {
            let m = last.windows();
            if *windows.get_or_insert(m) != m {
                return Err(Error::Format(
                    "sequences have different window counts".into(),
                ));
            }
            m
        }
        None => 0,
    };
    Ok(Dataset {
        windows: m,
        sequences,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureVector;
    use crate::sim::TraceMeta;

    fn trace(policy: HandoverPolicy, windows: usize) -> TraceLog {
        let mut v = [0.0; NUM_FEATURES];
        v[7] = -95.0;
        TraceLog {
            meta: TraceMeta {
                run_id: 1,
                ue_id: 3,
                policy,
                target_cell: 5,
            },
            windows: vec![FeatureVector(v); windows],
            download_time: 12.5,
            finished: true,
            handovers: 1,
            rlfs: 0,
        }
    }

    fn toy(columns: &[[f64; 3]]) -> Dataset {
        let mut ds = Dataset::empty(1);
        for (i, c) in columns.iter().enumerate() {
            let mut f = vec![0.0; NUM_FEATURES];
            f[..3].copy_from_slice(c);
            ds.push(LabeledSequence {
                features: f,
                label: 1.0,
                meta: SequenceMeta {
                    run_id: i as u32 + 1,
                    ue_id: 1,
                    rank: 1,
                    target_cell: 2,
                },
            })
            .unwrap();
        }
        ds
    }

    #[test]
    fn build_rejects_wrong_window_count_and_benchmark() {
        assert!(build_dataset(&[trace(HandoverPolicy::Forced(2), 199)], 200).is_err());
        assert!(build_dataset(&[trace(HandoverPolicy::Benchmark, 200)], 200).is_err());
        let ds = build_dataset(&[trace(HandoverPolicy::Forced(2), 200)], 200).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.sequences[0].meta.rank, 2);
        assert_eq!(ds.sequences[0].window(199)[7], -95.0);
    }

    #[test]
    fn empty_trace_list_gives_empty_dataset() {
        assert!(build_dataset(&[], 200).unwrap().is_empty());
    }

    #[test]
    fn min_max_scaling_examples() {
        // column 0: [0,5,10], column 1 constant 7, column 2 ramps.
        let ds = toy(&[[0.0, 7.0, 1.0], [5.0, 7.0, 2.0], [10.0, 7.0, 3.0]]);
        let spec = fit_normalizer(&ds, &[1, 2, 3]).unwrap();
        let n = normalize(&ds, &spec);
        let col = |f: usize| {
            n.sequences
                .iter()
                .map(|s| s.features[f])
                .collect::<Vec<_>>()
        };
        assert_eq!(col(0), vec![0.0, 0.5, 1.0]);
        assert_eq!(col(1), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn eval_values_clip() {
        let ds = toy(&[
            [0.0, 0.0, 0.0],
            [10.0, 0.0, 0.0],
            [100.0, 0.0, 0.0],
            [-100.0, 0.0, 0.0],
        ]);
        let spec = fit_normalizer(&ds, &[1, 2]).unwrap();
        let n = normalize(&ds, &spec);
        assert_eq!(n.sequences[2].features[0], CLIP_HIGH);
        assert_eq!(n.sequences[3].features[0], CLIP_LOW);
    }

    #[test]
    fn empty_training_split_rejected() {
        let ds = toy(&[[1.0, 2.0, 3.0]]);
        assert!(fit_normalizer(&ds, &[9]).is_err());
        assert!(fit_normalizer(&ds, &[]).is_err());
    }

    #[test]
    fn split_by_runs_is_disjoint() {
        let ds = toy(&[[0.0; 3], [1.0; 3], [2.0; 3]]);
        let (train, eval) = ds.split_by_runs(&[3]);
        assert_eq!(train.run_ids().into_iter().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(eval.run_ids().into_iter().collect::<Vec<_>>(), vec![3]);
    }

    #[test]
    fn flatten_orders_window_major() {
        let ds = build_dataset(&[trace(HandoverPolicy::Forced(1), 200)], 200).unwrap();
        let row = flatten_for_inference(&ds.sequences[0]);
        assert_eq!(row.len(), 16_800);
        let back = reshape(&row, 200).unwrap();
        assert_eq!(back.concat(), row);
        assert_eq!(back[3][7], -95.0);
        assert!(reshape(&row, 199).is_err());
    }

    #[test]
    fn csv_header_names_table_slots() {
        let h = csv_header();
        assert_eq!(h.len(), NUM_FEATURES + 6);
        assert!(h[7].contains("rsrp_serving"));
        assert_eq!(h[NUM_FEATURES + 1], "label");
    }

    #[test]
    fn binary_truncation_fails_closed() {
        let ds = build_dataset(&[trace(HandoverPolicy::Forced(1), 4)], 4).unwrap();
        let mut bytes = Vec::new();
        write_binary(&ds, &mut bytes).unwrap();
        assert_eq!(read_binary(&bytes[..]).unwrap(), ds);
        for cut in [0, 3, HEADER_LEN - 1, HEADER_LEN + 5, bytes.len() - 1] {
            assert!(read_binary(&bytes[..cut]).is_err(), "cut at {cut}");
        }
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(read_binary(&bad[..]).is_err());
    }

    #[test]
    fn non_finite_values_rejected() {
        let mut ds = build_dataset(&[trace(HandoverPolicy::Forced(1), 2)], 2).unwrap();
        ds.sequences[0].features[5] = f64::NAN;
        assert!(write_binary(&ds, Vec::new()).is_err());
        assert!(write_csv(&ds, Vec::new()).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let mut ds = build_dataset(
            &[
                trace(HandoverPolicy::Forced(1), 3),
                trace(HandoverPolicy::Forced(4), 3),
            ],
            3,
        )
        .unwrap();
        ds.sequences[1].features[10] = 0.1;
        let mut bytes = Vec::new();
        write_csv(&ds, &mut bytes).unwrap();
        let back = read_csv(&bytes[..]).unwrap();
        assert_eq!(back.windows, 3);
        assert_eq!(back.sequences[1].features[10], 0.1f32 as f64);
        assert_eq!(back.sequences[1].meta.rank, 4);
    }
}
