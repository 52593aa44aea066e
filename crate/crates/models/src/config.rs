//! Training options and per-epoch loss curves.

use std::io::Write;

use crate::error::{ModelError, Result};

/// Which validation statistic ranks search candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// Mean of the per-epoch validation MSE.
    MeanOverEpochs,
    /// Validation MSE of the last epoch.
    FinalEpoch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub lr: f64,
    pub validation_fraction: f64,
    pub seed: u64,
    pub selection: Selection,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 32,
            epochs: 200,
            lr: 1e-3,
            validation_fraction: 0.2,
            seed: 1,
            selection: Selection::MeanOverEpochs,
        }
    }
}

pub const TRAIN_KEYS: &[&str] = &[
    "batch_size",
    "epochs",
    "lr",
    "validation_fraction",
    "seed",
    "selection",
];

fn config_err(field: &'static str, reason: impl Into<String>) -> ModelError {
    ModelError::Config {
        field,
        reason: reason.into(),
    }
}

fn parse<T: std::str::FromStr>(field: &'static str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| config_err(field, format!("cannot parse {value:?}")))
}

impl TrainConfig {
    /// Sets one field from text; `Ok(false)` when `key` is not a training option.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "batch_size" => self.batch_size = parse("batch_size", value)?,
            "epochs" => self.epochs = parse("epochs", value)?,
            "lr" => self.lr = parse("lr", value)?,
            "validation_fraction" => {
                self.validation_fraction = parse("validation_fraction", value)?
            }
            "seed" => self.seed = parse("seed", value)?,
            "selection" => {
                self.selection = match value.trim() {
                    "mean" => Selection::MeanOverEpochs,
                    "final" => Selection::FinalEpoch,
                    other => {
                        return Err(config_err(
                            "selection",
                            format!("expected mean or final, got {other:?}"),
                        ))
                    }
                }
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(config_err("batch_size", "must be at least 1"));
        }
        if self.epochs == 0 {
            return Err(config_err("epochs", "must be at least 1"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(config_err("lr", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(config_err("validation_fraction", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Per-epoch mean squared errors. `val` is empty without a validation split.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LossCurve {
    pub train: Vec<f64>,
    pub val: Vec<f64>,
}

impl LossCurve {
    /// Validation curve, or the training curve when there is no validation split.
    pub fn selection_curve(&self) -> &[f64] {
        if self.val.is_empty() {
            &self.train
        } else {
            &self.val
        }
    }

    pub fn mean_val(&self) -> f64 {
        let c = self.selection_curve();
        c.iter().sum::<f64>() / c.len().max(1) as f64
    }

    pub fn final_val(&self) -> f64 {
        self.selection_curve().last().copied().unwrap_or(f64::NAN)
    }

    pub fn score(&self, selection: Selection) -> f64 {
        match selection {
            Selection::MeanOverEpochs => self.mean_val(),
            Selection::FinalEpoch => self.final_val(),
        }
    }

    /// `epoch,train_mse,val_mse` with 1-based epochs; `val_mse` blank when absent.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "epoch,train_mse,val_mse")?;
        for (e, t) in self.train.iter().enumerate() {
            match self.val.get(e) {
                Some(v) => writeln!(w, "{},{t:e},{v:e}", e + 1)?,
                None => writeln!(w, "{},{t:e},", e + 1)?,
            }
        }
        Ok(())
    }
}

fn median(v: &[f64]) -> f64 {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// True when every `span`-long stretch of `values` trends downward: the
/// median of its later half lies strictly below the median of its earlier
/// half. A series shorter than `span` is judged as one stretch.
pub fn median_decreasing(values: &[f64], span: usize) -> bool {
    let span = span.min(values.len());
    if span < 2 {
        return false;
    }
    values.windows(span).all(|w| {
        let (early, late) = w.split_at(span / 2);
        median(late) < median(early)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_validation() {
        let c = TrainConfig::default();
        assert_eq!(
            (c.batch_size, c.epochs, c.validation_fraction),
            (32, 200, 0.2)
        );
        c.validate().unwrap();
        for (k, v) in [
            ("batch_size", "0"),
            ("epochs", "0"),
            ("validation_fraction", "1"),
            ("lr", "-1"),
        ] {
            let mut c = TrainConfig::default();
            assert!(c.set(k, v).unwrap());
            assert!(c.validate().is_err(), "{k}={v}");
        }
    }

    #[test]
    fn set_reports_unknown_keys() {
        let mut c = TrainConfig::default();
        assert!(!c.set("hidden", "3").unwrap());
        assert!(c.set("selection", "final").unwrap());
        assert_eq!(c.selection, Selection::FinalEpoch);
        assert!(c.set("selection", "best").is_err());
    }

    #[test]
    fn curve_csv() {
        let c = LossCurve {
            train: vec![0.5, 0.25],
            val: vec![1.0, 0.5],
        };
        let mut out = Vec::new();
        c.write_csv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "epoch,train_mse,val_mse\n1,5e-1,1e0\n2,2.5e-1,5e-1\n"
        );
        assert_eq!(c.mean_val(), 0.75);
        assert_eq!(c.final_val(), 0.5);
    }

    #[test]
    fn median_trend() {
        let noisy: Vec<f64> = (0..40)
            .map(|i| 1.0 / (1.0 + i as f64) + if i % 2 == 0 { 0.01 } else { 0.0 })
            .collect();
        assert!(median_decreasing(&noisy, 20));
        let mut flat_tail = noisy.clone();
        flat_tail.extend(std::iter::repeat_n(0.02, 20));
        assert!(!median_decreasing(&flat_tail, 20));
        assert!(!median_decreasing(&[1.0], 20));
        assert!(median_decreasing(&[2.0, 1.0], 20));
    }
}
