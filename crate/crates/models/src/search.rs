//! Grid search over layer layouts and codeword lengths.

use std::cmp::Ordering;
use std::io::Write;

use holab_core::dataset::Dataset;
use holab_neural::{Params, Tensor2D};

use crate::autoencoder::{train_autoencoder, AeShape};
use crate::config::{LossCurve, Selection, TrainConfig};
use crate::error::{ModelError, Result};
use crate::mlp::train_mlp;
use crate::model_io::widths;
use crate::regressor::train_lstm_regressor;

/// Layer widths available to the LSTM grid, largest first.
const LSTM_LADDER: [usize; 5] = [84, 62, 42, 21, 10];

/// Nine LSTM layouts: first width in {84, 62, 42}, one to three layers
/// stepping down the ladder.
pub fn lstm_grid() -> Vec<Vec<usize>> {
    let mut grid = Vec::new();
    for start in 0..3 {
        for depth in 1..=3 {
            grid.push(LSTM_LADDER[start..start + depth].to_vec());
        }
    }
    grid
}

pub fn cw_grid() -> Vec<usize> {
    vec![25, 50, 100, 200, 400]
}

pub fn mlp_grid() -> Vec<Vec<usize>> {
    vec![
        vec![40],
        vec![80],
        vec![160],
        vec![40, 20],
        vec![80, 40],
        vec![160, 80],
        vec![80, 40, 20],
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub name: String,
    pub params: usize,
    pub curve: LossCurve,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    pub kind: &'static str,
    pub selection: Selection,
    /// Best first.
    pub ranked: Vec<Candidate>,
}

/// Lower score first; equal scores go to the smaller model.
pub fn rank(candidates: &mut [Candidate]) {
    candidates.sort_by(|a, b| match a.score.total_cmp(&b.score) {
        Ordering::Equal => a.params.cmp(&b.params),
        o => o,
    });
}

impl SearchReport {
    fn new(kind: &'static str, selection: Selection, mut ranked: Vec<Candidate>) -> Self {
        rank(&mut ranked);
        SearchReport {
            kind,
            selection,
            ranked,
        }
    }

    pub fn best(&self) -> &Candidate {
        &self.ranked[0]
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let metric = match self.selection {
            Selection::MeanOverEpochs => "mean val MSE",
            Selection::FinalEpoch => "final val MSE",
        };
        writeln!(w, "{} search, ranked by {metric}", self.kind)?;
        for (i, c) in self.ranked.iter().enumerate() {
            writeln!(
                w,
                "{:>2}. {:<14} params {:>8}  score {:.6e}",
                i + 1,
                c.name,
                c.params,
                c.score
            )?;
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "rank,candidate,params,mean_val_mse,final_val_mse")?;
        for (i, c) in self.ranked.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{:e},{:e}",
                i + 1,
                c.name,
                c.params,
                c.curve.mean_val(),
                c.curve.final_val()
            )?;
        }
        Ok(())
    }
}

fn non_empty<T>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(ModelError::Config {
            field: "grid",
            reason: "no candidates".into(),
        });
    }
    Ok(())
}

fn candidate(name: String, params: usize, curve: LossCurve, cfg: &TrainConfig) -> Candidate {
    let score = curve.score(cfg.selection);
    Candidate {
        name,
        params,
        curve,
        score,
    }
}

pub fn search_lstm(
    dataset: &Dataset,
    grid: &[Vec<usize>],
    cfg: &TrainConfig,
) -> Result<SearchReport> {
    non_empty(grid)?;
    let mut out = Vec::with_capacity(grid.len());
    for hidden in grid {
        let (model, curve) = train_lstm_regressor(dataset, hidden, cfg)?;
        out.push(candidate(
            format!("[{}]", widths(hidden)),
            model.num_params(),
            curve,
            cfg,
        ));
    }
    Ok(SearchReport::new("lstm", cfg.selection, out))
}

/// Codeword lengths with symmetric single-layer encoder and decoder.
pub fn search_cw(dataset: &Dataset, grid: &[usize], cfg: &TrainConfig) -> Result<SearchReport> {
    non_empty(grid)?;
    let mut out = Vec::with_capacity(grid.len());
    for &cw in grid {
        let (model, curve) = train_autoencoder(dataset, &AeShape::symmetric(cw), cfg)?;
        out.push(candidate(
            format!("cw={cw}"),
            model.num_params(),
            curve,
            cfg,
        ));
    }
    Ok(SearchReport::new("autoencoder", cfg.selection, out))
}

pub fn search_mlp(
    codewords: &Tensor2D,
    labels: &[f64],
    grid: &[Vec<usize>],
    cfg: &TrainConfig,
) -> Result<SearchReport> {
    non_empty(grid)?;
    let mut out = Vec::with_capacity(grid.len());
    for hidden in grid {
        let (model, curve) = train_mlp(codewords, labels, hidden, cfg)?;
        out.push(candidate(
            format!("[{}]", widths(hidden)),
            model.num_params(),
            curve,
            cfg,
        ));
    }
    Ok(SearchReport::new("mlp", cfg.selection, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        let g = lstm_grid();
        assert_eq!(g.len(), 9);
        assert!(g.contains(&vec![84, 62, 42]));
        assert_eq!(cw_grid().len(), 5);
        let m = mlp_grid();
        assert_eq!(m.len(), 7);
        assert!(m.contains(&vec![80, 40]));
    }

    #[test]
    fn ties_go_to_smaller_models() {
        let c = |name: &str, params, score| Candidate {
            name: name.into(),
            params,
            curve: LossCurve::default(),
            score,
        };
        let mut v = vec![
            c("big", 100, 0.5),
            c("small", 10, 0.5),
            c("best", 1000, 0.1),
        ];
        rank(&mut v);
        let names: Vec<&str> = v.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, vec!["best", "small", "big"]);
    }
}
