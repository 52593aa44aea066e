//! Campaign, dataset and model plumbing shared by the subcommands.

use std::path::{Path, PathBuf};

use holab_core::dataset::{fit_normalizer, normalize, Dataset, LabeledSequence, NormalizationSpec};
use holab_core::sim::{benchmark_campaign, forced_campaign};
use holab_core::Scenario;
use holab_models::{load_model, LstmRegressor, MlpRegressor, Predictor, SeqAutoencoder};

use crate::error::{Error, Result};
use crate::eval::Scorer;

pub const CAMPAIGN_FILE: &str = "campaign.hods";
pub const DATASET_FILE: &str = "dataset.hods";
pub const LSTM_FILE: &str = "lstm.holab";
pub const AE_FILE: &str = "ae.holab";
pub const MLP_FILE: &str = "mlp.holab";

pub const LSTM_POLICY: &str = "lstm";
pub const AE_MLP_POLICY: &str = "ae+mlp";

/// Every trace of the given runs: per run the forced campaign (UE then
/// rank) followed by the benchmark campaign, whose sequences carry rank 0.
pub fn campaign_dataset(
    scenario: &Scenario,
    base_seed: u64,
    runs: impl IntoIterator<Item = u32>,
) -> Result<Dataset> {
    let mut d = Dataset::empty(scenario.config.num_windows());
    for run in runs {
        let forced = forced_campaign(scenario, base_seed, run);
        let bench = benchmark_campaign(scenario, base_seed, run);
        for t in forced.iter().chain(&bench) {
            d.push(LabeledSequence::from_trace(t))?;
        }
    }
    Ok(d)
}

/// Normalizer fitted on every run of `training`, and the normalized set.
pub fn normalized(training: &Dataset) -> Result<(Dataset, NormalizationSpec)> {
    let runs: Vec<u32> = training.run_ids().into_iter().collect();
    let norm = fit_normalizer(training, &runs)?;
    Ok((normalize(training, &norm), norm))
}

fn require(path: &Path) -> Result<PathBuf> {
    if path.is_file() {
        Ok(path.to_path_buf())
    } else {
        Err(Error::MissingCheckpoint(path.to_path_buf()))
    }
}

fn normalizer_of(path: &Path, norm: Option<NormalizationSpec>) -> Result<NormalizationSpec> {
    norm.ok_or_else(|| {
        Error::Eval(format!(
            "checkpoint {} carries no normalizer",
            path.display()
        ))
    })
}

pub fn load_lstm_scorer(dir: &Path) -> Result<Scorer> {
    let path = require(&dir.join(LSTM_FILE))?;
    let (model, norm) = load_model::<LstmRegressor>(&path)?;
    Ok(Scorer::Model {
        predictor: Predictor::Lstm(model),
        norm: normalizer_of(&path, norm)?,
    })
}

pub fn load_autoencoder(path: &Path) -> Result<(SeqAutoencoder, NormalizationSpec)> {
    let path = require(path)?;
    let (ae, norm) = load_model::<SeqAutoencoder>(&path)?;
    Ok((ae, normalizer_of(&path, norm)?))
}

/// The AE+MLP pair; both checkpoints must carry the same normalizer.
pub fn load_ae_mlp_scorer(dir: &Path) -> Result<Scorer> {
    let (ae, norm) = load_autoencoder(&dir.join(AE_FILE))?;
    let path = require(&dir.join(MLP_FILE))?;
    let (mlp, mlp_norm) = load_model::<MlpRegressor>(&path)?;
    if normalizer_of(&path, mlp_norm)? != norm {
        return Err(Error::Eval(format!(
            "{} and {} were fitted with different normalizers",
            AE_FILE, MLP_FILE
        )));
    }
    Ok(Scorer::Model {
        predictor: Predictor::ae_mlp(ae, mlp)?,
        norm,
    })
}

pub fn load_scorers(dir: &Path) -> Result<Vec<(&'static str, Scorer)>> {
    Ok(vec![
        (LSTM_POLICY, load_lstm_scorer(dir)?),
        (AE_MLP_POLICY, load_ae_mlp_scorer(dir)?),
    ])
}
