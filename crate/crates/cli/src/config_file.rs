//! Plain-text `key = value` configuration covering scenario and training fields.

use std::path::Path;

use holab_core::scenario::SCENARIO_KEYS;
use holab_core::ScenarioConfig;
use holab_models::config::TRAIN_KEYS;
use holab_models::TrainConfig;

use crate::error::{Error, Result};

/// Every key the config file accepts.
pub fn valid_keys() -> Vec<&'static str> {
    let mut keys: Vec<&'static str> = SCENARIO_KEYS.to_vec();
    keys.extend_from_slice(TRAIN_KEYS);
    keys
}

/// Applies `text` on top of the given configs. Blank lines and `#` comments
/// are ignored; the last assignment to a key wins.
pub fn apply_config(
    text: &str,
    scenario: &mut ScenarioConfig,
    train: &mut TrainConfig,
) -> Result<()> {
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Usage(format!(
                "config line {}: expected `key = value`, got {raw:?}",
                n + 1
            ))
        })?;
        let (key, value) = (key.trim(), value.trim());
        let known = if scenario
            .set(key, value)
            .map_err(|e| Error::Usage(e.to_string()))?
        {
            true
        } else {
            train
                .set(key, value)
                .map_err(|e| Error::Usage(e.to_string()))?
        };
        if !known {
            return Err(Error::Usage(format!(
                "config line {}: unknown key `{key}`; valid keys: {}",
                n + 1,
                valid_keys().join(", ")
            )));
        }
    }
    scenario
        .validate()
        .map_err(|e| Error::Usage(e.to_string()))?;
    train.validate().map_err(|e| Error::Usage(e.to_string()))?;
    Ok(())
}

pub fn load_config(path: &Path) -> Result<(ScenarioConfig, TrainConfig)> {
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    let (mut s, mut t) = (ScenarioConfig::default(), TrainConfig::default());
    apply_config(&text, &mut s, &mut t)?;
    Ok((s, t))
}
