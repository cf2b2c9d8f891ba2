//! Feature subsets: the five-marker clinical subset, all 17, or a
//! permutation-importance ranking against a fitted model.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, DatasetError};
use crate::models::{ModelError, ProbModel};
use crate::rng;

/// Nocturnal bathroom visits, nocturnal non-bathroom movement, percentage of
/// nocturnal visits, recent health event, daily movement entropy.
pub const TOP5_FEATURES: [&str; 5] = [
    "f03_nocturnal_bathroom_visits",
    "f12_nocturnal_nonbathroom_moves",
    "f16_pct_visits_night",
    "f13_health_event_last3",
    "f08_movement_entropy",
];

pub const DEFAULT_PERMUTATION_REPEATS: usize = 10;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    /// The five clinically highlighted markers, [`TOP5_FEATURES`].
    #[serde(rename = "top5_paper")]
    #[default]
    Top5,
    All17,
    PermutationTopk {
        k: usize,
        #[serde(default = "default_repeats")]
        repeats: usize,
    },
}

fn default_repeats() -> usize {
    DEFAULT_PERMUTATION_REPEATS
}

#[derive(Debug, Error, PartialEq)]
pub enum SelectError {
    #[error("permutation ranking needs a fitted model and validation data")]
    MissingModel,
    #[error("k = {k} is outside 1..={max}")]
    BadK { k: usize, max: usize },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub name: String,
    /// Mean accuracy drop over the repeats.
    pub importance: f64,
    pub std: f64,
}

fn accuracy(model: &ProbModel, rows: &[Vec<f64>], labels: &[u8]) -> Result<f64, ModelError> {
    let mut correct = 0usize;
    for (r, &y) in rows.iter().zip(labels) {
        if (model.predict_proba(r)? >= 0.5) == (y == 1) {
            correct += 1;
        }
    }
    Ok(correct as f64 / rows.len().max(1) as f64)
}

/// Accuracy drop when each column of `validation` is shuffled (labels kept in
/// place), averaged over `repeats`. Sorted by importance, descending; ties
/// keep column order.
pub fn permutation_importance(
    model: &ProbModel,
    validation: &Dataset,
    repeats: usize,
    seed: u64,
) -> Result<Vec<FeatureImportance>, SelectError> {
    let base = accuracy(model, &validation.rows, &validation.labels)?;
    let mut out = Vec::with_capacity(validation.n_features());
    for (j, name) in validation.feature_names.iter().enumerate() {
        let mut r = rng::stream(seed, j as u64);
        let mut drops = Vec::with_capacity(repeats);
        for _ in 0..repeats.max(1) {
            let mut column: Vec<f64> = validation.rows.iter().map(|row| row[j]).collect();
            column.shuffle(&mut r);
            let permuted: Vec<Vec<f64>> = validation
                .rows
                .iter()
                .zip(&column)
                .map(|(row, v)| {
                    let mut row = row.clone();
                    row[j] = *v;
                    row
                })
                .collect();
            drops.push(base - accuracy(model, &permuted, &validation.labels)?);
        }
        let (importance, std) = crate::features::daily::mean_std(&drops);
        out.push(FeatureImportance {
            name: name.clone(),
            importance,
            std,
        });
    }
    out.sort_by(|a, b| b.importance.total_cmp(&a.importance));
    Ok(out)
}

/// Projects `data` (all 17 columns) onto the columns chosen by `mode`.
/// Permutation ranking needs `ranking = Some((model, validation))`, where the
/// model was fitted on the same columns as `validation`.
pub fn select_features(
    data: &Dataset,
    mode: &FeatureMode,
    ranking: Option<(&ProbModel, &Dataset)>,
    seed: u64,
) -> Result<Dataset, SelectError> {
    match mode {
        FeatureMode::All17 => Ok(data.clone()),
        FeatureMode::Top5 => Ok(data.project(&TOP5_FEATURES)?),
        FeatureMode::PermutationTopk { k, repeats } => {
            let (model, validation) = ranking.ok_or(SelectError::MissingModel)?;
            if *k == 0 || *k > validation.n_features() {
                return Err(SelectError::BadK {
                    k: *k,
                    max: validation.n_features(),
                });
            }
            let ranked = permutation_importance(model, validation, *repeats, seed)?;
            let names: Vec<&str> = ranked.iter().take(*k).map(|f| f.name.as_str()).collect();
            Ok(data.project(&names)?)
        }
    }
}
