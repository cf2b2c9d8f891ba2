//! Labeled design matrices built from feature vectors.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureVector, FEATURE_NAMES};

#[derive(Debug, Error, PartialEq)]
pub enum DatasetError {
    #[error("row {participant_id} {date} has no label")]
    MissingLabel { participant_id: String, date: NaiveDate },
    #[error("unknown feature column `{0}`")]
    UnknownFeature(String),
    #[error("dataset is empty")]
    Empty,
}

/// Row-major labeled data with per-row provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    pub participant_ids: Vec<String>,
    pub dates: Vec<NaiveDate>,
}

impl Dataset {
    /// All 17 features of labeled vectors.
    pub fn from_vectors(vectors: &[FeatureVector]) -> Result<Self, DatasetError> {
        if vectors.is_empty() {
            return Err(DatasetError::Empty);
        }
        let mut ds = Dataset {
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            rows: Vec::with_capacity(vectors.len()),
            labels: Vec::with_capacity(vectors.len()),
            participant_ids: Vec::with_capacity(vectors.len()),
            dates: Vec::with_capacity(vectors.len()),
        };
        for v in vectors {
            let label = v.label.ok_or_else(|| DatasetError::MissingLabel {
                participant_id: v.participant_id.clone(),
                date: v.date,
            })?;
            ds.rows.push(v.values().to_vec());
            ds.labels.push(label);
            ds.participant_ids.push(v.participant_id.clone());
            ds.dates.push(v.date);
        }
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            participant_ids: indices.iter().map(|&i| self.participant_ids[i].clone()).collect(),
            dates: indices.iter().map(|&i| self.dates[i]).collect(),
        }
    }

    /// Keeps only the named columns, in the given order.
    pub fn project(&self, names: &[&str]) -> Result<Dataset, DatasetError> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.feature_names
                    .iter()
                    .position(|f| f == n)
                    .ok_or_else(|| DatasetError::UnknownFeature(n.to_string()))
            })
            .collect::<Result<_, _>>()?;
        Ok(Dataset {
            feature_names: names.iter().map(|s| s.to_string()).collect(),
            rows: self.rows.iter().map(|r| idx.iter().map(|&j| r[j]).collect()).collect(),
            labels: self.labels.clone(),
            participant_ids: self.participant_ids.clone(),
            dates: self.dates.clone(),
        })
    }
}
