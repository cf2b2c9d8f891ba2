//! Probability-emitting binary classifiers built from scratch.
//!
//! Every fitted [`ProbModel`] carries its own [`Scaler`], fitted on the
//! training rows only, and maps a raw feature row to `P(y = 1) ∈ [0, 1]`.

pub mod forest;
pub mod grid;
pub mod logistic;
pub mod mlp;
pub mod scaler;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use forest::Tree;
pub use logistic::LogisticParams;
pub use mlp::MlpParams;
pub use scaler::Scaler;

use crate::rng;

/// Probabilities are clipped to `[PROB_EPS, 1 - PROB_EPS]` before any log.
pub const PROB_EPS: f64 = 1e-6;

pub fn clip_prob(p: f64) -> f64 {
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("{rows} rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("expected {expected} features, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("non-finite input value")]
    NonFinite,
    #[error("labels must be 0 or 1")]
    BadLabel,
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("model is not a forest")]
    NotAForest,
    #[error("unknown model kind `{0}`")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Logistic,
    Mlp,
    Forest,
    RandomGuess,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Logistic => "logistic",
            ModelKind::Mlp => "mlp",
            ModelKind::Forest => "forest",
            ModelKind::RandomGuess => "random_guess",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "logistic" => Ok(ModelKind::Logistic),
            "mlp" => Ok(ModelKind::Mlp),
            "forest" => Ok(ModelKind::Forest),
            "random_guess" => Ok(ModelKind::RandomGuess),
            other => Err(ModelError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticConfig {
    pub inverse_reg_c: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            inverse_reg_c: 0.1,
            max_iters: 10_000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpConfig {
    pub hidden: usize,
    pub l2_alpha: f64,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub tol: f64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden: 50,
            l2_alpha: 1e-4,
            learning_rate: 0.1,
            max_epochs: 2_000,
            tol: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or cannot split.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: None,
            min_leaf: 1,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub logistic: LogisticConfig,
    pub mlp: MlpConfig,
    pub forest: ForestConfig,
    pub seed: u64,
}

impl TrainConfig {
    // Negated comparisons also reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::Config(m.to_string()));
        let l = &self.logistic;
        if !(l.inverse_reg_c > 0.0) || l.max_iters == 0 || !(l.tol > 0.0) {
            return bad("logistic: inverse_reg_c, max_iters and tol must be positive");
        }
        let m = &self.mlp;
        if m.hidden == 0 {
            return bad("mlp: hidden must be at least 1");
        }
        if !(m.l2_alpha >= 0.0) || !(m.learning_rate > 0.0) || m.max_epochs == 0 || !(m.tol > 0.0) {
            return bad("mlp: l2_alpha must be >= 0; learning_rate, max_epochs and tol positive");
        }
        let f = &self.forest;
        if f.n_trees == 0 || f.min_leaf == 0 || f.max_depth == Some(0) {
            return bad("forest: n_trees, min_leaf and max_depth must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelParams {
    Logistic(LogisticParams),
    Mlp(MlpParams),
    Forest { trees: Vec<Tree> },
    RandomGuess,
}

/// A fitted classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbModel {
    pub kind: ModelKind,
    pub feature_names: Vec<String>,
    pub scaler: Scaler,
    pub params: ModelParams,
    pub config: TrainConfig,
    pub seed: u64,
}

fn check_training(x: &[Vec<f64>], y: &[u8]) -> Result<usize, ModelError> {
    if x.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    if x.len() != y.len() {
        return Err(ModelError::LengthMismatch {
            rows: x.len(),
            labels: y.len(),
        });
    }
    let d = x[0].len();
    for r in x {
        if r.len() != d {
            return Err(ModelError::Arity {
                expected: d,
                got: r.len(),
            });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite);
        }
    }
    if y.iter().any(|&l| l > 1) {
        return Err(ModelError::BadLabel);
    }
    Ok(d)
}

/// Logistic model with zero weights whose output is the clipped class prior.
fn constant_model(d: usize, y: &[u8]) -> LogisticParams {
    let prior = clip_prob(y.iter().map(|&l| l as f64).sum::<f64>() / y.len() as f64);
    LogisticParams {
        weights: vec![0.0; d],
        bias: (prior / (1.0 - prior)).ln(),
    }
}

fn single_class(y: &[u8]) -> bool {
    y.iter().all(|&l| l == y[0])
}

impl ProbModel {
    pub fn fit(
        kind: ModelKind,
        x: &[Vec<f64>],
        y: &[u8],
        feature_names: &[String],
        config: &TrainConfig,
    ) -> Result<Self, ModelError> {
        match kind {
            ModelKind::Logistic => Self::fit_logistic(x, y, feature_names, config),
            ModelKind::Mlp => Self::fit_mlp(x, y, feature_names, config),
            ModelKind::Forest => Self::fit_forest(x, y, feature_names, config),
            ModelKind::RandomGuess => Self::random_guess(x, y, feature_names, config),
        }
    }

    fn assemble(kind: ModelKind, feature_names: &[String], scaler: Scaler, params: ModelParams, config: &TrainConfig) -> Self {
        ProbModel {
            kind,
            feature_names: feature_names.to_vec(),
            scaler,
            params,
            config: config.clone(),
            seed: config.seed,
        }
    }

    fn names_match(d: usize, feature_names: &[String]) -> Result<(), ModelError> {
        if feature_names.len() != d {
            return Err(ModelError::Arity {
                expected: d,
                got: feature_names.len(),
            });
        }
        Ok(())
    }

    pub fn fit_logistic(x: &[Vec<f64>], y: &[u8], feature_names: &[String], config: &TrainConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let d = check_training(x, y)?;
        Self::names_match(d, feature_names)?;
        let scaler = Scaler::fit(x);
        let params = if single_class(y) {
            log::warn!("logistic: single-class training labels; returning the class prior");
            constant_model(d, y)
        } else {
            let (p, iters) = logistic::fit(&scaler.transform(x), y, &config.logistic);
            if iters == config.logistic.max_iters {
                log::debug!("logistic: stopped at max_iters={iters}");
            }
            p
        };
        Ok(Self::assemble(ModelKind::Logistic, feature_names, scaler, ModelParams::Logistic(params), config))
    }

    pub fn fit_mlp(x: &[Vec<f64>], y: &[u8], feature_names: &[String], config: &TrainConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let d = check_training(x, y)?;
        Self::names_match(d, feature_names)?;
        let scaler = Scaler::fit(x);
        let params = if single_class(y) {
            log::warn!("mlp: single-class training labels; returning the class prior");
            ModelParams::Logistic(constant_model(d, y))
        } else {
            let (p, _) = mlp::fit(&scaler.transform(x), y, &config.mlp, config.seed);
            ModelParams::Mlp(p)
        };
        Ok(Self::assemble(ModelKind::Mlp, feature_names, scaler, params, config))
    }

    pub fn fit_forest(x: &[Vec<f64>], y: &[u8], feature_names: &[String], config: &TrainConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let d = check_training(x, y)?;
        Self::names_match(d, feature_names)?;
        let scaler = Scaler::fit(x);
        let trees = forest::fit(&scaler.transform(x), y, &config.forest, config.seed);
        Ok(Self::assemble(ModelKind::Forest, feature_names, scaler, ModelParams::Forest { trees }, config))
    }

    pub fn random_guess(x: &[Vec<f64>], y: &[u8], feature_names: &[String], config: &TrainConfig) -> Result<Self, ModelError> {
        let d = check_training(x, y)?;
        Self::names_match(d, feature_names)?;
        Ok(Self::assemble(ModelKind::RandomGuess, feature_names, Scaler::identity(d), ModelParams::RandomGuess, config))
    }

    pub fn arity(&self) -> usize {
        self.feature_names.len()
    }

    fn prepare(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        if x.len() != self.arity() {
            return Err(ModelError::Arity {
                expected: self.arity(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite);
        }
        Ok(self.scaler.transform_row(x))
    }

    /// `P(y = 1 | x)`. Forests average their trees; the random guess is a
    /// uniform draw seeded by the model seed and the bits of `x`.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64, ModelError> {
        let z = self.prepare(x)?;
        Ok(match &self.params {
            ModelParams::Logistic(p) => p.predict(&z),
            ModelParams::Mlp(p) => p.predict(&z),
            ModelParams::Forest { trees } => trees.iter().map(|t| t.predict(&z)).sum::<f64>() / trees.len() as f64,
            ModelParams::RandomGuess => {
                let key = x.iter().fold(0u64, |h, v| rng::derive_seed(h, v.to_bits()));
                rng::stream(self.seed, key).random::<f64>()
            }
        })
    }

    pub fn predict_many(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        rows.iter().map(|r| self.predict_proba(r)).collect()
    }

    /// Per-tree probabilities (forests only).
    pub fn tree_probas(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        let ModelParams::Forest { trees } = &self.params else {
            return Err(ModelError::NotAForest);
        };
        let z = self.prepare(x)?;
        Ok(trees.iter().map(|t| t.predict(&z)).collect())
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}
