//! The JSON config file shared by every subcommand.

use std::path::{Path, PathBuf};

use cci_core::features::FeatureMode;
use cci_core::harness::{ExperimentConfig, SplitMode, UqMethod};
use cci_core::{ModelKind, QuantileRule, SynthConfig, TrainConfig};
use serde::{Deserialize, Serialize};

/// A compared method: a model plus an interval method, optionally renamed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MethodSpec {
    /// One of `random_guess`, `base`, `naive`, `cci`.
    Named(String),
    Custom {
        #[serde(default)]
        name: Option<String>,
        model: ModelKind,
        uq: UqMethod,
    },
}

impl MethodSpec {
    pub fn resolve(&self) -> Result<(Option<String>, ModelKind, UqMethod), String> {
        match self {
            MethodSpec::Named(n) => match n.as_str() {
                "random_guess" => Ok((None, ModelKind::RandomGuess, UqMethod::None)),
                "base" => Ok((None, ModelKind::Logistic, UqMethod::None)),
                "naive" => Ok((None, ModelKind::Forest, UqMethod::Naive)),
                "cci" => Ok((None, ModelKind::Logistic, UqMethod::Cci)),
                other => Err(format!(
                    "unknown method `{other}`; expected random_guess, base, naive, cci or an object with model and uq"
                )),
            },
            MethodSpec::Custom { name, model, uq } => Ok((name.clone(), *model, *uq)),
        }
    }
}

fn default_methods() -> Vec<MethodSpec> {
    ["random_guess", "base", "naive", "cci"]
        .into_iter()
        .map(|m| MethodSpec::Named(m.into()))
        .collect()
}

/// Protocol settings shared by all methods, plus the model and interval
/// method used by the single-split `train`, `calibrate` and `predict` steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub alpha: f64,
    pub test_fraction: f64,
    pub calib_fraction_of_remainder: f64,
    pub n_runs: usize,
    pub base_seed: u64,
    pub feature_mode: FeatureMode,
    pub quantile_rule: QuantileRule,
    pub split_mode: SplitMode,
    pub methods: Vec<MethodSpec>,
    pub model: ModelKind,
    pub uq: UqMethod,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        let e = ExperimentConfig::default();
        ExperimentSection {
            alpha: e.alpha,
            test_fraction: e.test_fraction,
            calib_fraction_of_remainder: e.calib_fraction_of_remainder,
            n_runs: e.n_runs,
            base_seed: e.base_seed,
            feature_mode: e.feature_mode,
            quantile_rule: e.quantile_rule,
            split_mode: e.split_mode,
            methods: default_methods(),
            model: ModelKind::Logistic,
            uq: UqMethod::Cci,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    /// Output directory for every command.
    pub out_dir: PathBuf,
    /// Feature CSV to train and evaluate on.
    pub dataset: Option<PathBuf>,
    pub synth: SynthConfig,
    pub train: TrainConfig,
    pub experiment: ExperimentSection,
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            out_dir: PathBuf::from("out"),
            dataset: None,
            synth: SynthConfig::default(),
            train: TrainConfig::default(),
            experiment: ExperimentSection::default(),
        }
    }
}

impl CliConfig {
    /// Parses a config and makes its relative paths relative to `base`.
    pub fn from_json(text: &str, base: &Path) -> Result<Self, serde_json::Error> {
        let mut cfg: CliConfig = serde_json::from_str(text)?;
        cfg.out_dir = base.join(&cfg.out_dir);
        cfg.dataset = cfg.dataset.map(|d| base.join(d));
        Ok(cfg)
    }

    /// The experiment config for one method.
    pub fn experiment_for(&self, name: Option<String>, model: ModelKind, uq: UqMethod) -> ExperimentConfig {
        let e = &self.experiment;
        ExperimentConfig {
            name,
            model,
            train: self.train.clone(),
            uq,
            alpha: e.alpha,
            test_fraction: e.test_fraction,
            calib_fraction_of_remainder: e.calib_fraction_of_remainder,
            n_runs: e.n_runs,
            base_seed: e.base_seed,
            feature_mode: e.feature_mode.clone(),
            quantile_rule: e.quantile_rule,
            split_mode: e.split_mode,
        }
    }

    pub fn methods(&self) -> Result<Vec<ExperimentConfig>, String> {
        if self.experiment.methods.is_empty() {
            return Err("experiment.methods is empty".into());
        }
        self.experiment
            .methods
            .iter()
            .map(|m| m.resolve().map(|(name, model, uq)| self.experiment_for(name, model, uq)))
            .collect()
    }
}
