//! Smart-home UTI flare-up detection with conformal-calibrated probability
//! intervals.
//!
//! The pipeline runs raw sensor logs through daily windows and behavioral
//! features, then small from-scratch classifiers, then interval construction
//! (naive forest spread or conformal calibration), and finally a three-way
//! UTI / NO_UTI / ABSTAIN decision.

pub mod conformal;
pub mod dataset;
pub mod decision;
pub mod event_model;
pub mod features;
pub mod harness;
pub mod models;
pub mod plot;
pub mod rng;
pub mod synth;

pub use conformal::{calibrate, cci_interval, naive_interval, CalibrationResult, ProbInterval, QuantileRule};
pub use dataset::Dataset;
pub use decision::{decide, evaluate, EvalReport, IntervalDecision, Outcome};
pub use event_model::{parse_event_log, window_by_day, DayWindow, SensorEvent};
pub use features::{FeatureMode, FeatureVector, FEATURE_NAMES};
pub use harness::{compare_methods, run_experiment, ExperimentConfig, UqMethod};
pub use models::{ModelKind, ProbModel, TrainConfig};
pub use synth::SynthConfig;
