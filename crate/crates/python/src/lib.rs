//! Python bindings: interval construction, decisions, synthetic data and the
//! repeated-split experiment. Structured results cross the boundary as JSON
//! strings so Python callers can use `json.loads` without extra classes.

use cci_core::conformal::{self, interval_around, TransformedLabel};
use cci_core::features::{extract_log_dir, read_feature_csv, write_feature_csv, DayAnnotations};
use cci_core::harness::{compare_methods, ExperimentConfig};
use cci_core::synth::generate;
use cci_core::{decide, Dataset, ProbInterval, QuantileRule, SynthConfig};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Adaptive scale 2 - |p - 0.5|.
#[pyfunction]
fn sigma(p: f64) -> PyResult<f64> {
    conformal::sigma(p).map_err(value_err)
}

/// Nonconformity score of probability `p` against binary label `y`.
#[pyfunction]
fn score(p: f64, y: u8) -> PyResult<f64> {
    let center = TransformedLabel::from_label(y).map_err(value_err)?;
    conformal::score(p, center).map_err(value_err)
}

/// Conformal quantile of the calibration scores; `inf` when unbounded.
#[pyfunction]
#[pyo3(signature = (probs, labels, alpha = 0.1, rule = "split_conformal"))]
fn calibrate(probs: Vec<f64>, labels: Vec<u8>, alpha: f64, rule: &str) -> PyResult<f64> {
    let rule: QuantileRule = rule.parse().map_err(value_err)?;
    Ok(conformal::calibrate(&probs, &labels, alpha, rule).map_err(value_err)?.q_hat)
}

/// `(lo, hi)` of the conformal interval for prediction `p_hat` at quantile `q_hat`.
#[pyfunction]
fn cci_interval(p_hat: f64, q_hat: f64) -> PyResult<(f64, f64)> {
    if !(0.0..=1.0).contains(&p_hat) {
        return Err(value_err(format!("p_hat {p_hat} is outside [0, 1]")));
    }
    if q_hat.is_nan() || q_hat < 0.0 {
        return Err(value_err(format!("q_hat {q_hat} must be nonnegative")));
    }
    let iv = interval_around(conformal::center_for(p_hat), q_hat);
    Ok((iv.lo, iv.hi))
}

/// `(lo, hi)` = mean ± std of per-tree probabilities, clamped to [0, 1].
#[pyfunction]
fn naive_interval(tree_probs: Vec<f64>) -> PyResult<(f64, f64)> {
    let iv = conformal::naive_interval(&tree_probs).map_err(value_err)?;
    Ok((iv.lo, iv.hi))
}

/// `"UTI"`, `"NO_UTI"` or `"ABSTAIN"` for the interval `[lo, hi]`.
#[pyfunction]
#[pyo3(signature = (lo, hi, alpha = 0.1))]
fn decide_interval(lo: f64, hi: f64, alpha: f64) -> PyResult<String> {
    if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
        return Err(value_err(format!("[{lo}, {hi}] is not an interval inside [0, 1]")));
    }
    Ok(decide(ProbInterval::new(lo, hi), alpha).outcome.to_string())
}

fn synth_config(config_json: Option<&str>) -> PyResult<SynthConfig> {
    match config_json {
        Some(text) => serde_json::from_str(text).map_err(value_err),
        None => Ok(SynthConfig::default()),
    }
}

/// Synthetic labeled feature table as CSV text.
#[pyfunction]
#[pyo3(signature = (config_json = None))]
fn synthetic_features_csv(config_json: Option<&str>) -> PyResult<String> {
    let cfg = synth_config(config_json)?;
    let rows: Vec<_> = generate(&cfg).map_err(value_err)?.into_iter().flat_map(|p| p.targets).collect();
    let mut buf = Vec::new();
    write_feature_csv(&mut buf, &rows).map_err(value_err)?;
    String::from_utf8(buf).map_err(value_err)
}

/// Feature table (CSV text) for a folder of `<participant>.csv` logs,
/// optionally labeled from a `participant_id,date,label[,health_event]` file.
#[pyfunction]
#[pyo3(signature = (log_dir, labels_path = None))]
fn features_from_logs(log_dir: &str, labels_path: Option<&str>) -> PyResult<String> {
    let annotations = match labels_path {
        Some(p) => DayAnnotations::read(std::fs::File::open(p).map_err(value_err)?).map_err(value_err)?,
        None => DayAnnotations::default(),
    };
    let out = extract_log_dir(std::path::Path::new(log_dir), &annotations).map_err(value_err)?;
    let mut buf = Vec::new();
    write_feature_csv(&mut buf, &out.rows).map_err(value_err)?;
    String::from_utf8(buf).map_err(value_err)
}

/// Runs each experiment config (a JSON list) on the labeled feature CSV and
/// returns the comparison report as JSON.
#[pyfunction]
fn run_experiments(features_csv: &str, configs_json: &str) -> PyResult<String> {
    let rows = read_feature_csv(features_csv.as_bytes()).map_err(value_err)?;
    let data = Dataset::from_vectors(&rows).map_err(value_err)?;
    let configs: Vec<ExperimentConfig> = serde_json::from_str(configs_json).map_err(value_err)?;
    let entries: Vec<_> = configs.into_iter().map(|c| (&data, c)).collect();
    let cmp = compare_methods(&entries).map_err(value_err)?;
    serde_json::to_string(&cmp).map_err(value_err)
}

#[pymodule]
fn cci_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(sigma, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate, m)?)?;
    m.add_function(wrap_pyfunction!(cci_interval, m)?)?;
    m.add_function(wrap_pyfunction!(naive_interval, m)?)?;
    m.add_function(wrap_pyfunction!(decide_interval, m)?)?;
    m.add_function(wrap_pyfunction!(synthetic_features_csv, m)?)?;
    m.add_function(wrap_pyfunction!(features_from_logs, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiments, m)?)?;
    Ok(())
}
