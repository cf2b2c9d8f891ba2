//! The evaluation protocol: label-stratified test / calibration / train
//! splits, repeated runs with derived seeds, and paired comparison of
//! methods that share those splits.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conformal::{
    calibrate, cci_interval, center_coverage, empirical_coverage, naive_interval, CalibrationResult, ConformalError,
    ProbInterval,
    QuantileRule,
};
use crate::dataset::{Dataset, DatasetError};
use crate::decision::{aggregate, decide, evaluate, AggregateReport, DecisionError, EvalReport, Outcome};
use crate::features::select::{select_features, FeatureMode, SelectError};
use crate::models::{ModelError, ModelKind, ProbModel, TrainConfig};
use crate::rng;
use crate::synth::{largest_remainder, round_half_up};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UqMethod {
    /// Point prediction thresholded at 0.5.
    #[default]
    None,
    /// Mean ± std of a random forest's per-tree probabilities.
    Naive,
    /// Conformal-calibrated interval around the model's prediction.
    Cci,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Row-level shuffle, stratified by label.
    #[default]
    Stratified,
    /// Whole participants go to one split.
    ByParticipant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Row label in tables; derived from `model` and `uq` when absent.
    pub name: Option<String>,
    /// Base model. Ignored by the naive method, which always uses a forest.
    pub model: ModelKind,
    pub train: TrainConfig,
    pub uq: UqMethod,
    pub alpha: f64,
    pub test_fraction: f64,
    pub calib_fraction_of_remainder: f64,
    pub n_runs: usize,
    pub base_seed: u64,
    pub feature_mode: FeatureMode,
    pub quantile_rule: QuantileRule,
    pub split_mode: SplitMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: None,
            model: ModelKind::Logistic,
            train: TrainConfig::default(),
            uq: UqMethod::None,
            alpha: 0.1,
            test_fraction: 0.10,
            calib_fraction_of_remainder: 0.40,
            n_runs: 20,
            base_seed: 0,
            feature_mode: FeatureMode::Top5,
            quantile_rule: QuantileRule::SplitConformal,
            split_mode: SplitMode::Stratified,
        }
    }
}

impl ExperimentConfig {
    pub fn with(model: ModelKind, uq: UqMethod) -> Self {
        ExperimentConfig {
            model,
            uq,
            ..Default::default()
        }
    }

    pub fn label(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        match (self.uq, self.model) {
            (UqMethod::None, ModelKind::RandomGuess) => "random_guess".into(),
            (UqMethod::None, ModelKind::Logistic) => "base".into(),
            (UqMethod::None, m) => format!("base_{m}"),
            (UqMethod::Naive, _) => "naive".into(),
            (UqMethod::Cci, ModelKind::Logistic) => "cci".into(),
            (UqMethod::Cci, m) => format!("cci_{m}"),
        }
    }

    pub fn run_seed(&self, run_index: usize) -> u64 {
        self.base_seed.wrapping_add(run_index as u64)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        for (name, v) in [
            ("alpha", self.alpha),
            ("test_fraction", self.test_fraction),
            ("calib_fraction_of_remainder", self.calib_fraction_of_remainder),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{name} = {v} is outside (0, 1)"));
            }
        }
        if self.n_runs == 0 {
            return bad("n_runs must be at least 1".into());
        }
        self.train.validate()?;
        Ok(())
    }

    /// Same splits for the same data: everything the partition depends on.
    fn same_protocol(&self, other: &ExperimentConfig) -> bool {
        self.base_seed == other.base_seed
            && self.n_runs == other.n_runs
            && self.test_fraction == other.test_fraction
            && self.calib_fraction_of_remainder == other.calib_fraction_of_remainder
            && self.split_mode == other.split_mode
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("dataset has {0} rows; at least 10 are needed")]
    TooSmall(usize),
    #[error("the {0} split is empty")]
    EmptySplit(&'static str),
    #[error("run {run} (seed {seed}) failed: {source}")]
    RunFailed {
        run: usize,
        seed: u64,
        #[source]
        source: Box<HarnessError>,
    },
    #[error("methods cannot be compared: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Conformal(#[from] ConformalError),
    #[error(transparent)]
    Decision(#[from] DecisionError),
    #[error(transparent)]
    Select(#[from] SelectError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Row indices of the three disjoint splits, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub calibration: Vec<usize>,
    pub test: Vec<usize>,
}

/// `(test, calibration, train)` sizes: test is `round(test_fraction N)`,
/// calibration `round(calib_fraction (N - test))`, rounding half up.
pub fn split_sizes(n: usize, test_fraction: f64, calib_fraction: f64) -> (usize, usize, usize) {
    let n_test = round_half_up(test_fraction * n as f64).min(n);
    let n_cal = round_half_up(calib_fraction * (n - n_test) as f64).min(n - n_test);
    (n_test, n_cal, n - n_test - n_cal)
}

pub fn split(data: &Dataset, cfg: &ExperimentConfig, run_seed: u64) -> Result<Split, HarnessError> {
    let n = data.len();
    if n < 10 {
        return Err(HarnessError::TooSmall(n));
    }
    let (n_test, n_cal, _) = split_sizes(n, cfg.test_fraction, cfg.calib_fraction_of_remainder);
    let mut r = rng::stream(run_seed, 0);
    let mut s = match cfg.split_mode {
        SplitMode::Stratified => {
            let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
            for (i, &y) in data.labels.iter().enumerate() {
                by_class[(y == 1) as usize].push(i);
            }
            for c in &mut by_class {
                c.shuffle(&mut r);
            }
            let counts = [by_class[0].len(), by_class[1].len()];
            let test_alloc = largest_remainder(n_test, &counts);
            let rest = [counts[0] - test_alloc[0], counts[1] - test_alloc[1]];
            let cal_alloc = largest_remainder(n_cal, &rest);
            let mut s = Split {
                train: Vec::new(),
                calibration: Vec::new(),
                test: Vec::new(),
            };
            for (c, idx) in by_class.iter().enumerate() {
                let (t, k) = (test_alloc[c], cal_alloc[c]);
                s.test.extend(&idx[..t]);
                s.calibration.extend(&idx[t..t + k]);
                s.train.extend(&idx[t + k..]);
            }
            s
        }
        SplitMode::ByParticipant => {
            let mut people: Vec<&str> = data.participant_ids.iter().map(String::as_str).collect();
            people.sort_unstable();
            people.dedup();
            people.shuffle(&mut r);
            let rows_of = |p: &str| -> Vec<usize> { (0..n).filter(|&i| data.participant_ids[i] == p).collect() };
            let mut s = Split {
                train: Vec::new(),
                calibration: Vec::new(),
                test: Vec::new(),
            };
            for p in people {
                let rows = rows_of(p);
                if s.test.len() < n_test {
                    s.test.extend(rows);
                } else if s.calibration.len() < n_cal {
                    s.calibration.extend(rows);
                } else {
                    s.train.extend(rows);
                }
            }
            s
        }
    };
    for (name, part) in [("test", &s.test), ("calibration", &s.calibration), ("train", &s.train)] {
        if part.is_empty() {
            return Err(HarnessError::EmptySplit(name));
        }
    }
    s.train.sort_unstable();
    s.calibration.sort_unstable();
    s.test.sort_unstable();
    Ok(s)
}

/// One row of a predictions file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub participant_id: String,
    pub date: chrono::NaiveDate,
    pub p_hat: f64,
    pub lo: f64,
    pub hi: f64,
    pub outcome: Outcome,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub run_index: usize,
    pub seed: u64,
    pub n_train: usize,
    pub n_cal: usize,
    pub n_test: usize,
    /// Conformal quantile (CCI runs only); `null` when unbounded.
    pub q_hat: Option<f64>,
    pub features: Vec<String>,
    pub report: EvalReport,
    pub predictions: Vec<PredictionRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub method: String,
    pub config: ExperimentConfig,
    pub runs: Vec<RunResult>,
    pub aggregate: AggregateReport,
}

/// A run's partition, its feature view and the model settings, fixed before
/// any fitting happens.
#[derive(Debug, Clone)]
pub struct PreparedRun {
    pub run_index: usize,
    pub seed: u64,
    pub split: Split,
    /// The input dataset restricted to the selected features.
    pub data: Dataset,
    pub model_kind: ModelKind,
    pub train_config: TrainConfig,
}

impl PreparedRun {
    pub fn train(&self) -> Dataset {
        self.data.subset(&self.split.train)
    }

    pub fn calibration(&self) -> Dataset {
        self.data.subset(&self.split.calibration)
    }

    pub fn test(&self) -> Dataset {
        self.data.subset(&self.split.test)
    }

    pub fn fit(&self) -> Result<ProbModel, HarnessError> {
        let train = self.train();
        Ok(ProbModel::fit(
            self.model_kind,
            &train.rows,
            &train.labels,
            &train.feature_names,
            &self.train_config,
        )?)
    }
}

/// Splits the data for run `run_index` and picks its features. Feature
/// choice only ever looks at the training rows.
pub fn prepare_run(data: &Dataset, cfg: &ExperimentConfig, run_index: usize) -> Result<PreparedRun, HarnessError> {
    let seed = cfg.run_seed(run_index);
    let parts = split(data, cfg, seed)?;
    let mut train_config = cfg.train.clone();
    train_config.seed = rng::derive_seed(seed, 1);
    let model_kind = if cfg.uq == UqMethod::Naive { ModelKind::Forest } else { cfg.model };
    let data = match &cfg.feature_mode {
        FeatureMode::PermutationTopk { .. } => {
            let train = data.subset(&parts.train);
            let probe = ProbModel::fit(model_kind, &train.rows, &train.labels, &train.feature_names, &train_config)?;
            select_features(data, &cfg.feature_mode, Some((&probe, &train)), rng::derive_seed(seed, 2))?
        }
        mode => select_features(data, mode, None, 0)?,
    };
    Ok(PreparedRun {
        run_index,
        seed,
        split: parts,
        data,
        model_kind,
        train_config,
    })
}

/// Intervals for `rows` under `uq`. CCI needs a calibration result; naive
/// needs a forest.
pub fn intervals_for(
    model: &ProbModel,
    uq: UqMethod,
    calibration: Option<&CalibrationResult>,
    rows: &[Vec<f64>],
) -> Result<(Vec<f64>, Vec<ProbInterval>), HarnessError> {
    let p_hat = model.predict_many(rows)?;
    let intervals = match uq {
        UqMethod::None => p_hat.iter().map(|&p| ProbInterval::point(p)).collect(),
        UqMethod::Naive => rows
            .iter()
            .map(|x| Ok(naive_interval(&model.tree_probas(x)?)?))
            .collect::<Result<_, HarnessError>>()?,
        UqMethod::Cci => {
            let c = calibration.ok_or_else(|| HarnessError::Config("cci intervals need a calibration result".into()))?;
            p_hat.iter().map(|&p| cci_interval(p, c)).collect::<Result<_, _>>()?
        }
    };
    Ok((p_hat, intervals))
}

/// Decides every interval and pairs it with its row identity and label.
pub fn prediction_rows(data: &Dataset, p_hat: &[f64], intervals: &[ProbInterval], alpha: f64) -> Vec<PredictionRow> {
    (0..data.len())
        .map(|i| PredictionRow {
            participant_id: data.participant_ids[i].clone(),
            date: data.dates[i],
            p_hat: p_hat[i],
            lo: intervals[i].lo,
            hi: intervals[i].hi,
            outcome: decide(intervals[i], alpha).outcome,
            label: data.labels[i],
        })
        .collect()
}

fn run_once(data: &Dataset, cfg: &ExperimentConfig, run_index: usize) -> Result<RunResult, HarnessError> {
    let prep = prepare_run(data, cfg, run_index)?;
    let test = prep.test();
    let model = prep.fit()?;

    let calibration = if cfg.uq == UqMethod::Cci {
        let cal = prep.calibration();
        let cal_p = model.predict_many(&cal.rows)?;
        Some(calibrate(&cal_p, &cal.labels, cfg.alpha, cfg.quantile_rule)?)
    } else {
        None
    };
    let (p_hat, intervals) = intervals_for(&model, cfg.uq, calibration.as_ref(), &test.rows)?;
    let decisions: Vec<_> = intervals.iter().map(|iv| decide(*iv, cfg.alpha)).collect();
    let mut report = evaluate(&decisions, &test.labels)?;
    if let Some(c) = &calibration {
        report.coverage = Some(empirical_coverage(&p_hat, &test.labels, c)?);
        report.center_coverage = Some(center_coverage(&p_hat, &test.labels, c)?);
    }
    Ok(RunResult {
        run_index,
        seed: prep.seed,
        n_train: prep.split.train.len(),
        n_cal: prep.split.calibration.len(),
        n_test: test.len(),
        q_hat: calibration.map(|c| c.q_hat).filter(|q| q.is_finite()),
        features: prep.data.feature_names.clone(),
        report,
        predictions: prediction_rows(&test, &p_hat, &intervals, cfg.alpha),
    })
}

/// Runs `n_runs` independent repetitions in parallel; results stay in run order.
pub fn run_experiment(data: &Dataset, cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    cfg.validate()?;
    let runs: Vec<RunResult> = (0..cfg.n_runs)
        .into_par_iter()
        .map(|i| {
            run_once(data, cfg, i).map_err(|e| HarnessError::RunFailed {
                run: i,
                seed: cfg.run_seed(i),
                source: Box::new(e),
            })
        })
        .collect::<Result<_, _>>()?;
    let reports: Vec<EvalReport> = runs.iter().map(|r| r.report.clone()).collect();
    Ok(ExperimentReport {
        method: cfg.label(),
        config: cfg.clone(),
        aggregate: aggregate(&reports)?,
        runs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub methods: Vec<ExperimentReport>,
}

/// Runs each method on its dataset. All datasets must be identical and all
/// configs must share the split protocol, so every method sees the same
/// partitions run by run.
pub fn compare_methods(entries: &[(&Dataset, ExperimentConfig)]) -> Result<Comparison, HarnessError> {
    let Some((first_data, first_cfg)) = entries.first() else {
        return Err(HarnessError::Mismatch("no methods given".into()));
    };
    for (data, cfg) in &entries[1..] {
        if *data != *first_data {
            return Err(HarnessError::Mismatch(format!(
                "{} uses a different dataset than {}",
                cfg.label(),
                first_cfg.label()
            )));
        }
        if !cfg.same_protocol(first_cfg) {
            return Err(HarnessError::Mismatch(format!(
                "{} uses a different split protocol than {}",
                cfg.label(),
                first_cfg.label()
            )));
        }
    }
    let methods = entries
        .iter()
        .map(|(data, cfg)| run_experiment(data, cfg))
        .collect::<Result<_, _>>()?;
    Ok(Comparison { methods })
}

/// Number of paired runs where `pred(a_run, b_run)` holds.
pub fn paired_count(a: &ExperimentReport, b: &ExperimentReport, pred: impl Fn(&EvalReport, &EvalReport) -> bool) -> usize {
    a.runs
        .iter()
        .zip(&b.runs)
        .filter(|(x, y)| pred(&x.report, &y.report))
        .count()
}

impl Comparison {
    pub fn get(&self, method: &str) -> Option<&ExperimentReport> {
        self.methods.iter().find(|m| m.method == method)
    }

    /// Aggregate table: mean ± std over runs per method.
    pub fn table(&self) -> String {
        let width = self.methods.iter().map(|m| m.method.len()).max().unwrap_or(6).max(6);
        let mut out = String::new();
        let cols = [
            "Accuracy",
            "Precision",
            "Recall",
            "F1",
            "Abstention",
            "Width",
            "Coverage",
        ];
        let _ = write!(out, "{:<width$}", "Method");
        for c in cols {
            let _ = write!(out, "  {c:<12}");
        }
        out = out.trim_end().to_string();
        out.push('\n');
        for m in &self.methods {
            let a = &m.aggregate;
            let interval = m.config.uq != UqMethod::None;
            let dash = "-".to_string();
            let cells = [
                a.accuracy.to_string(),
                a.precision.to_string(),
                a.recall.to_string(),
                a.f1.to_string(),
                if interval { a.abstention_proportion.to_string() } else { dash.clone() },
                if interval { a.width_all.to_string() } else { dash.clone() },
                a.coverage.map(|c| c.to_string()).unwrap_or(dash),
            ];
            let mut line = format!("{:<width$}", m.method);
            for c in cells {
                let _ = write!(line, "  {c:<12}");
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        let runs = self.methods.first().map(|m| m.aggregate.runs).unwrap_or(0);
        let _ = writeln!(out, "\nmean ± std over {runs} runs; width is averaged over all test points");
        out
    }

    /// Per-run rows of every method as CSV.
    pub fn runs_csv(&self) -> Result<String, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "method",
            "run",
            "seed",
            "n_train",
            "n_cal",
            "n_test",
            "q_hat",
            "accuracy",
            "precision",
            "recall",
            "f1",
            "undefined",
            "abstention_proportion",
            "width_all",
            "width_decided",
            "coverage",
            "center_coverage",
        ])?;
        let f = |v: f64| format!("{v:.6}");
        let opt = |v: Option<f64>| v.map(f).unwrap_or_default();
        for m in &self.methods {
            for r in &m.runs {
                let e = &r.report;
                w.write_record([
                    m.method.clone(),
                    r.run_index.to_string(),
                    r.seed.to_string(),
                    r.n_train.to_string(),
                    r.n_cal.to_string(),
                    r.n_test.to_string(),
                    opt(r.q_hat),
                    f(e.accuracy),
                    f(e.precision),
                    f(e.recall),
                    f(e.f1),
                    (e.undefined as u8).to_string(),
                    f(e.abstention_proportion),
                    f(e.width_all),
                    f(e.width_decided),
                    opt(e.coverage),
                    opt(e.center_coverage),
                ])?;
            }
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Io {
            path: "<report.csv>".into(),
            source: e.into_error(),
        })?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

pub fn predictions_csv(rows: &[PredictionRow]) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["participant_id", "date", "p_hat", "lo", "hi", "outcome", "label"])?;
    for r in rows {
        w.write_record([
            r.participant_id.clone(),
            r.date.to_string(),
            format!("{:.6}", r.p_hat),
            format!("{:.6}", r.lo),
            format!("{:.6}", r.hi),
            r.outcome.to_string(),
            r.label.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Io {
        path: "<predictions.csv>".into(),
        source: e.into_error(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), HarnessError> {
    std::fs::write(path, contents).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes `report.json`, `report.csv`, `table1.txt` and
/// `predictions/<method>/run_NN.csv` under `dir`.
pub fn write_reports(dir: &Path, cmp: &Comparison) -> Result<(), HarnessError> {
    let mkdir = |p: &Path| {
        std::fs::create_dir_all(p).map_err(|source| HarnessError::Io {
            path: p.display().to_string(),
            source,
        })
    };
    mkdir(dir)?;
    let mut json = serde_json::to_string_pretty(cmp)?;
    json.push('\n');
    write_file(&dir.join("report.json"), json.as_bytes())?;
    write_file(&dir.join("report.csv"), cmp.runs_csv()?.as_bytes())?;
    write_file(&dir.join("table1.txt"), cmp.table().as_bytes())?;
    for m in &cmp.methods {
        let pdir = dir.join("predictions").join(&m.method);
        mkdir(&pdir)?;
        for r in &m.runs {
            let path = pdir.join(format!("run_{:02}.csv", r.run_index));
            write_file(&path, predictions_csv(&r.predictions)?.as_bytes())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn toy(n: usize, positives: usize) -> Dataset {
        let d0 = NaiveDate::from_ymd_opt(2024, 1, 1).unwrap();
        Dataset {
            feature_names: vec!["a".into()],
            rows: (0..n).map(|i| vec![i as f64]).collect(),
            labels: (0..n).map(|i| (i < positives) as u8).collect(),
            participant_ids: (0..n).map(|i| format!("P{}", i % 4)).collect(),
            dates: (0..n).map(|i| d0 + chrono::Duration::days(i as i64)).collect(),
        }
    }

    #[test]
    fn sizes_follow_half_up_rounding() {
        assert_eq!(split_sizes(117, 0.1, 0.4), (12, 42, 63));
        assert_eq!(split_sizes(10, 0.1, 0.4), (1, 4, 5));
        assert_eq!(split_sizes(115, 0.1, 0.4), (12, 41, 62));
    }

    #[test]
    fn split_is_a_stratified_partition() {
        let data = toy(117, 56);
        let cfg = ExperimentConfig::default();
        let s = split(&data, &cfg, 9).unwrap();
        assert_eq!((s.test.len(), s.calibration.len(), s.train.len()), (12, 42, 63));
        let mut all: Vec<usize> = s.test.iter().chain(&s.calibration).chain(&s.train).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..117).collect::<Vec<_>>());
        let pos = |idx: &[usize]| idx.iter().filter(|&&i| data.labels[i] == 1).count();
        // 12 * 56 / 117 = 5.74 -> 6 positives in test
        assert_eq!(pos(&s.test), 6);
        assert_eq!(s, split(&data, &cfg, 9).unwrap());
        assert_ne!(s, split(&data, &cfg, 10).unwrap());
    }

    #[test]
    fn participant_split_keeps_people_together() {
        let data = toy(40, 20);
        let cfg = ExperimentConfig {
            split_mode: SplitMode::ByParticipant,
            ..Default::default()
        };
        let s = split(&data, &cfg, 1).unwrap();
        let owners = |idx: &[usize]| {
            let mut v: Vec<&str> = idx.iter().map(|&i| data.participant_ids[i].as_str()).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        for a in owners(&s.test) {
            assert!(!owners(&s.train).contains(&a));
            assert!(!owners(&s.calibration).contains(&a));
        }
    }

    #[test]
    fn small_or_degenerate_data_is_rejected() {
        assert!(matches!(
            split(&toy(9, 4), &ExperimentConfig::default(), 0),
            Err(HarnessError::TooSmall(9))
        ));
    }

    #[test]
    fn labels_and_validation() {
        assert_eq!(ExperimentConfig::with(ModelKind::RandomGuess, UqMethod::None).label(), "random_guess");
        assert_eq!(ExperimentConfig::with(ModelKind::Logistic, UqMethod::Cci).label(), "cci");
        assert_eq!(ExperimentConfig::with(ModelKind::Mlp, UqMethod::Cci).label(), "cci_mlp");
        let c = ExperimentConfig {
            alpha: 1.0,
            ..ExperimentConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
