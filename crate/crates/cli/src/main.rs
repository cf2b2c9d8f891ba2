//! `cci`: synthetic data, features, training, calibration, prediction,
//! repeated-split experiments and interval plots from one binary.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on usage errors
//! (bad flags, missing or invalid config).

mod config;

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use cci_core::conformal::{calibrate, CalibrationResult};
use cci_core::features::{extract_log_dir, read_feature_csv, write_feature_csv, DayAnnotations};
use cci_core::harness::{
    compare_methods, intervals_for, predictions_csv, prepare_run, prediction_rows, write_reports, UqMethod,
};
use cci_core::plot::{read_predictions, write_plots};
use cci_core::synth::{generate, write_event_logs, write_labels_csv, write_synth_feature_csv};
use cci_core::{Dataset, ProbModel, QuantileRule};
use clap::{Args, Parser, Subcommand};

use config::CliConfig;

#[derive(Debug, Parser)]
#[command(name = "cci", version, about = "Conformal-calibrated UTI detection pipeline")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// JSON config; relative paths inside it resolve against its folder.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides both the synthetic-data seed and the experiment base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Conformal error rate.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Number of repeated splits.
    #[arg(long, global = true)]
    runs: Option<usize>,
    /// `paper_eq4` or `split_conformal`.
    #[arg(long = "quantile-rule", global = true)]
    quantile_rule: Option<QuantileRule>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write synthetic event logs, labels and the matching feature table.
    Generate,
    /// Extract the 17 daily features from a folder of event logs.
    Features {
        /// Folder of `<participant>.csv` logs [default: <out>/logs].
        #[arg(long)]
        logs: Option<PathBuf>,
        /// `participant_id,date,label[,health_event]` file [default: <out>/labels.csv if present].
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Feature CSV to write [default: <out>/features.csv].
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fit the configured model on one split's training rows.
    Train {
        #[command(flatten)]
        data: DataArgs,
        /// Model file to write [default: <out>/model.json].
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Compute the conformal quantile on one split's calibration rows.
    Calibrate {
        #[command(flatten)]
        data: DataArgs,
        /// Model file from `train` [default: <out>/model.json].
        #[arg(long)]
        model: Option<PathBuf>,
        /// Calibration file to write [default: <out>/calibration.json].
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Intervals and decisions for one split's test rows.
    Predict {
        #[command(flatten)]
        data: DataArgs,
        /// Model file from `train` [default: <out>/model.json].
        #[arg(long)]
        model: Option<PathBuf>,
        /// Calibration file from `calibrate` [default: <out>/calibration.json].
        #[arg(long)]
        calibration: Option<PathBuf>,
        /// Predictions CSV to write [default: <out>/predictions.csv].
        #[arg(long)]
        output: Option<PathBuf>,
        /// Predict every row instead of the test split.
        #[arg(long)]
        all: bool,
    },
    /// Run every configured method over the repeated-split protocol.
    Run {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Draw SVG interval plots from a predictions CSV.
    Plot {
        /// [default: <out>/predictions/cci/run_00.csv]
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// [default: <out>/plots]
        #[arg(long = "out-dir")]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Feature CSV [default: config `dataset`, then <out>/features.csv, then fresh synthetic data].
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Which repeated split to use (the run index).
    #[arg(long, default_value_t = 0)]
    split: usize,
}

/// A usage error (exit 2) as opposed to a runtime failure (exit 1).
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn load_config(g: &Global) -> anyhow::Result<CliConfig> {
    let mut cfg = match &g.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            let base = path.parent().unwrap_or(Path::new("."));
            CliConfig::from_json(&text, base).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?
        }
        None => CliConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg.synth.seed = seed;
        cfg.experiment.base_seed = seed;
    }
    if let Some(out) = &g.out {
        cfg.out_dir = out.clone();
    }
    if let Some(alpha) = g.alpha {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(usage(format!("--alpha {alpha} must be in (0, 1)")));
        }
        cfg.experiment.alpha = alpha;
    }
    if let Some(runs) = g.runs {
        if runs == 0 {
            return Err(usage("--runs must be at least 1"));
        }
        cfg.experiment.n_runs = runs;
    }
    if let Some(rule) = g.quantile_rule {
        cfg.experiment.quantile_rule = rule;
    }
    cfg.synth.validate().map_err(|e| usage(format!("invalid synth config: {e}")))?;
    for m in cfg.methods().map_err(usage)? {
        m.validate().map_err(|e| usage(e.to_string()))?;
    }
    Ok(cfg)
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> anyhow::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    serde_json::from_reader(BufReader::new(file)).with_context(|| format!("cannot parse {}", path.display()))
}

fn read_dataset(path: &Path) -> anyhow::Result<Dataset> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let rows = read_feature_csv(BufReader::new(file)).with_context(|| format!("cannot read {}", path.display()))?;
    Dataset::from_vectors(&rows).with_context(|| format!("{} is not a labeled feature table", path.display()))
}

/// Flag, then config, then `<out>/features.csv`, then in-memory synthetic data.
fn load_dataset(cfg: &CliConfig, flag: Option<&Path>) -> anyhow::Result<Dataset> {
    if let Some(p) = flag.or(cfg.dataset.as_deref()) {
        return read_dataset(p);
    }
    let default = cfg.out_dir.join("features.csv");
    if default.is_file() {
        return read_dataset(&default);
    }
    log::info!("no feature table found; generating synthetic data with seed {}", cfg.synth.seed);
    let rows: Vec<_> = generate(&cfg.synth)?.into_iter().flat_map(|p| p.targets).collect();
    Ok(Dataset::from_vectors(&rows)?)
}

fn cmd_generate(cfg: &CliConfig) -> anyhow::Result<()> {
    let data = generate(&cfg.synth)?;
    let out = &cfg.out_dir;
    create_dir(out)?;
    let rows: Vec<_> = data.iter().flat_map(|p| p.targets.iter().cloned()).collect();
    let mut buf = Vec::new();
    write_synth_feature_csv(&mut buf, &rows, cfg.synth.seed)?;
    write(&out.join("synthetic_features.csv"), buf)?;
    let logs = write_event_logs(&out.join("logs"), &data, cfg.synth.seed)?;
    write_labels_csv(&out.join("labels.csv"), &data, cfg.synth.seed)?;
    let positives = rows.iter().filter(|r| r.label == Some(1)).count();
    println!(
        "generated {} days ({positives} UTI) for {} participants in {}",
        rows.len(),
        logs.len(),
        out.display()
    );
    Ok(())
}

fn cmd_features(cfg: &CliConfig, logs: Option<PathBuf>, labels: Option<PathBuf>, output: Option<PathBuf>) -> anyhow::Result<()> {
    let logs = logs.unwrap_or_else(|| cfg.out_dir.join("logs"));
    let labels = labels.or_else(|| Some(cfg.out_dir.join("labels.csv")).filter(|p| p.is_file()));
    let annotations = match &labels {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("cannot open {}", p.display()))?;
            DayAnnotations::read(BufReader::new(f)).with_context(|| format!("cannot read {}", p.display()))?
        }
        None => DayAnnotations::default(),
    };
    let extracted = extract_log_dir(&logs, &annotations)?;
    for (path, row) in &extracted.skipped {
        log::warn!("{}:{}: skipped: {}", path.display(), row.line, row.error);
    }
    let output = output.unwrap_or_else(|| cfg.out_dir.join("features.csv"));
    let mut buf = Vec::new();
    write_feature_csv(&mut buf, &extracted.rows)?;
    write(&output, buf)?;
    println!(
        "wrote {} day rows to {} ({} rows skipped)",
        extracted.rows.len(),
        output.display(),
        extracted.skipped.len()
    );
    Ok(())
}

fn stage_config(cfg: &CliConfig) -> cci_core::ExperimentConfig {
    cfg.experiment_for(None, cfg.experiment.model, cfg.experiment.uq)
}

fn load_model(cfg: &CliConfig, path: Option<PathBuf>) -> anyhow::Result<ProbModel> {
    read_json(&path.unwrap_or_else(|| cfg.out_dir.join("model.json")))
}

fn cmd_train(cfg: &CliConfig, data: DataArgs, model: Option<PathBuf>) -> anyhow::Result<()> {
    let ds = load_dataset(cfg, data.dataset.as_deref())?;
    let prep = prepare_run(&ds, &stage_config(cfg), data.split)?;
    let fitted = prep.fit()?;
    let path = model.unwrap_or_else(|| cfg.out_dir.join("model.json"));
    let mut json = serde_json::to_string_pretty(&fitted)?;
    json.push('\n');
    write(&path, json)?;
    println!(
        "trained {} on {} rows of split {} ({} features) -> {}",
        fitted.kind,
        prep.split.train.len(),
        data.split,
        fitted.feature_names.len(),
        path.display()
    );
    Ok(())
}

fn check_features(model: &ProbModel, ds: &Dataset) -> anyhow::Result<()> {
    if model.feature_names != ds.feature_names {
        bail!(
            "model features {:?} differ from this split's features {:?}; train and calibrate with the same config",
            model.feature_names,
            ds.feature_names
        );
    }
    Ok(())
}

fn cmd_calibrate(cfg: &CliConfig, data: DataArgs, model: Option<PathBuf>, output: Option<PathBuf>) -> anyhow::Result<()> {
    let ds = load_dataset(cfg, data.dataset.as_deref())?;
    let model = load_model(cfg, model)?;
    let prep = prepare_run(&ds, &stage_config(cfg), data.split)?;
    let cal = prep.calibration();
    check_features(&model, &cal)?;
    let p = model.predict_many(&cal.rows)?;
    let c = calibrate(&p, &cal.labels, cfg.experiment.alpha, cfg.experiment.quantile_rule)?;
    let path = output.unwrap_or_else(|| cfg.out_dir.join("calibration.json"));
    let mut json = serde_json::to_string_pretty(&c)?;
    json.push('\n');
    write(&path, json)?;
    println!(
        "q_hat = {} from {} calibration rows (alpha {}, {}) -> {}",
        c.q_hat,
        c.n_cal,
        c.alpha,
        c.quantile_rule,
        path.display()
    );
    Ok(())
}

fn cmd_predict(
    cfg: &CliConfig,
    data: DataArgs,
    model: Option<PathBuf>,
    calibration: Option<PathBuf>,
    output: Option<PathBuf>,
    all: bool,
) -> anyhow::Result<()> {
    let ds = load_dataset(cfg, data.dataset.as_deref())?;
    let model = load_model(cfg, model)?;
    let prep = prepare_run(&ds, &stage_config(cfg), data.split)?;
    let rows = if all { prep.data.clone() } else { prep.test() };
    check_features(&model, &rows)?;
    let uq = cfg.experiment.uq;
    let cal: Option<CalibrationResult> = match uq {
        UqMethod::Cci => Some(read_json(&calibration.unwrap_or_else(|| cfg.out_dir.join("calibration.json")))?),
        _ => None,
    };
    // Decisions use the error rate the quantile was calibrated for.
    let alpha = cal.as_ref().map_or(cfg.experiment.alpha, |c| c.alpha);
    let (p_hat, intervals) = intervals_for(&model, uq, cal.as_ref(), &rows.rows)?;
    let preds = prediction_rows(&rows, &p_hat, &intervals, alpha);
    let path = output.unwrap_or_else(|| cfg.out_dir.join("predictions.csv"));
    write(&path, predictions_csv(&preds)?)?;
    println!("wrote {} predictions to {}", preds.len(), path.display());
    Ok(())
}

fn cmd_run(cfg: &CliConfig, data: DataArgs) -> anyhow::Result<()> {
    let ds = load_dataset(cfg, data.dataset.as_deref())?;
    let methods = cfg.methods().map_err(usage)?;
    let entries: Vec<_> = methods.into_iter().map(|m| (&ds, m)).collect();
    let cmp = compare_methods(&entries)?;
    write_reports(&cfg.out_dir, &cmp)?;
    print!("{}", cmp.table());
    println!("reports written to {}", cfg.out_dir.display());
    Ok(())
}

fn cmd_plot(cfg: &CliConfig, predictions: Option<PathBuf>, out_dir: Option<PathBuf>) -> anyhow::Result<()> {
    let input = predictions.unwrap_or_else(|| cfg.out_dir.join("predictions").join("cci").join("run_00.csv"));
    let file = File::open(&input).with_context(|| format!("cannot open {}", input.display()))?;
    let rows = read_predictions(BufReader::new(file)).with_context(|| format!("cannot plot {}", input.display()))?;
    let dir = out_dir.unwrap_or_else(|| cfg.out_dir.join("plots"));
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "plot".into());
    let written = write_plots(&rows, &dir, &stem)?;
    println!("wrote {} SVG files to {}", written.len(), dir.display());
    Ok(())
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    let cfg = load_config(&cli.global)?;
    match cli.command {
        Command::Generate => cmd_generate(&cfg),
        Command::Features { logs, labels, output } => cmd_features(&cfg, logs, labels, output),
        Command::Train { data, model } => cmd_train(&cfg, data, model),
        Command::Calibrate { data, model, output } => cmd_calibrate(&cfg, data, model, output),
        Command::Predict {
            data,
            model,
            calibration,
            output,
            all,
        } => cmd_predict(&cfg, data, model, calibration, output, all),
        Command::Run { data } => cmd_run(&cfg, data),
        Command::Plot { predictions, out_dir } => cmd_plot(&cfg, predictions, out_dir),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with 2 on bad flags by itself.
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.is::<Usage>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
