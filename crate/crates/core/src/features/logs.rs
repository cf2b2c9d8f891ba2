//! Directory-level driver: every `<participant>.csv` log in a folder becomes
//! that participant's daily feature rows.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use thiserror::Error;

use crate::event_model::{parse_event_log, window_by_day, EventLogError, LogFormat, SkippedRow};
use crate::features::vector::{extract_participant_features, FeatureVector};

#[derive(Debug, Error)]
pub enum LogDirError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no .csv event logs in {0}")]
    NoLogs(String),
    #[error("no valid events in {0}")]
    NoValidEvents(String),
    #[error(transparent)]
    Log(#[from] EventLogError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("labels line {line}: {msg}")]
    LabelRow { line: u64, msg: String },
    #[error("labels file must have columns participant_id,date,label[,health_event]")]
    LabelHeader,
}

/// Per-day labels and health-event flags keyed by participant.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DayAnnotations {
    pub labels: BTreeMap<String, BTreeMap<NaiveDate, u8>>,
    pub health_events: BTreeMap<String, BTreeSet<NaiveDate>>,
}

impl DayAnnotations {
    /// Reads `participant_id,date,label[,health_event]`; `#` lines are comments.
    pub fn read<R: Read>(reader: R) -> Result<Self, LogDirError> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let with_health = match header.iter().map(String::as_str).collect::<Vec<_>>()[..] {
            ["participant_id", "date", "label"] => false,
            ["participant_id", "date", "label", "health_event"] => true,
            _ => return Err(LogDirError::LabelHeader),
        };
        let mut out = DayAnnotations::default();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let err = |msg: String| LogDirError::LabelRow { line, msg };
            let pid = rec[0].trim().to_string();
            let date: NaiveDate = rec[1].trim().parse().map_err(|_| err(format!("bad date `{}`", &rec[1])))?;
            let flag = |i: usize, name: &str| match rec[i].trim() {
                "0" => Ok(0u8),
                "1" => Ok(1u8),
                other => Err(err(format!("{name} must be 0 or 1, found `{other}`"))),
            };
            out.labels.entry(pid.clone()).or_default().insert(date, flag(2, "label")?);
            let health = out.health_events.entry(pid).or_default();
            if with_health && flag(3, "health_event")? == 1 {
                health.insert(date);
            }
        }
        Ok(out)
    }
}

/// Feature rows for every log in a directory plus the rows that were skipped.
#[derive(Debug, Clone, Default)]
pub struct LogDirFeatures {
    pub rows: Vec<FeatureVector>,
    pub skipped: Vec<(PathBuf, SkippedRow)>,
}

/// Sorted `.csv` files directly inside `dir`.
pub fn log_files(dir: &Path) -> Result<Vec<PathBuf>, LogDirError> {
    let io = |source| LogDirError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "csv") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Parses every log in `dir` (participant id = file stem) and extracts the
/// 17 features per day. Participants come out in file-name order.
pub fn extract_log_dir(dir: &Path, annotations: &DayAnnotations) -> Result<LogDirFeatures, LogDirError> {
    let files = log_files(dir)?;
    if files.is_empty() {
        return Err(LogDirError::NoLogs(dir.display().to_string()));
    }
    let empty_labels = BTreeMap::new();
    let empty_health = BTreeSet::new();
    let mut out = LogDirFeatures::default();
    for path in files {
        let pid = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let parsed = parse_event_log(&path, LogFormat::Csv)?;
        out.skipped.extend(parsed.skipped.into_iter().map(|s| (path.clone(), s)));
        let windows = window_by_day(&parsed.events, &pid);
        let labels = annotations.labels.get(&pid).unwrap_or(&empty_labels);
        let health = annotations.health_events.get(&pid).unwrap_or(&empty_health);
        out.rows.extend(extract_participant_features(&windows, health, labels));
    }
    if out.rows.is_empty() {
        return Err(LogDirError::NoValidEvents(dir.display().to_string()));
    }
    Ok(out)
}
