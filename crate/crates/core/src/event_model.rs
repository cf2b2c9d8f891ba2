//! Ambient sensor event logs: parsing, validation and per-day windowing.
//!
//! A log is a headed CSV with one event per line:
//!
//! ```text
//! timestamp,sensor_id,sensor_type,location,value
//! 2024-03-01T02:15:00,M003,motion,bathroom,ON
//! 2024-03-01T02:16:00,T001,temperature,kitchen,21.5
//! ```
//!
//! Timestamps are home-local wall-clock time; no timezone arithmetic is done.
//! Malformed rows are skipped and counted, never silently dropped.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The required header line of a sensor log.
pub const LOG_HEADER: [&str; 5] = ["timestamp", "sensor_id", "sensor_type", "location", "value"];

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S%.f";

#[derive(Debug, Error)]
pub enum EventLogError {
    #[error("cannot read event log {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("event log {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("event log {path}: expected header `{expected}`, found `{found}`")]
    BadHeader {
        path: String,
        expected: String,
        found: String,
    },
}

/// Why a single row was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RowError {
    #[error("expected 5 fields, found {0}")]
    FieldCount(usize),
    #[error("bad timestamp `{0}`")]
    Timestamp(String),
    #[error("empty sensor id")]
    EmptySensorId,
    #[error("unknown sensor type `{0}`")]
    SensorType(String),
    #[error("unknown location `{0}`")]
    Location(String),
    #[error("value `{value}` is not valid for a {sensor_type} sensor")]
    Value { sensor_type: SensorType, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorType {
    Motion,
    Door,
    Light,
    Temperature,
    Bed,
    Other,
}

impl SensorType {
    /// Binary sensors report ON/OFF; everything else reports a numeric reading.
    pub fn is_binary(self) -> bool {
        matches!(self, SensorType::Motion | SensorType::Door | SensorType::Bed)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SensorType::Motion => "motion",
            SensorType::Door => "door",
            SensorType::Light => "light",
            SensorType::Temperature => "temperature",
            SensorType::Bed => "bed",
            SensorType::Other => "other",
        }
    }
}

impl fmt::Display for SensorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SensorType {
    type Err = RowError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "motion" => SensorType::Motion,
            "door" => SensorType::Door,
            "light" => SensorType::Light,
            "temperature" => SensorType::Temperature,
            "bed" => SensorType::Bed,
            "other" => SensorType::Other,
            _ => return Err(RowError::SensorType(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Bathroom,
    Bedroom,
    Kitchen,
    LivingRoom,
    DiningRoom,
    Entry,
    Other,
}

impl Location {
    pub fn as_str(self) -> &'static str {
        match self {
            Location::Bathroom => "bathroom",
            Location::Bedroom => "bedroom",
            Location::Kitchen => "kitchen",
            Location::LivingRoom => "living_room",
            Location::DiningRoom => "dining_room",
            Location::Entry => "entry",
            Location::Other => "other",
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Location {
    type Err = RowError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "bathroom" => Location::Bathroom,
            "bedroom" => Location::Bedroom,
            "kitchen" => Location::Kitchen,
            "living_room" => Location::LivingRoom,
            "dining_room" => Location::DiningRoom,
            "entry" => Location::Entry,
            "other" => Location::Other,
            _ => return Err(RowError::Location(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SensorValue {
    On,
    Off,
    Reading(f64),
}

impl fmt::Display for SensorValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SensorValue::On => f.write_str("ON"),
            SensorValue::Off => f.write_str("OFF"),
            SensorValue::Reading(v) => write!(f, "{v}"),
        }
    }
}

/// One timestamped reading from an ambient sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorEvent {
    pub timestamp: NaiveDateTime,
    pub sensor_id: String,
    pub sensor_type: SensorType,
    pub location: Location,
    pub value: SensorValue,
}

impl SensorEvent {
    pub fn is_on(&self) -> bool {
        self.value == SensorValue::On
    }

    pub fn is_off(&self) -> bool {
        self.value == SensorValue::Off
    }

    /// Parses one CSV record (already split into fields).
    pub fn from_fields(fields: &[&str]) -> Result<Self, RowError> {
        if fields.len() != LOG_HEADER.len() {
            return Err(RowError::FieldCount(fields.len()));
        }
        let raw_ts = fields[0].trim();
        let timestamp = NaiveDateTime::parse_from_str(raw_ts, TIMESTAMP_FORMAT)
            .map_err(|_| RowError::Timestamp(raw_ts.to_string()))?;
        let sensor_id = fields[1].trim();
        if sensor_id.is_empty() {
            return Err(RowError::EmptySensorId);
        }
        let sensor_type: SensorType = fields[2].trim().parse()?;
        let location: Location = fields[3].trim().parse()?;
        let raw_value = fields[4].trim();
        let value = parse_value(sensor_type, raw_value)?;
        Ok(SensorEvent {
            timestamp,
            sensor_id: sensor_id.to_string(),
            sensor_type,
            location,
            value,
        })
    }

    /// Serializes to the log's CSV field order.
    pub fn to_record(&self) -> [String; 5] {
        [
            format_timestamp(&self.timestamp),
            self.sensor_id.clone(),
            self.sensor_type.to_string(),
            self.location.to_string(),
            self.value.to_string(),
        ]
    }
}

fn parse_value(sensor_type: SensorType, raw: &str) -> Result<SensorValue, RowError> {
    let bad = || RowError::Value {
        sensor_type,
        value: raw.to_string(),
    };
    if sensor_type.is_binary() {
        match raw {
            "ON" => Ok(SensorValue::On),
            "OFF" => Ok(SensorValue::Off),
            _ => Err(bad()),
        }
    } else {
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(SensorValue::Reading(v)),
            _ => Err(bad()),
        }
    }
}

/// Formats a timestamp the way logs are written: whole seconds, fraction only if present.
pub fn format_timestamp(ts: &NaiveDateTime) -> String {
    ts.format(TIMESTAMP_FORMAT).to_string()
}

/// A rejected input row, with its 1-based line number.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedRow {
    pub line: u64,
    pub error: RowError,
}

/// Result of parsing a log: valid events in file order plus the rejects.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedLog {
    pub events: Vec<SensorEvent>,
    pub skipped: Vec<SkippedRow>,
}

impl ParsedLog {
    pub fn skipped_count(&self) -> usize {
        self.skipped.len()
    }
}

/// Supported on-disk log formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogFormat {
    #[default]
    Csv,
}

pub fn parse_event_log(path: &Path, format: LogFormat) -> Result<ParsedLog, EventLogError> {
    let file = std::fs::File::open(path).map_err(|source| EventLogError::Io {
        path: path.display().to_string(),
        source,
    })?;
    match format {
        LogFormat::Csv => parse_event_csv(file, &path.display().to_string()),
    }
}

/// Parses a headed sensor CSV from any reader. `origin` only labels errors.
pub fn parse_event_csv<R: Read>(reader: R, origin: &str) -> Result<ParsedLog, EventLogError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut out = ParsedLog::default();
    let mut records = rdr.records();

    let header = match records.next() {
        None => return Ok(out),
        Some(rec) => rec.map_err(|source| EventLogError::Csv {
            path: origin.to_string(),
            source,
        })?,
    };
    let found: Vec<&str> = header.iter().map(str::trim).collect();
    if found != LOG_HEADER {
        return Err(EventLogError::BadHeader {
            path: origin.to_string(),
            expected: LOG_HEADER.join(","),
            found: found.join(","),
        });
    }

    for rec in records {
        let rec = match rec {
            Ok(rec) => rec,
            Err(err) => {
                // Invalid UTF-8 and similar row-level damage is a skip, not a failure.
                let line = err.position().map(|p| p.line()).unwrap_or(0);
                if matches!(err.kind(), csv::ErrorKind::Io(_)) {
                    return Err(EventLogError::Csv {
                        path: origin.to_string(),
                        source: err,
                    });
                }
                out.skipped.push(SkippedRow {
                    line,
                    error: RowError::FieldCount(0),
                });
                continue;
            }
        };
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = rec.iter().collect();
        match SensorEvent::from_fields(&fields) {
            Ok(ev) => out.events.push(ev),
            Err(error) => out.skipped.push(SkippedRow { line, error }),
        }
    }
    Ok(out)
}

/// Writes events as a headed sensor CSV.
pub fn write_event_csv<W: std::io::Write>(writer: W, events: &[SensorEvent]) -> csv::Result<()> {
    let mut wtr = csv::WriterBuilder::new().from_writer(writer);
    wtr.write_record(LOG_HEADER)?;
    for ev in events {
        wtr.write_record(ev.to_record())?;
    }
    wtr.flush()?;
    Ok(())
}

/// All events of one participant that fall on one calendar date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayWindow {
    pub participant_id: String,
    pub date: NaiveDate,
    pub events: Vec<SensorEvent>,
}

impl DayWindow {
    pub fn new(participant_id: impl Into<String>, date: NaiveDate, events: Vec<SensorEvent>) -> Self {
        let mut events = events;
        events.sort_by_key(|e| e.timestamp);
        DayWindow {
            participant_id: participant_id.into(),
            date,
            events,
        }
    }
}

/// Groups events by calendar date. Events are stably sorted, so equal
/// timestamps keep their input order; days without events are omitted.
pub fn window_by_day(events: &[SensorEvent], participant_id: &str) -> Vec<DayWindow> {
    let mut by_date: BTreeMap<NaiveDate, Vec<SensorEvent>> = BTreeMap::new();
    for ev in events {
        by_date.entry(ev.timestamp.date()).or_default().push(ev.clone());
    }
    by_date
        .into_iter()
        .map(|(date, mut evs)| {
            evs.sort_by_key(|e| e.timestamp);
            DayWindow {
                participant_id: participant_id.to_string(),
                date,
                events: evs,
            }
        })
        .collect()
}
