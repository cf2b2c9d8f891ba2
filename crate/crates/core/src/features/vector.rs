use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::clock::NOCTURNAL;
use super::daily::{
    consecutive_bathroom_episodes, early_awakenings, mean_std, movement_entropy, nocturnal_awakenings,
    nocturnal_nonbathroom, nocturnal_visits, segment_visits, transit_stats, transit_times,
    visit_count_and_avg_duration, AWAKENING_GAP_MIN, EPISODE_WINDOW_MIN, TRANSIT_WINDOW_S, VISIT_GAP_MIN,
};
use crate::event_model::{DayWindow, Location};

/// Column names of the 17 behavioral features, in storage order.
pub const FEATURE_NAMES: [&str; 17] = [
    "f01_daily_bathroom_visits",
    "f02_avg_visit_duration_min",
    "f03_nocturnal_bathroom_visits",
    "f04_mean_transit_s",
    "f05_std_transit_s",
    "f06_mean_day_transit_s",
    "f07_std_day_transit_s",
    "f08_movement_entropy",
    "f09_nocturnal_awakenings",
    "f10_early_awakenings",
    "f11_consecutive_bathroom_episodes",
    "f12_nocturnal_nonbathroom_moves",
    "f13_health_event_last3",
    "f14_delta_visit_freq",
    "f15_roll3_std_duration_min",
    "f16_pct_visits_night",
    "f17_roll3_avg_visits",
];

/// Behavioral markers of one participant-day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub participant_id: String,
    pub date: NaiveDate,
    pub f01_daily_bathroom_visits: u32,
    pub f02_avg_visit_duration_min: f64,
    pub f03_nocturnal_bathroom_visits: u32,
    pub f04_mean_transit_s: f64,
    pub f05_std_transit_s: f64,
    pub f06_mean_day_transit_s: f64,
    pub f07_std_day_transit_s: f64,
    pub f08_movement_entropy: f64,
    pub f09_nocturnal_awakenings: u32,
    pub f10_early_awakenings: u32,
    pub f11_consecutive_bathroom_episodes: u32,
    pub f12_nocturnal_nonbathroom_moves: u32,
    pub f13_health_event_last3: u8,
    pub f14_delta_visit_freq: i64,
    pub f15_roll3_std_duration_min: f64,
    pub f16_pct_visits_night: f64,
    pub f17_roll3_avg_visits: f64,
    pub label: Option<u8>,
}

impl FeatureVector {
    /// All-zero vector (the empty-evidence sentinel).
    pub fn empty(participant_id: impl Into<String>, date: NaiveDate) -> Self {
        FeatureVector {
            participant_id: participant_id.into(),
            date,
            f01_daily_bathroom_visits: 0,
            f02_avg_visit_duration_min: 0.0,
            f03_nocturnal_bathroom_visits: 0,
            f04_mean_transit_s: 0.0,
            f05_std_transit_s: 0.0,
            f06_mean_day_transit_s: 0.0,
            f07_std_day_transit_s: 0.0,
            f08_movement_entropy: 0.0,
            f09_nocturnal_awakenings: 0,
            f10_early_awakenings: 0,
            f11_consecutive_bathroom_episodes: 0,
            f12_nocturnal_nonbathroom_moves: 0,
            f13_health_event_last3: 0,
            f14_delta_visit_freq: 0,
            f15_roll3_std_duration_min: 0.0,
            f16_pct_visits_night: 0.0,
            f17_roll3_avg_visits: 0.0,
            label: None,
        }
    }

    pub fn values(&self) -> [f64; 17] {
        [
            self.f01_daily_bathroom_visits as f64,
            self.f02_avg_visit_duration_min,
            self.f03_nocturnal_bathroom_visits as f64,
            self.f04_mean_transit_s,
            self.f05_std_transit_s,
            self.f06_mean_day_transit_s,
            self.f07_std_day_transit_s,
            self.f08_movement_entropy,
            self.f09_nocturnal_awakenings as f64,
            self.f10_early_awakenings as f64,
            self.f11_consecutive_bathroom_episodes as f64,
            self.f12_nocturnal_nonbathroom_moves as f64,
            self.f13_health_event_last3 as f64,
            self.f14_delta_visit_freq as f64,
            self.f15_roll3_std_duration_min,
            self.f16_pct_visits_night,
            self.f17_roll3_avg_visits,
        ]
    }

    /// Feature value by column name.
    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES.iter().position(|n| *n == name).map(|i| self.values()[i])
    }

    /// Percentage of visits that start at night; 0 without visits.
    pub fn night_share(nocturnal: u32, total: u32) -> f64 {
        if total == 0 {
            0.0
        } else {
            100.0 * nocturnal as f64 / total as f64
        }
    }

    fn csv_fields(&self) -> Vec<String> {
        let f = |v: f64| format!("{v:.6}");
        vec![
            self.participant_id.clone(),
            self.date.to_string(),
            self.f01_daily_bathroom_visits.to_string(),
            f(self.f02_avg_visit_duration_min),
            self.f03_nocturnal_bathroom_visits.to_string(),
            f(self.f04_mean_transit_s),
            f(self.f05_std_transit_s),
            f(self.f06_mean_day_transit_s),
            f(self.f07_std_day_transit_s),
            f(self.f08_movement_entropy),
            self.f09_nocturnal_awakenings.to_string(),
            self.f10_early_awakenings.to_string(),
            self.f11_consecutive_bathroom_episodes.to_string(),
            self.f12_nocturnal_nonbathroom_moves.to_string(),
            self.f13_health_event_last3.to_string(),
            self.f14_delta_visit_freq.to_string(),
            f(self.f15_roll3_std_duration_min),
            f(self.f16_pct_visits_night),
            f(self.f17_roll3_avg_visits),
            self.label.map(|l| l.to_string()).unwrap_or_default(),
        ]
    }
}

/// The 13 single-day features. Temporal fields (f13–f15, f17) stay zero;
/// see [`apply_temporal`].
pub fn daily_features(window: &DayWindow) -> FeatureVector {
    let mut fv = FeatureVector::empty(window.participant_id.clone(), window.date);
    let visits = segment_visits(window, Location::Bathroom, VISIT_GAP_MIN);
    let (count, avg) = visit_count_and_avg_duration(&visits);
    fv.f01_daily_bathroom_visits = count;
    fv.f02_avg_visit_duration_min = avg;
    fv.f03_nocturnal_bathroom_visits = nocturnal_visits(&visits, NOCTURNAL);
    let transits = transit_times(window, TRANSIT_WINDOW_S);
    (fv.f04_mean_transit_s, fv.f05_std_transit_s) = transit_stats(&transits, false);
    (fv.f06_mean_day_transit_s, fv.f07_std_day_transit_s) = transit_stats(&transits, true);
    fv.f08_movement_entropy = movement_entropy(window);
    fv.f09_nocturnal_awakenings = nocturnal_awakenings(window);
    fv.f10_early_awakenings = early_awakenings(window, AWAKENING_GAP_MIN);
    fv.f11_consecutive_bathroom_episodes = consecutive_bathroom_episodes(window, EPISODE_WINDOW_MIN);
    fv.f12_nocturnal_nonbathroom_moves = nocturnal_nonbathroom(window);
    fv.f16_pct_visits_night = FeatureVector::night_share(fv.f03_nocturnal_bathroom_visits, count);
    fv
}

/// Fills f13, f14, f15 and f17 of `current` from the participant's earlier
/// days. Lookback is by calendar date; missing days are simply absent.
pub fn apply_temporal(current: &mut FeatureVector, history: &[FeatureVector], health_events: &BTreeSet<NaiveDate>) {
    let d = current.date;
    let back = |k: i64| d - Duration::days(k);
    let prior: BTreeMap<NaiveDate, &FeatureVector> = history
        .iter()
        .filter(|h| h.participant_id == current.participant_id && h.date < d && h.date >= back(2))
        .map(|h| (h.date, h))
        .collect();

    current.f13_health_event_last3 = (1..=3).any(|k| health_events.contains(&back(k))) as u8;

    current.f14_delta_visit_freq = match prior.get(&back(1)) {
        Some(prev) => current.f01_daily_bathroom_visits as i64 - prev.f01_daily_bathroom_visits as i64,
        None => 0,
    };

    let mut durations = vec![current.f02_avg_visit_duration_min];
    let mut counts = vec![current.f01_daily_bathroom_visits as f64];
    for k in 1..=2 {
        if let Some(p) = prior.get(&back(k)) {
            durations.push(p.f02_avg_visit_duration_min);
            counts.push(p.f01_daily_bathroom_visits as f64);
        }
    }
    current.f15_roll3_std_duration_min = mean_std(&durations).1;
    current.f17_roll3_avg_visits = mean_std(&counts).0;
}

/// Recomputes the temporal fields over a participant's date-sorted days.
pub fn temporal_features(days: &mut [FeatureVector], health_events: &BTreeSet<NaiveDate>) {
    for i in 0..days.len() {
        let (history, rest) = days.split_at_mut(i);
        let start = history.len().saturating_sub(3);
        apply_temporal(&mut rest[0], &history[start..], health_events);
    }
}

/// All 17 features for one day given the participant's earlier days.
pub fn extract_day_features(
    window: &DayWindow,
    history: &[FeatureVector],
    health_events: &BTreeSet<NaiveDate>,
) -> FeatureVector {
    let mut fv = daily_features(window);
    apply_temporal(&mut fv, history, health_events);
    fv
}

/// Feature vectors for a participant's date-ordered windows.
pub fn extract_participant_features(
    windows: &[DayWindow],
    health_events: &BTreeSet<NaiveDate>,
    labels: &BTreeMap<NaiveDate, u8>,
) -> Vec<FeatureVector> {
    let mut days: Vec<FeatureVector> = windows.iter().map(daily_features).collect();
    days.sort_by_key(|d| d.date);
    temporal_features(&mut days, health_events);
    for d in &mut days {
        d.label = labels.get(&d.date).copied();
    }
    days
}

#[derive(Debug, Error)]
pub enum FeatureCsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("feature csv: bad header")]
    BadHeader,
    #[error("feature csv line {line}: {msg}")]
    Row { line: u64, msg: String },
}

pub fn feature_csv_header() -> Vec<&'static str> {
    let mut h = vec!["participant_id", "date"];
    h.extend(FEATURE_NAMES);
    h.push("label");
    h
}

pub fn write_feature_csv<W: Write>(writer: W, rows: &[FeatureVector]) -> Result<(), FeatureCsvError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(feature_csv_header())?;
    for r in rows {
        wtr.write_record(r.csv_fields())?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_feature_csv<R: Read>(reader: R) -> Result<Vec<FeatureVector>, FeatureCsvError> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != feature_csv_header() {
        return Err(FeatureCsvError::BadHeader);
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let err = |msg: String| FeatureCsvError::Row { line, msg };
        let num = |i: usize| -> Result<f64, FeatureCsvError> {
            rec[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("column {} is not a number: `{}`", header[i], &rec[i])))
        };
        let count = |i: usize| -> Result<u32, FeatureCsvError> {
            rec[i]
                .parse::<u32>()
                .map_err(|_| err(format!("column {} is not a count: `{}`", header[i], &rec[i])))
        };
        let date = rec[1]
            .parse::<NaiveDate>()
            .map_err(|_| err(format!("bad date `{}`", &rec[1])))?;
        let label = match rec[19].trim() {
            "" => None,
            "0" => Some(0),
            "1" => Some(1),
            other => return Err(err(format!("bad label `{other}`"))),
        };
        let f13 = count(14)?;
        if f13 > 1 {
            return Err(err("f13 must be 0 or 1".into()));
        }
        out.push(FeatureVector {
            participant_id: rec[0].to_string(),
            date,
            f01_daily_bathroom_visits: count(2)?,
            f02_avg_visit_duration_min: num(3)?,
            f03_nocturnal_bathroom_visits: count(4)?,
            f04_mean_transit_s: num(5)?,
            f05_std_transit_s: num(6)?,
            f06_mean_day_transit_s: num(7)?,
            f07_std_day_transit_s: num(8)?,
            f08_movement_entropy: num(9)?,
            f09_nocturnal_awakenings: count(10)?,
            f10_early_awakenings: count(11)?,
            f11_consecutive_bathroom_episodes: count(12)?,
            f12_nocturnal_nonbathroom_moves: count(13)?,
            f13_health_event_last3: f13 as u8,
            f14_delta_visit_freq: rec[15]
                .parse::<i64>()
                .map_err(|_| err(format!("bad delta `{}`", &rec[15])))?,
            f15_roll3_std_duration_min: num(16)?,
            f16_pct_visits_night: num(17)?,
            f17_roll3_avg_visits: num(18)?,
            label,
        });
    }
    Ok(out)
}
