//! Per-day behavioral markers computed from a single [`DayWindow`].

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDateTime;

use super::clock::{seconds_between, ClockWindow, DAYTIME, EARLY_MORNING, NOCTURNAL, NOCTURNAL_LATE};
use crate::event_model::{DayWindow, Location, SensorEvent, SensorType};

/// Minimum inactivity separating two bathroom visits.
pub const VISIT_GAP_MIN: f64 = 5.0;
/// Maximum bedroom→bathroom delay counted as a transit.
pub const TRANSIT_WINDOW_S: f64 = 300.0;
/// Minimum gap separating two early-morning activity clusters.
pub const AWAKENING_GAP_MIN: f64 = 10.0;
/// Maximum spacing of bathroom activations within one episode.
pub const EPISODE_WINDOW_MIN: f64 = 30.0;

/// One run of ON activations at a location.
#[derive(Debug, Clone, PartialEq)]
pub struct Visit {
    pub start: NaiveDateTime,
    pub end: NaiveDateTime,
}

impl Visit {
    pub fn duration_min(&self) -> f64 {
        seconds_between(&self.start, &self.end) / 60.0
    }
}

/// A bedroom event followed by a bathroom activation.
#[derive(Debug, Clone, PartialEq)]
pub struct Transit {
    pub from: NaiveDateTime,
    pub seconds: f64,
}

fn on_at(window: &DayWindow, location: Location) -> impl Iterator<Item = &SensorEvent> {
    window
        .events
        .iter()
        .filter(move |e| e.location == location && e.is_on())
}

/// Splits the ON events at `location` into visits. A new visit starts when
/// the gap since the previous ON event is at least `gap_min` minutes.
pub fn segment_visits(window: &DayWindow, location: Location, gap_min: f64) -> Vec<Visit> {
    assert!(gap_min > 0.0, "gap_min must be positive");
    let gap_s = gap_min * 60.0;
    let mut visits: Vec<Visit> = Vec::new();
    for ev in on_at(window, location) {
        match visits.last_mut() {
            Some(v) if seconds_between(&v.end, &ev.timestamp) < gap_s => v.end = ev.timestamp,
            _ => visits.push(Visit {
                start: ev.timestamp,
                end: ev.timestamp,
            }),
        }
    }
    visits
}

/// `(count, mean duration in minutes)`; the mean is 0 with no visits.
pub fn visit_count_and_avg_duration(visits: &[Visit]) -> (u32, f64) {
    let n = visits.len();
    if n == 0 {
        return (0, 0.0);
    }
    let total: f64 = visits.iter().map(Visit::duration_min).sum();
    (n as u32, total / n as f64)
}

/// Visits whose start falls in the nocturnal window.
pub fn nocturnal_visits(visits: &[Visit], window: ClockWindow) -> u32 {
    visits.iter().filter(|v| window.contains(&v.start)).count() as u32
}

/// Bedroom activity: any ON at a bedroom location, or a bed exit (bed OFF).
fn is_bedroom_event(e: &SensorEvent) -> bool {
    e.location == Location::Bedroom && (e.is_on() || (e.sensor_type == SensorType::Bed && e.is_off()))
}

fn is_bathroom_event(e: &SensorEvent) -> bool {
    e.location == Location::Bathroom && e.is_on()
}

/// Pairs each bedroom event with the next bathroom activation when it comes
/// within `pair_window_s`. Bedroom events are visited earliest first and a
/// bathroom activation is consumed by at most one of them; a bedroom event
/// whose next bathroom activation is already taken gets no transit.
pub fn transit_times(window: &DayWindow, pair_window_s: f64) -> Vec<Transit> {
    assert!(pair_window_s > 0.0, "pair_window_s must be positive");
    let events = &window.events;
    // next_bath[i] = index of the first bathroom activation at or after i
    let mut next_bath = vec![None; events.len() + 1];
    for i in (0..events.len()).rev() {
        next_bath[i] = if is_bathroom_event(&events[i]) {
            Some(i)
        } else {
            next_bath[i + 1]
        };
    }
    let mut consumed = vec![false; events.len()];
    let mut out = Vec::new();
    for (i, ev) in events.iter().enumerate() {
        if !is_bedroom_event(ev) {
            continue;
        }
        let Some(j) = next_bath[i + 1] else { continue };
        if consumed[j] {
            continue;
        }
        let dt = seconds_between(&ev.timestamp, &events[j].timestamp);
        if dt <= pair_window_s {
            consumed[j] = true;
            out.push(Transit {
                from: ev.timestamp,
                seconds: dt,
            });
        }
    }
    out
}

/// Population mean and standard deviation; `(0, 0)` for an empty slice.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Mean and std of transit seconds, optionally only for transits that leave
/// the bedroom during daytime hours.
pub fn transit_stats(transits: &[Transit], day_only: bool) -> (f64, f64) {
    let secs: Vec<f64> = transits
        .iter()
        .filter(|t| !day_only || DAYTIME.contains(&t.from))
        .map(|t| t.seconds)
        .collect();
    mean_std(&secs)
}

/// Shannon entropy (bits) of ON events over sensors.
pub fn movement_entropy(window: &DayWindow) -> f64 {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for e in window.events.iter().filter(|e| e.is_on()) {
        *counts.entry(e.sensor_id.as_str()).or_default() += 1;
    }
    shannon_bits(counts.values().copied())
}

pub(crate) fn shannon_bits(counts: impl Iterator<Item = usize> + Clone) -> f64 {
    let total: usize = counts.clone().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    let h: f64 = counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum();
    // -0.0 for a single outcome
    h.max(0.0)
}

/// Bed exits plus ON events from non-bed sensors during 21:00–07:00.
pub fn nocturnal_awakenings(window: &DayWindow) -> u32 {
    window
        .events
        .iter()
        .filter(|e| NOCTURNAL.contains(&e.timestamp))
        .filter(|e| {
            if e.sensor_type == SensorType::Bed {
                e.is_off()
            } else {
                e.is_on()
            }
        })
        .count() as u32
}

/// Number of time-ordered clusters, where a new cluster starts when the gap
/// since the previous timestamp is at least `gap_s`.
fn count_clusters(times: impl Iterator<Item = NaiveDateTime>, gap_s: f64) -> u32 {
    let mut count = 0;
    let mut last: Option<NaiveDateTime> = None;
    for t in times {
        if last.is_none_or(|prev| seconds_between(&prev, &t) >= gap_s) {
            count += 1;
        }
        last = Some(t);
    }
    count
}

/// Clusters of ON activity strictly before 06:00.
pub fn early_awakenings(window: &DayWindow, cluster_gap_min: f64) -> u32 {
    let times = window
        .events
        .iter()
        .filter(|e| e.is_on() && EARLY_MORNING.contains(&e.timestamp))
        .map(|e| e.timestamp);
    count_clusters(times, cluster_gap_min * 60.0)
}

/// Maximal clusters of bathroom ON events spaced at most `window_min` apart
/// that involve at least two distinct sensors.
pub fn consecutive_bathroom_episodes(window: &DayWindow, window_min: f64) -> u32 {
    let bath: Vec<&SensorEvent> = on_at(window, Location::Bathroom).collect();
    let limit = window_min * 60.0;
    let mut count = 0;
    let mut i = 0;
    while i < bath.len() {
        let mut sensors = BTreeSet::new();
        sensors.insert(bath[i].sensor_id.as_str());
        let mut j = i + 1;
        while j < bath.len() && seconds_between(&bath[j - 1].timestamp, &bath[j].timestamp) <= limit {
            sensors.insert(bath[j].sensor_id.as_str());
            j += 1;
        }
        if sensors.len() >= 2 {
            count += 1;
        }
        i = j;
    }
    count
}

/// ON events outside the bathroom during 22:00–07:00.
pub fn nocturnal_nonbathroom(window: &DayWindow) -> u32 {
    window
        .events
        .iter()
        .filter(|e| e.is_on() && e.location != Location::Bathroom && NOCTURNAL_LATE.contains(&e.timestamp))
        .count() as u32
}
