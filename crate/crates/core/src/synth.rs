//! Seeded synthetic participants standing in for real smart-home data.
//!
//! Each participant-day is first drawn as a [`DayPlan`]: which hours hold a
//! bathroom visit, how long each visit lasts, whether it was preceded by a
//! bedroom-to-bathroom transit, and how many movement events happen where.
//! A plan renders to sensor events on a fixed slot layout, and its feature
//! targets are computed directly from the plan. The feature dataset is the
//! set of targets, so extracting features from the rendered logs gives back
//! the same table.
//!
//! Slot layout within hour `h`:
//! - bathroom visit starting at `h:05:00`, at most 15 minutes long
//! - transit bedroom event 10–280 s before the visit (bed exit at night,
//!   bedroom motion by day)
//! - one ambient temperature reading at `h:30:00`
//! - movement block at `h:40:00`, one ON every 30 s, at most 10 events
//!
//! Blocks sit far enough apart that visits, early-morning clusters and
//! bathroom episodes never merge across blocks.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate, NaiveDateTime, NaiveTime};
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event_model::{write_event_csv, Location, SensorEvent, SensorType, SensorValue};
use crate::features::daily::{mean_std, shannon_bits};
use crate::features::vector::{temporal_features, write_feature_csv, FeatureCsvError};
use crate::features::FeatureVector;
use crate::rng;

/// Nocturnal visit hours, 21:00–07:00.
const NIGHT_VISIT_HOURS: [u32; 10] = [21, 22, 23, 0, 1, 2, 3, 4, 5, 6];
const DAY_VISIT_HOURS: [u32; 14] = [7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20];
/// Hours whose movement counts as nocturnal non-bathroom movement (22:00–07:00).
const NIGHT_MOVE_HOURS: [u32; 9] = [22, 23, 0, 1, 2, 3, 4, 5, 6];
/// Evening and daytime movement hours.
const DAY_MOVE_HOURS: std::ops::RangeInclusive<u32> = 7..=21;
const MOVES_PER_BLOCK: usize = 10;
const MAX_VISIT_S: i64 = 900;

/// Baseline rates; effect sizes are added on UTI days.
const NIGHT_VISIT_RATE: f64 = 1.0;
const DAY_VISIT_RATE: f64 = 5.0;
const NIGHT_MOVE_RATE: f64 = 2.0;
const DAY_MOVE_RATE: f64 = 2.5;
const VISIT_MINUTES: (f64, f64) = (3.0, 1.0);
const TRANSIT_SECONDS: (f64, f64) = (90.0, 40.0);
const TRANSIT_PROB: f64 = 0.6;
const MULTI_SENSOR_PROB: f64 = 0.3;
const FAVOURITE_SHARE: f64 = 0.7;
const BACKGROUND_HEALTH_RATE: f64 = 0.03;
const EPISODE_LEN: usize = 5;

struct MoveSensor {
    id: &'static str,
    ty: SensorType,
    location: Location,
}

/// Index 0 is the favourite room; the rest share the remaining probability.
const MOVE_SENSORS: [MoveSensor; 5] = [
    MoveSensor {
        id: "M_LR1",
        ty: SensorType::Motion,
        location: Location::LivingRoom,
    },
    MoveSensor {
        id: "M_BR1",
        ty: SensorType::Motion,
        location: Location::Bedroom,
    },
    MoveSensor {
        id: "M_KI1",
        ty: SensorType::Motion,
        location: Location::Kitchen,
    },
    MoveSensor {
        id: "M_DI1",
        ty: SensorType::Motion,
        location: Location::DiningRoom,
    },
    MoveSensor {
        id: "D_EN1",
        ty: SensorType::Door,
        location: Location::Entry,
    },
];
const BATH_SENSORS: [&str; 2] = ["M_BA1", "M_BA2"];
const BED_SENSOR: &str = "B_BR1";
const DAY_TRANSIT_SENSOR: &str = "M_BR1";
const TEMP_SENSOR: &str = "T_LR1";

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    Config(String),
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("writing {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Features(#[from] FeatureCsvError),
}

/// Either one day count for everyone or one count per participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DaysPerParticipant {
    Uniform(usize),
    PerParticipant(Vec<usize>),
}

/// Shifts applied on UTI days. Rates are added to Poisson means; the entropy
/// shift lowers the share of movement in the favourite room, which spreads
/// activity over more sensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EffectSizes {
    /// Extra daytime visits per day.
    pub f01_daily_bathroom_visits: f64,
    /// Extra minutes per visit.
    pub f02_avg_visit_duration_min: f64,
    /// Extra nocturnal visits per night.
    pub f03_nocturnal_bathroom_visits: f64,
    /// Drop in favourite-room share of movement, in [0, 0.7].
    pub f08_movement_entropy: f64,
    /// Extra nocturnal non-bathroom movement events.
    pub f12_nocturnal_nonbathroom_moves: f64,
    /// Probability that an episode's first day is recorded as a health event.
    pub f13_health_event_last3: f64,
}

impl Default for EffectSizes {
    fn default() -> Self {
        EffectSizes {
            f01_daily_bathroom_visits: 0.4,
            f02_avg_visit_duration_min: 0.2,
            f03_nocturnal_bathroom_visits: 0.6,
            f08_movement_entropy: 0.1,
            f12_nocturnal_nonbathroom_moves: 0.8,
            f13_health_event_last3: 0.5,
        }
    }
}

impl EffectSizes {
    pub fn zero() -> Self {
        EffectSizes {
            f01_daily_bathroom_visits: 0.0,
            f02_avg_visit_duration_min: 0.0,
            f03_nocturnal_bathroom_visits: 0.0,
            f08_movement_entropy: 0.0,
            f12_nocturnal_nonbathroom_moves: 0.0,
            f13_health_event_last3: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_participants: usize,
    pub days_per_participant: DaysPerParticipant,
    pub uti_day_fraction: f64,
    pub effect_sizes: EffectSizes,
    pub noise_scale: f64,
    pub start_date: NaiveDate,
}

impl Default for SynthConfig {
    /// Eight participants, 117 days, 56 of them UTI days.
    fn default() -> Self {
        SynthConfig {
            seed: 42,
            n_participants: 8,
            days_per_participant: DaysPerParticipant::PerParticipant(vec![38, 13, 15, 10, 9, 13, 9, 10]),
            uti_day_fraction: 56.0 / 117.0,
            effect_sizes: EffectSizes::default(),
            noise_scale: 1.0,
            start_date: NaiveDate::from_ymd_opt(2024, 1, 1).expect("valid date"),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Config(m));
        if self.n_participants == 0 {
            return bad("n_participants must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.uti_day_fraction) {
            return bad(format!("uti_day_fraction {} is outside [0, 1]", self.uti_day_fraction));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return bad(format!("noise_scale {} must be a nonnegative number", self.noise_scale));
        }
        if let DaysPerParticipant::PerParticipant(days) = &self.days_per_participant {
            if days.len() != self.n_participants {
                return bad(format!(
                    "days_per_participant lists {} participants but n_participants is {}",
                    days.len(),
                    self.n_participants
                ));
            }
        }
        if self.days().contains(&0) {
            return bad("every participant needs at least one day".into());
        }
        let e = &self.effect_sizes;
        let shifts = [
            e.f01_daily_bathroom_visits,
            e.f02_avg_visit_duration_min,
            e.f03_nocturnal_bathroom_visits,
            e.f08_movement_entropy,
            e.f12_nocturnal_nonbathroom_moves,
            e.f13_health_event_last3,
        ];
        if shifts.iter().any(|v| !v.is_finite()) {
            return bad("effect sizes must be finite".into());
        }
        if !(0.0..=FAVOURITE_SHARE).contains(&e.f08_movement_entropy) {
            return bad(format!("f08_movement_entropy shift must be in [0, {FAVOURITE_SHARE}]"));
        }
        if !(0.0..=1.0).contains(&e.f13_health_event_last3) {
            return bad("f13_health_event_last3 is a probability".into());
        }
        Ok(())
    }

    pub fn days(&self) -> Vec<usize> {
        match &self.days_per_participant {
            DaysPerParticipant::Uniform(d) => vec![*d; self.n_participants],
            DaysPerParticipant::PerParticipant(v) => v.clone(),
        }
    }

    pub fn participant_id(index: usize) -> String {
        format!("P{:02}", index + 1)
    }
}

/// Splits `total` into integer parts proportional to `weights`, handing the
/// leftover units to the largest fractional parts (earlier index on ties).
pub fn largest_remainder(total: usize, weights: &[usize]) -> Vec<usize> {
    let sum: usize = weights.iter().sum();
    if sum == 0 {
        return vec![0; weights.len()];
    }
    let mut parts: Vec<usize> = weights.iter().map(|w| total * w / sum).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    // remainder of total * w / sum, compared exactly as integers
    order.sort_by_key(|&i| std::cmp::Reverse((total * weights[i]) % sum));
    let short = total - parts.iter().sum::<usize>();
    for &i in order.iter().take(short) {
        parts[i] += 1;
    }
    parts
}

/// Half-up rounding of a nonnegative value.
pub fn round_half_up(x: f64) -> usize {
    (x + 0.5 + 1e-9).floor().max(0.0) as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisitPlan {
    pub hour: u32,
    pub duration_s: i64,
    /// Visit alternates between both bathroom sensors.
    pub multi_sensor: bool,
    pub transit_s: Option<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DayPlan {
    pub date: NaiveDate,
    pub label: u8,
    pub health_event: bool,
    /// Sorted by clock hour, midnight first.
    pub visits: Vec<VisitPlan>,
    /// `(hour, sensor indices into the movement sensor table)`, sorted by hour.
    pub moves: Vec<(u32, Vec<usize>)>,
    pub temperature: Vec<f64>,
}

fn is_night_hour(h: u32) -> bool {
    !(7..21).contains(&h)
}

fn at(date: NaiveDate, hour: u32, min: u32, sec: i64) -> NaiveDateTime {
    let base = date.and_time(NaiveTime::from_hms_opt(hour, min, 0).expect("valid time"));
    base + Duration::seconds(sec)
}

/// Offsets (seconds from visit start) of the ON events of one visit.
fn visit_offsets(duration_s: i64) -> Vec<i64> {
    let mut out: Vec<i64> = (0..).map(|k| k * 120).take_while(|&t| t < duration_s).collect();
    out.push(duration_s);
    out
}

fn poisson(r: &mut ChaCha8Rng, rate: f64) -> usize {
    if rate <= 0.0 {
        return 0;
    }
    Poisson::new(rate).map(|d| d.sample(r) as usize).unwrap_or(0)
}

/// Normal draw clamped to `[lo, hi]`; with `sd = 0` it is the clamped mean.
fn truncated_normal(r: &mut ChaCha8Rng, mean: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    if sd <= 0.0 {
        return mean.clamp(lo, hi);
    }
    let n = Normal::new(mean, sd).expect("finite sd");
    for _ in 0..64 {
        let v = n.sample(r);
        if (lo..=hi).contains(&v) {
            return v;
        }
    }
    mean.clamp(lo, hi)
}

/// Places `positives` label-1 days among `days` as contiguous episodes of
/// about [`EPISODE_LEN`] days, at random positions.
fn episode_labels(r: &mut ChaCha8Rng, days: usize, positives: usize) -> Vec<u8> {
    let negatives = days - positives;
    if positives == 0 {
        return vec![0; days];
    }
    let episodes = positives.div_ceil(EPISODE_LEN).min(negatives + 1).max(1);
    // episode lengths: a random composition of `positives` into `episodes` parts
    let mut cuts: Vec<usize> = sample(r, positives - 1, episodes - 1).into_iter().map(|c| c + 1).collect();
    cuts.sort_unstable();
    let mut lengths = Vec::with_capacity(episodes);
    let mut prev = 0;
    for c in cuts.iter().chain(std::iter::once(&positives)) {
        lengths.push(c - prev);
        prev = *c;
    }
    // episode slots: distinct gaps between negatives (stars and bars)
    let mut slots: Vec<usize> = sample(r, negatives + 1, episodes).into_vec();
    slots.sort_unstable();
    let mut labels = Vec::with_capacity(days);
    let mut next = 0;
    for gap in 0..=negatives {
        while next < episodes && slots[next] == gap {
            labels.extend(std::iter::repeat_n(1u8, lengths[next]));
            next += 1;
        }
        if gap < negatives {
            labels.push(0);
        }
    }
    labels
}

fn plan_day(
    r: &mut ChaCha8Rng,
    cfg: &SynthConfig,
    date: NaiveDate,
    label: u8,
    health_event: bool,
    participant_factor: f64,
) -> DayPlan {
    let e = &cfg.effect_sizes;
    let uti = label as f64;
    let noise = cfg.noise_scale;
    // day-to-day rate jitter
    let jitter = |r: &mut ChaCha8Rng| (0.25 * noise * Normal::new(0.0, 1.0).expect("unit").sample(r)).exp();

    let night_rate = NIGHT_VISIT_RATE * participant_factor * jitter(r) + e.f03_nocturnal_bathroom_visits * uti;
    let day_rate = DAY_VISIT_RATE * participant_factor * jitter(r) + e.f01_daily_bathroom_visits * uti;
    let move_rate = NIGHT_MOVE_RATE * participant_factor * jitter(r) + e.f12_nocturnal_nonbathroom_moves * uti;

    let n_night = poisson(r, night_rate).min(NIGHT_VISIT_HOURS.len());
    let n_day = poisson(r, day_rate).min(DAY_VISIT_HOURS.len());
    let mut hours: Vec<u32> = sample(r, NIGHT_VISIT_HOURS.len(), n_night)
        .into_iter()
        .map(|i| NIGHT_VISIT_HOURS[i])
        .collect();
    hours.extend(sample(r, DAY_VISIT_HOURS.len(), n_day).into_iter().map(|i| DAY_VISIT_HOURS[i]));
    hours.sort_unstable();

    let minutes_mean = VISIT_MINUTES.0 + e.f02_avg_visit_duration_min * uti;
    let visits = hours
        .into_iter()
        .map(|hour| {
            let minutes = truncated_normal(r, minutes_mean, VISIT_MINUTES.1 * noise, 0.5, 15.0);
            let transit = r.random_bool(TRANSIT_PROB).then(|| {
                truncated_normal(r, TRANSIT_SECONDS.0, TRANSIT_SECONDS.1 * noise, 10.0, 280.0).round() as i64
            });
            VisitPlan {
                hour,
                duration_s: ((minutes * 60.0).round() as i64).clamp(30, MAX_VISIT_S),
                multi_sensor: r.random_bool(MULTI_SENSOR_PROB),
                transit_s: transit,
            }
        })
        .collect();

    let favourite = FAVOURITE_SHARE - e.f08_movement_entropy * uti;
    let pick_sensor = |r: &mut ChaCha8Rng| {
        if r.random_bool(favourite.clamp(0.0, 1.0)) {
            0
        } else {
            r.random_range(1..MOVE_SENSORS.len())
        }
    };

    let mut per_hour: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    let night_moves = poisson(r, move_rate).min(NIGHT_MOVE_HOURS.len() * MOVES_PER_BLOCK);
    for _ in 0..night_moves {
        let open: Vec<u32> = NIGHT_MOVE_HOURS
            .iter()
            .copied()
            .filter(|h| per_hour.get(h).is_none_or(|v| v.len() < MOVES_PER_BLOCK))
            .collect();
        let h = open[r.random_range(0..open.len())];
        let s = pick_sensor(r);
        per_hour.entry(h).or_default().push(s);
    }
    for h in DAY_MOVE_HOURS {
        let n = poisson(r, DAY_MOVE_RATE).min(MOVES_PER_BLOCK);
        for _ in 0..n {
            let s = pick_sensor(r);
            per_hour.entry(h).or_default().push(s);
        }
    }
    let temperature = (0..24)
        .map(|_| (truncated_normal(r, 21.0, 0.8, 15.0, 28.0) * 10.0).round() / 10.0)
        .collect();

    DayPlan {
        date,
        label,
        health_event,
        visits,
        moves: per_hour.into_iter().collect(),
        temperature,
    }
}

impl DayPlan {
    /// Sensor events of the day, in timestamp order.
    pub fn render(&self) -> Vec<SensorEvent> {
        let ev = |ts, id: &str, ty, location, value| SensorEvent {
            timestamp: ts,
            sensor_id: id.to_string(),
            sensor_type: ty,
            location,
            value,
        };
        let mut out = Vec::new();
        for v in &self.visits {
            if let Some(t) = v.transit_s {
                let ts = at(self.date, v.hour, 5, -t);
                out.push(if is_night_hour(v.hour) {
                    ev(ts, BED_SENSOR, SensorType::Bed, Location::Bedroom, SensorValue::Off)
                } else {
                    ev(ts, DAY_TRANSIT_SENSOR, SensorType::Motion, Location::Bedroom, SensorValue::On)
                });
            }
            for (k, off) in visit_offsets(v.duration_s).into_iter().enumerate() {
                let id = if v.multi_sensor { BATH_SENSORS[k % 2] } else { BATH_SENSORS[0] };
                out.push(ev(
                    at(self.date, v.hour, 5, off),
                    id,
                    SensorType::Motion,
                    Location::Bathroom,
                    SensorValue::On,
                ));
            }
        }
        for (h, t) in self.temperature.iter().enumerate() {
            out.push(ev(
                at(self.date, h as u32, 30, 0),
                TEMP_SENSOR,
                SensorType::Temperature,
                Location::LivingRoom,
                SensorValue::Reading(*t),
            ));
        }
        for (h, sensors) in &self.moves {
            for (k, &s) in sensors.iter().enumerate() {
                let m = &MOVE_SENSORS[s];
                out.push(ev(at(self.date, *h, 40, 30 * k as i64), m.id, m.ty, m.location, SensorValue::On));
            }
        }
        out.sort_by_key(|e| e.timestamp);
        out
    }

    /// The single-day features this plan is built to produce. Temporal
    /// features are left at zero.
    pub fn targets(&self, participant_id: &str) -> FeatureVector {
        let mut fv = FeatureVector::empty(participant_id, self.date);
        fv.label = Some(self.label);
        let n = self.visits.len() as u32;
        fv.f01_daily_bathroom_visits = n;
        if n > 0 {
            let total: f64 = self.visits.iter().map(|v| v.duration_s as f64 / 60.0).sum();
            fv.f02_avg_visit_duration_min = total / n as f64;
        }
        fv.f03_nocturnal_bathroom_visits = self.visits.iter().filter(|v| is_night_hour(v.hour)).count() as u32;

        let all: Vec<f64> = self.visits.iter().filter_map(|v| v.transit_s).map(|t| t as f64).collect();
        let day: Vec<f64> = self
            .visits
            .iter()
            .filter(|v| !is_night_hour(v.hour))
            .filter_map(|v| v.transit_s)
            .map(|t| t as f64)
            .collect();
        (fv.f04_mean_transit_s, fv.f05_std_transit_s) = mean_std(&all);
        (fv.f06_mean_day_transit_s, fv.f07_std_day_transit_s) = mean_std(&day);

        let mut on_counts: BTreeMap<&str, usize> = BTreeMap::new();
        let mut night_events = 0u32;
        let mut early_blocks = 0u32;
        for v in &self.visits {
            let offs = visit_offsets(v.duration_s).len();
            if v.multi_sensor {
                *on_counts.entry(BATH_SENSORS[0]).or_default() += offs.div_ceil(2);
                *on_counts.entry(BATH_SENSORS[1]).or_default() += offs / 2;
            } else {
                *on_counts.entry(BATH_SENSORS[0]).or_default() += offs;
            }
            if is_night_hour(v.hour) {
                // bathroom ONs plus the bed exit, if any
                night_events += offs as u32 + v.transit_s.is_some() as u32;
            } else if v.transit_s.is_some() {
                *on_counts.entry(DAY_TRANSIT_SENSOR).or_default() += 1;
            }
            if v.hour < 6 {
                early_blocks += 1;
            }
        }
        for (h, sensors) in &self.moves {
            for &s in sensors {
                *on_counts.entry(MOVE_SENSORS[s].id).or_default() += 1;
            }
            if is_night_hour(*h) {
                night_events += sensors.len() as u32;
            }
            if *h < 6 && !sensors.is_empty() {
                early_blocks += 1;
            }
        }
        fv.f08_movement_entropy = shannon_bits(on_counts.values().copied());
        fv.f09_nocturnal_awakenings = night_events;
        fv.f10_early_awakenings = early_blocks;
        fv.f11_consecutive_bathroom_episodes = self.visits.iter().filter(|v| v.multi_sensor).count() as u32;
        fv.f12_nocturnal_nonbathroom_moves = self
            .moves
            .iter()
            .filter(|(h, _)| NIGHT_MOVE_HOURS.contains(h))
            .map(|(_, s)| s.len() as u32)
            .sum();
        fv.f16_pct_visits_night = FeatureVector::night_share(fv.f03_nocturnal_bathroom_visits, n);
        fv
    }
}

/// Everything generated for one participant.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticipantData {
    pub participant_id: String,
    pub plans: Vec<DayPlan>,
    /// Full feature targets, temporal features included.
    pub targets: Vec<FeatureVector>,
    pub health_events: BTreeSet<NaiveDate>,
}

impl ParticipantData {
    pub fn events(&self) -> Vec<SensorEvent> {
        self.plans.iter().flat_map(DayPlan::render).collect()
    }

    pub fn labels(&self) -> BTreeMap<NaiveDate, u8> {
        self.plans.iter().map(|p| (p.date, p.label)).collect()
    }
}

/// Draws every participant's days. Participant `i` uses the random stream
/// `(seed, i)`, so adding participants leaves earlier ones unchanged.
pub fn generate(cfg: &SynthConfig) -> Result<Vec<ParticipantData>, SynthError> {
    cfg.validate()?;
    let days = cfg.days();
    let total: usize = days.iter().sum();
    let positives = round_half_up(cfg.uti_day_fraction * total as f64).min(total);
    let per_participant = largest_remainder(positives, &days);

    let mut out = Vec::with_capacity(days.len());
    for (i, (&n_days, &n_pos)) in days.iter().zip(&per_participant).enumerate() {
        let pid = SynthConfig::participant_id(i);
        let mut r = rng::stream(cfg.seed, i as u64);
        let factor = r.random_range(0.75..1.25);
        let labels = episode_labels(&mut r, n_days, n_pos.min(n_days));
        let mut health_events = BTreeSet::new();
        let mut plans = Vec::with_capacity(n_days);
        for (d, &label) in labels.iter().enumerate() {
            let date = cfg.start_date + Duration::days(d as i64);
            let onset = label == 1 && (d == 0 || labels[d - 1] == 0);
            let health = (onset && r.random_bool(cfg.effect_sizes.f13_health_event_last3))
                || r.random_bool(BACKGROUND_HEALTH_RATE);
            if health {
                health_events.insert(date);
            }
            plans.push(plan_day(&mut r, cfg, date, label, health, factor));
        }
        let mut targets: Vec<FeatureVector> = plans.iter().map(|p| p.targets(&pid)).collect();
        temporal_features(&mut targets, &health_events);
        out.push(ParticipantData {
            participant_id: pid,
            plans,
            targets,
            health_events,
        });
    }
    Ok(out)
}

/// The labeled feature table, participants in order, days by date.
pub fn generate_feature_dataset(cfg: &SynthConfig) -> Result<Vec<FeatureVector>, SynthError> {
    Ok(generate(cfg)?.into_iter().flat_map(|p| p.targets).collect())
}

pub fn generate_event_logs(cfg: &SynthConfig) -> Result<Vec<ParticipantData>, SynthError> {
    generate(cfg)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SynthError + '_ {
    move |source| SynthError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Feature CSV preceded by a `# seed=` comment line.
pub fn write_synth_feature_csv<W: Write>(mut w: W, rows: &[FeatureVector], seed: u64) -> Result<(), SynthError> {
    writeln!(w, "# seed={seed}").map_err(|source| SynthError::Io {
        path: "<feature csv>".into(),
        source,
    })?;
    write_feature_csv(w, rows)?;
    Ok(())
}

/// Writes `<dir>/<participant>.csv` for each participant and returns the paths.
pub fn write_event_logs(dir: &Path, data: &[ParticipantData], seed: u64) -> Result<Vec<PathBuf>, SynthError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut paths = Vec::with_capacity(data.len());
    for p in data {
        let path = dir.join(format!("{}.csv", p.participant_id));
        let mut buf = format!("# seed={seed} participant={}\n", p.participant_id).into_bytes();
        write_event_csv(&mut buf, &p.events()).map_err(|source| SynthError::Csv {
            path: path.display().to_string(),
            source,
        })?;
        std::fs::write(&path, buf).map_err(io_err(&path))?;
        paths.push(path);
    }
    Ok(paths)
}

/// `participant_id,date,label,health_event`, one row per generated day.
pub fn write_labels_csv(path: &Path, data: &[ParticipantData], seed: u64) -> Result<(), SynthError> {
    let mut buf = format!("# seed={seed}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let csv_err = |source| SynthError::Csv {
            path: path.display().to_string(),
            source,
        };
        w.write_record(["participant_id", "date", "label", "health_event"])
            .map_err(csv_err)?;
        for p in data {
            for plan in &p.plans {
                w.write_record([
                    p.participant_id.clone(),
                    plan.date.to_string(),
                    plan.label.to_string(),
                    (p.health_events.contains(&plan.date) as u8).to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
        w.flush().map_err(io_err(path))?;
    }
    std::fs::write(path, buf).map_err(io_err(path))
}
