//! Hand-traced fixture: three days of one participant's sensor log.
//!
//! Day 2024-03-01
//! - visits [01:02-01:04] (2 min), [10:03:20-10:06:20] (3 min), [22:10] (0 min): f01 3, f02 5/3, f03 2
//! - transits 01:00 bed OFF -> 01:02 (120 s), 10:00 bedroom ON -> 10:03:20 (200 s); the 01:20 bed ON
//!   has no bathroom event within 5 min. f04 160, f05 40; daytime only the 200 s: f06 200, f07 0
//! - ON counts per sensor [M_BA1 5, M_BA2 1, B_BR1 1, M_KI1 2, M_BR1 1, M_LR1 2]
//! - f09: bed OFF 01:00, three bathroom ONs at 01:0x, kitchen 05:30 and 05:35, 21:30, 22:10, 23:00 = 9
//! - f10: ONs before 06:00 cluster as {01:02-01:04}, {01:20}, {05:30-05:35} = 3
//! - f11: {M_BA1, M_BA2} within the 01:0x run = 1; f12: 01:20 bed ON, 05:30, 05:35, 23:00 = 4
//!
//! Day 2024-03-02
//! - visits [02:00], [02:09-02:12], [06:59], [07:04] (a gap of exactly 5 min starts a new visit):
//!   f01 4, f02 0.75, f03 3 (07:04 is not nocturnal)
//! - 06:58 bed OFF takes the 06:59 activation (60 s); 06:58:30 bedroom ON finds it consumed
//! - ON counts [M_BA1 4, M_BA2 1, M_BR1 2]; f09 6; f10 1; f11 1; f12 1 (06:58:30)
//! - one malformed row (motion value MAYBE) is skipped
//! - health event on 03-01 -> f13 1; f14 4 - 3; f15 std(5/3, 3/4); f17 mean(3, 4)
//!
//! Day 2024-03-04 (03-03 has no events)
//! - bathroom ONs 00:00, 00:02, 00:10 -> visits of 2 and 0 min: f01 2, f02 1.0
//! - ON counts [3, 1] -> 0.8113 bits
//! - f13 1 (03-01 is d-3); f14 0 (no 03-03); f15 std(1.0, 0.75); f17 mean(2, 4)

use std::path::PathBuf;

use cci_core::features::{extract_log_dir, read_feature_csv, write_feature_csv, DayAnnotations, FeatureVector};

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden").join(rel)
}

fn bits(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    -counts.iter().map(|c| (c / total) * (c / total).log2()).sum::<f64>()
}

fn pop_std(xs: &[f64]) -> f64 {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

struct Expected {
    counts: [i64; 9],
    continuous: [f64; 9],
}

/// counts: f01 f03 f09 f10 f11 f12 f13 f14 label;
/// continuous: f02 f04 f05 f06 f07 f08 f15 f16 f17.
fn expected() -> Vec<Expected> {
    let f02 = [5.0 / 3.0, 0.75, 1.0];
    vec![
        Expected {
            counts: [3, 2, 9, 3, 1, 4, 0, 0, 1],
            continuous: [f02[0], 160.0, 40.0, 200.0, 0.0, bits(&[5.0, 1.0, 1.0, 2.0, 1.0, 2.0]), 0.0, 200.0 / 3.0, 3.0],
        },
        Expected {
            counts: [4, 3, 6, 1, 1, 1, 1, 1, 1],
            continuous: [f02[1], 60.0, 0.0, 0.0, 0.0, bits(&[4.0, 1.0, 2.0]), pop_std(&f02[..2]), 75.0, 3.5],
        },
        Expected {
            counts: [2, 2, 3, 1, 0, 0, 1, 0, 0],
            continuous: [f02[2], 0.0, 0.0, 0.0, 0.0, bits(&[3.0, 1.0]), pop_std(&f02[1..]), 100.0, 3.0],
        },
    ]
}

fn extract() -> (Vec<FeatureVector>, usize) {
    let labels = DayAnnotations::read(std::fs::File::open(fixture("labels.csv")).unwrap()).unwrap();
    let out = extract_log_dir(&fixture("logs"), &labels).unwrap();
    (out.rows, out.skipped.len())
}

#[test]
fn fixture_reproduces_every_feature() {
    let (rows, skipped) = extract();
    assert_eq!(skipped, 1);
    let dates: Vec<String> = rows.iter().map(|r| r.date.to_string()).collect();
    assert_eq!(dates, ["2024-03-01", "2024-03-02", "2024-03-04"]);
    for (row, e) in rows.iter().zip(expected()) {
        let got_counts = [
            row.f01_daily_bathroom_visits as i64,
            row.f03_nocturnal_bathroom_visits as i64,
            row.f09_nocturnal_awakenings as i64,
            row.f10_early_awakenings as i64,
            row.f11_consecutive_bathroom_episodes as i64,
            row.f12_nocturnal_nonbathroom_moves as i64,
            row.f13_health_event_last3 as i64,
            row.f14_delta_visit_freq,
            row.label.unwrap() as i64,
        ];
        assert_eq!(got_counts, e.counts, "{}", row.date);
        let got = [
            row.f02_avg_visit_duration_min,
            row.f04_mean_transit_s,
            row.f05_std_transit_s,
            row.f06_mean_day_transit_s,
            row.f07_std_day_transit_s,
            row.f08_movement_entropy,
            row.f15_roll3_std_duration_min,
            row.f16_pct_visits_night,
            row.f17_roll3_avg_visits,
        ];
        for (i, (g, w)) in got.iter().zip(&e.continuous).enumerate() {
            assert!((g - w).abs() <= 1e-6, "{} continuous field {i}: {g} vs {w}", row.date);
        }
    }
}

#[test]
fn worked_examples_hold_on_the_fixture() {
    let (rows, _) = extract();
    let last = &rows[2];
    assert_eq!(last.f01_daily_bathroom_visits, 2);
    assert!((last.f02_avg_visit_duration_min - 1.0).abs() <= 1e-12);
    assert!((last.f08_movement_entropy - 0.8113).abs() <= 1e-4);
}

#[test]
fn fixture_matches_golden_csv_bytes() {
    let (rows, _) = extract();
    let mut buf = Vec::new();
    write_feature_csv(&mut buf, &rows).unwrap();
    let golden = std::fs::read(fixture("features.csv")).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), String::from_utf8(golden.clone()).unwrap());
    let parsed = read_feature_csv(golden.as_slice()).unwrap();
    assert_eq!(parsed.len(), 3);
    assert_eq!(parsed[1].f14_delta_visit_freq, 1);
}
