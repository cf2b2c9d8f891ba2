//! Generated event logs, run back through feature extraction, reproduce the
//! generator's own feature targets.

use cci_core::features::{extract_log_dir, write_feature_csv, DayAnnotations};
use cci_core::harness::{run_experiment, ExperimentConfig, UqMethod};
use cci_core::synth::{generate, write_event_logs, write_labels_csv, EffectSizes, SynthConfig};
use cci_core::{Dataset, ModelKind};

fn csv_bytes(rows: &[cci_core::FeatureVector]) -> String {
    let mut buf = Vec::new();
    write_feature_csv(&mut buf, rows).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn logs_reproduce_targets() {
    for seed in [1, 42, 777] {
        let cfg = SynthConfig {
            seed,
            ..SynthConfig::default()
        };
        let data = generate(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_event_logs(&dir.path().join("logs"), &data, seed).unwrap();
        write_labels_csv(&dir.path().join("labels.csv"), &data, seed).unwrap();

        let labels = DayAnnotations::read(std::fs::File::open(dir.path().join("labels.csv")).unwrap()).unwrap();
        let extracted = extract_log_dir(&dir.path().join("logs"), &labels).unwrap();
        assert!(extracted.skipped.is_empty());

        let targets: Vec<_> = data.iter().flat_map(|p| p.targets.iter().cloned()).collect();
        assert_eq!(extracted.rows.len(), targets.len());
        for (got, want) in extracted.rows.iter().zip(&targets) {
            assert_eq!(got.participant_id, want.participant_id);
            assert_eq!(got.date, want.date);
            assert_eq!(got.label, want.label);
            assert_eq!(got.f01_daily_bathroom_visits, want.f01_daily_bathroom_visits);
            assert_eq!(got.f03_nocturnal_bathroom_visits, want.f03_nocturnal_bathroom_visits);
            assert_eq!(got.f09_nocturnal_awakenings, want.f09_nocturnal_awakenings);
            assert_eq!(got.f10_early_awakenings, want.f10_early_awakenings);
            assert_eq!(got.f11_consecutive_bathroom_episodes, want.f11_consecutive_bathroom_episodes);
            assert_eq!(got.f12_nocturnal_nonbathroom_moves, want.f12_nocturnal_nonbathroom_moves);
            assert_eq!(got.f13_health_event_last3, want.f13_health_event_last3);
            assert_eq!(got.f14_delta_visit_freq, want.f14_delta_visit_freq);
            for (g, w) in got.values().iter().zip(want.values()) {
                assert!((g - w).abs() <= 1e-9, "{} {}: {g} vs {w}", got.participant_id, got.date);
            }
        }
        assert_eq!(csv_bytes(&extracted.rows), csv_bytes(&targets));
    }
}

#[test]
fn default_population_matches_the_study_size() {
    let rows: Vec<_> = generate(&SynthConfig::default()).unwrap().into_iter().flat_map(|p| p.targets).collect();
    assert_eq!(rows.len(), 117);
    assert_eq!(rows.iter().filter(|r| r.label == Some(1)).count(), 56);
    let mut pids: Vec<_> = rows.iter().map(|r| r.participant_id.as_str()).collect();
    pids.dedup();
    assert_eq!(pids.len(), 8);
}

#[test]
fn same_config_same_logs() {
    let write = |seed: u64| {
        let cfg = SynthConfig {
            seed,
            ..SynthConfig::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let paths = write_event_logs(dir.path(), &generate(&cfg).unwrap(), seed).unwrap();
        paths.iter().map(|p| std::fs::read(p).unwrap()).collect::<Vec<_>>()
    };
    assert_eq!(write(5), write(5));
    assert_ne!(write(5), write(6));
}

#[test]
fn null_effects_leave_labels_unpredictable() {
    let cfg = SynthConfig {
        effect_sizes: EffectSizes::zero(),
        ..SynthConfig::default()
    };
    let rows: Vec<_> = generate(&cfg).unwrap().into_iter().flat_map(|p| p.targets).collect();
    let data = Dataset::from_vectors(&rows).unwrap();
    let exp = ExperimentConfig::with(ModelKind::Logistic, UqMethod::None);
    let report = run_experiment(&data, &exp).unwrap();
    let acc = report.aggregate.accuracy.mean;
    assert!((0.35..=0.65).contains(&acc), "accuracy {acc} with no signal");
}
