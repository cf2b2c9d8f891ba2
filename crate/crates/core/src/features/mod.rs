//! The 17 behavioral day-features and feature-subset selection.

pub mod clock;
pub mod daily;
pub mod logs;
pub mod select;
pub mod vector;

pub use daily::{
    consecutive_bathroom_episodes, early_awakenings, movement_entropy, nocturnal_awakenings, nocturnal_nonbathroom,
    nocturnal_visits, segment_visits, transit_stats, transit_times, visit_count_and_avg_duration, Transit, Visit,
};
pub use logs::{extract_log_dir, DayAnnotations, LogDirError, LogDirFeatures};
pub use select::{permutation_importance, select_features, FeatureImportance, FeatureMode, SelectError, TOP5_FEATURES};
pub use vector::{
    apply_temporal, daily_features, extract_day_features, extract_participant_features, read_feature_csv,
    temporal_features, write_feature_csv, FeatureCsvError, FeatureVector, FEATURE_NAMES,
};
