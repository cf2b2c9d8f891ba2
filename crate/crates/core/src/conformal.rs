//! Naive forest-spread intervals and conformal-calibrated intervals (CCI).
//!
//! Labels map to centers `y' = 0.25 + 0.5 y`. Calibration scores are
//! `S(p, y') = (y' - p)^2 / sigma(p)` with `sigma(p) = 2 - |p - 0.5|`, and the
//! interval for a test prediction is every `p` whose score against the
//! predicted class center stays within the calibrated quantile.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::daily::mean_std;

#[derive(Debug, Error, PartialEq)]
pub enum ConformalError {
    #[error("probability {0} is outside [0, 1]")]
    ProbOutOfRange(f64),
    #[error("label {0} is not 0 or 1")]
    BadLabel(u8),
    #[error("alpha {0} is outside (0, 1)")]
    BadAlpha(f64),
    #[error("calibration set is empty")]
    EmptyCalibration,
    #[error("{probs} probabilities but {labels} labels")]
    LengthMismatch { probs: usize, labels: usize },
    #[error("no tree probabilities")]
    NoTrees,
    #[error("unknown quantile rule {0:?} (expected paper_eq4 or split_conformal)")]
    UnknownRule(String),
}

/// A label mapped to its interval center, 0.25 or 0.75.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TransformedLabel(f64);

impl TransformedLabel {
    pub const NEGATIVE: TransformedLabel = TransformedLabel(0.25);
    pub const POSITIVE: TransformedLabel = TransformedLabel(0.75);

    pub fn from_label(y: u8) -> Result<Self, ConformalError> {
        match y {
            0 => Ok(Self::NEGATIVE),
            1 => Ok(Self::POSITIVE),
            other => Err(ConformalError::BadLabel(other)),
        }
    }

    pub fn y_prime(self) -> f64 {
        self.0
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0.5
    }
}

fn check_prob(p: f64) -> Result<f64, ConformalError> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(ConformalError::ProbOutOfRange(p))
    }
}

/// `1 + (1 - |p - 0.5|)`, between 1.5 at the extremes and 2 at 0.5.
pub fn sigma(p: f64) -> Result<f64, ConformalError> {
    let p = check_prob(p)?;
    Ok(1.0 + (1.0 - (p - 0.5).abs()))
}

pub fn score(p: f64, center: TransformedLabel) -> Result<f64, ConformalError> {
    let s = sigma(p)?;
    let d = center.y_prime() - p;
    Ok(d * d / s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantileRule {
    /// The `ceil(n (1 - alpha))`-th smallest score.
    #[serde(rename = "paper_eq4")]
    Empirical,
    /// The `ceil((n + 1)(1 - alpha))`-th smallest score, or infinity when that
    /// rank exceeds `n`.
    #[default]
    SplitConformal,
}

impl QuantileRule {
    pub fn as_str(self) -> &'static str {
        match self {
            QuantileRule::Empirical => "paper_eq4",
            QuantileRule::SplitConformal => "split_conformal",
        }
    }

    /// 1-based rank of the quantile among `n` sorted scores. May exceed `n`.
    pub fn rank(self, n: usize, alpha: f64) -> usize {
        let m = match self {
            QuantileRule::Empirical => n,
            QuantileRule::SplitConformal => n + 1,
        };
        // Absorb representation error so that e.g. 10 * 0.7 lands on rank 7, not 8.
        let target = m as f64 * (1.0 - alpha);
        let k = (target - 1e-9 * target.max(1.0)).ceil();
        (k.max(1.0)) as usize
    }
}

impl fmt::Display for QuantileRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QuantileRule {
    type Err = ConformalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper_eq4" => Ok(QuantileRule::Empirical),
            "split_conformal" => Ok(QuantileRule::SplitConformal),
            other => Err(ConformalError::UnknownRule(other.to_string())),
        }
    }
}

/// JSON has no infinity, so an unbounded quantile is written as `null`.
mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    #[serde(with = "inf_as_null")]
    pub q_hat: f64,
    pub alpha: f64,
    pub n_cal: usize,
    /// In calibration-set order.
    pub scores: Vec<f64>,
    pub quantile_rule: QuantileRule,
}

/// The `rank`-th smallest (1-based) of `scores`, or infinity past the end.
pub fn quantile_at_rank(scores: &[f64], rank: usize) -> f64 {
    if rank > scores.len() {
        return f64::INFINITY;
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted[rank - 1]
}

pub fn calibrate(
    probs: &[f64],
    labels: &[u8],
    alpha: f64,
    rule: QuantileRule,
) -> Result<CalibrationResult, ConformalError> {
    if probs.len() != labels.len() {
        return Err(ConformalError::LengthMismatch {
            probs: probs.len(),
            labels: labels.len(),
        });
    }
    if probs.is_empty() {
        return Err(ConformalError::EmptyCalibration);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ConformalError::BadAlpha(alpha));
    }
    let scores = probs
        .iter()
        .zip(labels)
        .map(|(&p, &y)| score(p, TransformedLabel::from_label(y)?))
        .collect::<Result<Vec<_>, _>>()?;
    let q_hat = quantile_at_rank(&scores, rule.rank(scores.len(), alpha));
    Ok(CalibrationResult {
        q_hat,
        alpha,
        n_cal: scores.len(),
        scores,
        quantile_rule: rule,
    })
}

/// The class center nearest to `p_hat`; exactly 0.5 goes to the positive center.
pub fn center_for(p_hat: f64) -> TransformedLabel {
    if p_hat < 0.5 {
        TransformedLabel::NEGATIVE
    } else {
        TransformedLabel::POSITIVE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbInterval {
    pub lo: f64,
    pub hi: f64,
    /// Present for conformal intervals; naive intervals have no class center.
    pub center: Option<TransformedLabel>,
}

impl ProbInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        ProbInterval { lo, hi, center: None }
    }

    /// The zero-width interval used when a point prediction is taken at face value.
    pub fn point(p: f64) -> Self {
        Self::new(p, p)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lo <= p && p <= self.hi
    }
}

/// Roots of `p^2 - b p + c`, ascending; `None` when there are no real roots.
fn roots(b: f64, c: f64) -> Option<(f64, f64)> {
    let disc = b * b - 4.0 * c;
    if disc < 0.0 {
        return None;
    }
    let r = disc.sqrt();
    Some(((b - r) / 2.0, (b + r) / 2.0))
}

/// `{p in [0,1] : (y' - p)^2 <= q sigma(p)}` as a closed interval.
///
/// Below 0.5, sigma is `1.5 + p`; from 0.5 up it is `2.5 - p`. Each piece gives
/// a quadratic inequality, and because the score is continuous and monotone
/// away from `y'` on each side, the two feasible pieces join into one interval.
pub fn interval_around(center: TransformedLabel, q: f64) -> ProbInterval {
    let y = center.y_prime();
    if !q.is_finite() {
        return ProbInterval {
            lo: 0.0,
            hi: 1.0,
            center: Some(center),
        };
    }
    let q = q.max(0.0);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    // p < 0.5: p^2 - (2y + q) p + (y^2 - 1.5 q) <= 0
    if let Some((a, b)) = roots(2.0 * y + q, y * y - 1.5 * q) {
        let (a, b) = (a.max(0.0), b.min(0.5));
        if a <= b && a < 0.5 {
            lo = lo.min(a);
            hi = hi.max(b);
        }
    }
    // p >= 0.5: p^2 - (2y - q) p + (y^2 - 2.5 q) <= 0
    if let Some((a, b)) = roots(2.0 * y - q, y * y - 2.5 * q) {
        let (a, b) = (a.max(0.5), b.min(1.0));
        if a <= b {
            lo = lo.min(a);
            hi = hi.max(b);
        }
    }
    ProbInterval {
        lo: lo.min(y).max(0.0),
        hi: hi.max(y).min(1.0),
        center: Some(center),
    }
}

pub fn cci_interval(p_hat: f64, calib: &CalibrationResult) -> Result<ProbInterval, ConformalError> {
    let p = check_prob(p_hat)?;
    Ok(interval_around(center_for(p), calib.q_hat))
}

/// `[mean - std, mean + std]` of the per-tree probabilities, clipped to [0, 1].
pub fn naive_interval(tree_probs: &[f64]) -> Result<ProbInterval, ConformalError> {
    if tree_probs.is_empty() {
        return Err(ConformalError::NoTrees);
    }
    let (mean, std) = mean_std(tree_probs);
    Ok(ProbInterval::new((mean - std).max(0.0), (mean + std).min(1.0)))
}

fn check_test(probs: &[f64], labels: &[u8]) -> Result<(), ConformalError> {
    if probs.len() != labels.len() {
        return Err(ConformalError::LengthMismatch {
            probs: probs.len(),
            labels: labels.len(),
        });
    }
    Ok(())
}

/// Fraction of test points whose true transformed label is in the conformal
/// set `{y' : S(p_hat, y') <= q_hat}`. This is the event the marginal
/// guarantee covers. Returns 0 for an empty test set.
pub fn empirical_coverage(probs: &[f64], labels: &[u8], calib: &CalibrationResult) -> Result<f64, ConformalError> {
    check_test(probs, labels)?;
    let mut hit = 0usize;
    for (&p, &y) in probs.iter().zip(labels) {
        if score(p, TransformedLabel::from_label(y)?)? <= calib.q_hat {
            hit += 1;
        }
    }
    Ok(hit as f64 / probs.len().max(1) as f64)
}

/// Fraction of test points whose true transformed label falls inside the
/// interval built around the *predicted* center. Not covered by the
/// guarantee: a misclassified point is only counted once the interval is wide
/// enough to reach the other center.
pub fn center_coverage(probs: &[f64], labels: &[u8], calib: &CalibrationResult) -> Result<f64, ConformalError> {
    check_test(probs, labels)?;
    let mut hit = 0usize;
    for (&p, &y) in probs.iter().zip(labels) {
        let truth = TransformedLabel::from_label(y)?;
        if cci_interval(p, calib)?.contains(truth.y_prime()) {
            hit += 1;
        }
    }
    Ok(hit as f64 / probs.len().max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn calib_with(q: f64) -> CalibrationResult {
        CalibrationResult {
            q_hat: q,
            alpha: 0.1,
            n_cal: 1,
            scores: vec![q],
            quantile_rule: QuantileRule::SplitConformal,
        }
    }

    /// Membership scan over a 1e-5 grid.
    fn grid_interval(center: TransformedLabel, q: f64) -> (f64, f64) {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..=100_000 {
            let p = i as f64 * 1e-5;
            let s = 1.0 + (1.0 - (p - 0.5).abs());
            if (center.y_prime() - p).powi(2) <= q * s {
                lo = lo.min(p);
                hi = hi.max(p);
            }
        }
        (lo, hi)
    }

    #[test]
    fn sigma_values() {
        assert_eq!(sigma(0.5).unwrap(), 2.0);
        assert_eq!(sigma(0.0).unwrap(), 1.5);
        assert_eq!(sigma(1.0).unwrap(), 1.5);
        assert_abs_diff_eq!(sigma(0.9).unwrap(), 1.6, epsilon = 1e-12);
        assert!(sigma(1.2).is_err());
        assert!(sigma(-0.1).is_err());
    }

    #[test]
    fn score_values() {
        assert_eq!(score(0.75, TransformedLabel::POSITIVE).unwrap(), 0.0);
        assert_abs_diff_eq!(score(0.9, TransformedLabel::POSITIVE).unwrap(), 0.0225 / 1.6, epsilon = 1e-12);
        assert_abs_diff_eq!(score(0.5, TransformedLabel::NEGATIVE).unwrap(), 0.03125, epsilon = 1e-12);
    }

    #[test]
    fn calibrate_on_tenths() {
        // score(p, 0.75) for p near 0.75 is monotone in |p - 0.75|, so build
        // the multiset directly instead.
        let scores: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        assert_eq!(quantile_at_rank(&scores, QuantileRule::Empirical.rank(10, 0.1)), 0.9);
        assert_eq!(quantile_at_rank(&scores, QuantileRule::SplitConformal.rank(10, 0.1)), 1.0);
    }

    #[test]
    fn single_point_split_rule_is_unbounded() {
        let c = calibrate(&[0.8], &[1], 0.1, QuantileRule::SplitConformal).unwrap();
        assert!(c.q_hat.is_infinite());
        let iv = cci_interval(0.3, &c).unwrap();
        assert_eq!((iv.lo, iv.hi), (0.0, 1.0));
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"q_hat\":null"));
        let back: CalibrationResult = serde_json::from_str(&json).unwrap();
        assert!(back.q_hat.is_infinite());
    }

    #[test]
    fn equal_scores_give_that_score() {
        let probs = [0.6; 7];
        let labels = [1; 7];
        let c = score(0.6, TransformedLabel::POSITIVE).unwrap();
        for rule in [QuantileRule::Empirical, QuantileRule::SplitConformal] {
            assert_eq!(calibrate(&probs, &labels, 0.2, rule).unwrap().q_hat, c);
        }
    }

    #[test]
    fn calibrate_rejects_bad_input() {
        assert_eq!(
            calibrate(&[], &[], 0.1, QuantileRule::Empirical),
            Err(ConformalError::EmptyCalibration)
        );
        assert!(calibrate(&[0.5], &[1, 0], 0.1, QuantileRule::Empirical).is_err());
        assert!(calibrate(&[0.5], &[1], 0.0, QuantileRule::Empirical).is_err());
        assert!(calibrate(&[0.5], &[2], 0.1, QuantileRule::Empirical).is_err());
    }

    #[test]
    fn rank_absorbs_float_error() {
        // 10 * (1 - 0.3) is 7.000000000000001 in floating point.
        assert_eq!(QuantileRule::Empirical.rank(10, 0.3), 7);
        assert_eq!(QuantileRule::SplitConformal.rank(19, 0.1), 18);
    }

    #[test]
    fn centers() {
        assert_eq!(center_for(0.3), TransformedLabel::NEGATIVE);
        assert_eq!(center_for(0.7), TransformedLabel::POSITIVE);
        assert_eq!(center_for(0.5), TransformedLabel::POSITIVE);
    }

    #[test]
    fn worked_interval() {
        let iv = interval_around(TransformedLabel::POSITIVE, 0.01);
        assert_abs_diff_eq!(iv.lo, 0.61262, epsilon = 1e-5);
        assert_abs_diff_eq!(iv.hi, 0.87738, epsilon = 1e-5);
        assert_abs_diff_eq!(iv.width(), (0.01f64 * 7.01).sqrt(), epsilon = 1e-12);
        let mirror = interval_around(TransformedLabel::NEGATIVE, 0.01);
        assert_abs_diff_eq!(mirror.lo, 0.12262, epsilon = 1e-5);
        assert_abs_diff_eq!(mirror.hi, 0.38738, epsilon = 1e-5);
    }

    #[test]
    fn zero_quantile_is_degenerate() {
        for p in [0.1, 0.5, 0.9] {
            let iv = cci_interval(p, &calib_with(0.0)).unwrap();
            let y = center_for(p).y_prime();
            assert_eq!((iv.lo, iv.hi), (y, y));
        }
    }

    #[test]
    fn interval_matches_grid_on_fixed_cases() {
        for &q in &[0.001, 0.01, 0.03125, 0.04, 0.1, 0.2, 0.5] {
            for c in [TransformedLabel::NEGATIVE, TransformedLabel::POSITIVE] {
                let iv = interval_around(c, q);
                let (glo, ghi) = grid_interval(c, q);
                assert!((iv.lo - glo).abs() <= 1e-3, "q={q} lo {} vs {glo}", iv.lo);
                assert!((iv.hi - ghi).abs() <= 1e-3, "q={q} hi {} vs {ghi}", iv.hi);
            }
        }
    }

    #[test]
    fn naive_examples() {
        let iv = naive_interval(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((iv.lo, iv.hi), (1.0, 1.0));
        let iv = naive_interval(&[0.2, 0.4, 0.6]).unwrap();
        assert_abs_diff_eq!(iv.lo, 0.23670, epsilon = 1e-5);
        assert_abs_diff_eq!(iv.hi, 0.56330, epsilon = 1e-5);
        // nine zeros and a one: mean 0.1, population std 0.3
        let mut trees = vec![0.0; 9];
        trees.push(1.0);
        let iv = naive_interval(&trees).unwrap();
        assert_abs_diff_eq!(iv.lo, 0.0);
        assert_abs_diff_eq!(iv.hi, 0.4, epsilon = 1e-12);
        assert_eq!(naive_interval(&[]), Err(ConformalError::NoTrees));
    }

    #[test]
    fn coverage_edge_cases() {
        let probs = [0.2, 0.9, 0.7];
        let labels = [0, 0, 1];
        assert_eq!(empirical_coverage(&probs, &labels, &calib_with(f64::INFINITY)).unwrap(), 1.0);
        let cov = empirical_coverage(&probs, &labels, &calib_with(0.0)).unwrap();
        assert!(cov < 1.0);
        assert_eq!(center_coverage(&probs, &labels, &calib_with(f64::INFINITY)).unwrap(), 1.0);
        assert_abs_diff_eq!(center_coverage(&probs, &labels, &calib_with(0.0)).unwrap(), 2.0 / 3.0);
    }

    proptest! {
        #[test]
        fn interval_contains_center_and_stays_in_unit(q in 0.0f64..2.0, pos in any::<bool>()) {
            let c = if pos { TransformedLabel::POSITIVE } else { TransformedLabel::NEGATIVE };
            let iv = interval_around(c, q);
            prop_assert!(0.0 <= iv.lo && iv.lo <= c.y_prime() && c.y_prime() <= iv.hi && iv.hi <= 1.0);
        }

        #[test]
        fn intervals_are_mirror_images(q in 0.0f64..0.5) {
            let a = interval_around(TransformedLabel::NEGATIVE, q);
            let b = interval_around(TransformedLabel::POSITIVE, q);
            prop_assert!((a.lo - (1.0 - b.hi)).abs() <= 1e-9);
            prop_assert!((a.hi - (1.0 - b.lo)).abs() <= 1e-9);
        }

        #[test]
        fn larger_quantile_nests(q1 in 0.0f64..0.5, dq in 0.0f64..0.5, pos in any::<bool>()) {
            let c = if pos { TransformedLabel::POSITIVE } else { TransformedLabel::NEGATIVE };
            let small = interval_around(c, q1);
            let big = interval_around(c, q1 + dq);
            prop_assert!(big.lo <= small.lo && small.hi <= big.hi);
        }

        #[test]
        fn endpoints_satisfy_membership(q in 0.0f64..0.5, pos in any::<bool>()) {
            let c = if pos { TransformedLabel::POSITIVE } else { TransformedLabel::NEGATIVE };
            let iv = interval_around(c, q);
            for p in [iv.lo, iv.hi] {
                prop_assert!(score(p, c).unwrap() <= q + 1e-12);
            }
        }
    }
}
