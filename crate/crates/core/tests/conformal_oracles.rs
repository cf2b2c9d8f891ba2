//! Brute-force oracles for the conformal quantile and the interval geometry.

use cci_core::conformal::{calibrate, cci_interval, interval_around, score, QuantileRule, TransformedLabel};
use cci_core::rng;
use rand::Rng;

/// Rank by integer arithmetic with alpha given in thousandths.
fn oracle_rank(rule: QuantileRule, n: usize, alpha_milli: usize) -> usize {
    let keep = 1000 - alpha_milli;
    match rule {
        QuantileRule::Empirical => (n * keep).div_ceil(1000).max(1),
        QuantileRule::SplitConformal => ((n + 1) * keep).div_ceil(1000),
    }
}

fn random_calibration(r: &mut impl Rng) -> (Vec<f64>, Vec<u8>) {
    let n = r.random_range(1..=200);
    // Coarse grids force ties among scores.
    let coarse = r.random_bool(0.3);
    let probs = (0..n)
        .map(|_| {
            if coarse {
                r.random_range(0..=10) as f64 / 10.0
            } else {
                r.random::<f64>()
            }
        })
        .collect();
    let labels = (0..n).map(|_| r.random_range(0..=1u8)).collect();
    (probs, labels)
}

#[test]
fn quantile_matches_sorted_rank_oracle() {
    let mut r = rng::seeded(2024);
    for case in 0..100 {
        let (probs, labels) = random_calibration(&mut r);
        let alpha_milli = if case % 4 == 0 { 100 } else { r.random_range(1..1000) };
        let alpha = alpha_milli as f64 / 1000.0;
        for rule in [QuantileRule::Empirical, QuantileRule::SplitConformal] {
            let c = calibrate(&probs, &labels, alpha, rule).unwrap();
            let mut sorted = c.scores.clone();
            sorted.sort_by(f64::total_cmp);
            let k = oracle_rank(rule, sorted.len(), alpha_milli);
            let expected = if k > sorted.len() { f64::INFINITY } else { sorted[k - 1] };
            assert_eq!(
                c.q_hat.to_bits(),
                expected.to_bits(),
                "case {case} rule {rule} n {} alpha {alpha}",
                sorted.len()
            );
            if rule == QuantileRule::Empirical {
                let covered = sorted.iter().filter(|&&s| s <= c.q_hat).count();
                assert!(covered as f64 >= (1.0 - alpha) * sorted.len() as f64 - 1e-9);
            }
        }
    }
}

#[test]
fn scores_follow_the_formula() {
    let mut r = rng::seeded(7);
    for _ in 0..1000 {
        let p: f64 = r.random();
        let y = r.random_range(0..=1u8);
        let yp = 0.25 + 0.5 * y as f64;
        let expected = (yp - p).powi(2) / (2.0 - (p - 0.5).abs());
        let got = score(p, TransformedLabel::from_label(y).unwrap()).unwrap();
        assert!((got - expected).abs() <= 1e-15, "p {p} y {y}");
    }
}

/// Smallest and largest grid point p = i / 100000 with S(p, y') <= q, checking
/// that the members form one contiguous run.
fn grid_interval(yp: f64, q: f64) -> (f64, f64) {
    let member = |p: f64| (yp - p).powi(2) / (2.0 - (p - 0.5).abs()) <= q;
    let pts: Vec<usize> = (0..=100_000).filter(|&i| member(i as f64 / 100_000.0)).collect();
    let (first, last) = (pts[0], *pts.last().unwrap());
    assert_eq!(pts.len(), last - first + 1, "membership is not contiguous for y' {yp} q {q}");
    (first as f64 / 100_000.0, last as f64 / 100_000.0)
}

#[test]
fn analytic_interval_matches_grid_oracle() {
    let mut r = rng::seeded(11);
    for _ in 0..100 {
        let positive = r.random_bool(0.5);
        let q = r.random_range(0.0..=0.5);
        let center = if positive { TransformedLabel::POSITIVE } else { TransformedLabel::NEGATIVE };
        let iv = interval_around(center, q);
        let (lo, hi) = grid_interval(center.y_prime(), q);
        assert!((iv.lo - lo).abs() <= 1e-3 && (iv.hi - hi).abs() <= 1e-3, "q {q}: [{}, {}] vs grid [{lo}, {hi}]", iv.lo, iv.hi);
    }
}

#[test]
fn worked_interval_example() {
    let iv = interval_around(TransformedLabel::POSITIVE, 0.01);
    assert!((iv.lo - 0.6126).abs() <= 1e-3 && (iv.hi - 0.8774).abs() <= 1e-3);
    let (lo, hi) = grid_interval(0.75, 0.01);
    assert!((iv.lo - lo).abs() <= 1e-3 && (iv.hi - hi).abs() <= 1e-3);
}

#[test]
fn smaller_alpha_gives_nested_wider_intervals() {
    let mut r = rng::seeded(5);
    for _ in 0..50 {
        let (probs, labels) = random_calibration(&mut r);
        for rule in [QuantileRule::Empirical, QuantileRule::SplitConformal] {
            let cals: Vec<_> = [0.05, 0.1, 0.2].iter().map(|&a| calibrate(&probs, &labels, a, rule).unwrap()).collect();
            assert_eq!(cals[0].scores, cals[2].scores);
            assert!(cals[0].q_hat >= cals[1].q_hat && cals[1].q_hat >= cals[2].q_hat);
            for p in [0.0, 0.1, 0.3, 0.49, 0.5, 0.51, 0.7, 0.95, 1.0] {
                let ivs: Vec<_> = cals.iter().map(|c| cci_interval(p, c).unwrap()).collect();
                for w in ivs.windows(2) {
                    assert!(w[0].lo <= w[1].lo && w[0].hi >= w[1].hi, "p {p}: {:?} does not contain {:?}", w[0], w[1]);
                }
            }
        }
    }
}

#[test]
fn class_centers_give_mirrored_intervals() {
    let mut r = rng::seeded(9);
    for _ in 0..1000 {
        let q = r.random_range(0.0..=0.5);
        let neg = interval_around(TransformedLabel::NEGATIVE, q);
        let pos = interval_around(TransformedLabel::POSITIVE, q);
        assert!((neg.lo - (1.0 - pos.hi)).abs() <= 1e-9 && (neg.hi - (1.0 - pos.lo)).abs() <= 1e-9, "q {q}");
    }
}
