//! Acceptance criteria, one PASS/FAIL line each. Tolerances are fixed here;
//! the process exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use cci_core::conformal::{calibrate, cci_interval, interval_around, QuantileRule, TransformedLabel};
use cci_core::decision::{decide, Outcome, RuleFired};
use cci_core::harness::{compare_methods, paired_count, run_experiment, ExperimentConfig, UqMethod};
use cci_core::models::logistic::{self, LogisticParams};
use cci_core::models::mlp::MlpParams;
use cci_core::rng;
use cci_core::synth::{generate, DaysPerParticipant, SynthConfig};
use cci_core::{Dataset, ModelKind, ProbInterval};
use rand::Rng;

type Check = fn() -> Verdict;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn dataset(cfg: &SynthConfig) -> Dataset {
    let rows: Vec<_> = generate(cfg).unwrap().into_iter().flat_map(|p| p.targets).collect();
    Dataset::from_vectors(&rows).unwrap()
}

fn coverage_guarantee() -> Verdict {
    let start = Instant::now();
    let synth = SynthConfig {
        days_per_participant: DaysPerParticipant::Uniform(150),
        ..SynthConfig::default()
    };
    let data = dataset(&synth);
    let cfg = ExperimentConfig {
        quantile_rule: QuantileRule::SplitConformal,
        alpha: 0.1,
        n_runs: 20,
        ..ExperimentConfig::with(ModelKind::Logistic, UqMethod::Cci)
    };
    let report = run_experiment(&data, &cfg).unwrap();
    let min_test = report.runs.iter().map(|r| r.n_test).min().unwrap();
    let mean = report.aggregate.coverage.unwrap().mean;
    let elapsed = start.elapsed();
    verdict(
        min_test >= 100 && mean >= 0.88 && elapsed < Duration::from_secs(60),
        format!("mean coverage {mean:.4} over 20 runs, >= {min_test} test points each, {elapsed:.2?}"),
    )
}

fn oracle_rank(rule: QuantileRule, n: usize, alpha_milli: usize) -> usize {
    let keep = 1000 - alpha_milli;
    match rule {
        QuantileRule::Empirical => (n * keep).div_ceil(1000).max(1),
        QuantileRule::SplitConformal => ((n + 1) * keep).div_ceil(1000),
    }
}

fn random_calibration(r: &mut impl Rng) -> (Vec<f64>, Vec<u8>) {
    let n = r.random_range(1..=200);
    let coarse = r.random_bool(0.3);
    let probs = (0..n)
        .map(|_| if coarse { r.random_range(0..=10) as f64 / 10.0 } else { r.random::<f64>() })
        .collect();
    (probs, (0..n).map(|_| r.random_range(0..=1u8)).collect())
}

fn quantile_oracle() -> Verdict {
    let mut r = rng::seeded(1001);
    let mut mismatches = 0;
    for case in 0..100 {
        let (probs, labels) = random_calibration(&mut r);
        let alpha_milli = if case % 4 == 0 { 100 } else { r.random_range(1..1000) };
        for rule in [QuantileRule::Empirical, QuantileRule::SplitConformal] {
            let c = calibrate(&probs, &labels, alpha_milli as f64 / 1000.0, rule).unwrap();
            let mut sorted = c.scores.clone();
            sorted.sort_by(f64::total_cmp);
            let k = oracle_rank(rule, sorted.len(), alpha_milli);
            let expected = if k > sorted.len() { f64::INFINITY } else { sorted[k - 1] };
            if c.q_hat.to_bits() != expected.to_bits() {
                mismatches += 1;
            }
        }
    }
    verdict(mismatches == 0, format!("{mismatches} mismatches in 100 multisets x 2 rules"))
}

fn grid_interval(yp: f64, q: f64) -> (f64, f64) {
    let member = |p: f64| (yp - p).powi(2) / (2.0 - (p - 0.5).abs()) <= q;
    let mut lo = None;
    let mut hi = 0.0;
    for i in 0..=100_000 {
        let p = i as f64 / 100_000.0;
        if member(p) {
            lo.get_or_insert(p);
            hi = p;
        }
    }
    (lo.unwrap(), hi)
}

fn interval_oracle() -> Verdict {
    let mut r = rng::seeded(1003);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let center = if r.random_bool(0.5) { TransformedLabel::POSITIVE } else { TransformedLabel::NEGATIVE };
        let q = r.random_range(0.0..=0.5);
        let iv = interval_around(center, q);
        let (lo, hi) = grid_interval(center.y_prime(), q);
        worst = worst.max((iv.lo - lo).abs()).max((iv.hi - hi).abs());
    }
    verdict(worst <= 1e-3, format!("max endpoint gap {worst:.2e} on 100 random (center, q_hat)"))
}

fn monotonicity_and_symmetry() -> Verdict {
    let mut r = rng::seeded(1005);
    let mut nest_failures = 0;
    for _ in 0..100 {
        let (probs, labels) = random_calibration(&mut r);
        for rule in [QuantileRule::Empirical, QuantileRule::SplitConformal] {
            let cals: Vec<_> = [0.05, 0.1, 0.2].iter().map(|&a| calibrate(&probs, &labels, a, rule).unwrap()).collect();
            for k in 0..=20 {
                let p = k as f64 / 20.0;
                let ivs: Vec<_> = cals.iter().map(|c| cci_interval(p, c).unwrap()).collect();
                if !ivs.windows(2).all(|w| w[0].lo <= w[1].lo && w[0].hi >= w[1].hi) {
                    nest_failures += 1;
                }
            }
        }
    }
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let q = r.random_range(0.0..=0.5);
        let neg = interval_around(TransformedLabel::NEGATIVE, q);
        let pos = interval_around(TransformedLabel::POSITIVE, q);
        worst = worst.max((neg.lo - (1.0 - pos.hi)).abs()).max((neg.hi - (1.0 - pos.lo)).abs());
    }
    verdict(
        nest_failures == 0 && worst <= 1e-9,
        format!("{nest_failures} nesting failures; max reflection error {worst:.2e}"),
    )
}

fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-6))
        .fold(0.0, f64::max)
}

fn central_difference(theta: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let h = 1e-5;
    (0..theta.len())
        .map(|i| {
            let (mut up, mut down) = (theta.to_vec(), theta.to_vec());
            up[i] += h;
            down[i] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}

fn gradient_checks() -> Verdict {
    let mut r = rng::seeded(1007);
    let problem = |r: &mut rand_chacha::ChaCha8Rng, n: usize, d: usize| {
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.random_range(-2.0..2.0)).collect()).collect();
        let y: Vec<u8> = (0..n).map(|_| r.random_range(0..=1u8)).collect();
        (x, y)
    };
    let (mut log_worst, mut mlp_worst): (f64, f64) = (0.0, 0.0);
    for k in 0..10 {
        let d = r.random_range(2..8);
        let (x, y) = problem(&mut r, 40, d);
        let params = LogisticParams {
            weights: (0..d).map(|_| r.random_range(-1.5..1.5)).collect(),
            bias: r.random_range(-1.0..1.0),
        };
        let c = r.random_range(0.05..2.0);
        let numeric = central_difference(&params.flatten(), |t| logistic::objective(&LogisticParams::unflatten(t), &x, &y, c));
        log_worst = log_worst.max(max_relative_error(&logistic::gradient(&params, &x, &y, c), &numeric));

        let (d, hidden) = (r.random_range(2..6), r.random_range(3..12));
        let (x, y) = problem(&mut r, 30, d);
        let net = MlpParams::init(d, hidden, 500 + k);
        let a = r.random_range(0.0..0.01);
        let numeric = central_difference(&net.flatten(), |t| net.with_flat(t).objective(&x, &y, a));
        mlp_worst = mlp_worst.max(max_relative_error(&net.gradient(&x, &y, a), &numeric));
    }
    verdict(
        log_worst <= 1e-5 && mlp_worst <= 1e-4,
        format!("max relative error logistic {log_worst:.2e} (<= 1e-5), mlp {mlp_worst:.2e} (<= 1e-4)"),
    )
}

fn golden_features() -> Verdict {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/golden");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("features.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_cci"))
        .arg("features")
        .arg("--logs")
        .arg(fixtures.join("logs"))
        .arg("--labels")
        .arg(fixtures.join("labels.csv"))
        .arg("--output")
        .arg(&out)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    let got = std::fs::read(&out).unwrap_or_default();
    let want = std::fs::read(fixtures.join("features.csv")).unwrap();
    let rows = cci_core::features::read_feature_csv(got.as_slice()).ok();
    let worked = rows.as_ref().and_then(|r| r.last()).is_some_and(|d| {
        d.f01_daily_bathroom_visits == 2
            && (d.f02_avg_visit_duration_min - 1.0).abs() <= 1e-6
            && (d.f08_movement_entropy - 0.8113).abs() <= 1e-4
    });
    verdict(
        status.status.success() && got == want && worked,
        format!(
            "fixture CSV {} golden file; worked examples (f01 = 2, f02 = 1.0, entropy 0.8113) {}",
            if got == want { "matches" } else { "differs from" },
            if worked { "hold" } else { "fail" }
        ),
    )
}

fn default_methods(n_runs: usize) -> Vec<ExperimentConfig> {
    [
        (ModelKind::RandomGuess, UqMethod::None),
        (ModelKind::Logistic, UqMethod::None),
        (ModelKind::Forest, UqMethod::Naive),
        (ModelKind::Logistic, UqMethod::Cci),
    ]
    .into_iter()
    .map(|(m, u)| ExperimentConfig {
        n_runs,
        ..ExperimentConfig::with(m, u)
    })
    .collect()
}

fn directional_replication() -> Verdict {
    let start = Instant::now();
    let data = dataset(&SynthConfig::default());
    let entries: Vec<_> = default_methods(20).into_iter().map(|m| (&data, m)).collect();
    let cmp = compare_methods(&entries).unwrap();
    let (naive, cci) = (cmp.get("naive").unwrap(), cmp.get("cci").unwrap());
    let abst = paired_count(cci, naive, |c, n| c.abstention_proportion < n.abstention_proportion);
    let width = paired_count(cci, naive, |c, n| c.width_all < n.width_all);
    let elapsed = start.elapsed();
    verdict(
        abst >= 16 && width >= 16 && elapsed < Duration::from_secs(300),
        format!(
            "cci abstains less in {abst}/20 runs, is narrower in {width}/20 (need 16 each); \
             abstention cci {} vs naive {}, width cci {} vs naive {}; {elapsed:.2?}",
            cci.aggregate.abstention_proportion,
            naive.aggregate.abstention_proportion,
            cci.aggregate.width_all,
            naive.aggregate.width_all
        ),
    )
}

fn baseline_sanity() -> Verdict {
    let data = dataset(&SynthConfig::default());
    let entries: Vec<_> = default_methods(20).into_iter().take(2).map(|m| (&data, m)).collect();
    let cmp = compare_methods(&entries).unwrap();
    let random = cmp.get("random_guess").unwrap().aggregate.accuracy.mean;
    let base = cmp.get("base").unwrap().aggregate.accuracy.mean;
    verdict(
        (0.35..=0.65).contains(&random) && base >= random + 0.10,
        format!("random guess accuracy {random:.3}, base logistic {base:.3}"),
    )
}

fn decision_totality() -> Verdict {
    let mut r = rng::seeded(1009);
    let mut bad = 0;
    let mut fired: BTreeMap<String, usize> = BTreeMap::new();
    for _ in 0..10_000 {
        let pick = |r: &mut rand_chacha::ChaCha8Rng| match r.random_range(0..10) {
            0 => 0.5,
            1 => 0.0,
            2 => 1.0,
            _ => r.random::<f64>(),
        };
        let (a, b) = (pick(&mut r), pick(&mut r));
        let (lo, hi) = if r.random_bool(0.05) { (a, a) } else { (a.min(b), a.max(b)) };
        let alpha = if r.random_bool(0.5) { 0.1 } else { r.random_range(0.01..0.99) };
        let d = decide(ProbInterval::new(lo, hi), alpha);

        let p_right = if hi > lo { ((hi - 0.5) / (hi - lo)).clamp(0.0, 1.0) } else if lo >= 0.5 { 1.0 } else { 0.0 };
        let preds = [
            (RuleFired::LowerBound, Outcome::Uti, lo >= 0.5),
            (RuleFired::UpperBound, Outcome::NoUti, hi < 0.5),
            (RuleFired::RightTail, Outcome::Uti, p_right >= 1.0 - alpha),
            (RuleFired::LeftTail, Outcome::NoUti, 1.0 - p_right >= 1.0 - alpha),
            (RuleFired::Abstain, Outcome::Abstain, true),
        ];
        let (rule, outcome, _) = preds.iter().find(|p| p.2).copied().unwrap();
        if d.rule_fired != rule || d.outcome != outcome {
            bad += 1;
        }
        *fired.entry(format!("{:?}", d.rule_fired)).or_default() += 1;
    }
    verdict(bad == 0, format!("{bad} inconsistent decisions in 10000; rules fired {fired:?}"))
}

fn files_under(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn end_to_end_determinism() -> Verdict {
    let execute = || -> Result<BTreeMap<String, Vec<u8>>, String> {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("cfg.json");
        std::fs::write(&cfg, r#"{"out_dir": "out", "synth": {"seed": 7}, "experiment": {"n_runs": 5}}"#).unwrap();
        for cmd in ["generate", "features", "run", "plot"] {
            let out = Command::new(env!("CARGO_BIN_EXE_cci")).arg("--config").arg(&cfg).arg(cmd).output().unwrap();
            if !out.status.success() {
                return Err(format!("`cci {cmd}` failed: {}", String::from_utf8_lossy(&out.stderr)));
            }
        }
        Ok(files_under(&dir.path().join("out")))
    };
    match (execute(), execute()) {
        (Ok(a), Ok(b)) => {
            let svgs = a.keys().filter(|k| k.ends_with(".svg")).count();
            let same = a == b;
            verdict(
                same && svgs > 0 && a.contains_key("report.json"),
                format!("{} files ({svgs} SVG) {}", a.len(), if same { "byte-identical" } else { "differ" }),
            )
        }
        (Err(e), _) | (_, Err(e)) => verdict(false, e),
    }
}

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("coverage guarantee", coverage_guarantee),
        ("quantile oracle", quantile_oracle),
        ("interval oracle", interval_oracle),
        ("monotonicity and symmetry", monotonicity_and_symmetry),
        ("gradient checks", gradient_checks),
        ("feature golden fixtures", golden_features),
        ("directional replication", directional_replication),
        ("baseline sanity", baseline_sanity),
        ("decision-rule totality", decision_totality),
        ("end-to-end determinism", end_to_end_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!("{} criterion {:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
