//! Three-way decisions from probability intervals, and the abstention-aware
//! metrics used to compare methods.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conformal::ProbInterval;
use crate::features::daily::mean_std;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "UTI")]
    Uti,
    #[serde(rename = "NO_UTI")]
    NoUti,
    #[serde(rename = "ABSTAIN")]
    Abstain,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Uti => "UTI",
            Outcome::NoUti => "NO_UTI",
            Outcome::Abstain => "ABSTAIN",
        }
    }

    pub fn parse(s: &str) -> Option<Outcome> {
        match s {
            "UTI" => Some(Outcome::Uti),
            "NO_UTI" => Some(Outcome::NoUti),
            "ABSTAIN" => Some(Outcome::Abstain),
            _ => None,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleFired {
    LowerBound,
    UpperBound,
    RightTail,
    LeftTail,
    Abstain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalDecision {
    pub interval: ProbInterval,
    pub outcome: Outcome,
    pub p_left: f64,
    pub p_right: f64,
    pub rule_fired: RuleFired,
}

/// Share of the interval on each side of 0.5, treating it as uniform mass.
/// A zero-width interval puts all its mass on the side it sits on (0.5 counts
/// as the right side).
pub fn tail_masses(iv: &ProbInterval) -> (f64, f64) {
    let w = iv.width();
    let p_right = if w > 0.0 {
        ((iv.hi - 0.5) / w).clamp(0.0, 1.0)
    } else if iv.lo >= 0.5 {
        1.0
    } else {
        0.0
    };
    (1.0 - p_right, p_right)
}

/// Bound checks first (lower bound at or above 0.5, upper bound below it),
/// then tail checks against `1 - alpha`.
pub fn decide(interval: ProbInterval, alpha: f64) -> IntervalDecision {
    let (p_left, p_right) = tail_masses(&interval);
    let need = 1.0 - alpha;
    let (outcome, rule_fired) = if interval.lo >= 0.5 {
        (Outcome::Uti, RuleFired::LowerBound)
    } else if interval.hi < 0.5 {
        (Outcome::NoUti, RuleFired::UpperBound)
    } else if p_right >= need {
        (Outcome::Uti, RuleFired::RightTail)
    } else if p_left >= need {
        (Outcome::NoUti, RuleFired::LeftTail)
    } else {
        (Outcome::Abstain, RuleFired::Abstain)
    };
    IntervalDecision {
        interval,
        outcome,
        p_left,
        p_right,
        rule_fired,
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DecisionError {
    #[error("{decisions} decisions but {labels} labels")]
    LengthMismatch { decisions: usize, labels: usize },
    #[error("no reports to aggregate")]
    NoReports,
}

/// Counts over non-abstained predictions, UTI as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Ratio with 0 for an empty denominator.
    fn ratio(num: usize, den: usize) -> f64 {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    }

    pub fn accuracy(&self) -> f64 {
        Self::ratio(self.tp + self.tn, self.total())
    }

    pub fn precision(&self) -> f64 {
        Self::ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        Self::ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub n_decided: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when every prediction abstained; the classification metrics are then 0.
    pub undefined: bool,
    pub abstention_proportion: f64,
    /// Mean width over all predictions, abstentions included.
    pub width_all: f64,
    /// Mean width over non-abstained predictions only.
    pub width_decided: f64,
    pub coverage: Option<f64>,
    pub center_coverage: Option<f64>,
    pub confusion: ConfusionMatrix,
}

pub fn evaluate(decisions: &[IntervalDecision], labels: &[u8]) -> Result<EvalReport, DecisionError> {
    if decisions.len() != labels.len() {
        return Err(DecisionError::LengthMismatch {
            decisions: decisions.len(),
            labels: labels.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    let mut width_all = 0.0;
    let mut width_decided = 0.0;
    for (d, &y) in decisions.iter().zip(labels) {
        let w = d.interval.width();
        width_all += w;
        match (d.outcome, y == 1) {
            (Outcome::Abstain, _) => continue,
            (Outcome::Uti, true) => cm.tp += 1,
            (Outcome::Uti, false) => cm.fp += 1,
            (Outcome::NoUti, true) => cm.fn_ += 1,
            (Outcome::NoUti, false) => cm.tn += 1,
        }
        width_decided += w;
    }
    let n = decisions.len();
    let n_decided = cm.total();
    let mean = |sum: f64, k: usize| if k == 0 { 0.0 } else { sum / k as f64 };
    Ok(EvalReport {
        n,
        n_decided,
        accuracy: cm.accuracy(),
        precision: cm.precision(),
        recall: cm.recall(),
        f1: cm.f1(),
        undefined: n_decided == 0,
        abstention_proportion: mean((n - n_decided) as f64, n),
        width_all: mean(width_all, n),
        width_decided: mean(width_decided, n_decided),
        coverage: None,
        center_coverage: None,
        confusion: cm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub mean: f64,
    /// Population standard deviation across runs.
    pub std: f64,
}

impl MetricStats {
    pub fn of(values: &[f64]) -> Self {
        let (mean, std) = mean_std(values);
        MetricStats { mean, std }
    }
}

impl fmt::Display for MetricStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2} ± {:.2}", self.mean, self.std)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub runs: usize,
    pub undefined_runs: usize,
    pub accuracy: MetricStats,
    pub precision: MetricStats,
    pub recall: MetricStats,
    pub f1: MetricStats,
    pub abstention_proportion: MetricStats,
    pub width_all: MetricStats,
    pub width_decided: MetricStats,
    pub coverage: Option<MetricStats>,
    pub center_coverage: Option<MetricStats>,
}

pub fn aggregate(reports: &[EvalReport]) -> Result<AggregateReport, DecisionError> {
    if reports.is_empty() {
        return Err(DecisionError::NoReports);
    }
    let stat = |f: fn(&EvalReport) -> f64| MetricStats::of(&reports.iter().map(f).collect::<Vec<_>>());
    let opt_stat = |f: fn(&EvalReport) -> Option<f64>| {
        reports
            .iter()
            .map(f)
            .collect::<Option<Vec<f64>>>()
            .map(|v| MetricStats::of(&v))
    };
    Ok(AggregateReport {
        runs: reports.len(),
        undefined_runs: reports.iter().filter(|r| r.undefined).count(),
        accuracy: stat(|r| r.accuracy),
        precision: stat(|r| r.precision),
        recall: stat(|r| r.recall),
        f1: stat(|r| r.f1),
        abstention_proportion: stat(|r| r.abstention_proportion),
        width_all: stat(|r| r.width_all),
        width_decided: stat(|r| r.width_decided),
        coverage: opt_stat(|r| r.coverage),
        center_coverage: opt_stat(|r| r.center_coverage),
    })
}
