//! Small 3-fold grid search over regularization settings, scored by F1.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{ModelError, ModelKind, ProbModel, TrainConfig};
use crate::rng;

pub const DEFAULT_C_GRID: [f64; 4] = [0.01, 0.1, 1.0, 10.0];
pub const DEFAULT_ALPHA_GRID: [f64; 3] = [1e-4, 1e-3, 1e-2];
pub const DEFAULT_HIDDEN_GRID: [usize; 2] = [25, 50];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub config: TrainConfig,
    pub mean_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best: TrainConfig,
    pub points: Vec<GridPoint>,
}

pub(crate) fn f1_at_half(probs: &[f64], y: &[u8]) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
    for (p, &t) in probs.iter().zip(y) {
        match (*p >= 0.5, t == 1) {
            (true, true) => tp += 1.0,
            (true, false) => fp += 1.0,
            (false, true) => fn_ += 1.0,
            _ => {}
        }
    }
    if tp == 0.0 {
        0.0
    } else {
        2.0 * tp / (2.0 * tp + fp + fn_)
    }
}

/// Seeded partition of `0..n` into `k` nearly equal folds.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::seeded(seed));
    let mut folds = vec![Vec::new(); k];
    for (i, v) in idx.into_iter().enumerate() {
        folds[i % k].push(v);
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    folds
}

fn cv_f1(kind: ModelKind, x: &[Vec<f64>], y: &[u8], names: &[String], cfg: &TrainConfig, folds: &[Vec<usize>]) -> Result<f64, ModelError> {
    let mut total = 0.0;
    for (fi, test) in folds.iter().enumerate() {
        let train: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != fi)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        let xt: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
        let yt: Vec<u8> = train.iter().map(|&i| y[i]).collect();
        let model = ProbModel::fit(kind, &xt, &yt, names, cfg)?;
        let probs: Vec<f64> = test.iter().map(|&i| model.predict_proba(&x[i])).collect::<Result<_, _>>()?;
        let yv: Vec<u8> = test.iter().map(|&i| y[i]).collect();
        total += f1_at_half(&probs, &yv);
    }
    Ok(total / folds.len() as f64)
}

fn search(kind: ModelKind, x: &[Vec<f64>], y: &[u8], names: &[String], candidates: Vec<TrainConfig>, seed: u64) -> Result<GridResult, ModelError> {
    if x.len() < 3 {
        return Err(ModelError::Config("grid search needs at least 3 rows".into()));
    }
    let folds = kfold_indices(x.len(), 3, seed);
    let mut points = Vec::with_capacity(candidates.len());
    for cfg in candidates {
        let mean_f1 = cv_f1(kind, x, y, names, &cfg, &folds)?;
        points.push(GridPoint { config: cfg, mean_f1 });
    }
    // first maximum wins ties
    let best = points
        .iter()
        .fold(None::<&GridPoint>, |acc, p| match acc {
            Some(b) if b.mean_f1 >= p.mean_f1 => Some(b),
            _ => Some(p),
        })
        .expect("non-empty grid")
        .config
        .clone();
    Ok(GridResult { best, points })
}

/// 3-fold search over `C` for logistic regression.
pub fn grid_search_logistic(x: &[Vec<f64>], y: &[u8], names: &[String], base: &TrainConfig, c_grid: &[f64]) -> Result<GridResult, ModelError> {
    let candidates = c_grid
        .iter()
        .map(|&c| {
            let mut cfg = base.clone();
            cfg.logistic.inverse_reg_c = c;
            cfg
        })
        .collect();
    search(ModelKind::Logistic, x, y, names, candidates, base.seed)
}

/// 3-fold search over `(l2_alpha, hidden)` for the MLP.
pub fn grid_search_mlp(
    x: &[Vec<f64>],
    y: &[u8],
    names: &[String],
    base: &TrainConfig,
    alpha_grid: &[f64],
    hidden_grid: &[usize],
) -> Result<GridResult, ModelError> {
    let mut candidates = Vec::new();
    for &a in alpha_grid {
        for &h in hidden_grid {
            let mut cfg = base.clone();
            cfg.mlp.l2_alpha = a;
            cfg.mlp.hidden = h;
            candidates.push(cfg);
        }
    }
    search(ModelKind::Mlp, x, y, names, candidates, base.seed)
}
