//! L2-regularized logistic regression fitted by full-batch gradient descent.
//!
//! Objective (mean form, same minimizer as `C·Σ loss + ½‖w‖²`):
//!
//! ```text
//! J(w, b) = (1/n) Σ bce(σ(w·x_i + b), y_i) + ‖w‖² / (2·C·n)
//! ```
//!
//! The intercept is not penalized.

use serde::{Deserialize, Serialize};

use super::{clip_prob, sigmoid, LogisticConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogisticParams {
    pub fn zeros(d: usize) -> Self {
        LogisticParams {
            weights: vec![0.0; d],
            bias: 0.0,
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let z: f64 = self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias;
        sigmoid(z)
    }

    /// `[w..., b]`
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = self.weights.clone();
        v.push(self.bias);
        v
    }

    pub fn unflatten(v: &[f64]) -> Self {
        let (w, b) = v.split_at(v.len() - 1);
        LogisticParams {
            weights: w.to_vec(),
            bias: b[0],
        }
    }
}

pub(crate) fn bce(p: f64, y: u8) -> f64 {
    let p = clip_prob(p);
    if y == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

pub fn objective(params: &LogisticParams, x: &[Vec<f64>], y: &[u8], inverse_reg_c: f64) -> f64 {
    let n = x.len() as f64;
    let data: f64 = x.iter().zip(y).map(|(r, &t)| bce(params.predict(r), t)).sum::<f64>() / n;
    let l2: f64 = params.weights.iter().map(|w| w * w).sum::<f64>();
    data + l2 / (2.0 * inverse_reg_c * n)
}

/// Analytic gradient of [`objective`], flattened as `[dw..., db]`.
pub fn gradient(params: &LogisticParams, x: &[Vec<f64>], y: &[u8], inverse_reg_c: f64) -> Vec<f64> {
    let n = x.len() as f64;
    let d = params.weights.len();
    let mut g = vec![0.0; d + 1];
    for (r, &t) in x.iter().zip(y) {
        let resid = params.predict(r) - t as f64;
        for (gj, v) in g.iter_mut().zip(r) {
            *gj += resid * v;
        }
        g[d] += resid;
    }
    g.iter_mut().for_each(|v| *v /= n);
    for (gj, w) in g.iter_mut().zip(&params.weights) {
        *gj += w / (inverse_reg_c * n);
    }
    g
}

/// Gradient descent with step `1/L`, where `L` bounds the objective's
/// curvature: `¼·mean‖[x,1]‖² + 1/(C·n)`.
pub fn fit(x: &[Vec<f64>], y: &[u8], cfg: &LogisticConfig) -> (LogisticParams, usize) {
    let n = x.len() as f64;
    let d = x.first().map_or(0, Vec::len);
    let mean_sq: f64 = x.iter().map(|r| 1.0 + r.iter().map(|v| v * v).sum::<f64>()).sum::<f64>() / n;
    let lipschitz = 0.25 * mean_sq + 1.0 / (cfg.inverse_reg_c * n);
    let step = 1.0 / lipschitz;

    let mut params = LogisticParams::zeros(d);
    for iter in 0..cfg.max_iters {
        let g = gradient(&params, x, y, cfg.inverse_reg_c);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < cfg.tol {
            return (params, iter);
        }
        for (w, gj) in params.weights.iter_mut().zip(&g) {
            *w -= step * gj;
        }
        params.bias -= step * g[d];
    }
    (params, cfg.max_iters)
}
