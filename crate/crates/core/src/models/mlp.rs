//! One-hidden-layer ReLU network with a sigmoid output, trained by
//! full-batch gradient descent at a constant learning rate.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::logistic::bce;
use super::{sigmoid, MlpConfig};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub inputs: usize,
    pub hidden: usize,
    /// Row-major `hidden × inputs`.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl MlpParams {
    /// Glorot-uniform weights, zero biases.
    pub fn init(inputs: usize, hidden: usize, seed: u64) -> Self {
        let mut r = rng::seeded(seed);
        let b1 = (6.0 / (inputs + hidden) as f64).sqrt();
        let b2 = (6.0 / (hidden + 1) as f64).sqrt();
        MlpParams {
            inputs,
            hidden,
            w1: (0..inputs * hidden).map(|_| r.random_range(-b1..b1)).collect(),
            b1: vec![0.0; hidden],
            w2: (0..hidden).map(|_| r.random_range(-b2..b2)).collect(),
            b2: 0.0,
        }
    }

    fn hidden_pre(&self, x: &[f64]) -> Vec<f64> {
        (0..self.hidden)
            .map(|h| {
                let row = &self.w1[h * self.inputs..(h + 1) * self.inputs];
                row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b1[h]
            })
            .collect()
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let z: f64 = self
            .hidden_pre(x)
            .iter()
            .zip(&self.w2)
            .map(|(a, w)| a.max(0.0) * w)
            .sum::<f64>()
            + self.b2;
        sigmoid(z)
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.w1.len() + 2 * self.hidden + 1);
        v.extend(&self.w1);
        v.extend(&self.b1);
        v.extend(&self.w2);
        v.push(self.b2);
        v
    }

    pub fn with_flat(&self, v: &[f64]) -> Self {
        let n1 = self.w1.len();
        let h = self.hidden;
        MlpParams {
            inputs: self.inputs,
            hidden: h,
            w1: v[..n1].to_vec(),
            b1: v[n1..n1 + h].to_vec(),
            w2: v[n1 + h..n1 + 2 * h].to_vec(),
            b2: v[n1 + 2 * h],
        }
    }

    /// Mean cross-entropy plus `alpha/(2n)·(‖W1‖² + ‖w2‖²)`.
    pub fn objective(&self, x: &[Vec<f64>], y: &[u8], alpha: f64) -> f64 {
        let n = x.len() as f64;
        let data = x.iter().zip(y).map(|(r, &t)| bce(self.predict(r), t)).sum::<f64>() / n;
        let l2 = self.w1.iter().chain(&self.w2).map(|w| w * w).sum::<f64>();
        data + alpha * l2 / (2.0 * n)
    }

    /// Backpropagated gradient of [`Self::objective`], flattened like [`Self::flatten`].
    pub fn gradient(&self, x: &[Vec<f64>], y: &[u8], alpha: f64) -> Vec<f64> {
        let n = x.len() as f64;
        let (d, h) = (self.inputs, self.hidden);
        let mut gw1 = vec![0.0; d * h];
        let mut gb1 = vec![0.0; h];
        let mut gw2 = vec![0.0; h];
        let mut gb2 = 0.0;
        for (r, &t) in x.iter().zip(y) {
            let pre = self.hidden_pre(r);
            let z: f64 = pre.iter().zip(&self.w2).map(|(a, w)| a.max(0.0) * w).sum::<f64>() + self.b2;
            let dz = (sigmoid(z) - t as f64) / n;
            gb2 += dz;
            for k in 0..h {
                if pre[k] > 0.0 {
                    gw2[k] += dz * pre[k];
                    let da = dz * self.w2[k];
                    gb1[k] += da;
                    for (g, v) in gw1[k * d..(k + 1) * d].iter_mut().zip(r) {
                        *g += da * v;
                    }
                }
            }
        }
        for (g, w) in gw1.iter_mut().zip(&self.w1) {
            *g += alpha * w / n;
        }
        for (g, w) in gw2.iter_mut().zip(&self.w2) {
            *g += alpha * w / n;
        }
        let mut out = gw1;
        out.extend(gb1);
        out.extend(gw2);
        out.push(gb2);
        out
    }
}

/// Stops when the objective improves by less than `tol` for 10 epochs in a row.
pub fn fit(x: &[Vec<f64>], y: &[u8], cfg: &MlpConfig, seed: u64) -> (MlpParams, usize) {
    let d = x.first().map_or(0, Vec::len);
    let mut params = MlpParams::init(d, cfg.hidden, seed);
    let mut flat = params.flatten();
    let mut best = params.objective(x, y, cfg.l2_alpha);
    let mut stalled = 0;
    for epoch in 0..cfg.max_epochs {
        let g = params.gradient(x, y, cfg.l2_alpha);
        for (p, gi) in flat.iter_mut().zip(&g) {
            *p -= cfg.learning_rate * gi;
        }
        params = params.with_flat(&flat);
        let loss = params.objective(x, y, cfg.l2_alpha);
        if loss > best - cfg.tol {
            stalled += 1;
            if stalled >= 10 {
                return (params, epoch + 1);
            }
        } else {
            stalled = 0;
        }
        best = best.min(loss);
    }
    (params, cfg.max_epochs)
}
