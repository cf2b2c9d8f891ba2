//! Bagged CART trees with Gini splits and Laplace-smoothed leaves.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ForestConfig;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        prob: f64,
    },
}

/// A fitted tree; `nodes[0]` is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { prob } => return *prob,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }
}

/// `(pos + 1) / (n + 2)`
pub fn laplace(pos: usize, n: usize) -> f64 {
    (pos as f64 + 1.0) / (n as f64 + 2.0)
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

fn best_split(x: &[Vec<f64>], y: &[u8], idx: &[usize], min_leaf: usize) -> Option<SplitChoice> {
    let n = idx.len();
    let total_pos = idx.iter().filter(|&&i| y[i] == 1).count();
    let d = x[idx[0]].len();
    let mut best: Option<SplitChoice> = None;
    let mut order = idx.to_vec();
    #[allow(clippy::needless_range_loop)] // f indexes columns of several rows
    for f in 0..d {
        order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        let mut left_pos = 0;
        for k in 0..n - 1 {
            if y[order[k]] == 1 {
                left_pos += 1;
            }
            let (lo, hi) = (x[order[k]][f], x[order[k + 1]][f]);
            if lo == hi {
                continue;
            }
            let n_left = k + 1;
            let n_right = n - n_left;
            if n_left < min_leaf || n_right < min_leaf {
                continue;
            }
            let impurity = (n_left as f64 * gini(left_pos, n_left)
                + n_right as f64 * gini(total_pos - left_pos, n_right))
                / n as f64;
            if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                best = Some(SplitChoice {
                    feature: f,
                    threshold: 0.5 * (lo + hi),
                    impurity,
                });
            }
        }
    }
    best
}

fn grow(
    x: &[Vec<f64>],
    y: &[u8],
    idx: &[usize],
    depth: usize,
    cfg: &ForestConfig,
    nodes: &mut Vec<Node>,
) -> usize {
    let me = nodes.len();
    let pos = idx.iter().filter(|&&i| y[i] == 1).count();
    nodes.push(Node::Leaf {
        prob: laplace(pos, idx.len()),
    });
    let pure = pos == 0 || pos == idx.len();
    let depth_ok = cfg.max_depth.is_none_or(|m| depth < m);
    if pure || !depth_ok || idx.len() < 2 * cfg.min_leaf.max(1) {
        return me;
    }
    let Some(split) = best_split(x, y, idx, cfg.min_leaf.max(1)) else {
        return me;
    };
    let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[i][split.feature] <= split.threshold);
    let left = grow(x, y, &l, depth + 1, cfg, nodes);
    let right = grow(x, y, &r, depth + 1, cfg, nodes);
    nodes[me] = Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left,
        right,
    };
    me
}

pub fn fit_tree(x: &[Vec<f64>], y: &[u8], idx: &[usize], cfg: &ForestConfig) -> Tree {
    let mut nodes = Vec::new();
    grow(x, y, idx, 0, cfg, &mut nodes);
    Tree { nodes }
}

/// Fits `n_trees` trees in parallel; tree `t` uses a seed derived from `(seed, t)`.
pub fn fit(x: &[Vec<f64>], y: &[u8], cfg: &ForestConfig, seed: u64) -> Vec<Tree> {
    let n = x.len();
    (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let idx: Vec<usize> = if cfg.bootstrap {
                let mut r = rng::stream(seed, t as u64);
                (0..n).map(|_| r.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            fit_tree(x, y, &idx, cfg)
        })
        .collect()
}
