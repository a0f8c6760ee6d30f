//! Three-class multinomial logistic regression over hashed features, trained
//! by full-batch gradient descent. Shared by the independent sequence labeler
//! and the expression classifier.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::features::FeatureVector;
use crate::math::{cross_entropy, softmax3};

/// One weighted training instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: FeatureVector,
    pub target: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSoftmax {
    pub dim: usize,
    /// Row-major `3 x dim`.
    pub weights: Vec<f64>,
    pub bias: [f64; 3],
}

impl LinearSoftmax {
    pub fn zeros(dim: usize) -> Self {
        LinearSoftmax { dim, weights: vec![0.0; 3 * dim], bias: [0.0; 3] }
    }

    pub fn uniform<R: Rng>(dim: usize, scale: f64, rng: &mut R) -> Self {
        let mut draw = || rng.random_range(-scale..scale);
        let weights = (0..3 * dim).map(|_| draw()).collect();
        let bias = [draw(), draw(), draw()];
        LinearSoftmax { dim, weights, bias }
    }

    pub fn n_params(&self) -> usize {
        self.weights.len() + 3
    }

    /// Weights then biases.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.weights.clone();
        v.extend_from_slice(&self.bias);
        v
    }

    pub fn from_flat(dim: usize, flat: &[f64]) -> Option<Self> {
        if flat.len() != 3 * dim + 3 {
            return None;
        }
        let weights = flat[..3 * dim].to_vec();
        let bias = [flat[3 * dim], flat[3 * dim + 1], flat[3 * dim + 2]];
        Some(LinearSoftmax { dim, weights, bias })
    }

    pub fn scores(&self, x: &FeatureVector) -> [f64; 3] {
        let mut s = self.bias;
        for &(i, w) in &x.entries {
            let i = i as usize;
            for (c, sc) in s.iter_mut().enumerate() {
                *sc += self.weights[c * self.dim + i] * w;
            }
        }
        s
    }

    pub fn probs(&self, x: &FeatureVector) -> [f64; 3] {
        softmax3(self.scores(x))
    }

    /// Weighted mean cross-entropy plus `l2 * |W|^2` (biases unpenalized).
    /// Returns the objective and its gradient in flat layout.
    pub fn objective(&self, data: &[Sample], l2: f64) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.n_params()];
        let total_w: f64 = data.iter().map(|s| s.weight).sum();
        let mut loss = 0.0;
        if total_w > 0.0 {
            for s in data {
                let p = self.probs(&s.x);
                let scale = s.weight / total_w;
                loss += scale * cross_entropy(&p, s.target);
                for c in 0..3 {
                    let d = scale * (p[c] - f64::from(u8::from(c == s.target)));
                    if d == 0.0 {
                        continue;
                    }
                    for &(i, w) in &s.x.entries {
                        grad[c * self.dim + i as usize] += d * w;
                    }
                    grad[3 * self.dim + c] += d;
                }
            }
        }
        if l2 > 0.0 {
            let mut sq = 0.0;
            for (g, w) in grad.iter_mut().zip(&self.weights) {
                sq += w * w;
                *g += 2.0 * l2 * w;
            }
            loss += l2 * sq;
        }
        (loss, grad)
    }

    pub fn step(&mut self, grad: &[f64], lr: f64) {
        for (w, g) in self.weights.iter_mut().zip(grad) {
            *w -= lr * g;
        }
        for c in 0..3 {
            self.bias[c] -= lr * grad[3 * self.dim + c];
        }
    }

    /// Runs `epochs` gradient steps; returns the objective before each step
    /// followed by the final objective.
    pub fn fit(&mut self, data: &[Sample], lr: f64, epochs: usize, l2: f64) -> Vec<f64> {
        let mut history = Vec::with_capacity(epochs + 1);
        for _ in 0..epochs {
            let (loss, grad) = self.objective(data, l2);
            history.push(loss);
            self.step(&grad, lr);
        }
        history.push(self.objective(data, l2).0);
        history
    }
}
