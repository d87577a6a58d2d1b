//! Logistic regression by full-batch gradient descent on the log-loss.
//! Two classes use a single sigmoid output; more use a softmax layer.

use super::{dot, sigmoid, softmax, softplus};

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticParams {
    /// One row per output: a single row for binary problems, else one per class.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl LogisticParams {
    pub fn zeros(features: usize, classes: usize) -> Self {
        let outputs = if classes <= 2 { 1 } else { classes };
        LogisticParams {
            weights: vec![vec![0.0; features]; outputs],
            bias: vec![0.0; outputs],
        }
    }

    pub fn is_binary(&self) -> bool {
        self.bias.len() == 1
    }

    /// Class probabilities.
    pub fn probabilities(&self, row: &[f64]) -> Vec<f64> {
        if self.is_binary() {
            let p = sigmoid(dot(&self.weights[0], row) + self.bias[0]);
            vec![1.0 - p, p]
        } else {
            let mut z: Vec<f64> = self
                .weights
                .iter()
                .zip(&self.bias)
                .map(|(w, b)| dot(w, row) + b)
                .collect();
            softmax(&mut z);
            z
        }
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        if self.is_binary() {
            usize::from(dot(&self.weights[0], row) + self.bias[0] > 0.0)
        } else {
            super::argmax(&self.probabilities(row))
        }
    }

    /// Flattened parameter vector (weights row-major, then biases).
    pub fn flatten(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.weights.iter().flatten().copied().collect();
        v.extend(&self.bias);
        v
    }

    pub fn unflatten(&mut self, v: &[f64]) {
        let d = self.weights.first().map_or(0, |w| w.len());
        for (k, w) in self.weights.iter_mut().enumerate() {
            w.copy_from_slice(&v[k * d..(k + 1) * d]);
        }
        let off = self.weights.len() * d;
        let k = self.bias.len();
        self.bias.copy_from_slice(&v[off..off + k]);
    }
}

/// Mean log-loss and its gradient (same shape as the parameters).
pub fn loss_and_grad(p: &LogisticParams, x: &[Vec<f64>], y: &[usize]) -> (f64, LogisticParams) {
    let d = p.weights.first().map_or(0, |w| w.len());
    let mut grad = LogisticParams {
        weights: vec![vec![0.0; d]; p.weights.len()],
        bias: vec![0.0; p.bias.len()],
    };
    let n = x.len().max(1) as f64;
    let mut loss = 0.0;
    for (row, &t) in x.iter().zip(y) {
        if p.is_binary() {
            let z = dot(&p.weights[0], row) + p.bias[0];
            let target = if t == 1 { 1.0 } else { 0.0 };
            // -[t ln σ(z) + (1-t) ln(1-σ(z))] = softplus(z) - t z
            loss += softplus(z) - target * z;
            let err = sigmoid(z) - target;
            for (g, v) in grad.weights[0].iter_mut().zip(row) {
                *g += err * v;
            }
            grad.bias[0] += err;
        } else {
            let mut z: Vec<f64> = p
                .weights
                .iter()
                .zip(&p.bias)
                .map(|(w, b)| dot(w, row) + b)
                .collect();
            let zt = z[t];
            let lse = softmax(&mut z);
            loss += lse - zt;
            for (k, prob) in z.iter().enumerate() {
                let err = prob - if k == t { 1.0 } else { 0.0 };
                for (g, v) in grad.weights[k].iter_mut().zip(row) {
                    *g += err * v;
                }
                grad.bias[k] += err;
            }
        }
    }
    for w in grad.weights.iter_mut() {
        for g in w.iter_mut() {
            *g /= n;
        }
    }
    for g in grad.bias.iter_mut() {
        *g /= n;
    }
    (loss / n, grad)
}

pub struct LogisticFit {
    pub params: LogisticParams,
    /// Loss before each epoch's update, then the final loss.
    pub loss_history: Vec<f64>,
}

pub fn fit(x: &[Vec<f64>], y: &[usize], classes: usize, lr: f64, epochs: usize) -> LogisticFit {
    let d = x.first().map_or(0, |r| r.len());
    let mut params = LogisticParams::zeros(d, classes);
    let mut loss_history = Vec::with_capacity(epochs + 1);
    for _ in 0..epochs {
        let (loss, grad) = loss_and_grad(&params, x, y);
        loss_history.push(loss);
        for (w, g) in params.weights.iter_mut().zip(&grad.weights) {
            for (wi, gi) in w.iter_mut().zip(g) {
                *wi -= lr * gi;
            }
        }
        for (b, g) in params.bias.iter_mut().zip(&grad.bias) {
            *b -= lr * g;
        }
    }
    loss_history.push(loss_and_grad(&params, x, y).0);
    LogisticFit {
        params,
        loss_history,
    }
}
