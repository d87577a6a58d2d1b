//! One-hidden-layer perceptron trained by minibatch SGD.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spec::Activation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Output {
    /// Softmax over classes with sparse categorical cross-entropy.
    Softmax,
    /// Single linear unit with half squared error.
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub activation: Activation,
    pub output: Output,
    pub inputs: usize,
    pub hidden: usize,
    pub outputs: usize,
    /// `hidden × inputs`, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// `outputs × hidden`, row-major.
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    /// Regression target standardization `(mean, std)`; `(0, 1)` otherwise.
    pub target_shift: f64,
    pub target_scale: f64,
}

pub enum Targets<'a> {
    Class(&'a [usize]),
    Real(&'a [f64]),
}

impl MlpParams {
    pub fn init(
        inputs: usize,
        hidden: usize,
        outputs: usize,
        activation: Activation,
        output: Output,
        rng: &mut impl Rng,
    ) -> Self {
        let limit = |fan_in: usize, fan_out: usize| match activation {
            Activation::Relu => (6.0 / fan_in.max(1) as f64).sqrt(),
            Activation::Sigmoid => (6.0 / (fan_in + fan_out).max(1) as f64).sqrt(),
        };
        let l1 = limit(inputs, hidden);
        let w1 = (0..hidden * inputs).map(|_| rng.gen_range(-l1..=l1)).collect();
        let l2 = (6.0 / (hidden + outputs).max(1) as f64).sqrt();
        let w2 = (0..outputs * hidden).map(|_| rng.gen_range(-l2..=l2)).collect();
        MlpParams {
            activation,
            output,
            inputs,
            hidden,
            outputs,
            w1,
            b1: vec![0.0; hidden],
            w2,
            b2: vec![0.0; outputs],
            target_shift: 0.0,
            target_scale: 1.0,
        }
    }

    fn act(&self, z: f64) -> f64 {
        match self.activation {
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => super::sigmoid(z),
        }
    }

    fn act_grad(&self, z: f64, a: f64) -> f64 {
        match self.activation {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
        }
    }

    /// Hidden pre-activations, hidden activations, output logits.
    fn forward(&self, row: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut z1 = self.b1.clone();
        for (j, z) in z1.iter_mut().enumerate() {
            *z += super::dot(&self.w1[j * self.inputs..(j + 1) * self.inputs], row);
        }
        let a1: Vec<f64> = z1.iter().map(|&z| self.act(z)).collect();
        let mut out = self.b2.clone();
        for (k, o) in out.iter_mut().enumerate() {
            *o += super::dot(&self.w2[k * self.hidden..(k + 1) * self.hidden], &a1);
        }
        (z1, a1, out)
    }

    pub fn predict_class(&self, row: &[f64]) -> usize {
        super::argmax(&self.forward(row).2)
    }

    pub fn predict_real(&self, row: &[f64]) -> f64 {
        self.forward(row).2[0] * self.target_scale + self.target_shift
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.num_params());
        v.extend(&self.w1);
        v.extend(&self.b1);
        v.extend(&self.w2);
        v.extend(&self.b2);
        v
    }

    pub fn unflatten(&mut self, v: &[f64]) {
        let mut off = 0;
        for part in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2] {
            let n = part.len();
            part.copy_from_slice(&v[off..off + n]);
            off += n;
        }
    }

    pub fn num_params(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    fn zeros_like(&self) -> MlpParams {
        MlpParams {
            w1: vec![0.0; self.w1.len()],
            b1: vec![0.0; self.b1.len()],
            w2: vec![0.0; self.w2.len()],
            b2: vec![0.0; self.b2.len()],
            ..self.clone()
        }
    }
}

/// Mean loss over `rows` and its gradient, laid out like the parameters.
/// Real targets are taken as-is (already in the standardized space).
pub fn loss_and_grad(p: &MlpParams, x: &[Vec<f64>], rows: &[usize], targets: &Targets) -> (f64, MlpParams) {
    let mut g = p.zeros_like();
    let mut loss = 0.0;
    let mut delta2 = vec![0.0; p.outputs];
    let mut delta1 = vec![0.0; p.hidden];
    for &r in rows {
        let row = &x[r];
        let (z1, a1, mut out) = p.forward(row);
        match (p.output, targets) {
            (Output::Softmax, Targets::Class(y)) => {
                let t = y[r];
                let zt = out[t];
                let lse = super::softmax(&mut out);
                loss += lse - zt;
                for (k, d) in delta2.iter_mut().enumerate() {
                    *d = out[k] - if k == t { 1.0 } else { 0.0 };
                }
            }
            (Output::Linear, Targets::Real(y)) => {
                let e = out[0] - y[r];
                loss += 0.5 * e * e;
                delta2[0] = e;
            }
            _ => panic!("target kind does not match network output"),
        }
        for k in 0..p.outputs {
            g.b2[k] += delta2[k];
            let w = &mut g.w2[k * p.hidden..(k + 1) * p.hidden];
            for (wj, aj) in w.iter_mut().zip(&a1) {
                *wj += delta2[k] * aj;
            }
        }
        for j in 0..p.hidden {
            let back: f64 = (0..p.outputs).map(|k| p.w2[k * p.hidden + j] * delta2[k]).sum();
            delta1[j] = back * p.act_grad(z1[j], a1[j]);
        }
        for j in 0..p.hidden {
            if delta1[j] == 0.0 {
                continue;
            }
            g.b1[j] += delta1[j];
            let w = &mut g.w1[j * p.inputs..(j + 1) * p.inputs];
            for (wi, xi) in w.iter_mut().zip(row) {
                *wi += delta1[j] * xi;
            }
        }
    }
    let n = rows.len().max(1) as f64;
    for part in [&mut g.w1, &mut g.b1, &mut g.w2, &mut g.b2] {
        for v in part.iter_mut() {
            *v /= n;
        }
    }
    (loss / n, g)
}

pub struct MlpConfig {
    pub hidden: usize,
    pub activation: Activation,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

pub struct MlpFit {
    pub params: MlpParams,
    /// Full-data loss after each epoch.
    pub loss_history: Vec<f64>,
}

pub fn fit_classifier(x: &[Vec<f64>], y: &[usize], classes: usize, cfg: &MlpConfig) -> MlpFit {
    let d = x.first().map_or(0, |r| r.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let params = MlpParams::init(d, cfg.hidden, classes.max(1), cfg.activation, Output::Softmax, &mut rng);
    sgd(params, x, &Targets::Class(y), cfg, &mut rng)
}

pub fn fit_regressor(x: &[Vec<f64>], y: &[f64], cfg: &MlpConfig) -> MlpFit {
    let d = x.first().map_or(0, |r| r.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = MlpParams::init(d, cfg.hidden, 1, cfg.activation, Output::Linear, &mut rng);
    let n = y.len().max(1) as f64;
    let mean = y.iter().sum::<f64>() / n;
    let std = (y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
    let scale = if std > 1e-12 { std } else { 1.0 };
    let scaled: Vec<f64> = y.iter().map(|v| (v - mean) / scale).collect();
    params.target_shift = mean;
    params.target_scale = scale;
    sgd(params, x, &Targets::Real(&scaled), cfg, &mut rng)
}

fn sgd(mut params: MlpParams, x: &[Vec<f64>], targets: &Targets, cfg: &MlpConfig, rng: &mut ChaCha8Rng) -> MlpFit {
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let batch = cfg.batch_size.max(1);
    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(batch) {
            let (_, g) = loss_and_grad(&params, x, chunk, targets);
            for (p, gv) in [
                (&mut params.w1, &g.w1),
                (&mut params.b1, &g.b1),
                (&mut params.w2, &g.w2),
                (&mut params.b2, &g.b2),
            ] {
                for (pi, gi) in p.iter_mut().zip(gv.iter()) {
                    *pi -= cfg.lr * gi;
                }
            }
        }
        let all: Vec<usize> = (0..x.len()).collect();
        history.push(loss_and_grad(&params, x, &all, targets).0);
    }
    MlpFit {
        params,
        loss_history: history,
    }
}
