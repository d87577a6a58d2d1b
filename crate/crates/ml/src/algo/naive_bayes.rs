//! Gaussian naive Bayes.

use std::f64::consts::PI;

pub const VAR_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesParams {
    pub priors: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub vars: Vec<Vec<f64>>,
}

impl NaiveBayesParams {
    pub fn log_joint(&self, row: &[f64]) -> Vec<f64> {
        self.priors
            .iter()
            .zip(self.means.iter().zip(&self.vars))
            .map(|(prior, (mu, var))| {
                if *prior <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                prior.ln()
                    + row
                        .iter()
                        .zip(mu.iter().zip(var))
                        .map(|(x, (m, v))| -0.5 * (2.0 * PI * v).ln() - (x - m) * (x - m) / (2.0 * v))
                        .sum::<f64>()
            })
            .collect()
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        super::argmax(&self.log_joint(row))
    }
}

/// Fits per-class priors, means and population variances. Errors name the
/// first class present in training with fewer than two rows.
pub fn fit(x: &[Vec<f64>], y: &[usize], classes: usize) -> Result<NaiveBayesParams, usize> {
    let d = x.first().map_or(0, |r| r.len());
    let mut counts = vec![0usize; classes];
    let mut means = vec![vec![0.0; d]; classes];
    for (row, &c) in x.iter().zip(y) {
        counts[c] += 1;
        for (m, v) in means[c].iter_mut().zip(row) {
            *m += v;
        }
    }
    if let Some(c) = counts.iter().position(|&n| n == 1) {
        return Err(c);
    }
    for (m, &n) in means.iter_mut().zip(&counts) {
        if n > 0 {
            for v in m.iter_mut() {
                *v /= n as f64;
            }
        }
    }
    let mut vars = vec![vec![0.0; d]; classes];
    for (row, &c) in x.iter().zip(y) {
        for ((s, v), m) in vars[c].iter_mut().zip(row).zip(&means[c]) {
            *s += (v - m) * (v - m);
        }
    }
    for (var, &n) in vars.iter_mut().zip(&counts) {
        for s in var.iter_mut() {
            *s = if n > 0 { (*s / n as f64).max(VAR_FLOOR) } else { 1.0 };
        }
    }
    let total = x.len().max(1) as f64;
    Ok(NaiveBayesParams {
        priors: counts.iter().map(|&n| n as f64 / total).collect(),
        means,
        vars,
    })
}
