//! Held-out evaluation metrics.

use std::fmt;

use crate::error::MlError;
use crate::spec::Task;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Confusion {
    /// Counts with `positive` as the positive class.
    pub fn count(truth: &[usize], pred: &[usize], positive: usize) -> Self {
        let mut c = Confusion::default();
        for (&t, &p) in truth.iter().zip(pred) {
            match (t == positive, p == positive) {
                (true, true) => c.tp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
            }
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub task: Task,
    pub rows: usize,
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub mae: Option<f64>,
    pub mse: Option<f64>,
    pub purity: Option<f64>,
    pub inertia: Option<f64>,
    /// Metrics whose denominator was zero (reported as 0).
    pub zero_division: Vec<&'static str>,
}

impl Metrics {
    fn empty(task: Task, rows: usize) -> Self {
        Metrics {
            task,
            rows,
            accuracy: None,
            precision: None,
            recall: None,
            f1: None,
            mae: None,
            mse: None,
            purity: None,
            inertia: None,
            zero_division: Vec::new(),
        }
    }

    /// Named metric; requesting one the task does not define is an error.
    pub fn get(&self, name: &str) -> Result<f64, MlError> {
        let (key, value): (&'static str, Option<f64>) = match name {
            "accuracy" => ("accuracy", self.accuracy),
            "precision" => ("precision", self.precision),
            "recall" => ("recall", self.recall),
            "f1" => ("f1", self.f1),
            "mae" => ("mae", self.mae),
            "mse" => ("mse", self.mse),
            "purity" => ("purity", self.purity),
            "inertia" => ("inertia", self.inertia),
            _ => ("unknown", None),
        };
        value.ok_or(MlError::MetricMismatch {
            metric: key,
            task: self.task,
        })
    }

    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        [
            ("accuracy", self.accuracy),
            ("precision", self.precision),
            ("recall", self.recall),
            ("f1", self.f1),
            ("mae", self.mae),
            ("mse", self.mse),
            ("purity", self.purity),
            ("inertia", self.inertia),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect()
    }
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries().iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

fn ratio(num: usize, den: usize, name: &'static str, flags: &mut Vec<&'static str>) -> f64 {
    if den == 0 {
        if !flags.contains(&name) {
            flags.push(name);
        }
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Accuracy, precision, recall and F1. Two-class problems score class 1 as
/// positive; more classes use unweighted macro averages.
pub fn classification(truth: &[usize], pred: &[usize], classes: usize) -> Metrics {
    let n = truth.len();
    let mut m = Metrics::empty(Task::Classification, n);
    let mut flags = Vec::new();
    let correct = truth.iter().zip(pred).filter(|(t, p)| t == p).count();
    m.accuracy = Some(ratio(correct, n, "accuracy", &mut flags));
    if classes <= 2 {
        let c = Confusion::count(truth, pred, 1);
        m.precision = Some(ratio(c.tp, c.tp + c.fp, "precision", &mut flags));
        m.recall = Some(ratio(c.tp, c.tp + c.fn_, "recall", &mut flags));
        m.f1 = Some(ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_, "f1", &mut flags));
    } else {
        let (mut p, mut r, mut f) = (0.0, 0.0, 0.0);
        for k in 0..classes {
            let c = Confusion::count(truth, pred, k);
            p += ratio(c.tp, c.tp + c.fp, "precision", &mut flags);
            r += ratio(c.tp, c.tp + c.fn_, "recall", &mut flags);
            f += ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_, "f1", &mut flags);
        }
        let k = classes as f64;
        m.precision = Some(p / k);
        m.recall = Some(r / k);
        m.f1 = Some(f / k);
    }
    m.zero_division = flags;
    m
}

/// Mean absolute and mean squared error.
pub fn regression(truth: &[f64], pred: &[f64]) -> Metrics {
    let n = truth.len();
    let mut m = Metrics::empty(Task::Regression, n);
    if n == 0 {
        m.mae = Some(0.0);
        m.mse = Some(0.0);
        m.zero_division = vec!["mae", "mse"];
        return m;
    }
    let abs: f64 = truth.iter().zip(pred).map(|(t, p)| (t - p).abs()).sum();
    let sq: f64 = truth.iter().zip(pred).map(|(t, p)| (t - p) * (t - p)).sum();
    m.mae = Some(abs / n as f64);
    m.mse = Some(sq / n as f64);
    m
}

/// Clustering metrics: inertia always, purity when reference labels exist.
pub fn clustering(inertia: f64, rows: usize, labels: Option<(&[usize], &[usize])>) -> Metrics {
    let mut m = Metrics::empty(Task::Clustering, rows);
    m.inertia = Some(inertia);
    if let Some((truth, clusters)) = labels {
        m.purity = Some(purity(truth, clusters));
    }
    m
}

/// Accuracy under the best one-to-one matching of clusters to labels.
/// Exhaustive for up to 8 groups; beyond that each cluster takes its
/// majority label.
pub fn purity(truth: &[usize], clusters: &[usize]) -> f64 {
    let n = truth.len();
    if n == 0 {
        return 0.0;
    }
    let kl = truth.iter().max().map_or(0, |m| m + 1);
    let kc = clusters.iter().max().map_or(0, |m| m + 1);
    let size = kl.max(kc);
    let mut table = vec![vec![0usize; size]; size];
    for (&t, &c) in truth.iter().zip(clusters) {
        table[c][t] += 1;
    }
    let best = if size <= 8 {
        let mut perm: Vec<usize> = (0..size).collect();
        let mut best = 0;
        permute(&mut perm, 0, &table, &mut best);
        best
    } else {
        table.iter().map(|row| row.iter().copied().max().unwrap_or(0)).sum()
    };
    best as f64 / n as f64
}

fn permute(perm: &mut Vec<usize>, i: usize, table: &[Vec<usize>], best: &mut usize) {
    if i == perm.len() {
        let score = perm.iter().enumerate().map(|(c, &l)| table[c][l]).sum();
        *best = (*best).max(score);
        return;
    }
    for j in i..perm.len() {
        perm.swap(i, j);
        permute(perm, i + 1, table, best);
        perm.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_counted_confusion() {
        let truth = [1, 0, 1, 1, 0];
        let pred = [1, 1, 1, 0, 0];
        let c = Confusion::count(&truth, &pred, 1);
        assert_eq!(c, Confusion { tp: 2, tn: 1, fp: 1, fn_: 1 });
        let m = classification(&truth, &pred, 2);
        assert_eq!(m.accuracy, Some(0.6));
        assert_eq!(m.precision, Some(2.0 / 3.0));
        assert_eq!(m.recall, Some(2.0 / 3.0));
        assert_eq!(m.f1, Some(2.0 / 3.0));
    }

    #[test]
    fn perfect_predictor() {
        let y = [0, 1, 1, 0, 1];
        let m = classification(&y, &y, 2);
        for k in ["accuracy", "precision", "recall", "f1"] {
            assert_eq!(m.get(k).unwrap(), 1.0);
        }
    }

    #[test]
    fn regression_fixture() {
        let m = regression(&[1.0, 2.0, 3.0], &[2.0, 2.0, 5.0]);
        assert_eq!(m.mae, Some(1.0));
        assert_eq!(m.mse, Some(5.0 / 3.0));
        assert!(matches!(
            m.get("accuracy"),
            Err(MlError::MetricMismatch { metric: "accuracy", .. })
        ));
    }

    #[test]
    fn zero_division_is_flagged() {
        let m = classification(&[0, 0], &[0, 0], 2);
        assert_eq!(m.precision, Some(0.0));
        assert!(m.zero_division.contains(&"precision"));
        assert!(m.zero_division.contains(&"recall"));
    }

    #[test]
    fn purity_uses_best_matching() {
        assert_eq!(purity(&[0, 0, 1, 1], &[1, 1, 0, 0]), 1.0);
        assert_eq!(purity(&[0, 0, 1, 1], &[0, 1, 1, 1]), 0.75);
        assert_eq!(purity(&[0, 1, 2], &[2, 0, 1]), 1.0);
    }
}
