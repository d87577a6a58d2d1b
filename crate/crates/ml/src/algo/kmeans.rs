//! Lloyd's k-means with seeded initialization from distinct rows.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::sq_dist;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansParams {
    pub centroids: Vec<Vec<f64>>,
}

impl KMeansParams {
    /// Nearest centroid; the lowest index wins ties.
    pub fn predict(&self, row: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, c) in self.centroids.iter().enumerate() {
            let d = sq_dist(c, row);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    pub fn inertia(&self, x: &[Vec<f64>]) -> f64 {
        x.iter().map(|r| sq_dist(&self.centroids[self.predict(r)], r)).sum()
    }
}

pub struct KMeansFit {
    pub params: KMeansParams,
    /// Inertia after each centroid update.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

/// Requires `x.len() >= k`.
pub fn fit(x: &[Vec<f64>], k: usize, max_iter: usize, seed: u64) -> KMeansFit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, x.len(), k);
    let mut centroids: Vec<Vec<f64>> = picks.iter().map(|i| x[i].clone()).collect();
    let d = x.first().map_or(0, |r| r.len());

    let mut assign: Vec<usize> = vec![usize::MAX; x.len()];
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < max_iter {
        let params = KMeansParams { centroids };
        let next: Vec<usize> = x.iter().map(|r| params.predict(r)).collect();
        centroids = params.centroids;
        if next == assign {
            break;
        }
        assign = next;
        iterations += 1;

        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (row, &c) in x.iter().zip(&assign) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(row) {
                *s += v;
            }
        }
        for ((c, s), n) in centroids.iter_mut().zip(sums).zip(&counts) {
            if *n > 0 {
                *c = s.into_iter().map(|v| v / *n as f64).collect();
            }
        }
        let inertia = x
            .iter()
            .zip(&assign)
            .map(|(r, &c)| sq_dist(&centroids[c], r))
            .sum();
        history.push(inertia);
    }
    KMeansFit {
        params: KMeansParams { centroids },
        inertia_history: history,
        iterations,
    }
}
