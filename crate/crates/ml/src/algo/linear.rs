//! Ordinary least squares via the normal equations.

#[derive(Debug, Clone, PartialEq)]
pub struct LinearParams {
    pub coef: Vec<f64>,
    pub intercept: f64,
}

impl LinearParams {
    pub fn predict(&self, row: &[f64]) -> f64 {
        super::dot(&self.coef, row) + self.intercept
    }
}

/// Fits `y ≈ X·coef + intercept`. A singular Gram matrix gets a 1e-10 ridge
/// on its diagonal.
pub fn fit(x: &[Vec<f64>], y: &[f64]) -> LinearParams {
    let d = x.first().map_or(0, |r| r.len());
    let m = d + 1;
    let mut gram = vec![vec![0.0; m]; m];
    let mut rhs = vec![0.0; m];
    for (row, &t) in x.iter().zip(y) {
        for i in 0..m {
            let ai = if i < d { row[i] } else { 1.0 };
            rhs[i] += ai * t;
            for j in 0..=i {
                let aj = if j < d { row[j] } else { 1.0 };
                gram[i][j] += ai * aj;
            }
        }
    }
    for i in 0..m {
        for j in 0..i {
            gram[j][i] = gram[i][j];
        }
    }

    let beta = cholesky_solve(&gram, &rhs).unwrap_or_else(|| {
        let mut jittered = gram.clone();
        for (i, row) in jittered.iter_mut().enumerate() {
            row[i] += 1e-10;
        }
        gauss_solve(jittered, rhs.clone())
    });
    LinearParams {
        coef: beta[..d].to_vec(),
        intercept: beta[d],
    }
}

/// Solves `A x = b` for symmetric positive-definite `A`; `None` when a pivot
/// is not safely positive.
pub fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let max_diag = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    let tol = 1e-12 * max_diag.max(f64::MIN_POSITIVE);
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let p = a[i][i] - s;
                if p <= tol {
                    return None;
                }
                l[i][i] = p.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    let mut z = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i][k] * z[k]).sum();
        z[i] = (b[i] - s) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k][i] * x[k]).sum();
        x[i] = (z[i] - s) / l[i][i];
    }
    Some(x)
}

/// Gaussian elimination with partial pivoting; zero pivots yield zero
/// components.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col];
        if p == 0.0 {
            continue;
        }
        for r in col + 1..n {
            let f = a[r][col] / p;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        if a[i][i] == 0.0 {
            continue;
        }
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}
