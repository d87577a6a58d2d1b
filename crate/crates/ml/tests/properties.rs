use mlq_ml::algo::kmeans;
use mlq_ml::algo::linear;
use mlq_ml::algo::logistic::{self, LogisticParams};
use mlq_ml::algo::mlp::{self, MlpParams, Output, Targets};
use mlq_ml::metrics;
use mlq_ml::preprocess::FittedScaler;
use mlq_ml::spec::Activation;
use mlq_ml::ScalerKind;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn matrix(rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (rows, cols).prop_flat_map(|(n, d)| prop::collection::vec(prop::collection::vec(-100.0..100.0f64, d), n))
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt() + b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn standard_scaler_centers_and_scales(x in matrix(2..40, 1..6)) {
        let d = x[0].len();
        let (scaler, constant) = FittedScaler::fit(ScalerKind::Standard, &x, d);
        let scaled: Vec<Vec<f64>> = x.iter().map(|r| { let mut r = r.clone(); scaler.transform(&mut r); r }).collect();
        let n = x.len() as f64;
        for j in 0..d {
            if constant.contains(&j) {
                continue;
            }
            let mean = scaled.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = scaled.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
            prop_assert!(mean.abs() < 1e-9, "mean {mean}");
            prop_assert!((var.sqrt() - 1.0).abs() < 1e-9, "std {}", var.sqrt());
        }
    }

    #[test]
    fn ols_residuals_are_orthogonal(x in matrix(8..30, 1..5), w in prop::collection::vec(-5.0..5.0f64, 5), noise_seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
        let y: Vec<f64> = x.iter().map(|r| r.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + rng.gen_range(-3.0..3.0)).collect();
        let p = linear::fit(&x, &y);
        let resid: Vec<f64> = x.iter().zip(&y).map(|(r, t)| t - p.predict(r)).collect();
        let scale = y.iter().map(|v| v.abs()).fold(1.0, f64::max) * x.len() as f64 * 100.0;
        for j in 0..x[0].len() {
            let dotp: f64 = x.iter().zip(&resid).map(|(r, e)| r[j] * e).sum();
            prop_assert!(dotp.abs() / scale < 1e-6, "column {j}: {dotp}");
        }
        let s: f64 = resid.iter().sum();
        prop_assert!(s.abs() / scale < 1e-6);
    }

    #[test]
    fn kmeans_inertia_never_increases(x in matrix(3..60, 1..4), k in 1usize..4, seed in any::<u64>()) {
        prop_assume!(x.len() >= k);
        let fit = kmeans::fit(&x, k, 300, seed);
        prop_assert!(fit.iterations <= 300);
        for w in fit.inertia_history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-9, "{:?}", fit.inertia_history);
        }
    }

    #[test]
    fn classification_metrics_are_bounded(pairs in prop::collection::vec((0usize..3, 0usize..3), 0..50), classes in 2usize..4) {
        let truth: Vec<usize> = pairs.iter().map(|p| p.0 % classes).collect();
        let pred: Vec<usize> = pairs.iter().map(|p| p.1 % classes).collect();
        let m = metrics::classification(&truth, &pred, classes);
        for v in [m.accuracy, m.precision, m.recall, m.f1] {
            let v = v.unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn purity_is_bounded(pairs in prop::collection::vec((0usize..4, 0usize..4), 1..60)) {
        let truth: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let clusters: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        let p = metrics::purity(&truth, &clusters);
        prop_assert!(p > 0.0 && p <= 1.0);
        prop_assert_eq!(metrics::purity(&truth, &truth), 1.0);
    }
}

#[test]
fn mae_never_exceeds_root_mse() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..100 {
        let n = rng.gen_range(1..50);
        let t: Vec<f64> = (0..n).map(|_| rng.gen_range(-1e3..1e3)).collect();
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-1e3..1e3)).collect();
        let m = metrics::regression(&t, &p);
        assert!(m.mae.unwrap() <= m.mse.unwrap().sqrt() * (1.0 + 1e-12));
    }
}

fn random_instance(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, usize) {
    let d = rng.gen_range(1..=5);
    let n = rng.gen_range(2..=20);
    let x = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    (x, d)
}

fn numeric_grad(theta: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let h = 1e-5;
    let mut t = theta.to_vec();
    (0..theta.len())
        .map(|i| {
            t[i] = theta[i] + h;
            let up = f(&t);
            t[i] = theta[i] - h;
            let down = f(&t);
            t[i] = theta[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

#[test]
fn logistic_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..10 {
        let (x, d) = random_instance(&mut rng);
        let classes = if case % 2 == 0 { 2 } else { 3 };
        let y: Vec<usize> = x.iter().map(|_| rng.gen_range(0..classes)).collect();
        let mut p = LogisticParams::zeros(d, classes);
        let theta: Vec<f64> = p.flatten().iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
        p.unflatten(&theta);
        let (_, g) = logistic::loss_and_grad(&p, &x, &y);
        let num = numeric_grad(&theta, |t| {
            let mut q = p.clone();
            q.unflatten(t);
            logistic::loss_and_grad(&q, &x, &y).0
        });
        let err = rel_err(&g.flatten(), &num);
        assert!(err < 1e-4, "case {case}: relative error {err}");
    }
}

#[test]
fn mlp_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..10 {
        let (x, d) = random_instance(&mut rng);
        let hidden = rng.gen_range(2..6);
        let activation = if case % 2 == 0 { Activation::Sigmoid } else { Activation::Relu };
        let rows: Vec<usize> = (0..x.len()).collect();
        let (output, outputs) = if case % 3 == 0 { (Output::Linear, 1) } else { (Output::Softmax, 3) };
        let p = MlpParams::init(d, hidden, outputs, activation, output, &mut rng);
        let classes: Vec<usize> = x.iter().map(|_| rng.gen_range(0..3)).collect();
        let reals: Vec<f64> = x.iter().map(|_| rng.gen_range(-2.0..2.0)).collect();
        let targets = match output {
            Output::Softmax => Targets::Class(&classes),
            Output::Linear => Targets::Real(&reals),
        };
        let theta = p.flatten();
        let (_, g) = mlp::loss_and_grad(&p, &x, &rows, &targets);
        let num = numeric_grad(&theta, |t| {
            let mut q = p.clone();
            q.unflatten(t);
            mlp::loss_and_grad(&q, &x, &rows, &targets).0
        });
        let err = rel_err(&g.flatten(), &num);
        assert!(err < 1e-4, "case {case}: relative error {err}");
    }
}
