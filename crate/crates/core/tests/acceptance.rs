//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints its own PASS or FAIL line.

mod common;

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mlq_core::codegen::{compile_config, load_plan, replay, sha256_hex};
use mlq_core::metamodel::ResolvedModel;
use mlq_core::runtime::{interpret, EventKind, RunOptions, Trace};
use mlq_core::syntax::{emit_canonical, parse_model};
use mlq_core::validate::{apply_automl_defaults, check, needs_configuration};
use mlq_ml::algo::mlp::{self, MlpParams, Output, Targets};
use mlq_ml::dataset::{parse_timestamp, read_table, Cell};
use mlq_ml::metrics::{self, purity};
use mlq_ml::spec::Activation;
use mlq_ml::synth::{APPLIANCES, WASHER_DRYER};
use mlq_ml::{
    gen_synthetic, load_dataset, predict, preprocess, serialize_model, train, write_model, AlgorithmChoice,
    DataAnalyticsSpec, Family, Feature, FeatureType, HyperValue, LoadOptions, ModelParams, ScalerKind, SynthOptions,
    Target, TrainOptions, Value,
};

type Outcome = Result<Vec<String>, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn seed10() -> RunOptions {
    RunOptions {
        seed: 10,
        ..RunOptions::default()
    }
}

fn run_in(model: &ResolvedModel, config: &str, root: &Path) -> Result<Trace, String> {
    let opts = RunOptions {
        dataset_root: Some(root.to_path_buf()),
        ..seed10()
    };
    interpret(model, config, opts).map_err(|e| e.to_string())
}

fn train_opts() -> TrainOptions {
    TrainOptions {
        seed: 10,
        trained_at: parse_timestamp("01-10-2013 00:00:00").unwrap(),
    }
}

fn real_row(cells: &[Cell]) -> Vec<Value> {
    cells
        .iter()
        .map(|c| match c {
            Cell::Num(v) => Value::Real(*v),
            other => panic!("unexpected cell {other:?}"),
        })
        .collect()
}

fn smarthome_features(label: Option<(&str, FeatureType)>) -> Vec<Feature> {
    let mut f: Vec<Feature> = APPLIANCES
        .iter()
        .map(|a| Feature::new(*a, FeatureType::Real))
        .chain(std::iter::once(Feature::new("aggregate", FeatureType::Real)))
        .collect();
    if let Some((name, ty)) = label {
        f.push(Feature::new(name, ty));
    }
    f
}

fn spec(family: Family, hyper: Vec<(&str, HyperValue)>) -> DataAnalyticsSpec {
    let mut s = DataAnalyticsSpec::new("da");
    s.algorithm = Some(AlgorithmChoice {
        family,
        instance: "m".into(),
        hyperparameters: hyper.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
    });
    s
}

fn c1_round_trip() -> Outcome {
    let mut files = common::mlq_files(&common::corpus());
    files.extend(common::mlq_files(&common::corpus().join("invalid")));
    for wanted in ["ping_pong.mlq", "smart_ping_pong.mlq", "scenario1.mlq", "scenario4.mlq"] {
        ensure!(files.iter().any(|f| f.ends_with(wanted)), "{wanted} missing from corpus");
    }
    for path in &files {
        let name = path.display().to_string();
        let src = fs::read_to_string(path).map_err(|e| e.to_string())?;
        let first = parse_model(&src, &name).map_err(|d| format!("{name}: {d:?}"))?;
        let second = parse_model(&emit_canonical(&first), &name).map_err(|d| format!("{name}: {d:?}"))?;
        ensure!(first == second, "{name} changed after a round trip");
    }
    Ok(vec![format!("{} files", files.len())])
}

fn c2_validator() -> Outcome {
    let invalid = common::mlq_files(&common::corpus().join("invalid"));
    ensure!(invalid.len() >= 10, "only {} seeded files", invalid.len());
    for path in &invalid {
        let name = path.file_name().unwrap().to_str().unwrap();
        let want = name.split('_').next().unwrap().to_uppercase();
        let model = common::model(&fs::read_to_string(path).unwrap(), name);
        let (model, _) = apply_automl_defaults(&model);
        let got: Vec<&str> = check(&model, needs_configuration(&model))
            .iter()
            .filter(|d| d.is_error())
            .map(|d| d.code)
            .collect();
        ensure!(got == [want.as_str()], "{name}: expected [{want}], got {got:?}");
    }
    for (name, files) in common::MODELS {
        let (model, _) = apply_automl_defaults(&common::load_files(files));
        let errors = check(&model, true).into_iter().filter(|d| d.is_error()).count();
        ensure!(errors == 0, "{name}: {errors} errors");
    }
    Ok(vec![format!("{} seeded, {} valid", invalid.len(), common::MODELS.len())])
}

fn c3_equivalence() -> Outcome {
    let mut artifacts = Vec::new();
    for (name, files) in common::MODELS {
        let model = common::load_files(files);
        let config = common::sole_config(&model);
        let text = compile_config(&model, &config).map_err(|e| format!("{name}: {e}"))?;
        let plan = load_plan(&text).map_err(|e| format!("{name}: {e}"))?;
        let a = common::data_copy();
        let b = common::data_copy();
        let interpreted = run_in(&model, &config, a.path())?;
        let replayed = replay(
            plan,
            RunOptions {
                dataset_root: Some(b.path().to_path_buf()),
                ..seed10()
            },
        )
        .map_err(|e| e.to_string())?;
        ensure!(interpreted.to_jsonl() == replayed.to_jsonl(), "{name}: traces differ");
        artifacts.push(sha256_hex(text.as_bytes()));
        artifacts.push(interpreted.digest());
    }
    let opts = || RunOptions {
        max_steps: 400,
        ..seed10()
    };
    for seed in 0..50 {
        let model = common::model(&common::fuzz::valid_model(seed), "fuzz");
        let text = compile_config(&model, "Fuzz").map_err(|e| format!("fuzz {seed}: {e}"))?;
        let a = interpret(&model, "Fuzz", opts()).map_err(|e| e.to_string())?;
        let b = replay(load_plan(&text).map_err(|e| e.to_string())?, opts()).map_err(|e| e.to_string())?;
        ensure!(a.to_jsonl() == b.to_jsonl(), "fuzz {seed}: traces differ");
        artifacts.push(sha256_hex(text.as_bytes()));
        artifacts.push(a.digest());
    }
    Ok(artifacts)
}

fn c4_ping_pong() -> Outcome {
    let model = common::load("ping_pong.mlq");
    let mut digests = Vec::new();
    for _ in 0..5 {
        let trace = interpret(&model, "PingPong", seed10()).map_err(|e| e.to_string())?;
        let delivered: Vec<(String, String)> = trace
            .of_kind(EventKind::Deliver)
            .map(|e| (e.instance.clone(), e.str("message").unwrap_or_default().to_string()))
            .collect();
        ensure!(delivered.len() == 200, "{} deliveries", delivered.len());
        for (i, (inst, msg)) in delivered.iter().enumerate() {
            let want = if i % 2 == 0 { ("server", "ping") } else { ("client", "pong") };
            ensure!((inst.as_str(), msg.as_str()) == want, "delivery {i} was {inst}/{msg}");
        }
        ensure!(trace.stop_reason() == Some("quiescence"), "stopped by {:?}", trace.stop_reason());
        digests.push(trace.digest());
    }
    ensure!(digests.windows(2).all(|w| w[0] == w[1]), "runs differ");
    Ok(vec![digests[0].clone()])
}

/// The client sends codes never seen in training; the oracle is the rule
/// that generated the dataset.
fn c5_gating() -> Outcome {
    let model = common::load("smart_ping_pong_dt.mlq");
    let root = common::data_copy();
    let trace = run_in(&model, "SmartPingPong", root.path())?;
    ensure!(!trace.has_errors(), "run reported errors");
    let train = trace.of_kind(EventKind::DaTrain).next().ok_or("no training")?;
    ensure!(train.str("family") == Some("decision_tree_classifier"), "wrong family");
    let codes: Vec<i64> = trace
        .of_kind(EventKind::Send)
        .filter(|e| e.instance == "client")
        .map(|e| e.payload["args"][1].as_i64().unwrap_or(-1))
        .collect();
    let answers: Vec<bool> = trace
        .of_kind(EventKind::Deliver)
        .filter(|e| e.instance == "client")
        .map(|e| e.str("message") == Some("prediction_positive"))
        .collect();
    ensure!(codes.len() == 100 && answers.len() == 100, "{} pings, {} answers", codes.len(), answers.len());
    let agree = codes.iter().zip(&answers).filter(|(c, a)| (**c > 500) == **a).count();
    let rate = agree as f64 / 100.0;
    ensure!(rate >= 0.95, "agreement {rate}");
    Ok(vec![trace.digest(), format!("agreement {rate}")])
}

fn c6a_line() -> Outcome {
    let csv = gen_synthetic("line", 10, 100, SynthOptions::default()).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("line.csv");
    fs::write(&path, &csv).unwrap();
    let pts: Vec<(f64, f64)> = csv
        .lines()
        .map(|l| {
            let (x, y) = l.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect();
    let mut s = spec(Family::LinearRegression, vec![]);
    s.labels = true;
    s.sequential = Some(true);
    s.features = vec![Feature::new("x", FeatureType::Real), Feature::new("y", FeatureType::Real)];
    let data = load_dataset(&s, &LoadOptions { path, seed: 10, test_size: 0.2 }).map_err(|e| e.to_string())?;
    // Hand OLS on the same training rows.
    let train_pts = &pts[..data.split];
    let n = train_pts.len() as f64;
    let mx = train_pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = train_pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = train_pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = train_pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let (slope, intercept) = (sxy / sxx, my - sxy / sxx * mx);
    let (model, _) = train(&s, &data, None, &train_opts()).map_err(|e| e.to_string())?;
    let ModelParams::Linear(p) = &model.params else { return Err("not a linear model".into()) };
    ensure!((p.coef[0] - 2.0).abs() < 1e-6 && (p.intercept - 1.0).abs() < 1e-6, "fit {} {}", p.coef[0], p.intercept);
    ensure!((p.coef[0] - slope).abs() < 1e-6 && (p.intercept - intercept).abs() < 1e-6, "oracle {slope} {intercept}");
    Ok(vec![serialize_model(&model), csv])
}

fn c6b_kmeans() -> Outcome {
    let labeled = gen_synthetic("smarthome-cluster", 10, 1000, SynthOptions::default()).map_err(|e| e.to_string())?;
    let unlabeled = gen_synthetic(
        "smarthome-cluster",
        10,
        1000,
        SynthOptions {
            timestamps: false,
            unlabeled: true,
        },
    )
    .map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().unwrap();
    let (lpath, upath) = (dir.path().join("l.csv"), dir.path().join("u.csv"));
    fs::write(&lpath, &labeled).unwrap();
    fs::write(&upath, &unlabeled).unwrap();
    let table = read_table(&lpath, &smarthome_features(Some(("on", FeatureType::Boolean))), false).map_err(|e| e.to_string())?;
    // Bayes rule: the generator's washer-dryer column is far above its idle draw exactly when on.
    let truth: Vec<usize> = table
        .rows
        .iter()
        .map(|r| match r[WASHER_DRYER] {
            Cell::Num(v) => usize::from(v > 200.0),
            _ => 0,
        })
        .collect();
    let labels: Vec<usize> = table.rows.iter().map(|r| usize::from(matches!(r[10], Cell::Bool(true)))).collect();
    ensure!(truth == labels, "label column disagrees with the generator state");
    let mut s = spec(Family::KMeans, vec![("k", HyperValue::Int(2)), ("seed", HyperValue::Int(10))]);
    s.features = smarthome_features(None);
    s.sequential = Some(true);
    s.scaler = Some(ScalerKind::None);
    s.prediction_results = Some(Feature::new("p", FeatureType::Boolean));
    let data = load_dataset(&s, &LoadOptions { path: upath, seed: 10, test_size: 0.0 }).map_err(|e| e.to_string())?;
    let (data, fitted) = preprocess(&s, data);
    let (model, _) = train(&s, &data, Some(&fitted), &train_opts()).map_err(|e| e.to_string())?;
    let clusters: Vec<usize> = data
        .x
        .iter()
        .map(|r| match model.score(r) {
            mlq_ml::model::Outcome::Cluster(c) => c,
            _ => usize::MAX,
        })
        .collect();
    let p = purity(&truth, &clusters);
    ensure!(p >= 0.9, "purity {p}");
    Ok(vec![serialize_model(&model), unlabeled, format!("purity {p}")])
}

fn c6c_logistic() -> Outcome {
    let csv = gen_synthetic("separable-2d", 10, 500, SynthOptions::default()).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    fs::write(&path, &csv).unwrap();
    let mut s = spec(Family::LogisticRegression, vec![("lr", HyperValue::Float(0.05)), ("epochs", HyperValue::Int(200))]);
    s.labels = true;
    s.features = vec![
        Feature::new("a", FeatureType::Real),
        Feature::new("b", FeatureType::Real),
        Feature::new("label", FeatureType::Boolean),
    ];
    let data = load_dataset(&s, &LoadOptions { path, seed: 10, test_size: 0.2 }).map_err(|e| e.to_string())?;
    let (model, report) = train(&s, &data, None, &train_opts()).map_err(|e| e.to_string())?;
    let acc = report.metrics.and_then(|m| m.accuracy).unwrap_or(0.0);
    ensure!(acc >= 0.95, "held-out accuracy {acc}");
    let Target::Class { index, .. } = &data.target else { return Err("not a classification target".into()) };
    let fit = mlq_ml::algo::logistic::fit(data.train_x(), &index[..data.split], 2, 0.05, 200);
    ensure!(fit.loss_history.windows(2).all(|w| w[1] <= w[0]), "log-loss increased");
    Ok(vec![serialize_model(&model), csv, format!("accuracy {acc}")])
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt() + b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

fn c6d_gradients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for case in 0..10 {
        let d = rng.gen_range(1..=5);
        let n = rng.gen_range(2..=20);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let hidden = rng.gen_range(2..6);
        let activation = if case % 2 == 0 { Activation::Sigmoid } else { Activation::Relu };
        let (output, outputs) = if case % 3 == 0 { (Output::Linear, 1) } else { (Output::Softmax, 3) };
        let p = MlpParams::init(d, hidden, outputs, activation, output, &mut rng);
        let classes: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let reals: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let targets = match output {
            Output::Softmax => Targets::Class(&classes),
            Output::Linear => Targets::Real(&reals),
        };
        let rows: Vec<usize> = (0..n).collect();
        let theta = p.flatten();
        let (_, g) = mlp::loss_and_grad(&p, &x, &rows, &targets);
        let h = 1e-5;
        let mut t = theta.clone();
        let numeric: Vec<f64> = (0..theta.len())
            .map(|i| {
                let mut q = p.clone();
                t[i] = theta[i] + h;
                q.unflatten(&t);
                let up = mlp::loss_and_grad(&q, &x, &rows, &targets).0;
                t[i] = theta[i] - h;
                q.unflatten(&t);
                let down = mlp::loss_and_grad(&q, &x, &rows, &targets).0;
                t[i] = theta[i];
                (up - down) / (2.0 * h)
            })
            .collect();
        let err = rel_err(&g.flatten(), &numeric);
        worst = worst.max(err);
        ensure!(err < 1e-4, "case {case}: relative error {err}");
    }
    Ok(vec![format!("worst {worst:e}")])
}

fn c6e_metrics() -> Outcome {
    // tp 4, fp 2, fn 2, tn 2
    let truth = [1, 1, 1, 1, 0, 0, 1, 1, 0, 0];
    let pred = [1, 1, 1, 1, 1, 1, 0, 0, 0, 0];
    let m = metrics::classification(&truth, &pred, 2);
    let two_thirds = 2.0 / 3.0;
    ensure!(m.accuracy == Some(0.6), "accuracy {:?}", m.accuracy);
    ensure!(m.precision == Some(two_thirds), "precision {:?}", m.precision);
    ensure!(m.recall == Some(two_thirds), "recall {:?}", m.recall);
    ensure!(m.f1 == Some(two_thirds), "f1 {:?}", m.f1);
    let r = metrics::regression(&[1.0, 2.0, 3.0], &[1.0, 3.0, 5.0]);
    ensure!(r.mae == Some(1.0), "mae {:?}", r.mae);
    ensure!(r.mse == Some(5.0 / 3.0), "mse {:?}", r.mse);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..100 {
        let n = rng.gen_range(1..50);
        let t: Vec<f64> = (0..n).map(|_| rng.gen_range(-1e3..1e3)).collect();
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-1e3..1e3)).collect();
        let m = metrics::regression(&t, &p);
        let (mae, mse) = (m.mae.unwrap(), m.mse.unwrap());
        ensure!(mae <= mse.sqrt() * (1.0 + 1e-12), "MAE {mae} above root MSE {}", mse.sqrt());
    }
    Ok(Vec::new())
}

fn c6_ml() -> Outcome {
    let mut out = Vec::new();
    for (tag, f) in [
        ("a", c6a_line as fn() -> Outcome),
        ("b", c6b_kmeans),
        ("c", c6c_logistic),
        ("d", c6d_gradients),
        ("e", c6e_metrics),
    ] {
        out.extend(f().map_err(|e| format!("6{tag}: {e}"))?);
    }
    Ok(out)
}

fn c7_blackbox() -> Outcome {
    let root = common::data_copy();
    let scenario2 = common::load_files(&["smarthome_common.mlq", "scenario2.mlq"]);
    let (automl, _) = apply_automl_defaults(&scenario2);
    let spec2 = automl.things["WasherDryerClustering"].analytics["wd"].spec.clone();

    // Out of band: train directly on the dataset and drop the document where
    // scenario 4 looks for it.
    let data = load_dataset(
        &spec2,
        &LoadOptions {
            path: root.path().join("data/smarthome_cluster.csv"),
            seed: 10,
            test_size: 0.2,
        },
    )
    .map_err(|e| e.to_string())?;
    let (data, fitted) = preprocess(&spec2, data);
    let (external, _) = train(&spec2, &data, Some(&fitted), &train_opts()).map_err(|e| e.to_string())?;
    write_model(&external, &root.path().join("models/kmeans").join(mlq_ml::MODEL_FILE)).map_err(|e| e.to_string())?;

    // Natively: scenario 2 trains inside the run and writes its model out.
    let native_dir = root.path().join("native");
    fs::create_dir_all(&native_dir).unwrap();
    let opts = RunOptions {
        dataset_root: Some(root.path().to_path_buf()),
        model_dir: Some(native_dir.clone()),
        ..seed10()
    };
    let native_trace = interpret(&scenario2, "SmartHome", opts).map_err(|e| e.to_string())?;
    ensure!(!native_trace.has_errors(), "scenario 2 reported errors");
    let native = mlq_ml::read_model(&native_dir.join("hub.wd.mlqm")).map_err(|e| e.to_string())?;

    let scenario4 = common::load_files(&["smarthome_common.mlq", "scenario4.mlq"]);
    let bb_trace = run_in(&scenario4, "SmartHome", root.path())?;
    ensure!(!bb_trace.has_errors(), "scenario 4 reported errors");
    let predictions = |t: &Trace| -> Vec<String> {
        t.of_kind(EventKind::DaPredict).map(|e| e.payload["prediction"].to_string()).collect()
    };
    ensure!(predictions(&native_trace) == predictions(&bb_trace), "in-model predictions differ");

    // 100 rows the models never saw.
    let held_out = gen_synthetic(
        "smarthome-cluster",
        11,
        100,
        SynthOptions {
            timestamps: false,
            unlabeled: true,
        },
    )
    .map_err(|e| e.to_string())?;
    let path = root.path().join("held_out.csv");
    fs::write(&path, &held_out).unwrap();
    let rows = read_table(&path, &spec2.features, false).map_err(|e| e.to_string())?;
    let loaded = mlq_ml::load_blackbox(
        &scenario4.things["WasherDryerBlackBox"].analytics["wd"].spec,
        &root.path().join("models/kmeans"),
    )
    .map_err(|e| e.to_string())?;
    ensure!(rows.rows.len() == 100, "{} held-out rows", rows.rows.len());
    for (i, row) in rows.rows.iter().enumerate() {
        let input = real_row(row);
        let a = predict(&loaded, &input).map_err(|e| e.to_string())?;
        let b = predict(&native, &input).map_err(|e| e.to_string())?;
        ensure!(a == b, "row {i}: {a:?} vs {b:?}");
    }
    Ok(vec![serialize_model(&native), native_trace.digest(), bb_trace.digest()])
}

fn c8_scaler() -> Outcome {
    let csv = gen_synthetic("smarthome-classify", 10, 1000, SynthOptions::default()).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    fs::write(&path, csv).unwrap();
    let mut s = spec(Family::LogisticRegression, vec![]);
    s.labels = true;
    s.features = smarthome_features(Some(("on", FeatureType::Boolean)));
    s.scaler = Some(ScalerKind::Standard);
    let data = load_dataset(&s, &LoadOptions { path, seed: 10, test_size: 0.2 }).map_err(|e| e.to_string())?;
    let raw = data.train_x().to_vec();
    let (data, _) = preprocess(&s, data);
    let train = data.train_x();
    let n = train.len() as f64;
    for c in 0..train[0].len() {
        if raw.iter().all(|r| r[c] == raw[0][c]) {
            continue;
        }
        let mean = train.iter().map(|r| r[c]).sum::<f64>() / n;
        let std = (train.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / n).sqrt();
        ensure!(mean.abs() < 1e-9, "column {c}: mean {mean}");
        ensure!((std - 1.0).abs() < 1e-9, "column {c}: std {std}");
    }
    Ok(Vec::new())
}

fn c9_append() -> Outcome {
    let model = common::load("clock_sampler.mlq");
    let root = common::data_copy();
    let path = root.path().join("data/samples.csv");
    let before = fs::read_to_string(&path).unwrap();
    let trace = run_in(&model, "Sampling", root.path())?;
    let after = fs::read_to_string(&path).unwrap();
    let saves = trace.count(EventKind::DaSave);
    let features = model.things["Sampler"].analytics["readings"].spec.features.len();
    ensure!(saves > 0, "no saves");
    ensure!(after.starts_with(&before), "existing rows changed");
    let added: Vec<&str> = after[before.len()..].lines().collect();
    ensure!(added.len() == saves, "{} rows for {saves} saves", added.len());
    for row in added {
        let fields: Vec<&str> = row.split(',').collect();
        ensure!(fields.len() == features + 1, "row `{row}` has {} fields", fields.len());
        ensure!(
            chrono::NaiveDateTime::parse_from_str(fields[0], "%d-%m-%Y %H:%M:%S").is_ok(),
            "bad timestamp in `{row}`"
        );
    }
    Ok(vec![format!("{saves} rows")])
}

fn c10_determinism() -> Outcome {
    let repeatable: [(&str, fn() -> Outcome); 5] = [
        ("3", c3_equivalence),
        ("4", c4_ping_pong),
        ("5", c5_gating),
        ("6", c6_ml),
        ("7", c7_blackbox),
    ];
    for (n, f) in repeatable {
        let a = f().map_err(|e| format!("criterion {n}: {e}"))?;
        let b = f().map_err(|e| format!("criterion {n}: {e}"))?;
        ensure!(a == b, "criterion {n} produced different artifacts on a second run");
    }
    Ok(Vec::new())
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome, Duration); 10] = [
        (1, "corpus round-trip", c1_round_trip, Duration::from_secs(1)),
        (2, "validator precision and recall", c2_validator, Duration::from_secs(1)),
        (3, "plan replay equals interpretation", c3_equivalence, Duration::from_secs(30)),
        (4, "ping-pong alternation", c4_ping_pong, Duration::from_secs(1)),
        (5, "smart ping-pong gating", c5_gating, Duration::from_secs(5)),
        (6, "ML engine", c6_ml, Duration::from_secs(60)),
        (7, "black-box parity", c7_blackbox, Duration::from_secs(5)),
        (8, "standard scaler", c8_scaler, Duration::MAX),
        (9, "dataset append", c9_append, Duration::MAX),
        (10, "determinism", c10_determinism, Duration::MAX),
    ];
    let mut failed = 0;
    for (n, title, f, limit) in criteria {
        let start = Instant::now();
        let result = f();
        let took = start.elapsed();
        let verdict = match result {
            Ok(_) if took > limit => Err(format!("took {took:.2?}, limit {limit:.0?}")),
            other => other.map(|_| ()),
        };
        match verdict {
            Ok(()) => println!("PASS {n:>2} {title} ({took:.2?})"),
            Err(e) => {
                failed += 1;
                println!("FAIL {n:>2} {title} ({took:.2?}): {e}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
