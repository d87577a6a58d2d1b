use std::fs;
use std::path::Path;

use mlq_ml::dataset::{parse_timestamp, read_table};
use mlq_ml::metrics::purity;
use mlq_ml::synth::WASHER_DRYER;
use mlq_ml::{
    evaluate, gen_synthetic, load_blackbox, load_dataset, predict, preprocess, serialize_model, train, write_model,
    AlgorithmChoice, DataAnalyticsSpec, Family, Feature, FeatureType, HyperValue, LoadOptions, MlError, ScalerKind,
    SynthOptions, Target, TrainOptions, Value,
};

fn opts() -> TrainOptions {
    TrainOptions {
        seed: 10,
        trained_at: parse_timestamp("01-10-2013 00:00:00").unwrap(),
    }
}

fn smarthome_features(label: Option<FeatureType>) -> Vec<Feature> {
    let mut f: Vec<Feature> = mlq_ml::synth::APPLIANCES
        .iter()
        .map(|a| Feature::new(*a, FeatureType::Real))
        .chain(std::iter::once(Feature::new("aggregate", FeatureType::Real)))
        .collect();
    if let Some(ty) = label {
        f.push(Feature::new("washer_dryer_on", ty));
    }
    f
}

fn spec(name: &str, family: Family, hyper: Vec<(&str, HyperValue)>) -> DataAnalyticsSpec {
    let mut s = DataAnalyticsSpec::new(name);
    s.algorithm = Some(AlgorithmChoice {
        family,
        instance: "m".into(),
        hyperparameters: hyper.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
    });
    s
}

fn write_preset(dir: &Path, preset: &str, rows: usize) -> std::path::PathBuf {
    let csv = gen_synthetic(preset, 10, rows, SynthOptions::default()).unwrap();
    let path = dir.join(format!("{preset}.csv"));
    fs::write(&path, csv).unwrap();
    path
}

#[test]
fn line_recovers_slope_and_intercept() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_preset(dir.path(), "line", 100);
    let mut s = spec("lin", Family::LinearRegression, vec![]);
    s.labels = true;
    s.sequential = Some(true);
    s.features = vec![Feature::new("x", FeatureType::Real), Feature::new("y", FeatureType::Real)];
    let data = load_dataset(&s, &LoadOptions { path, seed: 10, test_size: 0.2 }).unwrap();
    let (model, _) = train(&s, &data, None, &opts()).unwrap();
    let mlq_ml::ModelParams::Linear(p) = &model.params else { panic!() };
    assert!((p.coef[0] - 2.0).abs() < 1e-6);
    assert!((p.intercept - 1.0).abs() < 1e-6);
    let doc = serialize_model(&model);
    assert_eq!(doc.lines().filter(|l| l.starts_with("array coef [1] ")).count(), 1);
}

#[test]
fn kmeans_clusters_follow_washer_dryer() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_preset(dir.path(), "smarthome-cluster", 1000);
    let truth_table = read_table(&path, &smarthome_features(Some(FeatureType::Boolean)), false).unwrap();
    let truth: Vec<usize> = truth_table
        .rows
        .iter()
        .map(|r| match r[10] {
            mlq_ml::dataset::Cell::Bool(b) => usize::from(b),
            _ => unreachable!(),
        })
        .collect();
    // Bayes rule on the generator's own column recovers the state exactly.
    let bayes: Vec<usize> = truth_table
        .rows
        .iter()
        .map(|r| match r[WASHER_DRYER] {
            mlq_ml::dataset::Cell::Num(v) => usize::from(v > 200.0),
            _ => unreachable!(),
        })
        .collect();
    assert_eq!(purity(&truth, &bayes), 1.0);

    let unlabeled = dir.path().join("unlabeled.csv");
    fs::write(&unlabeled, gen_synthetic("smarthome-cluster", 10, 1000, SynthOptions { timestamps: false, unlabeled: true }).unwrap()).unwrap();
    for scaler in [ScalerKind::None, ScalerKind::Standard] {
        let mut s = spec("km", Family::KMeans, vec![("k", HyperValue::Int(2)), ("seed", HyperValue::Int(10))]);
        s.features = smarthome_features(None);
        s.sequential = Some(true);
        s.scaler = Some(scaler);
        s.prediction_results = Some(Feature::new("p", FeatureType::Boolean));
        let data = load_dataset(&s, &LoadOptions { path: unlabeled.clone(), seed: 10, test_size: 0.0 }).unwrap();
        let (data, fitted) = preprocess(&s, data);
        let (model, _) = train(&s, &data, Some(&fitted), &opts()).unwrap();
        let clusters: Vec<usize> = data.x.iter().map(|r| match model.score(r) {
            mlq_ml::model::Outcome::Cluster(c) => c,
            _ => unreachable!(),
        }).collect();
        let p = purity(&truth, &clusters);
        eprintln!("k-means purity ({scaler:?}): {p}");
        if scaler == ScalerKind::None {
            assert!(p >= 0.9, "purity {p}");
        }
    }
}

#[test]
fn logistic_separates_blobs() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_preset(dir.path(), "separable-2d", 500);
    let mut s = spec("lr", Family::LogisticRegression, vec![("lr", HyperValue::Float(0.05)), ("epochs", HyperValue::Int(200))]);
    s.labels = true;
    s.features = vec![
        Feature::new("a", FeatureType::Real),
        Feature::new("b", FeatureType::Real),
        Feature::new("label", FeatureType::Boolean),
    ];
    let data = load_dataset(&s, &LoadOptions { path, seed: 10, test_size: 0.2 }).unwrap();
    let (model, report) = train(&s, &data, None, &opts()).unwrap();
    let m = report.metrics.unwrap();
    assert!(m.accuracy.unwrap() >= 0.95, "{m}");
    let fit = mlq_ml::algo::logistic::fit(
        data.train_x(),
        match &data.target {
            Target::Class { index, .. } => &index[..data.split],
            _ => unreachable!(),
        },
        2,
        0.05,
        200,
    );
    assert!(fit.loss_history.windows(2).all(|w| w[1] <= w[0]));
    for v in [predict(&model, &[Value::Real(2.0), Value::Real(1.0)]).unwrap(), predict(&model, &[Value::Real(-2.0), Value::Real(-1.0)]).unwrap()] {
        assert!(matches!(v, Value::Bool(_)));
    }
}

#[test]
fn every_family_round_trips_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let classify = write_preset(dir.path(), "smarthome-classify", 300);
    let regress = write_preset(dir.path(), "smarthome-regress", 300);
    let cases = [
        (Family::LinearRegression, Some(FeatureType::Real), &regress),
        (Family::NnMultilayerPerceptron, Some(FeatureType::Real), &regress),
        (Family::LogisticRegression, Some(FeatureType::Boolean), &classify),
        (Family::GaussianNaiveBayes, Some(FeatureType::Boolean), &classify),
        (Family::DecisionTreeClassifier, Some(FeatureType::Boolean), &classify),
        (Family::NnMultilayerPerceptron, Some(FeatureType::Boolean), &classify),
        (Family::KMeans, None, &classify),
    ];
    for (family, label, path) in cases {
        let hyper = if family == Family::NnMultilayerPerceptron {
            vec![("hidden", HyperValue::Int(8)), ("epochs", HyperValue::Int(20))]
        } else {
            vec![]
        };
        let mut s = spec("da", family, hyper);
        s.labels = label.is_some();
        s.features = smarthome_features(label);
        if label.is_none() {
            // Unlabeled view of the labeled file: treat the label column as a feature.
            s.features.push(Feature::new("state", FeatureType::Real));
        }
        s.scaler = Some(ScalerKind::Standard);
        s.prediction_results = Some(Feature::new("p", label.unwrap_or(FeatureType::Integer)));
        let run = || {
            let data = load_dataset(&s, &LoadOptions { path: path.to_path_buf(), seed: 10, test_size: 0.2 }).unwrap();
            let (data, fitted) = preprocess(&s, data);
            let (model, _) = train(&s, &data, Some(&fitted), &opts()).unwrap();
            (model, data)
        };
        let (model, data) = run();
        let (again, _) = run();
        let doc = serialize_model(&model);
        assert_eq!(doc, serialize_model(&again), "{family}");
        let back = mlq_ml::deserialize_model(&doc).unwrap();
        assert_eq!(back, model, "{family}");
        assert_eq!(evaluate(&back, &data), evaluate(&model, &data));
        if label == Some(FeatureType::Boolean) {
            for row in data.test_x() {
                assert!(matches!(model.render(model.score(row)), Value::Bool(_)));
            }
            let m = evaluate(&model, &data);
            assert!(m.accuracy.unwrap() >= 0.9, "{family}: {m}");
        }
    }
}

#[test]
fn blackbox_parity_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    fs::write(&path, gen_synthetic("smarthome-cluster", 10, 500, SynthOptions { timestamps: false, unlabeled: true }).unwrap()).unwrap();
    let mut s = spec("km", Family::KMeans, vec![("k", HyperValue::Int(2))]);
    s.features = smarthome_features(None);
    s.scaler = Some(ScalerKind::Standard);
    s.prediction_results = Some(Feature::new("p", FeatureType::Boolean));
    let data = load_dataset(&s, &LoadOptions { path: path.clone(), seed: 10, test_size: 0.2 }).unwrap();
    let (data, fitted) = preprocess(&s, data);
    let (native, _) = train(&s, &data, Some(&fitted), &opts()).unwrap();
    let model_dir = dir.path().join("bb");
    write_model(&native, &model_dir.join(mlq_ml::MODEL_FILE)).unwrap();

    let mut bb = s.clone();
    bb.algorithm = None;
    bb.blackbox_ml = true;
    bb.blackbox_import_algorithm = Some("sklearn.cluster.KMeans".into());
    bb.blackbox_ml_model = Some("bb".into());
    let loaded = load_blackbox(&bb, &model_dir).unwrap();
    let raw = read_table(&path, &s.features, false).unwrap();
    for row in raw.rows.iter().take(100) {
        let input: Vec<Value> = row
            .iter()
            .map(|c| match c {
                mlq_ml::dataset::Cell::Num(v) => Value::Real(*v),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(predict(&loaded, &input).unwrap(), predict(&native, &input).unwrap());
    }
    assert!(matches!(train(&bb, &data, None, &opts()), Err(MlError::Blackbox(_))));

    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    assert!(matches!(load_blackbox(&bb, &empty), Err(MlError::MissingArtifact(_))));
    assert!(matches!(load_blackbox(&bb, &dir.path().join("nope")), Err(MlError::MissingArtifact(_))));

    let mut wrong = bb.clone();
    wrong.blackbox_import_algorithm = Some("linear_regression".into());
    assert!(matches!(load_blackbox(&wrong, &model_dir), Err(MlError::FamilyMismatch { .. })));

    let mut schema = bb.clone();
    schema.features.pop();
    assert!(matches!(load_blackbox(&schema, &model_dir), Err(MlError::SchemaMismatch { .. })));
}
