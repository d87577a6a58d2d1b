//! Training, prediction and evaluation of data-analytics components.

use std::path::Path;
use std::time::{Duration, Instant};

use chrono::NaiveDateTime;

use crate::algo::kmeans::{self, KMeansParams};
use crate::algo::linear::{self, LinearParams};
use crate::algo::logistic::{self, LogisticParams};
use crate::algo::mlp::{self, MlpConfig, MlpParams};
use crate::algo::naive_bayes::{self, NaiveBayesParams};
use crate::algo::tree::{self, TreeParams};
use crate::dataset::{encode_text, prepare_for_model, read_table, PreparedData, Target};
use crate::error::DataError;
use crate::error::MlError;
use crate::metrics::{self, Metrics};
use crate::preprocess::FittedScaler;
use crate::spec::{DataAnalyticsSpec, Family, FeatureType, Hyper, HyperValue, Schema, Task};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Linear(LinearParams),
    Logistic(LogisticParams),
    NaiveBayes(NaiveBayesParams),
    Tree(TreeParams),
    Mlp(MlpParams),
    KMeans(KMeansParams),
}

impl ModelParams {
    pub fn family(&self) -> Family {
        match self {
            ModelParams::Linear(_) => Family::LinearRegression,
            ModelParams::Logistic(_) => Family::LogisticRegression,
            ModelParams::NaiveBayes(_) => Family::GaussianNaiveBayes,
            ModelParams::Tree(_) => Family::DecisionTreeClassifier,
            ModelParams::Mlp(_) => Family::NnMultilayerPerceptron,
            ModelParams::KMeans(_) => Family::KMeans,
        }
    }
}

/// Learned parameters plus everything needed to score raw inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub family: Family,
    pub task: Task,
    pub schema: Schema,
    /// Whether the training dataset carried a leading timestamp column.
    pub timestamps: bool,
    /// Type of the property receiving predictions.
    pub output: Option<FeatureType>,
    pub encoders: Vec<Option<Vec<String>>>,
    pub scaler: FittedScaler,
    /// Class vocabulary (classification only).
    pub classes: Vec<Value>,
    pub params: ModelParams,
    pub trained_at: NaiveDateTime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Class(usize),
    Cluster(usize),
    Real(f64),
}

impl TrainedModel {
    pub fn fingerprint(&self) -> String {
        self.schema.fingerprint()
    }

    /// Encodes and scales one raw input vector.
    pub fn encode(&self, input: &[Value]) -> Result<Vec<f64>, MlError> {
        let inputs = &self.schema.inputs;
        if input.len() != inputs.len() {
            return Err(MlError::Arity {
                expected: inputs.len(),
                found: input.len(),
            });
        }
        let mut row = Vec::with_capacity(input.len());
        for (i, (v, f)) in input.iter().zip(inputs).enumerate() {
            let x = match (f.ty, v) {
                (FeatureType::Integer | FeatureType::Real, Value::Int(n)) => *n as f64,
                (FeatureType::Integer | FeatureType::Real, Value::Real(r)) => *r,
                (FeatureType::Boolean, Value::Bool(b)) => f64::from(u8::from(*b)),
                (FeatureType::Text, Value::Text(s)) => {
                    let vocab = self.encoders.get(i).and_then(|e| e.as_deref()).unwrap_or(&[]);
                    encode_text(s, vocab)
                }
                _ => {
                    return Err(MlError::InputType {
                        index: i,
                        feature: f.name.clone(),
                        expected: f.ty.as_str(),
                        found: v.feature_type().as_str(),
                    })
                }
            };
            row.push(x);
        }
        self.scaler.transform(&mut row);
        Ok(row)
    }

    /// Scores an encoded, scaled row.
    pub fn score(&self, row: &[f64]) -> Outcome {
        match &self.params {
            ModelParams::Linear(p) => Outcome::Real(p.predict(row)),
            ModelParams::Logistic(p) => Outcome::Class(p.predict(row)),
            ModelParams::NaiveBayes(p) => Outcome::Class(p.predict(row)),
            ModelParams::Tree(p) => Outcome::Class(p.predict(row)),
            ModelParams::Mlp(p) => match self.task {
                Task::Regression => Outcome::Real(p.predict_real(row)),
                _ => Outcome::Class(p.predict_class(row)),
            },
            ModelParams::KMeans(p) => Outcome::Cluster(p.predict(row)),
        }
    }

    /// Renders an outcome as a value of the prediction property's type.
    pub fn render(&self, outcome: Outcome) -> Value {
        match outcome {
            Outcome::Class(i) => self.classes.get(i).cloned().unwrap_or(Value::Int(i as i64)),
            Outcome::Real(v) => Value::Real(v),
            Outcome::Cluster(id) => match self.output {
                Some(FeatureType::Boolean) => Value::Bool(id == 1),
                Some(FeatureType::Real) => Value::Real(id as f64),
                Some(FeatureType::Text) => Value::Text(id.to_string()),
                Some(FeatureType::Integer) | None => Value::Int(id as i64),
            },
        }
    }
}

/// Predicts from raw inputs (the label excluded).
pub fn predict(model: &TrainedModel, input: &[Value]) -> Result<Value, MlError> {
    let row = model.encode(input)?;
    Ok(model.render(model.score(&row)))
}

/// Scores rows `data.x[from..]` (already encoded and scaled like the model).
pub fn evaluate_rows(model: &TrainedModel, data: &PreparedData, from: usize) -> Metrics {
    let rows = &data.x[from..];
    let outcomes: Vec<Outcome> = rows.iter().map(|r| model.score(r)).collect();
    match model.task {
        Task::Classification => {
            let truth: Vec<usize> = match &data.target {
                Target::Class { index, .. } => index[from..].to_vec(),
                _ => vec![usize::MAX; rows.len()],
            };
            let pred: Vec<usize> = outcomes
                .iter()
                .map(|o| match o {
                    Outcome::Class(i) | Outcome::Cluster(i) => *i,
                    Outcome::Real(_) => usize::MAX,
                })
                .collect();
            metrics::classification(&truth, &pred, model.classes.len())
        }
        Task::Regression => {
            let truth: Vec<f64> = match &data.target {
                Target::Real(y) => y[from..].to_vec(),
                _ => vec![0.0; rows.len()],
            };
            let pred: Vec<f64> = outcomes
                .iter()
                .map(|o| match o {
                    Outcome::Real(v) => *v,
                    Outcome::Class(i) | Outcome::Cluster(i) => *i as f64,
                })
                .collect();
            metrics::regression(&truth, &pred)
        }
        Task::Clustering => {
            let inertia = match &model.params {
                ModelParams::KMeans(p) => p.inertia(rows),
                _ => 0.0,
            };
            let clusters: Vec<usize> = outcomes
                .iter()
                .map(|o| match o {
                    Outcome::Cluster(i) | Outcome::Class(i) => *i,
                    Outcome::Real(_) => 0,
                })
                .collect();
            let labels = match &data.target {
                Target::Class { index, .. } => Some(&index[from..]),
                _ => None,
            };
            metrics::clustering(inertia, rows.len(), labels.map(|t| (t, clusters.as_slice())))
        }
    }
}

/// Scores every row of a headerless CSV laid out like the model's training
/// data (optional timestamp, inputs, then the label if any).
pub fn evaluate_file(model: &TrainedModel, path: &Path) -> Result<Metrics, MlError> {
    let mut columns = model.schema.inputs.clone();
    columns.extend(model.schema.label.clone());
    let table = read_table(path, &columns, model.timestamps)?;
    if table.rows.is_empty() {
        return Err(DataError::Empty {
            path: path.to_path_buf(),
        }
        .into());
    }
    let mut data = prepare_for_model(&model.schema, table, &model.encoders, &model.classes);
    for row in &mut data.x {
        model.scaler.transform(row);
    }
    Ok(evaluate_rows(model, &data, 0))
}

/// Evaluates a model on the test split of prepared data.
pub fn evaluate(model: &TrainedModel, data: &PreparedData) -> Metrics {
    evaluate_rows(model, data, data.split)
}

#[derive(Debug, Clone)]
pub struct TrainOptions {
    /// Seed used unless the component sets its own.
    pub seed: u64,
    pub trained_at: NaiveDateTime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingReport {
    pub family: Family,
    pub hyperparameters: Vec<(String, HyperValue)>,
    pub wall_time: Duration,
    pub train_rows: usize,
    pub test_rows: usize,
    pub missing_rows: usize,
    pub metrics: Option<Metrics>,
    pub final_loss: Option<f64>,
    pub iterations: Option<usize>,
    pub error_threshold: Option<f64>,
    /// Held-out error measured against the threshold.
    pub generalization_error: Option<f64>,
    pub threshold_passed: Option<bool>,
    pub notes: Vec<String>,
}

impl TrainingReport {
    /// One line of the training log.
    pub fn log_line(&self, at: &NaiveDateTime) -> String {
        let hyper: Vec<String> = self
            .hyperparameters
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        let mut line = format!(
            "{} family={} hyperparameters=[{}] train_rows={} test_rows={} missing_rows={} wall_time_ms={}",
            at.format("%Y-%m-%dT%H:%M:%S"),
            self.family,
            hyper.join(", "),
            self.train_rows,
            self.test_rows,
            self.missing_rows,
            self.wall_time.as_millis()
        );
        if let Some(m) = &self.metrics {
            line.push_str(&format!(" metrics=[{m}]"));
        }
        if let Some(l) = self.final_loss {
            line.push_str(&format!(" final_loss={l}"));
        }
        if let (Some(eps), Some(pass)) = (self.error_threshold, self.threshold_passed) {
            line.push_str(&format!(
                " error_threshold={eps} threshold={}",
                if pass { "pass" } else { "fail" }
            ));
        }
        line
    }
}

fn class_targets(data: &PreparedData) -> Result<(&[usize], usize), MlError> {
    match &data.target {
        Target::Class { index, classes } => Ok((&index[..data.split], classes.len())),
        _ => Err(MlError::TooFewRows("classification needs a categorical label".into())),
    }
}

/// Fits the component's model on the train split of `data`, which must have
/// been produced for this spec (and scaled with `scaler`, if any).
pub fn train(
    spec: &DataAnalyticsSpec,
    data: &PreparedData,
    scaler: Option<&FittedScaler>,
    opts: &TrainOptions,
) -> Result<(TrainedModel, TrainingReport), MlError> {
    if spec.blackbox_ml {
        return Err(MlError::Blackbox(format!(
            "`{}` uses a pre-trained model and cannot be trained",
            spec.name
        )));
    }
    let algorithm = spec
        .algorithm
        .as_ref()
        .ok_or_else(|| MlError::Hyper(vec![format!("`{}` declares no model_algorithm", spec.name)]))?;
    let family = algorithm.family;
    let task = spec.task();
    if !family.supports(task) {
        return Err(MlError::TaskMismatch { family, task });
    }
    let hyper = Hyper::resolve(family, task, &algorithm.hyperparameters, opts.seed).map_err(MlError::Hyper)?;
    let x = data.train_x();
    if x.is_empty() {
        return Err(MlError::TooFewRows("the train split is empty".into()));
    }

    let started = Instant::now();
    let mut final_loss = None;
    let mut iterations = None;
    let params = match family {
        Family::LinearRegression => {
            let y = match &data.target {
                Target::Real(y) => &y[..data.split],
                _ => return Err(MlError::TaskMismatch { family, task }),
            };
            ModelParams::Linear(linear::fit(x, y))
        }
        Family::LogisticRegression => {
            let (y, classes) = class_targets(data)?;
            let fit = logistic::fit(x, y, classes, hyper.lr, hyper.epochs);
            final_loss = fit.loss_history.last().copied();
            iterations = Some(hyper.epochs);
            ModelParams::Logistic(fit.params)
        }
        Family::GaussianNaiveBayes => {
            let (y, classes) = class_targets(data)?;
            let p = naive_bayes::fit(x, y, classes).map_err(|c| {
                MlError::TooFewRows(format!(
                    "class `{}` has a single training row; Gaussian naive Bayes needs at least 2",
                    data.classes().get(c).map(|v| v.to_string()).unwrap_or_default()
                ))
            })?;
            ModelParams::NaiveBayes(p)
        }
        Family::DecisionTreeClassifier => {
            let (y, classes) = class_targets(data)?;
            ModelParams::Tree(tree::fit(x, y, classes, hyper.max_depth, hyper.min_samples_split))
        }
        Family::NnMultilayerPerceptron => {
            let cfg = MlpConfig {
                hidden: hyper.hidden,
                activation: hyper.activation,
                lr: hyper.lr,
                epochs: hyper.epochs,
                batch_size: hyper.batch_size,
                seed: hyper.seed,
            };
            let fit = match task {
                Task::Regression => {
                    let y = match &data.target {
                        Target::Real(y) => &y[..data.split],
                        _ => return Err(MlError::TaskMismatch { family, task }),
                    };
                    mlp::fit_regressor(x, y, &cfg)
                }
                _ => {
                    let (y, classes) = class_targets(data)?;
                    mlp::fit_classifier(x, y, classes, &cfg)
                }
            };
            final_loss = fit.loss_history.last().copied();
            iterations = Some(hyper.epochs);
            ModelParams::Mlp(fit.params)
        }
        Family::KMeans => {
            if x.len() < hyper.k {
                return Err(MlError::TooFewRows(format!(
                    "k-means with k={} needs at least {} rows, the train split has {}",
                    hyper.k,
                    hyper.k,
                    x.len()
                )));
            }
            let fit = kmeans::fit(x, hyper.k, hyper.max_iter, hyper.seed);
            final_loss = fit.inertia_history.last().copied();
            iterations = Some(fit.iterations);
            ModelParams::KMeans(fit.params)
        }
    };
    let wall_time = started.elapsed();

    let model = TrainedModel {
        family,
        task,
        schema: spec.schema(),
        timestamps: spec.timestamps,
        output: spec.prediction_results.as_ref().map(|f| f.ty),
        encoders: data.encoders.clone(),
        scaler: scaler
            .cloned()
            .unwrap_or_else(|| FittedScaler::identity(spec.inputs().len())),
        classes: data.classes().to_vec(),
        params,
        trained_at: opts.trained_at,
    };

    let metrics = (data.test_len() > 0).then(|| evaluate(&model, data));
    let generalization_error = metrics.as_ref().and_then(|m| match task {
        Task::Classification => m.accuracy.map(|a| 1.0 - a),
        Task::Regression => m.mae,
        Task::Clustering => m.inertia.map(|i| i / m.rows.max(1) as f64),
    });
    let threshold_passed = match (hyper.error_threshold, generalization_error) {
        (Some(eps), Some(err)) => Some(err <= eps),
        _ => None,
    };
    let mut notes = data.notes.clone();
    notes.extend(hyper.notes.iter().cloned());
    let report = TrainingReport {
        family,
        hyperparameters: algorithm.hyperparameters.clone(),
        wall_time,
        train_rows: data.split,
        test_rows: data.test_len(),
        missing_rows: data.missing_rows,
        metrics,
        final_loss,
        iterations,
        error_threshold: hyper.error_threshold,
        generalization_error,
        threshold_passed,
        notes,
    };
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::{AlgorithmChoice, Feature};

    fn at() -> NaiveDateTime {
        crate::dataset::parse_timestamp("01-10-2013 00:00:00").unwrap()
    }

    fn line_data() -> PreparedData {
        PreparedData {
            x: (0..10).map(|i| vec![i as f64]).collect(),
            target: Target::Real((0..10).map(|i| 2.0 * i as f64 + 1.0).collect()),
            timestamps: None,
            split: 8,
            missing_rows: 0,
            encoders: vec![None],
            notes: vec![],
        }
    }

    fn spec(family: Family, label: FeatureType, labels: bool) -> DataAnalyticsSpec {
        let mut s = DataAnalyticsSpec::new("da");
        s.labels = labels;
        s.features = vec![Feature::new("x", FeatureType::Real), Feature::new("y", label)];
        s.algorithm = Some(AlgorithmChoice {
            family,
            instance: "m".into(),
            hyperparameters: vec![],
        });
        s
    }

    #[test]
    fn linear_plug_in() {
        let s = spec(Family::LinearRegression, FeatureType::Real, true);
        let (model, report) = train(&s, &line_data(), None, &TrainOptions { seed: 10, trained_at: at() }).unwrap();
        let v = predict(&model, &[Value::Real(4.0)]).unwrap();
        match v {
            Value::Real(y) => assert!((y - 9.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        let m = report.metrics.unwrap();
        assert!(m.mae.unwrap() < 1e-6);
        assert!(matches!(predict(&model, &[]), Err(MlError::Arity { expected: 1, found: 0 })));
        assert!(matches!(
            predict(&model, &[Value::Bool(true)]),
            Err(MlError::InputType { .. })
        ));
    }

    #[test]
    fn family_task_mismatch() {
        let s = spec(Family::KMeans, FeatureType::Real, true);
        let err = train(&s, &line_data(), None, &TrainOptions { seed: 10, trained_at: at() }).unwrap_err();
        assert!(matches!(err, MlError::TaskMismatch { .. }));
    }

    #[test]
    fn kmeans_renders_boolean() {
        let mut s = spec(Family::KMeans, FeatureType::Real, false);
        s.features.pop();
        s.prediction_results = Some(Feature::new("p", FeatureType::Boolean));
        let data = PreparedData {
            x: vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]],
            target: Target::None,
            timestamps: None,
            split: 4,
            missing_rows: 0,
            encoders: vec![None],
            notes: vec![],
        };
        let (model, _) = train(&s, &data, None, &TrainOptions { seed: 10, trained_at: at() }).unwrap();
        let a = predict(&model, &[Value::Real(0.2)]).unwrap();
        let b = predict(&model, &[Value::Real(10.2)]).unwrap();
        assert!(matches!(a, Value::Bool(_)));
        assert_ne!(a, b);
    }

    #[test]
    fn too_few_rows_for_k() {
        let mut s = spec(Family::KMeans, FeatureType::Real, false);
        s.algorithm.as_mut().unwrap().hyperparameters = vec![("k".into(), HyperValue::Int(5))];
        let data = PreparedData {
            x: vec![vec![0.0], vec![1.0]],
            target: Target::None,
            timestamps: None,
            split: 2,
            missing_rows: 0,
            encoders: vec![None, None],
            notes: vec![],
        };
        let err = train(&s, &data, None, &TrainOptions { seed: 10, trained_at: at() }).unwrap_err();
        assert!(matches!(err, MlError::TooFewRows(_)));
    }
}
