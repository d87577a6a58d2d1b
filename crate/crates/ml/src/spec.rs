//! The declarative side of a data-analytics component: which model family to
//! fit, over which features, with which hyperparameters and dataset metadata.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Model family (the "structure" of the learned model).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    LinearRegression,
    LogisticRegression,
    GaussianNaiveBayes,
    DecisionTreeClassifier,
    NnMultilayerPerceptron,
    KMeans,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::LinearRegression,
        Family::LogisticRegression,
        Family::GaussianNaiveBayes,
        Family::DecisionTreeClassifier,
        Family::NnMultilayerPerceptron,
        Family::KMeans,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::LinearRegression => "linear_regression",
            Family::LogisticRegression => "logistic_regression",
            Family::GaussianNaiveBayes => "gaussian_naive_bayes",
            Family::DecisionTreeClassifier => "decision_tree_classifier",
            Family::NnMultilayerPerceptron => "nn_multilayer_perceptron",
            Family::KMeans => "k_means",
        }
    }

    /// Resolves the name used in a `model_algorithm` clause or a black-box
    /// import declaration. Library class names (optionally module-qualified,
    /// e.g. `sklearn.cluster.KMeans`) are accepted as aliases.
    pub fn from_name(name: &str) -> Option<Family> {
        let short = name.rsplit('.').next().unwrap_or(name);
        let family = match short {
            "linear_regression" | "LinearRegression" => Family::LinearRegression,
            "logistic_regression" | "LogisticRegression" => Family::LogisticRegression,
            "gaussian_naive_bayes" | "GaussianNB" => Family::GaussianNaiveBayes,
            "decision_tree_classifier" | "DecisionTreeClassifier" => {
                Family::DecisionTreeClassifier
            }
            "nn_multilayer_perceptron" | "MLPClassifier" | "MLPRegressor" => {
                Family::NnMultilayerPerceptron
            }
            "k_means" | "KMeans" => Family::KMeans,
            _ => return None,
        };
        Some(family)
    }

    /// Tasks this family can be trained for.
    pub fn supports(self, task: Task) -> bool {
        match self {
            Family::LinearRegression => task == Task::Regression,
            Family::LogisticRegression
            | Family::GaussianNaiveBayes
            | Family::DecisionTreeClassifier => task == Task::Classification,
            Family::NnMultilayerPerceptron => task != Task::Clustering,
            Family::KMeans => task == Task::Clustering,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Learning task implied by the label switch and the label's type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classification,
    Regression,
    Clustering,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Classification => "classification",
            Task::Regression => "regression",
            Task::Clustering => "clustering",
        }
    }

    pub fn from_name(name: &str) -> Option<Task> {
        match name {
            "classification" => Some(Task::Classification),
            "regression" => Some(Task::Regression),
            "clustering" => Some(Task::Clustering),
            _ => None,
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Column type as seen by the ML engine. The modeling language's six scalar
/// types collapse onto these four.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureType {
    Integer,
    Real,
    Boolean,
    Text,
}

impl FeatureType {
    pub fn is_numeric(self) -> bool {
        matches!(self, FeatureType::Integer | FeatureType::Real)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureType::Integer => "Integer",
            FeatureType::Real => "Real",
            FeatureType::Boolean => "Boolean",
            FeatureType::Text => "Text",
        }
    }

    pub fn from_name(name: &str) -> Option<FeatureType> {
        match name {
            "Integer" => Some(FeatureType::Integer),
            "Real" => Some(FeatureType::Real),
            "Boolean" => Some(FeatureType::Boolean),
            "Text" => Some(FeatureType::Text),
            _ => None,
        }
    }
}

impl fmt::Display for FeatureType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    pub ty: FeatureType,
}

impl Feature {
    pub fn new(name: impl Into<String>, ty: FeatureType) -> Self {
        Feature { name: name.into(), ty }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScalerKind {
    Standard,
    MinMax,
    None,
}

impl ScalerKind {
    /// Canonical spelling used when a model is printed back.
    pub fn canonical_name(self) -> &'static str {
        match self {
            ScalerKind::Standard => "StandardScaler",
            ScalerKind::MinMax => "MinMaxScaler",
            ScalerKind::None => "none",
        }
    }

    pub fn from_name(name: &str) -> Option<ScalerKind> {
        match name {
            "StandardScaler" | "standard" | "standardization" | "zscore" => {
                Some(ScalerKind::Standard)
            }
            "MinMaxScaler" | "minmax" | "min_max" | "normalization" => Some(ScalerKind::MinMax),
            "none" | "None" => Some(ScalerKind::None),
            _ => None,
        }
    }
}

/// A hyperparameter value exactly as written in the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HyperValue {
    Int(i64),
    Float(f64),
    Ident(String),
    Str(String),
}

impl HyperValue {
    fn as_f64(&self) -> Option<f64> {
        match self {
            HyperValue::Int(v) => Some(*v as f64),
            HyperValue::Float(v) => Some(*v),
            _ => None,
        }
    }

    fn as_count(&self) -> Option<usize> {
        match self {
            HyperValue::Int(v) if *v >= 0 => Some(*v as usize),
            _ => None,
        }
    }

    fn as_word(&self) -> Option<&str> {
        match self {
            HyperValue::Ident(s) | HyperValue::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for HyperValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HyperValue::Int(v) => write!(f, "{v}"),
            HyperValue::Float(v) => write!(f, "{v:?}"),
            HyperValue::Ident(s) => f.write_str(s),
            HyperValue::Str(s) => write!(f, "{s:?}"),
        }
    }
}

/// `model_algorithm <family> <instance> (key value, ...)`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmChoice {
    pub family: Family,
    pub instance: String,
    pub hyperparameters: Vec<(String, HyperValue)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataAnalyticsSpec {
    pub name: String,
    pub dalib: Option<String>,
    pub labels: bool,
    /// Ordered features; with `labels` on, the last one is the label.
    pub features: Vec<Feature>,
    /// Property receiving predictions, with its type.
    pub prediction_results: Option<Feature>,
    pub dataset: Option<String>,
    pub automl: bool,
    pub sequential: Option<bool>,
    pub timestamps: bool,
    pub scaler: Option<ScalerKind>,
    pub algorithm: Option<AlgorithmChoice>,
    pub training_results: Option<String>,
    pub blackbox_ml: bool,
    pub blackbox_ml_model: Option<String>,
    pub blackbox_import_algorithm: Option<String>,
}

impl DataAnalyticsSpec {
    pub fn new(name: impl Into<String>) -> Self {
        DataAnalyticsSpec {
            name: name.into(),
            dalib: None,
            labels: false,
            features: Vec::new(),
            prediction_results: None,
            dataset: None,
            automl: false,
            sequential: None,
            timestamps: false,
            scaler: None,
            algorithm: None,
            training_results: None,
            blackbox_ml: false,
            blackbox_ml_model: None,
            blackbox_import_algorithm: None,
        }
    }

    /// Family of the model, whether trained here or imported as a black box.
    pub fn family(&self) -> Option<Family> {
        if self.blackbox_ml {
            self.blackbox_import_algorithm
                .as_deref()
                .and_then(Family::from_name)
        } else {
            self.algorithm.as_ref().map(|a| a.family)
        }
    }

    pub fn task(&self) -> Task {
        match self.label() {
            None => Task::Clustering,
            Some(label) if label.ty.is_numeric() => Task::Regression,
            Some(_) => Task::Classification,
        }
    }

    pub fn label(&self) -> Option<&Feature> {
        if self.labels {
            self.features.last()
        } else {
            None
        }
    }

    /// Model inputs: the features without the label.
    pub fn inputs(&self) -> &[Feature] {
        if self.labels && !self.features.is_empty() {
            &self.features[..self.features.len() - 1]
        } else {
            &self.features
        }
    }

    pub fn schema(&self) -> Schema {
        Schema {
            inputs: self.inputs().to_vec(),
            label: self.label().cloned(),
        }
    }

    pub fn is_sequential(&self) -> bool {
        self.sequential.unwrap_or(false)
    }

    pub fn hyperparameters(&self) -> &[(String, HyperValue)] {
        self.algorithm
            .as_ref()
            .map(|a| a.hyperparameters.as_slice())
            .unwrap_or(&[])
    }
}

/// Input/label layout a trained model was fitted against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub inputs: Vec<Feature>,
    pub label: Option<Feature>,
}

impl Schema {
    /// Stable textual fingerprint; two schemas are interchangeable iff their
    /// fingerprints match.
    pub fn fingerprint(&self) -> String {
        let inputs: Vec<String> = self
            .inputs
            .iter()
            .map(|f| format!("{}:{}", f.name, f.ty))
            .collect();
        let label = match &self.label {
            Some(f) => format!("{}:{}", f.name, f.ty),
            None => "-".to_string(),
        };
        format!("in={};label={}", inputs.join(","), label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
}

impl Activation {
    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
        }
    }

    pub fn from_name(name: &str) -> Option<Activation> {
        match name {
            "relu" | "Relu" | "ReLU" => Some(Activation::Relu),
            "sigmoid" | "logistic" | "Sigmoid" => Some(Activation::Sigmoid),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    SquaredError,
    CrossEntropy,
}

impl Loss {
    pub fn from_name(name: &str) -> Option<Loss> {
        match name {
            "squared_error" | "mse" | "MeanSquaredError" | "mean_squared_error" => {
                Some(Loss::SquaredError)
            }
            "SparseCategoricalCrossentropy"
            | "sparse_categorical_crossentropy"
            | "cross_entropy"
            | "log_loss" => Some(Loss::CrossEntropy),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimizer {
    Sgd,
}

/// Default seed for every stochastic step when neither the model nor the
/// caller provides one.
pub const DEFAULT_SEED: u64 = 10;
pub const DEFAULT_TEST_SIZE: f64 = 0.2;

/// Fully-defaulted, typed view of a component's hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyper {
    pub seed: u64,
    pub error_threshold: Option<f64>,
    pub test_size: f64,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub hidden: usize,
    pub activation: Activation,
    pub loss: Loss,
    pub optimizer: Optimizer,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub k: usize,
    pub max_iter: usize,
    /// Informational remarks (e.g. keyword substitutions).
    pub notes: Vec<String>,
}

const COMMON_KEYS: &[&str] = &["seed", "random_state", "error_threshold", "test_size"];

fn family_keys(family: Family) -> &'static [&'static str] {
    match family {
        Family::LinearRegression => &[],
        Family::LogisticRegression => &["lr", "learning_rate", "epochs"],
        Family::GaussianNaiveBayes => &[],
        Family::DecisionTreeClassifier => &["max_depth", "min_samples_split"],
        Family::NnMultilayerPerceptron => &[
            "hidden",
            "hidden_size",
            "hidden_layer_sizes",
            "activation",
            "optimizer",
            "loss",
            "lr",
            "learning_rate",
            "epochs",
            "batch_size",
        ],
        Family::KMeans => &["k", "n_clusters", "max_iter"],
    }
}

impl Hyper {
    /// Resolves raw hyperparameters against a family's schema and defaults.
    /// Every unknown key or ill-typed value is reported.
    pub fn resolve(
        family: Family,
        task: Task,
        params: &[(String, HyperValue)],
        default_seed: u64,
    ) -> Result<Hyper, Vec<String>> {
        let mut errors = Vec::new();
        let mut hyper = Hyper {
            seed: default_seed,
            error_threshold: None,
            test_size: DEFAULT_TEST_SIZE,
            lr: if family == Family::LogisticRegression { 0.1 } else { 0.01 },
            epochs: if family == Family::LogisticRegression { 1000 } else { 200 },
            batch_size: 32,
            hidden: 100,
            activation: Activation::Relu,
            loss: if task == Task::Regression {
                Loss::SquaredError
            } else {
                Loss::CrossEntropy
            },
            optimizer: Optimizer::Sgd,
            max_depth: 10,
            min_samples_split: 2,
            k: 2,
            max_iter: 300,
            notes: Vec::new(),
        };

        let allowed = family_keys(family);
        let mut seen: Vec<&str> = Vec::new();
        for (key, value) in params {
            if !COMMON_KEYS.contains(&key.as_str()) && !allowed.contains(&key.as_str()) {
                errors.push(format!("unknown hyperparameter `{key}` for {family}"));
                continue;
            }
            let canonical = match key.as_str() {
                "random_state" => "seed",
                "learning_rate" => "lr",
                "hidden_size" | "hidden_layer_sizes" => "hidden",
                "n_clusters" => "k",
                other => other,
            };
            if seen.contains(&canonical) {
                errors.push(format!("hyperparameter `{key}` given more than once"));
                continue;
            }
            seen.push(canonical);

            let bad = |what: &str| format!("hyperparameter `{key}` expects {what}, got `{value}`");
            match canonical {
                "seed" => match value {
                    HyperValue::Int(v) if *v >= 0 => hyper.seed = *v as u64,
                    _ => errors.push(bad("a non-negative integer")),
                },
                "error_threshold" => match value.as_f64() {
                    Some(v) if v > 0.0 => hyper.error_threshold = Some(v),
                    _ => errors.push(bad("a positive number")),
                },
                "test_size" => match value.as_f64() {
                    Some(v) if (0.0..1.0).contains(&v) => hyper.test_size = v,
                    _ => errors.push(bad("a fraction in [0, 1)")),
                },
                "lr" => match value.as_f64() {
                    Some(v) if v > 0.0 && v.is_finite() => hyper.lr = v,
                    _ => errors.push(bad("a positive number")),
                },
                "epochs" => match value.as_count() {
                    Some(v) if v > 0 => hyper.epochs = v,
                    _ => errors.push(bad("a positive integer")),
                },
                "batch_size" => match value.as_count() {
                    Some(v) if v > 0 => hyper.batch_size = v,
                    _ => errors.push(bad("a positive integer")),
                },
                "hidden" => match value.as_count() {
                    Some(v) if v > 0 => hyper.hidden = v,
                    _ => errors.push(bad("a positive integer")),
                },
                "max_depth" => match value.as_count() {
                    Some(v) if v > 0 => hyper.max_depth = v,
                    _ => errors.push(bad("a positive integer")),
                },
                "min_samples_split" => match value.as_count() {
                    Some(v) if v >= 2 => hyper.min_samples_split = v,
                    _ => errors.push(bad("an integer >= 2")),
                },
                "k" => match value.as_count() {
                    Some(v) if v > 0 => hyper.k = v,
                    _ => errors.push(bad("a positive integer")),
                },
                "max_iter" => match value.as_count() {
                    Some(v) if v > 0 => hyper.max_iter = v,
                    _ => errors.push(bad("a positive integer")),
                },
                "activation" => match value.as_word().and_then(Activation::from_name) {
                    Some(a) => hyper.activation = a,
                    None => errors.push(bad("`relu` or `sigmoid`")),
                },
                "loss" => match value.as_word().and_then(Loss::from_name) {
                    Some(Loss::CrossEntropy) if task != Task::Classification => {
                        errors.push(format!("loss `{value}` requires a classification task"))
                    }
                    Some(Loss::SquaredError) if task != Task::Regression => {
                        errors.push(format!("loss `{value}` requires a regression task"))
                    }
                    Some(l) => hyper.loss = l,
                    None => errors.push(bad("a supported loss")),
                },
                "optimizer" => match value.as_word() {
                    Some("sgd") | Some("SGD") => hyper.optimizer = Optimizer::Sgd,
                    Some("adam") | Some("Adam") => {
                        hyper.optimizer = Optimizer::Sgd;
                        hyper
                            .notes
                            .push("optimizer `adam` runs as plain stochastic gradient descent".into());
                    }
                    _ => errors.push(bad("`sgd` or `adam`")),
                },
                _ => unreachable!("key filtered above"),
            }
        }

        if errors.is_empty() {
            Ok(hyper)
        } else {
            Err(errors)
        }
    }

    /// Resolves the hyperparameters of a spec (its declared family must exist).
    pub fn for_spec(spec: &DataAnalyticsSpec, default_seed: u64) -> Result<Hyper, Vec<String>> {
        let family = spec
            .family()
            .ok_or_else(|| vec![format!("`{}` declares no model family", spec.name)])?;
        Hyper::resolve(family, spec.task(), spec.hyperparameters(), default_seed)
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::from_name(s).ok_or_else(|| format!("unknown model family `{s}`"))
    }
}
