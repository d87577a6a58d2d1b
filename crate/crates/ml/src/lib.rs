//! Data-analytics engine: dataset ingestion, preprocessing, six model
//! families, evaluation metrics, model documents and synthetic data.

pub mod algo;
pub mod blackbox;
pub mod dataset;
pub mod document;
pub mod error;
pub mod metrics;
pub mod model;
pub mod preprocess;
pub mod spec;
pub mod synth;
pub mod value;

pub use blackbox::{load_blackbox, MODEL_FILE};
pub use dataset::{load_dataset, save_prediction, LoadOptions, PreparedData, Target};
pub use document::{deserialize_model, read_model, serialize_model, write_model};
pub use error::{DataError, MlError};
pub use metrics::Metrics;
pub use model::{evaluate, evaluate_file, predict, train, ModelParams, TrainOptions, TrainedModel, TrainingReport};
pub use preprocess::{preprocess, FittedScaler};
pub use spec::{
    AlgorithmChoice, DataAnalyticsSpec, Family, Feature, FeatureType, Hyper, HyperValue, ScalerKind, Schema, Task,
};
pub use synth::{gen_synthetic, SynthOptions};
pub use value::Value;
