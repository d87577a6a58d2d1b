use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::spec::{Family, Task};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read dataset {}: {source}", path.display())]
    Unreadable { path: PathBuf, source: io::Error },
    #[error("cannot write dataset {}: {source}", path.display())]
    Unwritable { path: PathBuf, source: io::Error },
    #[error("empty dataset {}", path.display())]
    Empty { path: PathBuf },
    #[error("{}:{line}: expected {expected} columns, found {found}", path.display())]
    ColumnCount {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{}:{line}: unparseable timestamp `{value}` (expected dd-mm-yyyy HH:MM:SS)", path.display())]
    BadTimestamp {
        path: PathBuf,
        line: usize,
        value: String,
    },
    #[error("{}:{line}: column {column} (`{feature}`): expected {expected}, found `{value}`", path.display())]
    BadCell {
        path: PathBuf,
        line: usize,
        column: usize,
        feature: String,
        expected: &'static str,
        value: String,
    },
    #[error("{}: malformed CSV: {message}", path.display())]
    Malformed { path: PathBuf, message: String },
    #[error("data analytics component `{0}` has no dataset")]
    NoDataset(String),
}

#[derive(Debug, Error)]
pub enum MlError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("invalid hyperparameters: {}", .0.join("; "))]
    Hyper(Vec<String>),
    #[error("{family} cannot be trained for a {task} task")]
    TaskMismatch { family: Family, task: Task },
    #[error("not enough training rows: {0}")]
    TooFewRows(String),
    #[error("expected {expected} inputs, got {found}")]
    Arity { expected: usize, found: usize },
    #[error("input {index} (`{feature}`) expects {expected}, got {found}")]
    InputType {
        index: usize,
        feature: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("model has not been trained")]
    Untrained,
    #[error("schema mismatch: model fitted on `{model}`, component declares `{spec}`")]
    SchemaMismatch { model: String, spec: String },
    #[error("family mismatch: expected {expected}, model document holds {found}")]
    FamilyMismatch { expected: String, found: Family },
    #[error("black-box model missing: {0}")]
    MissingArtifact(String),
    #[error("black-box component: {0}")]
    Blackbox(String),
    #[error("metric `{metric}` is undefined for {task}")]
    MetricMismatch { metric: &'static str, task: Task },
    #[error("model document version {found} not supported (expected {expected})")]
    Version { found: String, expected: u32 },
    #[error("corrupted model document, line {line}: {message}")]
    Corrupt { line: usize, message: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("i/o error on {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}
