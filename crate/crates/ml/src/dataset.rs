//! Headerless CSV ingestion, train/test splitting and prediction save-back.

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use chrono::NaiveDateTime;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::DataError;
use crate::spec::{DataAnalyticsSpec, Feature, FeatureType, Schema};
use crate::value::{parse_bool, Value};

pub const TIMESTAMP_FORMAT: &str = "%d-%m-%Y %H:%M:%S";
pub const MISSING_MARKER: &str = "NaN";

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT).ok()
}

pub fn format_timestamp(t: &NaiveDateTime) -> String {
    t.format(TIMESTAMP_FORMAT).to_string()
}

/// A parsed, typed CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Bool(bool),
    Text(String),
}

/// Raw typed rows of a dataset, before encoding and splitting.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub rows: Vec<Vec<Cell>>,
    pub timestamps: Option<Vec<NaiveDateTime>>,
    pub missing: usize,
}

/// Reads a headerless CSV whose columns are `[timestamp,] columns...`.
/// Rows holding the missing marker anywhere are skipped and counted.
pub fn read_table(path: &Path, columns: &[Feature], timestamps: bool) -> Result<Table, DataError> {
    let bytes = fs::read(path).map_err(|source| DataError::Unreadable {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());

    let expected = columns.len() + usize::from(timestamps);
    let mut table = Table {
        timestamps: timestamps.then(Vec::new),
        ..Table::default()
    };
    let mut saw_record = false;
    for record in reader.records() {
        let record = record.map_err(|e| DataError::Malformed {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        saw_record = true;
        if record.len() != expected {
            return Err(DataError::ColumnCount {
                path: path.to_path_buf(),
                line,
                expected,
                found: record.len(),
            });
        }
        if record.iter().any(|c| c == MISSING_MARKER) {
            table.missing += 1;
            continue;
        }
        let mut cells = record.iter();
        if let Some(stamps) = table.timestamps.as_mut() {
            let raw = cells.next().unwrap_or_default();
            let t = parse_timestamp(raw).ok_or_else(|| DataError::BadTimestamp {
                path: path.to_path_buf(),
                line,
                value: raw.to_string(),
            })?;
            stamps.push(t);
        }
        let mut row = Vec::with_capacity(columns.len());
        for (i, (raw, feature)) in cells.zip(columns).enumerate() {
            let bad = |expected: &'static str| DataError::BadCell {
                path: path.to_path_buf(),
                line,
                column: i + 1 + usize::from(timestamps),
                feature: feature.name.clone(),
                expected,
                value: raw.to_string(),
            };
            let cell = match feature.ty {
                FeatureType::Integer | FeatureType::Real => match raw.parse::<f64>() {
                    Ok(v) if v.is_finite() => Cell::Num(v),
                    _ => return Err(bad("a number")),
                },
                FeatureType::Boolean => Cell::Bool(parse_bool(raw).ok_or_else(|| bad("a Boolean"))?),
                FeatureType::Text => Cell::Text(raw.to_string()),
            };
            row.push(cell);
        }
        table.rows.push(row);
    }
    if !saw_record {
        return Err(DataError::Empty {
            path: path.to_path_buf(),
        });
    }
    Ok(table)
}

/// Supervision signal of a prepared dataset.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    None,
    Real(Vec<f64>),
    Class { index: Vec<usize>, classes: Vec<Value> },
}

/// Numeric design matrix ready for training, split into a train prefix and a
/// test suffix at `split`.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub x: Vec<Vec<f64>>,
    pub target: Target,
    pub timestamps: Option<Vec<NaiveDateTime>>,
    pub split: usize,
    pub missing_rows: usize,
    /// Ordinal vocabularies of text inputs, fitted on the train split.
    pub encoders: Vec<Option<Vec<String>>>,
    pub notes: Vec<String>,
}

impl PreparedData {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn train_x(&self) -> &[Vec<f64>] {
        &self.x[..self.split]
    }

    pub fn test_x(&self) -> &[Vec<f64>] {
        &self.x[self.split..]
    }

    pub fn test_len(&self) -> usize {
        self.x.len() - self.split
    }

    pub fn classes(&self) -> &[Value] {
        match &self.target {
            Target::Class { classes, .. } => classes,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub path: PathBuf,
    pub seed: u64,
    pub test_size: f64,
}

/// Number of held-out rows for `n` rows at the given test share.
pub fn test_count(n: usize, test_size: f64) -> usize {
    ((n as f64) * test_size + 1e-9).floor() as usize
}

/// Loads and splits the dataset of a component. The file is read from
/// `opts.path` (already rebased by the caller).
pub fn load_dataset(spec: &DataAnalyticsSpec, opts: &LoadOptions) -> Result<PreparedData, DataError> {
    let table = read_table(&opts.path, &spec.features, spec.timestamps)?;
    if table.rows.is_empty() {
        return Err(DataError::Empty {
            path: opts.path.clone(),
        });
    }
    Ok(prepare(
        &spec.schema(),
        table,
        spec.is_sequential(),
        opts.seed,
        opts.test_size,
    ))
}

fn prepare(schema: &Schema, table: Table, sequential: bool, seed: u64, test_size: f64) -> PreparedData {
    let Table {
        mut rows,
        mut timestamps,
        missing,
    } = table;
    let n = rows.len();
    if !sequential {
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
        let mut taken: Vec<Option<Vec<Cell>>> = rows.into_iter().map(Some).collect();
        rows = order.iter().map(|&i| taken[i].take().expect("permutation")).collect();
        if let Some(ts) = timestamps.as_mut() {
            *ts = order.iter().map(|&i| ts[i]).collect();
        }
    }
    let split = n - test_count(n, test_size);

    let n_inputs = schema.inputs.len();
    let encoders: Vec<Option<Vec<String>>> = schema
        .inputs
        .iter()
        .enumerate()
        .map(|(j, f)| {
            (f.ty == FeatureType::Text).then(|| {
                let mut vocab: Vec<String> = Vec::new();
                for row in &rows[..split] {
                    if let Cell::Text(s) = &row[j] {
                        if !vocab.contains(s) {
                            vocab.push(s.clone());
                        }
                    }
                }
                vocab
            })
        })
        .collect();

    let x = rows
        .iter()
        .map(|row| encode_cells(&row[..n_inputs], &encoders))
        .collect();
    let target = match &schema.label {
        None => Target::None,
        Some(label) => {
            let cells: Vec<&Cell> = rows.iter().map(|r| &r[n_inputs]).collect();
            build_target(label.ty, &cells, None)
        }
    };

    PreparedData {
        x,
        target,
        timestamps,
        split,
        missing_rows: missing,
        encoders,
        notes: Vec::new(),
    }
}

fn encode_cells(cells: &[Cell], encoders: &[Option<Vec<String>>]) -> Vec<f64> {
    cells
        .iter()
        .zip(encoders)
        .map(|(cell, enc)| match cell {
            Cell::Num(v) => *v,
            Cell::Bool(b) => f64::from(u8::from(*b)),
            Cell::Text(s) => encode_text(s, enc.as_deref().unwrap_or(&[])),
        })
        .collect()
}

/// Ordinal code of a text value; unseen values map one past the vocabulary.
pub fn encode_text(s: &str, vocab: &[String]) -> f64 {
    vocab.iter().position(|v| v == s).unwrap_or(vocab.len()) as f64
}

/// Class vocabulary for a label type: `[false, true]` for Booleans, sorted
/// distinct strings for text.
fn build_target(ty: FeatureType, cells: &[&Cell], classes: Option<&[Value]>) -> Target {
    match ty {
        FeatureType::Integer | FeatureType::Real => Target::Real(
            cells
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => *v,
                    _ => 0.0,
                })
                .collect(),
        ),
        FeatureType::Boolean | FeatureType::Text => {
            let classes: Vec<Value> = match classes {
                Some(c) => c.to_vec(),
                None if ty == FeatureType::Boolean => vec![Value::Bool(false), Value::Bool(true)],
                None => {
                    let mut seen: Vec<String> = cells
                        .iter()
                        .filter_map(|c| match c {
                            Cell::Text(s) => Some(s.clone()),
                            _ => None,
                        })
                        .collect();
                    seen.sort();
                    seen.dedup();
                    seen.into_iter().map(Value::Text).collect()
                }
            };
            let index = cells
                .iter()
                .map(|c| {
                    let v = match c {
                        Cell::Bool(b) => Value::Bool(*b),
                        Cell::Text(s) => Value::Text(s.clone()),
                        Cell::Num(v) => Value::Real(*v),
                    };
                    classes.iter().position(|k| *k == v).unwrap_or(usize::MAX)
                })
                .collect();
            Target::Class { index, classes }
        }
    }
}

/// Encodes an already-read table with the encoders and classes of a fitted
/// model. Every row lands in the test split.
pub fn prepare_for_model(
    schema: &Schema,
    table: Table,
    encoders: &[Option<Vec<String>>],
    classes: &[Value],
) -> PreparedData {
    let n_inputs = schema.inputs.len();
    let x = table
        .rows
        .iter()
        .map(|row| encode_cells(&row[..n_inputs], encoders))
        .collect();
    let target = match &schema.label {
        None => Target::None,
        Some(label) => {
            let cells: Vec<&Cell> = table.rows.iter().map(|r| &r[n_inputs]).collect();
            let known = (!classes.is_empty()).then_some(classes);
            build_target(label.ty, &cells, known)
        }
    };
    PreparedData {
        x,
        target,
        timestamps: table.timestamps,
        split: 0,
        missing_rows: table.missing,
        encoders: encoders.to_vec(),
        notes: Vec::new(),
    }
}

fn append_lock(path: &Path) -> Arc<Mutex<()>> {
    static LOCKS: OnceLock<Mutex<HashMap<PathBuf, Arc<Mutex<()>>>>> = OnceLock::new();
    let key = fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf());
    let mut map = LOCKS
        .get_or_init(|| Mutex::new(HashMap::new()))
        .lock()
        .unwrap_or_else(|e| e.into_inner());
    map.entry(key).or_default().clone()
}

/// Appends one row to a component's dataset: `[timestamp,] inputs
/// [, prediction]`. The prediction column is written only for labeled
/// components, so the row keeps the dataset's own layout.
pub fn save_prediction(
    spec: &DataAnalyticsSpec,
    path: &Path,
    inputs: &[Value],
    prediction: Option<&Value>,
    now: NaiveDateTime,
) -> Result<(), DataError> {
    let mut fields: Vec<String> = Vec::with_capacity(inputs.len() + 2);
    if spec.timestamps {
        fields.push(format_timestamp(&now));
    }
    fields.extend(inputs.iter().map(|v| v.to_string()));
    if spec.labels {
        let p = prediction
            .cloned()
            .or_else(|| spec.label().map(|l| Value::zero(l.ty)))
            .unwrap_or(Value::Int(0));
        fields.push(p.to_string());
    }

    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    writer
        .write_record(&fields)
        .and_then(|_| writer.flush().map_err(csv::Error::from))
        .map_err(|e| DataError::Malformed {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    let line = writer.into_inner().map_err(|e| DataError::Malformed {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;

    let lock = append_lock(path);
    let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
    let io_err = |source| DataError::Unwritable {
        path: path.to_path_buf(),
        source,
    };
    let mut file = OpenOptions::new()
        .read(true)
        .append(true)
        .create(true)
        .open(path)
        .map_err(io_err)?;
    let len = file.metadata().map_err(io_err)?.len();
    if len > 0 {
        let mut last = [0u8; 1];
        file.seek(SeekFrom::Start(len - 1)).map_err(io_err)?;
        file.read_exact(&mut last).map_err(io_err)?;
        if last[0] != b'\n' {
            file.write_all(b"\n").map_err(io_err)?;
        }
    }
    file.write_all(&line).map_err(io_err)?;
    Ok(())
}
