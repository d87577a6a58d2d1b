//! The `.mlqm` trained-model document: versioned, line-oriented key/value
//! text with explicit array shapes. Floats are written in shortest
//! round-trip form, so a document reloads to bit-identical parameters.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use chrono::NaiveDateTime;

use crate::algo::kmeans::KMeansParams;
use crate::algo::linear::LinearParams;
use crate::algo::logistic::LogisticParams;
use crate::algo::mlp::{MlpParams, Output};
use crate::algo::naive_bayes::NaiveBayesParams;
use crate::algo::tree::{TreeNode, TreeParams};
use crate::error::MlError;
use crate::model::{ModelParams, TrainedModel};
use crate::preprocess::FittedScaler;
use crate::spec::{Activation, Family, Feature, FeatureType, ScalerKind, Schema, Task};
use crate::value::Value;

pub const MAGIC: &str = "MLQM";
pub const VERSION: u32 = 1;
pub const EXTENSION: &str = "mlqm";
const TIME_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn tokenize(line: &str) -> Result<Vec<String>, String> {
    let mut tokens = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c == ' ' {
            chars.next();
            continue;
        }
        let mut tok = String::new();
        if c == '"' {
            chars.next();
            tok.push('"');
            loop {
                match chars.next() {
                    None => return Err("unterminated string".into()),
                    Some('"') => break,
                    Some('\\') => match chars.next() {
                        Some('n') => tok.push('\n'),
                        Some('r') => tok.push('\r'),
                        Some('t') => tok.push('\t'),
                        Some('"') => tok.push('"'),
                        Some('\\') => tok.push('\\'),
                        _ => return Err("bad escape".into()),
                    },
                    Some(c) => tok.push(c),
                }
            }
        } else {
            while let Some(&c) = chars.peek() {
                if c == ' ' {
                    break;
                }
                tok.push(c);
                chars.next();
            }
        }
        tokens.push(tok);
    }
    Ok(tokens)
}

/// Strings come back from `tokenize` prefixed with `"`.
fn unquote(tok: &str) -> Option<&str> {
    tok.strip_prefix('"')
}

fn write_array(out: &mut String, name: &str, shape: &[usize], data: &[f64]) {
    let dims: Vec<String> = shape.iter().map(|d| d.to_string()).collect();
    let _ = write!(out, "array {name} [{}]", dims.join(","));
    for v in data {
        let _ = write!(out, " {v:?}");
    }
    out.push('\n');
}

fn write_value(v: &Value) -> String {
    match v {
        Value::Bool(b) => b.to_string(),
        Value::Int(i) => i.to_string(),
        Value::Real(r) => format!("{r:?}"),
        Value::Text(s) => quote(s),
    }
}

pub fn serialize_model(m: &TrainedModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {VERSION}");
    let _ = writeln!(out, "family {}", m.family);
    let _ = writeln!(out, "task {}", m.task);
    let _ = writeln!(out, "trained_at {}", m.trained_at.format(TIME_FORMAT));
    let _ = writeln!(out, "timestamps {}", m.timestamps);
    for f in &m.schema.inputs {
        let _ = writeln!(out, "input {} {}", quote(&f.name), f.ty);
    }
    match &m.schema.label {
        Some(f) => {
            let _ = writeln!(out, "label {} {}", quote(&f.name), f.ty);
        }
        None => out.push_str("label -\n"),
    }
    let _ = writeln!(out, "output {}", m.output.map_or("-", |t| t.as_str()));
    let _ = writeln!(out, "fingerprint {}", quote(&m.fingerprint()));
    for (i, enc) in m.encoders.iter().enumerate() {
        if let Some(vocab) = enc {
            let _ = write!(out, "encoder {i} [{}]", vocab.len());
            for s in vocab {
                let _ = write!(out, " {}", quote(s));
            }
            out.push('\n');
        }
    }
    let _ = write!(out, "classes [{}]", m.classes.len());
    for c in &m.classes {
        let _ = write!(out, " {}", write_value(c));
    }
    out.push('\n');
    let scaler = match m.scaler.kind {
        ScalerKind::Standard => "standard",
        ScalerKind::MinMax => "minmax",
        ScalerKind::None => "none",
    };
    let _ = writeln!(out, "scaler {scaler}");
    let d = m.scaler.offset.len();
    write_array(&mut out, "scaler.offset", &[d], &m.scaler.offset);
    write_array(&mut out, "scaler.scale", &[d], &m.scaler.scale);

    match &m.params {
        ModelParams::Linear(p) => {
            write_array(&mut out, "coef", &[p.coef.len()], &p.coef);
            write_array(&mut out, "intercept", &[1], &[p.intercept]);
        }
        ModelParams::Logistic(p) => {
            let k = p.weights.len();
            let d = p.weights.first().map_or(0, |w| w.len());
            let flat: Vec<f64> = p.weights.iter().flatten().copied().collect();
            write_array(&mut out, "weights", &[k, d], &flat);
            write_array(&mut out, "bias", &[k], &p.bias);
        }
        ModelParams::NaiveBayes(p) => {
            let c = p.priors.len();
            let d = p.means.first().map_or(0, |w| w.len());
            write_array(&mut out, "priors", &[c], &p.priors);
            let means: Vec<f64> = p.means.iter().flatten().copied().collect();
            let vars: Vec<f64> = p.vars.iter().flatten().copied().collect();
            write_array(&mut out, "means", &[c, d], &means);
            write_array(&mut out, "vars", &[c, d], &vars);
        }
        ModelParams::Tree(p) => {
            let n = p.nodes.len();
            let feature: Vec<f64> = p.nodes.iter().map(|t| t.feature.map_or(-1.0, |f| f as f64)).collect();
            let threshold: Vec<f64> = p.nodes.iter().map(|t| t.threshold).collect();
            let left: Vec<f64> = p.nodes.iter().map(|t| t.left as f64).collect();
            let right: Vec<f64> = p.nodes.iter().map(|t| t.right as f64).collect();
            let class: Vec<f64> = p.nodes.iter().map(|t| t.class as f64).collect();
            write_array(&mut out, "tree.feature", &[n], &feature);
            write_array(&mut out, "tree.threshold", &[n], &threshold);
            write_array(&mut out, "tree.left", &[n], &left);
            write_array(&mut out, "tree.right", &[n], &right);
            write_array(&mut out, "tree.class", &[n], &class);
        }
        ModelParams::Mlp(p) => {
            let _ = writeln!(out, "activation {}", p.activation.as_str());
            let output = match p.output {
                Output::Softmax => "softmax",
                Output::Linear => "linear",
            };
            let _ = writeln!(out, "output_layer {output}");
            write_array(&mut out, "w1", &[p.hidden, p.inputs], &p.w1);
            write_array(&mut out, "b1", &[p.hidden], &p.b1);
            write_array(&mut out, "w2", &[p.outputs, p.hidden], &p.w2);
            write_array(&mut out, "b2", &[p.outputs], &p.b2);
            write_array(&mut out, "target", &[2], &[p.target_shift, p.target_scale]);
        }
        ModelParams::KMeans(p) => {
            let k = p.centroids.len();
            let d = p.centroids.first().map_or(0, |c| c.len());
            let flat: Vec<f64> = p.centroids.iter().flatten().copied().collect();
            write_array(&mut out, "centroids", &[k, d], &flat);
        }
    }
    out.push_str("end\n");
    out
}

struct Array {
    shape: Vec<usize>,
    data: Vec<f64>,
}

struct Parser {
    fields: HashMap<String, (usize, Vec<String>)>,
    arrays: HashMap<String, (usize, Array)>,
    inputs: Vec<Feature>,
    encoders: Vec<(usize, Vec<String>)>,
}

fn corrupt(line: usize, message: impl Into<String>) -> MlError {
    MlError::Corrupt {
        line,
        message: message.into(),
    }
}

fn parse_shape(tok: &str, line: usize) -> Result<Vec<usize>, MlError> {
    let inner = tok
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| corrupt(line, format!("expected a shape, found `{tok}`")))?;
    if inner.is_empty() {
        return Ok(vec![]);
    }
    inner
        .split(',')
        .map(|d| d.parse::<usize>().map_err(|_| corrupt(line, format!("bad dimension `{d}`"))))
        .collect()
}

impl Parser {
    fn field(&self, key: &str) -> Result<(usize, &[String]), MlError> {
        self.fields
            .get(key)
            .map(|(l, v)| (*l, v.as_slice()))
            .ok_or_else(|| corrupt(0, format!("missing `{key}`")))
    }

    fn word(&self, key: &str) -> Result<(usize, &str), MlError> {
        let (line, toks) = self.field(key)?;
        match toks {
            [w] => Ok((line, w.as_str())),
            _ => Err(corrupt(line, format!("`{key}` expects one value"))),
        }
    }

    fn array(&self, name: &str, shape: &[usize]) -> Result<Vec<f64>, MlError> {
        let (line, a) = self
            .arrays
            .get(name)
            .ok_or_else(|| corrupt(0, format!("missing array `{name}`")))?;
        if a.shape != shape {
            return Err(corrupt(
                *line,
                format!("array `{name}` has shape {:?}, expected {:?}", a.shape, shape),
            ));
        }
        Ok(a.data.clone())
    }

    fn array_any(&self, name: &str) -> Result<(usize, &Array), MlError> {
        self.arrays
            .get(name)
            .map(|(l, a)| (*l, a))
            .ok_or_else(|| corrupt(0, format!("missing array `{name}`")))
    }
}

fn parse_feature(toks: &[String], line: usize) -> Result<Feature, MlError> {
    match toks {
        [name, ty] => {
            let name = unquote(name).ok_or_else(|| corrupt(line, "feature name must be quoted"))?;
            let ty = FeatureType::from_name(ty).ok_or_else(|| corrupt(line, format!("unknown type `{ty}`")))?;
            Ok(Feature::new(name, ty))
        }
        _ => Err(corrupt(line, "expected a quoted name and a type")),
    }
}

fn parse_value(tok: &str, ty: Option<FeatureType>, line: usize) -> Result<Value, MlError> {
    if let Some(s) = unquote(tok) {
        return Ok(Value::Text(s.to_string()));
    }
    let bad = || corrupt(line, format!("bad value `{tok}`"));
    match ty {
        Some(FeatureType::Boolean) => match tok {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => Err(bad()),
        },
        Some(FeatureType::Integer) => tok.parse().map(Value::Int).map_err(|_| bad()),
        Some(FeatureType::Real) => tok.parse().map(Value::Real).map_err(|_| bad()),
        _ => Err(bad()),
    }
}

fn to_index(v: f64, bound: usize, line: usize, what: &str) -> Result<usize, MlError> {
    if v >= 0.0 && v.fract() == 0.0 && (v as usize) < bound {
        Ok(v as usize)
    } else {
        Err(corrupt(line, format!("{what} index {v} out of range")))
    }
}

pub fn deserialize_model(text: &str) -> Result<TrainedModel, MlError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| corrupt(1, "empty document"))?;
    let mut head = header.split(' ');
    if head.next() != Some(MAGIC) {
        return Err(corrupt(1, "not a model document"));
    }
    let version = head.next().unwrap_or("");
    if version != VERSION.to_string() {
        return Err(MlError::Version {
            found: version.to_string(),
            expected: VERSION,
        });
    }

    let mut p = Parser {
        fields: HashMap::new(),
        arrays: HashMap::new(),
        inputs: Vec::new(),
        encoders: Vec::new(),
    };
    let mut ended = false;
    for (no, line) in lines {
        if ended {
            if line.trim().is_empty() {
                continue;
            }
            return Err(corrupt(no, "content after `end`"));
        }
        let toks = tokenize(line).map_err(|e| corrupt(no, e))?;
        let Some((key, rest)) = toks.split_first() else {
            continue;
        };
        match key.as_str() {
            "end" => ended = true,
            "input" => p.inputs.push(parse_feature(rest, no)?),
            "encoder" => {
                let (idx, rest) = rest.split_first().ok_or_else(|| corrupt(no, "encoder index missing"))?;
                let idx: usize = idx.parse().map_err(|_| corrupt(no, "bad encoder index"))?;
                let (shape, rest) = rest.split_first().ok_or_else(|| corrupt(no, "encoder shape missing"))?;
                let shape = parse_shape(shape, no)?;
                if shape != [rest.len()] {
                    return Err(corrupt(no, "encoder length does not match its shape"));
                }
                let vocab = rest
                    .iter()
                    .map(|t| unquote(t).map(str::to_string).ok_or_else(|| corrupt(no, "vocabulary entries must be quoted")))
                    .collect::<Result<_, _>>()?;
                p.encoders.push((idx, vocab));
            }
            "array" => {
                let [name, shape, values @ ..] = rest else {
                    return Err(corrupt(no, "array needs a name and a shape"));
                };
                let shape = parse_shape(shape, no)?;
                let expected: usize = shape.iter().product();
                if values.len() != expected {
                    return Err(corrupt(
                        no,
                        format!("array `{name}` holds {} values, shape needs {expected}", values.len()),
                    ));
                }
                let data = values
                    .iter()
                    .map(|v| v.parse::<f64>().map_err(|_| corrupt(no, format!("bad number `{v}`"))))
                    .collect::<Result<Vec<_>, _>>()?;
                if p.arrays.insert(name.clone(), (no, Array { shape, data })).is_some() {
                    return Err(corrupt(no, format!("duplicate array `{name}`")));
                }
            }
            _ => {
                if p.fields.insert(key.clone(), (no, rest.to_vec())).is_some() {
                    return Err(corrupt(no, format!("duplicate key `{key}`")));
                }
            }
        }
    }
    if !ended {
        return Err(corrupt(text.lines().count(), "document is truncated (missing `end`)"));
    }

    let (line, family) = p.word("family")?;
    let family = Family::from_name(family).filter(|f| f.as_str() == family).ok_or_else(|| corrupt(line, format!("unknown family `{family}`")))?;
    let (line, task) = p.word("task")?;
    let task = Task::from_name(task).ok_or_else(|| corrupt(line, format!("unknown task `{task}`")))?;
    let (line, at) = p.word("trained_at")?;
    let trained_at = NaiveDateTime::parse_from_str(at, TIME_FORMAT).map_err(|_| corrupt(line, "bad trained_at"))?;
    let (line, ts) = p.word("timestamps")?;
    let timestamps = match ts {
        "true" => true,
        "false" => false,
        _ => return Err(corrupt(line, "bad timestamps flag")),
    };
    let (line, label_toks) = p.field("label")?;
    let label = match label_toks {
        [dash] if dash == "-" => None,
        toks => Some(parse_feature(toks, line)?),
    };
    let (line, output) = p.word("output")?;
    let output = match output {
        "-" => None,
        t => Some(FeatureType::from_name(t).ok_or_else(|| corrupt(line, format!("unknown type `{t}`")))?),
    };
    let schema = Schema {
        inputs: p.inputs.clone(),
        label,
    };
    let (line, fp) = p.word("fingerprint")?;
    if unquote(fp) != Some(schema.fingerprint().as_str()) {
        return Err(corrupt(line, "fingerprint does not match the declared schema"));
    }
    let d = schema.inputs.len();
    let mut encoders: Vec<Option<Vec<String>>> = vec![None; d];
    for (idx, vocab) in &p.encoders {
        let slot = encoders.get_mut(*idx).ok_or_else(|| corrupt(0, format!("encoder index {idx} out of range")))?;
        *slot = Some(vocab.clone());
    }

    let (line, class_toks) = p.field("classes")?;
    let (shape, values) = class_toks.split_first().ok_or_else(|| corrupt(line, "classes shape missing"))?;
    if parse_shape(shape, line)? != [values.len()] {
        return Err(corrupt(line, "classes length does not match its shape"));
    }
    let label_ty = schema.label.as_ref().map(|f| f.ty);
    let classes = values
        .iter()
        .map(|t| parse_value(t, label_ty, line))
        .collect::<Result<Vec<_>, _>>()?;

    let (line, kind) = p.word("scaler")?;
    let kind = match kind {
        "standard" => ScalerKind::Standard,
        "minmax" => ScalerKind::MinMax,
        "none" => ScalerKind::None,
        _ => return Err(corrupt(line, format!("unknown scaler `{kind}`"))),
    };
    let scaler = FittedScaler {
        kind,
        offset: p.array("scaler.offset", &[d])?,
        scale: p.array("scaler.scale", &[d])?,
    };

    let params = match family {
        Family::LinearRegression => ModelParams::Linear(LinearParams {
            coef: p.array("coef", &[d])?,
            intercept: p.array("intercept", &[1])?[0],
        }),
        Family::LogisticRegression => {
            let (line, b) = p.array_any("bias")?;
            let k = b.shape.first().copied().unwrap_or(0);
            if k == 0 {
                return Err(corrupt(line, "empty bias"));
            }
            let w = p.array("weights", &[k, d])?;
            ModelParams::Logistic(LogisticParams {
                weights: w.chunks(d.max(1)).take(k).map(<[f64]>::to_vec).collect(),
                bias: p.array("bias", &[k])?,
            })
        }
        Family::GaussianNaiveBayes => {
            let (_, pr) = p.array_any("priors")?;
            let c = pr.shape.first().copied().unwrap_or(0);
            let split = |v: Vec<f64>| -> Vec<Vec<f64>> {
                if d == 0 {
                    vec![Vec::new(); c]
                } else {
                    v.chunks(d).map(<[f64]>::to_vec).collect()
                }
            };
            ModelParams::NaiveBayes(NaiveBayesParams {
                priors: p.array("priors", &[c])?,
                means: split(p.array("means", &[c, d])?),
                vars: split(p.array("vars", &[c, d])?),
            })
        }
        Family::DecisionTreeClassifier => {
            let (line, f) = p.array_any("tree.feature")?;
            let n = f.shape.first().copied().unwrap_or(0);
            if n == 0 {
                return Err(corrupt(line, "empty tree"));
            }
            let feature = p.array("tree.feature", &[n])?;
            let threshold = p.array("tree.threshold", &[n])?;
            let left = p.array("tree.left", &[n])?;
            let right = p.array("tree.right", &[n])?;
            let class = p.array("tree.class", &[n])?;
            let n_classes = classes.len().max(1);
            let mut nodes = Vec::with_capacity(n);
            for i in 0..n {
                let feat = if feature[i] == -1.0 {
                    None
                } else {
                    Some(to_index(feature[i], d, line, "feature")?)
                };
                let (l, r) = if feat.is_some() {
                    // Children are stored after their parent, which keeps walks finite.
                    let l = to_index(left[i], n, line, "child")?;
                    let r = to_index(right[i], n, line, "child")?;
                    if l <= i || r <= i {
                        return Err(corrupt(line, "tree children must follow their parent"));
                    }
                    (l, r)
                } else {
                    (to_index(left[i], n, line, "child")?, to_index(right[i], n, line, "child")?)
                };
                nodes.push(TreeNode {
                    feature: feat,
                    threshold: threshold[i],
                    left: l,
                    right: r,
                    class: to_index(class[i], n_classes, line, "class")?,
                });
            }
            ModelParams::Tree(TreeParams { nodes })
        }
        Family::NnMultilayerPerceptron => {
            let (line, act) = p.word("activation")?;
            let activation = Activation::from_name(act).ok_or_else(|| corrupt(line, "unknown activation"))?;
            let (line, out) = p.word("output_layer")?;
            let output = match out {
                "softmax" => Output::Softmax,
                "linear" => Output::Linear,
                _ => return Err(corrupt(line, "unknown output layer")),
            };
            let (_, b1) = p.array_any("b1")?;
            let hidden = b1.shape.first().copied().unwrap_or(0);
            let (_, b2) = p.array_any("b2")?;
            let outputs = b2.shape.first().copied().unwrap_or(0);
            let target = p.array("target", &[2])?;
            ModelParams::Mlp(MlpParams {
                activation,
                output,
                inputs: d,
                hidden,
                outputs,
                w1: p.array("w1", &[hidden, d])?,
                b1: p.array("b1", &[hidden])?,
                w2: p.array("w2", &[outputs, hidden])?,
                b2: p.array("b2", &[outputs])?,
                target_shift: target[0],
                target_scale: target[1],
            })
        }
        Family::KMeans => {
            let (line, c) = p.array_any("centroids")?;
            let k = c.shape.first().copied().unwrap_or(0);
            if k == 0 {
                return Err(corrupt(line, "no centroids"));
            }
            let flat = p.array("centroids", &[k, d])?;
            let centroids = if d == 0 {
                vec![Vec::new(); k]
            } else {
                flat.chunks(d).map(<[f64]>::to_vec).collect()
            };
            ModelParams::KMeans(KMeansParams { centroids })
        }
    };

    Ok(TrainedModel {
        family,
        task,
        schema,
        timestamps,
        output,
        encoders,
        scaler,
        classes,
        params,
        trained_at,
    })
}

pub fn write_model(model: &TrainedModel, path: &Path) -> Result<(), MlError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| MlError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, serialize_model(model)).map_err(|source| MlError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_model(path: &Path) -> Result<TrainedModel, MlError> {
    let text = std::fs::read_to_string(path).map_err(|source| MlError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    deserialize_model(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::parse_timestamp;

    fn base(params: ModelParams, inputs: usize) -> TrainedModel {
        TrainedModel {
            family: params.family(),
            task: Task::Regression,
            schema: Schema {
                inputs: (0..inputs).map(|i| Feature::new(format!("f{i}"), FeatureType::Real)).collect(),
                label: Some(Feature::new("y", FeatureType::Real)),
            },
            timestamps: false,
            output: Some(FeatureType::Real),
            encoders: vec![None; inputs],
            scaler: FittedScaler::identity(inputs),
            classes: vec![],
            params,
            trained_at: parse_timestamp("17-03-2021 22:49:06").unwrap(),
        }
    }

    #[test]
    fn linear_document_shape() {
        let m = base(
            ModelParams::Linear(LinearParams {
                coef: vec![2.0, 0.1 + 0.2],
                intercept: 1.0,
            }),
            2,
        );
        let doc = serialize_model(&m);
        assert!(doc.starts_with("MLQM 1\nfamily linear_regression\n"));
        assert!(doc.contains("array coef [2] 2.0 0.30000000000000004\n"));
        assert!(doc.contains("array intercept [1] 1.0\n"));
        assert_eq!(deserialize_model(&doc).unwrap(), m);
    }

    #[test]
    fn text_encoders_and_classes_round_trip() {
        let mut m = base(
            ModelParams::Tree(TreeParams {
                nodes: vec![
                    TreeNode { feature: Some(1), threshold: 500.5, left: 1, right: 2, class: 0 },
                    TreeNode { feature: None, threshold: 0.0, left: 0, right: 0, class: 0 },
                    TreeNode { feature: None, threshold: 0.0, left: 0, right: 0, class: 1 },
                ],
            }),
            2,
        );
        m.task = Task::Classification;
        m.schema.inputs[0].ty = FeatureType::Text;
        m.schema.label = Some(Feature::new("y", FeatureType::Text));
        m.encoders[0] = Some(vec!["10.0.0.1".into(), "we\"ird name".into()]);
        m.classes = vec![Value::Text("bad".into()), Value::Text("good".into())];
        m.output = Some(FeatureType::Text);
        let doc = serialize_model(&m);
        assert_eq!(deserialize_model(&doc).unwrap(), m);
    }

    #[test]
    fn rejects_unknown_family_and_version() {
        let m = base(ModelParams::Linear(LinearParams { coef: vec![1.0], intercept: 0.0 }), 1);
        let doc = serialize_model(&m);
        let bad = doc.replace("family linear_regression", "family random_forest");
        assert!(matches!(deserialize_model(&bad), Err(MlError::Corrupt { .. })));
        let bad = doc.replace("MLQM 1", "MLQM 2");
        assert!(matches!(deserialize_model(&bad), Err(MlError::Version { .. })));
    }

    #[test]
    fn rejects_truncation_and_bad_shapes() {
        let m = base(ModelParams::Linear(LinearParams { coef: vec![1.0, 2.0], intercept: 0.0 }), 2);
        let doc = serialize_model(&m);
        let cut = &doc[..doc.len() - 4];
        assert!(matches!(deserialize_model(cut), Err(MlError::Corrupt { .. })));
        let bad = doc.replace("array coef [2] 1.0 2.0", "array coef [3] 1.0 2.0");
        assert!(matches!(deserialize_model(&bad), Err(MlError::Corrupt { .. })));
        let bad = doc.replace("array coef [2] 1.0 2.0", "array coef [1] 1.0");
        assert!(matches!(deserialize_model(&bad), Err(MlError::Corrupt { .. })));
    }

    #[test]
    fn special_floats_survive() {
        let m = base(
            ModelParams::Linear(LinearParams {
                coef: vec![-0.0, 1e-300, f64::MAX],
                intercept: 5e-324,
            }),
            3,
        );
        let back = deserialize_model(&serialize_model(&m)).unwrap();
        let ModelParams::Linear(p) = back.params else { panic!() };
        assert_eq!(p.coef[0].to_bits(), (-0.0f64).to_bits());
        assert_eq!(p.intercept.to_bits(), 5e-324f64.to_bits());
    }
}
