use std::fmt;

use serde::{Deserialize, Serialize};

use crate::spec::FeatureType;

/// A scalar flowing between the statechart world and the ML engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Real(f64),
    Text(String),
}

impl Value {
    pub fn feature_type(&self) -> FeatureType {
        match self {
            Value::Int(_) => FeatureType::Integer,
            Value::Real(_) => FeatureType::Real,
            Value::Bool(_) => FeatureType::Boolean,
            Value::Text(_) => FeatureType::Text,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(v) => Some(*v as f64),
            Value::Real(v) => Some(*v),
            _ => None,
        }
    }

    /// Default value of a type: numeric zero, `false`, or the empty string.
    pub fn zero(ty: FeatureType) -> Value {
        match ty {
            FeatureType::Integer => Value::Int(0),
            FeatureType::Real => Value::Real(0.0),
            FeatureType::Boolean => Value::Bool(false),
            FeatureType::Text => Value::Text(String::new()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Real(v) => write!(f, "{v}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

/// Parses a Boolean dataset cell.
pub fn parse_bool(cell: &str) -> Option<bool> {
    match cell {
        "true" | "TRUE" | "True" | "1" => Some(true),
        "false" | "FALSE" | "False" | "0" => Some(false),
        _ => None,
    }
}
