//! Source-faithful syntax tree. Every node carries a span; spans compare equal
//! unconditionally, so `==` is structural equality.

use std::fmt;

pub use mlq_ml::HyperValue;
use serde::{Deserialize, Serialize};

use crate::diag::Span;

#[derive(Debug, Clone, PartialEq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Self {
        Ident {
            name: name.into(),
            span: Span::default(),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.name
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TypeName {
    Int32,
    Long,
    Float,
    Double,
    Boolean,
    String,
}

impl TypeName {
    pub const ALL: [TypeName; 6] = [
        TypeName::Int32,
        TypeName::Long,
        TypeName::Float,
        TypeName::Double,
        TypeName::Boolean,
        TypeName::String,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TypeName::Int32 => "Int32",
            TypeName::Long => "Long",
            TypeName::Float => "Float",
            TypeName::Double => "Double",
            TypeName::Boolean => "Boolean",
            TypeName::String => "String",
        }
    }

    pub fn from_name(name: &str) -> Option<TypeName> {
        TypeName::ALL.into_iter().find(|t| t.as_str() == name)
    }
}

impl fmt::Display for TypeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstAnnotation {
    /// Key without the `@`.
    pub key: String,
    pub value: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AstUnit {
    pub annotations: Vec<AstAnnotation>,
    pub things: Vec<AstThing>,
    pub configurations: Vec<AstConfiguration>,
}

impl AstUnit {
    /// Concatenates units parsed from separate files.
    pub fn merge(units: impl IntoIterator<Item = AstUnit>) -> AstUnit {
        let mut out = AstUnit::default();
        for u in units {
            out.annotations.extend(u.annotations);
            out.things.extend(u.things);
            out.configurations.extend(u.configurations);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstThing {
    pub name: Ident,
    pub is_fragment: bool,
    pub includes: Vec<Ident>,
    pub annotations: Vec<AstAnnotation>,
    pub messages: Vec<AstMessage>,
    pub ports: Vec<AstPort>,
    pub properties: Vec<AstProperty>,
    pub analytics: Vec<AstDataAnalytics>,
    pub statecharts: Vec<AstStateChart>,
    pub span: Span,
}

impl AstThing {
    pub fn new(name: &str) -> Self {
        AstThing {
            name: Ident::new(name),
            is_fragment: false,
            includes: Vec::new(),
            annotations: Vec::new(),
            messages: Vec::new(),
            ports: Vec::new(),
            properties: Vec::new(),
            analytics: Vec::new(),
            statecharts: Vec::new(),
            span: Span::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PortDirection {
    Provided,
    Required,
}

impl PortDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            PortDirection::Provided => "provided",
            PortDirection::Required => "required",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstPort {
    pub direction: PortDirection,
    pub name: Ident,
    pub annotations: Vec<AstAnnotation>,
    pub receives: Vec<Ident>,
    pub sends: Vec<Ident>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstParam {
    pub name: Ident,
    pub ty: TypeName,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstMessage {
    pub name: Ident,
    pub params: Vec<AstParam>,
    pub annotations: Vec<AstAnnotation>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstProperty {
    pub name: Ident,
    pub ty: TypeName,
    pub init: Option<Expr>,
    pub annotations: Vec<AstAnnotation>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrLit {
    pub value: String,
    pub span: Span,
}

impl StrLit {
    pub fn new(value: impl Into<String>) -> Self {
        StrLit {
            value: value.into(),
            span: Span::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstHyper {
    pub key: Ident,
    pub value: HyperValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstAlgorithm {
    pub name: Ident,
    pub instance: Ident,
    pub hyperparameters: Vec<AstHyper>,
    pub span: Span,
}

/// Where each data_analytics parameter was written, keyed by parameter name.
#[derive(Debug, Clone, Default)]
pub struct ParamSpans(pub Vec<(&'static str, Span)>);

impl ParamSpans {
    pub fn get(&self, key: &str) -> Option<&Span> {
        self.0.iter().find(|(k, _)| *k == key).map(|(_, s)| s)
    }
}

impl PartialEq for ParamSpans {
    fn eq(&self, _: &ParamSpans) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstDataAnalytics {
    pub name: Ident,
    pub dalib: Option<StrLit>,
    /// Annotations other than `@dalib`.
    pub annotations: Vec<AstAnnotation>,
    pub labels: bool,
    pub features: Vec<Ident>,
    pub prediction_results: Option<Ident>,
    pub dataset: Option<StrLit>,
    pub automl: bool,
    pub sequential: Option<bool>,
    pub timestamps: bool,
    pub scaler: Option<Ident>,
    pub model_algorithm: Option<AstAlgorithm>,
    pub training_results: Option<StrLit>,
    pub blackbox_ml: Option<bool>,
    pub blackbox_ml_model: Option<StrLit>,
    pub blackbox_import_algorithm: Option<StrLit>,
    pub param_spans: ParamSpans,
    pub span: Span,
}

impl AstDataAnalytics {
    pub fn new(name: &str) -> Self {
        AstDataAnalytics {
            name: Ident::new(name),
            dalib: None,
            annotations: Vec::new(),
            labels: false,
            features: Vec::new(),
            prediction_results: None,
            dataset: None,
            automl: false,
            sequential: None,
            timestamps: false,
            scaler: None,
            model_algorithm: None,
            training_results: None,
            blackbox_ml: None,
            blackbox_ml_model: None,
            blackbox_import_algorithm: None,
            param_spans: ParamSpans::default(),
            span: Span::default(),
        }
    }

    /// Span of parameter `key`, falling back to the block's name.
    pub fn param_span(&self, key: &str) -> &Span {
        self.param_spans.get(key).unwrap_or(&self.name.span)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstStateChart {
    pub name: Ident,
    pub initial: Ident,
    pub annotations: Vec<AstAnnotation>,
    pub on_entry: Vec<AstAction>,
    pub on_exit: Vec<AstAction>,
    pub states: Vec<AstState>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstState {
    pub name: Ident,
    pub is_final: bool,
    pub annotations: Vec<AstAnnotation>,
    pub on_entry: Vec<AstAction>,
    pub on_exit: Vec<AstAction>,
    pub transitions: Vec<AstTransition>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstEvent {
    pub var: Option<Ident>,
    pub port: Ident,
    pub message: Ident,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstTransition {
    pub name: Option<Ident>,
    pub target: Ident,
    pub event: Option<AstEvent>,
    pub action: Vec<AstAction>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstAction {
    pub kind: ActionKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ActionKind {
    Print(Expr),
    Assign {
        target: Ident,
        value: Expr,
    },
    Send {
        port: Ident,
        message: Ident,
        args: Vec<Expr>,
    },
    If {
        cond: Expr,
        then: Vec<AstAction>,
        otherwise: Option<Vec<AstAction>>,
    },
    DaPreprocess(Ident),
    DaTrain(Ident),
    DaPredict {
        da: Ident,
        args: Vec<Expr>,
    },
    DaSave(Ident),
}

impl AstAction {
    pub fn new(kind: ActionKind) -> Self {
        AstAction {
            kind,
            span: Span::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub const ALL: [BinOp; 12] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Eq,
        BinOp::Ne,
        BinOp::Lt,
        BinOp::Le,
        BinOp::Gt,
        BinOp::Ge,
        BinOp::And,
        BinOp::Or,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div => 5,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 3
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    /// Property read.
    Name(Ident),
    /// Message parameter read, `var.param`.
    Param {
        var: Ident,
        param: Ident,
    },
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr {
            kind,
            span: Span::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstInstance {
    pub name: Ident,
    pub thing: Ident,
    pub annotations: Vec<AstAnnotation>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstEndpoint {
    pub instance: Ident,
    pub port: Ident,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstConnector {
    pub from: AstEndpoint,
    pub to: AstEndpoint,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstConfiguration {
    pub name: Ident,
    pub annotations: Vec<AstAnnotation>,
    pub instances: Vec<AstInstance>,
    pub connectors: Vec<AstConnector>,
    pub span: Span,
}
