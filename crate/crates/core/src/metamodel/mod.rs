//! Resolved model: every name bound, fragments merged away.

mod resolve;

use indexmap::IndexMap;
use mlq_ml::{DataAnalyticsSpec, FeatureType};

pub use resolve::{flatten_thing, resolve, resolve_with_diagnostics};

use crate::diag::Span;
use crate::syntax::ast::*;

/// Annotation multimap: key to values in declaration order.
pub type Annotations = IndexMap<String, Vec<String>>;

pub const CLOCK_THING: &str = "Clock";
pub const CLOCK_PORT: &str = "clock";
pub const CLOCK_MESSAGE: &str = "tick";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResolvedModel {
    pub annotations: Annotations,
    pub things: IndexMap<String, Thing>,
    pub configurations: IndexMap<String, Configuration>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Thing {
    pub name: String,
    pub annotations: Annotations,
    pub messages: IndexMap<String, Message>,
    pub ports: IndexMap<String, Port>,
    pub properties: IndexMap<String, Property>,
    pub analytics: IndexMap<String, Analytics>,
    pub behavior: Option<StateChart>,
    /// Supplied by the toolchain rather than the model text.
    pub builtin: bool,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub name: String,
    pub params: Vec<Param>,
    pub annotations: Annotations,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: TypeName,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Port {
    pub name: String,
    pub direction: PortDirection,
    pub receives: Vec<String>,
    pub sends: Vec<String>,
    pub annotations: Annotations,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Property {
    pub name: String,
    pub ty: TypeName,
    pub init: Option<Expr>,
    pub annotations: Annotations,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analytics {
    pub spec: DataAnalyticsSpec,
    pub annotations: Annotations,
    pub param_spans: ParamSpans,
    pub span: Span,
}

impl Analytics {
    pub fn param_span(&self, key: &str) -> &Span {
        self.param_spans.get(key).unwrap_or(&self.span)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateChart {
    pub name: String,
    pub initial: Ident,
    pub annotations: Annotations,
    pub on_entry: Vec<AstAction>,
    pub on_exit: Vec<AstAction>,
    pub states: IndexMap<String, State>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventKey {
    pub port: String,
    pub message: String,
}

impl std::fmt::Display for EventKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}?{}", self.port, self.message)
    }
}

impl StateChart {
    /// Input alphabet: every event key used by a transition, in order of first use.
    pub fn events(&self) -> Vec<EventKey> {
        let mut out: Vec<EventKey> = Vec::new();
        for s in self.states.values() {
            for t in &s.transitions {
                if let Some(k) = t.event.as_ref().map(event_key) {
                    if !out.contains(&k) {
                        out.push(k);
                    }
                }
            }
        }
        out
    }

    pub fn finals(&self) -> impl Iterator<Item = &State> {
        self.states.values().filter(|s| s.is_final)
    }
}

pub fn event_key(e: &AstEvent) -> EventKey {
    EventKey {
        port: e.port.name.clone(),
        message: e.message.name.clone(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub name: String,
    pub is_final: bool,
    pub annotations: Annotations,
    pub on_entry: Vec<AstAction>,
    pub on_exit: Vec<AstAction>,
    pub transitions: Vec<AstTransition>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub name: String,
    pub annotations: Annotations,
    pub instances: IndexMap<String, Instance>,
    pub connectors: Vec<Connector>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub thing: String,
    pub annotations: Annotations,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Endpoint {
    pub instance: String,
    pub port: String,
}

impl std::fmt::Display for Endpoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{}", self.instance, self.port)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Connector {
    pub from: Endpoint,
    pub to: Endpoint,
    pub span: Span,
}

pub fn feature_type(ty: TypeName) -> FeatureType {
    match ty {
        TypeName::Int32 | TypeName::Long => FeatureType::Integer,
        TypeName::Float | TypeName::Double => FeatureType::Real,
        TypeName::Boolean => FeatureType::Boolean,
        TypeName::String => FeatureType::Text,
    }
}

pub fn annotations_of(list: &[AstAnnotation]) -> Annotations {
    let mut out = Annotations::new();
    for a in list {
        out.entry(a.key.clone()).or_default().push(a.value.clone());
    }
    out
}

fn annotation_list(map: &Annotations) -> Vec<AstAnnotation> {
    map.iter()
        .flat_map(|(k, vs)| {
            vs.iter().map(move |v| AstAnnotation {
                key: k.clone(),
                value: v.clone(),
                span: Span::default(),
            })
        })
        .collect()
}

impl ResolvedModel {
    pub fn thing_of(&self, config: &str, instance: &str) -> Option<&Thing> {
        let inst = self.configurations.get(config)?.instances.get(instance)?;
        self.things.get(&inst.thing)
    }

    /// Flattened source form: no fragments, no includes, no built-ins.
    pub fn to_ast(&self) -> AstUnit {
        AstUnit {
            annotations: annotation_list(&self.annotations),
            things: self.things.values().filter(|t| !t.builtin).map(Thing::to_ast).collect(),
            configurations: self.configurations.values().map(Configuration::to_ast).collect(),
        }
    }
}

impl Thing {
    pub fn to_ast(&self) -> AstThing {
        let mut t = AstThing::new(&self.name);
        t.annotations = annotation_list(&self.annotations);
        t.messages = self
            .messages
            .values()
            .map(|m| AstMessage {
                name: Ident::new(&m.name),
                params: m
                    .params
                    .iter()
                    .map(|p| AstParam {
                        name: Ident::new(&p.name),
                        ty: p.ty,
                        span: Span::default(),
                    })
                    .collect(),
                annotations: annotation_list(&m.annotations),
                span: m.span.clone(),
            })
            .collect();
        t.ports = self
            .ports
            .values()
            .map(|p| AstPort {
                direction: p.direction,
                name: Ident::new(&p.name),
                annotations: annotation_list(&p.annotations),
                receives: p.receives.iter().map(Ident::new).collect(),
                sends: p.sends.iter().map(Ident::new).collect(),
                span: p.span.clone(),
            })
            .collect();
        t.properties = self
            .properties
            .values()
            .map(|p| AstProperty {
                name: Ident::new(&p.name),
                ty: p.ty,
                init: p.init.clone(),
                annotations: annotation_list(&p.annotations),
                span: p.span.clone(),
            })
            .collect();
        t.analytics = self.analytics.values().map(Analytics::to_ast).collect();
        t.statecharts = self.behavior.iter().map(StateChart::to_ast).collect();
        t
    }
}

impl Analytics {
    pub fn to_ast(&self) -> AstDataAnalytics {
        let s = &self.spec;
        let mut da = AstDataAnalytics::new(&s.name);
        da.dalib = s.dalib.as_ref().map(StrLit::new);
        da.annotations = annotation_list(&self.annotations);
        da.labels = s.labels;
        da.features = s.features.iter().map(|f| Ident::new(&f.name)).collect();
        da.prediction_results = s.prediction_results.as_ref().map(|f| Ident::new(&f.name));
        da.dataset = s.dataset.as_ref().map(StrLit::new);
        da.automl = s.automl;
        da.sequential = s.sequential;
        da.timestamps = s.timestamps;
        da.scaler = s.scaler.map(|k| Ident::new(k.canonical_name()));
        da.model_algorithm = s.algorithm.as_ref().map(|a| AstAlgorithm {
            name: Ident::new(a.family.as_str()),
            instance: Ident::new(&a.instance),
            hyperparameters: a
                .hyperparameters
                .iter()
                .map(|(k, v)| AstHyper {
                    key: Ident::new(k),
                    value: v.clone(),
                })
                .collect(),
            span: Span::default(),
        });
        da.training_results = s.training_results.as_ref().map(StrLit::new);
        da.blackbox_ml = s.blackbox_ml.then_some(true);
        da.blackbox_ml_model = s.blackbox_ml_model.as_ref().map(StrLit::new);
        da.blackbox_import_algorithm = s.blackbox_import_algorithm.as_ref().map(StrLit::new);
        da.span = self.span.clone();
        da
    }
}

impl StateChart {
    pub fn to_ast(&self) -> AstStateChart {
        AstStateChart {
            name: Ident::new(&self.name),
            initial: self.initial.clone(),
            annotations: annotation_list(&self.annotations),
            on_entry: self.on_entry.clone(),
            on_exit: self.on_exit.clone(),
            states: self
                .states
                .values()
                .map(|s| AstState {
                    name: Ident::new(&s.name),
                    is_final: s.is_final,
                    annotations: annotation_list(&s.annotations),
                    on_entry: s.on_entry.clone(),
                    on_exit: s.on_exit.clone(),
                    transitions: s.transitions.clone(),
                    span: s.span.clone(),
                })
                .collect(),
            span: self.span.clone(),
        }
    }
}

impl Configuration {
    pub fn to_ast(&self) -> AstConfiguration {
        let ep = |e: &Endpoint| AstEndpoint {
            instance: Ident::new(&e.instance),
            port: Ident::new(&e.port),
        };
        AstConfiguration {
            name: Ident::new(&self.name),
            annotations: annotation_list(&self.annotations),
            instances: self
                .instances
                .values()
                .map(|i| AstInstance {
                    name: Ident::new(&i.name),
                    thing: Ident::new(&i.thing),
                    annotations: annotation_list(&i.annotations),
                    span: i.span.clone(),
                })
                .collect(),
            connectors: self
                .connectors
                .iter()
                .map(|c| AstConnector {
                    from: ep(&c.from),
                    to: ep(&c.to),
                    span: c.span.clone(),
                })
                .collect(),
            span: self.span.clone(),
        }
    }
}

/// The toolchain's clock: a thing with one provided port `clock` that sends
/// `tick()`. Instances take `@period` (steps between ticks) and `@ticks`
/// (how many ticks to emit) annotations.
pub fn clock_thing() -> Thing {
    let mut messages = IndexMap::new();
    messages.insert(
        CLOCK_MESSAGE.to_string(),
        Message {
            name: CLOCK_MESSAGE.into(),
            params: Vec::new(),
            annotations: Annotations::new(),
            span: Span::default(),
        },
    );
    let mut ports = IndexMap::new();
    ports.insert(
        CLOCK_PORT.to_string(),
        Port {
            name: CLOCK_PORT.into(),
            direction: PortDirection::Provided,
            receives: Vec::new(),
            sends: vec![CLOCK_MESSAGE.into()],
            annotations: Annotations::new(),
            span: Span::default(),
        },
    );
    Thing {
        name: CLOCK_THING.into(),
        annotations: Annotations::new(),
        messages,
        ports,
        properties: IndexMap::new(),
        analytics: IndexMap::new(),
        behavior: None,
        builtin: true,
        span: Span::default(),
    }
}
