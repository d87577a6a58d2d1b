//! Index-based shape of one configuration: what both engines agree on before
//! any behavior runs.

use mlq_ml::DataAnalyticsSpec;
use serde::{Deserialize, Serialize};

use crate::metamodel::{Annotations, Configuration, ResolvedModel};
use crate::syntax::ast::{PortDirection, TypeName};

use super::RuntimeError;

pub type AnnotationList = Vec<(String, Vec<String>)>;

pub fn annotation_list(a: &Annotations) -> AnnotationList {
    a.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageLayout {
    pub name: String,
    pub params: Vec<(String, TypeName)>,
    pub annotations: AnnotationList,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortLayout {
    pub name: String,
    pub direction: PortDirection,
    pub receives: Vec<usize>,
    pub sends: Vec<usize>,
    pub annotations: AnnotationList,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyLayout {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: TypeName,
    pub annotations: AnnotationList,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateLayout {
    pub name: String,
    #[serde(rename = "final")]
    pub is_final: bool,
    pub annotations: AnnotationList,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThingLayout {
    pub name: String,
    pub builtin: bool,
    pub annotations: AnnotationList,
    pub messages: Vec<MessageLayout>,
    pub ports: Vec<PortLayout>,
    pub properties: Vec<PropertyLayout>,
    /// Empty for things without a statechart.
    pub states: Vec<StateLayout>,
    pub initial: usize,
    pub analytics: Vec<DataAnalyticsSpec>,
}

impl ThingLayout {
    pub fn property(&self, name: &str) -> Option<usize> {
        self.properties.iter().position(|p| p.name == name)
    }

    pub fn message(&self, name: &str) -> Option<usize> {
        self.messages.iter().position(|m| m.name == name)
    }

    pub fn port(&self, name: &str) -> Option<usize> {
        self.ports.iter().position(|p| p.name == name)
    }

    pub fn has_finals(&self) -> bool {
        self.states.iter().any(|s| s.is_final)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceLayout {
    pub name: String,
    pub thing: usize,
    pub annotations: AnnotationList,
}

impl InstanceLayout {
    pub fn annotation(&self, key: &str) -> Option<&str> {
        self.annotations
            .iter()
            .find(|(k, _)| k == key)
            .and_then(|(_, v)| v.last())
            .map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectorLayout {
    /// (instance, port) pairs.
    pub from: (usize, usize),
    pub to: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub config: String,
    pub annotations: AnnotationList,
    pub things: Vec<ThingLayout>,
    pub instances: Vec<InstanceLayout>,
    pub connectors: Vec<ConnectorLayout>,
}

impl Layout {
    pub fn thing_of(&self, inst: usize) -> &ThingLayout {
        &self.things[self.instances[inst].thing]
    }

    /// Lays out configuration `config` of a resolved model. Things are kept
    /// in model order, whether instantiated or not.
    pub fn build(model: &ResolvedModel, config: &str) -> Result<Layout, RuntimeError> {
        let cfg = model
            .configurations
            .get(config)
            .ok_or_else(|| RuntimeError::Setup(format!("no configuration named `{config}`")))?;
        Layout::with(model, cfg)
    }

    /// Things only, for models without a configuration.
    pub fn unconfigured(model: &ResolvedModel) -> Layout {
        let empty = Configuration {
            name: String::new(),
            annotations: Annotations::new(),
            instances: Default::default(),
            connectors: Vec::new(),
            span: Default::default(),
        };
        Layout::with(model, &empty).expect("an empty configuration always lays out")
    }

    fn with(model: &ResolvedModel, cfg: &Configuration) -> Result<Layout, RuntimeError> {
        let things = model.things.values().map(|t| {
            let messages: Vec<MessageLayout> = t
                .messages
                .values()
                .map(|m| MessageLayout {
                    name: m.name.clone(),
                    params: m.params.iter().map(|p| (p.name.clone(), p.ty)).collect(),
                    annotations: annotation_list(&m.annotations),
                })
                .collect();
            let index = |names: &[String]| -> Vec<usize> {
                names.iter().filter_map(|n| t.messages.get_index_of(n.as_str())).collect()
            };
            let (states, initial) = match &t.behavior {
                Some(chart) => (
                    chart
                        .states
                        .values()
                        .map(|s| StateLayout {
                            name: s.name.clone(),
                            is_final: s.is_final,
                            annotations: annotation_list(&s.annotations),
                        })
                        .collect(),
                    chart.states.get_index_of(chart.initial.as_str()).unwrap_or(0),
                ),
                None => (Vec::new(), 0),
            };
            ThingLayout {
                name: t.name.clone(),
                builtin: t.builtin,
                annotations: annotation_list(&t.annotations),
                ports: t
                    .ports
                    .values()
                    .map(|p| PortLayout {
                        name: p.name.clone(),
                        direction: p.direction,
                        receives: index(&p.receives),
                        sends: index(&p.sends),
                        annotations: annotation_list(&p.annotations),
                    })
                    .collect(),
                messages,
                properties: t
                    .properties
                    .values()
                    .map(|p| PropertyLayout {
                        name: p.name.clone(),
                        ty: p.ty,
                        annotations: annotation_list(&p.annotations),
                    })
                    .collect(),
                states,
                initial,
                analytics: t.analytics.values().map(|a| a.spec.clone()).collect(),
            }
        });
        let things: Vec<ThingLayout> = things.collect();
        let instances: Vec<InstanceLayout> = cfg
            .instances
            .values()
            .map(|i| {
                let thing = model
                    .things
                    .get_index_of(i.thing.as_str())
                    .ok_or_else(|| RuntimeError::Setup(format!("instance `{}` has unknown thing `{}`", i.name, i.thing)))?;
                Ok(InstanceLayout {
                    name: i.name.clone(),
                    thing,
                    annotations: annotation_list(&i.annotations),
                })
            })
            .collect::<Result<_, RuntimeError>>()?;
        let endpoint = |ep: &crate::metamodel::Endpoint| -> Result<(usize, usize), RuntimeError> {
            let inst = cfg
                .instances
                .get_index_of(ep.instance.as_str())
                .ok_or_else(|| RuntimeError::Setup(format!("unknown connector endpoint `{ep}`")))?;
            let port = things[instances[inst].thing]
                .port(&ep.port)
                .ok_or_else(|| RuntimeError::Setup(format!("unknown connector endpoint `{ep}`")))?;
            Ok((inst, port))
        };
        let connectors = cfg
            .connectors
            .iter()
            .map(|c| {
                Ok(ConnectorLayout {
                    from: endpoint(&c.from)?,
                    to: endpoint(&c.to)?,
                })
            })
            .collect::<Result<_, RuntimeError>>()?;
        Ok(Layout {
            config: cfg.name.clone(),
            annotations: annotation_list(&cfg.annotations),
            things,
            instances,
            connectors,
        })
    }
}
