//! The `.mlqplan` execution plan: lowering, text form and loading.

use mlq_ml::DataAnalyticsSpec;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metamodel::{ResolvedModel, StateChart, Thing};
use crate::runtime::layout::{
    annotation_list, AnnotationList, ConnectorLayout, InstanceLayout, Layout, MessageLayout, PortLayout, PropertyLayout,
    StateLayout, ThingLayout,
};
use crate::syntax::ast::{ActionKind, AstAction, BinOp, Expr, ExprKind, UnaryOp};

pub const MAGIC: &str = "MLQPLAN/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Instr {
    PushInt { value: i64 },
    PushReal { value: f64 },
    PushBool { value: bool },
    PushStr { value: String },
    Load { slot: usize },
    Param { index: usize },
    Unary { unary: UnaryOp },
    Binary { binary: BinOp },
    Store { slot: usize },
    Print,
    Send { port: usize, message: usize, argc: usize },
    /// Pops a Boolean and continues at `then` or `otherwise`.
    Branch { then: usize, otherwise: usize },
    Jump { target: usize },
    DaPreprocess { da: usize },
    DaTrain { da: usize },
    DaPredict { da: usize, argc: usize },
    DaSave { da: usize },
}

pub type Program = Vec<Instr>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventCode {
    pub port: usize,
    pub message: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionCode {
    pub name: Option<String>,
    pub source: usize,
    pub target: usize,
    pub event: Option<usize>,
    pub program: Program,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ThingCode {
    pub chart: Option<String>,
    pub chart_annotations: AnnotationList,
    pub on_entry: Program,
    pub on_exit: Program,
    /// Initializer per property.
    pub inits: Vec<Option<Program>>,
    pub analytics_annotations: Vec<AnnotationList>,
    pub state_entry: Vec<Program>,
    pub state_exit: Vec<Program>,
    pub events: Vec<EventCode>,
    pub transitions: Vec<TransitionCode>,
    /// State by event; `None` is no transition.
    pub table: Vec<Vec<Option<usize>>>,
    pub eventless: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionPlan {
    pub model_annotations: AnnotationList,
    pub layout: Layout,
    pub code: Vec<ThingCode>,
}

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("not an execution plan: expected `{MAGIC}` header")]
    BadMagic,
    #[error("unsupported plan version `{0}`")]
    Version(String),
    #[error("line {line}: {message}")]
    Corrupt { line: usize, message: String },
    #[error("plan is truncated: {0}")]
    Truncated(String),
}

struct Lowerer<'m> {
    thing: &'m Thing,
    event: Option<(&'m str, &'m str)>,
}

impl<'m> Lowerer<'m> {
    fn index<T>(map: &indexmap::IndexMap<String, T>, what: &str, name: &str) -> Result<usize, String> {
        map.get_index_of(name).ok_or_else(|| format!("unknown {what} `{name}`"))
    }

    fn expr(&self, e: &Expr, out: &mut Program) -> Result<(), String> {
        match &e.kind {
            ExprKind::Int(v) => out.push(Instr::PushInt { value: *v }),
            ExprKind::Float(v) => out.push(Instr::PushReal { value: *v }),
            ExprKind::Str(v) => out.push(Instr::PushStr { value: v.clone() }),
            ExprKind::Bool(v) => out.push(Instr::PushBool { value: *v }),
            ExprKind::Name(n) => out.push(Instr::Load {
                slot: Self::index(&self.thing.properties, "property", n.as_str())?,
            }),
            ExprKind::Param { var, param } => {
                let index = self
                    .event
                    .filter(|(v, _)| *v == var.as_str())
                    .and_then(|(_, m)| self.thing.messages.get(m))
                    .and_then(|m| m.params.iter().position(|p| p.name == param.as_str()))
                    .ok_or_else(|| format!("unknown message parameter `{var}.{param}`"))?;
                out.push(Instr::Param { index });
            }
            ExprKind::Unary { op, operand } => {
                self.expr(operand, out)?;
                out.push(Instr::Unary { unary: *op });
            }
            ExprKind::Binary { op, lhs, rhs } => {
                self.expr(lhs, out)?;
                self.expr(rhs, out)?;
                out.push(Instr::Binary { binary: *op });
            }
        }
        Ok(())
    }

    fn da(&self, name: &str) -> Result<usize, String> {
        Self::index(&self.thing.analytics, "data analytics block", name)
    }

    fn actions(&self, actions: &[AstAction], out: &mut Program) -> Result<(), String> {
        for a in actions {
            match &a.kind {
                ActionKind::Print(e) => {
                    self.expr(e, out)?;
                    out.push(Instr::Print);
                }
                ActionKind::Assign { target, value } => {
                    self.expr(value, out)?;
                    out.push(Instr::Store {
                        slot: Self::index(&self.thing.properties, "property", target.as_str())?,
                    });
                }
                ActionKind::Send { port, message, args } => {
                    for e in args {
                        self.expr(e, out)?;
                    }
                    out.push(Instr::Send {
                        port: Self::index(&self.thing.ports, "port", port.as_str())?,
                        message: Self::index(&self.thing.messages, "message", message.as_str())?,
                        argc: args.len(),
                    });
                }
                ActionKind::If { cond, then, otherwise } => {
                    self.expr(cond, out)?;
                    let branch = out.len();
                    out.push(Instr::Jump { target: 0 });
                    self.actions(then, out)?;
                    let otherwise_at = match otherwise {
                        Some(other) => {
                            let jump = out.len();
                            out.push(Instr::Jump { target: 0 });
                            let start = out.len();
                            self.actions(other, out)?;
                            out[jump] = Instr::Jump { target: out.len() };
                            start
                        }
                        None => out.len(),
                    };
                    out[branch] = Instr::Branch {
                        then: branch + 1,
                        otherwise: otherwise_at,
                    };
                }
                ActionKind::DaPreprocess(d) => out.push(Instr::DaPreprocess { da: self.da(d.as_str())? }),
                ActionKind::DaTrain(d) => out.push(Instr::DaTrain { da: self.da(d.as_str())? }),
                ActionKind::DaPredict { da, args } => {
                    for e in args {
                        self.expr(e, out)?;
                    }
                    out.push(Instr::DaPredict {
                        da: self.da(da.as_str())?,
                        argc: args.len(),
                    });
                }
                ActionKind::DaSave(d) => out.push(Instr::DaSave { da: self.da(d.as_str())? }),
            }
        }
        Ok(())
    }

    fn block(&self, actions: &[AstAction]) -> Result<Program, String> {
        let mut out = Vec::new();
        self.actions(actions, &mut out)?;
        Ok(out)
    }
}

/// Lowers one statechart to a dense state-by-event table plus programs.
pub fn lower_chart(thing: &Thing, chart: &StateChart) -> Result<ThingCode, String> {
    let plain = Lowerer { thing, event: None };
    let mut code = ThingCode {
        chart: Some(chart.name.clone()),
        chart_annotations: annotation_list(&chart.annotations),
        on_entry: plain.block(&chart.on_entry)?,
        on_exit: plain.block(&chart.on_exit)?,
        ..ThingCode::default()
    };
    let mut events: Vec<(usize, usize)> = Vec::new();
    for key in chart.events() {
        events.push((
            Lowerer::index(&thing.ports, "port", &key.port)?,
            Lowerer::index(&thing.messages, "message", &key.message)?,
        ));
    }
    code.events = events
        .iter()
        .map(|&(port, message)| EventCode { port, message })
        .collect();
    for (s, state) in chart.states.values().enumerate() {
        code.state_entry.push(plain.block(&state.on_entry)?);
        code.state_exit.push(plain.block(&state.on_exit)?);
        let mut row = vec![None; events.len()];
        let mut eventless = None;
        for t in &state.transitions {
            let id = code.transitions.len();
            let target = Lowerer::index(&chart.states, "state", t.target.as_str())?;
            let (event, lowerer) = match &t.event {
                Some(ev) => {
                    let key = (
                        Lowerer::index(&thing.ports, "port", ev.port.as_str())?,
                        Lowerer::index(&thing.messages, "message", ev.message.as_str())?,
                    );
                    let column = events.iter().position(|k| *k == key).expect("events cover every transition");
                    row[column].get_or_insert(id);
                    let lowerer = Lowerer {
                        thing,
                        event: ev.var.as_ref().map(|v| (v.as_str(), ev.message.as_str())),
                    };
                    (Some(column), lowerer)
                }
                None => {
                    eventless.get_or_insert(id);
                    (None, Lowerer { thing, event: None })
                }
            };
            code.transitions.push(TransitionCode {
                name: t.name.as_ref().map(|n| n.name.clone()),
                source: s,
                target,
                event,
                program: lowerer.block(&t.action)?,
            });
        }
        code.table.push(row);
        code.eventless.push(eventless);
    }
    Ok(code)
}

fn lower_thing(thing: &Thing) -> Result<ThingCode, String> {
    let mut code = match &thing.behavior {
        Some(chart) => lower_chart(thing, chart)?,
        None => ThingCode::default(),
    };
    let plain = Lowerer { thing, event: None };
    code.inits = thing
        .properties
        .values()
        .map(|p| {
            p.init
                .as_ref()
                .map(|e| {
                    let mut out = Vec::new();
                    plain.expr(e, &mut out).map(|_| out)
                })
                .transpose()
        })
        .collect::<Result<_, _>>()?;
    code.analytics_annotations = thing.analytics.values().map(|a| annotation_list(&a.annotations)).collect();
    Ok(code)
}

/// Lowers configuration `config` (or just the things, for `None`) of a
/// validated model with AutoML defaults already applied.
pub fn lower(model: &ResolvedModel, config: Option<&str>) -> Result<ExecutionPlan, String> {
    let layout = match config {
        Some(c) => Layout::build(model, c).map_err(|e| e.to_string())?,
        None => Layout::unconfigured(model),
    };
    let code = model.things.values().map(lower_thing).collect::<Result<_, _>>()?;
    Ok(ExecutionPlan {
        model_annotations: annotation_list(&model.annotations),
        layout,
        code,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigLine {
    name: String,
    annotations: AnnotationList,
    model_annotations: AnnotationList,
    things: usize,
    instances: usize,
    connectors: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThingLine {
    name: String,
    builtin: bool,
    annotations: AnnotationList,
    chart: Option<String>,
    chart_annotations: AnnotationList,
    initial: usize,
    on_entry: Program,
    on_exit: Program,
    messages: usize,
    ports: usize,
    properties: usize,
    analytics: usize,
    states: usize,
    events: usize,
    transitions: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PropertyLine {
    name: String,
    #[serde(rename = "type")]
    ty: crate::syntax::ast::TypeName,
    annotations: AnnotationList,
    init: Option<Program>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnalyticsLine {
    annotations: AnnotationList,
    spec: DataAnalyticsSpec,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateLine {
    name: String,
    #[serde(rename = "final")]
    is_final: bool,
    annotations: AnnotationList,
    on_entry: Program,
    on_exit: Program,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableLine {
    state: usize,
    cells: Vec<Option<usize>>,
    eventless: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EndLine {
    lines: usize,
}

fn line<T: Serialize>(out: &mut String, tag: &str, value: &T) {
    out.push_str(tag);
    out.push(' ');
    out.push_str(&serde_json::to_string(value).expect("plan lines serialize"));
    out.push('\n');
}

impl ExecutionPlan {
    /// Canonical text form.
    pub fn serialize(&self) -> String {
        let l = &self.layout;
        let mut out = String::new();
        out.push_str(MAGIC);
        out.push('\n');
        line(
            &mut out,
            "config",
            &ConfigLine {
                name: l.config.clone(),
                annotations: l.annotations.clone(),
                model_annotations: self.model_annotations.clone(),
                things: l.things.len(),
                instances: l.instances.len(),
                connectors: l.connectors.len(),
            },
        );
        for (t, c) in l.things.iter().zip(&self.code) {
            line(
                &mut out,
                "thing",
                &ThingLine {
                    name: t.name.clone(),
                    builtin: t.builtin,
                    annotations: t.annotations.clone(),
                    chart: c.chart.clone(),
                    chart_annotations: c.chart_annotations.clone(),
                    initial: t.initial,
                    on_entry: c.on_entry.clone(),
                    on_exit: c.on_exit.clone(),
                    messages: t.messages.len(),
                    ports: t.ports.len(),
                    properties: t.properties.len(),
                    analytics: t.analytics.len(),
                    states: t.states.len(),
                    events: c.events.len(),
                    transitions: c.transitions.len(),
                },
            );
            for m in &t.messages {
                line(&mut out, "message", m);
            }
            for p in &t.ports {
                line(&mut out, "port", p);
            }
            for (p, init) in t.properties.iter().zip(&c.inits) {
                line(
                    &mut out,
                    "property",
                    &PropertyLine {
                        name: p.name.clone(),
                        ty: p.ty,
                        annotations: p.annotations.clone(),
                        init: init.clone(),
                    },
                );
            }
            for (spec, ann) in t.analytics.iter().zip(&c.analytics_annotations) {
                line(
                    &mut out,
                    "analytics",
                    &AnalyticsLine {
                        annotations: ann.clone(),
                        spec: spec.clone(),
                    },
                );
            }
            for (i, s) in t.states.iter().enumerate() {
                line(
                    &mut out,
                    "state",
                    &StateLine {
                        name: s.name.clone(),
                        is_final: s.is_final,
                        annotations: s.annotations.clone(),
                        on_entry: c.state_entry[i].clone(),
                        on_exit: c.state_exit[i].clone(),
                    },
                );
            }
            for e in &c.events {
                line(&mut out, "event", e);
            }
            for tr in &c.transitions {
                line(&mut out, "transition", tr);
            }
            for (s, row) in c.table.iter().enumerate() {
                line(
                    &mut out,
                    "table",
                    &TableLine {
                        state: s,
                        cells: row.clone(),
                        eventless: c.eventless[s],
                    },
                );
            }
        }
        for i in &l.instances {
            line(&mut out, "instance", i);
        }
        for c in &l.connectors {
            line(&mut out, "connector", c);
        }
        let lines = out.lines().count() + 1;
        line(&mut out, "end", &EndLine { lines });
        out
    }
}

struct Reader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Reader<'a> {
    fn next<T: DeserializeOwned>(&mut self, tag: &str) -> Result<T, PlanError> {
        let (n, text) = self
            .lines
            .next()
            .ok_or_else(|| PlanError::Truncated(format!("expected a `{tag}` line")))?;
        let line = n + 1;
        let rest = text
            .strip_prefix(tag)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| PlanError::Corrupt {
                line,
                message: format!("expected a `{tag}` line"),
            })?;
        serde_json::from_str(rest).map_err(|e| PlanError::Corrupt {
            line,
            message: format!("`{tag}`: {e}"),
        })
    }

    fn many<T: DeserializeOwned>(&mut self, tag: &str, n: usize) -> Result<Vec<T>, PlanError> {
        (0..n).map(|_| self.next(tag)).collect()
    }
}

fn corrupt(message: String) -> PlanError {
    PlanError::Corrupt { line: 0, message }
}

fn check_program(p: &Program, t: &ThingLayout, params: Option<usize>, what: &str) -> Result<(), PlanError> {
    let bad = |m: String| corrupt(format!("{what} in `{}`: {m}", t.name));
    for (pc, i) in p.iter().enumerate() {
        let ok = match i {
            Instr::Load { slot } | Instr::Store { slot } => *slot < t.properties.len(),
            Instr::Param { index } => params.is_some_and(|n| *index < n),
            Instr::Send { port, message, .. } => *port < t.ports.len() && *message < t.messages.len(),
            Instr::Branch { then, otherwise } => *then <= p.len() && *otherwise <= p.len(),
            Instr::Jump { target } => *target <= p.len(),
            Instr::DaPreprocess { da } | Instr::DaTrain { da } | Instr::DaPredict { da, .. } | Instr::DaSave { da } => {
                *da < t.analytics.len()
            }
            _ => true,
        };
        if !ok {
            return Err(bad(format!("instruction {pc} is out of range")));
        }
    }
    Ok(())
}

fn check_thing(t: &ThingLayout, c: &ThingCode) -> Result<(), PlanError> {
    let bad = |m: &str| Err(corrupt(format!("thing `{}`: {m}", t.name)));
    let messages = t.messages.len();
    if t.ports.iter().any(|p| p.receives.iter().chain(&p.sends).any(|&m| m >= messages)) {
        return bad("port message index out of range");
    }
    if !t.states.is_empty() && t.initial >= t.states.len() {
        return bad("initial state out of range");
    }
    if c.events.iter().any(|e| e.port >= t.ports.len() || e.message >= messages) {
        return bad("event index out of range");
    }
    for tr in &c.transitions {
        if tr.source >= t.states.len() || tr.target >= t.states.len() || tr.event.is_some_and(|e| e >= c.events.len()) {
            return bad("transition index out of range");
        }
        let params = match tr.event {
            Some(e) => t.messages[c.events[e].message].params.len(),
            None => 0,
        };
        check_program(&tr.program, t, Some(params), "transition")?;
    }
    for (s, row) in c.table.iter().enumerate() {
        if row.len() != c.events.len() {
            return bad("table row width differs from the event count");
        }
        let cells = row.iter().enumerate().map(|(e, x)| (Some(e), x)).chain([(None, &c.eventless[s])]);
        for (event, cell) in cells {
            if let Some(id) = cell {
                match c.transitions.get(*id) {
                    Some(tr) if tr.source == s && tr.event == event => {}
                    _ => return bad("table cell names a transition of another state or event"),
                }
            }
        }
    }
    for p in [&c.on_entry, &c.on_exit].into_iter().chain(&c.state_entry).chain(&c.state_exit) {
        check_program(p, t, None, "action block")?;
    }
    for p in c.inits.iter().flatten() {
        check_program(p, t, None, "initializer")?;
    }
    Ok(())
}

/// Parses and checks a plan. Only the exact canonical form is accepted, so
/// `load_plan(p)?.serialize() == p`.
pub fn load_plan(text: &str) -> Result<ExecutionPlan, PlanError> {
    let mut r = Reader {
        lines: text.lines().enumerate(),
    };
    match r.lines.next() {
        Some((_, MAGIC)) => {}
        Some((_, h)) if h.starts_with("MLQPLAN/") => return Err(PlanError::Version(h["MLQPLAN/".len()..].to_string())),
        _ => return Err(PlanError::BadMagic),
    }
    let cfg: ConfigLine = r.next("config")?;
    let mut things = Vec::with_capacity(cfg.things);
    let mut code = Vec::with_capacity(cfg.things);
    for _ in 0..cfg.things {
        let h: ThingLine = r.next("thing")?;
        let messages: Vec<MessageLayout> = r.many("message", h.messages)?;
        let ports: Vec<PortLayout> = r.many("port", h.ports)?;
        let props: Vec<PropertyLine> = r.many("property", h.properties)?;
        let analytics: Vec<AnalyticsLine> = r.many("analytics", h.analytics)?;
        let states: Vec<StateLine> = r.many("state", h.states)?;
        let events: Vec<EventCode> = r.many("event", h.events)?;
        let transitions: Vec<TransitionCode> = r.many("transition", h.transitions)?;
        let tables: Vec<TableLine> = r.many("table", h.states)?;
        if tables.iter().enumerate().any(|(i, t)| t.state != i) {
            return Err(corrupt(format!("thing `{}`: table rows out of order", h.name)));
        }
        let layout = ThingLayout {
            name: h.name,
            builtin: h.builtin,
            annotations: h.annotations,
            messages,
            ports,
            properties: props
                .iter()
                .map(|p| PropertyLayout {
                    name: p.name.clone(),
                    ty: p.ty,
                    annotations: p.annotations.clone(),
                })
                .collect(),
            states: states
                .iter()
                .map(|s| StateLayout {
                    name: s.name.clone(),
                    is_final: s.is_final,
                    annotations: s.annotations.clone(),
                })
                .collect(),
            initial: h.initial,
            analytics: analytics.iter().map(|a| a.spec.clone()).collect(),
        };
        let c = ThingCode {
            chart: h.chart,
            chart_annotations: h.chart_annotations,
            on_entry: h.on_entry,
            on_exit: h.on_exit,
            inits: props.into_iter().map(|p| p.init).collect(),
            analytics_annotations: analytics.into_iter().map(|a| a.annotations).collect(),
            state_entry: states.iter().map(|s| s.on_entry.clone()).collect(),
            state_exit: states.into_iter().map(|s| s.on_exit).collect(),
            events,
            transitions,
            eventless: tables.iter().map(|t| t.eventless).collect(),
            table: tables.into_iter().map(|t| t.cells).collect(),
        };
        check_thing(&layout, &c)?;
        things.push(layout);
        code.push(c);
    }
    let instances: Vec<InstanceLayout> = r.many("instance", cfg.instances)?;
    if let Some(i) = instances.iter().find(|i| i.thing >= things.len()) {
        return Err(corrupt(format!("instance `{}`: thing index out of range", i.name)));
    }
    let connectors: Vec<ConnectorLayout> = r.many("connector", cfg.connectors)?;
    for c in &connectors {
        for (inst, port) in [c.from, c.to] {
            if inst >= instances.len() || port >= things[instances[inst].thing].ports.len() {
                return Err(corrupt("connector endpoint out of range".into()));
            }
        }
    }
    let end: EndLine = r.next("end")?;
    if let Some((n, _)) = r.lines.next() {
        return Err(PlanError::Corrupt {
            line: n + 1,
            message: "content after the `end` line".into(),
        });
    }
    if !text.ends_with('\n') {
        return Err(PlanError::Truncated("missing final newline".into()));
    }
    let plan = ExecutionPlan {
        model_annotations: cfg.model_annotations,
        layout: Layout {
            config: cfg.name,
            annotations: cfg.annotations,
            things,
            instances,
            connectors,
        },
        code,
    };
    if end.lines != text.lines().count() {
        return Err(corrupt(format!("`end` counts {} lines, found {}", end.lines, text.lines().count())));
    }
    if plan.serialize() != text {
        return Err(corrupt("plan is not in canonical form".into()));
    }
    Ok(plan)
}
