use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;
use mlq_ml::{AlgorithmChoice, DataAnalyticsSpec, Family, Feature, ScalerKind};

use super::*;
use crate::diag::{self, codes, Diagnostic};

type Fragments<'a> = HashMap<&'a str, &'a AstThing>;

struct Merge<'a> {
    out: AstThing,
    seen: HashSet<&'a str>,
    diags: Vec<Diagnostic>,
}

fn duplicate(kind: &str, name: &Ident, owner: &str) -> Diagnostic {
    Diagnostic::error(
        codes::DUPLICATE,
        &name.span,
        format!("duplicate {kind} `{name}` in thing `{owner}`"),
    )
}

impl<'a> Merge<'a> {
    fn includes(&mut self, thing: &'a AstThing, fragments: &Fragments<'a>, stack: &mut Vec<&'a str>) {
        for inc in &thing.includes {
            let name = inc.name.as_str();
            let Some(frag) = fragments.get(name) else {
                self.diags.push(Diagnostic::error(
                    codes::UNKNOWN,
                    &inc.span,
                    format!("unknown fragment {name}"),
                ));
                continue;
            };
            if !frag.is_fragment {
                self.diags.push(Diagnostic::error(
                    codes::UNKNOWN,
                    &inc.span,
                    format!("`{name}` is a thing, not a fragment"),
                ));
                continue;
            }
            // Cycles are reported once, by `include_cycles`.
            if stack.contains(&name) || !self.seen.insert(name) {
                continue;
            }
            stack.push(name);
            self.includes(frag, fragments, stack);
            stack.pop();
            self.members(frag);
        }
    }

    fn members(&mut self, src: &AstThing) {
        self.out.annotations.extend(src.annotations.iter().cloned());
        self.out.messages.extend(src.messages.iter().cloned());
        self.out.ports.extend(src.ports.iter().cloned());
        self.out.properties.extend(src.properties.iter().cloned());
        self.out.analytics.extend(src.analytics.iter().cloned());
        self.out.statecharts.extend(src.statecharts.iter().cloned());
    }
}

/// Merges included fragments (depth first, in include order) and then the
/// thing's own members into one include-free thing.
fn flatten(thing: &AstThing, fragments: &Fragments<'_>) -> (AstThing, Vec<Diagnostic>) {
    let mut out = AstThing::new(&thing.name.name);
    out.name = thing.name.clone();
    out.span = thing.span.clone();
    let mut m = Merge {
        out,
        seen: HashSet::new(),
        diags: Vec::new(),
    };
    let mut stack = vec![thing.name.as_str()];
    m.includes(thing, fragments, &mut stack);
    m.members(thing);
    (m.out, m.diags)
}

/// Reports every include edge that closes a cycle.
fn include_cycles(things: &[AstThing]) -> Vec<Diagnostic> {
    let by_name: HashMap<&str, &AstThing> = things.iter().map(|t| (t.name.as_str(), t)).collect();
    let mut color: HashMap<&str, u8> = HashMap::new();
    let mut diags = Vec::new();

    fn visit<'a>(
        t: &'a AstThing,
        by_name: &HashMap<&'a str, &'a AstThing>,
        color: &mut HashMap<&'a str, u8>,
        path: &mut Vec<&'a str>,
        diags: &mut Vec<Diagnostic>,
    ) {
        color.insert(t.name.as_str(), 1);
        path.push(t.name.as_str());
        for inc in &t.includes {
            let Some(next) = by_name.get(inc.name.as_str()) else { continue };
            match color.get(inc.name.as_str()).copied().unwrap_or(0) {
                0 => visit(next, by_name, color, path, diags),
                1 => {
                    let start = path.iter().position(|p| *p == inc.name).unwrap_or(0);
                    let mut cycle: Vec<&str> = path[start..].to_vec();
                    cycle.push(inc.as_str());
                    diags.push(Diagnostic::error(
                        codes::INCLUDE_CYCLE,
                        &inc.span,
                        format!("include cycle: {}", cycle.join(" -> ")),
                    ));
                }
                _ => {}
            }
        }
        path.pop();
        color.insert(t.name.as_str(), 2);
    }

    for t in things {
        if !color.contains_key(t.name.as_str()) {
            visit(t, &by_name, &mut color, &mut Vec::new(), &mut diags);
        }
    }
    diags
}

/// Resolves one thing against the fragments it may include.
pub fn flatten_thing(thing: &AstThing, fragments: &HashMap<String, AstThing>) -> Result<Thing, Vec<Diagnostic>> {
    let frags: Fragments<'_> = fragments.iter().map(|(k, v)| (k.as_str(), v)).collect();
    let mut all: Vec<AstThing> = fragments.values().cloned().collect();
    all.push(thing.clone());
    let mut diags = include_cycles(&all);
    let (flat, d) = flatten(thing, &frags);
    diags.extend(d);
    let bound = Binder::default().thing(&flat);
    diags.extend(bound.1);
    diag::sort(&mut diags);
    if diag::has_errors(&diags) {
        Err(diags)
    } else {
        Ok(bound.0)
    }
}

#[derive(Default)]
struct Binder {
    diags: Vec<Diagnostic>,
}

/// What names an action may see.
struct Scope<'a> {
    thing: &'a AstThing,
    properties: &'a IndexMap<String, Property>,
    messages: &'a IndexMap<String, Message>,
    ports: &'a IndexMap<String, Port>,
    /// Event variable and the message it carries.
    event: Option<(&'a str, &'a str)>,
}

impl Binder {
    fn err(&mut self, code: &'static str, span: &Span, msg: String) {
        self.diags.push(Diagnostic::error(code, span, msg));
    }

    fn thing(mut self, t: &AstThing) -> (Thing, Vec<Diagnostic>) {
        let owner = t.name.as_str();
        let mut messages = IndexMap::new();
        for m in &t.messages {
            let mut names = HashSet::new();
            for p in &m.params {
                if !names.insert(p.name.as_str()) {
                    self.diags.push(duplicate("parameter", &p.name, owner));
                }
            }
            let msg = Message {
                name: m.name.name.clone(),
                params: m
                    .params
                    .iter()
                    .map(|p| Param {
                        name: p.name.name.clone(),
                        ty: p.ty,
                    })
                    .collect(),
                annotations: annotations_of(&m.annotations),
                span: m.name.span.clone(),
            };
            if messages.insert(m.name.name.clone(), msg).is_some() {
                self.diags.push(duplicate("message", &m.name, owner));
            }
        }

        let mut ports = IndexMap::new();
        for p in &t.ports {
            for m in p.receives.iter().chain(&p.sends) {
                if !messages.contains_key(m.as_str()) {
                    self.err(codes::UNKNOWN, &m.span, format!("unknown message `{m}` on port `{}`", p.name));
                }
            }
            let port = Port {
                name: p.name.name.clone(),
                direction: p.direction,
                receives: p.receives.iter().map(|i| i.name.clone()).collect(),
                sends: p.sends.iter().map(|i| i.name.clone()).collect(),
                annotations: annotations_of(&p.annotations),
                span: p.name.span.clone(),
            };
            if ports.insert(p.name.name.clone(), port).is_some() {
                self.diags.push(duplicate("port", &p.name, owner));
            }
        }

        let mut properties = IndexMap::new();
        for p in &t.properties {
            let prop = Property {
                name: p.name.name.clone(),
                ty: p.ty,
                init: p.init.clone(),
                annotations: annotations_of(&p.annotations),
                span: p.name.span.clone(),
            };
            if properties.insert(p.name.name.clone(), prop).is_some() {
                self.diags.push(duplicate("property", &p.name, owner));
            }
        }

        let scope = Scope {
            thing: t,
            properties: &properties,
            messages: &messages,
            ports: &ports,
            event: None,
        };
        for p in &t.properties {
            if let Some(e) = &p.init {
                self.expr(e, &scope);
            }
        }

        let mut analytics = IndexMap::new();
        for da in &t.analytics {
            let a = self.analytics(da, &properties);
            if analytics.insert(da.name.name.clone(), a).is_some() {
                self.diags.push(duplicate("data_analytics", &da.name, owner));
            }
        }

        if let Some(extra) = t.statecharts.get(1) {
            self.diags.push(duplicate("statechart", &extra.name, owner));
        }
        let behavior = t.statecharts.first().map(|sc| self.chart(sc, &scope));

        let thing = Thing {
            name: t.name.name.clone(),
            annotations: annotations_of(&t.annotations),
            messages,
            ports,
            properties,
            analytics,
            behavior,
            builtin: false,
            span: t.name.span.clone(),
        };
        (thing, self.diags)
    }

    fn feature(&mut self, name: &Ident, properties: &IndexMap<String, Property>, da: &Ident) -> Option<Feature> {
        match properties.get(name.as_str()) {
            Some(p) => Some(Feature::new(&name.name, feature_type(p.ty))),
            None => {
                self.err(
                    codes::UNKNOWN,
                    &name.span,
                    format!("unknown property `{name}` in data_analytics `{da}`"),
                );
                None
            }
        }
    }

    fn analytics(&mut self, da: &AstDataAnalytics, properties: &IndexMap<String, Property>) -> Analytics {
        let mut spec = DataAnalyticsSpec::new(&da.name.name);
        spec.dalib = da.dalib.as_ref().map(|d| d.value.clone());
        spec.labels = da.labels;
        spec.features = da
            .features
            .iter()
            .filter_map(|f| self.feature(f, properties, &da.name))
            .collect();
        spec.prediction_results = da
            .prediction_results
            .as_ref()
            .and_then(|p| self.feature(p, properties, &da.name));
        spec.dataset = da.dataset.as_ref().map(|d| d.value.clone());
        spec.automl = da.automl;
        spec.sequential = da.sequential;
        spec.timestamps = da.timestamps;
        if let Some(s) = &da.scaler {
            spec.scaler = ScalerKind::from_name(&s.name);
            if spec.scaler.is_none() {
                self.err(codes::UNKNOWN_KIND, &s.span, format!("unknown feature scaler `{s}`"));
            }
        }
        if let Some(a) = &da.model_algorithm {
            match Family::from_name(&a.name.name) {
                Some(family) => {
                    spec.algorithm = Some(AlgorithmChoice {
                        family,
                        instance: a.instance.name.clone(),
                        hyperparameters: a
                            .hyperparameters
                            .iter()
                            .map(|h| (h.key.name.clone(), h.value.clone()))
                            .collect(),
                    })
                }
                None => self.err(
                    codes::UNKNOWN_KIND,
                    &a.name.span,
                    format!("unknown model algorithm `{}`", a.name),
                ),
            }
        }
        spec.training_results = da.training_results.as_ref().map(|t| t.value.clone());
        spec.blackbox_ml = da.blackbox_ml.unwrap_or(false);
        spec.blackbox_ml_model = da.blackbox_ml_model.as_ref().map(|m| m.value.clone());
        if let Some(alg) = &da.blackbox_import_algorithm {
            if Family::from_name(&alg.value).is_none() {
                self.err(
                    codes::UNKNOWN_KIND,
                    &alg.span,
                    format!("unknown import algorithm `{}`", alg.value),
                );
            }
            spec.blackbox_import_algorithm = Some(alg.value.clone());
        }
        Analytics {
            spec,
            annotations: annotations_of(&da.annotations),
            param_spans: da.param_spans.clone(),
            span: da.name.span.clone(),
        }
    }

    fn chart(&mut self, sc: &AstStateChart, scope: &Scope<'_>) -> StateChart {
        let owner = scope.thing.name.as_str();
        let mut states = IndexMap::new();
        for s in &sc.states {
            if states.contains_key(s.name.as_str()) {
                self.diags.push(duplicate("state", &s.name, owner));
                continue;
            }
            states.insert(s.name.name.clone(), ());
        }
        self.actions(&sc.on_entry, scope);
        self.actions(&sc.on_exit, scope);
        let mut out = IndexMap::new();
        for s in &sc.states {
            self.actions(&s.on_entry, scope);
            self.actions(&s.on_exit, scope);
            for t in &s.transitions {
                if !states.contains_key(t.target.as_str()) {
                    self.err(
                        codes::UNKNOWN,
                        &t.target.span,
                        format!("unknown state `{}` in statechart `{}`", t.target, sc.name),
                    );
                }
                let mut event = None;
                if let Some(e) = &t.event {
                    event = self.event(e, scope);
                }
                let inner = Scope {
                    event,
                    ..*scope
                };
                self.actions(&t.action, &inner);
            }
            out.entry(s.name.name.clone()).or_insert_with(|| State {
                name: s.name.name.clone(),
                is_final: s.is_final,
                annotations: annotations_of(&s.annotations),
                on_entry: s.on_entry.clone(),
                on_exit: s.on_exit.clone(),
                transitions: s.transitions.clone(),
                span: s.name.span.clone(),
            });
        }
        StateChart {
            name: sc.name.name.clone(),
            initial: sc.initial.clone(),
            annotations: annotations_of(&sc.annotations),
            on_entry: sc.on_entry.clone(),
            on_exit: sc.on_exit.clone(),
            states: out,
            span: sc.name.span.clone(),
        }
    }

    fn event<'s>(&mut self, e: &'s AstEvent, scope: &Scope<'s>) -> Option<(&'s str, &'s str)> {
        let Some(port) = scope.ports.get(e.port.as_str()) else {
            self.err(codes::UNKNOWN, &e.port.span, format!("unknown port `{}`", e.port));
            return None;
        };
        if !scope.messages.contains_key(e.message.as_str()) {
            self.err(codes::UNKNOWN, &e.message.span, format!("unknown message `{}`", e.message));
            return None;
        }
        if !port.receives.iter().any(|m| m == e.message.as_str()) {
            self.err(
                codes::UNKNOWN,
                &e.message.span,
                format!("port `{}` does not receive `{}`", e.port, e.message),
            );
        }
        e.var.as_ref().map(|v| (v.as_str(), e.message.as_str()))
    }

    fn actions(&mut self, actions: &[AstAction], scope: &Scope<'_>) {
        for a in actions {
            self.action(a, scope);
        }
    }

    fn action(&mut self, a: &AstAction, scope: &Scope<'_>) {
        match &a.kind {
            ActionKind::Print(e) => self.expr(e, scope),
            ActionKind::Assign { target, value } => {
                if !scope.properties.contains_key(target.as_str()) {
                    self.err(codes::UNKNOWN, &target.span, format!("unknown property `{target}`"));
                }
                self.expr(value, scope);
            }
            ActionKind::Send { port, message, args } => {
                if !scope.ports.contains_key(port.as_str()) {
                    self.err(codes::UNKNOWN, &port.span, format!("unknown port `{port}`"));
                }
                if !scope.messages.contains_key(message.as_str()) {
                    self.err(codes::UNKNOWN, &message.span, format!("unknown message `{message}`"));
                }
                for e in args {
                    self.expr(e, scope);
                }
            }
            ActionKind::If { cond, then, otherwise } => {
                self.expr(cond, scope);
                self.actions(then, scope);
                if let Some(o) = otherwise {
                    self.actions(o, scope);
                }
            }
            ActionKind::DaPredict { args, .. } => {
                for e in args {
                    self.expr(e, scope);
                }
            }
            ActionKind::DaPreprocess(_) | ActionKind::DaTrain(_) | ActionKind::DaSave(_) => {}
        }
    }

    fn expr(&mut self, e: &Expr, scope: &Scope<'_>) {
        match &e.kind {
            ExprKind::Int(_) | ExprKind::Float(_) | ExprKind::Str(_) | ExprKind::Bool(_) => {}
            ExprKind::Name(n) => {
                if !scope.properties.contains_key(n.as_str()) {
                    self.err(codes::UNKNOWN, &n.span, format!("unknown property `{n}`"));
                }
            }
            ExprKind::Param { var, param } => match scope.event {
                Some((v, msg)) if v == var.as_str() => {
                    let known = scope
                        .messages
                        .get(msg)
                        .is_some_and(|m| m.params.iter().any(|p| p.name == param.as_str()));
                    if !known {
                        self.err(
                            codes::UNKNOWN,
                            &param.span,
                            format!("message `{msg}` has no parameter `{param}`"),
                        );
                    }
                }
                _ => self.err(codes::UNKNOWN, &var.span, format!("unknown event variable `{var}`")),
            },
            ExprKind::Unary { operand, .. } => self.expr(operand, scope),
            ExprKind::Binary { lhs, rhs, .. } => {
                self.expr(lhs, scope);
                self.expr(rhs, scope);
            }
        }
    }
}

/// Binds every name in `unit`, returning the model (possibly partial) and all
/// diagnostics.
pub fn resolve_with_diagnostics(unit: &AstUnit) -> (ResolvedModel, Vec<Diagnostic>) {
    let mut diags = include_cycles(&unit.things);
    let mut by_name: HashMap<&str, &AstThing> = HashMap::new();
    for t in &unit.things {
        if by_name.insert(t.name.as_str(), t).is_some() {
            diags.push(Diagnostic::error(
                codes::DUPLICATE,
                &t.name.span,
                format!("duplicate thing `{}`", t.name),
            ));
        }
    }

    let mut model = ResolvedModel {
        annotations: annotations_of(&unit.annotations),
        ..ResolvedModel::default()
    };
    for t in unit.things.iter().filter(|t| !t.is_fragment) {
        if model.things.contains_key(t.name.as_str()) {
            continue;
        }
        let (flat, d) = flatten(t, &by_name);
        diags.extend(d);
        let (thing, d) = Binder::default().thing(&flat);
        diags.extend(d);
        model.things.insert(thing.name.clone(), thing);
    }

    for c in &unit.configurations {
        if model.configurations.contains_key(c.name.as_str()) {
            diags.push(Diagnostic::error(
                codes::DUPLICATE,
                &c.name.span,
                format!("duplicate configuration `{}`", c.name),
            ));
            continue;
        }
        let mut instances = IndexMap::new();
        for i in &c.instances {
            match by_name.get(i.thing.as_str()) {
                Some(t) if t.is_fragment => diags.push(Diagnostic::error(
                    codes::FRAGMENT_INSTANCE,
                    &i.thing.span,
                    format!("fragment `{}` cannot be instantiated", i.thing),
                )),
                Some(_) => {}
                None if i.thing.as_str() == CLOCK_THING => {
                    model
                        .things
                        .entry(CLOCK_THING.to_string())
                        .or_insert_with(clock_thing);
                }
                None => diags.push(Diagnostic::error(
                    codes::UNKNOWN,
                    &i.thing.span,
                    format!("unknown thing `{}`", i.thing),
                )),
            }
            let inst = Instance {
                name: i.name.name.clone(),
                thing: i.thing.name.clone(),
                annotations: annotations_of(&i.annotations),
                span: i.name.span.clone(),
            };
            if instances.insert(i.name.name.clone(), inst).is_some() {
                diags.push(Diagnostic::error(
                    codes::DUPLICATE,
                    &i.name.span,
                    format!("duplicate instance `{}` in configuration `{}`", i.name, c.name),
                ));
            }
        }
        let mut connectors = Vec::new();
        for k in &c.connectors {
            for ep in [&k.from, &k.to] {
                let Some(inst) = instances.get(ep.instance.as_str()) else {
                    diags.push(Diagnostic::error(
                        codes::UNKNOWN,
                        &ep.instance.span,
                        format!("unknown instance `{}`", ep.instance),
                    ));
                    continue;
                };
                if let Some(thing) = model.things.get(&inst.thing) {
                    if !thing.ports.contains_key(ep.port.as_str()) {
                        diags.push(Diagnostic::error(
                            codes::UNKNOWN,
                            &ep.port.span,
                            format!("thing `{}` has no port `{}`", thing.name, ep.port),
                        ));
                    }
                }
            }
            let ep = |e: &AstEndpoint| Endpoint {
                instance: e.instance.name.clone(),
                port: e.port.name.clone(),
            };
            connectors.push(Connector {
                from: ep(&k.from),
                to: ep(&k.to),
                span: k.span.clone(),
            });
        }
        model.configurations.insert(
            c.name.name.clone(),
            Configuration {
                name: c.name.name.clone(),
                annotations: annotations_of(&c.annotations),
                instances,
                connectors,
                span: c.name.span.clone(),
            },
        );
    }
    diag::sort(&mut diags);
    (model, diags)
}

pub fn resolve(unit: &AstUnit) -> Result<ResolvedModel, Vec<Diagnostic>> {
    let (model, diags) = resolve_with_diagnostics(unit);
    if diag::has_errors(&diags) {
        Err(diags)
    } else {
        Ok(model)
    }
}
