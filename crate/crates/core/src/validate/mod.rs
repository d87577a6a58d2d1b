//! Validity (V1–V6) and completeness (C1–C6) passes, plus AutoML defaults.

pub mod types;

use std::collections::HashMap;

use mlq_ml::{Family, FeatureType, Hyper, HyperValue, ScalerKind, Task};

use crate::diag::{self, codes, Diagnostic, Span};
use crate::metamodel::{event_key, Analytics, ResolvedModel, Thing};
use crate::syntax::ast::*;
use types::{Ty, TypeEnv};

/// Name recorded as `dalib` when AutoML picks the library.
pub const BUILTIN_DALIB: &str = "mlq";

fn ty_of_feature(f: FeatureType) -> &'static str {
    match f {
        FeatureType::Integer => "integer",
        FeatureType::Real => "real",
        FeatureType::Boolean => "Boolean",
        FeatureType::Text => "String",
    }
}

/// Visits every action in a block, including nested branches, together with
/// the event binding in force.
fn walk<'a>(actions: &'a [AstAction], event: Option<(&'a str, &'a str)>, f: &mut impl FnMut(&'a AstAction, Option<(&'a str, &'a str)>)) {
    for a in actions {
        f(a, event);
        if let ActionKind::If { then, otherwise, .. } = &a.kind {
            walk(then, event, f);
            if let Some(o) = otherwise {
                walk(o, event, f);
            }
        }
    }
}

/// Every action block of a thing's chart with its event binding.
fn for_each_action<'a>(thing: &'a Thing, mut f: impl FnMut(&'a AstAction, Option<(&'a str, &'a str)>)) {
    let Some(chart) = &thing.behavior else { return };
    walk(&chart.on_entry, None, &mut f);
    walk(&chart.on_exit, None, &mut f);
    for s in chart.states.values() {
        walk(&s.on_entry, None, &mut f);
        walk(&s.on_exit, None, &mut f);
        for t in &s.transitions {
            let ev = t
                .event
                .as_ref()
                .and_then(|e| e.var.as_ref().map(|v| (v.as_str(), e.message.as_str())));
            walk(&t.action, ev, &mut f);
        }
    }
}

struct Checker {
    diags: Vec<Diagnostic>,
}

impl Checker {
    fn push(&mut self, code: &'static str, span: &Span, msg: String) {
        self.diags.push(Diagnostic::error(code, span, msg));
    }

    fn expect(&mut self, env: &TypeEnv<'_>, e: &Expr, want: Option<Ty>, code: &'static str, what: &str) {
        match env.infer(e) {
            Err(err) => self.push(codes::V1, &err.span, err.message),
            Ok(t) => {
                if let Some(w) = want {
                    if !t.assignable_to(w) {
                        self.push(code, &e.span, format!("{what} expects {w}, found {t}"));
                    }
                }
            }
        }
    }

    fn thing_valid(&mut self, thing: &Thing) {
        for p in thing.properties.values() {
            if let Some(init) = &p.init {
                let env = TypeEnv {
                    properties: &thing.properties,
                    messages: &thing.messages,
                    event: None,
                };
                self.expect(&env, init, Some(Ty::of(p.ty)), codes::V1, &format!("property `{}`", p.name));
            }
        }

        if let Some(chart) = &thing.behavior {
            // V2: δ must be a function.
            for s in chart.states.values() {
                let mut seen: HashMap<Option<crate::metamodel::EventKey>, ()> = HashMap::new();
                for t in &s.transitions {
                    let key = t.event.as_ref().map(event_key);
                    if seen.insert(key.clone(), ()).is_some() {
                        let what = match &key {
                            Some(k) => format!("event `{k}`"),
                            None => "no event".to_string(),
                        };
                        self.push(
                            codes::V2,
                            &t.span,
                            format!("state `{}` has more than one transition on {what}", s.name),
                        );
                    }
                }
            }
        }

        let mut pending: Vec<(&'static str, Span, String)> = Vec::new();
        for_each_action(thing, |a, event| {
            let env = TypeEnv {
                properties: &thing.properties,
                messages: &thing.messages,
                event,
            };
            let check = |e: &Expr, want: Option<Ty>, code: &'static str, what: String| match env.infer(e) {
                Err(err) => Some((codes::V1, err.span, err.message)),
                Ok(t) => match want {
                    Some(w) if !t.assignable_to(w) => {
                        Some((code, e.span.clone(), format!("{what} expects {w}, found {t}")))
                    }
                    _ => None,
                },
            };
            match &a.kind {
                ActionKind::Print(e) => pending.extend(check(e, None, codes::V1, String::new())),
                ActionKind::Assign { target, value } => {
                    let want = thing.properties.get(target.as_str()).map(|p| Ty::of(p.ty));
                    pending.extend(check(value, want, codes::V1, format!("assignment to `{target}`")));
                }
                ActionKind::If { cond, .. } => {
                    pending.extend(check(cond, Some(Ty::Boolean), codes::V1, "condition".into()))
                }
                ActionKind::Send { port, message, args } => {
                    if let Some(p) = thing.ports.get(port.as_str()) {
                        if !p.sends.iter().any(|m| m == message.as_str()) {
                            pending.push((
                                codes::V3,
                                message.span.clone(),
                                format!("port `{port}` does not send `{message}`"),
                            ));
                        }
                    }
                    if let Some(m) = thing.messages.get(message.as_str()) {
                        if m.params.len() != args.len() {
                            pending.push((
                                codes::V1,
                                a.span.clone(),
                                format!(
                                    "message `{message}` takes {} argument(s), found {}",
                                    m.params.len(),
                                    args.len()
                                ),
                            ));
                        }
                        for (arg, p) in args.iter().zip(&m.params) {
                            pending.extend(check(arg, Some(Ty::of(p.ty)), codes::V1, format!("parameter `{}`", p.name)));
                        }
                    }
                }
                ActionKind::DaPredict { da, args } => {
                    let Some(analytics) = thing.analytics.get(da.as_str()) else { return };
                    let inputs = analytics.spec.inputs();
                    if inputs.len() != args.len() {
                        pending.push((
                            codes::V4,
                            a.span.clone(),
                            format!(
                                "da_predict `{da}` expects {} argument(s), found {}",
                                inputs.len(),
                                args.len()
                            ),
                        ));
                        return;
                    }
                    for (arg, f) in args.iter().zip(inputs) {
                        let want = thing.properties.get(&f.name).map(|p| Ty::of(p.ty));
                        pending.extend(check(arg, want, codes::V4, format!("feature `{}`", f.name)));
                    }
                }
                ActionKind::DaPreprocess(_) | ActionKind::DaTrain(_) | ActionKind::DaSave(_) => {}
            }
        });
        for (code, span, msg) in pending {
            self.push(code, &span, msg);
        }

        for a in thing.analytics.values() {
            self.prediction_type(a);
        }
    }

    /// V5: the prediction property must hold what the task produces.
    fn prediction_type(&mut self, a: &Analytics) {
        let spec = &a.spec;
        let task = spec.task();
        let Some(family) = spec.family() else { return };
        let span = a.param_span(if spec.blackbox_ml { "blackbox_import_algorithm" } else { "model_algorithm" });
        if !family.supports(task) {
            self.push(
                codes::V5,
                span,
                format!("{family} cannot perform {task} on data_analytics `{}`", spec.name),
            );
            return;
        }
        if let Some(label) = spec.label() {
            if label.ty == FeatureType::Integer && task == Task::Classification {
                return;
            }
        }
        let Some(pred) = &spec.prediction_results else { return };
        let span = a.param_span("prediction_results");
        let ok = match task {
            Task::Classification => Some(pred.ty) == spec.label().map(|l| l.ty),
            Task::Regression => pred.ty.is_numeric(),
            Task::Clustering => match pred.ty {
                FeatureType::Boolean => {
                    let k = spec
                        .hyperparameters()
                        .iter()
                        .find(|(key, _)| key == "k" || key == "n_clusters")
                        .map(|(_, v)| v.clone())
                        .unwrap_or(HyperValue::Int(2));
                    if k != HyperValue::Int(2) && !spec.blackbox_ml {
                        self.push(
                            codes::V5,
                            span,
                            format!("Boolean cluster results need k = 2 in data_analytics `{}`", spec.name),
                        );
                        return;
                    }
                    true
                }
                FeatureType::Text | FeatureType::Integer => true,
                FeatureType::Real => false,
            },
        };
        if !ok {
            let want = match task {
                Task::Classification => spec.label().map(|l| ty_of_feature(l.ty)).unwrap_or("Boolean"),
                Task::Regression => "numeric",
                Task::Clustering => "Boolean, String or integer",
            };
            self.push(
                codes::V5,
                span,
                format!(
                    "prediction_results `{}` is {} but {task} produces {want}",
                    pred.name,
                    ty_of_feature(pred.ty)
                ),
            );
        }
    }

    /// V6: a connector joins a required port to a provided one and each end
    /// can receive everything the other sends.
    fn connectors(&mut self, model: &ResolvedModel) {
        for c in model.configurations.values() {
            for k in &c.connectors {
                let end = |ep: &crate::metamodel::Endpoint| {
                    let inst = c.instances.get(&ep.instance)?;
                    let thing = model.things.get(&inst.thing)?;
                    Some((thing, thing.ports.get(&ep.port)?))
                };
                let (Some((ta, pa)), Some((tb, pb))) = (end(&k.from), end(&k.to)) else { continue };
                if pa.direction == pb.direction {
                    self.push(
                        codes::V6,
                        &k.span,
                        format!(
                            "connector {} => {} joins two {} ports",
                            k.from,
                            k.to,
                            pa.direction.as_str()
                        ),
                    );
                    continue;
                }
                for (src, sp, src_ep, dst, dp, dst_ep) in [(ta, pa, &k.from, tb, pb, &k.to), (tb, pb, &k.to, ta, pa, &k.from)] {
                    for m in &sp.sends {
                        let receivable = dp.receives.iter().any(|r| r == m)
                            && src.messages.get(m).map(|x| &x.params) == dst.messages.get(m).map(|x| &x.params);
                        if !receivable {
                            self.push(
                                codes::V6,
                                &k.span,
                                format!("`{m}` sent by {src_ep} cannot be received by {dst_ep}"),
                            );
                        }
                    }
                }
            }
        }
    }
}

/// V1–V6. Empty iff the model is valid.
pub fn check_valid(model: &ResolvedModel) -> Vec<Diagnostic> {
    let mut c = Checker { diags: Vec::new() };
    for thing in model.things.values() {
        c.thing_valid(thing);
    }
    c.connectors(model);
    diag::sort(&mut c.diags);
    c.diags
}

/// C1–C6 plus the shared-prediction warning. `require_configuration` turns
/// on C6; library files of fragments are legitimately configuration-free.
pub fn check_complete(model: &ResolvedModel, require_configuration: bool) -> Vec<Diagnostic> {
    let mut c = Checker { diags: Vec::new() };
    let instantiated: Vec<&str> = model
        .configurations
        .values()
        .flat_map(|cfg| cfg.instances.values().map(|i| i.thing.as_str()))
        .collect();
    for thing in model.things.values().filter(|t| !t.builtin) {
        match &thing.behavior {
            Some(chart) => {
                if !chart.states.contains_key(chart.initial.as_str()) {
                    c.push(
                        codes::C1,
                        &chart.initial.span,
                        format!("initial state `{}` is not declared in `{}`", chart.initial, chart.name),
                    );
                }
            }
            None if instantiated.contains(&thing.name.as_str()) => c.push(
                codes::C1,
                &thing.span,
                format!("thing `{}` is instantiated but has no statechart", thing.name),
            ),
            None => {}
        }

        let mut prediction_owner: HashMap<&str, &str> = HashMap::new();
        for a in thing.analytics.values() {
            let s = &a.spec;
            if s.dataset.is_none() {
                c.push(codes::C2, &a.span, format!("data_analytics `{}` has no dataset", s.name));
            }
            let min = if s.labels { 2 } else { 1 };
            if s.features.len() < min {
                c.push(
                    codes::C2,
                    a.param_span("features"),
                    format!(
                        "data_analytics `{}` needs at least {min} feature(s){}",
                        s.name,
                        if s.labels { " with labels ON" } else { "" }
                    ),
                );
            }
            if s.blackbox_ml {
                let mut missing = Vec::new();
                if s.blackbox_ml_model.is_none() {
                    missing.push("blackbox_ml_model");
                }
                if s.blackbox_import_algorithm.is_none() {
                    missing.push("blackbox_import_algorithm");
                }
                if !missing.is_empty() {
                    c.push(
                        codes::C4,
                        &a.span,
                        format!("black-box data_analytics `{}` lacks {}", s.name, missing.join(" and ")),
                    );
                }
                for key in ["model_algorithm", "training_results"] {
                    if a.param_spans.get(key).is_some() {
                        c.push(
                            codes::C4,
                            a.param_span(key),
                            format!("black-box data_analytics `{}` may not declare {key}", s.name),
                        );
                    }
                }
            } else {
                match &s.algorithm {
                    None => c.push(
                        codes::C3,
                        &a.span,
                        format!("data_analytics `{}` declares no model_algorithm", s.name),
                    ),
                    Some(alg) if alg.family.supports(s.task()) => {
                        if let Err(errors) = Hyper::resolve(alg.family, s.task(), &alg.hyperparameters, mlq_ml::spec::DEFAULT_SEED) {
                            for e in errors {
                                c.push(codes::C3, a.param_span("model_algorithm"), e);
                            }
                        }
                    }
                    Some(_) => {}
                }
            }
            if let Some(p) = &s.prediction_results {
                if let Some(other) = prediction_owner.insert(p.name.as_str(), s.name.as_str()) {
                    c.diags.push(Diagnostic::warning(
                        codes::SHARED_PREDICTION,
                        a.param_span("prediction_results"),
                        format!(
                            "data_analytics `{}` and `{other}` both write property `{}`",
                            s.name, p.name
                        ),
                    ));
                }
            }
        }

        let mut pending = Vec::new();
        for_each_action(thing, |a, _| {
            let (da, training) = match &a.kind {
                ActionKind::DaPreprocess(d) | ActionKind::DaTrain(d) => (d, true),
                ActionKind::DaPredict { da, .. } => (da, false),
                ActionKind::DaSave(d) => (d, false),
                _ => return,
            };
            match thing.analytics.get(da.as_str()) {
                None => pending.push((
                    codes::C5,
                    da.span.clone(),
                    format!("unknown data_analytics `{da}`"),
                )),
                Some(x) if training && x.spec.blackbox_ml => pending.push((
                    codes::C4,
                    a.span.clone(),
                    format!("black-box data_analytics `{da}` cannot be preprocessed or trained"),
                )),
                Some(_) => {}
            }
        });
        for (code, span, msg) in pending {
            c.push(code, &span, msg);
        }
    }
    if require_configuration && model.configurations.is_empty() {
        c.push(codes::C6, &Span::default(), "no configuration to compile or run".into());
    }
    diag::sort(&mut c.diags);
    c.diags
}

/// Fills unset parameters of AutoML-enabled data_analytics blocks. Each change
/// is reported as a note. Models with AutoML OFF pass through unchanged.
pub fn apply_automl_defaults(model: &ResolvedModel) -> (ResolvedModel, Vec<Diagnostic>) {
    let mut out = model.clone();
    let mut notes = Vec::new();
    for thing in out.things.values_mut() {
        for a in thing.analytics.values_mut() {
            let s = &mut a.spec;
            if !s.automl {
                continue;
            }
            if s.sequential.is_none() && s.timestamps {
                s.sequential = Some(true);
                notes.push(Diagnostic::note(
                    codes::AUTOML,
                    &a.span,
                    format!("automl: `{}` is time-stamped, sequential set to TRUE", s.name),
                ));
            }
            let scaled = matches!(
                s.family(),
                Some(Family::NnMultilayerPerceptron | Family::LogisticRegression | Family::KMeans)
            );
            if s.scaler.is_none() && scaled {
                s.scaler = Some(ScalerKind::Standard);
                notes.push(Diagnostic::note(
                    codes::AUTOML,
                    &a.span,
                    format!("automl: `{}` uses the standard scaler", s.name),
                ));
            }
            if s.dalib.as_deref().is_none_or(|d| d == "auto") {
                s.dalib = Some(BUILTIN_DALIB.into());
                notes.push(Diagnostic::note(
                    codes::AUTOML,
                    &a.span,
                    format!("automl: `{}` uses the built-in library", s.name),
                ));
            }
        }
    }
    diag::sort(&mut notes);
    (out, notes)
}

/// Whether a model needs a configuration: anything beyond pure fragments does.
pub fn needs_configuration(model: &ResolvedModel) -> bool {
    model.things.values().any(|t| !t.builtin)
}

/// Both predicates.
pub fn check(model: &ResolvedModel, require_configuration: bool) -> Vec<Diagnostic> {
    let mut d = check_valid(model);
    d.extend(check_complete(model, require_configuration));
    diag::sort(&mut d);
    d
}
