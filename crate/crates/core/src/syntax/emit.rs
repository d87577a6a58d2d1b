use std::fmt::Write as _;

use super::ast::*;
use super::lexer::{escape, KEYWORDS};

const INDENT: &str = "    ";

struct Emitter {
    out: String,
    level: usize,
}

fn is_plain_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&s)
}

fn word(s: &str) -> String {
    if is_plain_ident(s) {
        s.to_string()
    } else {
        escape(s)
    }
}

fn switch(on: bool) -> &'static str {
    if on {
        "ON"
    } else {
        "OFF"
    }
}

fn boolean(v: bool) -> &'static str {
    if v {
        "TRUE"
    } else {
        "FALSE"
    }
}

fn names(list: &[Ident]) -> String {
    list.iter().map(|i| i.name.as_str()).collect::<Vec<_>>().join(", ")
}

fn annotations(list: &[AstAnnotation]) -> String {
    list.iter()
        .map(|a| format!(" @{} {}", a.key, escape(&a.value)))
        .collect()
}

fn hyper(v: &HyperValue) -> String {
    match v {
        HyperValue::Int(i) => i.to_string(),
        HyperValue::Float(f) => format!("{f:?}"),
        HyperValue::Ident(s) => s.clone(),
        HyperValue::Str(s) => escape(s),
    }
}

const UNARY_PREC: u8 = 6;

pub fn emit_expr(e: &Expr) -> String {
    expr(e, 0)
}

fn expr(e: &Expr, min_prec: u8) -> String {
    match &e.kind {
        ExprKind::Int(v) => v.to_string(),
        ExprKind::Float(v) => format!("{v:?}"),
        ExprKind::Str(s) => escape(s),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Name(n) => n.name.clone(),
        ExprKind::Param { var, param } => format!("{var}.{param}"),
        ExprKind::Unary { op, operand } => {
            let inner = match (op, &operand.kind) {
                (UnaryOp::Neg, ExprKind::Int(_) | ExprKind::Float(_)) => format!("({})", expr(operand, 0)),
                _ => expr(operand, UNARY_PREC),
            };
            let text = match op {
                UnaryOp::Neg => format!("-{inner}"),
                UnaryOp::Not => format!("not {inner}"),
            };
            if UNARY_PREC < min_prec {
                format!("({text})")
            } else {
                text
            }
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            let text = format!("{} {} {}", expr(lhs, p), op.symbol(), expr(rhs, p + 1));
            if p < min_prec {
                format!("({text})")
            } else {
                text
            }
        }
    }
}

impl Emitter {
    fn line(&mut self, text: &str) {
        for _ in 0..self.level {
            self.out.push_str(INDENT);
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn open(&mut self, text: &str) {
        self.line(text);
        self.level += 1;
    }

    fn close(&mut self, text: &str) {
        self.level -= 1;
        self.line(text);
    }

    fn thing(&mut self, t: &AstThing) {
        let mut head = String::from("thing ");
        if t.is_fragment {
            head.push_str("fragment ");
        }
        head.push_str(&t.name.name);
        if !t.includes.is_empty() {
            let _ = write!(head, " includes {}", names(&t.includes));
        }
        head.push_str(&annotations(&t.annotations));
        head.push_str(" {");
        self.open(&head);
        for m in &t.messages {
            let params: Vec<String> = m.params.iter().map(|p| format!("{} : {}", p.name, p.ty)).collect();
            self.line(&format!("message {}({}){}", m.name, params.join(", "), annotations(&m.annotations)));
        }
        for p in &t.ports {
            self.open(&format!(
                "{} port {}{} {{",
                p.direction.as_str(),
                p.name,
                annotations(&p.annotations)
            ));
            if !p.receives.is_empty() {
                self.line(&format!("receives {}", names(&p.receives)));
            }
            if !p.sends.is_empty() {
                self.line(&format!("sends {}", names(&p.sends)));
            }
            self.close("}");
        }
        for p in &t.properties {
            let init = p.init.as_ref().map(|e| format!(" = {}", emit_expr(e))).unwrap_or_default();
            self.line(&format!("property {} : {}{}{}", p.name, p.ty, init, annotations(&p.annotations)));
        }
        for da in &t.analytics {
            self.analytics(da);
        }
        for sc in &t.statecharts {
            self.statechart(sc);
        }
        self.close("}");
    }

    fn analytics(&mut self, da: &AstDataAnalytics) {
        let dalib = da
            .dalib
            .as_ref()
            .map(|d| format!(" @dalib {}", escape(&d.value)))
            .unwrap_or_default();
        self.open(&format!("data_analytics {}{}{} {{", da.name, dalib, annotations(&da.annotations)));
        self.line(&format!("labels {}", switch(da.labels)));
        if !da.features.is_empty() {
            self.line(&format!("features {}", names(&da.features)));
        }
        if let Some(p) = &da.prediction_results {
            self.line(&format!("prediction_results {p}"));
        }
        if let Some(d) = &da.dataset {
            self.line(&format!("dataset {}", escape(&d.value)));
        }
        self.line(&format!("automl {}", switch(da.automl)));
        if let Some(s) = da.sequential {
            self.line(&format!("sequential {}", boolean(s)));
        }
        self.line(&format!("timestamps {}", switch(da.timestamps)));
        if let Some(s) = &da.scaler {
            self.line(&format!("preprocess_feature_scaler {}", word(&s.name)));
        }
        if let Some(a) = &da.model_algorithm {
            let mut text = format!("model_algorithm {} {}", a.name, a.instance);
            if !a.hyperparameters.is_empty() {
                let hp: Vec<String> = a
                    .hyperparameters
                    .iter()
                    .map(|h| format!("{} {}", h.key, hyper(&h.value)))
                    .collect();
                let _ = write!(text, " ({})", hp.join(", "));
            }
            self.line(&text);
        }
        if let Some(t) = &da.training_results {
            self.line(&format!("training_results {}", escape(&t.value)));
        }
        if let Some(b) = da.blackbox_ml {
            self.line(&format!("blackbox_ml {}", boolean(b)));
        }
        if let Some(m) = &da.blackbox_ml_model {
            self.line(&format!("blackbox_ml_model {}", escape(&m.value)));
        }
        if let Some(a) = &da.blackbox_import_algorithm {
            self.line(&format!("blackbox_import_algorithm {}", escape(&a.value)));
        }
        self.close("}");
    }

    fn statechart(&mut self, sc: &AstStateChart) {
        self.open(&format!(
            "statechart {} init {}{} {{",
            sc.name,
            sc.initial,
            annotations(&sc.annotations)
        ));
        self.handler("on entry", &sc.on_entry);
        self.handler("on exit", &sc.on_exit);
        for s in &sc.states {
            let prefix = if s.is_final { "final state" } else { "state" };
            self.open(&format!("{prefix} {}{} {{", s.name, annotations(&s.annotations)));
            self.handler("on entry", &s.on_entry);
            self.handler("on exit", &s.on_exit);
            for t in &s.transitions {
                let name = t.name.as_ref().map(|n| format!(" {n}")).unwrap_or_default();
                self.open(&format!("transition{name} -> {}", t.target));
                if let Some(e) = &t.event {
                    let var = e.var.as_ref().map(|v| format!("{v} : ")).unwrap_or_default();
                    self.line(&format!("event {var}{}?{}", e.port, e.message));
                }
                if !t.action.is_empty() {
                    self.block("action", &t.action);
                }
                self.level -= 1;
            }
            self.close("}");
        }
        self.close("}");
    }

    fn handler(&mut self, head: &str, actions: &[AstAction]) {
        if !actions.is_empty() {
            self.block(head, actions);
        }
    }

    fn block(&mut self, head: &str, actions: &[AstAction]) {
        self.open(&format!("{head} do"));
        for a in actions {
            self.action(a);
        }
        self.close("end");
    }

    fn action(&mut self, a: &AstAction) {
        match &a.kind {
            ActionKind::Print(e) => self.line(&format!("print {}", emit_expr(e))),
            ActionKind::Assign { target, value } => self.line(&format!("{target} = {}", emit_expr(value))),
            ActionKind::Send { port, message, args } => {
                self.line(&format!("{port}!{message}({})", exprs(args)));
            }
            ActionKind::If { cond, then, otherwise } => {
                self.open(&format!("if ({}) do", emit_expr(cond)));
                for a in then {
                    self.action(a);
                }
                match otherwise {
                    Some(other) => {
                        self.close("end else do");
                        self.level += 1;
                        for a in other {
                            self.action(a);
                        }
                        self.close("end");
                    }
                    None => self.close("end"),
                }
            }
            ActionKind::DaPreprocess(d) => self.line(&format!("da_preprocess {d}")),
            ActionKind::DaTrain(d) => self.line(&format!("da_train {d}")),
            ActionKind::DaPredict { da, args } => self.line(&format!("da_predict {da}({})", exprs(args))),
            ActionKind::DaSave(d) => self.line(&format!("da_save {d}")),
        }
    }

    fn configuration(&mut self, c: &AstConfiguration) {
        self.open(&format!("configuration {}{} {{", c.name, annotations(&c.annotations)));
        for i in &c.instances {
            self.line(&format!("instance {} : {}{}", i.name, i.thing, annotations(&i.annotations)));
        }
        for k in &c.connectors {
            self.line(&format!(
                "connector {}.{} => {}.{}",
                k.from.instance, k.from.port, k.to.instance, k.to.port
            ));
        }
        self.close("}");
    }
}

fn exprs(args: &[Expr]) -> String {
    args.iter().map(emit_expr).collect::<Vec<_>>().join(", ")
}

/// Deterministic source text for `unit`: 4-space indentation, one declaration
/// per line, top-level items separated by a blank line.
pub fn emit_canonical(unit: &AstUnit) -> String {
    let mut e = Emitter {
        out: String::new(),
        level: 0,
    };
    let mut first = true;
    let mut sep = |e: &mut Emitter| {
        if !std::mem::take(&mut first) {
            e.out.push('\n');
        }
    };
    if !unit.annotations.is_empty() {
        sep(&mut e);
        for a in &unit.annotations {
            e.line(&format!("@{} {}", a.key, escape(&a.value)));
        }
    }
    for t in &unit.things {
        sep(&mut e);
        e.thing(t);
    }
    for c in &unit.configurations {
        sep(&mut e);
        e.configuration(c);
    }
    e.out
}
