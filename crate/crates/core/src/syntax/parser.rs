use std::collections::HashSet;

use super::ast::*;
use super::lexer::{tokenize, unescape, Token, TokenKind};
use crate::diag::{codes, Diagnostic, Span};

const MAX_DEPTH: usize = 200;

/// Marker for an error already recorded as a diagnostic.
struct Abort;

type PResult<T> = Result<T, Abort>;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    depth: usize,
    diags: Vec<Diagnostic>,
}

fn describe(t: &Token) -> String {
    match t.kind {
        TokenKind::Eof => "end of input".into(),
        TokenKind::Ident => format!("identifier `{}`", t.lexeme),
        TokenKind::Keyword => format!("keyword `{}`", t.lexeme),
        TokenKind::Str => "string literal".into(),
        TokenKind::Int | TokenKind::Float => format!("number `{}`", t.lexeme),
        TokenKind::Annotation => format!("annotation `{}`", t.lexeme),
        TokenKind::Punct | TokenKind::Unknown => format!("`{}`", t.lexeme),
    }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, n: usize) -> &Token {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i]
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span.clone()
    }

    fn span_from(&self, start: &Span) -> Span {
        if self.pos == 0 {
            return start.clone();
        }
        start.to(&self.prev_span())
    }

    fn error<T>(&mut self, expected: &str) -> PResult<T> {
        let t = self.peek();
        let msg = format!("expected {expected}, found {}", describe(t));
        let span = t.span.clone();
        // The lexer already reported malformed tokens.
        if t.kind != TokenKind::Unknown {
            self.diags.push(Diagnostic::error(codes::SYNTAX, &span, msg));
        }
        Err(Abort)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.peek().is_keyword(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.peek().is_punct(p) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<Token> {
        if self.peek().is_keyword(kw) {
            Ok(self.advance())
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<Token> {
        if self.peek().is_punct(p) {
            Ok(self.advance())
        } else {
            self.error(&format!("`{p}`"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<Ident> {
        if self.peek().kind == TokenKind::Ident {
            let t = self.advance();
            Ok(Ident {
                name: t.lexeme,
                span: t.span,
            })
        } else {
            self.error(what)
        }
    }

    fn string(&mut self, what: &str) -> PResult<StrLit> {
        if self.peek().kind == TokenKind::Str {
            let t = self.advance();
            Ok(StrLit {
                value: unescape(&t.lexeme),
                span: t.span,
            })
        } else {
            self.error(what)
        }
    }

    fn ident_list(&mut self, what: &str) -> PResult<Vec<Ident>> {
        let mut out = vec![self.ident(what)?];
        while self.eat_punct(",") {
            out.push(self.ident(what)?);
        }
        Ok(out)
    }

    fn type_name(&mut self) -> PResult<TypeName> {
        if self.peek().kind == TokenKind::Ident {
            if let Some(ty) = TypeName::from_name(&self.peek().lexeme) {
                self.advance();
                return Ok(ty);
            }
        }
        self.error("a type (Int32, Long, Float, Double, Boolean, String)")
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            let span = self.peek().span.clone();
            self.diags
                .push(Diagnostic::error(codes::SYNTAX, &span, "nesting too deep"));
            return Err(Abort);
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn annotations(&mut self) -> PResult<Vec<AstAnnotation>> {
        let mut out = Vec::new();
        while self.peek().kind == TokenKind::Annotation {
            let t = self.advance();
            let value = self.string("annotation value string")?;
            out.push(AstAnnotation {
                key: t.lexeme[1..].to_string(),
                value: value.value,
                span: t.span.to(&value.span),
            });
        }
        Ok(out)
    }

    // ---- top level ----

    fn unit(&mut self) -> AstUnit {
        let mut unit = AstUnit::default();
        let mut thing_names = HashSet::new();
        let mut config_names = HashSet::new();
        loop {
            let t = self.peek().clone();
            let start = self.pos;
            let result = match t.kind {
                TokenKind::Eof => break,
                TokenKind::Annotation => self.annotations().map(|a| unit.annotations.extend(a)),
                TokenKind::Keyword if t.lexeme == "thing" => self.thing().map(|th| {
                    if !thing_names.insert(th.name.name.clone()) {
                        self.diags.push(Diagnostic::error(
                            codes::DUPLICATE_TOP,
                            &th.name.span,
                            format!("duplicate thing `{}`", th.name),
                        ));
                    }
                    unit.things.push(th);
                }),
                TokenKind::Keyword if t.lexeme == "configuration" => self.configuration().map(|c| {
                    if !config_names.insert(c.name.name.clone()) {
                        self.diags.push(Diagnostic::error(
                            codes::DUPLICATE_TOP,
                            &c.name.span,
                            format!("duplicate configuration `{}`", c.name),
                        ));
                    }
                    unit.configurations.push(c);
                }),
                _ => self.error("`thing`, `configuration` or an annotation"),
            };
            if result.is_err() {
                self.recover(start);
            }
        }
        unit
    }

    /// Skips to the next top-level keyword.
    fn recover(&mut self, start: usize) {
        self.depth = 0;
        if self.pos == start {
            self.advance();
        }
        while !matches!(self.peek().kind, TokenKind::Eof)
            && !self.peek().is_keyword("thing")
            && !self.peek().is_keyword("configuration")
        {
            self.advance();
        }
    }

    fn thing(&mut self) -> PResult<AstThing> {
        let start = self.expect_keyword("thing")?.span;
        let is_fragment = self.eat_keyword("fragment");
        let name = self.ident("thing name")?;
        let mut thing = AstThing::new(&name.name);
        thing.name = name;
        thing.is_fragment = is_fragment;
        if self.eat_keyword("includes") {
            thing.includes = self.ident_list("fragment name")?;
        }
        thing.annotations = self.annotations()?;
        self.expect_punct("{")?;
        let mut chart_seen = false;
        loop {
            let t = self.peek().clone();
            if t.is_punct("}") {
                self.advance();
                break;
            }
            match t.lexeme.as_str() {
                "message" if t.kind == TokenKind::Keyword => {
                    let m = self.message()?;
                    thing.messages.push(m);
                }
                "provided" | "required" if t.kind == TokenKind::Keyword => {
                    let p = self.port()?;
                    thing.ports.push(p);
                }
                "property" if t.kind == TokenKind::Keyword => {
                    let p = self.property()?;
                    thing.properties.push(p);
                }
                "data_analytics" if t.kind == TokenKind::Keyword => {
                    let da = self.data_analytics()?;
                    if chart_seen {
                        self.diags.push(Diagnostic::error(
                            codes::DA_ORDER,
                            &da.name.span,
                            format!(
                                "data_analytics `{}` must be declared before the statechart",
                                da.name
                            ),
                        ));
                    }
                    thing.analytics.push(da);
                }
                "statechart" if t.kind == TokenKind::Keyword => {
                    let sc = self.statechart()?;
                    if chart_seen {
                        self.diags.push(Diagnostic::error(
                            codes::MULTIPLE_CHARTS,
                            &sc.name.span,
                            format!("thing `{}` declares more than one statechart", thing.name),
                        ));
                    }
                    chart_seen = true;
                    thing.statecharts.push(sc);
                }
                _ => return self.error("a thing member or `}`"),
            }
        }
        thing.span = self.span_from(&start);
        Ok(thing)
    }

    fn message(&mut self) -> PResult<AstMessage> {
        let start = self.expect_keyword("message")?.span;
        let name = self.ident("message name")?;
        let mut params = Vec::new();
        if self.eat_punct("(") {
            if !self.peek().is_punct(")") {
                loop {
                    let pname = self.ident("parameter name")?;
                    self.expect_punct(":")?;
                    let ty = self.type_name()?;
                    let span = self.span_from(&pname.span);
                    params.push(AstParam { name: pname, ty, span });
                    if !self.eat_punct(",") {
                        break;
                    }
                }
            }
            self.expect_punct(")")?;
        }
        let annotations = self.annotations()?;
        self.eat_punct(";");
        Ok(AstMessage {
            name,
            params,
            annotations,
            span: self.span_from(&start),
        })
    }

    fn port(&mut self) -> PResult<AstPort> {
        let start = self.peek().span.clone();
        let direction = if self.eat_keyword("provided") {
            PortDirection::Provided
        } else {
            self.expect_keyword("required")?;
            PortDirection::Required
        };
        self.expect_keyword("port")?;
        let name = self.ident("port name")?;
        let annotations = self.annotations()?;
        self.expect_punct("{")?;
        let mut receives = Vec::new();
        let mut sends = Vec::new();
        loop {
            if self.eat_punct("}") {
                break;
            } else if self.eat_keyword("receives") {
                receives.extend(self.ident_list("message name")?);
            } else if self.eat_keyword("sends") {
                sends.extend(self.ident_list("message name")?);
            } else {
                return self.error("`receives`, `sends` or `}`");
            }
        }
        Ok(AstPort {
            direction,
            name,
            annotations,
            receives,
            sends,
            span: self.span_from(&start),
        })
    }

    fn property(&mut self) -> PResult<AstProperty> {
        let start = self.expect_keyword("property")?.span;
        let name = self.ident("property name")?;
        self.expect_punct(":")?;
        let ty = self.type_name()?;
        let init = if self.eat_punct("=") { Some(self.expr()?) } else { None };
        let annotations = self.annotations()?;
        self.eat_punct(";");
        Ok(AstProperty {
            name,
            ty,
            init,
            annotations,
            span: self.span_from(&start),
        })
    }

    fn switch(&mut self) -> PResult<bool> {
        let t = self.peek();
        if t.kind == TokenKind::Keyword {
            match t.lexeme.as_str() {
                "ON" | "TRUE" | "true" => {
                    self.advance();
                    return Ok(true);
                }
                "OFF" | "FALSE" | "false" => {
                    self.advance();
                    return Ok(false);
                }
                _ => {}
            }
        }
        self.error("ON, OFF, TRUE or FALSE")
    }

    fn word(&mut self, what: &str) -> PResult<Ident> {
        let t = self.peek();
        if t.kind == TokenKind::Str {
            let s = self.string(what)?;
            return Ok(Ident {
                name: s.value,
                span: s.span,
            });
        }
        self.ident(what)
    }

    fn hyper_value(&mut self) -> PResult<HyperValue> {
        let t = self.peek().clone();
        let negative = t.is_punct("-");
        let t = if negative {
            self.advance();
            self.peek().clone()
        } else {
            t
        };
        match t.kind {
            TokenKind::Int => {
                self.advance();
                let v = self.int_literal(&t, negative)?;
                Ok(HyperValue::Int(v))
            }
            TokenKind::Float => {
                self.advance();
                let v = self.float_literal(&t)?;
                Ok(HyperValue::Float(if negative { -v } else { v }))
            }
            _ if negative => self.error("a number"),
            TokenKind::Ident | TokenKind::Keyword => {
                self.advance();
                Ok(HyperValue::Ident(t.lexeme))
            }
            TokenKind::Str => {
                self.advance();
                Ok(HyperValue::Str(unescape(&t.lexeme)))
            }
            _ => self.error("a hyperparameter value"),
        }
    }

    fn algorithm(&mut self) -> PResult<AstAlgorithm> {
        let name = self.ident("algorithm name")?;
        let instance = self.ident("algorithm instance name")?;
        let mut hyperparameters = Vec::new();
        if self.eat_punct("(") {
            if !self.peek().is_punct(")") {
                loop {
                    let key = self.ident("hyperparameter name")?;
                    let value = self.hyper_value()?;
                    hyperparameters.push(AstHyper { key, value });
                    if !self.eat_punct(",") {
                        break;
                    }
                }
            }
            self.expect_punct(")")?;
        }
        let span = self.span_from(&name.span);
        Ok(AstAlgorithm {
            name,
            instance,
            hyperparameters,
            span,
        })
    }

    fn data_analytics(&mut self) -> PResult<AstDataAnalytics> {
        let start = self.expect_keyword("data_analytics")?.span;
        let name = self.ident("data_analytics name")?;
        let mut da = AstDataAnalytics::new(&name.name);
        da.name = name;
        for a in self.annotations()? {
            if a.key == "dalib" && da.dalib.is_none() {
                da.dalib = Some(StrLit {
                    value: a.value,
                    span: a.span,
                });
            } else {
                da.annotations.push(a);
            }
        }
        self.expect_punct("{")?;
        loop {
            if self.eat_punct("}") {
                break;
            }
            let t = self.peek().clone();
            if t.kind != TokenKind::Keyword {
                return self.error("a data_analytics parameter or `}`");
            }
            const PARAMS: [&str; 13] = [
                "labels",
                "features",
                "prediction_results",
                "dataset",
                "automl",
                "sequential",
                "timestamps",
                "preprocess_feature_scaler",
                "model_algorithm",
                "training_results",
                "blackbox_ml",
                "blackbox_ml_model",
                "blackbox_import_algorithm",
            ];
            let Some(key) = PARAMS.iter().find(|k| **k == t.lexeme) else {
                return self.error("a data_analytics parameter or `}`");
            };
            self.advance();
            if da.param_spans.get(key).is_some() {
                self.diags.push(Diagnostic::error(
                    codes::DUPLICATE_PARAM,
                    &t.span,
                    format!("parameter `{key}` given twice in data_analytics `{}`", da.name),
                ));
            }
            match *key {
                "labels" => da.labels = self.switch()?,
                "features" => da.features = self.ident_list("feature property name")?,
                "prediction_results" => da.prediction_results = Some(self.ident("property name")?),
                "dataset" => da.dataset = Some(self.string("dataset path string")?),
                "automl" => da.automl = self.switch()?,
                "sequential" => da.sequential = Some(self.switch()?),
                "timestamps" => da.timestamps = self.switch()?,
                "preprocess_feature_scaler" => da.scaler = Some(self.word("scaler name")?),
                "model_algorithm" => da.model_algorithm = Some(self.algorithm()?),
                "training_results" => da.training_results = Some(self.string("log path string")?),
                "blackbox_ml" => da.blackbox_ml = Some(self.switch()?),
                "blackbox_ml_model" => da.blackbox_ml_model = Some(self.string("model directory string")?),
                _ => {
                    let w = self.word("algorithm name")?;
                    da.blackbox_import_algorithm = Some(StrLit {
                        value: w.name,
                        span: w.span,
                    });
                }
            }
            let span = self.span_from(&t.span);
            da.param_spans.0.push((key, span));
        }
        da.span = self.span_from(&start);
        Ok(da)
    }

    // ---- behavior ----

    fn statechart(&mut self) -> PResult<AstStateChart> {
        let start = self.expect_keyword("statechart")?.span;
        let name = self.ident("statechart name")?;
        self.expect_keyword("init")?;
        let initial = self.ident("initial state name")?;
        let annotations = self.annotations()?;
        self.expect_punct("{")?;
        let mut chart = AstStateChart {
            name,
            initial,
            annotations,
            on_entry: Vec::new(),
            on_exit: Vec::new(),
            states: Vec::new(),
            span: start.clone(),
        };
        loop {
            if self.eat_punct("}") {
                break;
            }
            if self.peek().is_keyword("on") {
                let (entry, actions) = self.handler()?;
                if entry {
                    chart.on_entry.extend(actions);
                } else {
                    chart.on_exit.extend(actions);
                }
            } else if self.peek().is_keyword("state") || self.peek().is_keyword("final") {
                let s = self.state()?;
                chart.states.push(s);
            } else {
                return self.error("`state`, `final state`, `on` or `}`");
            }
        }
        chart.span = self.span_from(&start);
        Ok(chart)
    }

    /// `on entry <action>` or `on exit <action>`; returns true for entry.
    fn handler(&mut self) -> PResult<(bool, Vec<AstAction>)> {
        self.expect_keyword("on")?;
        let entry = if self.eat_keyword("entry") {
            true
        } else if self.eat_keyword("exit") {
            false
        } else {
            return self.error("`entry` or `exit`");
        };
        Ok((entry, self.action_block()?))
    }

    fn state(&mut self) -> PResult<AstState> {
        let start = self.peek().span.clone();
        let is_final = self.eat_keyword("final");
        self.expect_keyword("state")?;
        let name = self.ident("state name")?;
        let annotations = self.annotations()?;
        self.expect_punct("{")?;
        let mut state = AstState {
            name,
            is_final,
            annotations,
            on_entry: Vec::new(),
            on_exit: Vec::new(),
            transitions: Vec::new(),
            span: start.clone(),
        };
        loop {
            if self.eat_punct("}") {
                break;
            }
            if self.peek().is_keyword("on") {
                let (entry, actions) = self.handler()?;
                if entry {
                    state.on_entry.extend(actions);
                } else {
                    state.on_exit.extend(actions);
                }
            } else if self.peek().is_keyword("transition") {
                let t = self.transition()?;
                state.transitions.push(t);
            } else {
                return self.error("`on`, `transition` or `}`");
            }
        }
        state.span = self.span_from(&start);
        Ok(state)
    }

    fn transition(&mut self) -> PResult<AstTransition> {
        let start = self.expect_keyword("transition")?.span;
        let name = if self.peek().kind == TokenKind::Ident {
            Some(self.ident("transition name")?)
        } else {
            None
        };
        self.expect_punct("->")?;
        let target = self.ident("target state name")?;
        let event = if self.peek().is_keyword("event") {
            let estart = self.advance().span;
            let first = self.ident("event variable or port name")?;
            let (var, port) = if self.eat_punct(":") {
                (Some(first), self.ident("port name")?)
            } else {
                (None, first)
            };
            self.expect_punct("?")?;
            let message = self.ident("message name")?;
            Some(AstEvent {
                var,
                port,
                message,
                span: self.span_from(&estart),
            })
        } else {
            None
        };
        let action = if self.eat_keyword("action") {
            self.action_block()?
        } else {
            Vec::new()
        };
        Ok(AstTransition {
            name,
            target,
            event,
            action,
            span: self.span_from(&start),
        })
    }

    /// `do <action>* end` or a single action.
    fn action_block(&mut self) -> PResult<Vec<AstAction>> {
        self.enter()?;
        let out = if self.eat_keyword("do") {
            let mut out = Vec::new();
            while !self.eat_keyword("end") {
                out.push(self.action()?);
            }
            out
        } else {
            vec![self.action()?]
        };
        self.leave();
        Ok(out)
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_punct("(")?;
        let mut out = Vec::new();
        if !self.peek().is_punct(")") {
            loop {
                out.push(self.expr()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        Ok(out)
    }

    fn action(&mut self) -> PResult<AstAction> {
        let t = self.peek().clone();
        let kind = match (t.kind, t.lexeme.as_str()) {
            (TokenKind::Keyword, "print") => {
                self.advance();
                ActionKind::Print(self.expr()?)
            }
            (TokenKind::Keyword, "if") => {
                self.advance();
                let cond = self.expr()?;
                let then = self.action_block()?;
                let otherwise = if self.eat_keyword("else") {
                    Some(self.action_block()?)
                } else {
                    None
                };
                ActionKind::If { cond, then, otherwise }
            }
            (TokenKind::Keyword, "da_preprocess") => {
                self.advance();
                ActionKind::DaPreprocess(self.ident("data_analytics name")?)
            }
            (TokenKind::Keyword, "da_train") => {
                self.advance();
                ActionKind::DaTrain(self.ident("data_analytics name")?)
            }
            (TokenKind::Keyword, "da_save") => {
                self.advance();
                ActionKind::DaSave(self.ident("data_analytics name")?)
            }
            (TokenKind::Keyword, "da_predict") => {
                self.advance();
                let da = self.ident("data_analytics name")?;
                let args = self.args()?;
                ActionKind::DaPredict { da, args }
            }
            (TokenKind::Ident, _) if self.peek_at(1).is_punct("=") => {
                let target = self.ident("property name")?;
                self.advance();
                ActionKind::Assign {
                    target,
                    value: self.expr()?,
                }
            }
            (TokenKind::Ident, _) if self.peek_at(1).is_punct("!") => {
                let port = self.ident("port name")?;
                self.advance();
                let message = self.ident("message name")?;
                let args = self.args()?;
                ActionKind::Send { port, message, args }
            }
            _ => return self.error("an action"),
        };
        Ok(AstAction {
            kind,
            span: self.span_from(&t.span),
        })
    }

    // ---- expressions ----

    fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binop(&self) -> Option<BinOp> {
        let t = self.peek();
        let op = match (t.kind, t.lexeme.as_str()) {
            (TokenKind::Keyword, "or") => BinOp::Or,
            (TokenKind::Keyword, "and") => BinOp::And,
            (TokenKind::Punct, "==") => BinOp::Eq,
            (TokenKind::Punct, "!=") => BinOp::Ne,
            (TokenKind::Punct, "<") => BinOp::Lt,
            (TokenKind::Punct, "<=") => BinOp::Le,
            (TokenKind::Punct, ">") => BinOp::Gt,
            (TokenKind::Punct, ">=") => BinOp::Ge,
            (TokenKind::Punct, "+") => BinOp::Add,
            (TokenKind::Punct, "-") => BinOp::Sub,
            (TokenKind::Punct, "*") => BinOp::Mul,
            (TokenKind::Punct, "/") => BinOp::Div,
            _ => return None,
        };
        Some(op)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        self.enter()?;
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.advance();
            let rhs = self.binary(prec + 1)?;
            let span = lhs.span.to(&rhs.span);
            lhs = Expr {
                kind: ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                span,
            };
        }
        self.leave();
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let t = self.peek().clone();
        let op = if t.is_punct("-") {
            // A minus directly followed by a numeric literal is part of the literal.
            let next = self.peek_at(1).clone();
            if matches!(next.kind, TokenKind::Int | TokenKind::Float) && next.leading.is_empty() {
                self.advance();
                self.advance();
                let kind = if next.kind == TokenKind::Int {
                    ExprKind::Int(self.int_literal(&next, true)?)
                } else {
                    ExprKind::Float(-self.float_literal(&next)?)
                };
                return Ok(Expr {
                    kind,
                    span: t.span.to(&next.span),
                });
            }
            UnaryOp::Neg
        } else if t.is_keyword("not") {
            UnaryOp::Not
        } else {
            return self.primary();
        };
        self.advance();
        self.enter()?;
        let operand = self.unary()?;
        self.leave();
        let span = t.span.to(&operand.span);
        Ok(Expr {
            kind: ExprKind::Unary {
                op,
                operand: Box::new(operand),
            },
            span,
        })
    }

    fn int_literal(&mut self, t: &Token, negative: bool) -> PResult<i64> {
        let parsed = t.lexeme.parse::<i128>().ok().map(|v| if negative { -v } else { v });
        match parsed.and_then(|v| i64::try_from(v).ok()) {
            Some(v) => Ok(v),
            None => {
                self.diags.push(Diagnostic::error(
                    codes::SYNTAX,
                    &t.span,
                    format!("integer literal `{}` out of range", t.lexeme),
                ));
                Err(Abort)
            }
        }
    }

    fn float_literal(&mut self, t: &Token) -> PResult<f64> {
        match t.lexeme.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => {
                self.diags.push(Diagnostic::error(
                    codes::SYNTAX,
                    &t.span,
                    format!("float literal `{}` out of range", t.lexeme),
                ));
                Err(Abort)
            }
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let t = self.peek().clone();
        let kind = match t.kind {
            TokenKind::Int => {
                self.advance();
                ExprKind::Int(self.int_literal(&t, false)?)
            }
            TokenKind::Float => {
                self.advance();
                ExprKind::Float(self.float_literal(&t)?)
            }
            TokenKind::Str => {
                self.advance();
                ExprKind::Str(unescape(&t.lexeme))
            }
            TokenKind::Keyword if t.lexeme == "true" || t.lexeme == "false" => {
                self.advance();
                ExprKind::Bool(t.lexeme == "true")
            }
            TokenKind::Ident => {
                let var = self.ident("name")?;
                if self.peek().is_punct(".") {
                    self.advance();
                    let param = self.ident("message parameter name")?;
                    ExprKind::Param { var, param }
                } else {
                    ExprKind::Name(var)
                }
            }
            TokenKind::Punct if t.lexeme == "(" => {
                self.advance();
                self.enter()?;
                let inner = self.expr()?;
                self.leave();
                self.expect_punct(")")?;
                return Ok(Expr {
                    kind: inner.kind,
                    span: self.span_from(&t.span),
                });
            }
            _ => return self.error("an expression"),
        };
        Ok(Expr {
            kind,
            span: self.span_from(&t.span),
        })
    }

    // ---- configurations ----

    fn configuration(&mut self) -> PResult<AstConfiguration> {
        let start = self.expect_keyword("configuration")?.span;
        let name = self.ident("configuration name")?;
        let annotations = self.annotations()?;
        self.expect_punct("{")?;
        let mut config = AstConfiguration {
            name,
            annotations,
            instances: Vec::new(),
            connectors: Vec::new(),
            span: start.clone(),
        };
        loop {
            if self.eat_punct("}") {
                break;
            }
            if self.peek().is_keyword("instance") {
                let istart = self.advance().span;
                let name = self.ident("instance name")?;
                self.expect_punct(":")?;
                let thing = self.ident("thing name")?;
                let annotations = self.annotations()?;
                config.instances.push(AstInstance {
                    name,
                    thing,
                    annotations,
                    span: self.span_from(&istart),
                });
            } else if self.peek().is_keyword("connector") {
                let cstart = self.advance().span;
                let from = self.endpoint()?;
                self.expect_punct("=>")?;
                let to = self.endpoint()?;
                config.connectors.push(AstConnector {
                    from,
                    to,
                    span: self.span_from(&cstart),
                });
            } else {
                return self.error("`instance`, `connector` or `}`");
            }
        }
        config.span = self.span_from(&start);
        Ok(config)
    }

    fn endpoint(&mut self) -> PResult<AstEndpoint> {
        let instance = self.ident("instance name")?;
        self.expect_punct(".")?;
        let port = self.ident("port name")?;
        Ok(AstEndpoint { instance, port })
    }
}

/// Parses a unit, always returning a (possibly partial) tree alongside every
/// diagnostic found.
pub fn parse_with_diagnostics(source: &str, file: &str) -> (AstUnit, Vec<Diagnostic>) {
    let (toks, mut diags) = tokenize(source, file);
    let mut p = Parser {
        toks,
        pos: 0,
        depth: 0,
        diags: Vec::new(),
    };
    let unit = p.unit();
    diags.extend(p.diags);
    crate::diag::sort(&mut diags);
    (unit, diags)
}

pub fn parse_model(source: &str, file: &str) -> Result<AstUnit, Vec<Diagnostic>> {
    let (unit, diags) = parse_with_diagnostics(source, file);
    if crate::diag::has_errors(&diags) {
        Err(diags)
    } else {
        Ok(unit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn codes_of(src: &str) -> Vec<&'static str> {
        match parse_model(src, "t.mlq") {
            Ok(_) => vec![],
            Err(d) => d.iter().map(|d| d.code).collect(),
        }
    }

    #[test]
    fn empty_input() {
        let u = parse_model("", "t").unwrap();
        assert!(u.things.is_empty() && u.configurations.is_empty());
        let u = parse_model("  /* only a comment */\n", "t").unwrap();
        assert!(u.things.is_empty());
    }

    #[test]
    fn da_after_statechart_is_an_ordering_error() {
        let src = "thing T { statechart S init A { state A {} } data_analytics d { labels OFF } }";
        assert_eq!(codes_of(src), vec![codes::DA_ORDER]);
    }

    #[test]
    fn duplicate_top_level() {
        assert_eq!(codes_of("thing A {} thing A {}"), vec![codes::DUPLICATE_TOP]);
    }

    #[test]
    fn two_statecharts() {
        let src = "thing T { statechart S init A { state A {} } statechart R init A { state A {} } }";
        assert_eq!(codes_of(src), vec![codes::MULTIPLE_CHARTS]);
    }

    #[test]
    fn duplicate_param() {
        assert_eq!(
            codes_of("thing T { data_analytics d { labels ON labels OFF } }"),
            vec![codes::DUPLICATE_PARAM]
        );
    }

    #[test]
    fn recovers_at_top_level_keywords() {
        let (unit, diags) = parse_with_diagnostics("thing A { junk } thing B {} configuration C { ??? }", "t");
        assert_eq!(diags.len(), 2, "{diags:?}");
        assert_eq!(unit.things.len(), 1);
        assert_eq!(unit.things[0].name.name, "B");
    }

    #[test]
    fn expected_found_message() {
        let d = parse_model("thing {", "m.mlq").unwrap_err();
        assert_eq!(d[0].human(), "m.mlq:1:7: error: expected thing name, found `{` [S1]");
    }

    #[test]
    fn precedence_and_folding() {
        let u = parse_model("thing T { property x : Int32 = 1 + 2 * -3 }", "t").unwrap();
        let init = u.things[0].properties[0].init.clone().unwrap();
        let ExprKind::Binary { op: BinOp::Add, rhs, .. } = init.kind else { panic!() };
        let ExprKind::Binary { op: BinOp::Mul, rhs, .. } = rhs.kind else { panic!() };
        assert_eq!(rhs.kind, ExprKind::Int(-3));
    }

    #[test]
    fn deep_nesting_is_reported_not_crashed() {
        let src = format!("thing T {{ property x : Int32 = {}1{} }}", "(".repeat(5000), ")".repeat(5000));
        assert_eq!(codes_of(&src), vec![codes::SYNTAX]);
        let src = format!("thing T {{ property x : Int32 = {}1 }}", "- ".repeat(5000));
        assert_eq!(codes_of(&src), vec![codes::SYNTAX]);
    }

    #[test]
    fn literal_limits() {
        assert!(parse_model("thing T { property x : Long = -9223372036854775808 }", "t").is_ok());
        assert_eq!(codes_of("thing T { property x : Long = 9223372036854775808 }"), vec![codes::SYNTAX]);
        assert_eq!(codes_of("thing T { property x : Double = 1e999 }"), vec![codes::SYNTAX]);
    }
}
