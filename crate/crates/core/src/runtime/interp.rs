//! Reference engine: walks the resolved model's action trees directly.

use mlq_ml::Value;

use crate::metamodel::{ResolvedModel, StateChart, Thing};
use crate::syntax::ast::{ActionKind, AstAction, AstTransition, Expr, ExprKind};
use crate::validate::apply_automl_defaults;

use super::layout::Layout;
use super::network::{Block, Context, Engine};
use super::value::{binary, truth, unary};
use super::RuntimeError;

pub struct Interpreter {
    model: ResolvedModel,
    layout: Layout,
    /// Per thing, transition id to (state, position within the state).
    transitions: Vec<Vec<(usize, usize)>>,
}

/// Names bound while a block runs: the thing, plus the triggering message
/// for transition actions.
struct Scope<'m> {
    thing: &'m Thing,
    event: Option<(&'m str, &'m str)>,
}

fn unknown(what: &str, name: &str) -> RuntimeError {
    RuntimeError::Eval(format!("unknown {what} `{name}`"))
}

impl Interpreter {
    /// Prepares configuration `config` of `model`, applying AutoML defaults.
    pub fn new(model: &ResolvedModel, config: &str) -> Result<Self, RuntimeError> {
        let (model, _) = apply_automl_defaults(model);
        let layout = Layout::build(&model, config)?;
        let transitions = model
            .things
            .values()
            .map(|t| match &t.behavior {
                Some(chart) => chart
                    .states
                    .values()
                    .enumerate()
                    .flat_map(|(s, st)| (0..st.transitions.len()).map(move |i| (s, i)))
                    .collect(),
                None => Vec::new(),
            })
            .collect();
        Ok(Interpreter {
            model,
            layout,
            transitions,
        })
    }

    pub fn model(&self) -> &ResolvedModel {
        &self.model
    }

    fn chart(&self, thing: usize) -> Option<&StateChart> {
        self.model.things[thing].behavior.as_ref()
    }

    fn transition(&self, thing: usize, id: usize) -> &AstTransition {
        let (s, i) = self.transitions[thing][id];
        &self.chart(thing).expect("transition ids exist only for charts").states[s].transitions[i]
    }

    fn id(&self, thing: usize, state: usize, pos: usize) -> usize {
        self.transitions[thing]
            .iter()
            .position(|&p| p == (state, pos))
            .expect("every transition has an id")
    }

    fn eval(&self, scope: &Scope, e: &Expr, cx: &mut Context) -> Result<Value, RuntimeError> {
        Ok(match &e.kind {
            ExprKind::Int(i) => Value::Int(*i),
            ExprKind::Float(f) => Value::Real(*f),
            ExprKind::Str(s) => Value::Text(s.clone()),
            ExprKind::Bool(b) => Value::Bool(*b),
            ExprKind::Name(n) => {
                let slot = scope
                    .thing
                    .properties
                    .get_index_of(n.as_str())
                    .ok_or_else(|| unknown("property", n.as_str()))?;
                cx.get(slot)?
            }
            ExprKind::Param { var, param } => {
                let index = scope
                    .event
                    .filter(|(v, _)| *v == var.as_str())
                    .and_then(|(_, m)| scope.thing.messages.get(m))
                    .and_then(|m| m.params.iter().position(|p| p.name == param.as_str()))
                    .ok_or_else(|| unknown("message parameter", &format!("{var}.{param}")))?;
                cx.param(index)?
            }
            ExprKind::Unary { op, operand } => {
                let v = self.eval(scope, operand, cx)?;
                unary(*op, v)?
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let a = self.eval(scope, lhs, cx)?;
                let b = self.eval(scope, rhs, cx)?;
                binary(*op, a, b)?
            }
        })
    }

    fn da(&self, scope: &Scope, name: &str) -> Result<usize, RuntimeError> {
        scope
            .thing
            .analytics
            .get_index_of(name)
            .ok_or_else(|| unknown("data analytics block", name))
    }

    fn exec(&self, scope: &Scope, actions: &[AstAction], cx: &mut Context) -> Result<(), RuntimeError> {
        for a in actions {
            match &a.kind {
                ActionKind::Print(e) => {
                    let v = self.eval(scope, e, cx)?;
                    cx.print(&v);
                }
                ActionKind::Assign { target, value } => {
                    let slot = scope
                        .thing
                        .properties
                        .get_index_of(target.as_str())
                        .ok_or_else(|| unknown("property", target.as_str()))?;
                    let v = self.eval(scope, value, cx)?;
                    cx.assign(slot, v)?;
                }
                ActionKind::Send { port, message, args } => {
                    let p = scope
                        .thing
                        .ports
                        .get_index_of(port.as_str())
                        .ok_or_else(|| unknown("port", port.as_str()))?;
                    let m = scope
                        .thing
                        .messages
                        .get_index_of(message.as_str())
                        .ok_or_else(|| unknown("message", message.as_str()))?;
                    let args = args.iter().map(|e| self.eval(scope, e, cx)).collect::<Result<_, _>>()?;
                    cx.send(p, m, args)?;
                }
                ActionKind::If { cond, then, otherwise } => {
                    let c = self.eval(scope, cond, cx)?;
                    if truth(c)? {
                        self.exec(scope, then, cx)?;
                    } else if let Some(other) = otherwise {
                        self.exec(scope, other, cx)?;
                    }
                }
                ActionKind::DaPreprocess(d) => cx.da_preprocess(self.da(scope, d.as_str())?)?,
                ActionKind::DaTrain(d) => cx.da_train(self.da(scope, d.as_str())?)?,
                ActionKind::DaPredict { da, args } => {
                    let d = self.da(scope, da.as_str())?;
                    let args = args.iter().map(|e| self.eval(scope, e, cx)).collect::<Result<_, _>>()?;
                    cx.da_predict(d, args)?;
                }
                ActionKind::DaSave(d) => cx.da_save(self.da(scope, d.as_str())?)?,
            }
        }
        Ok(())
    }
}

impl Engine for Interpreter {
    fn layout(&self) -> &Layout {
        &self.layout
    }

    fn init(&self, thing: usize, property: usize, cx: &mut Context) -> Result<Option<Value>, RuntimeError> {
        let t = &self.model.things[thing];
        let scope = Scope { thing: t, event: None };
        match &t.properties[property].init {
            Some(e) => self.eval(&scope, e, cx).map(Some),
            None => Ok(None),
        }
    }

    fn run(&self, thing: usize, block: Block, cx: &mut Context) -> Result<(), RuntimeError> {
        let t = &self.model.things[thing];
        let Some(chart) = &t.behavior else {
            return Ok(());
        };
        let mut scope = Scope { thing: t, event: None };
        let actions = match block {
            Block::ChartEntry => &chart.on_entry,
            Block::ChartExit => &chart.on_exit,
            Block::StateEntry(s) => &chart.states[s].on_entry,
            Block::StateExit(s) => &chart.states[s].on_exit,
            Block::Transition(id) => {
                let tr = self.transition(thing, id);
                if let Some(ev) = &tr.event {
                    if let Some(var) = &ev.var {
                        scope.event = Some((var.as_str(), ev.message.as_str()));
                    }
                }
                &tr.action
            }
        };
        self.exec(&scope, actions, cx)
    }

    fn lookup(&self, thing: usize, state: usize, port: usize, message: usize) -> Option<usize> {
        let t = &self.model.things[thing];
        let (port, message) = (t.ports.get_index(port)?.0, t.messages.get_index(message)?.0);
        let st = self.chart(thing)?.states.get_index(state)?.1;
        let pos = st.transitions.iter().position(|tr| {
            tr.event
                .as_ref()
                .is_some_and(|e| e.port.as_str() == port && e.message.as_str() == message)
        })?;
        Some(self.id(thing, state, pos))
    }

    fn eventless(&self, thing: usize, state: usize) -> Option<usize> {
        let st = self.chart(thing)?.states.get_index(state)?.1;
        let pos = st.transitions.iter().position(|tr| tr.event.is_none())?;
        Some(self.id(thing, state, pos))
    }

    fn target(&self, thing: usize, transition: usize) -> usize {
        let name = self.transition(thing, transition).target.as_str();
        self.chart(thing)
            .and_then(|c| c.states.get_index_of(name))
            .expect("validated transition targets exist")
    }
}
