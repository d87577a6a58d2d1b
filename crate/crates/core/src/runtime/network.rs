//! Scheduler, routing and data-analytics dispatch. Engines supply only the
//! transition function and the code of action blocks.

use std::collections::VecDeque;
use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use chrono::NaiveDateTime;
use mlq_ml::{DataAnalyticsSpec, FittedScaler, LoadOptions, PreparedData, TrainOptions, TrainedModel, Value};
use serde_json::{json, Value as Json};

use crate::metamodel::{CLOCK_MESSAGE, CLOCK_PORT, CLOCK_THING};

use super::layout::Layout;
use super::trace::{EventKind, Trace, TraceEvent};
use super::value::{convert, default_value, render};
use super::RuntimeError;

/// Maximum eventless firings while an instance settles.
pub const EVENTLESS_LIMIT: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeSource {
    Wall,
    Fixed(NaiveDateTime),
}

impl TimeSource {
    /// Fixed clock at a Unix timestamp, read as UTC.
    pub fn from_epoch(secs: i64) -> Option<TimeSource> {
        chrono::DateTime::from_timestamp(secs, 0).map(|t| TimeSource::Fixed(t.naive_utc()))
    }

    pub fn now(&self) -> NaiveDateTime {
        match self {
            TimeSource::Wall => chrono::Local::now().naive_local(),
            TimeSource::Fixed(t) => *t,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    pub max_steps: u64,
    /// Base for relative dataset, model and log paths.
    pub dataset_root: Option<PathBuf>,
    pub test_size: f64,
    pub time: TimeSource,
    /// Where trained models are written; defaults to the directory of the
    /// component's training_results file.
    pub model_dir: Option<PathBuf>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: mlq_ml::spec::DEFAULT_SEED,
            max_steps: 100_000,
            dataset_root: None,
            test_size: 0.2,
            time: TimeSource::Fixed(mlq_ml::synth::start_time()),
            model_dir: None,
        }
    }
}

/// Action blocks an engine can execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    ChartEntry,
    ChartExit,
    StateEntry(usize),
    StateExit(usize),
    Transition(usize),
}

pub trait Engine {
    fn layout(&self) -> &Layout;
    /// Initial value of a property, if it has an initializer.
    fn init(&self, thing: usize, property: usize, cx: &mut Context) -> Result<Option<Value>, RuntimeError>;
    fn run(&self, thing: usize, block: Block, cx: &mut Context) -> Result<(), RuntimeError>;
    fn lookup(&self, thing: usize, state: usize, port: usize, message: usize) -> Option<usize>;
    fn eventless(&self, thing: usize, state: usize) -> Option<usize>;
    fn target(&self, thing: usize, transition: usize) -> usize;
}

#[derive(Default)]
struct DaHandle {
    data: Option<(PreparedData, FittedScaler)>,
    model: Option<TrainedModel>,
    last_prediction: Option<Value>,
}

struct InstanceState {
    state: usize,
    halted: bool,
    props: Vec<Value>,
    da: Vec<DaHandle>,
}

struct Pending {
    from: usize,
    to: usize,
    port: usize,
    message: usize,
    args: Vec<Value>,
}

struct Clock {
    inst: usize,
    port: usize,
    message: usize,
    period: u64,
    ticks_left: u64,
    last: u64,
}

pub struct Core {
    instances: Vec<InstanceState>,
    queue: VecDeque<Pending>,
    clocks: Vec<Clock>,
    trace: Vec<TraceEvent>,
    step: u64,
    opts: RunOptions,
    stopped: Option<String>,
}

/// What an executing action block can reach.
pub struct Context<'a> {
    layout: &'a Layout,
    core: &'a mut Core,
    inst: usize,
    args: &'a [Value],
}

fn values(v: &[Value]) -> Json {
    serde_json::to_value(v).expect("values serialize")
}

fn value(v: &Value) -> Json {
    serde_json::to_value(v).expect("values serialize")
}

impl Core {
    fn emit(&mut self, layout: &Layout, kind: EventKind, inst: Option<usize>, payload: Json) {
        self.trace.push(TraceEvent {
            seq: self.trace.len() as u64,
            step: self.step,
            kind,
            instance: inst.map(|i| layout.instances[i].name.clone()).unwrap_or_default(),
            payload,
        });
    }

    fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        match &self.opts.dataset_root {
            Some(root) if p.is_relative() => root.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn send(
        &mut self,
        layout: &Layout,
        inst: usize,
        port: usize,
        message: usize,
        args: Vec<Value>,
    ) -> Result<(), RuntimeError> {
        let thing = layout.thing_of(inst);
        let msg = &thing.messages[message];
        if args.len() != msg.params.len() {
            return Err(RuntimeError::Eval(format!(
                "message `{}` takes {} arguments, got {}",
                msg.name,
                msg.params.len(),
                args.len()
            )));
        }
        let args = msg
            .params
            .iter()
            .zip(args)
            .map(|((_, ty), v)| convert(*ty, v))
            .collect::<Result<Vec<_>, _>>()?;
        let port_name = &thing.ports[port].name;
        let mut routed = false;
        for c in &layout.connectors {
            let dest = if c.from == (inst, port) {
                c.to
            } else if c.to == (inst, port) {
                c.from
            } else {
                continue;
            };
            routed = true;
            let dthing = layout.thing_of(dest.0);
            let to = format!("{}.{}", layout.instances[dest.0].name, dthing.ports[dest.1].name);
            self.emit(
                layout,
                EventKind::Send,
                Some(inst),
                json!({"port": port_name, "message": msg.name, "args": values(&args), "to": to}),
            );
            match dthing.message(&msg.name) {
                Some(m) => self.queue.push_back(Pending {
                    from: inst,
                    to: dest.0,
                    port: dest.1,
                    message: m,
                    args: args.clone(),
                }),
                None => self.emit(
                    layout,
                    EventKind::Drop,
                    Some(dest.0),
                    json!({"port": dthing.ports[dest.1].name, "message": msg.name, "args": values(&args), "from": layout.instances[inst].name, "reason": "unknown-message"}),
                ),
            }
        }
        if !routed {
            self.emit(
                layout,
                EventKind::Send,
                Some(inst),
                json!({"port": port_name, "message": msg.name, "args": values(&args), "to": null}),
            );
            self.emit(
                layout,
                EventKind::Drop,
                Some(inst),
                json!({"port": port_name, "message": msg.name, "args": values(&args), "from": layout.instances[inst].name, "reason": "unconnected"}),
            );
        }
        Ok(())
    }
}

impl<'a> Context<'a> {
    pub fn get(&self, slot: usize) -> Result<Value, RuntimeError> {
        self.core.instances[self.inst]
            .props
            .get(slot)
            .cloned()
            .ok_or_else(|| RuntimeError::Eval(format!("property slot {slot} out of range")))
    }

    pub fn param(&self, index: usize) -> Result<Value, RuntimeError> {
        self.args
            .get(index)
            .cloned()
            .ok_or_else(|| RuntimeError::Eval(format!("message parameter {index} is not bound")))
    }

    fn emit(&mut self, kind: EventKind, payload: Json) {
        self.core.emit(self.layout, kind, Some(self.inst), payload);
    }

    pub fn assign(&mut self, slot: usize, v: Value) -> Result<(), RuntimeError> {
        let prop = self
            .layout
            .thing_of(self.inst)
            .properties
            .get(slot)
            .ok_or_else(|| RuntimeError::Eval(format!("property slot {slot} out of range")))?;
        let v = convert(prop.ty, v)?;
        self.emit(EventKind::Assign, json!({"property": prop.name, "value": value(&v)}));
        self.core.instances[self.inst].props[slot] = v;
        Ok(())
    }

    pub fn print(&mut self, v: &Value) {
        self.emit(EventKind::Print, json!({"text": render(v)}));
    }

    pub fn send(&mut self, port: usize, message: usize, args: Vec<Value>) -> Result<(), RuntimeError> {
        self.core.send(self.layout, self.inst, port, message, args)
    }

    fn spec(&self, da: usize) -> Result<&'a DataAnalyticsSpec, RuntimeError> {
        let layout: &'a Layout = self.layout;
        layout
            .thing_of(self.inst)
            .analytics
            .get(da)
            .ok_or_else(|| RuntimeError::Eval(format!("data analytics slot {da} out of range")))
    }

    pub fn da_preprocess(&mut self, da: usize) -> Result<(), RuntimeError> {
        let spec = self.spec(da)?;
        if spec.blackbox_ml {
            return Err(RuntimeError::Eval(format!("`{}` uses a pre-trained model and has no dataset to preprocess", spec.name)));
        }
        let dataset = spec
            .dataset
            .as_deref()
            .ok_or_else(|| mlq_ml::DataError::NoDataset(spec.name.clone()))?;
        let opts = LoadOptions {
            path: self.core.resolve(dataset),
            seed: self.core.opts.seed,
            test_size: self.core.opts.test_size,
        };
        let data = mlq_ml::load_dataset(spec, &opts)?;
        let (data, scaler) = mlq_ml::preprocess(spec, data);
        self.emit(
            EventKind::DaPreprocess,
            json!({"da": spec.name, "rows": data.x.len(), "train_rows": data.split, "missing_rows": data.missing_rows}),
        );
        self.core.instances[self.inst].da[da].data = Some((data, scaler));
        Ok(())
    }

    pub fn da_train(&mut self, da: usize) -> Result<(), RuntimeError> {
        let spec = self.spec(da)?;
        if spec.blackbox_ml {
            return Err(RuntimeError::Eval(format!("`{}` uses a pre-trained model and cannot be trained", spec.name)));
        }
        if self.core.instances[self.inst].da[da].data.is_none() {
            self.da_preprocess(da)?;
        }
        let now = self.core.opts.time.now();
        let opts = TrainOptions {
            seed: self.core.opts.seed,
            trained_at: now,
        };
        let (data, scaler) = self.core.instances[self.inst].da[da].data.as_ref().expect("preprocessed");
        let (model, report) = mlq_ml::train(spec, data, Some(scaler), &opts)?;

        let log = spec.training_results.as_deref().map(|p| self.core.resolve(p));
        if let Some(path) = &log {
            append_line(path, &report.log_line(&now))?;
        }
        let dir = self
            .core
            .opts
            .model_dir
            .clone()
            .or_else(|| log.as_ref().and_then(|p| p.parent().map(Path::to_path_buf)));
        if let Some(dir) = dir {
            let file = dir.join(format!("{}.{}.mlqm", self.layout.instances[self.inst].name, spec.name));
            mlq_ml::write_model(&model, &file)?;
        }
        self.emit(
            EventKind::DaTrain,
            json!({
                "da": spec.name,
                "family": model.family.as_str(),
                "train_rows": report.train_rows,
                "test_rows": report.test_rows,
                "metrics": report.metrics.as_ref().map(|m| m.to_string()),
            }),
        );
        self.core.instances[self.inst].da[da].model = Some(model);
        Ok(())
    }

    pub fn da_predict(&mut self, da: usize, args: Vec<Value>) -> Result<(), RuntimeError> {
        let spec = self.spec(da)?;
        let thing = self.layout.thing_of(self.inst);
        let inputs = spec.inputs();
        if args.len() != inputs.len() {
            return Err(RuntimeError::Eval(format!(
                "`{}` predicts from {} inputs, got {}",
                spec.name,
                inputs.len(),
                args.len()
            )));
        }
        let args = inputs
            .iter()
            .zip(args)
            .map(|(f, v)| match thing.property(&f.name) {
                Some(slot) => convert(thing.properties[slot].ty, v),
                None => Ok(v),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let model = self.core.instances[self.inst].da[da]
            .model
            .as_ref()
            .ok_or_else(|| RuntimeError::Eval(format!("`{}` is used before it was trained", spec.name)))?;
        let prediction = mlq_ml::predict(model, &args)?;
        self.emit(
            EventKind::DaPredict,
            json!({"da": spec.name, "inputs": values(&args), "prediction": value(&prediction)}),
        );
        self.core.instances[self.inst].da[da].last_prediction = Some(prediction.clone());
        if let Some(slot) = spec.prediction_results.as_ref().and_then(|p| thing.property(&p.name)) {
            let v = match (thing.properties[slot].ty, prediction) {
                (crate::syntax::ast::TypeName::Int32 | crate::syntax::ast::TypeName::Long, Value::Real(r)) => {
                    Value::Int(r.round() as i64)
                }
                (_, p) => p,
            };
            self.assign(slot, v)?;
        }
        Ok(())
    }

    pub fn da_save(&mut self, da: usize) -> Result<(), RuntimeError> {
        let spec = self.spec(da)?;
        let thing = self.layout.thing_of(self.inst);
        let inputs = spec
            .inputs()
            .iter()
            .map(|f| {
                thing
                    .property(&f.name)
                    .map(|slot| self.core.instances[self.inst].props[slot].clone())
                    .ok_or_else(|| RuntimeError::Eval(format!("feature `{}` has no property to save from", f.name)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let prediction = self.core.instances[self.inst].da[da].last_prediction.clone();
        if spec.labels && prediction.is_none() {
            return Err(RuntimeError::Eval(format!("`{}` has no prediction to save", spec.name)));
        }
        let dataset = spec
            .dataset
            .as_deref()
            .ok_or_else(|| mlq_ml::DataError::NoDataset(spec.name.clone()))?;
        let path = self.core.resolve(dataset);
        mlq_ml::save_prediction(spec, &path, &inputs, prediction.as_ref(), self.core.opts.time.now())?;
        self.emit(
            EventKind::DaSave,
            json!({"da": spec.name, "inputs": values(&inputs), "prediction": prediction.as_ref().map(value)}),
        );
        Ok(())
    }
}

fn append_line(path: &Path, line: &str) -> Result<(), RuntimeError> {
    let io = |source| RuntimeError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let mut f = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
    writeln!(f, "{line}").map_err(io)
}

/// A running configuration.
pub struct Network<E: Engine> {
    engine: E,
    core: Core,
}

fn exec<E: Engine>(e: &E, core: &mut Core, inst: usize, block: Block, args: &[Value]) -> Result<(), RuntimeError> {
    let layout = e.layout();
    let mut cx = Context {
        layout,
        core,
        inst,
        args,
    };
    e.run(layout.instances[inst].thing, block, &mut cx)
}

fn start<E: Engine>(e: &E, core: &mut Core, inst: usize) -> Result<(), RuntimeError> {
    let layout = e.layout();
    let t = layout.instances[inst].thing;
    for (p, prop) in layout.things[t].properties.iter().enumerate() {
        let mut cx = Context {
            layout,
            core,
            inst,
            args: &[],
        };
        if let Some(v) = e.init(t, p, &mut cx)? {
            core.instances[inst].props[p] = convert(prop.ty, v)?;
        }
    }
    exec(e, core, inst, Block::ChartEntry, &[])?;
    enter(e, core, inst, layout.things[t].initial)?;
    settle(e, core, inst)
}

fn enter<E: Engine>(e: &E, core: &mut Core, inst: usize, state: usize) -> Result<(), RuntimeError> {
    let layout = e.layout();
    let thing = layout.thing_of(inst);
    core.instances[inst].state = state;
    core.emit(layout, EventKind::EnterState, Some(inst), json!({"state": thing.states[state].name}));
    exec(e, core, inst, Block::StateEntry(state), &[])?;
    if thing.states[state].is_final {
        halt_in_final(e, core, inst)?;
    }
    Ok(())
}

/// Entering a final state runs the chart's exit actions and halts the
/// instance for good.
fn halt_in_final<E: Engine>(e: &E, core: &mut Core, inst: usize) -> Result<(), RuntimeError> {
    exec(e, core, inst, Block::ChartExit, &[])?;
    let layout = e.layout();
    let state = &layout.thing_of(inst).states[core.instances[inst].state].name;
    core.emit(layout, EventKind::Terminate, Some(inst), json!({"reason": "final", "state": state}));
    core.instances[inst].halted = true;
    Ok(())
}

fn fire<E: Engine>(e: &E, core: &mut Core, inst: usize, transition: usize, args: &[Value]) -> Result<(), RuntimeError> {
    let layout = e.layout();
    let t = layout.instances[inst].thing;
    let source = core.instances[inst].state;
    exec(e, core, inst, Block::StateExit(source), &[])?;
    core.emit(
        layout,
        EventKind::ExitState,
        Some(inst),
        json!({"state": layout.things[t].states[source].name}),
    );
    exec(e, core, inst, Block::Transition(transition), args)?;
    enter(e, core, inst, e.target(t, transition))
}

fn settle<E: Engine>(e: &E, core: &mut Core, inst: usize) -> Result<(), RuntimeError> {
    let t = e.layout().instances[inst].thing;
    let mut fired = 0;
    while !core.instances[inst].halted {
        let Some(tr) = e.eventless(t, core.instances[inst].state) else {
            break;
        };
        fired += 1;
        if fired > EVENTLESS_LIMIT {
            return Err(RuntimeError::Livelock(EVENTLESS_LIMIT));
        }
        fire(e, core, inst, tr, &[])?;
    }
    Ok(())
}

fn guard(layout: &Layout, core: &mut Core, inst: usize, r: Result<(), RuntimeError>) {
    if let Err(e) = r {
        core.emit(layout, EventKind::Error, Some(inst), json!({"message": e.to_string()}));
        core.instances[inst].halted = true;
    }
}

impl<E: Engine> Network<E> {
    /// Creates every instance and runs step 0: property initializers, chart
    /// and initial-state entry actions, then eventless transitions.
    pub fn new(engine: E, opts: RunOptions) -> Result<Self, RuntimeError> {
        if let Some(root) = &opts.dataset_root {
            if !root.is_dir() {
                return Err(RuntimeError::MissingRoot(root.clone()));
            }
        }
        let layout = engine.layout();
        let mut core = Core {
            instances: Vec::new(),
            queue: VecDeque::new(),
            clocks: Vec::new(),
            trace: Vec::new(),
            step: 0,
            opts,
            stopped: None,
        };
        for (i, inst) in layout.instances.iter().enumerate() {
            let thing = &layout.things[inst.thing];
            let mut da = Vec::new();
            for spec in &thing.analytics {
                let mut h = DaHandle::default();
                if spec.blackbox_ml {
                    let dir = core.resolve(spec.blackbox_ml_model.as_deref().unwrap_or(""));
                    let model = mlq_ml::load_blackbox(spec, &dir)
                        .map_err(|e| RuntimeError::Setup(format!("instance `{}`: {e}", inst.name)))?;
                    h.model = Some(model);
                }
                da.push(h);
            }
            if thing.builtin && thing.name == CLOCK_THING {
                let num = |key: &str, default: u64| -> Result<u64, RuntimeError> {
                    match inst.annotation(key) {
                        None => Ok(default),
                        Some(v) => v.trim().parse().map_err(|_| {
                            RuntimeError::Setup(format!("instance `{}`: @{key} must be a non-negative integer", inst.name))
                        }),
                    }
                };
                core.clocks.push(Clock {
                    inst: i,
                    port: thing.port(CLOCK_PORT).unwrap_or(0),
                    message: thing.message(CLOCK_MESSAGE).unwrap_or(0),
                    period: num("period", 1)?.max(1),
                    ticks_left: num("ticks", 10)?,
                    last: 0,
                });
            }
            core.instances.push(InstanceState {
                state: thing.initial,
                halted: thing.states.is_empty(),
                props: thing.properties.iter().map(|p| default_value(p.ty)).collect(),
                da,
            });
        }
        for i in 0..layout.instances.len() {
            if !core.instances[i].halted {
                let r = start(&engine, &mut core, i);
                guard(layout, &mut core, i, r);
            }
        }
        Ok(Network { engine, core })
    }

    fn fire_clocks(&mut self) {
        let layout = self.engine.layout();
        let core = &mut self.core;
        for c in 0..core.clocks.len() {
            let clock = &core.clocks[c];
            let due = core.queue.is_empty() || core.step - clock.last >= clock.period;
            if clock.ticks_left == 0 || !due {
                continue;
            }
            let (inst, port, message) = (clock.inst, clock.port, clock.message);
            let clock = &mut core.clocks[c];
            clock.ticks_left -= 1;
            clock.last = core.step;
            if let Err(e) = core.send(layout, inst, port, message, Vec::new()) {
                core.emit(layout, EventKind::Error, Some(inst), json!({"message": e.to_string()}));
            }
        }
    }

    fn deliver(&mut self) {
        let Some(p) = self.core.queue.pop_front() else {
            return;
        };
        let e = &self.engine;
        let core = &mut self.core;
        let layout = e.layout();
        let thing = layout.thing_of(p.to);
        let mut payload = json!({
            "port": thing.ports[p.port].name,
            "message": thing.messages[p.message].name,
            "args": values(&p.args),
            "from": layout.instances[p.from].name,
        });
        let st = &core.instances[p.to];
        let found = if st.halted {
            Err("halted")
        } else {
            e.lookup(layout.instances[p.to].thing, st.state, p.port, p.message)
                .ok_or("no-transition")
        };
        match found {
            Err(reason) => {
                payload["reason"] = json!(reason);
                core.emit(layout, EventKind::Drop, Some(p.to), payload);
            }
            Ok(t) => {
                core.emit(layout, EventKind::Deliver, Some(p.to), payload);
                let r = fire(e, core, p.to, t, &p.args).and_then(|_| settle(e, core, p.to));
                guard(layout, core, p.to, r);
            }
        }
    }

    fn stop_reason(&self) -> Option<&'static str> {
        let layout = self.engine.layout();
        let mut bearing = layout
            .instances
            .iter()
            .enumerate()
            .filter(|(_, i)| layout.things[i.thing].has_finals())
            .peekable();
        if bearing.peek().is_some() && bearing.all(|(i, _)| self.core.instances[i].halted) {
            return Some("final");
        }
        if self.core.step >= self.core.opts.max_steps {
            return Some("max-steps");
        }
        None
    }

    /// One scheduler round: fire due clocks, then deliver the oldest queued
    /// message. Returns false once the run has stopped.
    pub fn step(&mut self) -> bool {
        if self.core.stopped.is_some() {
            return false;
        }
        let reason = self.stop_reason().or_else(|| {
            self.fire_clocks();
            self.core.queue.is_empty().then_some("quiescence")
        });
        if let Some(reason) = reason {
            let layout = self.engine.layout();
            let queued = self.core.queue.len();
            self.core
                .emit(layout, EventKind::Terminate, None, json!({"reason": reason, "queued": queued}));
            self.core.stopped = Some(reason.to_string());
            return false;
        }
        self.core.step += 1;
        self.deliver();
        true
    }

    /// Runs to a stop condition and returns its name.
    pub fn run(&mut self) -> &str {
        while self.step() {}
        self.core.stopped.as_deref().unwrap_or_default()
    }

    pub fn engine(&self) -> &E {
        &self.engine
    }

    pub fn trace(&self) -> Trace {
        Trace {
            events: self.core.trace.clone(),
        }
    }

    pub fn into_trace(self) -> Trace {
        Trace {
            events: self.core.trace,
        }
    }

    pub fn steps(&self) -> u64 {
        self.core.step
    }

    pub fn queued(&self) -> usize {
        self.core.queue.len()
    }

    fn index(&self, instance: &str) -> Option<usize> {
        self.engine.layout().instances.iter().position(|i| i.name == instance)
    }

    pub fn state_of(&self, instance: &str) -> Option<&str> {
        let i = self.index(instance)?;
        let layout = self.engine.layout();
        layout
            .thing_of(i)
            .states
            .get(self.core.instances[i].state)
            .map(|s| s.name.as_str())
    }

    pub fn property(&self, instance: &str, name: &str) -> Option<&Value> {
        let i = self.index(instance)?;
        let slot = self.engine.layout().thing_of(i).property(name)?;
        self.core.instances[i].props.get(slot)
    }

    pub fn is_halted(&self, instance: &str) -> Option<bool> {
        self.index(instance).map(|i| self.core.instances[i].halted)
    }
}
