//! Table-driven engine that replays a loaded plan.

use mlq_ml::Value;

use crate::runtime::{Block, Context, Engine, Layout, RuntimeError};
use crate::runtime::value::{binary, truth, unary};

use super::plan::{ExecutionPlan, Instr, Program};

pub struct PlanEngine {
    plan: ExecutionPlan,
}

impl PlanEngine {
    pub fn new(plan: ExecutionPlan) -> Self {
        PlanEngine { plan }
    }

    pub fn plan(&self) -> &ExecutionPlan {
        &self.plan
    }
}

fn pop(stack: &mut Vec<Value>) -> Result<Value, RuntimeError> {
    stack
        .pop()
        .ok_or_else(|| RuntimeError::Eval("operand stack underflow".into()))
}

fn pop_n(stack: &mut Vec<Value>, n: usize) -> Result<Vec<Value>, RuntimeError> {
    if stack.len() < n {
        return Err(RuntimeError::Eval("operand stack underflow".into()));
    }
    Ok(stack.split_off(stack.len() - n))
}

/// Runs a program; returns what is left on top of the stack.
fn exec(program: &Program, cx: &mut Context) -> Result<Option<Value>, RuntimeError> {
    let mut stack: Vec<Value> = Vec::new();
    let mut pc = 0;
    while let Some(instr) = program.get(pc) {
        pc += 1;
        match instr {
            Instr::PushInt { value } => stack.push(Value::Int(*value)),
            Instr::PushReal { value } => stack.push(Value::Real(*value)),
            Instr::PushBool { value } => stack.push(Value::Bool(*value)),
            Instr::PushStr { value } => stack.push(Value::Text(value.clone())),
            Instr::Load { slot } => stack.push(cx.get(*slot)?),
            Instr::Param { index } => stack.push(cx.param(*index)?),
            Instr::Unary { unary: op } => {
                let v = pop(&mut stack)?;
                stack.push(unary(*op, v)?);
            }
            Instr::Binary { binary: op } => {
                let b = pop(&mut stack)?;
                let a = pop(&mut stack)?;
                stack.push(binary(*op, a, b)?);
            }
            Instr::Store { slot } => {
                let v = pop(&mut stack)?;
                cx.assign(*slot, v)?;
            }
            Instr::Print => {
                let v = pop(&mut stack)?;
                cx.print(&v);
            }
            Instr::Send { port, message, argc } => {
                let args = pop_n(&mut stack, *argc)?;
                cx.send(*port, *message, args)?;
            }
            Instr::Branch { then, otherwise } => {
                pc = if truth(pop(&mut stack)?)? { *then } else { *otherwise };
            }
            Instr::Jump { target } => pc = *target,
            Instr::DaPreprocess { da } => cx.da_preprocess(*da)?,
            Instr::DaTrain { da } => cx.da_train(*da)?,
            Instr::DaPredict { da, argc } => {
                let args = pop_n(&mut stack, *argc)?;
                cx.da_predict(*da, args)?;
            }
            Instr::DaSave { da } => cx.da_save(*da)?,
        }
    }
    Ok(stack.pop())
}

impl Engine for PlanEngine {
    fn layout(&self) -> &Layout {
        &self.plan.layout
    }

    fn init(&self, thing: usize, property: usize, cx: &mut Context) -> Result<Option<Value>, RuntimeError> {
        match &self.plan.code[thing].inits[property] {
            Some(p) => exec(p, cx),
            None => Ok(None),
        }
    }

    fn run(&self, thing: usize, block: Block, cx: &mut Context) -> Result<(), RuntimeError> {
        let c = &self.plan.code[thing];
        if c.chart.is_none() {
            return Ok(());
        }
        let program = match block {
            Block::ChartEntry => &c.on_entry,
            Block::ChartExit => &c.on_exit,
            Block::StateEntry(s) => &c.state_entry[s],
            Block::StateExit(s) => &c.state_exit[s],
            Block::Transition(t) => &c.transitions[t].program,
        };
        exec(program, cx).map(|_| ())
    }

    fn lookup(&self, thing: usize, state: usize, port: usize, message: usize) -> Option<usize> {
        let c = &self.plan.code[thing];
        let column = c.events.iter().position(|e| e.port == port && e.message == message)?;
        c.table.get(state)?[column]
    }

    fn eventless(&self, thing: usize, state: usize) -> Option<usize> {
        *self.plan.code[thing].eventless.get(state)?
    }

    fn target(&self, thing: usize, transition: usize) -> usize {
        self.plan.code[thing].transitions[transition].target
    }
}
