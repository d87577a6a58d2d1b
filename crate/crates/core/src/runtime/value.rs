//! Scalar semantics shared by the interpreter and the plan VM.

use mlq_ml::Value;

use crate::syntax::ast::{BinOp, TypeName, UnaryOp};

use super::RuntimeError;

pub fn default_value(ty: TypeName) -> Value {
    match ty {
        TypeName::Int32 | TypeName::Long => Value::Int(0),
        TypeName::Float | TypeName::Double => Value::Real(0.0),
        TypeName::Boolean => Value::Bool(false),
        TypeName::String => Value::Text(String::new()),
    }
}

/// Coerces a value into the storage representation of `ty`. Int32 wraps and
/// Float rounds to single precision, as a compiled target would.
pub fn convert(ty: TypeName, v: Value) -> Result<Value, RuntimeError> {
    Ok(match (ty, v) {
        (TypeName::Int32, Value::Int(i)) => Value::Int(i as i32 as i64),
        (TypeName::Long, Value::Int(i)) => Value::Int(i),
        (TypeName::Float, Value::Int(i)) => Value::Real(i as f32 as f64),
        (TypeName::Float, Value::Real(r)) => Value::Real(r as f32 as f64),
        (TypeName::Double, Value::Int(i)) => Value::Real(i as f64),
        (TypeName::Double, Value::Real(r)) => Value::Real(r),
        (TypeName::Boolean, Value::Bool(b)) => Value::Bool(b),
        (TypeName::String, Value::Text(s)) => Value::Text(s),
        (ty, v) => {
            return Err(RuntimeError::Eval(format!(
                "cannot store {} in a {ty} slot",
                render(&v)
            )))
        }
    })
}

/// Text form used by `print` and string concatenation.
pub fn render(v: &Value) -> String {
    match v {
        Value::Real(r) => format!("{r:?}"),
        other => other.to_string(),
    }
}

/// Branch condition of an `if`.
pub fn truth(v: Value) -> Result<bool, RuntimeError> {
    match v {
        Value::Bool(b) => Ok(b),
        other => Err(RuntimeError::Eval(format!("condition evaluated to {}, not a Boolean", render(&other)))),
    }
}

fn type_error(op: &str, a: &Value, b: &Value) -> RuntimeError {
    RuntimeError::Eval(format!("operator `{op}` cannot combine {} and {}", render(a), render(b)))
}

pub fn unary(op: UnaryOp, v: Value) -> Result<Value, RuntimeError> {
    match (op, v) {
        (UnaryOp::Neg, Value::Int(i)) => i
            .checked_neg()
            .map(Value::Int)
            .ok_or_else(|| RuntimeError::Eval("integer overflow in negation".into())),
        (UnaryOp::Neg, Value::Real(r)) => Ok(Value::Real(-r)),
        (UnaryOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
        (op, v) => Err(RuntimeError::Eval(format!(
            "operator `{}` cannot apply to {}",
            if op == UnaryOp::Neg { "-" } else { "not" },
            render(&v)
        ))),
    }
}

fn arith(op: BinOp, a: i64, b: i64) -> Result<Value, RuntimeError> {
    let r = match op {
        BinOp::Add => a.checked_add(b),
        BinOp::Sub => a.checked_sub(b),
        BinOp::Mul => a.checked_mul(b),
        BinOp::Div => {
            if b == 0 {
                return Err(RuntimeError::Eval("integer division by zero".into()));
            }
            a.checked_div(b)
        }
        _ => unreachable!(),
    };
    r.map(Value::Int)
        .ok_or_else(|| RuntimeError::Eval(format!("integer overflow in `{}`", op.symbol())))
}

fn real(op: BinOp, a: f64, b: f64) -> Value {
    Value::Real(match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => a / b,
        _ => unreachable!(),
    })
}

fn compare(op: BinOp, ord: Option<std::cmp::Ordering>) -> Value {
    use std::cmp::Ordering::*;
    Value::Bool(match (op, ord) {
        (_, None) => op == BinOp::Ne,
        (BinOp::Eq, Some(o)) => o == Equal,
        (BinOp::Ne, Some(o)) => o != Equal,
        (BinOp::Lt, Some(o)) => o == Less,
        (BinOp::Le, Some(o)) => o != Greater,
        (BinOp::Gt, Some(o)) => o == Greater,
        (BinOp::Ge, Some(o)) => o != Less,
        _ => unreachable!(),
    })
}

pub fn binary(op: BinOp, a: Value, b: Value) -> Result<Value, RuntimeError> {
    match op {
        BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => match (&a, &b) {
            (Value::Text(x), _) if op == BinOp::Add => Ok(Value::Text(format!("{x}{}", render(&b)))),
            (_, Value::Text(y)) if op == BinOp::Add => Ok(Value::Text(format!("{}{y}", render(&a)))),
            (Value::Int(x), Value::Int(y)) => arith(op, *x, *y),
            _ => match (a.as_f64(), b.as_f64()) {
                (Some(x), Some(y)) => Ok(real(op, x, y)),
                _ => Err(type_error(op.symbol(), &a, &b)),
            },
        },
        BinOp::And | BinOp::Or => match (&a, &b) {
            (Value::Bool(x), Value::Bool(y)) => Ok(Value::Bool(if op == BinOp::And { *x && *y } else { *x || *y })),
            _ => Err(type_error(op.symbol(), &a, &b)),
        },
        _ => {
            let ord = match (&a, &b) {
                (Value::Int(x), Value::Int(y)) => Some(x.cmp(y)),
                (Value::Text(x), Value::Text(y)) => Some(x.cmp(y)),
                (Value::Bool(x), Value::Bool(y)) if matches!(op, BinOp::Eq | BinOp::Ne) => Some(x.cmp(y)),
                _ => match (a.as_f64(), b.as_f64()) {
                    (Some(x), Some(y)) => x.partial_cmp(&y),
                    _ => return Err(type_error(op.symbol(), &a, &b)),
                },
            };
            Ok(compare(op, ord))
        }
    }
}
