//! Static expression types. Integers widen to longs and to reals, floats to
//! doubles; nothing narrows implicitly.

use std::fmt;

use indexmap::IndexMap;

use crate::metamodel::{Message, Property};
use crate::syntax::ast::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Ty {
    Int32,
    Long,
    Float,
    Double,
    Boolean,
    String,
}

impl Ty {
    pub fn of(t: TypeName) -> Ty {
        match t {
            TypeName::Int32 => Ty::Int32,
            TypeName::Long => Ty::Long,
            TypeName::Float => Ty::Float,
            TypeName::Double => Ty::Double,
            TypeName::Boolean => Ty::Boolean,
            TypeName::String => Ty::String,
        }
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, Ty::Int32 | Ty::Long | Ty::Float | Ty::Double)
    }

    pub fn is_integer(self) -> bool {
        matches!(self, Ty::Int32 | Ty::Long)
    }

    /// Whether a value of type `self` may be stored where `target` is expected.
    pub fn assignable_to(self, target: Ty) -> bool {
        if self.is_numeric() && target.is_numeric() {
            return self <= target;
        }
        self == target
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Ty::Int32 => "Int32",
            Ty::Long => "Long",
            Ty::Float => "Float",
            Ty::Double => "Double",
            Ty::Boolean => "Boolean",
            Ty::String => "String",
        };
        f.write_str(s)
    }
}

pub struct TypeEnv<'a> {
    pub properties: &'a IndexMap<String, Property>,
    pub messages: &'a IndexMap<String, Message>,
    /// Event variable and the message it binds.
    pub event: Option<(&'a str, &'a str)>,
}

/// A type error with the span of the offending subexpression.
pub struct TypeError {
    pub span: crate::diag::Span,
    pub message: String,
}

fn fail<T>(e: &Expr, message: String) -> Result<T, TypeError> {
    Err(TypeError {
        span: e.span.clone(),
        message,
    })
}

impl TypeEnv<'_> {
    pub fn infer(&self, e: &Expr) -> Result<Ty, TypeError> {
        match &e.kind {
            ExprKind::Int(v) => Ok(if i32::try_from(*v).is_ok() { Ty::Int32 } else { Ty::Long }),
            ExprKind::Float(_) => Ok(Ty::Float),
            ExprKind::Str(_) => Ok(Ty::String),
            ExprKind::Bool(_) => Ok(Ty::Boolean),
            ExprKind::Name(n) => match self.properties.get(n.as_str()) {
                Some(p) => Ok(Ty::of(p.ty)),
                None => fail(e, format!("unknown property `{n}`")),
            },
            ExprKind::Param { var, param } => {
                let ty = self
                    .event
                    .filter(|(v, _)| *v == var.as_str())
                    .and_then(|(_, m)| self.messages.get(m))
                    .and_then(|m| m.params.iter().find(|p| p.name == param.as_str()))
                    .map(|p| Ty::of(p.ty));
                match ty {
                    Some(t) => Ok(t),
                    None => fail(e, format!("unknown message parameter `{var}.{param}`")),
                }
            }
            ExprKind::Unary { op, operand } => {
                let t = self.infer(operand)?;
                match op {
                    UnaryOp::Neg if t.is_numeric() => Ok(t),
                    UnaryOp::Neg => fail(e, format!("cannot negate a {t}")),
                    UnaryOp::Not if t == Ty::Boolean => Ok(t),
                    UnaryOp::Not => fail(e, format!("`not` expects Boolean, found {t}")),
                }
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let l = self.infer(lhs)?;
                let r = self.infer(rhs)?;
                let mismatch = || format!("operator `{}` cannot combine {l} and {r}", op.symbol());
                match op {
                    BinOp::Add if l == Ty::String || r == Ty::String => Ok(Ty::String),
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                        if l.is_numeric() && r.is_numeric() {
                            Ok(l.max(r))
                        } else {
                            fail(e, mismatch())
                        }
                    }
                    BinOp::Eq | BinOp::Ne => {
                        if (l.is_numeric() && r.is_numeric()) || l == r {
                            Ok(Ty::Boolean)
                        } else {
                            fail(e, mismatch())
                        }
                    }
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        if (l.is_numeric() && r.is_numeric()) || (l == Ty::String && r == Ty::String) {
                            Ok(Ty::Boolean)
                        } else {
                            fail(e, mismatch())
                        }
                    }
                    BinOp::And | BinOp::Or => {
                        if l == Ty::Boolean && r == Ty::Boolean {
                            Ok(Ty::Boolean)
                        } else {
                            fail(e, mismatch())
                        }
                    }
                }
            }
        }
    }
}
