//! Front end, checker, simulator and plan compiler for `.mlq` models.

pub mod codegen;
pub mod diag;
pub mod metamodel;
pub mod runtime;
pub mod syntax;
pub mod validate;
