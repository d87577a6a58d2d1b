//! Concrete syntax: tokens, tree, parser and canonical printer.

pub mod ast;
pub mod emit;
pub mod lexer;
pub mod parser;

pub use ast::AstUnit;
pub use emit::{emit_canonical, emit_expr};
pub use lexer::{reconstruct, tokenize, Token, TokenKind};
pub use parser::{parse_model, parse_with_diagnostics};
