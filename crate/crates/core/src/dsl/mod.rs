//! A small expression language for generating functions.
//!
//! ```
//! use khinchin::dsl::{parse, compile, CompileConfig};
//! let e = parse("prod(k,1,inf,1/(1-z^k))").unwrap();
//! let g = compile(&e, &CompileConfig::default()).unwrap().genfunction;
//! assert_eq!(g.coeff(10).round(), 42.0);
//! ```

pub mod ast;
mod compile;
pub mod diff;
pub mod eval;
pub mod jet;
mod parser;
pub mod series;

pub use ast::{Bounds, Builtin, Expr};
pub use compile::{compile, compile_str, infer_radius, recognize, AstEvaluator, CompileConfig, CompileReport};
pub use diff::differentiate;
pub use parser::parse;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message} at line {line}, column {column}")]
pub struct ParseError {
    pub message: String,
    pub line: usize,
    pub column: usize,
}
