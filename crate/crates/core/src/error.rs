use thiserror::Error;

/// Errors raised by evaluation, compilation and verification routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("truncation orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("constant term must be positive for {0}")]
    NonPositiveConstant(&'static str),
    #[error("division by a series with zero constant term")]
    DivisionByZeroConstant,
    #[error("t = {t} is outside [0, R) with R = {radius}")]
    OutOfRange { t: f64, radius: String },
    #[error("tail bound unattainable: achieved relative bound {achieved:e} after {terms} terms")]
    TailUnattainable { achieved: f64, terms: usize },
    #[error("not in class K: {0}")]
    NotInClassK(String),
    #[error("target mean {target} is not below M_f = {mf}")]
    TargetAboveMf { target: f64, mf: String },
    #[error("bracketing failed: mean only reached {reached} at t = {t}")]
    Bracketing { reached: f64, t: f64 },
    #[error("evaluation failed: {0}")]
    Evaluation(String),
    #[error("routes disagree: {0}")]
    RouteMismatch(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("radius of convergence unknown; supply an explicit bound")]
    UnknownRadius,
    #[error("{0}")]
    Parse(#[from] crate::dsl::ParseError),
    #[error("empty batch")]
    EmptyBatch,
}

pub type Result<T> = std::result::Result<T, Error>;
