//! Reference functions with known behaviour, used by the verification suite
//! and the command-line tool.

use crate::error::Result;
use crate::family::KhinchinFamily;

/// An expression together with its known clan classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reference {
    pub expr: &'static str,
    pub clan: bool,
}

/// Functions whose clan status is known, clans first.
pub const CLAN_CORPUS: [Reference; 10] = [
    Reference { expr: "exp(z)", clan: true },
    Reference { expr: "partition()", clan: true },
    Reference { expr: "bell()", clan: true },
    Reference { expr: "1+z^3", clan: true },
    Reference { expr: "canon(geometric,1,2)", clan: true },
    Reference { expr: "canon(power,2)", clan: true },
    Reference { expr: "1/(1-z)", clan: false },
    Reference { expr: "1/(1-z)^3", clan: false },
    Reference { expr: "1+log(1/(1-z))", clan: false },
    Reference { expr: "hadamard_gap()", clan: false },
];

/// The default verification corpus.
pub const DEFAULT_CORPUS: [&str; 12] = [
    "1+z",
    "1+z^2",
    "1+z^3",
    "exp(z)",
    "partition()",
    "bell()",
    "1/(1-z)",
    "1/(1-z)^3",
    "canon(geometric,1,2)",
    "canon(power,2)",
    "hadamard_gap()",
    "gap_series(0.5)",
];

/// Compiles every entry of a corpus, in order.
pub fn load(exprs: &[&str]) -> Result<Vec<(String, KhinchinFamily)>> {
    exprs.iter().map(|e| Ok((e.to_string(), KhinchinFamily::from_expr(e)?))).collect()
}
