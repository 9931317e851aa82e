//! Generating functions in class K.
//!
//! Truncated series arithmetic in signed log space, exact coefficient
//! oracles, canonical products and adaptive evaluation of `f`, `f'`, `f''`.

pub mod builtins;
pub mod canonical;
pub mod exact;
pub mod genfn;
pub mod series;
pub mod signed_log;
pub mod special;
pub mod sums;

pub use canonical::{CanonicalProductSpec, CanonicalValues, ZeroRule};
pub use exact::{exact_coeff, ExactFamily, StirlingTable};
pub use genfn::{ClassKStatus, CoeffOracle, Evaluator, GenFunction, Jet, MfClass, Radius, MAX_JET_ORDER};
pub use series::{CombineOp, TranscendOp, TruncatedSeries};
pub use signed_log::{LogSum, SignedLog};
pub use sums::{eval_log_f, weighted_power_sum, SumConfig};
