//! Generating functions in class K: coefficient oracle, optional closed-form
//! evaluators and radius metadata.

use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use serde::Serialize;

use super::canonical::CanonicalProductSpec;
use crate::error::{Error, Result};

/// Radius of convergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Radius {
    Finite(f64),
    Infinite,
    /// Inference was inconclusive; analytics need an explicit bound.
    Unknown,
}

impl Radius {
    pub fn finite(r: f64) -> Radius {
        assert!(r > 0.0, "finite radius must be positive");
        Radius::Finite(r)
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Radius::Finite(_))
    }

    pub fn value(&self) -> f64 {
        match self {
            Radius::Finite(r) => *r,
            Radius::Infinite => f64::INFINITY,
            Radius::Unknown => f64::NAN,
        }
    }

    pub fn check(&self, t: f64) -> Result<()> {
        let ok = t >= 0.0
            && match self {
                Radius::Finite(r) => t < *r,
                Radius::Infinite => t.is_finite(),
                Radius::Unknown => false,
            };
        if ok {
            Ok(())
        } else if matches!(self, Radius::Unknown) {
            Err(Error::UnknownRadius)
        } else {
            Err(Error::OutOfRange { t, radius: self.to_string() })
        }
    }

    pub fn min(self, other: Radius) -> Radius {
        match (self, other) {
            (Radius::Unknown, _) | (_, Radius::Unknown) => Radius::Unknown,
            (Radius::Infinite, r) | (r, Radius::Infinite) => r,
            (Radius::Finite(a), Radius::Finite(b)) => Radius::Finite(a.min(b)),
        }
    }
}

impl fmt::Display for Radius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Radius::Finite(r) => write!(f, "{r}"),
            Radius::Infinite => write!(f, "inf"),
            Radius::Unknown => write!(f, "unknown"),
        }
    }
}

/// Class-K validation outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ClassKStatus {
    VerifiedUpTo(u64),
    Violated { index: u64, reason: String },
    Unknown,
}

/// The limit `M_f` of the mean as `t` approaches `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum MfClass {
    Finite(f64),
    Infinite,
    Unknown,
}

impl fmt::Display for MfClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MfClass::Finite(v) => write!(f, "{v}"),
            MfClass::Infinite => write!(f, "inf"),
            MfClass::Unknown => write!(f, "unknown"),
        }
    }
}

/// Coefficients `a_n` of a power series.
pub trait CoeffOracle: Send + Sync + fmt::Debug {
    /// `ln a_n`, or `-inf` when `a_n = 0`.
    fn ln_coeff(&self, n: u64) -> f64;

    /// Smallest index `>= n` with `a_n != 0`; `None` when no such index is known.
    fn next_support(&self, n: u64) -> Option<u64>;

    /// Degree when the series is a polynomial.
    fn degree(&self) -> Option<u64> {
        None
    }

    /// Coefficients beyond this index are not available (truncated series).
    fn known_up_to(&self) -> Option<u64> {
        None
    }

    /// Exact value when an arbitrary-precision channel exists.
    fn exact(&self, _n: u64) -> Option<BigRational> {
        None
    }

    /// Sign of `a_n` for oracles that may hold negative values.
    fn sign(&self, n: u64) -> i8 {
        if self.ln_coeff(n) == f64::NEG_INFINITY { 0 } else { 1 }
    }
}

/// Log-derivatives of `f(e^u)` at `u = ln t`.
///
/// `mean` is `d/du ln f`; `central[j]` is the j-th central moment of the
/// tilted law, so `central[2]` is the variance and the cumulants follow from
/// the usual moment relations.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub sign: i8,
    pub ln_mag: f64,
    pub mean: f64,
    pub central: Vec<f64>,
}

impl Jet {
    pub fn order(&self) -> usize {
        self.central.len().saturating_sub(1)
    }

    pub fn var(&self) -> f64 {
        self.central.get(2).copied().unwrap_or(f64::NAN)
    }

    /// Build from cumulants `kappa[1..]` (index 0 ignored).
    pub fn from_cumulants(sign: i8, ln_mag: f64, kappa: &[f64]) -> Jet {
        let order = kappa.len().saturating_sub(1);
        let mean = kappa.get(1).copied().unwrap_or(0.0);
        let mut central = vec![1.0, 0.0];
        if order >= 2 {
            central.push(kappa[2]);
        }
        if order >= 3 {
            central.push(kappa[3]);
        }
        if order >= 4 {
            central.push(kappa[4] + 3.0 * kappa[2] * kappa[2]);
        }
        if order >= 5 {
            central.push(kappa[5] + 10.0 * kappa[3] * kappa[2]);
        }
        if order >= 6 {
            central.push(
                kappa[6] + 15.0 * kappa[4] * kappa[2] + 10.0 * kappa[3] * kappa[3]
                    + 15.0 * kappa[2].powi(3),
            );
        }
        central.truncate(order.max(1) + 1);
        Jet { sign, ln_mag, mean, central }
    }

    /// Cumulants `kappa[0..=order]` (index 0 holds 0).
    pub fn cumulants(&self) -> Vec<f64> {
        let c = &self.central;
        let mut k = vec![0.0, self.mean];
        if c.len() > 2 {
            k.push(c[2]);
        }
        if c.len() > 3 {
            k.push(c[3]);
        }
        if c.len() > 4 {
            k.push(c[4] - 3.0 * c[2] * c[2]);
        }
        if c.len() > 5 {
            k.push(c[5] - 10.0 * c[3] * c[2]);
        }
        if c.len() > 6 {
            k.push(c[6] - 15.0 * c[4] * c[2] - 10.0 * c[3] * c[3] + 30.0 * c[2].powi(3));
        }
        k
    }

    pub fn truncate(mut self, order: usize) -> Jet {
        self.central.truncate(order.max(1) + 1);
        self
    }
}

/// Highest jet order supported by the moment/cumulant conversions.
pub const MAX_JET_ORDER: usize = 6;

/// Closed-form or structural evaluator for `f` at real `t`.
pub trait Evaluator: Send + Sync + fmt::Debug {
    /// Jet with at least `min(order, max_order())` central moments.
    fn jet(&self, t: f64, order: usize) -> Result<Jet>;

    fn max_order(&self) -> usize;

    /// `E(X_t^{(k)}) = t^k f^{(k)}(t) / f(t)` when a closed form exists.
    fn factorial_moment(&self, _k: u32, _t: f64) -> Option<f64> {
        None
    }

    /// `|f(t e^{i theta})| / f(t)` when a direct route exists.
    fn abs_ratio(&self, _t: f64, _theta: f64) -> Option<Result<f64>> {
        None
    }
}

/// A generating function with nonnegative coefficients.
#[derive(Debug, Clone)]
pub struct GenFunction {
    pub name: String,
    pub radius: Radius,
    pub oracle: Arc<dyn CoeffOracle>,
    pub eval: Option<Arc<dyn Evaluator>>,
    pub class_k: ClassKStatus,
    pub mf: MfClass,
    /// How `mf` was established.
    pub mf_basis: String,
    /// Known zeros `t e^{i theta}` as `(t, theta)`.
    pub known_zeros: Vec<(f64, f64)>,
    /// Exact rational coefficients for polynomials.
    pub exact_poly: Option<Arc<Vec<BigRational>>>,
    pub canonical: Option<Arc<CanonicalProductSpec>>,
    pub warnings: Vec<String>,
}

impl GenFunction {
    pub fn new(name: impl Into<String>, radius: Radius, oracle: Arc<dyn CoeffOracle>) -> Self {
        GenFunction {
            name: name.into(),
            radius,
            oracle,
            eval: None,
            class_k: ClassKStatus::Unknown,
            mf: MfClass::Unknown,
            mf_basis: String::from("unclassified"),
            known_zeros: Vec::new(),
            exact_poly: None,
            canonical: None,
            warnings: Vec::new(),
        }
    }

    pub fn with_eval(mut self, eval: Arc<dyn Evaluator>) -> Self {
        self.eval = Some(eval);
        self
    }

    pub fn with_mf(mut self, mf: MfClass, basis: &str) -> Self {
        self.mf = mf;
        self.mf_basis = basis.to_string();
        self
    }

    pub fn with_zeros(mut self, zeros: Vec<(f64, f64)>) -> Self {
        self.known_zeros = zeros;
        self
    }

    pub fn ln_coeff(&self, n: u64) -> f64 {
        self.oracle.ln_coeff(n)
    }

    pub fn coeff(&self, n: u64) -> f64 {
        self.oracle.ln_coeff(n).exp()
    }

    pub fn is_polynomial(&self) -> bool {
        self.oracle.degree().is_some()
    }

    /// Support indices `n <= n_max`.
    pub fn support_up_to(&self, n_max: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut n = 0;
        while let Some(k) = self.oracle.next_support(n) {
            if k > n_max {
                break;
            }
            out.push(k);
            n = k + 1;
        }
        out
    }

    /// Check `a_0 > 0`, nonnegativity and nonconstancy on indices `<= n_max`.
    pub fn validate_class_k(&self, n_max: u64) -> ClassKStatus {
        if self.oracle.sign(0) <= 0 {
            return ClassKStatus::Violated { index: 0, reason: "a_0 > 0 violated".into() };
        }
        let limit = self.oracle.known_up_to().map_or(n_max, |k| k.min(n_max));
        let mut nonzero = 0usize;
        let mut n = 0;
        while n <= limit {
            let s = self.oracle.sign(n);
            if s < 0 {
                return ClassKStatus::Violated { index: n, reason: format!("negative coefficient a_{n}") };
            }
            if s > 0 {
                nonzero += 1;
            }
            match self.oracle.next_support(n + 1) {
                Some(k) => n = k,
                None => break,
            }
        }
        if nonzero < 2 {
            return ClassKStatus::Violated { index: 0, reason: "constant function".into() };
        }
        ClassKStatus::VerifiedUpTo(limit)
    }

    /// Number of nonzero coefficients, capped at `cap`.
    pub fn nonzero_count(&self, cap: usize) -> usize {
        let mut count = 0;
        let mut n = 0;
        while let Some(k) = self.oracle.next_support(n) {
            count += 1;
            if count >= cap {
                break;
            }
            n = k + 1;
        }
        count
    }
}

/// Dense coefficient table, optionally truncated.
#[derive(Debug, Clone)]
pub struct DenseOracle {
    ln: Vec<f64>,
    signs: Vec<i8>,
    polynomial: bool,
    exact: Option<Vec<BigRational>>,
}

impl DenseOracle {
    /// `polynomial = true` means coefficients past the table are zero; otherwise
    /// they are unknown.
    pub fn new(values: &[super::signed_log::SignedLog], polynomial: bool) -> Self {
        let mut ln: Vec<f64> = values.iter().map(|v| v.ln_mag).collect();
        let mut signs: Vec<i8> = values.iter().map(|v| v.sign).collect();
        if polynomial {
            while signs.len() > 1 && *signs.last().unwrap() == 0 {
                signs.pop();
                ln.pop();
            }
        }
        DenseOracle { ln, signs, polynomial, exact: None }
    }

    pub fn with_exact(mut self, exact: Vec<BigRational>) -> Self {
        self.exact = Some(exact);
        self
    }
}

impl CoeffOracle for DenseOracle {
    fn ln_coeff(&self, n: u64) -> f64 {
        match self.signs.get(n as usize) {
            Some(&s) if s != 0 => self.ln[n as usize],
            _ => f64::NEG_INFINITY,
        }
    }

    fn sign(&self, n: u64) -> i8 {
        self.signs.get(n as usize).copied().unwrap_or(0)
    }

    fn next_support(&self, n: u64) -> Option<u64> {
        (n as usize..self.signs.len()).find(|&i| self.signs[i] != 0).map(|i| i as u64)
    }

    fn degree(&self) -> Option<u64> {
        if self.polynomial { Some(self.signs.len() as u64 - 1) } else { None }
    }

    fn known_up_to(&self) -> Option<u64> {
        if self.polynomial { None } else { Some(self.signs.len() as u64 - 1) }
    }

    fn exact(&self, n: u64) -> Option<BigRational> {
        self.exact.as_ref().map(|e| e.get(n as usize).cloned().unwrap_or_else(|| BigRational::from_integer(0.into())))
    }
}
