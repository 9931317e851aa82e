//! The Khinchin family `(X_t)` of a generating function: `P(X_t = n) = a_n t^n / f(t)`.

pub mod exact;

use std::sync::{Arc, OnceLock};

use num_rational::BigRational;
use serde::Serialize;

use crate::dsl::jet;
use crate::error::{Error, Result};
use crate::gf::signed_log::SignedLog;
use crate::gf::sums::{self, SumConfig};
use crate::gf::{ClassKStatus, CoeffOracle, Evaluator, GenFunction, Jet, MfClass, Radius, StirlingTable};

/// Per-parameter summary of `X_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyStats {
    pub t: f64,
    /// `ln f(t)`
    pub log_f: f64,
    pub mean: f64,
    pub var: f64,
    /// `sigma / m`
    pub ratio: f64,
    /// `f f'' / f'^2`
    pub l_f: f64,
    /// `E X^2 / (E X)^2`
    pub second_moment_quotient: f64,
    /// Relative tail bound of the partial sums (0 for closed forms).
    pub tail_bound_achieved: f64,
}

#[derive(Debug, Clone)]
pub struct KhinchinFamily {
    pub f: GenFunction,
    pub sum: SumConfig,
    pub warnings: Vec<String>,
}

fn stirling() -> &'static StirlingTable {
    static TABLE: OnceLock<StirlingTable> = OnceLock::new();
    TABLE.get_or_init(|| StirlingTable::new(64))
}

/// Coefficients of the falling factorial `x(x-1)...(x-k+1)` in powers of `x`.
fn falling_poly(k: usize) -> Vec<f64> {
    let mut p = vec![1.0];
    for i in 0..k {
        let mut next = vec![0.0; p.len() + 1];
        for (j, c) in p.iter().enumerate() {
            next[j + 1] += c;
            next[j] -= c * i as f64;
        }
        p = next;
    }
    p
}

fn raw_moment_from_jet(j: &Jet, k: usize) -> f64 {
    let binom = |n: usize, r: usize| (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
    (0..=k).map(|i| binom(k, i) * j.central[i] * j.mean.powi((k - i) as i32)).sum()
}

impl KhinchinFamily {
    /// Family of a generating function whose class-K check passed.
    pub fn new(f: GenFunction) -> Result<Self> {
        match &f.class_k {
            ClassKStatus::Violated { reason, .. } => Err(Error::NotInClassK(reason.clone())),
            _ => Ok(Self::new_unchecked(f, None)),
        }
    }

    /// Family without the class-K gate; the reason is kept as a warning.
    pub fn new_unchecked(f: GenFunction, warning: Option<String>) -> Self {
        let mut warnings = f.warnings.clone();
        if let Some(w) = warning {
            warnings.push(w);
        }
        KhinchinFamily { f, sum: SumConfig::default(), warnings }
    }

    /// Parses, compiles and wraps a DSL expression.
    pub fn from_expr(src: &str) -> Result<Self> {
        Self::new(crate::dsl::compile_str(src)?)
    }

    pub fn radius(&self) -> Radius {
        self.f.radius
    }

    fn jet(&self, t: f64, order: usize) -> Option<Result<Jet>> {
        let ev = self.f.eval.as_ref()?;
        if ev.max_order() < order {
            return None;
        }
        Some(ev.jet(t, order))
    }

    pub fn ln_f(&self, t: f64) -> Result<f64> {
        Ok(sums::eval_log_f(&self.f, t, &self.sum)?.ln_mag)
    }

    /// `ln P(X_t = n)`; at `t = 0` the law is the point mass at 0.
    pub fn ln_pmf(&self, n: u64, t: f64) -> Result<f64> {
        self.f.radius.check(t)?;
        if t == 0.0 {
            return Ok(if n == 0 { 0.0 } else { f64::NEG_INFINITY });
        }
        if let Some(k) = self.f.oracle.known_up_to() {
            if n > k {
                return Err(Error::Precondition(format!("coefficient a_{n} beyond the computed range {k}")));
            }
        }
        Ok(self.f.ln_coeff(n) + n as f64 * t.ln() - self.ln_f(t)?)
    }

    pub fn pmf(&self, n: u64, t: f64) -> Result<SignedLog> {
        let l = self.ln_pmf(n, t)?;
        Ok(SignedLog::new(if l.is_finite() { 1 } else { 0 }, l))
    }

    /// `m_f(t) = t f'(t)/f(t)`
    pub fn mean(&self, t: f64) -> Result<f64> {
        self.f.radius.check(t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        match self.jet(t, 1) {
            Some(j) => Ok(j?.mean),
            None => Ok(sums::series_moments(&self.f, t, &self.sum)?.mean),
        }
    }

    pub fn stats(&self, t: f64) -> Result<FamilyStats> {
        self.f.radius.check(t)?;
        if t == 0.0 {
            let a = |n| self.f.coeff(n);
            let l = 2.0 * a(0) * a(2) / (a(1) * a(1));
            return Ok(FamilyStats {
                t,
                log_f: self.f.ln_coeff(0),
                mean: 0.0,
                var: 0.0,
                ratio: f64::NAN,
                l_f: l,
                second_moment_quotient: f64::NAN,
                tail_bound_achieved: 0.0,
            });
        }
        let (log_f, mean, var, fact2, second, tail) = match self.jet(t, 2) {
            Some(j) => {
                let j = j?;
                let (m, v) = (j.mean, j.var());
                let fact2 = self
                    .f
                    .eval
                    .as_ref()
                    .and_then(|ev| ev.factorial_moment(2, t))
                    .unwrap_or(v + m * m - m);
                (j.ln_mag, m, v, fact2, v + m * m, 0.0)
            }
            None => {
                let s = sums::series_moments(&self.f, t, &self.sum)?;
                (s.ln_f, s.mean, s.var, s.fact2, s.second, s.report.tail_rel)
            }
        };
        if !(mean > 0.0 && var >= 0.0 && mean.is_finite() && var.is_finite()) {
            return Err(Error::Evaluation(format!("degenerate moments at t = {t}: m = {mean}, var = {var}")));
        }
        let mut l_f = fact2 / (mean * mean);
        let mut q = second / (mean * mean);
        if !(l_f.is_finite() && q.is_finite()) {
            // m^2 overflows: same quantities through var/m
            l_f = 1.0 + (var / mean - 1.0) / mean;
            q = 1.0 + var / mean / mean;
        }
        let gap = (q - (1.0 / mean + l_f)).abs();
        if !(gap <= 1e-8 * q.max(1e-300)) {
            return Err(Error::RouteMismatch(format!(
                "E X^2/m^2 = {q} but 1/m + L_f = {} at t = {t}",
                1.0 / mean + l_f
            )));
        }
        Ok(FamilyStats {
            t,
            log_f,
            mean,
            var,
            ratio: var.sqrt() / mean,
            l_f,
            second_moment_quotient: q,
            tail_bound_achieved: tail,
        })
    }

    /// `E X_t^beta` for `beta >= 0`.
    pub fn moment(&self, beta: f64, t: f64) -> Result<f64> {
        if !(beta >= 0.0) {
            return Err(Error::Precondition("moment exponent must be nonnegative".into()));
        }
        self.f.radius.check(t)?;
        if beta == 0.0 {
            return Ok(1.0);
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        if beta.fract() == 0.0 {
            if let Some(j) = self.jet(t, beta as usize) {
                return Ok(raw_moment_from_jet(&j?, beta as usize));
            }
        }
        let (ls, _) = sums::power_sums(&self.f, &[0.0, beta], t, &self.sum)?;
        Ok((ls[1] - ls[0]).exp())
    }

    /// `E X_t^{(k)} = t^k f^{(k)}(t) / f(t)`; 1 for `k = 0`.
    pub fn factorial_moment(&self, k: u32, t: f64) -> Result<f64> {
        self.f.radius.check(t)?;
        if k == 0 {
            return Ok(1.0);
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        if let Some(v) = self.f.eval.as_ref().and_then(|ev| ev.factorial_moment(k, t)) {
            return Ok(v);
        }
        if k <= 2 {
            if let Some(j) = self.jet(t, 2) {
                let j = j?;
                return Ok(if k == 1 { j.mean } else { j.var() + j.mean * j.mean - j.mean });
            }
        }
        match sums::factorial_moments_series(&self.f, t, k, &self.sum) {
            Ok((v, _)) => Ok(v[k as usize]),
            Err(e) => match self.jet(t, k as usize) {
                // expand the falling factorial in raw moments from the jet
                Some(j) => {
                    let j = j?;
                    let p = falling_poly(k as usize);
                    Ok(p.iter().enumerate().map(|(i, c)| c * raw_moment_from_jet(&j, i)).sum())
                }
                None => Err(e),
            },
        }
    }

    /// `sum_j S(k, j) E X^{(j)}`, the Stirling route to `E X^k`.
    pub fn moment_via_stirling(&self, k: u32, t: f64) -> Result<f64> {
        if k == 0 || k as usize > stirling().k_max() {
            return Err(Error::Precondition(format!("order k = {k} outside 1..={}", stirling().k_max())));
        }
        let mut acc = 0.0;
        for j in 1..=k {
            acc += stirling().get_f64(k as usize, j as usize) * self.factorial_moment(j, t)?;
        }
        Ok(acc)
    }

    /// `M_f = lim m_f(t)` as `t -> R`: finite, infinite or unknown.
    pub fn classify_mf(&self) -> MfClass {
        if let Some(d) = self.f.oracle.degree() {
            return MfClass::Finite(d as f64);
        }
        if self.f.radius == Radius::Infinite {
            return MfClass::Infinite;
        }
        self.f.mf
    }

    /// The unique `t` with `m_f(t) = target`.
    pub fn solve_t_for_mean(&self, target: f64) -> Result<f64> {
        self.solve_t_for_mean_with(target, false)
    }

    /// As [`solve_t_for_mean`](Self::solve_t_for_mean); `allow_unknown` lets the
    /// search proceed when `M_f` could not be classified.
    pub fn solve_t_for_mean_with(&self, target: f64, allow_unknown: bool) -> Result<f64> {
        if !(target > 0.0 && target.is_finite()) {
            return Err(Error::Precondition("target mean must be positive".into()));
        }
        match self.classify_mf() {
            MfClass::Finite(mf) if target >= mf => {
                return Err(Error::TargetAboveMf { target, mf: mf.to_string() });
            }
            MfClass::Unknown if !allow_unknown => {
                return Err(Error::TargetAboveMf { target, mf: "unknown".into() });
            }
            _ => {}
        }
        let (mut lo, mut hi) = (0.0f64, f64::NAN);
        let mut last = (0.0, 0.0);
        match self.f.radius {
            Radius::Finite(r) => {
                for j in 1..=60 {
                    let t = r * (1.0 - 0.5f64.powi(j));
                    let m = match self.mean(t) {
                        Ok(m) => m,
                        Err(_) => break,
                    };
                    last = (t, m);
                    if m >= target {
                        hi = t;
                        break;
                    }
                    lo = t;
                }
            }
            Radius::Infinite => {
                let mut t = 1.0;
                for _ in 0..2000 {
                    let m = match self.mean(t) {
                        Ok(m) => m,
                        Err(_) => break,
                    };
                    last = (t, m);
                    if m >= target {
                        hi = t;
                        break;
                    }
                    lo = t;
                    t *= 2.0;
                }
            }
            Radius::Unknown => return Err(Error::UnknownRadius),
        }
        if hi.is_nan() {
            return Err(Error::Bracketing { reached: last.1, t: last.0 });
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-12 * hi || mid <= lo || mid >= hi {
                break;
            }
            if self.mean(mid)? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (mlo, mhi) = (self.mean(lo)?, self.mean(hi)?);
        // one secant step inside the final bracket
        let t = if mhi > mlo { (lo + (target - mlo) * (hi - lo) / (mhi - mlo)).clamp(lo, hi) } else { hi };
        Ok(t)
    }

    /// The family of `D_f(z) = z f'(z)`, i.e. the size-biased law `W_t`.
    pub fn derivative_family(&self) -> Result<KhinchinFamily> {
        let inner = &self.f;
        let mut warnings = Vec::new();
        if inner.nonzero_count(3) < 3 {
            warnings.push("degenerate derivative family: f has only two nonzero coefficients, W_t is constant".into());
        }
        let oracle = Arc::new(DerivOracle { inner: inner.oracle.clone() });
        let mut g = GenFunction::new(format!("D({})", inner.name), inner.radius, oracle);
        if let Some(ev) = &inner.eval {
            g.eval = Some(Arc::new(DerivEval { inner: ev.clone() }));
        }
        g.mf = match inner.mf {
            MfClass::Infinite => MfClass::Infinite,
            _ => match inner.oracle.degree() {
                Some(d) => MfClass::Finite(d as f64),
                None => MfClass::Unknown,
            },
        };
        g.mf_basis = "derived from f".into();
        if let Some(p) = &inner.exact_poly {
            let q: Vec<BigRational> =
                p.iter().enumerate().map(|(n, c)| c * BigRational::from_integer((n as i64).into())).collect();
            g.exact_poly = Some(Arc::new(q));
        }
        g.class_k = ClassKStatus::Violated { index: 0, reason: "a_0 = 0 for z f'(z)".into() };
        let mut fam = KhinchinFamily::new_unchecked(g, Some("support starts at 1: D_f has a_0 = 0".into()));
        fam.warnings.extend(warnings);
        fam.sum = self.sum;
        Ok(fam)
    }
}

#[derive(Debug)]
struct DerivOracle {
    inner: Arc<dyn CoeffOracle>,
}

impl CoeffOracle for DerivOracle {
    fn ln_coeff(&self, n: u64) -> f64 {
        if n == 0 { f64::NEG_INFINITY } else { self.inner.ln_coeff(n) + (n as f64).ln() }
    }
    fn next_support(&self, n: u64) -> Option<u64> {
        self.inner.next_support(n.max(1))
    }
    fn degree(&self) -> Option<u64> {
        self.inner.degree()
    }
    fn known_up_to(&self) -> Option<u64> {
        self.inner.known_up_to()
    }
    fn exact(&self, n: u64) -> Option<BigRational> {
        self.inner.exact(n).map(|c| c * BigRational::from_integer((n as i64).into()))
    }
    fn sign(&self, n: u64) -> i8 {
        if n == 0 { 0 } else { self.inner.sign(n) }
    }
}

#[derive(Debug)]
struct DerivEval {
    inner: Arc<dyn Evaluator>,
}

impl Evaluator for DerivEval {
    fn jet(&self, t: f64, order: usize) -> Result<Jet> {
        jet::zderiv(&self.inner.jet(t, (order + 1).min(self.inner.max_order()))?)
    }
    fn max_order(&self) -> usize {
        self.inner.max_order().saturating_sub(1)
    }
    fn factorial_moment(&self, k: u32, t: f64) -> Option<f64> {
        // E W^(k) = E[X X^(k)] / m and X X^(k) = X^(k+1) + k X^(k)
        let m = self.inner.factorial_moment(1, t)?;
        let a = self.inner.factorial_moment(k + 1, t)?;
        let b = self.inner.factorial_moment(k, t)?;
        Some((a + k as f64 * b) / m)
    }
}
