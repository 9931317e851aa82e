//! Turning expression trees into generating functions.

use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{Signed, Zero};

use super::ast::{Builtin, Expr};
use super::eval::{self, builtin_genfunction, const_value, Context};
use super::series::{exact_poly, series_of};
use crate::error::{Error, Result};
use crate::gf::genfn::DenseOracle;
use crate::gf::signed_log::SignedLog;
use crate::gf::{builtins, ClassKStatus, Evaluator, GenFunction, Jet, MfClass, Radius, MAX_JET_ORDER};

#[derive(Debug, Clone)]
pub struct CompileConfig {
    /// Truncation order for series expansion and class-K validation.
    pub order: usize,
    /// Map recognizable trees onto built-ins with exact coefficient oracles.
    pub recognize: bool,
    /// Radius to use instead of the inferred one.
    pub radius: Option<Radius>,
    /// Keep going when class-K validation fails (the result carries a warning).
    pub allow_outside_k: bool,
    /// Relative tolerance for agreement of the two derivative routes.
    pub route_tol: f64,
}

impl Default for CompileConfig {
    fn default() -> Self {
        CompileConfig { order: 512, recognize: true, radius: None, allow_outside_k: false, route_tol: 1e-6 }
    }
}

#[derive(Debug, Clone)]
pub struct CompileReport {
    pub genfunction: GenFunction,
    pub class_k_status: ClassKStatus,
    pub warnings: Vec<String>,
}

fn num(e: &Expr) -> Option<f64> {
    match e {
        Expr::Num(x) => Some(*x),
        _ => None,
    }
}

fn is_num(e: &Expr, v: f64) -> bool {
    num(e) == Some(v)
}

fn is_one_minus_z(e: &Expr) -> bool {
    matches!(e, Expr::Sub(a, b) if is_num(a, 1.0) && **b == Expr::Z)
}

fn is_one_plus_z(e: &Expr) -> bool {
    match e {
        Expr::Add(a, b) => (is_num(a, 1.0) && **b == Expr::Z) || (**a == Expr::Z && is_num(b, 1.0)),
        _ => false,
    }
}

/// Exponent of `(1-z)^(-a)` written as a power of `1-z`.
fn neg_exponent(k: &Expr) -> Option<f64> {
    match k {
        Expr::Neg(inner) => num(inner),
        _ => None,
    }
}

/// Built-in whose series equals the tree, if the tree has a recognized shape.
pub fn recognize(e: &Expr) -> Option<Builtin> {
    match e {
        Expr::Builtin(b) => Some(b.clone()),
        Expr::Exp(a) if **a == Expr::Z => None,
        Expr::Div(a, b) if is_num(a, 1.0) => {
            if is_one_minus_z(b) {
                return Some(Builtin::Geom);
            }
            match b.as_ref() {
                Expr::Pow(base, k) if is_one_minus_z(base) => num(k).filter(|x| *x > 0.0).map(Builtin::NegBin),
                _ => None,
            }
        }
        Expr::Pow(base, k) if is_one_minus_z(base) => neg_exponent(k).filter(|x| *x > 0.0).map(Builtin::NegBin),
        Expr::Prod(b) if b.lo == 1 && b.hi.is_none() => match b.body.as_ref() {
            Expr::Div(one, den) if is_num(one, 1.0) => match den.as_ref() {
                Expr::Sub(o, p) if is_num(o, 1.0) => match p.as_ref() {
                    Expr::Pow(z, k) if **z == Expr::Z && **k == Expr::Index(b.var.clone()) => Some(Builtin::Partition),
                    _ => None,
                },
                _ => None,
            },
            _ => None,
        },
        _ => None,
    }
}

fn recognize_genfunction(e: &Expr) -> Option<Result<GenFunction>> {
    match e {
        Expr::Exp(a) if **a == Expr::Z => return Some(Ok(builtins::exponential())),
        Expr::Exp(a) => {
            if let Expr::Sub(x, y) = a.as_ref() {
                if matches!(x.as_ref(), Expr::Exp(z) if **z == Expr::Z) && is_num(y, 1.0) {
                    return Some(Ok(builtins::bell()));
                }
            }
        }
        Expr::Pow(base, k) if is_one_plus_z(base) => {
            if let Some(n) = num(k).filter(|x| x.fract() == 0.0 && *x >= 1.0 && *x <= 1e6) {
                return Some(Ok(builtins::binomial(n as u64)));
            }
        }
        Expr::Pow(base, k) if is_one_minus_z(base) && neg_exponent(k) == Some(1.0) => {
            return Some(Ok(builtins::geometric()));
        }
        _ => {}
    }
    recognize(e).map(|b| match b {
        Builtin::NegBin(a) if a == 1.0 => Ok(builtins::geometric()),
        other => builtin_genfunction(&other),
    })
}

/// Compiles a parsed tree into a generating function.
pub fn compile(e: &Expr, cfg: &CompileConfig) -> Result<CompileReport> {
    let mut warnings = Vec::new();
    if cfg.recognize {
        if let Some(g) = recognize_genfunction(e) {
            let mut g = g?;
            g.name = e.to_string();
            if let Some(r) = cfg.radius {
                g.radius = r;
            }
            let status = g.validate_class_k(cfg.order as u64);
            g.class_k = status.clone();
            return Ok(CompileReport { genfunction: g, class_k_status: status, warnings });
        }
    }
    let ctx = Context::for_expr(e)?;
    let exact = exact_poly(e);
    let (coeffs, polynomial): (Vec<SignedLog>, bool) = match &exact {
        Some(p) => (p.iter().map(|c| SignedLog::from_f64(builtins::exact_to_f64(c))).collect(), true),
        None => (series_of(e, cfg.order, &ctx)?.coeffs().to_vec(), false),
    };
    let status = class_k_check(&coeffs, exact.as_deref(), polynomial, cfg.order as u64);
    if let ClassKStatus::Violated { reason, .. } = &status {
        if !cfg.allow_outside_k {
            return Err(Error::NotInClassK(reason.clone()));
        }
        warnings.push(format!("not in class K: {reason}"));
    }
    let mut oracle = DenseOracle::new(&coeffs, polynomial);
    if let Some(p) = &exact {
        oracle = oracle.with_exact(p.clone());
    }
    let radius = match cfg.radius {
        Some(r) => r,
        None if polynomial => Radius::Infinite,
        None => infer_radius(e, &ctx),
    };
    if radius == Radius::Unknown {
        warnings.push("radius of convergence could not be inferred; supply one explicitly".into());
    }
    let mut g = GenFunction::new(e.to_string(), radius, Arc::new(oracle));
    let evaluator = AstEvaluator::new(e.clone(), ctx);
    if radius != Radius::Unknown {
        for t in probe_points(radius) {
            match evaluator.route_discrepancy(t) {
                Ok(d) if d > cfg.route_tol => {
                    return Err(Error::RouteMismatch(format!(
                        "derivative routes disagree at t = {t}: relative gap {d:.3e}"
                    )))
                }
                Ok(_) => {}
                Err(err) => warnings.push(format!("route check skipped at t = {t}: {err}")),
            }
        }
    }
    g.eval = Some(Arc::new(evaluator));
    if let Some(p) = exact {
        g.exact_poly = Some(Arc::new(p));
    }
    let (mf, basis) = if polynomial {
        (MfClass::Finite((coeffs.len() - 1) as f64), "polynomial degree".to_string())
    } else {
        match radius {
            Radius::Infinite => (MfClass::Infinite, "entire and not a polynomial".to_string()),
            Radius::Finite(r) => mf_window(&coeffs, r),
            Radius::Unknown => (MfClass::Unknown, "radius unknown".to_string()),
        }
    };
    g = g.with_mf(mf, &basis);
    g.class_k = status.clone();
    g.warnings = warnings.clone();
    Ok(CompileReport { genfunction: g, class_k_status: status, warnings })
}

/// Parses and compiles with default settings.
pub fn compile_str(src: &str) -> Result<GenFunction> {
    let e = super::parse(src)?;
    Ok(compile(&e, &CompileConfig::default())?.genfunction)
}

fn class_k_check(
    coeffs: &[SignedLog],
    exact: Option<&[num_rational::BigRational]>,
    polynomial: bool,
    order: u64,
) -> ClassKStatus {
    let sign = |n: usize| -> i8 {
        match exact {
            Some(p) => {
                let c = &p[n];
                if c.is_zero() { 0 } else if c.is_positive() { 1 } else { -1 }
            }
            None => coeffs[n].sign,
        }
    };
    if sign(0) <= 0 {
        let reason = if sign(0) == 0 { "a_0 > 0 violated (a_0 = 0)" } else { "a_0 > 0 violated (a_0 < 0)" };
        return ClassKStatus::Violated { index: 0, reason: reason.into() };
    }
    let mut nonzero = 0;
    for n in 0..coeffs.len() {
        match sign(n) {
            -1 => return ClassKStatus::Violated { index: n as u64, reason: format!("negative coefficient a_{n}") },
            1 => nonzero += 1,
            _ => {}
        }
    }
    if nonzero < 2 {
        return ClassKStatus::Violated { index: 0, reason: "constant function".into() };
    }
    ClassKStatus::VerifiedUpTo(if polynomial { (coeffs.len() - 1) as u64 } else { order })
}

fn probe_points(r: Radius) -> Vec<f64> {
    match r {
        Radius::Finite(r) => vec![0.2 * r, 0.5 * r, 0.8 * r],
        _ => vec![0.3, 1.0, 2.5],
    }
}

/// `M_f` for finite radius from the decay of `n a_n R^n` over the top half
/// of the computed coefficients.
fn mf_window(coeffs: &[SignedLog], r: f64) -> (MfClass, String) {
    let n = coeffs.len() - 1;
    let pts: Vec<(f64, f64)> = (n / 4..=n)
        .filter(|&i| i > 0 && coeffs[i].sign > 0)
        .map(|i| ((i as f64).ln(), (i as f64).ln() + coeffs[i].ln_mag + i as f64 * r.ln()))
        .collect();
    if pts.len() < 8 {
        return (MfClass::Unknown, "too few coefficients for the ratio-test window".into());
    }
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / k, sy / k);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
    let slope = sxy / sxx;
    if slope > -0.9 {
        return (MfClass::Infinite, format!("ratio-test window: n a_n R^n decays like n^{slope:.2}"));
    }
    if slope < -2.5 {
        // sum with a power-law tail beyond the table
        let mut s0 = crate::gf::signed_log::LogSum::new();
        let mut s1 = crate::gf::signed_log::LogSum::new();
        for (i, c) in coeffs.iter().enumerate() {
            if c.sign > 0 {
                let l = c.ln_mag + i as f64 * r.ln();
                s0.push_ln(l);
                if i > 0 {
                    s1.push_ln(l + (i as f64).ln());
                }
            }
        }
        let last = pts.last().unwrap();
        let tail1 = last.1 + last.0 - (-slope - 1.0).ln();
        let tail0 = last.1 - (-slope).ln();
        let num = crate::gf::signed_log::log_add(s1.value().ln_mag, tail1);
        let den = crate::gf::signed_log::log_add(s0.value().ln_mag, tail0);
        return (MfClass::Finite((num - den).exp()), format!("ratio-test window estimate (decay n^{slope:.2})"));
    }
    (MfClass::Unknown, format!("ratio-test window inconclusive (decay n^{slope:.2})"))
}

/// Radius of convergence by structural propagation; zeros of denominators
/// and logarithm arguments are located on the positive axis.
pub fn infer_radius(e: &Expr, ctx: &Context) -> Radius {
    radius_env(e, ctx, &mut Vec::new())
}

fn radius_env(e: &Expr, ctx: &Context, env: &mut Vec<(String, i64)>) -> Radius {
    match e {
        Expr::Num(_) | Expr::Z | Expr::Index(_) => Radius::Infinite,
        Expr::Neg(a) | Expr::Exp(a) | Expr::D(a) => radius_env(a, ctx, env),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => radius_env(a, ctx, env).min(radius_env(b, ctx, env)),
        Expr::Div(a, b) => {
            let rb = radius_env(b, ctx, env);
            radius_env(a, ctx, env).min(rb).min(first_zero(b, rb, ctx, env))
        }
        Expr::Log(a) => {
            let ra = radius_env(a, ctx, env);
            ra.min(first_zero(a, ra, ctx, env))
        }
        Expr::Pow(a, k) => {
            let ra = radius_env(a, ctx, env);
            match const_value(k, env) {
                Ok(alpha) if alpha >= 0.0 && alpha.fract() == 0.0 => ra,
                Ok(_) => ra.min(first_zero(a, ra, ctx, env)),
                Err(_) => Radius::Unknown,
            }
        }
        Expr::Builtin(b) | Expr::Diff(b, _) => ctx.get(b).radius,
        Expr::Prod(b) | Expr::Sum(b) => {
            let last = b.hi.unwrap_or(b.lo + 32);
            let mut r = Radius::Infinite;
            for k in b.lo..=last {
                env.push((b.var.clone(), k));
                let rk = radius_env(&b.body, ctx, env);
                env.pop();
                r = r.min(rk);
            }
            if b.hi.is_none() && r == Radius::Infinite {
                // every factor is entire, but infinitely many may still create a singularity
                Radius::Unknown
            } else {
                r
            }
        }
    }
}

/// Smallest positive zero of `e` below `bound` (`Infinite` if none found).
fn first_zero(e: &Expr, bound: Radius, ctx: &Context, env: &mut Vec<(String, i64)>) -> Radius {
    match e {
        Expr::Exp(_) => return Radius::Infinite,
        Expr::Neg(a) | Expr::Div(a, _) => return first_zero(a, bound, ctx, env),
        Expr::Mul(a, b) => return first_zero(a, bound, ctx, env).min(first_zero(b, bound, ctx, env)),
        Expr::Pow(a, k) if const_value(k, env).is_ok_and(|x| x > 0.0) => return first_zero(a, bound, ctx, env),
        _ => {}
    }
    if !e.has_z() {
        return Radius::Infinite;
    }
    let grid: Vec<f64> = match bound {
        Radius::Unknown => return Radius::Unknown,
        Radius::Finite(r) => {
            let mut g: Vec<f64> = (1..400).map(|i| r * i as f64 / 400.0).collect();
            g.extend((10..60).map(|j| r * (1.0 - 10f64.powf(-(j as f64) / 4.0))));
            g
        }
        Radius::Infinite => (0..=640).map(|i| 10f64.powf(-4.0 + i as f64 / 64.0)).collect(),
    };
    let mut grid = grid;
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let sign_at = |t: f64, env: &mut Vec<(String, i64)>| eval::value_env(e, t, ctx, env).map(|v| v.sign);
    let mut prev: Option<(f64, i8)> = match sign_at(0.0, env) {
        Ok(s) => Some((0.0, s)),
        Err(_) => None,
    };
    for &t in &grid {
        let s = match sign_at(t, env) {
            Ok(s) => s,
            Err(_) => return Radius::Unknown,
        };
        if s == 0 {
            return Radius::Finite(t);
        }
        if let Some((tp, sp)) = prev {
            if sp != 0 && sp != s {
                let (mut lo, mut hi) = (tp, t);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    match sign_at(mid, env) {
                        Ok(sm) if sm == sp => lo = mid,
                        Ok(0) => return Radius::Finite(mid),
                        Ok(_) => hi = mid,
                        Err(_) => return Radius::Unknown,
                    }
                }
                return Radius::Finite(hi);
            }
        }
        prev = Some((t, s));
    }
    Radius::Infinite
}

/// Evaluator built on the tree: jets for `ln f`, mean and higher moments,
/// symbolic derivatives as an independent check, complex values for ratios.
#[derive(Debug)]
pub struct AstEvaluator {
    expr: Expr,
    d1: Expr,
    d2: Expr,
    ctx: Context,
    max_order: usize,
}

impl AstEvaluator {
    pub fn new(expr: Expr, ctx: Context) -> Self {
        let d1 = super::diff::differentiate(&expr, 1);
        let d2 = super::diff::differentiate(&expr, 2);
        let max_order = eval::max_jet_order(&expr, &ctx).min(MAX_JET_ORDER);
        AstEvaluator { expr, d1, d2, ctx, max_order }
    }

    /// `(ln f, t f'/f, t^2 f''/f)` from the symbolic derivatives.
    pub fn symbolic_stats(&self, t: f64) -> Result<(f64, f64, f64)> {
        let f = eval::value(&self.expr, t, &self.ctx)?;
        if f.sign <= 0 {
            return Err(Error::Evaluation(format!("f is not positive at t = {t}")));
        }
        let d1 = eval::value(&self.d1, t, &self.ctx)?;
        let d2 = eval::value(&self.d2, t, &self.ctx)?;
        let m = (d1 / f).to_f64() * t;
        let f2 = (d2 / f).to_f64() * t * t;
        Ok((f.ln_mag, m, f2))
    }

    /// Largest relative gap between the jet route and the symbolic route
    /// for `ln f`, the mean and `E X(X-1)`.
    pub fn route_discrepancy(&self, t: f64) -> Result<f64> {
        let j = self.jet(t, 2)?;
        let (l, m, f2) = self.symbolic_stats(t)?;
        let jf2 = j.var() + j.mean * j.mean - j.mean;
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-300);
        let scale2 = (j.var() + j.mean * j.mean).max(1e-300);
        Ok(rel(j.ln_mag, l)
            .min((j.ln_mag - l).abs())
            .max(rel(j.mean, m))
            .max((jf2 - f2).abs() / scale2))
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

impl Evaluator for AstEvaluator {
    fn jet(&self, t: f64, order: usize) -> Result<Jet> {
        if t == 0.0 {
            let v = eval::value(&self.expr, 0.0, &self.ctx)?;
            return Ok(super::jet::constant(v, order.min(self.max_order)));
        }
        eval::jet_at(&self.expr, t, order.min(self.max_order), &self.ctx)
    }

    fn max_order(&self) -> usize {
        self.max_order
    }

    fn abs_ratio(&self, t: f64, theta: f64) -> Option<Result<f64>> {
        let z = Complex64::from_polar(t, theta);
        let v = match eval::complex_value(&self.expr, z)? {
            Ok(v) => v,
            Err(e) => return Some(Err(e)),
        };
        Some(eval::value(&self.expr, t, &self.ctx).and_then(|f| {
            let r = (v.norm().ln() - f.ln_mag).exp();
            if r.is_finite() { Ok(r) } else { Err(Error::Evaluation("complex value overflows".into())) }
        }))
    }
}
