//! Pointwise evaluation of expression trees: real log-space values, jets and
//! complex values.

use num_complex::Complex64;

use super::ast::{Bounds, Builtin, Expr};
use super::jet;
use crate::error::{Error, Result};
use crate::gf::signed_log::SignedLog;
use crate::gf::{builtins, sums, GenFunction, Jet, SumConfig, MAX_JET_ORDER};

/// Instantiates a built-in generating function.
pub fn builtin_genfunction(b: &Builtin) -> Result<GenFunction> {
    Ok(match b {
        Builtin::Partition => builtins::partition(),
        Builtin::Bell => builtins::bell(),
        Builtin::Geom => builtins::geometric(),
        Builtin::NegBin(a) => builtins::negative_binomial(*a),
        Builtin::Canon(rule) => builtins::canonical(rule.clone())?,
        Builtin::HadamardGap => builtins::hadamard_gap(),
        Builtin::GapSeries(r) => builtins::gap_series(*r),
        Builtin::Polylog(s, e) => builtins::polylog(*s, *e),
    })
}

/// Built-ins referenced by a tree, instantiated once.
#[derive(Debug, Clone, Default)]
pub struct Context {
    table: Vec<(Builtin, GenFunction)>,
    pub sum: SumConfig,
}

impl Context {
    pub fn for_expr(e: &Expr) -> Result<Context> {
        let mut ctx = Context::default();
        ctx.collect(e)?;
        Ok(ctx)
    }

    fn collect(&mut self, e: &Expr) -> Result<()> {
        match e {
            Expr::Builtin(b) | Expr::Diff(b, _) => {
                if !self.table.iter().any(|(x, _)| x == b) {
                    let g = builtin_genfunction(b)?;
                    self.table.push((b.clone(), g));
                }
                Ok(())
            }
            Expr::Num(_) | Expr::Z | Expr::Index(_) => Ok(()),
            Expr::Neg(a) | Expr::Exp(a) | Expr::Log(a) | Expr::D(a) => self.collect(a),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                self.collect(a)?;
                self.collect(b)
            }
            Expr::Prod(b) | Expr::Sum(b) => self.collect(&b.body),
        }
    }

    pub fn get(&self, b: &Builtin) -> &GenFunction {
        &self.table.iter().find(|(x, _)| x == b).expect("built-in collected at construction").1
    }
}

type Env = Vec<(String, i64)>;

fn lookup(env: &Env, v: &str) -> Result<i64> {
    env.iter()
        .rev()
        .find(|(n, _)| n == v)
        .map(|(_, k)| *k)
        .ok_or_else(|| Error::Evaluation(format!("unbound index '{v}'")))
}

/// Value of a `z`-free expression (exponents, constants) under an index binding.
pub fn const_value(e: &Expr, env: &Env) -> Result<f64> {
    Ok(match e {
        Expr::Num(x) => *x,
        Expr::Index(v) => lookup(env, v)? as f64,
        Expr::Neg(a) => -const_value(a, env)?,
        Expr::Add(a, b) => const_value(a, env)? + const_value(b, env)?,
        Expr::Sub(a, b) => const_value(a, env)? - const_value(b, env)?,
        Expr::Mul(a, b) => const_value(a, env)? * const_value(b, env)?,
        Expr::Div(a, b) => {
            let d = const_value(b, env)?;
            if d == 0.0 {
                return Err(Error::DivisionByZeroConstant);
            }
            const_value(a, env)? / d
        }
        Expr::Pow(a, b) => const_value(a, env)?.powf(const_value(b, env)?),
        Expr::Exp(a) => const_value(a, env)?.exp(),
        Expr::Log(a) => const_value(a, env)?.ln(),
        _ => return Err(Error::Evaluation(format!("'{e}' is not constant"))),
    })
}

const TAIL_TOL: f64 = 1e-17;
const TAIL_RUN: usize = 8;
const MAX_FACTORS: i64 = 10_000_000;

fn iterate<T, F, S>(b: &Bounds, env: &mut Env, mut init: T, mut step: F, small: S) -> Result<T>
where
    F: FnMut(&mut T, &Expr, &Env) -> Result<Option<T>>,
    S: Fn(&T, &T) -> bool,
{
    let hi = b.hi.unwrap_or(i64::MAX);
    let mut quiet = 0usize;
    let mut k = b.lo;
    while k <= hi {
        env.push((b.var.clone(), k));
        let piece = step(&mut init, &b.body, env);
        env.pop();
        if let Some(p) = piece? {
            if b.hi.is_none() {
                if small(&p, &init) {
                    quiet += 1;
                    if quiet >= TAIL_RUN {
                        return Ok(init);
                    }
                } else {
                    quiet = 0;
                }
            }
        }
        if b.hi.is_none() && k - b.lo > MAX_FACTORS {
            return Err(Error::TailUnattainable { achieved: f64::NAN, terms: MAX_FACTORS as usize });
        }
        k += 1;
    }
    Ok(init)
}

/// `f^{(n)}(t)` of a built-in.
fn builtin_derivative(g: &GenFunction, n: u32, t: f64, cfg: &SumConfig) -> Result<SignedLog> {
    if n == 0 {
        return sums::eval_log_f(g, t, cfg);
    }
    if t == 0.0 {
        let ln = g.ln_coeff(n as u64) + crate::gf::special::ln_factorial(n as u64);
        return Ok(SignedLog::new(if ln.is_finite() { 1 } else { 0 }, ln));
    }
    let ln_f = sums::eval_log_f(g, t, cfg)?.ln_mag;
    let fm = match g.eval.as_ref().and_then(|ev| ev.factorial_moment(n, t)) {
        Some(v) => v,
        None => {
            let hook = g.eval.as_ref().filter(|ev| n <= 2 && ev.max_order() >= n as usize);
            match hook {
                Some(ev) => {
                    let j = ev.jet(t, 2)?;
                    if n == 1 { j.mean } else { j.var() + j.mean * j.mean - j.mean }
                }
                None => sums::factorial_moments_series(g, t, n, cfg)?.0[n as usize],
            }
        }
    };
    Ok(SignedLog::from_f64(fm).scale_ln(ln_f - n as f64 * t.ln()))
}

/// Real value of `e` at `z = t` in log space.
pub fn value(e: &Expr, t: f64, ctx: &Context) -> Result<SignedLog> {
    value_env(e, t, ctx, &mut Vec::new())
}

pub(crate) fn value_env(e: &Expr, t: f64, ctx: &Context, env: &mut Env) -> Result<SignedLog> {
    Ok(match e {
        Expr::Num(x) => SignedLog::from_f64(*x),
        Expr::Z => SignedLog::from_f64(t),
        Expr::Index(v) => SignedLog::from_f64(lookup(env, v)? as f64),
        Expr::Neg(a) => -value_env(a, t, ctx, env)?,
        Expr::Add(a, b) => value_env(a, t, ctx, env)?.add(value_env(b, t, ctx, env)?),
        Expr::Sub(a, b) => value_env(a, t, ctx, env)?.sub(value_env(b, t, ctx, env)?),
        Expr::Mul(a, b) => value_env(a, t, ctx, env)? * value_env(b, t, ctx, env)?,
        Expr::Div(a, b) => {
            let d = value_env(b, t, ctx, env)?;
            if d.is_zero() {
                return Err(Error::Evaluation(format!("division by zero at t = {t}")));
            }
            value_env(a, t, ctx, env)? / d
        }
        Expr::Pow(a, k) => {
            let base = value_env(a, t, ctx, env)?;
            let alpha = const_value(k, env)?;
            spow(base, alpha)?
        }
        Expr::Exp(a) => {
            let x = value_env(a, t, ctx, env)?.to_f64();
            if !x.is_finite() {
                return Err(Error::Evaluation("exponent overflows".into()));
            }
            SignedLog::from_ln(x)
        }
        Expr::Log(a) => {
            let x = value_env(a, t, ctx, env)?;
            if x.sign <= 0 {
                return Err(Error::Evaluation(format!("logarithm of a nonpositive value at t = {t}")));
            }
            SignedLog::from_f64(x.ln_mag)
        }
        Expr::D(a) => {
            let d = super::diff::derivative(a);
            SignedLog::from_f64(t) * value_env(&d, t, ctx, env)?
        }
        Expr::Prod(b) => iterate(
            b,
            env,
            SignedLog::ONE,
            |acc, body, env| {
                let mut env = env.clone();
                let f = value_env(body, t, ctx, &mut env)?;
                *acc = *acc * f;
                Ok(Some(f))
            },
            |f, _| f.sign > 0 && f.ln_mag.abs() < TAIL_TOL,
        )?,
        Expr::Sum(b) => iterate(
            b,
            env,
            SignedLog::ZERO,
            |acc, body, env| {
                let mut env = env.clone();
                let f = value_env(body, t, ctx, &mut env)?;
                *acc = acc.add(f);
                Ok(Some(f))
            },
            |f, acc| f.is_zero() || f.ln_mag - acc.ln_mag < TAIL_TOL.ln(),
        )?,
        Expr::Builtin(b) => builtin_derivative(ctx.get(b), 0, t, &ctx.sum)?,
        Expr::Diff(b, n) => builtin_derivative(ctx.get(b), *n, t, &ctx.sum)?,
    })
}

fn spow(base: SignedLog, alpha: f64) -> Result<SignedLog> {
    if alpha.fract() == 0.0 && alpha.abs() < 2f64.powi(31) {
        if base.is_zero() && alpha < 0.0 {
            return Err(Error::Evaluation("zero to a negative power".into()));
        }
        return Ok(base.powi(alpha as i32));
    }
    if base.sign < 0 {
        return Err(Error::Evaluation(format!("real power {alpha} of a negative value")));
    }
    if base.is_zero() {
        return Ok(SignedLog::ZERO);
    }
    Ok(SignedLog::new(1, alpha * base.ln_mag))
}

/// Highest jet order the tree supports.
pub fn max_jet_order(e: &Expr, ctx: &Context) -> usize {
    match e {
        Expr::Num(_) | Expr::Z | Expr::Index(_) => MAX_JET_ORDER,
        Expr::Builtin(b) | Expr::Diff(b, _) => ctx.get(b).eval.as_ref().map_or(2, |ev| ev.max_order()),
        Expr::Neg(a) | Expr::Exp(a) | Expr::Log(a) => max_jet_order(a, ctx),
        Expr::D(a) => max_jet_order(a, ctx).saturating_sub(1),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
            max_jet_order(a, ctx).min(max_jet_order(b, ctx))
        }
        Expr::Prod(b) | Expr::Sum(b) => max_jet_order(&b.body, ctx),
    }
}

/// Jet of `e` at `t > 0` carrying `order` central moments (fewer if a
/// built-in cannot supply them).
pub fn jet_at(e: &Expr, t: f64, order: usize, ctx: &Context) -> Result<Jet> {
    if t <= 0.0 {
        return Err(Error::Precondition("jets need t > 0".into()));
    }
    jet_env(e, t, order, ctx, &mut Vec::new())
}

fn jet_env(e: &Expr, t: f64, order: usize, ctx: &Context, env: &mut Env) -> Result<Jet> {
    Ok(match e {
        Expr::Num(x) => jet::constant(SignedLog::from_f64(*x), order),
        Expr::Index(v) => jet::constant(SignedLog::from_f64(lookup(env, v)? as f64), order),
        Expr::Z => jet::variable(t, order),
        Expr::Neg(a) => jet::neg(&jet_env(a, t, order, ctx, env)?),
        Expr::Add(a, b) => jet::add(&jet_env(a, t, order, ctx, env)?, &jet_env(b, t, order, ctx, env)?)?,
        Expr::Sub(a, b) => jet::sub(&jet_env(a, t, order, ctx, env)?, &jet_env(b, t, order, ctx, env)?)?,
        Expr::Mul(a, b) => jet::mul(&jet_env(a, t, order, ctx, env)?, &jet_env(b, t, order, ctx, env)?),
        Expr::Div(a, b) => {
            let d = jet_env(b, t, order, ctx, env)?;
            if d.sign == 0 {
                return Err(Error::Evaluation(format!("division by zero at t = {t}")));
            }
            jet::mul(&jet_env(a, t, order, ctx, env)?, &jet::recip(&d)?)
        }
        Expr::Pow(a, k) => jet::pow(&jet_env(a, t, order, ctx, env)?, const_value(k, env)?)?,
        Expr::Exp(a) => jet::exp(&jet_env(a, t, order, ctx, env)?)?,
        Expr::Log(a) => jet::log(&jet_env(a, t, order, ctx, env)?)?,
        Expr::D(a) => jet::zderiv(&jet_env(a, t, order + 1, ctx, env)?)?,
        Expr::Prod(b) => {
            let one = jet::constant(SignedLog::ONE, order);
            iterate(
                b,
                env,
                one,
                |acc, body, env| {
                    let mut env = env.clone();
                    let f = jet_env(body, t, order, ctx, &mut env)?;
                    *acc = jet::mul(acc, &f);
                    Ok(Some(f))
                },
                |f, acc| jet::negligible_factor(f, acc, TAIL_TOL),
            )?
        }
        Expr::Sum(b) => {
            let zero = jet::constant(SignedLog::ZERO, order);
            iterate(
                b,
                env,
                zero,
                |acc, body, env| {
                    let mut env = env.clone();
                    let f = jet_env(body, t, order, ctx, &mut env)?;
                    *acc = jet::add(acc, &f)?;
                    Ok(Some(f))
                },
                |f, acc| f.sign == 0 || (acc.sign != 0 && f.ln_mag - acc.ln_mag < TAIL_TOL.ln()),
            )?
        }
        Expr::Builtin(b) => builtin_jet(ctx.get(b), t, order, &ctx.sum)?,
        Expr::Diff(b, n) => {
            // f^{(n)} = t^{-n} (E X^{(n)}) f ; only the value is needed here
            let v = builtin_derivative(ctx.get(b), *n, t, &ctx.sum)?;
            let mut j = jet::constant(v, 0);
            j.mean = f64::NAN;
            j
        }
    })
}

fn builtin_jet(g: &GenFunction, t: f64, order: usize, cfg: &SumConfig) -> Result<Jet> {
    g.radius.check(t)?;
    if let Some(ev) = &g.eval {
        return Ok(ev.jet(t, order)?.truncate(order));
    }
    let m = sums::series_moments(g, t, cfg)?;
    let mut central = vec![1.0, 0.0, m.var];
    central.truncate(order.max(1) + 1);
    Ok(Jet { sign: 1, ln_mag: m.ln_f, mean: m.mean, central })
}

/// Complex value of `e`; `None` when the tree holds a built-in without a
/// closed form in the complex plane.
pub fn complex_value(e: &Expr, z: Complex64) -> Option<Result<Complex64>> {
    complex_env(e, z, &mut Vec::new())
}

fn complex_env(e: &Expr, z: Complex64, env: &mut Env) -> Option<Result<Complex64>> {
    macro_rules! cv {
        ($x:expr) => {
            match complex_env($x, z, env)? {
                Ok(v) => v,
                Err(err) => return Some(Err(err)),
            }
        };
    }
    let one = Complex64::new(1.0, 0.0);
    Some(Ok(match e {
        Expr::Num(x) => Complex64::new(*x, 0.0),
        Expr::Z => z,
        Expr::Index(v) => match lookup(env, v) {
            Ok(k) => Complex64::new(k as f64, 0.0),
            Err(err) => return Some(Err(err)),
        },
        Expr::Neg(a) => -cv!(a),
        Expr::Add(a, b) => cv!(a) + cv!(b),
        Expr::Sub(a, b) => cv!(a) - cv!(b),
        Expr::Mul(a, b) => cv!(a) * cv!(b),
        Expr::Div(a, b) => cv!(a) / cv!(b),
        Expr::Pow(a, k) => {
            let base = cv!(a);
            let alpha = match const_value(k, env) {
                Ok(v) => v,
                Err(err) => return Some(Err(err)),
            };
            if alpha.fract() == 0.0 && alpha.abs() < 2f64.powi(31) {
                base.powi(alpha as i32)
            } else {
                base.powf(alpha)
            }
        }
        Expr::Exp(a) => cv!(a).exp(),
        Expr::Log(a) => cv!(a).ln(),
        Expr::D(a) => {
            let d = super::diff::derivative(a);
            z * cv!(&d)
        }
        Expr::Prod(b) | Expr::Sum(b) => {
            let is_prod = matches!(e, Expr::Prod(_));
            let hi = b.hi.unwrap_or(i64::MAX);
            let mut acc = if is_prod { one } else { Complex64::new(0.0, 0.0) };
            let mut quiet = 0;
            let mut k = b.lo;
            while k <= hi {
                env.push((b.var.clone(), k));
                let f = complex_env(&b.body, z, env);
                env.pop();
                let f = match f? {
                    Ok(v) => v,
                    Err(err) => return Some(Err(err)),
                };
                let small = if is_prod {
                    acc *= f;
                    (f - one).norm() < TAIL_TOL
                } else {
                    acc += f;
                    f.norm() <= TAIL_TOL * acc.norm()
                };
                if b.hi.is_none() {
                    quiet = if small { quiet + 1 } else { 0 };
                    if quiet >= TAIL_RUN {
                        break;
                    }
                    if k - b.lo > MAX_FACTORS {
                        return Some(Err(Error::TailUnattainable { achieved: f64::NAN, terms: MAX_FACTORS as usize }));
                    }
                }
                k += 1;
            }
            acc
        }
        Expr::Builtin(Builtin::Geom) => one / (one - z),
        Expr::Builtin(Builtin::NegBin(a)) => (one - z).powf(-a),
        Expr::Builtin(_) | Expr::Diff(..) => return None,
    }))
}
