//! Truncated-series and exact-polynomial expansion of expression trees.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::ast::{Bounds, Expr};
use super::eval::{const_value, Context};
use crate::error::{Error, Result};
use crate::gf::signed_log::SignedLog;
use crate::gf::TruncatedSeries;

type Env = Vec<(String, i64)>;

/// Exact rational value of a literal, read from its shortest decimal form.
pub fn rational_of(x: f64) -> BigRational {
    let s = super::ast::fmt_num(x.abs());
    let (int, frac) = s.split_once('.').unwrap_or((&s, ""));
    let num: BigInt = format!("{int}{frac}").parse().expect("decimal digits");
    let den = BigInt::from(10u32).pow(frac.len() as u32);
    let r = BigRational::new(num, den);
    if x < 0.0 { -r } else { r }
}

/// Expansion of `e` to order `n`.
pub fn series_of(e: &Expr, n: usize, ctx: &Context) -> Result<TruncatedSeries> {
    series_env(e, n, ctx, &mut Vec::new())
}

fn monomial_power(base: &TruncatedSeries, k: i64) -> Option<TruncatedSeries> {
    // c z^j raised to k >= 0, without repeated squaring
    let j = base.valuation()?;
    if base.coeffs().iter().skip(j + 1).any(|c| !c.is_zero()) || k < 0 {
        return None;
    }
    let n = base.order();
    let deg = (j as i64).checked_mul(k)?;
    let c = base.coeff(j);
    let mut coeffs = vec![SignedLog::ZERO; n + 1];
    if deg <= n as i64 {
        coeffs[deg as usize] = c.powi(k as i32);
    }
    Some(TruncatedSeries::from_coeffs(n, &coeffs))
}

fn series_env(e: &Expr, n: usize, ctx: &Context, env: &mut Env) -> Result<TruncatedSeries> {
    Ok(match e {
        Expr::Num(x) => TruncatedSeries::constant(n, SignedLog::from_f64(*x)),
        Expr::Index(_) => TruncatedSeries::constant(n, SignedLog::from_f64(const_value(e, env)?)),
        Expr::Z => TruncatedSeries::monomial(n, 1),
        Expr::Neg(a) => series_env(a, n, ctx, env)?.neg(),
        Expr::Add(a, b) => series_env(a, n, ctx, env)?.add(&series_env(b, n, ctx, env)?)?,
        Expr::Sub(a, b) => series_env(a, n, ctx, env)?.sub(&series_env(b, n, ctx, env)?)?,
        Expr::Mul(a, b) => series_env(a, n, ctx, env)?.mul(&series_env(b, n, ctx, env)?)?,
        Expr::Div(a, b) => series_env(a, n, ctx, env)?.div(&series_env(b, n, ctx, env)?)?,
        Expr::Pow(a, k) => {
            let base = series_env(a, n, ctx, env)?;
            let alpha = const_value(k, env)?;
            if alpha.fract() == 0.0 && alpha.abs() < 1e9 {
                let k = alpha as i64;
                match monomial_power(&base, k) {
                    Some(s) => s,
                    None => base.powi(k)?,
                }
            } else {
                base.pow_real(alpha)?
            }
        }
        Expr::Exp(a) => series_env(a, n, ctx, env)?.exp(),
        Expr::Log(a) => series_env(a, n, ctx, env)?.log()?,
        Expr::D(a) => series_env(a, n, ctx, env)?.z_derivative(),
        Expr::Prod(b) => fold(b, n, ctx, env, true)?,
        Expr::Sum(b) => fold(b, n, ctx, env, false)?,
        Expr::Builtin(b) => builtin_series(ctx.get(b), n, 0)?,
        Expr::Diff(b, k) => builtin_series(ctx.get(b), n, *k)?,
    })
}

fn fold(b: &Bounds, n: usize, ctx: &Context, env: &mut Env, prod: bool) -> Result<TruncatedSeries> {
    let mut acc = if prod { TruncatedSeries::one(n) } else { TruncatedSeries::zero(n) };
    let last = match b.hi {
        Some(h) => h,
        // factor k is 1 + O(z^k), so factors beyond n leave the truncation unchanged
        None => (n as i64).max(b.lo),
    };
    for k in b.lo..=last {
        env.push((b.var.clone(), k));
        let f = series_env(&b.body, n, ctx, env);
        env.pop();
        let f = f?;
        if b.hi.is_none() {
            let rest = if prod { f.sub(&TruncatedSeries::one(n))? } else { f.clone() };
            if let Some(v) = rest.valuation() {
                if (v as i64) < k {
                    let what = if prod { "factor" } else { "term" };
                    let shape = if prod { "1 + O(z^k)" } else { "O(z^k)" };
                    return Err(Error::Evaluation(format!(
                        "infinite {} {what} at {}={k} is not {shape}",
                        if prod { "product" } else { "sum" },
                        b.var
                    )));
                }
            }
        }
        acc = if prod { f.mul(&acc)? } else { acc.add(&f)? };
    }
    Ok(acc)
}

fn builtin_series(g: &crate::gf::GenFunction, n: usize, deriv: u32) -> Result<TruncatedSeries> {
    let need = n as u64 + deriv as u64;
    if let Some(k) = g.oracle.known_up_to() {
        if k < need {
            return Err(Error::Precondition(format!("{} coefficients are tabulated only up to {k}", g.name)));
        }
    }
    let coeffs: Vec<SignedLog> = (0..=n as u64)
        .map(|i| {
            let m = i + deriv as u64;
            let ln = g.ln_coeff(m) + crate::gf::sums::ln_falling(m, deriv);
            if ln.is_finite() { SignedLog::new(g.oracle.sign(m), ln) } else { SignedLog::ZERO }
        })
        .collect();
    Ok(TruncatedSeries::from_coeffs(n, &coeffs))
}

const MAX_EXACT_DEGREE: usize = 20_000;

/// Exact rational coefficients when `e` is a polynomial built from
/// literals, `z`, sums, products, constant divisors and natural powers.
pub fn exact_poly(e: &Expr) -> Option<Vec<BigRational>> {
    exact_env(e, &mut Vec::new())
}

fn trim(mut p: Vec<BigRational>) -> Vec<BigRational> {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn padd(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let z = BigRational::zero();
    trim((0..n).map(|i| a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z)).collect())
}

fn pmul(a: &[BigRational], b: &[BigRational]) -> Option<Vec<BigRational>> {
    if a.len() + b.len() > MAX_EXACT_DEGREE {
        return None;
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    Some(trim(out))
}

fn exact_env(e: &Expr, env: &mut Env) -> Option<Vec<BigRational>> {
    Some(match e {
        Expr::Num(x) => vec![rational_of(*x)],
        Expr::Index(_) => vec![rational_of(const_value(e, env).ok()?)],
        Expr::Z => vec![BigRational::zero(), BigRational::one()],
        Expr::Neg(a) => exact_env(a, env)?.into_iter().map(|c| -c).collect(),
        Expr::Add(a, b) => padd(&exact_env(a, env)?, &exact_env(b, env)?),
        Expr::Sub(a, b) => {
            let nb: Vec<BigRational> = exact_env(b, env)?.into_iter().map(|c| -c).collect();
            padd(&exact_env(a, env)?, &nb)
        }
        Expr::Mul(a, b) => pmul(&exact_env(a, env)?, &exact_env(b, env)?)?,
        Expr::Div(a, b) => {
            let d = exact_env(b, env)?;
            if d.len() != 1 || d[0].is_zero() {
                return None;
            }
            exact_env(a, env)?.into_iter().map(|c| c / &d[0]).collect()
        }
        Expr::Pow(a, k) => {
            let alpha = const_value(k, env).ok()?;
            if alpha.fract() != 0.0 || alpha < 0.0 {
                return None;
            }
            let base = exact_env(a, env)?;
            let mut out = vec![BigRational::one()];
            for _ in 0..alpha as usize {
                out = pmul(&out, &base)?;
            }
            out
        }
        Expr::D(a) => {
            let p = exact_env(a, env)?;
            trim(p.iter().enumerate().map(|(i, c)| c * BigRational::from_integer(BigInt::from(i))).collect())
        }
        Expr::Prod(b) | Expr::Sum(b) => {
            let hi = b.hi?;
            let prod = matches!(e, Expr::Prod(_));
            let mut acc = vec![if prod { BigRational::one() } else { BigRational::zero() }];
            for k in b.lo..=hi {
                env.push((b.var.clone(), k));
                let f = exact_env(&b.body, env);
                env.pop();
                let f = f?;
                acc = if prod { pmul(&acc, &f)? } else { padd(&acc, &f) };
            }
            acc
        }
        Expr::Exp(_) | Expr::Log(_) | Expr::Builtin(_) | Expr::Diff(..) => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(rational_of(0.1), BigRational::new(1.into(), 10.into()));
        assert_eq!(rational_of(2.0), BigRational::from_integer(2.into()));
    }

    #[test]
    fn polynomial_route() {
        let p = exact_poly(&parse("(1+z)^3/2 - 0.5").unwrap()).unwrap();
        let want: Vec<BigRational> =
            [0, 3, 3, 1].iter().map(|&c| BigRational::new(BigInt::from(c), BigInt::from(2))).collect();
        assert_eq!(p, want);
        assert!(exact_poly(&parse("exp(z)").unwrap()).is_none());
        assert!(exact_poly(&parse("1/(1-z)").unwrap()).is_none());
    }

    #[test]
    fn rejects_slow_products() {
        let e = parse("prod(k,1,inf,1+z/k^2)").unwrap();
        let ctx = Context::for_expr(&e).unwrap();
        assert!(series_of(&e, 10, &ctx).is_err());
    }
}
