//! Arithmetic on jets: log-space value plus tilted central moments.
//!
//! A jet of `V(e^u)` stores `ln|V|`, the mean `d/du ln V` and the central
//! moments of the (formal) tilted law, which compose like moments of
//! independent sums under products and like mixtures under sums.

use crate::error::{Error, Result};
use crate::gf::signed_log::SignedLog;
use crate::gf::Jet;

fn binom(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

pub fn constant(x: SignedLog, order: usize) -> Jet {
    let mut central = vec![0.0; order.max(1) + 1];
    central[0] = 1.0;
    Jet { sign: x.sign, ln_mag: x.ln_mag, mean: 0.0, central }
}

/// The jet of `z` at `t = e^u`.
pub fn variable(t: f64, order: usize) -> Jet {
    let mut j = constant(SignedLog::from_f64(t), order);
    j.mean = 1.0;
    j
}

fn common_order(a: &Jet, b: &Jet) -> usize {
    a.order().min(b.order())
}

/// Raw moments `E Y^j` about zero.
fn raw_moments(j: &Jet) -> Vec<f64> {
    let k = j.order();
    (0..=k)
        .map(|n| (0..=n).map(|i| binom(n, i) * j.central[i] * j.mean.powi((n - i) as i32)).sum())
        .collect()
}

/// Central moments from raw moments `r[0..]` with `r[0] = 1`.
fn central_from_raw(r: &[f64]) -> (f64, Vec<f64>) {
    let mu = r.get(1).copied().unwrap_or(0.0);
    let c = (0..r.len())
        .map(|n| (0..=n).map(|i| binom(n, i) * r[i] * (-mu).powi((n - i) as i32)).sum())
        .collect::<Vec<f64>>();
    let mut c = c;
    if c.len() > 1 {
        c[1] = 0.0;
    }
    (mu, c)
}

pub fn mul(a: &Jet, b: &Jet) -> Jet {
    let k = common_order(a, b);
    if a.sign == 0 || b.sign == 0 {
        return constant(SignedLog::ZERO, k);
    }
    let central = (0..=k)
        .map(|n| (0..=n).map(|i| binom(n, i) * a.central[i] * b.central[n - i]).sum())
        .collect();
    Jet { sign: a.sign * b.sign, ln_mag: a.ln_mag + b.ln_mag, mean: a.mean + b.mean, central }
}

/// `V^alpha` for real `alpha`; non-integer powers need `V > 0`.
pub fn pow(a: &Jet, alpha: f64) -> Result<Jet> {
    let integer = alpha.fract() == 0.0;
    if a.sign == 0 {
        if alpha > 0.0 {
            return Ok(constant(SignedLog::ZERO, a.order()));
        }
        return Err(Error::DivisionByZeroConstant);
    }
    if !integer && a.sign < 0 {
        return Err(Error::Evaluation(format!("real power {alpha} of a negative value")));
    }
    if alpha == 0.0 {
        return Ok(constant(SignedLog::ONE, a.order()));
    }
    let sign = if integer && (alpha as i64) % 2 != 0 { a.sign } else { 1 };
    let kappa: Vec<f64> = a.cumulants().iter().map(|x| x * alpha).collect();
    Ok(Jet::from_cumulants(sign, alpha * a.ln_mag, &kappa))
}

pub fn recip(a: &Jet) -> Result<Jet> {
    pow(a, -1.0)
}

pub fn neg(a: &Jet) -> Jet {
    let mut j = a.clone();
    j.sign = -j.sign;
    j
}

/// `A + B`, viewing the tilted law of the sum as a signed mixture.
pub fn add(a: &Jet, b: &Jet) -> Result<Jet> {
    let k = common_order(a, b);
    if a.sign == 0 {
        return Ok(b.clone().truncate(k));
    }
    if b.sign == 0 {
        return Ok(a.clone().truncate(k));
    }
    let s = SignedLog::new(a.sign, a.ln_mag).add(SignedLog::new(b.sign, b.ln_mag));
    if s.is_zero() {
        return Err(Error::Evaluation("sum cancels to zero".into()));
    }
    let wa = (a.sign * s.sign) as f64 * (a.ln_mag - s.ln_mag).exp();
    let wb = (b.sign * s.sign) as f64 * (b.ln_mag - s.ln_mag).exp();
    // Weights may be huge with opposite signs; every place where wa + wb = 1
    // would cancel is rewritten through e = wa wb and wb - wa.
    let delta = a.mean - b.mean;
    let mean = b.mean + wa * delta;
    let e = wa * wb;
    let diff = wb - wa;
    let pure = |j: usize| -> f64 {
        // wb^{j-1} + (-1)^j wa^{j-1}
        match j {
            2 => 1.0,
            3 => diff,
            4 => 1.0 - 3.0 * e,
            5 => diff * (1.0 - 2.0 * e),
            6 => 1.0 - 5.0 * e + 5.0 * e * e,
            _ => unreachable!("jet order is at most 6"),
        }
    };
    let mut central = vec![0.0; k + 1];
    central[0] = 1.0;
    for (j, slot) in central.iter_mut().enumerate().skip(2) {
        let mut acc = wa * a.central[j] + wb * b.central[j] + e * delta.powi(j as i32) * pure(j);
        for i in 2..j {
            let r = j - i;
            let mix = a.central[i] * wb.powi(r as i32 - 1) + b.central[i] * if r % 2 == 0 { 1.0 } else { -1.0 } * wa.powi(r as i32 - 1);
            acc += binom(j, i) * e * delta.powi(r as i32) * mix;
        }
        *slot = acc;
    }
    Ok(Jet { sign: s.sign, ln_mag: s.ln_mag, mean, central })
}

pub fn sub(a: &Jet, b: &Jet) -> Result<Jet> {
    add(a, &neg(b))
}

/// `exp(A)`: the u-derivatives of `A` are `A` times its raw moments.
pub fn exp(a: &Jet) -> Result<Jet> {
    let k = a.order();
    if a.sign == 0 {
        return Ok(constant(SignedLog::ONE, k));
    }
    let x = SignedLog::new(a.sign, a.ln_mag).to_f64();
    if !x.is_finite() {
        return Err(Error::Evaluation("exponent overflows".into()));
    }
    let raw = raw_moments(a);
    let kappa: Vec<f64> = raw.iter().enumerate().map(|(i, r)| if i == 0 { 0.0 } else { x * r }).collect();
    Ok(Jet::from_cumulants(1, x, &kappa))
}

/// `log(A)` for `A > 0`: its u-derivatives are the cumulants of `A`.
pub fn log(a: &Jet) -> Result<Jet> {
    if a.sign <= 0 {
        return Err(Error::Evaluation("logarithm of a nonpositive value".into()));
    }
    let x = a.ln_mag;
    if x == 0.0 {
        return Err(Error::Evaluation("logarithm vanishes at this point".into()));
    }
    let kappa = a.cumulants();
    let raw: Vec<f64> = kappa.iter().enumerate().map(|(i, c)| if i == 0 { 1.0 } else { c / x }).collect();
    let (mean, central) = central_from_raw(&raw);
    Ok(Jet { sign: if x > 0.0 { 1 } else { -1 }, ln_mag: x.abs().ln(), mean, central })
}

/// `z V'(z)`: size-biasing the tilted law; loses one order.
pub fn zderiv(a: &Jet) -> Result<Jet> {
    let k = a.order();
    if a.sign == 0 {
        return Ok(constant(SignedLog::ZERO, k.saturating_sub(1)));
    }
    if a.mean == 0.0 {
        return Ok(constant(SignedLog::ZERO, k.saturating_sub(1)));
    }
    if k < 1 {
        return Err(Error::Evaluation("jet order too low for D".into()));
    }
    let mu = a.mean;
    let e: Vec<f64> = (0..k).map(|j| a.central[j] + a.central[j + 1] / mu).collect();
    let delta = e.get(1).copied().unwrap_or(0.0);
    let mut central: Vec<f64> = (0..k)
        .map(|n| (0..=n).map(|i| binom(n, i) * e[i] * (-delta).powi((n - i) as i32)).sum())
        .collect();
    if central.len() < 2 {
        central.push(0.0);
    }
    central[1] = 0.0;
    let sign = a.sign * if mu > 0.0 { 1 } else { -1 };
    Ok(Jet { sign, ln_mag: a.ln_mag + mu.abs().ln(), mean: mu + delta, central })
}

/// Size of the jet's contribution, used to stop infinite sums and products.
pub fn negligible_factor(f: &Jet, acc: &Jet, tol: f64) -> bool {
    if f.sign < 0 {
        return false;
    }
    let mut ok = f.ln_mag.abs() <= tol * (1.0 + acc.ln_mag.abs()) && f.mean.abs() <= tol * (1.0 + acc.mean.abs());
    for j in 2..=f.order().min(acc.order()) {
        ok &= f.central[j].abs() <= tol * (1.0 + acc.central[j].abs());
    }
    ok
}
