//! Exact rational statistics for polynomial families.
//!
//! With rational coefficients and a rational parameter every quantity of a
//! polynomial family is rational, so equality cases can be checked without
//! rounding.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq)]
pub struct ExactStats {
    pub f: BigRational,
    pub mean: BigRational,
    pub var: BigRational,
}

/// `f(t)`, mean and variance of `X_t` for `f = sum a_n z^n`.
pub fn exact_stats(poly: &[BigRational], t: &BigRational) -> ExactStats {
    let mut s0 = BigRational::zero();
    let mut s1 = BigRational::zero();
    let mut s2 = BigRational::zero();
    let mut tn = BigRational::one();
    for (n, a) in poly.iter().enumerate() {
        let w = a * &tn;
        let nn = BigRational::from_integer(BigInt::from(n));
        s1 += &w * &nn;
        s2 += &w * &nn * &nn;
        s0 += w;
        tn *= t;
    }
    let mean = &s1 / &s0;
    let var = &s2 / &s0 - &mean * &mean;
    ExactStats { f: s0, mean, var }
}

/// Decimal expansion of `x` truncated to `digits` fractional digits.
pub fn decimal(x: &BigRational, digits: usize) -> String {
    let neg = x.is_negative();
    let a = x.abs();
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = (a.numer() * &scale).div_floor(a.denom());
    let (int, frac) = scaled.div_rem(&scale);
    let frac = frac.to_string();
    let pad = "0".repeat(digits - frac.len().min(digits));
    format!("{}{}.{}{}", if neg { "-" } else { "" }, int, pad, frac)
}

/// Exact value of a double.
pub fn rational_of_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}
