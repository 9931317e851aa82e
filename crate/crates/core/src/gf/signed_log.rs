//! Real numbers stored as a sign and the logarithm of the magnitude.
//!
//! Values such as `a_n t^n` or `f(t)` routinely leave the range of `f64`;
//! keeping `ln |x|` instead lets products and quotients stay exact to
//! rounding and reduces sums to a stable log-sum-exp.

use std::cmp::Ordering;
use std::ops::{Div, Mul, Neg};

use serde::Serialize;

/// `sign * exp(ln_mag)`, with `sign == 0` exactly when `ln_mag == -inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignedLog {
    pub sign: i8,
    pub ln_mag: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog { sign: 0, ln_mag: f64::NEG_INFINITY };
    pub const ONE: SignedLog = SignedLog { sign: 1, ln_mag: 0.0 };

    pub fn new(sign: i8, ln_mag: f64) -> Self {
        if sign == 0 || ln_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            SignedLog { sign: sign.signum(), ln_mag }
        }
    }

    /// Positive value `exp(ln)`.
    pub fn from_ln(ln: f64) -> Self {
        Self::new(1, ln)
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            SignedLog { sign: if x > 0.0 { 1 } else { -1 }, ln_mag: x.abs().ln() }
        }
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * self.ln_mag.exp()
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        if self.sign == 0 {
            self
        } else {
            SignedLog { sign: 1, ln_mag: self.ln_mag }
        }
    }

    pub fn recip(self) -> Self {
        assert!(self.sign != 0, "reciprocal of zero");
        SignedLog { sign: self.sign, ln_mag: -self.ln_mag }
    }

    /// Multiply by the positive real `exp(ln_factor)`.
    pub fn scale_ln(self, ln_factor: f64) -> Self {
        Self::new(self.sign, self.ln_mag + ln_factor)
    }

    pub fn powi(self, k: i32) -> Self {
        if k == 0 {
            return Self::ONE;
        }
        if self.sign == 0 {
            assert!(k > 0, "negative power of zero");
            return Self::ZERO;
        }
        let sign = if self.sign < 0 && k % 2 != 0 { -1 } else { 1 };
        SignedLog { sign, ln_mag: self.ln_mag * k as f64 }
    }

    pub fn add(self, other: Self) -> Self {
        let mut acc = LogSum::new();
        acc.push(self);
        acc.push(other);
        acc.value()
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(-other)
    }

    /// Magnitude comparison by sign first, then by log magnitude.
    pub fn cmp_value(self, other: Self) -> Ordering {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Ordering::Equal,
                1 => self.ln_mag.total_cmp(&other.ln_mag),
                _ => other.ln_mag.total_cmp(&self.ln_mag),
            },
            o => o,
        }
    }
}

impl Mul for SignedLog {
    type Output = SignedLog;
    fn mul(self, rhs: SignedLog) -> SignedLog {
        if self.sign == 0 || rhs.sign == 0 {
            return SignedLog::ZERO;
        }
        SignedLog { sign: self.sign * rhs.sign, ln_mag: self.ln_mag + rhs.ln_mag }
    }
}

impl Div for SignedLog {
    type Output = SignedLog;
    fn div(self, rhs: SignedLog) -> SignedLog {
        self * rhs.recip()
    }
}

impl Neg for SignedLog {
    type Output = SignedLog;
    fn neg(self) -> SignedLog {
        SignedLog { sign: -self.sign, ln_mag: self.ln_mag }
    }
}

/// `ln(exp(a) + exp(b))`.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// `ln(exp(a) - exp(b))` for `a >= b`.
pub fn log_sub(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    debug_assert!(a >= b);
    if a == b {
        return f64::NEG_INFINITY;
    }
    a + (-(b - a).exp()).ln_1p()
}

/// Running signed sum in log space with a rescaled, compensated accumulator.
///
/// The accumulator keeps `sum / exp(max)` where `max` is the largest log
/// magnitude seen so far; a new maximum rescales the partial sum once.  The
/// absolute sum is tracked alongside so callers can tell cancellation noise
/// from a genuinely small result.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    max: f64,
    sum: f64,
    comp: f64,
    abs_sum: f64,
    count: usize,
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSum {
    pub fn new() -> Self {
        LogSum { max: f64::NEG_INFINITY, sum: 0.0, comp: 0.0, abs_sum: 0.0, count: 0 }
    }

    pub fn push(&mut self, v: SignedLog) {
        if v.sign == 0 {
            return;
        }
        self.count += 1;
        if v.ln_mag > self.max {
            if self.max > f64::NEG_INFINITY {
                let s = (self.max - v.ln_mag).exp();
                self.sum *= s;
                self.comp *= s;
                self.abs_sum *= s;
            }
            self.max = v.ln_mag;
        }
        let x = v.sign as f64 * (v.ln_mag - self.max).exp();
        // Neumaier compensation
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs_sum += x.abs();
    }

    pub fn push_ln(&mut self, ln: f64) {
        self.push(SignedLog::from_ln(ln));
    }

    pub fn value(&self) -> SignedLog {
        if self.max == f64::NEG_INFINITY {
            return SignedLog::ZERO;
        }
        SignedLog::from_f64(self.sum + self.comp).scale_ln(self.max)
    }

    /// ln of the sum of absolute values of the pushed terms.
    pub fn ln_abs_sum(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.abs_sum.ln()
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Largest log magnitude pushed so far.
    pub fn ln_max(&self) -> f64 {
        self.max
    }
}

/// Log of a sum of positive terms given by their logs.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let mut acc = LogSum::new();
    for &x in xs {
        acc.push_ln(x);
    }
    acc.value().ln_mag
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        if a == b {
            0.0
        } else {
            (a - b).abs() / a.abs().max(b.abs())
        }
    }

    #[test]
    fn zero_invariant() {
        assert_eq!(SignedLog::from_f64(0.0), SignedLog::ZERO);
        assert_eq!(SignedLog::new(1, f64::NEG_INFINITY).sign, 0);
        assert_eq!(SignedLog::new(0, 3.0).ln_mag, f64::NEG_INFINITY);
    }

    #[test]
    fn huge_magnitudes_do_not_overflow() {
        let a = SignedLog::from_ln(5000.0);
        let b = SignedLog::from_ln(4999.0);
        let s = a.add(b);
        assert!((s.ln_mag - (5000.0 + (-1.0f64).exp().ln_1p())).abs() < 1e-12);
        let d = a.sub(a);
        assert!(d.is_zero());
    }

    #[test]
    fn log_add_matches_direct() {
        assert!((log_add(0.5, 2.0) - 2.201413277982752409499483).abs() < 1e-15);
        assert!((log_sub(2.0f64.ln(), 0.0) - 0.0).abs() < 1e-15);
    }

    #[test]
    fn logsum_rescales() {
        let mut acc = LogSum::new();
        acc.push_ln(-1000.0);
        acc.push_ln(1000.0);
        acc.push_ln(-1000.0);
        assert!((acc.value().ln_mag - 1000.0).abs() < 1e-12);
        assert_eq!(acc.count(), 3);
    }

    proptest! {
        #[test]
        fn arithmetic_matches_linear(ea in -300.0f64..300.0, eb in -300.0f64..300.0,
                                     ma in 1.0f64..10.0, mb in 1.0f64..10.0,
                                     sa in prop::bool::ANY, sb in prop::bool::ANY) {
            let x = if sa { ma } else { -ma } * 10f64.powf(ea);
            let y = if sb { mb } else { -mb } * 10f64.powf(eb);
            let (lx, ly) = (SignedLog::from_f64(x), SignedLog::from_f64(y));
            let p = lx * ly;
            prop_assert_eq!(p.sign as f64, (x * y).signum());
            prop_assert!((p.ln_mag - (x.abs().ln() + y.abs().ln())).abs() < 1e-12 * p.ln_mag.abs().max(1.0));
            let q = lx / ly;
            prop_assert!((q.ln_mag - (x.abs().ln() - y.abs().ln())).abs() < 1e-12 * q.ln_mag.abs().max(1.0));
            if (x * y).is_finite() && x * y != 0.0 {
                prop_assert!(rel(p.to_f64(), x * y) < 1e-12);
            }
            let s = x + y;
            let ls = lx.add(ly).to_f64();
            // cancellation limits the achievable relative accuracy
            let scale = x.abs().max(y.abs());
            prop_assert!((ls - s).abs() <= 1e-13 * scale);
        }
    }
}
