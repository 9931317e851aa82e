//! Truncated power series with coefficients in signed log space.
//!
//! Each coefficient carries a companion noise scale: the log of the absolute
//! sum of the terms that produced it, times a small relative epsilon.  A
//! coefficient whose magnitude falls below its noise scale is the residue of
//! an exact cancellation and is stored as an exact zero.  This keeps, for
//! example, `(1 - z) * sum z^n` equal to `1` rather than `1 + O(1e-17) z^n`.

use super::signed_log::{LogSum, SignedLog};
use crate::error::{Error, Result};

const NOISE_EPS_LN: f64 = -29.933606208922594; // ln(1e-13)

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<SignedLog>,
    noise: Vec<f64>,
}

/// Binary series operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineOp {
    Add,
    Mul,
}

/// Transcendental series operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TranscendOp {
    Exp,
    Log,
    PowReal(f64),
}

impl TruncatedSeries {
    /// The zero series of truncation order `n` (n + 1 coefficients).
    pub fn zero(order: usize) -> Self {
        assert!(order >= 1, "truncation order must be at least 1");
        TruncatedSeries {
            coeffs: vec![SignedLog::ZERO; order + 1],
            noise: vec![f64::NEG_INFINITY; order + 1],
        }
    }

    pub fn constant(order: usize, c: SignedLog) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    pub fn one(order: usize) -> Self {
        Self::constant(order, SignedLog::ONE)
    }

    /// The monomial `z^k` (zero if `k` exceeds the order).
    pub fn monomial(order: usize, k: usize) -> Self {
        let mut s = Self::zero(order);
        if k <= order {
            s.coeffs[k] = SignedLog::ONE;
        }
        s
    }

    pub fn from_coeffs(order: usize, coeffs: &[SignedLog]) -> Self {
        let mut s = Self::zero(order);
        for (i, c) in coeffs.iter().take(order + 1).enumerate() {
            s.coeffs[i] = *c;
        }
        s
    }

    pub fn from_f64(order: usize, coeffs: &[f64]) -> Self {
        let v: Vec<SignedLog> = coeffs.iter().map(|&x| SignedLog::from_f64(x)).collect();
        Self::from_coeffs(order, &v)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> SignedLog {
        self.coeffs.get(n).copied().unwrap_or(SignedLog::ZERO)
    }

    pub fn coeffs(&self) -> &[SignedLog] {
        &self.coeffs
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64()).collect()
    }

    /// Index of the lowest nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    fn set(&mut self, n: usize, acc: &LogSum) {
        let v = acc.value();
        let noise = acc.ln_abs_sum() + NOISE_EPS_LN;
        self.noise[n] = noise;
        self.coeffs[n] = if v.is_zero() || v.ln_mag <= noise { SignedLog::ZERO } else { v };
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() {
            Err(Error::OrderMismatch(self.order(), other.order()))
        } else {
            Ok(())
        }
    }

    pub fn combine(&self, other: &Self, op: CombineOp) -> Result<Self> {
        match op {
            CombineOp::Add => self.add(other),
            CombineOp::Mul => self.mul(other),
        }
    }

    pub fn transcend(&self, op: TranscendOp) -> Result<Self> {
        match op {
            TranscendOp::Exp => Ok(self.exp()),
            TranscendOp::Log => self.log(),
            TranscendOp::PowReal(a) => self.pow_real(a),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zero(self.order());
        for n in 0..=self.order() {
            let mut acc = LogSum::new();
            acc.push(self.coeffs[n]);
            acc.push(other.coeffs[n]);
            out.set(n, &acc);
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c = -*c;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: SignedLog) -> Self {
        let mut out = self.clone();
        for x in out.coeffs.iter_mut() {
            *x = *x * c;
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let n_max = self.order();
        let a_nz: Vec<usize> = (0..=n_max).filter(|&i| !self.coeffs[i].is_zero()).collect();
        let mut out = Self::zero(n_max);
        for n in 0..=n_max {
            let mut acc = LogSum::new();
            for &i in a_nz.iter().take_while(|&&i| i <= n) {
                let b = other.coeffs[n - i];
                if !b.is_zero() {
                    acc.push(self.coeffs[i] * b);
                }
            }
            out.set(n, &acc);
        }
        Ok(out)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let b0 = other.coeffs[0];
        if b0.is_zero() {
            return Err(Error::DivisionByZeroConstant);
        }
        let n_max = self.order();
        let b_nz: Vec<usize> = (1..=n_max).filter(|&i| !other.coeffs[i].is_zero()).collect();
        let mut out = Self::zero(n_max);
        for n in 0..=n_max {
            let mut acc = LogSum::new();
            acc.push(self.coeffs[n]);
            for &k in b_nz.iter().take_while(|&&k| k <= n) {
                let c = out.coeffs[n - k];
                if !c.is_zero() {
                    acc.push(-(other.coeffs[k] * c));
                }
            }
            let v = acc.value();
            let noise = acc.ln_abs_sum() + NOISE_EPS_LN;
            out.noise[n] = noise - b0.ln_mag;
            out.coeffs[n] = if v.is_zero() || v.ln_mag <= noise { SignedLog::ZERO } else { v / b0 };
        }
        Ok(out)
    }

    /// `exp(h)`: `g_0 = e^{h_0}`, `n g_n = sum_{k=1}^n k h_k g_{n-k}`.
    pub fn exp(&self) -> Self {
        let n_max = self.order();
        let h0 = self.coeffs[0].to_f64();
        let h_nz: Vec<usize> = (1..=n_max).filter(|&i| !self.coeffs[i].is_zero()).collect();
        let mut out = Self::zero(n_max);
        out.coeffs[0] = SignedLog::from_ln(h0);
        for n in 1..=n_max {
            let mut acc = LogSum::new();
            for &k in h_nz.iter().take_while(|&&k| k <= n) {
                let g = out.coeffs[n - k];
                if !g.is_zero() {
                    acc.push((self.coeffs[k] * g).scale_ln((k as f64).ln()));
                }
            }
            let v = acc.value();
            let noise = acc.ln_abs_sum() + NOISE_EPS_LN;
            let ln_n = (n as f64).ln();
            out.noise[n] = noise - ln_n;
            out.coeffs[n] = if v.is_zero() || v.ln_mag <= noise { SignedLog::ZERO } else { v.scale_ln(-ln_n) };
        }
        out
    }

    /// `log(h)` for `h_0 > 0`.
    pub fn log(&self) -> Result<Self> {
        let h0 = self.coeffs[0];
        if h0.sign != 1 {
            return Err(Error::NonPositiveConstant("log"));
        }
        let n_max = self.order();
        let mut out = Self::zero(n_max);
        out.coeffs[0] = SignedLog::from_f64(h0.ln_mag);
        for n in 1..=n_max {
            // n h_n = sum_{k=1}^{n} k g_k h_{n-k}
            let mut acc = LogSum::new();
            acc.push(self.coeffs[n].scale_ln((n as f64).ln()));
            for k in 1..n {
                let (g, h) = (out.coeffs[k], self.coeffs[n - k]);
                if !g.is_zero() && !h.is_zero() {
                    acc.push(-(g * h).scale_ln((k as f64).ln()));
                }
            }
            let v = acc.value();
            let noise = acc.ln_abs_sum() + NOISE_EPS_LN;
            let shift = -(n as f64).ln() - h0.ln_mag;
            out.noise[n] = noise + shift;
            out.coeffs[n] = if v.is_zero() || v.ln_mag <= noise { SignedLog::ZERO } else { v.scale_ln(shift) };
        }
        Ok(out)
    }

    /// `h^alpha` for `h_0 > 0` via `n h_0 g_n = sum_{k=1}^n ((alpha+1)k - n) h_k g_{n-k}`.
    pub fn pow_real(&self, alpha: f64) -> Result<Self> {
        let h0 = self.coeffs[0];
        if h0.sign != 1 {
            return Err(Error::NonPositiveConstant("pow_real"));
        }
        let n_max = self.order();
        let h_nz: Vec<usize> = (1..=n_max).filter(|&i| !self.coeffs[i].is_zero()).collect();
        let mut out = Self::zero(n_max);
        out.coeffs[0] = SignedLog::from_ln(alpha * h0.ln_mag);
        for n in 1..=n_max {
            let mut acc = LogSum::new();
            for &k in h_nz.iter().take_while(|&&k| k <= n) {
                let g = out.coeffs[n - k];
                let w = (alpha + 1.0) * k as f64 - n as f64;
                if !g.is_zero() && w != 0.0 {
                    acc.push(self.coeffs[k] * g * SignedLog::from_f64(w));
                }
            }
            let v = acc.value();
            let noise = acc.ln_abs_sum() + NOISE_EPS_LN;
            let shift = -(n as f64).ln() - h0.ln_mag;
            out.noise[n] = noise + shift;
            out.coeffs[n] = if v.is_zero() || v.ln_mag <= noise { SignedLog::ZERO } else { v.scale_ln(shift) };
        }
        Ok(out)
    }

    /// Integer power by repeated squaring; negative powers go through `div`.
    pub fn powi(&self, k: i64) -> Result<Self> {
        let n = self.order();
        if k < 0 {
            return Self::one(n).div(&self.powi(-k)?);
        }
        let mut result = Self::one(n);
        let mut base = self.clone();
        let mut e = k as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// `h(z^k)`.
    pub fn substitute_power(&self, k: usize) -> Self {
        assert!(k >= 1);
        let n_max = self.order();
        let mut out = Self::zero(n_max);
        for i in 0..=n_max / k {
            out.coeffs[i * k] = self.coeffs[i];
            out.noise[i * k] = self.noise[i];
        }
        out
    }

    /// The transform `z h'(z)`, i.e. coefficients `n h_n`.
    pub fn z_derivative(&self) -> Self {
        let mut out = Self::zero(self.order());
        for n in 1..=self.order() {
            out.coeffs[n] = self.coeffs[n].scale_ln((n as f64).ln());
            out.noise[n] = self.noise[n] + (n as f64).ln();
        }
        out
    }

    /// Ordinary derivative, truncated at the same order (top coefficient is dropped).
    pub fn derivative(&self) -> Self {
        let mut out = Self::zero(self.order());
        for n in 1..=self.order() {
            out.coeffs[n - 1] = self.coeffs[n].scale_ln((n as f64).ln());
        }
        out
    }

    /// Evaluate the truncated polynomial at a real point in log space.
    pub fn eval(&self, t: f64) -> SignedLog {
        let mut acc = LogSum::new();
        let lt = SignedLog::from_f64(t);
        for (n, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc.push(*c * lt.powi(n as i32));
            }
        }
        acc.value()
    }
}
