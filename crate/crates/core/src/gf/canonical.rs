//! Genus-zero canonical products `prod (1 + z/b_k)^{mult}`.

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::Serialize;

use super::genfn::{CoeffOracle, ClassKStatus, Evaluator, GenFunction, Jet, MfClass, Radius};
use super::series::TruncatedSeries;
use super::signed_log::{log_add, SignedLog};
use super::special::hurwitz_zeta_scaled;
use crate::error::{Error, Result};

/// Rule producing the zero magnitudes `b_k`, `k >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ZeroRule {
    /// Explicit finite list, strictly increasing.
    List(Vec<f64>),
    /// `b_k = c r^k`
    Geometric { c: f64, r: f64 },
    /// `b_k = c k^a`
    Power { a: f64, c: f64 },
    /// `b_k = e^{e^k}`
    DoubleExp,
    /// `b_k = k!`
    Factorial,
    /// `b_k = e^{k^2}`
    ExpSquare,
}

/// Outcome of the convergence check on `sum mult / b_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Convergence {
    Verified(String),
    Unverified(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalProductSpec {
    pub rule: ZeroRule,
    /// Constant multiplicity of every zero.
    pub multiplicity: u32,
}

/// `(ln f, m_f, sigma_f^2, N(t))` with the achieved tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalValues {
    pub ln_f: f64,
    pub mean: f64,
    pub var: f64,
    pub count: u64,
    pub tail_bound: f64,
}

const DIRECT_LIMIT: u64 = 20_000_000;

impl CanonicalProductSpec {
    pub fn new(rule: ZeroRule) -> Result<Self> {
        Self::with_multiplicity(rule, 1)
    }

    pub fn with_multiplicity(rule: ZeroRule, multiplicity: u32) -> Result<Self> {
        if multiplicity == 0 {
            return Err(Error::Precondition("multiplicity must be positive".into()));
        }
        match &rule {
            ZeroRule::List(b) => {
                if b.is_empty() || b[0] <= 0.0 || b.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Precondition("zero list must be positive and strictly increasing".into()));
                }
            }
            ZeroRule::Geometric { c, r } => {
                if *c <= 0.0 || *r <= 1.0 {
                    return Err(Error::Precondition("geometric rule needs c > 0, r > 1".into()));
                }
            }
            ZeroRule::Power { a, c } => {
                if *c <= 0.0 || *a <= 1.0 {
                    return Err(Error::Precondition("power rule needs c > 0 and a > 1 for convergence".into()));
                }
            }
            _ => {}
        }
        Ok(CanonicalProductSpec { rule, multiplicity })
    }

    pub fn ln_b(&self, k: u64) -> f64 {
        let kf = k as f64;
        match &self.rule {
            ZeroRule::List(b) => b.get(k as usize - 1).map_or(f64::INFINITY, |x| x.ln()),
            ZeroRule::Geometric { c, r } => c.ln() + kf * r.ln(),
            ZeroRule::Power { a, c } => c.ln() + a * kf.ln(),
            ZeroRule::DoubleExp => kf.exp(),
            ZeroRule::Factorial => super::special::ln_factorial(k),
            ZeroRule::ExpSquare => kf * kf,
        }
    }

    pub fn b(&self, k: u64) -> f64 {
        self.ln_b(k).exp()
    }

    /// Number of distinct zeros, when finite.
    pub fn zero_count(&self) -> Option<u64> {
        match &self.rule {
            ZeroRule::List(b) => Some(b.len() as u64),
            _ => None,
        }
    }

    /// Lower bound on `b_{k+1}/b_k` valid for all `k >= k0` (geometric-type rules).
    fn ratio_bound(&self, k0: u64) -> Option<f64> {
        match &self.rule {
            ZeroRule::Geometric { r, .. } => Some(*r),
            ZeroRule::DoubleExp => Some((((k0 + 1) as f64).exp() - (k0 as f64).exp()).exp()),
            ZeroRule::Factorial => Some((k0 + 1) as f64),
            ZeroRule::ExpSquare => Some(((2 * k0 + 1) as f64).exp()),
            _ => None,
        }
    }

    pub fn convergence(&self) -> Convergence {
        match &self.rule {
            ZeroRule::List(_) => Convergence::Verified("finite zero set".into()),
            ZeroRule::Power { a, .. } => Convergence::Verified(format!("sum k^-{a} converges")),
            _ => {
                // ratio test over a window
                let window: Vec<f64> = (1..=40).map(|k| self.ln_b(k + 1) - self.ln_b(k)).collect();
                if window.iter().all(|&d| d > 0.0) && window[20..].iter().all(|&d| d >= window[19] - 1e-12) {
                    Convergence::Verified("ratio test over k <= 41".into())
                } else {
                    Convergence::Unverified("ratio test inconclusive".into())
                }
            }
        }
    }

    /// Whether `b_{k+1} >= 2 b_k` over `k < k_max`.
    pub fn doubling_holds(&self, k_max: u64) -> bool {
        let lim = self.zero_count().map_or(k_max, |n| n.min(k_max));
        (1..lim).all(|k| self.ln_b(k + 1) - self.ln_b(k) >= std::f64::consts::LN_2 - 1e-12)
    }

    /// Exact counting function `N(t) = sum_{b_k <= t} mult`.
    pub fn count(&self, t: f64) -> u64 {
        if t <= 0.0 {
            return 0;
        }
        let lt = t.ln();
        let m = self.multiplicity as u64;
        let mut k: u64 = match &self.rule {
            ZeroRule::Power { a, c } => ((t / c).powf(1.0 / a).floor() as u64).saturating_sub(2),
            ZeroRule::Geometric { c, r } => (((t / c).ln() / r.ln()).floor().max(0.0) as u64).saturating_sub(2),
            _ => 0,
        };
        // advance past every b_k <= t
        while k + 1 <= self.zero_count().unwrap_or(u64::MAX) && self.b_le(k + 1, t, lt) {
            k += 1;
        }
        k * m
    }

    fn b_le(&self, k: u64, t: f64, lt: f64) -> bool {
        match &self.rule {
            ZeroRule::List(b) => b[k as usize - 1] <= t,
            ZeroRule::Power { a, c } if a.fract() == 0.0 && *a <= 4.0 => {
                c * (k as f64).powi(*a as i32) <= t
            }
            ZeroRule::Geometric { c, r } if r.fract() == 0.0 && *r < 64.0 && k < 60 => {
                c * (*r as f64).powi(k as i32) <= t
            }
            _ => self.ln_b(k) <= lt,
        }
    }

    /// Smooth approximation of `N(s)` with `N(s) - env(s)` in `[-1/2, 1/2]` times the multiplicity.
    pub fn counting_envelope(&self, s: f64) -> Option<f64> {
        let m = self.multiplicity as f64;
        match &self.rule {
            ZeroRule::Power { a, c } => Some(m * ((s / c).powf(1.0 / a) - 0.5).max(0.0)),
            ZeroRule::Geometric { c, r } => Some(m * (((s / c).ln() / r.ln()) - 0.5).max(0.0)),
            _ => None,
        }
    }

    /// Direct sums with tail bounds from the growth rule.
    pub fn eval(&self, t: f64) -> Result<CanonicalValues> {
        if t < 0.0 {
            return Err(Error::OutOfRange { t, radius: "inf".into() });
        }
        let count = self.count(t);
        if t == 0.0 {
            return Ok(CanonicalValues { ln_f: 0.0, mean: 0.0, var: 0.0, count, tail_bound: 0.0 });
        }
        let m = self.multiplicity as f64;
        let lt = t.ln();
        let (mut lnf, mut mean, mut var) = (0.0f64, 0.0f64, 0.0f64);
        let mut c_ln = 0.0; // compensation
        let mut add = |x: f64, lnf: &mut f64, mean: &mut f64, var: &mut f64| {
            let l = x.ln_1p();
            let y = l - c_ln;
            let s = *lnf + y;
            c_ln = (s - *lnf) - y;
            *lnf = s;
            *mean += x / (1.0 + x);
            *var += x / ((1.0 + x) * (1.0 + x));
        };
        let tail_bound;
        match &self.rule {
            ZeroRule::List(b) => {
                for bk in b {
                    add(t / bk, &mut lnf, &mut mean, &mut var);
                }
                tail_bound = 0.0;
            }
            ZeroRule::Power { a, c } => {
                let j = ((4.0 * t / c).powf(1.0 / a).ceil() as u64).max(1);
                if j > DIRECT_LIMIT {
                    return Err(Error::TailUnattainable { achieved: f64::INFINITY, terms: 0 });
                }
                // backward summation for accuracy on the small terms
                for k in (1..=j).rev() {
                    add(t / (c * (k as f64).powf(*a)), &mut lnf, &mut mean, &mut var);
                }
                let q = (j + 1) as f64;
                let rho = (t / c) / q.powf(*a);
                let (mut tl, mut tm, mut tv) = (0.0, 0.0, 0.0);
                let mut p = 1.0;
                let mut last = 0.0;
                for i in 1..=200u32 {
                    p *= rho;
                    let h = p * hurwitz_zeta_scaled(a * i as f64, q);
                    let sgn = if i % 2 == 1 { 1.0 } else { -1.0 };
                    tl += sgn * h / i as f64;
                    tm += sgn * h;
                    tv += sgn * h * i as f64;
                    last = h * i as f64;
                    if last < 1e-18 * (lnf + tl).abs().max(1e-300) {
                        break;
                    }
                }
                lnf += tl;
                mean += tm;
                var += tv;
                tail_bound = last;
            }
            _ => {
                let mut k: u64 = 1;
                loop {
                    let lx = lt - self.ln_b(k);
                    let x = lx.exp();
                    add(x, &mut lnf, &mut mean, &mut var);
                    if x < 1.0 {
                        if let Some(r) = self.ratio_bound(k) {
                            let next = x / r;
                            let tail = next / (1.0 - 1.0 / r);
                            if tail <= 1e-17 * lnf.max(1e-300) || tail == 0.0 {
                                tail_bound = tail;
                                break;
                            }
                        }
                    }
                    k += 1;
                    if k > DIRECT_LIMIT {
                        return Err(Error::TailUnattainable { achieved: x, terms: k as usize });
                    }
                }
            }
        }
        Ok(CanonicalValues { ln_f: m * lnf, mean: m * mean, var: m * var, count, tail_bound: m * tail_bound })
    }

    /// `ln |f(t e^{i theta})| - ln f(t)` by the product.
    pub fn ln_abs_ratio(&self, t: f64, theta: f64) -> Result<f64> {
        let z = Complex64::from_polar(t, theta);
        let mut acc = 0.0;
        let mut k = 1u64;
        let lim = self.zero_count().unwrap_or(DIRECT_LIMIT);
        while k <= lim {
            let b = self.b(k);
            let x = t / b;
            let num = (Complex64::new(1.0, 0.0) + z / b).norm();
            if num <= 1e-14 * (1.0 + x) {
                return Ok(f64::NEG_INFINITY);
            }
            acc += num.ln() - x.ln_1p();
            if x < 1e-18 {
                break;
            }
            k += 1;
        }
        Ok(self.multiplicity as f64 * acc)
    }

    pub fn into_genfunction(self, name: &str) -> GenFunction {
        let spec = Arc::new(self);
        let oracle = Arc::new(CanonicalOracle { spec: spec.clone(), table: OnceLock::new() });
        let mut g = GenFunction::new(name, Radius::Infinite, oracle);
        g.eval = Some(Arc::new(CanonicalEval { spec: spec.clone() }));
        g.canonical = Some(spec.clone());
        g.known_zeros = match &spec.rule {
            ZeroRule::List(b) => b.iter().map(|&x| (x, std::f64::consts::PI)).collect(),
            _ => (1..=8).map(|k| (spec.b(k), std::f64::consts::PI)).filter(|z| z.0.is_finite()).collect(),
        };
        match spec.zero_count() {
            Some(n) => {
                g.mf = MfClass::Finite((n * spec.multiplicity as u64) as f64);
                g.mf_basis = "polynomial degree".into();
            }
            None => {
                g.mf = MfClass::Infinite;
                g.mf_basis = "entire, not a polynomial".into();
            }
        }
        g.class_k = ClassKStatus::VerifiedUpTo(CANON_TABLE_LEN as u64);
        g
    }
}

const CANON_TABLE_LEN: usize = 512;

#[derive(Debug)]
struct CanonicalOracle {
    spec: Arc<CanonicalProductSpec>,
    table: OnceLock<Vec<f64>>,
}

impl CanonicalOracle {
    fn table(&self) -> &Vec<f64> {
        self.table.get_or_init(|| canonical_coefficients(&self.spec, CANON_TABLE_LEN))
    }
}

/// `ln a_n` for `n <= n_max` by multiplying out the factors.
fn canonical_coefficients(spec: &CanonicalProductSpec, n_max: usize) -> Vec<f64> {
    let mult = spec.multiplicity;
    let n_len = match spec.zero_count() {
        Some(z) => n_max.min((z * mult as u64) as usize),
        None => n_max,
    };
    let mut a = vec![f64::NEG_INFINITY; n_len + 1];
    a[0] = 0.0;
    let k_max: u64 = match &spec.rule {
        ZeroRule::List(b) => b.len() as u64,
        ZeroRule::Power { .. } => 4096,
        _ => n_len as u64 + 64,
    };
    for k in 1..=k_max {
        let lb = spec.ln_b(k);
        if !lb.is_finite() {
            break;
        }
        for _ in 0..mult {
            for n in (1..=n_len).rev() {
                if a[n - 1] > f64::NEG_INFINITY {
                    a[n] = log_add(a[n], a[n - 1] - lb);
                }
            }
        }
    }
    if let ZeroRule::Power { a: pa, c } = &spec.rule {
        // remaining factors: exp(sum_j (-1)^{j+1} P_j z^j / j), P_j = sum_{k > K} b_k^{-j}
        let q = (k_max + 1) as f64;
        let mut h = vec![SignedLog::ZERO; n_len + 1];
        for j in 1..=n_len {
            let lp = hurwitz_zeta_scaled(pa * j as f64, q).ln() - j as f64 * (c.ln() + pa * q.ln());
            let sign = if j % 2 == 1 { 1 } else { -1 };
            h[j] = SignedLog::new(sign, lp + (mult as f64).ln() - (j as f64).ln());
            if lp < -745.0 * 4.0 {
                break;
            }
        }
        let corr = TruncatedSeries::from_coeffs(n_len.max(1), &h).exp();
        let base: Vec<SignedLog> = a.iter().map(|&l| SignedLog::from_ln(l)).collect();
        let prod = TruncatedSeries::from_coeffs(n_len.max(1), &base).mul(&corr).expect("same order");
        for n in 0..=n_len {
            a[n] = prod.coeff(n).ln_mag;
        }
    }
    a
}

impl CoeffOracle for CanonicalOracle {
    fn ln_coeff(&self, n: u64) -> f64 {
        self.table().get(n as usize).copied().unwrap_or(f64::NEG_INFINITY)
    }

    fn next_support(&self, n: u64) -> Option<u64> {
        if (n as usize) < self.table().len() { Some(n) } else { None }
    }

    fn degree(&self) -> Option<u64> {
        self.spec.zero_count().map(|z| z * self.spec.multiplicity as u64)
    }

    fn known_up_to(&self) -> Option<u64> {
        if self.spec.zero_count().is_some() { None } else { Some(self.table().len() as u64 - 1) }
    }
}

#[derive(Debug)]
struct CanonicalEval {
    spec: Arc<CanonicalProductSpec>,
}

impl Evaluator for CanonicalEval {
    fn jet(&self, t: f64, _order: usize) -> Result<Jet> {
        let v = self.spec.eval(t)?;
        Ok(Jet { sign: 1, ln_mag: v.ln_f, mean: v.mean, central: vec![1.0, 0.0, v.var] })
    }

    fn max_order(&self) -> usize {
        2
    }

    fn abs_ratio(&self, t: f64, theta: f64) -> Option<Result<f64>> {
        Some(self.spec.ln_abs_ratio(t, theta).map(f64::exp))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pow2() -> CanonicalProductSpec {
        CanonicalProductSpec::new(ZeroRule::Geometric { c: 1.0, r: 2.0 }).unwrap()
    }

    fn squares() -> CanonicalProductSpec {
        CanonicalProductSpec::new(ZeroRule::Power { a: 2.0, c: 1.0 }).unwrap()
    }

    #[test]
    fn zero_at_origin() {
        let v = pow2().eval(0.0).unwrap();
        assert_eq!((v.ln_f, v.mean, v.var, v.count), (0.0, 0.0, 0.0, 0));
    }

    #[test]
    fn pow2_at_two_matches_high_precision_sum() {
        // reference by 50-digit summation
        let v = pow2().eval(2.0).unwrap();
        assert!((v.var - 0.846347520479720).abs() < 1e-12, "{}", v.var);
        assert!((v.mean - 1.264499780348444).abs() < 1e-12);
        assert_eq!(v.count, 1);
        assert!(v.tail_bound < 1e-10);
    }

    #[test]
    fn squares_count_and_closed_form() {
        assert_eq!(squares().count(1e6), 1000);
        assert_eq!(squares().count(100.0), 10);
        assert_eq!(squares().count(99.999), 9);
        // prod (1 + t/k^2) = sinh(pi sqrt t)/(pi sqrt t)
        for &t in &[0.5f64, 10.0, 1000.0, 1e6] {
            let s: f64 = t.sqrt() * std::f64::consts::PI;
            let want = s + (-(-2.0 * s).exp()).ln_1p() - (2.0 * s).ln();
            let v = squares().eval(t).unwrap();
            assert!((v.ln_f - want).abs() < 1e-9 * want.abs().max(1.0), "t={t}: {} vs {want}", v.ln_f);
        }
    }

    #[test]
    fn coefficients_match_closed_forms() {
        // b_k = 2^k: a_n = 2^{-n(n+1)/2} / prod_{j<=n} (1 - 2^{-j})
        let g = pow2().into_genfunction("pow2");
        for n in 0..30u64 {
            let mut want = -((n * (n + 1)) as f64) / 2.0 * std::f64::consts::LN_2;
            for j in 1..=n {
                want -= (1.0 - 0.5f64.powi(j as i32)).ln();
            }
            assert!((g.ln_coeff(n) - want).abs() < 1e-12 * want.abs().max(1.0), "n={n}");
        }
        // b_k = k^2: a_n = pi^{2n} / (2n+1)!
        let g = squares().into_genfunction("sq");
        for n in 0..40u64 {
            let want = 2.0 * n as f64 * std::f64::consts::PI.ln() - crate::gf::special::ln_factorial(2 * n + 1);
            assert!((g.ln_coeff(n) - want).abs() < 1e-10 * want.abs().max(1.0), "n={n}: {} vs {want}", g.ln_coeff(n));
        }
    }

    #[test]
    fn zero_ratio_vanishes_at_zero() {
        assert_eq!(pow2().ln_abs_ratio(2.0, std::f64::consts::PI).unwrap(), f64::NEG_INFINITY);
        assert!(pow2().ln_abs_ratio(2.0, 1.0).unwrap() < 0.0);
    }

    #[test]
    fn validation() {
        assert!(CanonicalProductSpec::new(ZeroRule::Power { a: 1.0, c: 1.0 }).is_err());
        assert!(CanonicalProductSpec::new(ZeroRule::List(vec![2.0, 1.0])).is_err());
        assert!(pow2().doubling_holds(60));
        assert!(!squares().doubling_holds(10));
        assert!(matches!(pow2().convergence(), Convergence::Verified(_)));
    }
}
