//! Built-in generating functions with exact or closed-form channels.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::canonical::{CanonicalProductSpec, ZeroRule};
use super::exact::{self, bell_numbers, ln_biguint, partition_numbers, StirlingTable};
use super::genfn::{ClassKStatus, CoeffOracle, Evaluator, GenFunction, Jet, MfClass, Radius};
use super::signed_log::LogSum;
use super::special::{ln_factorial, ln_gamma, zeta, ZETA2};
use crate::error::{Error, Result};

fn verified(g: GenFunction, n: u64) -> GenFunction {
    GenFunction { class_k: ClassKStatus::VerifiedUpTo(n), ..g }
}

// ---------------------------------------------------------------- e^z

#[derive(Debug)]
struct ExpOracle;

impl CoeffOracle for ExpOracle {
    fn ln_coeff(&self, n: u64) -> f64 {
        -ln_factorial(n)
    }
    fn next_support(&self, n: u64) -> Option<u64> {
        Some(n)
    }
    fn exact(&self, n: u64) -> Option<BigRational> {
        Some(exact::exact_coeff(exact::ExactFamily::Exponential, n as usize))
    }
}

#[derive(Debug)]
struct ExpEval;

impl Evaluator for ExpEval {
    fn jet(&self, t: f64, order: usize) -> Result<Jet> {
        let k: Vec<f64> = (0..=order.clamp(2, 6)).map(|i| if i == 0 { 0.0 } else { t }).collect();
        Ok(Jet::from_cumulants(1, t, &k))
    }
    fn max_order(&self) -> usize {
        6
    }
    fn factorial_moment(&self, k: u32, t: f64) -> Option<f64> {
        Some(t.powi(k as i32))
    }
    fn abs_ratio(&self, t: f64, theta: f64) -> Option<Result<f64>> {
        Some(Ok((t * (theta.cos() - 1.0)).exp()))
    }
}

/// `e^z`
pub fn exponential() -> GenFunction {
    let g = GenFunction::new("exp(z)", Radius::Infinite, Arc::new(ExpOracle))
        .with_eval(Arc::new(ExpEval))
        .with_mf(MfClass::Infinite, "entire, not a polynomial");
    verified(g, u64::MAX)
}

// ---------------------------------------------------------------- (1-z)^{-alpha}

#[derive(Debug)]
struct NegBinOracle {
    alpha: f64,
}

impl CoeffOracle for NegBinOracle {
    fn ln_coeff(&self, n: u64) -> f64 {
        if self.alpha == 1.0 {
            return 0.0;
        }
        ln_gamma(n as f64 + self.alpha) - ln_gamma(self.alpha) - ln_factorial(n)
    }
    fn next_support(&self, n: u64) -> Option<u64> {
        Some(n)
    }
    fn exact(&self, n: u64) -> Option<BigRational> {
        (self.alpha.fract() == 0.0)
            .then(|| exact::exact_coeff(exact::ExactFamily::NegBinomial(self.alpha as u64), n as usize))
    }
}

#[derive(Debug)]
struct NegBinEval {
    alpha: f64,
}

impl Evaluator for NegBinEval {
    fn jet(&self, t: f64, order: usize) -> Result<Jet> {
        let a = self.alpha;
        let s = 1.0 - t;
        let ln_f = -a * (-t).ln_1p();
        let k = [
            0.0,
            a * t / s,
            a * t / (s * s),
            a * t * (1.0 + t) / s.powi(3),
            a * t * (1.0 + 4.0 * t + t * t) / s.powi(4),
        ];
        Ok(Jet::from_cumulants(1, ln_f, &k[..=order.clamp(2, 4)]))
    }
    fn max_order(&self) -> usize {
        4
    }
    fn factorial_moment(&self, k: u32, t: f64) -> Option<f64> {
        // t^k alpha^(rising k) / (1-t)^k
        let mut v = 1.0;
        for i in 0..k {
            v *= (self.alpha + i as f64) * t / (1.0 - t);
        }
        Some(v)
    }
    fn abs_ratio(&self, t: f64, theta: f64) -> Option<Result<f64>> {
        let z = Complex64::from_polar(t, theta);
        Some(Ok(((1.0 - t) / (Complex64::new(1.0, 0.0) - z).norm()).powf(self.alpha)))
    }
}

/// `(1 - z)^{-alpha}`, `alpha > 0`.
pub fn negative_binomial(alpha: f64) -> GenFunction {
    assert!(alpha > 0.0);
    let name = if alpha == 1.0 { "1/(1-z)".to_string() } else { format!("1/(1-z)^{alpha}") };
    let g = GenFunction::new(name, Radius::finite(1.0), Arc::new(NegBinOracle { alpha }))
        .with_eval(Arc::new(NegBinEval { alpha }))
        .with_mf(MfClass::Infinite, "sum n a_n diverges at R = 1");
    verified(g, u64::MAX)
}

/// `1/(1 - z)`
pub fn geometric() -> GenFunction {
    negative_binomial(1.0)
}

// ---------------------------------------------------------------- (1+z)^N

#[derive(Debug)]
struct BinomialEval {
    n: f64,
}

impl Evaluator for BinomialEval {
    fn jet(&self, t: f64, order: usize) -> Result<Jet> {
        let n = self.n;
        let s = 1.0 + t;
        let k = [
            0.0,
            n * t / s,
            n * t / (s * s),
            n * t * (1.0 - t) / s.powi(3),
            n * t * (1.0 - 4.0 * t + t * t) / s.powi(4),
        ];
        Ok(Jet::from_cumulants(1, n * t.ln_1p(), &k[..=order.clamp(2, 4)]))
    }
    fn max_order(&self) -> usize {
        4
    }
    fn factorial_moment(&self, k: u32, t: f64) -> Option<f64> {
        let mut v = 1.0;
        for i in 0..k {
            v *= (self.n - i as f64) * t / (1.0 + t);
        }
        Some(v.max(0.0))
    }
    fn abs_ratio(&self, t: f64, theta: f64) -> Option<Result<f64>> {
        let z = Complex64::from_polar(t, theta);
        Some(Ok(((Complex64::new(1.0, 0.0) + z).norm() / (1.0 + t)).powf(self.n)))
    }
}

/// `(1 + z)^N`
pub fn binomial(n: u64) -> GenFunction {
    assert!(n >= 1);
    let exact: Vec<BigRational> =
        (0..=n).map(|k| exact::exact_coeff(exact::ExactFamily::Binomial(n), k as usize)).collect();
    let vals: Vec<_> = exact
        .iter()
        .map(|c| super::signed_log::SignedLog::from_ln(exact::ln_rational(c)))
        .collect();
    let oracle = super::genfn::DenseOracle::new(&vals, true).with_exact(exact.clone());
    let name = if n == 1 { "1+z".to_string() } else { format!("(1+z)^{n}") };
    let mut g = GenFunction::new(name, Radius::Infinite, Arc::new(oracle))
        .with_eval(Arc::new(BinomialEval { n: n as f64 }))
        .with_mf(MfClass::Finite(n as f64), "polynomial degree")
        .with_zeros(vec![(1.0, PI)]);
    g.exact_poly = Some(Arc::new(exact));
    verified(g, n)
}

// ---------------------------------------------------------------- partitions

const PARTITION_EXACT: usize = 1000;

fn partition_table() -> &'static (Vec<BigUint>, Vec<f64>) {
    static TABLE: OnceLock<(Vec<BigUint>, Vec<f64>)> = OnceLock::new();
    TABLE.get_or_init(|| {
        let p = partition_numbers(PARTITION_EXACT);
        let l = p.iter().map(ln_biguint).collect();
        (p, l)
    })
}

/// `ln p(n)`: exact values up to 1000, then the leading Rademacher term
/// (relative error below `e^{-C sqrt(n)/2}`).
pub fn ln_partition(n: u64) -> f64 {
    if (n as usize) <= PARTITION_EXACT {
        return partition_table().1[n as usize];
    }
    let c = PI * (2.0f64 / 3.0).sqrt();
    let lam = (n as f64 - 1.0 / 24.0).sqrt();
    c * lam - (4.0 * PI * 2f64.sqrt() * lam * lam).ln() + (c - 1.0 / lam).ln()
}

#[derive(Debug)]
struct PartitionOracle;

impl CoeffOracle for PartitionOracle {
    fn ln_coeff(&self, n: u64) -> f64 {
        ln_partition(n)
    }
    fn next_support(&self, n: u64) -> Option<u64> {
        Some(n)
    }
    fn exact(&self, n: u64) -> Option<BigRational> {
        if (n as usize) <= PARTITION_EXACT {
            Some(BigRational::from_integer(BigInt::from(partition_table().0[n as usize].clone())))
        } else {
            Some(BigRational::from_integer(BigInt::from(partition_numbers(n as usize).swap_remove(n as usize))))
        }
    }
}

/// `(L, L', L'')` for `L(y) = ln P(e^{-y}) = -sum ln(1 - e^{-ky})`, `y` large.
fn partition_log_direct(y: f64) -> (f64, f64, f64) {
    let (mut l, mut l1, mut l2) = (0.0, 0.0, 0.0);
    let mut k = 1.0;
    loop {
        let q = (-k * y).exp();
        if q == 0.0 {
            break;
        }
        let om = -(-k * y).exp_m1(); // 1 - q
        l -= (-q).ln_1p();
        l1 -= k * q / om;
        l2 += k * k * q / (om * om);
        if q < 1e-18 * l.abs().max(1e-300) {
            break;
        }
        k += 1.0;
    }
    (l, l1, l2)
}

/// `(ln P, m_P, sigma_P^2)` at `t = e^{-x}`.
pub fn partition_stats(t: f64) -> (f64, f64, f64) {
    if t == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let x = -t.ln();
    if x >= 2.0 * PI {
        let (l, l1, l2) = partition_log_direct(x);
        // m = -dL/dx, sigma^2 = d^2 L / dx^2
        return (l, -l1, l2);
    }
    let y = 4.0 * PI * PI / x;
    let (l, l1, l2) = partition_log_direct(y);
    let g = PI * PI / (6.0 * x) - x / 24.0 + 0.5 * (x / (2.0 * PI)).ln() + l;
    let m = PI * PI / (6.0 * x * x) + 1.0 / 24.0 - 0.5 / x + l1 * y / x;
    let v = PI * PI / (3.0 * x * x * x) - 0.5 / (x * x) + l2 * y * y / (x * x) + 2.0 * l1 * y / (x * x);
    (g, m, v)
}

/// `sum_{m>=1} m^{j-1} q^m` for `j = 1..=6`, i.e. `Li_{1-j}(q)`, whose
/// numerators are Eulerian polynomials.
fn neg_polylog(j: usize, q: f64) -> f64 {
    const EULERIAN: [&[f64]; 6] = [
        &[1.0],
        &[1.0],
        &[1.0, 1.0],
        &[1.0, 4.0, 1.0],
        &[1.0, 11.0, 11.0, 1.0],
        &[1.0, 26.0, 66.0, 26.0, 1.0],
    ];
    let om = -(q.ln()).exp_m1(); // 1 - q without cancellation for q near 0
    let num = EULERIAN[j - 1].iter().rev().fold(0.0, |acc, c| acc * q + c);
    q * num / om.powi(j as i32)
}

/// `L^{(j)}(y)` for `j = 0..=6`, `L(y) = -sum_k ln(1 - e^{-ky})`, `y` large.
fn partition_log_derivs(y: f64) -> [f64; 7] {
    let mut d = [0.0; 7];
    let mut k = 1.0f64;
    loop {
        let q = (-k * y).exp();
        if q == 0.0 {
            break;
        }
        d[0] -= (-q).ln_1p();
        let mut kp = 1.0;
        for (j, dj) in d.iter_mut().enumerate().skip(1) {
            kp *= -k;
            *dj += kp * neg_polylog(j, q);
        }
        if q < 1e-18 * d[0].abs().max(1e-300) {
            break;
        }
        k += 1.0;
    }
    d
}

/// Taylor coefficients of `g(y(x + h))` in `h` up to `h^6`, from the
/// derivatives `a` of `g` at `y(x)` and `b` of `y` at `x`.
fn compose_derivs(a: &[f64; 7], b: &[f64; 7]) -> [f64; 7] {
    let mut fact = [1.0; 7];
    for i in 1..7 {
        fact[i] = fact[i - 1] * i as f64;
    }
    let inner: Vec<f64> = (0..7).map(|n| if n == 0 { 0.0 } else { b[n] / fact[n] }).collect();
    let mut power = vec![0.0; 7];
    power[0] = 1.0;
    let mut out = [0.0; 7];
    for k in 0..7 {
        for n in 0..7 {
            out[n] += a[k] / fact[k] * power[n];
        }
        let mut next = vec![0.0; 7];
        for i in 0..7 {
            for j in 0..7 - i {
                next[i + j] += power[i] * inner[j];
            }
        }
        power = next;
    }
    // back to derivatives
    for n in 0..7 {
        out[n] *= fact[n];
    }
    out
}

/// `ln P(t)` and the cumulants `kappa_1..kappa_6` of `X_t` for the partition function.
pub fn partition_cumulants(t: f64) -> [f64; 7] {
    let x = -t.ln();
    // derivatives of G(x) = ln P(e^{-x}) in x
    let g = if x >= 2.0 * PI {
        partition_log_derivs(x)
    } else {
        let y = 4.0 * PI * PI / x;
        let mut yd = [0.0; 7];
        let mut g = [0.0; 7];
        let mut fact = 1.0;
        for n in 0..7 {
            if n > 0 {
                fact *= n as f64;
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            yd[n] = 4.0 * PI * PI * sign * fact / x.powi(n as i32 + 1);
            g[n] = PI * PI / 6.0 * sign * fact / x.powi(n as i32 + 1);
            g[n] += match n {
                0 => -x / 24.0 + 0.5 * (x / (2.0 * PI)).ln(),
                1 => -1.0 / 24.0 + 0.5 / x,
                _ => 0.5 * -sign * (fact / n as f64) / x.powi(n as i32),
            };
        }
        let l = compose_derivs(&partition_log_derivs(y), &yd);
        for n in 0..7 {
            g[n] += l[n];
        }
        g
    };
    // d/du = -d/dx for u = ln t
    let mut k = g;
    for (j, kj) in k.iter_mut().enumerate() {
        if j % 2 == 1 {
            *kj = -*kj;
        }
    }
    k
}

#[derive(Debug)]
struct PartitionEval;

impl Evaluator for PartitionEval {
    fn jet(&self, t: f64, order: usize) -> Result<Jet> {
        if order <= 2 {
            let (l, m, v) = partition_stats(t);
            return Ok(Jet { sign: 1, ln_mag: l, mean: m, central: vec![1.0, 0.0, v] });
        }
        let k = partition_cumulants(t);
        Ok(Jet::from_cumulants(1, k[0], &k[..=order.min(6)]))
    }
    fn max_order(&self) -> usize {
        6
    }
}

/// `P(z) = prod_{k>=1} 1/(1 - z^k)`
pub fn partition() -> GenFunction {
    let g = GenFunction::new("partition()", Radius::finite(1.0), Arc::new(PartitionOracle))
        .with_eval(Arc::new(PartitionEval))
        .with_mf(MfClass::Infinite, "sum n a_n diverges at R = 1");
    verified(g, u64::MAX)
}

// ---------------------------------------------------------------- Bell

const BELL_TABLE: usize = 3000;
const BELL_EXACT: usize = 400;

fn bell_ln_table() -> &'static Vec<f64> {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // a_{n+1} = (1/(n+1)) sum_{k<=n} a_k / (n-k)!   (from B' = e^z B)
        let lf: Vec<f64> = (0..=BELL_TABLE as u64).map(ln_factorial).collect();
        let mut a = vec![0.0f64; BELL_TABLE + 1];
        for n in 0..BELL_TABLE {
            let mut acc = LogSum::new();
            for k in 0..=n {
                acc.push_ln(a[k] - lf[n - k]);
            }
            a[n + 1] = acc.value().ln_mag - ((n + 1) as f64).ln();
        }
        a
    })
}

fn bell_exact_table() -> &'static Vec<BigUint> {
    static TABLE: OnceLock<Vec<BigUint>> = OnceLock::new();
    TABLE.get_or_init(|| bell_numbers(BELL_EXACT))
}

#[derive(Debug)]
struct BellOracle;

impl CoeffOracle for BellOracle {
    fn ln_coeff(&self, n: u64) -> f64 {
        if (n as usize) <= BELL_EXACT {
            return ln_biguint(&bell_exact_table()[n as usize]) - ln_factorial(n);
        }
        bell_ln_table().get(n as usize).copied().unwrap_or(f64::NEG_INFINITY)
    }
    fn next_support(&self, n: u64) -> Option<u64> {
        ((n as usize) <= BELL_TABLE).then_some(n)
    }
    fn known_up_to(&self) -> Option<u64> {
        Some(BELL_TABLE as u64)
    }
    fn exact(&self, n: u64) -> Option<BigRational> {
        ((n as usize) <= BELL_EXACT).then(|| {
            BigRational::new(
                BigInt::from(bell_exact_table()[n as usize].clone()),
                BigInt::from(exact::factorial(n)),
            )
        })
    }
}

fn stirling_small() -> &'static StirlingTable {
    static TABLE: OnceLock<StirlingTable> = OnceLock::new();
    TABLE.get_or_init(|| StirlingTable::new(24))
}

#[derive(Debug)]
struct BellEval;

impl Evaluator for BellEval {
    fn jet(&self, t: f64, order: usize) -> Result<Jet> {
        // ln B = e^t - 1; kappa_j = (d/du)^j e^{e^u} = e^t sum_i S(j,i) t^i
        let et = t.exp();
        if !et.is_finite() {
            return Err(Error::Evaluation(format!("e^t overflows at t = {t}")));
        }
        let s = stirling_small();
        let top = order.clamp(2, 6);
        let mut k = vec![0.0];
        for j in 1..=top {
            let v: f64 = (1..=j).map(|i| s.get_f64(j, i) * t.powi(i as i32)).sum();
            k.push(et * v);
        }
        Ok(Jet::from_cumulants(1, t.exp_m1(), &k))
    }
    fn max_order(&self) -> usize {
        6
    }
    fn factorial_moment(&self, k: u32, t: f64) -> Option<f64> {
        // t^k B^{(k)}/B = t^k sum_i S(k,i) e^{i t}
        let s = stirling_small();
        if k as usize > s.k_max() {
            return None;
        }
        if k == 0 {
            return Some(1.0);
        }
        let et = t.exp();
        Some(t.powi(k as i32) * (1..=k as usize).map(|i| s.get_f64(k as usize, i) * et.powi(i as i32)).sum::<f64>())
    }
    fn abs_ratio(&self, t: f64, theta: f64) -> Option<Result<f64>> {
        let z = Complex64::from_polar(t, theta);
        Some(Ok((z.exp().re - t.exp()).exp()))
    }
}

/// `B(z) = e^{e^z - 1}`
pub fn bell() -> GenFunction {
    let g = GenFunction::new("bell()", Radius::Infinite, Arc::new(BellOracle))
        .with_eval(Arc::new(BellEval))
        .with_mf(MfClass::Infinite, "entire, not a polynomial");
    verified(g, BELL_TABLE as u64)
}

/// Exact Bell number `B(n)` for `n <= 400`.
pub fn bell_number(n: usize) -> Option<BigUint> {
    bell_exact_table().get(n).cloned()
}

// ---------------------------------------------------------------- lacunary series

#[derive(Debug)]
struct HadamardOracle;

impl CoeffOracle for HadamardOracle {
    fn ln_coeff(&self, n: u64) -> f64 {
        if n == 0 || n.is_power_of_two() { 0.0 } else { f64::NEG_INFINITY }
    }
    fn next_support(&self, n: u64) -> Option<u64> {
        if n == 0 {
            Some(0)
        } else {
            n.checked_next_power_of_two()
        }
    }
    fn exact(&self, n: u64) -> Option<BigRational> {
        Some(if n == 0 || n.is_power_of_two() { BigRational::one() } else { BigRational::zero() })
    }
}

/// `1 + sum_{k>=0} z^{2^k}`
pub fn hadamard_gap() -> GenFunction {
    let g = GenFunction::new("hadamard_gap()", Radius::finite(1.0), Arc::new(HadamardOracle))
        .with_mf(MfClass::Infinite, "sum n a_n diverges at R = 1");
    verified(g, u64::MAX)
}

/// Support `0, 1!, 2!, 3!, ...` (so `n_{k+1} = k n_k`) with `a_n = n^{-n/rho}`.
#[derive(Debug)]
struct GapSeriesOracle {
    rho: f64,
    support: Vec<u64>,
}

impl CoeffOracle for GapSeriesOracle {
    fn ln_coeff(&self, n: u64) -> f64 {
        if n == 0 || n == 1 {
            return 0.0;
        }
        if self.support.binary_search(&n).is_ok() {
            -(n as f64) * (n as f64).ln() / self.rho
        } else {
            f64::NEG_INFINITY
        }
    }
    fn next_support(&self, n: u64) -> Option<u64> {
        let i = self.support.partition_point(|&s| s < n);
        self.support.get(i).copied()
    }
}

/// Entire lacunary series of order `rho` with diverging gap ratios.
pub fn gap_series(rho: f64) -> GenFunction {
    assert!(rho > 0.0);
    let mut support = vec![0u64, 1];
    let mut k = 2u64;
    while let Some(next) = support.last().unwrap().checked_mul(k) {
        support.push(next);
        k += 1;
    }
    let g = GenFunction::new(format!("gap_series({rho})"), Radius::Infinite, Arc::new(GapSeriesOracle { rho, support }))
        .with_mf(MfClass::Infinite, "entire, not a polynomial");
    verified(g, u64::MAX)
}

// ---------------------------------------------------------------- 1 + eps Li_s(z)

#[derive(Debug)]
struct PolylogOracle {
    s: f64,
    ln_eps: f64,
}

impl CoeffOracle for PolylogOracle {
    fn ln_coeff(&self, n: u64) -> f64 {
        if n == 0 { 0.0 } else { self.ln_eps - self.s * (n as f64).ln() }
    }
    fn next_support(&self, n: u64) -> Option<u64> {
        Some(n)
    }
}

/// `1 + eps sum_{n>=1} z^n / n^s`
pub fn polylog(s: f64, eps: f64) -> GenFunction {
    assert!(eps > 0.0);
    let (mf, basis) = if s > 2.0 {
        (MfClass::Finite(eps * zeta(s - 1.0) / (1.0 + eps * zeta(s))), "closed form: sum n a_n converges at R = 1")
    } else {
        (MfClass::Infinite, "sum n a_n diverges at R = 1")
    };
    let g = GenFunction::new(format!("polylog({s},{eps})"), Radius::finite(1.0), Arc::new(PolylogOracle { s, ln_eps: eps.ln() }))
        .with_mf(mf, basis);
    verified(g, u64::MAX)
}

// ---------------------------------------------------------------- canonical products

/// `prod_k (1 + z/b_k)` for a zero rule.
pub fn canonical(rule: ZeroRule) -> Result<GenFunction> {
    let name = match &rule {
        ZeroRule::List(b) => format!("canon(list,{})", b.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")),
        ZeroRule::Geometric { c, r } => format!("canon(geometric,{c},{r})"),
        ZeroRule::Power { a, c } => format!("canon(power,{a},{c})"),
        ZeroRule::DoubleExp => "canon(doubleexp)".into(),
        ZeroRule::Factorial => "canon(factorial)".into(),
        ZeroRule::ExpSquare => "canon(expsquare)".into(),
    };
    Ok(CanonicalProductSpec::new(rule)?.into_genfunction(&name))
}

/// `zeta(2)`, re-exported for closed-form targets.
pub fn zeta2() -> f64 {
    ZETA2
}

/// `ln` of a rational coefficient as `f64`, `-inf` for zero.
pub fn ln_exact(x: &BigRational) -> f64 {
    if x.is_zero() { f64::NEG_INFINITY } else { exact::ln_rational(x) }
}

/// Convert an exact coefficient to `f64` when it fits.
pub fn exact_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::sums::{series_moments, SumConfig};

    #[test]
    fn partition_routes_agree() {
        // product hook vs coefficient sum, across the transform threshold
        let g = partition();
        for &t in &[0.001, 0.0018, 0.002, 0.1, 0.5, 0.8, 0.9] {
            let (l, m, v) = partition_stats(t);
            let s = series_moments(&g, t, &SumConfig::default()).unwrap();
            assert!((l - s.ln_f).abs() < 1e-12 * l.abs().max(1.0), "t={t}: {l} vs {}", s.ln_f);
            assert!((m - s.mean).abs() < 1e-10 * m.max(1e-3), "t={t}: {m} vs {}", s.mean);
            assert!((v - s.var).abs() < 1e-9 * v.max(1e-3), "t={t}: {v} vs {}", s.var);
        }
        let (l, m, v) = partition_stats(0.5);
        assert!((l - 1.242062094812415).abs() < 1e-13);
        assert!((m - 2.744033888759488).abs() < 1e-12);
        assert!((v - 8.838068070451200).abs() < 1e-11);
    }

    #[test]
    fn partition_near_one() {
        for t in [0.001, 0.3, 0.5, 0.9, 0.999] {
            let k = partition_cumulants(t);
            let (l, m, v) = partition_stats(t);
            assert!((k[0] - l).abs() < 1e-12 * l.abs().max(1.0) && (k[1] / m - 1.0).abs() < 1e-12 && (k[2] / v - 1.0).abs() < 1e-11, "{t}");
        }
        let (_, m, v) = partition_stats(0.999);
        assert!((m - 1642789.56).abs() / m < 1e-8, "{m}");
        assert!((v - 3284435476.39).abs() / v < 1e-8, "{v}");
    }

    #[test]
    fn rademacher_tail_continuity() {
        let exact = ln_biguint(&partition_numbers(1001)[1001]);
        assert!((ln_partition(1001) - exact).abs() < 1e-13 * exact);
    }

    #[test]
    fn bell_table_matches_exact() {
        let t = bell_ln_table();
        for n in [5usize, 50, 200, 400] {
            let e = ln_biguint(&bell_exact_table()[n]) - ln_factorial(n as u64);
            assert!((t[n] - e).abs() < 1e-12 * e.abs().max(1.0), "n={n}");
        }
    }

    #[test]
    fn supports() {
        let h = hadamard_gap();
        assert_eq!(h.support_up_to(20), vec![0, 1, 2, 4, 8, 16]);
        let g = gap_series(0.5);
        assert_eq!(g.support_up_to(1000), vec![0, 1, 2, 6, 24, 120, 720]);
        assert_eq!(g.ln_coeff(6), -12.0 * 6f64.ln());
    }

    #[test]
    fn polylog_mf() {
        let g = polylog(4.0, 1.0);
        match g.mf {
            MfClass::Finite(v) => assert!((v - 0.577267200259431).abs() < 1e-13),
            _ => panic!(),
        }
    }
}
