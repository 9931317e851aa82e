//! Saddle-point coefficient estimates, the local central limit deviation
//! and comparisons against closed-form asymptotics.

use std::f64::consts::PI;

use serde::Serialize;

use crate::diagnostics::{eval_grid, integrate_adaptive, GridSpec, Trimmed};
use crate::error::{Error, Result};
use crate::family::KhinchinFamily;
use crate::gf::builtins::{ln_exact, zeta2};
use crate::gf::special::ln_gamma;
use crate::gf::{CanonicalProductSpec, MfClass, Radius, ZeroRule};
use crate::par::Execution;
use crate::verify::CheckReport;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Where the reference coefficient came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExactSource {
    /// Arbitrary-precision oracle.
    Exact,
    /// The double-precision coefficient oracle.
    Coefficient,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoeffEstimate {
    pub n: u64,
    /// Saddle point, `m(t_n) = n`.
    pub t_n: f64,
    pub mean_at_saddle: f64,
    /// `ln [f(t_n) / (sqrt(2 pi) t_n^n sigma(t_n))]`
    pub log_estimate: f64,
    pub log_exact: Option<f64>,
    pub exact_source: Option<ExactSource>,
    /// `estimate / exact`
    pub ratio: Option<f64>,
    /// Local CLT deviation at the saddle, a proxy for the Gaussian hypothesis.
    pub clt_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caveat: Option<String>,
}

/// Deviation above which an estimate is flagged as possibly non-Gaussian.
pub const GAUSSIAN_CAVEAT: f64 = 0.1;

pub fn hayman_estimate(fam: &KhinchinFamily, n: u64) -> Result<CoeffEstimate> {
    if let MfClass::Finite(mf) = fam.classify_mf() {
        if n as f64 >= mf {
            return Err(Error::TargetAboveMf { target: n as f64, mf: mf.to_string() });
        }
    }
    if n == 0 {
        return Err(Error::Precondition("the saddle equation m(t) = 0 has only t = 0".into()));
    }
    let t = fam.solve_t_for_mean(n as f64)?;
    let st = fam.stats(t)?;
    let log_estimate = st.log_f - LN_SQRT_2PI - n as f64 * t.ln() - 0.5 * st.var.ln();

    let (log_exact, exact_source) = match fam.f.oracle.exact(n) {
        Some(q) => (Some(ln_exact(&q)), Some(ExactSource::Exact)),
        None => {
            let known = fam.f.oracle.known_up_to().is_none_or(|k| n <= k);
            let l = fam.f.ln_coeff(n);
            if known && l.is_finite() { (Some(l), Some(ExactSource::Coefficient)) } else { (None, None) }
        }
    };
    let ratio = log_exact.filter(|l| l.is_finite()).map(|l| (log_estimate - l).exp());

    let (clt_deviation, mut caveat) = match local_clt_deviation(fam, t) {
        Ok(d) => (Some(d.deviation), None),
        Err(e) => (None, Some(format!("local CLT deviation unavailable: {e}"))),
    };
    if let Some(d) = clt_deviation.filter(|&d| d > GAUSSIAN_CAVEAT) {
        caveat = Some(format!("local CLT deviation {d:.3} at the saddle: the law may not be Gaussian"));
    }
    Ok(CoeffEstimate {
        n,
        t_n: t,
        mean_at_saddle: st.mean,
        log_estimate,
        log_exact,
        exact_source,
        ratio,
        clt_deviation,
        caveat,
    })
}

// ---------------------------------------------------------------- local CLT

/// Half-width of the local CLT window, in standard deviations.
pub const CLT_WINDOW: f64 = 8.0;
/// Windows with more integers than this are sampled at a uniform stride.
pub const MAX_WINDOW_POINTS: u64 = 200_001;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltDeviation {
    pub t: f64,
    pub mean: f64,
    pub sigma: f64,
    /// `max |P(X_t = n) sqrt(2 pi) sigma - exp(-(n - m)^2 / (2 sigma^2))|` over the window.
    pub deviation: f64,
    pub argmax: i64,
    pub window: (i64, i64),
    pub points: u64,
    /// 1 when every integer of the window was evaluated.
    pub stride: u64,
    /// Probability mass of `X_t` outside the window (evaluated windows only).
    pub mass_outside: Option<f64>,
    /// Bound on the deviation at integers outside the window.
    pub outside_bound: Option<f64>,
    /// Rounding level of `ln P(X_t = n)` in double precision; deviations
    /// near this value are not meaningful.
    pub rounding_floor: f64,
}

pub fn local_clt_deviation(fam: &KhinchinFamily, t: f64) -> Result<CltDeviation> {
    let st = fam.stats(t)?;
    let sigma = st.var.sqrt();
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Precondition(format!("sigma(t) = {sigma} at t = {t}")));
    }
    let m = st.mean;
    let lo = (m - CLT_WINDOW * sigma).ceil() as i64;
    let hi = (m + CLT_WINDOW * sigma).floor() as i64;
    let width = (hi - lo) as u64 + 1;
    let stride = width.div_ceil(MAX_WINDOW_POINTS).max(1);
    if let Some(k) = fam.f.oracle.known_up_to() {
        if hi > k as i64 {
            return Err(Error::Precondition(format!("window reaches n = {hi}, coefficients known to {k}")));
        }
    }
    // samples are anchored at the integer nearest the mean
    let centre = m.round() as i64;
    let first = centre - (centre - lo) / stride as i64 * stride as i64;
    let (lt, lf) = (t.ln(), st.log_f);
    let norm = (2.0 * PI).sqrt() * sigma;
    let (mut dev, mut argmax, mut mass, mut points) = (0.0f64, centre, 0.0f64, 0u64);
    let mut scale = lf.abs();
    let mut n = first;
    while n <= hi {
        let p = if n < 0 {
            0.0
        } else {
            let l = fam.f.ln_coeff(n as u64);
            if l == f64::NEG_INFINITY {
                0.0
            } else {
                scale = scale.max(l.abs()).max((n as f64 * lt).abs());
                (l + n as f64 * lt - lf).exp()
            }
        };
        mass += p;
        let z = (n as f64 - m) / sigma;
        let d = (p * norm - (-0.5 * z * z).exp()).abs();
        if d > dev {
            dev = d;
            argmax = n;
        }
        points += 1;
        n += stride as i64;
    }
    let (mass_outside, outside_bound) = if stride == 1 {
        let out = (1.0 - mass).max(0.0);
        (Some(out), Some((-0.5 * CLT_WINDOW * CLT_WINDOW).exp() + norm * out))
    } else {
        (None, None)
    };
    Ok(CltDeviation {
        t,
        mean: m,
        sigma,
        deviation: dev,
        argmax,
        window: (lo, hi),
        points,
        stride,
        mass_outside,
        outside_bound,
        rounding_floor: 4.0 * f64::EPSILON * scale,
    })
}

/// Local CLT deviation over a grid; points that cannot be evaluated are trimmed.
pub fn clt_trace(fam: &KhinchinFamily, grid: &GridSpec, exec: Execution) -> Result<(Vec<CltDeviation>, Trimmed)> {
    let pts = grid.points(fam.radius())?;
    let (_, vals, trimmed) = eval_grid(&pts, exec, |t| local_clt_deviation(fam, t));
    Ok((vals, trimmed))
}

// ---------------------------------------------------------------- closed-form targets

/// A closed-form asymptotic for a quantity of a specific family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AsymptoticTarget {
    /// `m_P(t) ~ zeta(2) / (1-t)^2`
    PartitionMean,
    /// `sigma_P^2(t) ~ 2 zeta(2) / (1-t)^3`
    PartitionVariance,
    /// `m_B(t) = t e^t`
    BellMean,
    /// `sigma_B^2(t) = t (1+t) e^t`
    BellVariance,
    /// `E X^beta / (E X)^beta -> Gamma(beta + N) / (Gamma(N) N^beta)` for `(1-z)^-N`
    NegBinMomentQuotient { n: f64, beta: f64 },
    /// `E X^p / (E X)^p -> 1` for clans
    ClanMoment { p: f64 },
}

impl AsymptoticTarget {
    pub fn name(&self) -> String {
        match self {
            AsymptoticTarget::PartitionMean => "partition-mean".into(),
            AsymptoticTarget::PartitionVariance => "partition-variance".into(),
            AsymptoticTarget::BellMean => "bell-mean".into(),
            AsymptoticTarget::BellVariance => "bell-variance".into(),
            AsymptoticTarget::NegBinMomentQuotient { n, beta } => format!("negbin-moment-quotient(N={n}, beta={beta})"),
            AsymptoticTarget::ClanMoment { p } => format!("clan-moment(p={p})"),
        }
    }

    /// The observed quantity at `t`.
    pub fn observed(&self, fam: &KhinchinFamily, t: f64) -> Result<f64> {
        match *self {
            AsymptoticTarget::PartitionMean | AsymptoticTarget::BellMean => fam.mean(t),
            AsymptoticTarget::PartitionVariance | AsymptoticTarget::BellVariance => Ok(fam.stats(t)?.var),
            AsymptoticTarget::NegBinMomentQuotient { beta: p, .. } | AsymptoticTarget::ClanMoment { p } => {
                let m = fam.mean(t)?;
                Ok((fam.moment(p, t)?.ln() - p * m.ln()).exp())
            }
        }
    }

    /// The closed form at `t`.
    pub fn expected(&self, t: f64) -> f64 {
        match *self {
            AsymptoticTarget::PartitionMean => zeta2() / ((1.0 - t) * (1.0 - t)),
            AsymptoticTarget::PartitionVariance => 2.0 * zeta2() / (1.0 - t).powi(3),
            AsymptoticTarget::BellMean => t * t.exp(),
            AsymptoticTarget::BellVariance => t * (1.0 + t) * t.exp(),
            AsymptoticTarget::NegBinMomentQuotient { n, beta } => {
                (ln_gamma(beta + n) - ln_gamma(n) - beta * n.ln()).exp()
            }
            AsymptoticTarget::ClanMoment { .. } => 1.0,
        }
    }

    fn applies_to(&self, fam: &KhinchinFamily) -> Result<()> {
        let r = fam.radius();
        let ok = match self {
            AsymptoticTarget::PartitionMean
            | AsymptoticTarget::PartitionVariance
            | AsymptoticTarget::NegBinMomentQuotient { .. } => r == Radius::Finite(1.0),
            AsymptoticTarget::BellMean | AsymptoticTarget::BellVariance => r == Radius::Infinite,
            AsymptoticTarget::ClanMoment { p } => *p > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!("target {} does not apply to {} (R = {r})", self.name(), fam.f.name)))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticTrace {
    pub target: String,
    pub grid: Vec<f64>,
    pub observed: Vec<f64>,
    pub expected: Vec<f64>,
    pub ratio: Vec<f64>,
    pub final_ratio: f64,
    /// Whether the last ratio is closer to 1 than the first.
    pub toward_one: bool,
    pub trimmed: Trimmed,
}

pub fn compare_asymptotic(fam: &KhinchinFamily, target: AsymptoticTarget, grid: &GridSpec) -> Result<AsymptoticTrace> {
    compare_asymptotic_with(fam, target, grid, Execution::default())
}

pub fn compare_asymptotic_with(
    fam: &KhinchinFamily,
    target: AsymptoticTarget,
    grid: &GridSpec,
    exec: Execution,
) -> Result<AsymptoticTrace> {
    target.applies_to(fam)?;
    let pts = grid.points(fam.radius())?;
    let (ts, obs, trimmed) = eval_grid(&pts, exec, |t| target.observed(fam, t));
    if ts.is_empty() {
        return Err(Error::Evaluation(format!("no grid point could be evaluated for {}", target.name())));
    }
    let expected: Vec<f64> = ts.iter().map(|&t| target.expected(t)).collect();
    let ratio: Vec<f64> = obs.iter().zip(&expected).map(|(o, e)| o / e).collect();
    let final_ratio = *ratio.last().unwrap();
    let toward_one = (final_ratio - 1.0).abs() <= (ratio[0] - 1.0).abs();
    Ok(AsymptoticTrace {
        target: target.name(),
        grid: ts,
        observed: obs,
        expected,
        ratio,
        final_ratio,
        toward_one,
        trimmed,
    })
}

// ---------------------------------------------------------------- canonical products with N(t) ~ C t^rho

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaTrace {
    pub rho: f64,
    pub c: f64,
    /// `pi / sin(pi rho)`, which equals `Beta(1 + rho, 1 - rho) / rho`.
    pub beta_constant: f64,
    pub grid: Vec<f64>,
    /// `ln f(t) / (C pi/sin(pi rho) t^rho)`
    pub ln_f_ratio: Vec<f64>,
    /// `m(t) / (rho C pi/sin(pi rho) t^rho)`
    pub mean_ratio: Vec<f64>,
    /// `sigma^2(t) / (rho^2 C pi/sin(pi rho) t^rho)`
    pub var_ratio: Vec<f64>,
    pub var_over_mean: Vec<f64>,
    pub trimmed: Trimmed,
}

/// `(C, rho)` with `N(t) ~ C t^rho` for the power rule `b_k = c k^a`.
pub fn counting_exponent(spec: &CanonicalProductSpec) -> Result<(f64, f64)> {
    match spec.rule {
        ZeroRule::Power { a, c } => Ok((spec.multiplicity as f64 * c.powf(-1.0 / a), 1.0 / a)),
        _ => Err(Error::Precondition("N(t) ~ C t^rho needs zeros b_k = c k^a".into())),
    }
}

pub fn beta_product_check(spec: &CanonicalProductSpec, grid: &[f64]) -> Result<BetaTrace> {
    let (c, rho) = counting_exponent(spec)?;
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Precondition(format!("rho = {rho} is not in (0, 1)")));
    }
    let beta_constant = PI / (PI * rho).sin();
    let (ts, vals, trimmed) = eval_grid(grid, Execution::default(), |t| spec.eval(t));
    let base: Vec<f64> = ts.iter().map(|&t| c * beta_constant * t.powf(rho)).collect();
    Ok(BetaTrace {
        rho,
        c,
        beta_constant,
        ln_f_ratio: vals.iter().zip(&base).map(|(v, b)| v.ln_f / b).collect(),
        mean_ratio: vals.iter().zip(&base).map(|(v, b)| v.mean / (rho * b)).collect(),
        var_ratio: vals.iter().zip(&base).map(|(v, b)| v.var / (rho * rho * b)).collect(),
        var_over_mean: vals.iter().map(|v| v.var / v.mean).collect(),
        grid: ts,
        trimmed,
    })
}

/// Intervals between zeros integrated one by one before the tail is handled.
pub const VALIRON_MAX_INTERVALS: u64 = 4000;

/// `ln f(t) = int_0^inf N(t y) / (y (y+1)) dy` against `sum ln(1 + t/b_k)`.
pub fn valiron_identity(spec: &CanonicalProductSpec, t: f64) -> Result<CheckReport> {
    const NAME: &str = "valiron-integral";
    const TOL: f64 = 1e-4;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::OutOfRange { t, radius: "inf".into() });
    }
    let subject = format!("{:?}", spec.rule);
    let direct = spec.eval(t)?.ln_f;
    if t == 0.0 {
        return Ok(CheckReport::new(NAME, &subject, direct == 0.0, TOL)
            .with("t", 0.0)
            .with("quadrature", 0.0)
            .with("direct", direct));
    }
    let count = |y: f64| spec.count(t * y) as f64;
    let integrand = |y: f64| count(y) / (y * (y + 1.0));
    let envelope = spec.counting_envelope(1.0).is_some();
    // integrate piecewise between consecutive zeros, until b_K/t is large
    let y_far: f64 = 1e12;
    let mut k_last = 1u64;
    while k_last < VALIRON_MAX_INTERVALS
        && spec.zero_count().is_none_or(|z| k_last < z)
        && spec.ln_b(k_last) - t.ln() < y_far.ln()
    {
        k_last += 1;
    }
    let mut quad = 0.0f64;
    for k in 1..k_last {
        let (a, b) = (spec.b(k) / t, spec.b(k + 1) / t);
        quad += integrate_adaptive(&integrand, a, b, 1e-12 * (1.0 + quad.abs()), 8);
    }
    let y_tail = spec.b(k_last) / t;
    // tail: y = Y/u maps [Y, inf) to (0, 1] with weight 1/(Y + u)
    let (tail, tail_route) = if let Some(n) = spec.zero_count().filter(|&z| k_last >= z) {
        let total = (n * spec.multiplicity as u64) as f64;
        (total * (1.0 + 1.0 / y_tail).ln(), "exact beyond the last zero")
    } else if envelope {
        let env = |u: f64| spec.counting_envelope(t * y_tail / u).unwrap() / (y_tail + u);
        (integrate_adaptive(&env, 0.0, 1.0, 1e-10, 12), "smooth counting envelope")
    } else {
        let g = |u: f64| count(y_tail / u) / (y_tail + u);
        (integrate_adaptive(&g, 0.0, 1.0, 1e-10, 12), "step function")
    };
    let quadrature = quad + tail;
    let gap = (quadrature - direct).abs() / direct.abs().max(f64::MIN_POSITIVE);
    Ok(CheckReport::new(NAME, &subject, gap <= TOL, TOL)
        .with("t", t)
        .with("quadrature", quadrature)
        .with("direct", direct)
        .with("rel_gap", gap)
        .with("intervals", (k_last - 1) as f64)
        .with("tail", tail)
        .noted(Some(format!("tail from y = {y_tail:.3e}: {tail_route}"))))
}
