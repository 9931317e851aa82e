//! Constructive checks of inequalities and identities for Khinchin families.
//!
//! Each check evaluates both sides of one finite inequality at an explicitly
//! constructed point (a saddle, a zero, a grid point) and records the values
//! as a witness.  Nothing here asserts a limit.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::exact::{decimal, exact_stats, rational_of_f64};
use crate::family::KhinchinFamily;
use crate::gf::sums::{self, walk_terms};
use crate::gf::{CanonicalProductSpec, MfClass, Radius};
use crate::par::{self, Execution};

/// Digits used when exact witnesses are rendered as decimal strings.
pub const DECIMAL_DIGITS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Standard,
    /// Exact rational arithmetic wherever the family is a polynomial with
    /// rational coefficients.
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub precision: Precision,
    /// Relative tolerance of two-route identities.
    pub identity_tol: f64,
    /// Relative tolerance when both routes are closed forms or direct sums.
    pub closed_form_tol: f64,
    /// Absolute slack allowed on inequalities; `None` picks 1e-6 (standard) or 1e-9 (high).
    pub inequality_tol: Option<f64>,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            precision: Precision::Standard,
            identity_tol: 1e-8,
            closed_form_tol: 1e-10,
            inequality_tol: None,
            exec: Execution::default(),
        }
    }
}

impl VerifyConfig {
    pub fn high() -> Self {
        VerifyConfig { precision: Precision::High, ..Default::default() }
    }

    pub fn slack(&self) -> f64 {
        self.inequality_tol.unwrap_or(match self.precision {
            Precision::Standard => 1e-6,
            Precision::High => 1e-9,
        })
    }
}

/// A witness value: a double, or an exact number rendered in decimal.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Witness {
    Num(f64),
    Exact(String),
}

impl From<f64> for Witness {
    fn from(x: f64) -> Self {
        Witness::Num(x)
    }
}

impl From<&BigRational> for Witness {
    fn from(x: &BigRational) -> Self {
        Witness::Exact(decimal(x, DECIMAL_DIGITS))
    }
}

impl Witness {
    pub fn as_f64(&self) -> f64 {
        match self {
            Witness::Num(x) => *x,
            Witness::Exact(s) => s.parse().unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check_name: String,
    pub subject: String,
    pub outcome: Outcome,
    pub passed: bool,
    pub witness: BTreeMap<String, Witness>,
    pub tolerance_used: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    pub(crate) fn new(name: &str, subject: &str, passed: bool, tol: f64) -> Self {
        CheckReport {
            check_name: name.into(),
            subject: subject.into(),
            outcome: if passed { Outcome::Pass } else { Outcome::Fail },
            passed,
            witness: BTreeMap::new(),
            tolerance_used: tol,
            note: None,
        }
    }

    pub(crate) fn skipped(name: &str, subject: &str, reason: impl Into<String>) -> Self {
        CheckReport {
            check_name: name.into(),
            subject: subject.into(),
            outcome: Outcome::Skip,
            passed: false,
            witness: BTreeMap::new(),
            tolerance_used: 0.0,
            note: Some(reason.into()),
        }
    }

    pub(crate) fn failed(name: &str, subject: &str, err: &Error) -> Self {
        let mut r = Self::new(name, subject, false, 0.0);
        r.note = Some(err.to_string());
        r
    }

    pub(crate) fn with(mut self, key: &str, v: impl Into<Witness>) -> Self {
        self.witness.insert(key.into(), v.into());
        self
    }

    pub(crate) fn noted(mut self, note: Option<String>) -> Self {
        self.note = note;
        self
    }

    pub fn get(&self, key: &str) -> f64 {
        self.witness.get(key).map_or(f64::NAN, Witness::as_f64)
    }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) }
}

fn qf(x: f64) -> BigRational {
    rational_of_f64(x)
}

/// A rational with denominator at most 1000 within `1e-12` of `x`.
fn snap(x: f64) -> Option<BigRational> {
    (1..=1000i64).find_map(|d| {
        let n = (x * d as f64).round();
        ((x - n / d as f64).abs() <= 1e-12 * x.abs().max(1.0)).then(|| BigRational::new((n as i64).into(), d.into()))
    })
}

// ---------------------------------------------------------------- saddles

fn consecutive_pair(fam: &KhinchinFamily, pair: (u64, u64)) -> Result<()> {
    let (a, b) = pair;
    let ok = a < b
        && fam.f.ln_coeff(a) > f64::NEG_INFINITY
        && fam.f.oracle.next_support(a + 1) == Some(b);
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(format!("({a}, {b}) is not a pair of consecutive support indices")))
    }
}

/// Exact mean of a rational polynomial family at `t`, by bisection to `2^-170`.
fn exact_saddle(poly: &[BigRational], target: &BigRational) -> Result<BigRational> {
    let mean = |t: &BigRational| exact_stats(poly, t).mean;
    let (mut lo, mut hi) = (BigRational::zero(), BigRational::one());
    let two = BigRational::from_integer(2.into());
    let mut guard = 0;
    while &mean(&hi) < target {
        lo = hi.clone();
        hi = &hi * &two;
        guard += 1;
        if guard > 400 {
            return Err(Error::Bracketing { reached: mean(&hi).to_f64().unwrap_or(f64::NAN), t: hi.to_f64().unwrap_or(f64::INFINITY) });
        }
    }
    if &mean(&hi) == target {
        return Ok(hi);
    }
    for _ in 0..170 {
        let mid = (&lo + &hi) / &two;
        let m = mean(&mid);
        if &m == target {
            return Ok(mid);
        }
        if &m < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / two)
}

/// `sigma^2(t*) >= (n_{k+1} - n_k)^2 / 4` at the saddle `m(t*) = (n_k + n_{k+1})/2`.
pub fn check_boichuk_goldberg(fam: &KhinchinFamily, pair: (u64, u64), cfg: &VerifyConfig) -> Result<CheckReport> {
    const NAME: &str = "boichuk-goldberg";
    consecutive_pair(fam, pair)?;
    let (a, b) = pair;
    let tol = cfg.slack();
    if cfg.precision == Precision::High {
        if let Some(poly) = &fam.f.exact_poly {
            let target = BigRational::new((a + b).into(), 2.into());
            if let MfClass::Finite(mf) = fam.classify_mf() {
                if (a + b) as f64 / 2.0 >= mf {
                    return Err(Error::TargetAboveMf { target: (a + b) as f64 / 2.0, mf: mf.to_string() });
                }
            }
            let t = exact_saddle(poly, &target)?;
            let st = exact_stats(poly, &t);
            let d = BigRational::from_integer((b - a).into());
            let rhs = &d * &d / BigRational::from_integer(4.into());
            let slack = &st.var - &rhs;
            let passed = slack >= -qf(tol);
            return Ok(CheckReport::new(NAME, &fam.f.name, passed, tol)
                .with("n_k", a as f64)
                .with("n_k1", b as f64)
                .with("t_star", &t)
                .with("m_t_star", &st.mean)
                .with("lhs", &st.var)
                .with("rhs", &rhs)
                .with("slack", &slack));
        }
    }
    let mid = (a + b) as f64 / 2.0;
    let t = fam.solve_t_for_mean_with(mid, true)?;
    let st = fam.stats(t)?;
    let rhs = ((b - a) as f64).powi(2) / 4.0;
    let slack = st.var - rhs;
    Ok(CheckReport::new(NAME, &fam.f.name, slack >= -tol, tol)
        .with("n_k", a as f64)
        .with("n_k1", b as f64)
        .with("t_star", t)
        .with("m_t_star", st.mean)
        .with("lhs", st.var)
        .with("rhs", rhs)
        .with("slack", slack))
}

/// `sigma/m >= (n_{k+1} - n_k)/(n_{k+1} + n_k)` at the same saddle; needs `M_f = inf`.
pub fn check_quotient_bound(fam: &KhinchinFamily, pair: (u64, u64), cfg: &VerifyConfig) -> Result<CheckReport> {
    const NAME: &str = "quotient-bound";
    if fam.classify_mf() != MfClass::Infinite {
        return Err(Error::Precondition(format!("M_f = {} is not infinite", fam.classify_mf())));
    }
    consecutive_pair(fam, pair)?;
    let (a, b) = pair;
    let tol = cfg.slack();
    let t = fam.solve_t_for_mean((a + b) as f64 / 2.0)?;
    let st = fam.stats(t)?;
    let rhs = (b - a) as f64 / (a + b) as f64;
    let slack = st.ratio - rhs;
    Ok(CheckReport::new(NAME, &fam.f.name, slack >= -tol, tol)
        .with("n_k", a as f64)
        .with("n_k1", b as f64)
        .with("t_star", t)
        .with("lhs", st.ratio)
        .with("rhs", rhs)
        .with("slack", slack))
}

// ---------------------------------------------------------------- zeros

/// `|E e^{i theta X_t}| = |f(t e^{i theta})| / f(t)` by the evaluator or by
/// direct complex partial sums of the pmf.
pub fn abs_char_function(fam: &KhinchinFamily, t: f64, theta: f64) -> Result<f64> {
    if let Some(r) = fam.f.eval.as_ref().and_then(|ev| ev.abs_ratio(t, theta)) {
        return r;
    }
    let lf = fam.ln_f(t)?;
    let mut acc = Complex64::new(0.0, 0.0);
    walk_terms(&fam.f, t, 0.0, &fam.sum, |n, lw| {
        acc += Complex64::from_polar((lw - lf).exp(), (n as f64 * theta).rem_euclid(2.0 * PI));
    })?;
    Ok(acc.norm())
}

/// Threshold below which `|f(t e^{i theta})| / f(t)` confirms a zero.
pub const ZERO_CONFIRMATION: f64 = 1e-8;

/// `|theta| sigma(t) >= pi/2` at a zero `t e^{i theta}` of `f`.
pub fn check_zero_free(fam: &KhinchinFamily, zero: (f64, f64), cfg: &VerifyConfig) -> Result<CheckReport> {
    const NAME: &str = "zero-free";
    let (t, theta) = zero;
    let ratio = abs_char_function(fam, t, theta)?;
    if !(ratio < ZERO_CONFIRMATION) {
        return Err(Error::Precondition(format!(
            "{t} e^(i {theta}) is not a zero: |f(z)|/f(|z|) = {ratio:e}"
        )));
    }
    let tol = cfg.slack();
    if cfg.precision == Precision::High {
        if let (Some(poly), Some(q), Some(tq)) = (&fam.f.exact_poly, snap(theta.abs() / PI), snap(t)) {
            // |theta| sigma >= pi/2  <=>  q^2 sigma^2 >= 1/4 for theta = q pi
            let st = exact_stats(poly, &tq);
            let lhs = &q * &q * &st.var;
            let rhs = BigRational::new(1.into(), 4.into());
            let slack = &lhs - &rhs;
            let passed = slack >= -qf(tol);
            return Ok(CheckReport::new(NAME, &fam.f.name, passed, tol)
                .with("t", &tq)
                .with("theta_over_pi", &q)
                .with("abs_ratio", ratio)
                .with("sigma2", &st.var)
                .with("lhs", &lhs)
                .with("rhs", &rhs)
                .with("slack", &slack)
                .noted(Some("compared as (theta/pi)^2 sigma^2 >= 1/4".into())));
        }
    }
    let sigma = fam.stats(t)?.var.sqrt();
    let lhs = theta.abs() * sigma;
    let slack = lhs - PI / 2.0;
    Ok(CheckReport::new(NAME, &fam.f.name, slack >= -tol, tol)
        .with("t", t)
        .with("theta", theta)
        .with("abs_ratio", ratio)
        .with("sigma", sigma)
        .with("lhs", lhs)
        .with("rhs", PI / 2.0)
        .with("slack", slack))
}

/// Complex roots of `sum c_n z^n` by Durand-Kerner iteration.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let deg = coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0);
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let p = |z: Complex64| coeffs[..=deg].iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c / lead);
    // Cauchy bound for the initial circle
    let bound = 1.0 + coeffs[..deg].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
    let seed = Complex64::from_polar(0.4 * bound, 0.9);
    let mut roots: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32 + 1) / bound.powi(k as i32)).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..deg {
            let zi = roots[i];
            let denom = (0..deg).filter(|&j| j != i).fold(Complex64::new(1.0, 0.0), |acc, j| acc * (zi - roots[j]));
            let step = p(zi) / denom;
            roots[i] = zi - step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-16 * bound {
            break;
        }
    }
    roots
}

// ---------------------------------------------------------------- canonical products

/// `sigma^2 < m < 2 sigma^2 + N(t)` at every grid point.
pub fn check_canonical_sandwich(spec: &CanonicalProductSpec, grid: &[f64]) -> Result<CheckReport> {
    const NAME: &str = "canonical-sandwich";
    const STRICT: f64 = 1e-12;
    if spec.multiplicity != 1 {
        return Err(Error::Precondition("sandwich check needs simple zeros".into()));
    }
    let (mut low_margin, mut high_margin) = (f64::INFINITY, f64::INFINITY);
    let mut worst_t = f64::NAN;
    let mut passed = true;
    for &t in grid.iter().filter(|&&t| t > 0.0) {
        let v = spec.eval(t)?;
        let lo = (v.mean - v.var) / v.mean;
        let hi = (2.0 * v.var + v.count as f64 - v.mean) / v.mean;
        if lo.min(hi) < low_margin.min(high_margin) {
            worst_t = t;
        }
        low_margin = low_margin.min(lo);
        high_margin = high_margin.min(hi);
        // strict inequalities, allowing relative rounding of 1e-12
        passed &= lo > -STRICT && hi > -STRICT;
    }
    Ok(CheckReport::new(NAME, &format!("{:?}", spec.rule), passed, STRICT)
        .with("points", grid.len() as f64)
        .with("min_rel_margin_var_below_mean", low_margin)
        .with("min_rel_margin_mean_below_bound", high_margin)
        .with("worst_t", worst_t))
}

/// The window `I_n = [sqrt(b_{n-1} b_n), sqrt(b_n b_{n+1})]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpacingWindow {
    pub n: u64,
    pub lower: f64,
    pub upper: f64,
}

impl SpacingWindow {
    pub fn new(spec: &CanonicalProductSpec, n: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Precondition("window index must be at least 2".into()));
        }
        let (l0, l1, l2) = (spec.ln_b(n - 1), spec.ln_b(n), spec.ln_b(n + 1));
        Ok(SpacingWindow { n, lower: (0.5 * (l0 + l1)).exp(), upper: (0.5 * (l1 + l2)).exp() })
    }

    /// `phi(x) = x/(1+x)^2`, maximal (1/4) at `x = 1`.
    pub fn phi(x: f64) -> f64 {
        x / ((1.0 + x) * (1.0 + x))
    }
}

/// Bounds on `sigma^2` over `I_n` for zeros with `b_{k+1} >= 2 b_k`:
/// `sigma^2 <= 1/4 + 4 max(q)` and `sigma^2 >= min(q)/4`, where
/// `q = {sqrt(b_n/b_{n+1}), sqrt(b_{n-1}/b_n)}`.
pub fn check_spacing_bounds(spec: &CanonicalProductSpec, n: u64, samples: usize) -> Result<CheckReport> {
    const NAME: &str = "spacing-bounds";
    let need = n + 64;
    if let Some(z) = spec.zero_count() {
        if n + 1 > z {
            return Err(Error::Precondition(format!("index {n} needs b_{{n+1}}, only {z} zeros")));
        }
    }
    if !spec.doubling_holds(need) {
        return Err(Error::Precondition("doubling condition b_{k+1} >= 2 b_k fails".into()));
    }
    let w = SpacingWindow::new(spec, n)?;
    let q1 = (0.5 * (spec.ln_b(n) - spec.ln_b(n + 1))).exp();
    let q2 = (0.5 * (spec.ln_b(n - 1) - spec.ln_b(n))).exp();
    let upper = 0.25 + 4.0 * q1.max(q2);
    let lower = 0.25 * q1.min(q2);
    let samples = samples.max(2);
    let (mut smin, mut smax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (ll, lu) = (w.lower.ln(), w.upper.ln());
    for i in 0..samples {
        let t = (ll + (lu - ll) * i as f64 / (samples - 1) as f64).exp();
        let v = spec.eval(t)?.var;
        smin = smin.min(v);
        smax = smax.max(v);
    }
    let tol = 1e-12;
    let passed = smax <= upper + tol && smin >= lower - tol;
    Ok(CheckReport::new(NAME, &format!("{:?}", spec.rule), passed, tol)
        .with("n", n as f64)
        .with("window_lower", w.lower)
        .with("window_upper", w.upper)
        .with("sigma2_min", smin)
        .with("sigma2_max", smax)
        .with("bound_lower", lower)
        .with("bound_upper", upper))
}

// ---------------------------------------------------------------- identities

/// Terms of the factorial-moment series.
pub const FLAMBDA_TERMS: u32 = 60;

/// `f(t + t/m)/f(t) = sum_k E X^(k) / (k! m^k)`.
pub fn check_flambda_series(fam: &KhinchinFamily, t: f64) -> Result<CheckReport> {
    const NAME: &str = "flambda-series";
    let m = fam.mean(t)?;
    let s = t + t / m;
    let inside = match fam.radius() {
        Radius::Finite(r) => s < r,
        Radius::Infinite => true,
        Radius::Unknown => false,
    };
    if !inside {
        return Err(Error::Precondition(format!("t + t/m = {s} is not inside the disc of convergence")));
    }
    let lhs = (fam.ln_f(s)? - fam.ln_f(t)?).exp();
    let (fm, _) = sums::factorial_moments_series(&fam.f, t, FLAMBDA_TERMS, &fam.sum)?;
    let (mut rhs, mut lnk, mut last) = (0.0, 0.0, 0.0);
    for (k, &e) in fm.iter().enumerate() {
        if k > 0 {
            lnk += (k as f64).ln();
        }
        if e > 0.0 {
            last = (e.ln() - lnk - k as f64 * m.ln()).exp();
            rhs += last;
        } else {
            last = 0.0;
        }
    }
    let tol = 1e-6;
    let gap = rel_gap(lhs, rhs);
    let converged = last <= 1e-10 * rhs;
    Ok(CheckReport::new(NAME, &fam.f.name, gap <= tol && converged, tol)
        .with("t", t)
        .with("m", m)
        .with("lhs", lhs)
        .with("rhs", rhs)
        .with("rel_gap", gap)
        .with("last_term", last)
        .noted((!converged).then(|| "factorial-moment series not converged".into())))
}

/// `E W_t^p = E X_t^{p+1} / m(t)` with `W` the derivative family.
pub fn check_derivative_relation(fam: &KhinchinFamily, p: u32, t: f64, cfg: &VerifyConfig) -> Result<CheckReport> {
    const NAME: &str = "derivative-relation";
    if fam.f.nonzero_count(3) < 3 {
        return Err(Error::Precondition("degenerate derivative family: f has two nonzero coefficients".into()));
    }
    let w = fam.derivative_family()?;
    let m = fam.mean(t)?;
    let mut note = None;
    let lhs = match sums::power_sums(&w.f, &[0.0, p as f64], t, &w.sum) {
        Ok((ls, _)) => (ls[1] - ls[0]).exp(),
        Err(e) => {
            note = Some(format!("direct sum for W unavailable ({e}); used the W jet"));
            w.moment(p as f64, t)?
        }
    };
    let rhs = fam.moment((p + 1) as f64, t)? / m;
    let tol = cfg.closed_form_tol;
    let gap = rel_gap(lhs, rhs);
    Ok(CheckReport::new(NAME, &fam.f.name, gap <= tol, tol)
        .with("p", p as f64)
        .with("t", t)
        .with("lhs", lhs)
        .with("rhs", rhs)
        .with("rel_gap", gap)
        .noted(note))
}

/// `E X^k` against `sum_j S(k, j) E X^(j)` for `k = 1..=k_max`.
pub fn check_stirling(fam: &KhinchinFamily, k_max: u32, t: f64, cfg: &VerifyConfig) -> Result<CheckReport> {
    const NAME: &str = "stirling";
    let mut worst = 0.0f64;
    let mut worst_k = 0;
    for k in 1..=k_max {
        let a = fam.moment(k as f64, t)?;
        let b = fam.moment_via_stirling(k, t)?;
        let g = rel_gap(a, b);
        if !(g <= worst) {
            worst = g;
            worst_k = k;
        }
    }
    let tol = cfg.identity_tol;
    Ok(CheckReport::new(NAME, &fam.f.name, worst <= tol, tol)
        .with("t", t)
        .with("k_max", k_max as f64)
        .with("worst_k", worst_k as f64)
        .with("max_rel_gap", worst))
}

// ---------------------------------------------------------------- suite

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    BoichukGoldberg,
    QuotientBound,
    ZeroFree,
    Sandwich,
    Spacing,
    Flambda,
    Derivative,
    Stirling,
}

impl CheckKind {
    pub const ALL: [CheckKind; 8] = [
        CheckKind::BoichukGoldberg,
        CheckKind::QuotientBound,
        CheckKind::ZeroFree,
        CheckKind::Sandwich,
        CheckKind::Spacing,
        CheckKind::Flambda,
        CheckKind::Derivative,
        CheckKind::Stirling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::BoichukGoldberg => "boichuk-goldberg",
            CheckKind::QuotientBound => "quotient-bound",
            CheckKind::ZeroFree => "zero-free",
            CheckKind::Sandwich => "canonical-sandwich",
            CheckKind::Spacing => "spacing-bounds",
            CheckKind::Flambda => "flambda-series",
            CheckKind::Derivative => "derivative-relation",
            CheckKind::Stirling => "stirling",
        }
    }

    /// `full`, an empty string (no checks) or a comma-separated list of names.
    pub fn parse_list(s: &str) -> Result<Vec<CheckKind>> {
        let s = s.trim();
        if s == "full" || s == "all" {
            return Ok(Self::ALL.to_vec());
        }
        s.split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(|x| {
                Self::ALL
                    .iter()
                    .copied()
                    .find(|k| k.name() == x || k.name().starts_with(&format!("{x}-")))
                    .ok_or_else(|| Error::Precondition(format!("unknown check '{x}'")))
            })
            .collect()
    }
}

/// Consecutive support pairs examined by the saddle checks.
pub const SUITE_PAIRS: usize = 8;

/// Parameter at which identity checks are evaluated: `R/2`, or 3 for entire functions.
pub fn probe_t(fam: &KhinchinFamily) -> Option<f64> {
    match fam.radius() {
        Radius::Finite(r) => Some(0.5 * r),
        Radius::Infinite => Some(3.0),
        Radius::Unknown => None,
    }
}

fn support_pairs(fam: &KhinchinFamily) -> Vec<(u64, u64)> {
    let mut pairs = Vec::new();
    let Some(mut a) = fam.f.oracle.next_support(0) else { return pairs };
    while pairs.len() < SUITE_PAIRS {
        let Some(b) = a.checked_add(1).and_then(|n| fam.f.oracle.next_support(n)) else { break };
        if let Some(k) = fam.f.oracle.known_up_to() {
            if b > k {
                break;
            }
        }
        pairs.push((a, b));
        a = b;
    }
    pairs
}

fn zeros_of(fam: &KhinchinFamily) -> Vec<(f64, f64)> {
    if !fam.f.known_zeros.is_empty() {
        return fam.f.known_zeros.clone();
    }
    match fam.f.oracle.degree() {
        Some(d) if d <= 64 => {
            let c: Vec<f64> = (0..=d).map(|n| fam.f.coeff(n)).collect();
            let mut z: Vec<(f64, f64)> = polynomial_roots(&c).iter().map(|r| (r.norm(), r.arg())).collect();
            z.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            z
        }
        _ => Vec::new(),
    }
}

fn saddle_reports(
    fam: &KhinchinFamily,
    subject: &str,
    kind: CheckKind,
    cfg: &VerifyConfig,
) -> Vec<CheckReport> {
    let name = kind.name();
    if kind == CheckKind::QuotientBound && fam.classify_mf() != MfClass::Infinite {
        return vec![CheckReport::skipped(name, subject, format!("M_f = {} is not infinite", fam.classify_mf()))];
    }
    let mut out = Vec::new();
    for pair in support_pairs(fam) {
        if let MfClass::Finite(mf) = fam.classify_mf() {
            if (pair.0 + pair.1) as f64 / 2.0 >= mf {
                break;
            }
        }
        let r = match kind {
            CheckKind::BoichukGoldberg => check_boichuk_goldberg(fam, pair, cfg),
            _ => check_quotient_bound(fam, pair, cfg),
        };
        match r {
            Ok(r) => out.push(r),
            Err(e @ (Error::Bracketing { .. } | Error::OutOfRange { .. })) => {
                // saddle beyond double range: the checked prefix stands
                if let Some(last) = out.last_mut() {
                    last.note = Some(format!("pairs capped after ({}, {}): {e}", pair.0, pair.1));
                }
                break;
            }
            Err(e) => out.push(CheckReport::failed(name, subject, &e)),
        }
    }
    if out.is_empty() {
        out.push(CheckReport::skipped(name, subject, "no support pair with midpoint below M_f"));
    }
    out
}

fn run_one(fam: &KhinchinFamily, subject: &str, kind: CheckKind, cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = kind.name();
    let wrap = |r: Result<CheckReport>| match r {
        Ok(r) => r,
        Err(Error::Precondition(p)) => CheckReport::skipped(name, subject, p),
        Err(e) => CheckReport::failed(name, subject, &e),
    };
    let t = probe_t(fam);
    match kind {
        CheckKind::BoichukGoldberg | CheckKind::QuotientBound => saddle_reports(fam, subject, kind, cfg),
        CheckKind::ZeroFree => {
            let zeros = zeros_of(fam);
            if zeros.is_empty() {
                return vec![CheckReport::skipped(name, subject, "no known zeros")];
            }
            zeros.into_iter().map(|z| wrap(check_zero_free(fam, z, cfg))).collect()
        }
        CheckKind::Sandwich | CheckKind::Spacing => {
            let Some(spec) = &fam.f.canonical else {
                return vec![CheckReport::skipped(name, subject, "not a canonical product")];
            };
            if kind == CheckKind::Sandwich {
                let grid: Vec<f64> = (-10..=30).map(|j| 2f64.powi(j)).collect();
                vec![wrap(check_canonical_sandwich(spec, &grid))]
            } else {
                (2..=6).map(|n| wrap(check_spacing_bounds(spec, n, 9))).collect()
            }
        }
        CheckKind::Flambda | CheckKind::Derivative | CheckKind::Stirling => {
            let Some(t) = t else {
                return vec![CheckReport::skipped(name, subject, "radius unknown")];
            };
            match kind {
                CheckKind::Flambda => vec![wrap(check_flambda_series(fam, t))],
                CheckKind::Derivative => (1..=2).map(|p| wrap(check_derivative_relation(fam, p, t, cfg))).collect(),
                _ => vec![wrap(check_stirling(fam, 8, t, cfg))],
            }
        }
    }
}

/// Runs the selected checks over a corpus; reports come back in corpus order,
/// then check order.
pub fn run_suite(corpus: &[(String, KhinchinFamily)], checks: &[CheckKind], cfg: &VerifyConfig) -> Vec<CheckReport> {
    let jobs: Vec<(usize, CheckKind)> =
        (0..corpus.len()).flat_map(|i| checks.iter().map(move |&k| (i, k))).collect();
    par::map(cfg.exec, &jobs, |&(i, k)| {
        let mut reports = run_one(&corpus[i].1, &corpus[i].0, k, cfg);
        for r in &mut reports {
            r.subject.clone_from(&corpus[i].0);
        }
        reports
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Whether no report in the list failed.
pub fn all_passed(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.outcome != Outcome::Fail)
}
