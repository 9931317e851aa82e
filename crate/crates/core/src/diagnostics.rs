//! Finite-data diagnostics: gap statistics, clan criteria, the weak-clan
//! time average and order-of-growth traces.
//!
//! Every quantity here is an observation over a finite grid or a finite
//! stretch of the support.  Limits and limsups are never claimed; verdicts
//! are based on windowed trends.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::{FamilyStats, KhinchinFamily};
use crate::gf::{GenFunction, MfClass, Radius};
use crate::par::{self, Execution};

/// Length of the tail window used for windowed maxima over `k` observations.
pub fn window_len(k: usize) -> usize {
    ((k as f64).sqrt().ceil() as usize).max(1)
}

// ---------------------------------------------------------------- grids

/// How the parameter grid approaching `R` is built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum GridSpec {
    /// `t_j = 2^j` for `j = 0..=40` when `R = inf`, else `t_j = R(1 - 2^-j)` for `j = 1..=30`.
    Default,
    /// The same rules with `steps` points.
    ToRadius { steps: usize },
    /// Geometric approach ending at `t_max`: on `R = inf` the points are
    /// `t_max^(j/steps)`; on finite `R` the distance to `R` halves at each step.
    UpTo { t_max: f64, steps: usize },
    Explicit(Vec<f64>),
}

impl GridSpec {
    /// Parses `default`, `geo:R:steps`, `geo:<t_max>:steps` or a comma-separated list.
    pub fn parse(s: &str) -> Result<GridSpec> {
        let s = s.trim();
        if s == "default" {
            return Ok(GridSpec::Default);
        }
        let bad = || Error::Precondition(format!("grid '{s}': expected 'default', 'geo:R:steps', 'geo:<t_max>:steps' or t1,t2,..."));
        if let Some(rest) = s.strip_prefix("geo:") {
            let (end, steps) = rest.split_once(':').ok_or_else(bad)?;
            let steps: usize = steps.trim().parse().map_err(|_| bad())?;
            if steps == 0 {
                return Err(bad());
            }
            let end = end.trim();
            if end == "R" || end == "inf" {
                return Ok(GridSpec::ToRadius { steps });
            }
            let t_max: f64 = end.parse().map_err(|_| bad())?;
            if !(t_max > 0.0 && t_max.is_finite()) {
                return Err(bad());
            }
            return Ok(GridSpec::UpTo { t_max, steps });
        }
        let pts: std::result::Result<Vec<f64>, _> = s.split(',').map(|x| x.trim().parse::<f64>()).collect();
        match pts {
            Ok(v) if !v.is_empty() && v.iter().all(|t| *t >= 0.0 && t.is_finite()) => Ok(GridSpec::Explicit(v)),
            _ => Err(bad()),
        }
    }

    /// Grid points for a function of radius `r`; all points lie in `(0, R)`
    /// except explicit grids, which are checked against `R` and may contain 0.
    pub fn points(&self, r: Radius) -> Result<Vec<f64>> {
        let radius_rule = |steps: usize| -> Result<Vec<f64>> {
            match r {
                Radius::Infinite => Ok((0..steps).map(|j| 2f64.powi(j as i32)).collect()),
                Radius::Finite(r) => Ok((1..=steps).map(|j| r * (1.0 - 0.5f64.powi(j as i32))).collect()),
                Radius::Unknown => Err(Error::UnknownRadius),
            }
        };
        let pts = match self {
            GridSpec::Default => match r {
                Radius::Infinite => radius_rule(41)?,
                _ => radius_rule(30)?,
            },
            GridSpec::ToRadius { steps } => radius_rule(*steps)?,
            GridSpec::UpTo { t_max, steps } => match r {
                Radius::Infinite => {
                    if *t_max <= 1.0 {
                        (1..=*steps).map(|j| t_max * j as f64 / *steps as f64).collect()
                    } else {
                        (1..=*steps).map(|j| t_max.powf(j as f64 / *steps as f64)).collect()
                    }
                }
                Radius::Finite(rv) => {
                    if *t_max >= rv {
                        return Err(Error::OutOfRange { t: *t_max, radius: r.to_string() });
                    }
                    let d = rv - t_max;
                    (1..=*steps)
                        .map(|j| rv - d * 2f64.powi((*steps - j) as i32))
                        .filter(|&t| t > 0.0)
                        .collect()
                }
                Radius::Unknown => return Err(Error::UnknownRadius),
            },
            GridSpec::Explicit(v) => {
                for &t in v {
                    r.check(t)?;
                }
                v.clone()
            }
        };
        Ok(pts)
    }
}

/// Grid points whose evaluation failed, with the reason.
pub type Trimmed = Vec<(f64, String)>;

pub(crate) fn eval_grid<T: Send>(
    grid: &[f64],
    exec: Execution,
    f: impl Fn(f64) -> Result<T> + Sync + Send,
) -> (Vec<f64>, Vec<T>, Trimmed) {
    let raw = par::map(exec, grid, |&t| f(t));
    let (mut ts, mut vals, mut trimmed) = (Vec::new(), Vec::new(), Vec::new());
    for (t, r) in grid.iter().zip(raw) {
        match r {
            Ok(v) => {
                ts.push(*t);
                vals.push(v);
            }
            Err(e) => trimmed.push((*t, e.to_string())),
        }
    }
    (ts, vals, trimmed)
}

// ---------------------------------------------------------------- gaps

/// Gap statistics of the observed support.  All values are finite-window
/// observations of quantities defined as sups or limsups.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapStats {
    pub support_indices: Vec<u64>,
    /// Largest difference of consecutive support indices.
    pub gap_observed: u64,
    /// Largest difference over the tail window.
    pub gapbar_observed: u64,
    /// Largest ratio `n_{k+1}/n_k` over the tail window (pairs with `n_k > 0`).
    pub gbar_observed: f64,
    pub window: usize,
    pub label: &'static str,
}

/// Gap statistics of the support of `f` up to `n_max`; `window` defaults to
/// the last `ceil(sqrt K)` of the `K` observed support points.
pub fn gap_stats(f: &GenFunction, n_max: u64, window: Option<usize>) -> Result<GapStats> {
    let support = f.support_up_to(n_max);
    if support.len() < 2 {
        return Err(Error::Precondition(format!("fewer than 2 support points up to {n_max}")));
    }
    let diffs: Vec<u64> = support.windows(2).map(|w| w[1] - w[0]).collect();
    let w = window.unwrap_or_else(|| window_len(support.len())).clamp(1, diffs.len());
    let tail = &support[support.len() - w - 1..];
    let gapbar = tail.windows(2).map(|p| p[1] - p[0]).max().unwrap_or(1);
    let gbar = tail
        .windows(2)
        .filter(|p| p[0] > 0)
        .map(|p| p[1] as f64 / p[0] as f64)
        .fold(f64::NAN, f64::max);
    Ok(GapStats {
        gap_observed: *diffs.iter().max().unwrap(),
        gapbar_observed: gapbar,
        gbar_observed: gbar,
        window: w,
        label: "observed",
        support_indices: support,
    })
}

// ---------------------------------------------------------------- clans

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    ClanConsistent,
    NonclanConsistent { limit: f64 },
    Indeterminate,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::ClanConsistent => write!(f, "clan-consistent"),
            Verdict::NonclanConsistent { limit } => write!(f, "nonclan-consistent (limit ~ {limit})"),
            Verdict::Indeterminate => write!(f, "indeterminate"),
        }
    }
}

/// Thresholds for [`clan_diagnose`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClanConfig {
    /// Final `sigma/m` must be below this.
    pub threshold: f64,
    /// Number of trailing grid points over which `sigma/m` must strictly decrease.
    pub trend_points: usize,
    /// A criterion series votes "clan" when its final value is within this of 1.
    pub agree: f64,
    /// ... and "non-clan" when farther than this from 1.
    pub disagree: f64,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for ClanConfig {
    fn default() -> Self {
        ClanConfig { threshold: 0.05, trend_points: 8, agree: 0.02, disagree: 0.2, exec: Execution::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClanVerdict {
    pub grid: Vec<f64>,
    pub ratio_series: Vec<f64>,
    pub l_series: Vec<f64>,
    pub second_moment_quotient: Vec<f64>,
    /// `m(t + t/m)/m(t)`; `None` where `t + t/m >= R`.
    pub mean_ratio_series: Vec<Option<f64>>,
    /// `ln(f(t + t/m)/f(t))`; omitted unless `M_f = inf`.
    pub log_quotient_series: Option<Vec<Option<f64>>>,
    /// `E exp((X_t - m) ln(1 + 1/m))`; omitted unless `M_f = inf`.
    pub mgf_series: Option<Vec<Option<f64>>>,
    /// `(R - t) m(t)` on finite radius.
    pub rm_series: Option<Vec<f64>>,
    pub verdict: Verdict,
    /// Set when `M_f` could not be classified.
    pub conditional: bool,
    pub trimmed: Trimmed,
    pub notes: Vec<String>,
}

struct ClanPoint {
    stats: FamilyStats,
    mean_ratio: Option<f64>,
    log_quotient: Option<f64>,
    mgf_log: Option<f64>,
}

/// Below this relative shift `1/m`, `f(t + t/m)` and `f(t)` are too close in
/// double precision and the shifted criteria switch to the cumulant expansion.
const DIRECT_SHIFT_MIN: f64 = 1e-7;

struct ShiftSeries {
    mean_ratio: f64,
    log_quotient: f64,
    mgf_log: f64,
}

/// Shifted criteria from the cumulant generating function of `X_t`:
/// with `d = ln(1 + 1/m)`, `ln f(t e^d)/f(t) = sum kappa_k d^k / k!` and
/// `m(t e^d) = sum kappa_{k+1} d^k / k!`.  Only `kappa_1..kappa_3` are used,
/// since higher cumulants lose accuracy to cancellation far out in the grid.
fn shift_by_cumulants(fam: &KhinchinFamily, t: f64) -> Result<Option<ShiftSeries>> {
    let Some(ev) = &fam.f.eval else { return Ok(None) };
    let order = ev.max_order().min(3);
    if order < 2 {
        return Ok(None);
    }
    let kappa = ev.jet(t, order)?.cumulants();
    let m = kappa[1];
    let d = (1.0 / m).ln_1p();
    let (mut tail, mut slope, mut fact) = (0.0, m, 1.0);
    let mut last = 0.0f64;
    for k in 2..=order {
        fact *= k as f64;
        let term = kappa[k] * d.powi(k as i32) / fact;
        let dterm = kappa[k] * d.powi(k as i32 - 1) / (fact / k as f64);
        tail += term;
        slope += dterm;
        last = term.abs().max(dterm.abs() / m);
    }
    if !(last < 1e-6) {
        return Ok(None);
    }
    Ok(Some(ShiftSeries { mean_ratio: slope / m, log_quotient: m * d + tail, mgf_log: tail }))
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] > w[0])
}

fn last_some(xs: &[Option<f64>]) -> Option<f64> {
    xs.iter().rev().find_map(|x| *x)
}

pub fn clan_diagnose(fam: &KhinchinFamily, grid: &GridSpec) -> Result<ClanVerdict> {
    clan_diagnose_with(fam, grid, &ClanConfig::default())
}

pub fn clan_diagnose_with(fam: &KhinchinFamily, grid: &GridSpec, cfg: &ClanConfig) -> Result<ClanVerdict> {
    let radius = fam.radius();
    let pts: Vec<f64> = grid.points(radius)?.into_iter().filter(|&t| t > 0.0).collect();
    let mf = fam.classify_mf();
    let shifted = matches!(mf, MfClass::Infinite);
    let (grid, points, trimmed) = eval_grid(&pts, cfg.exec, |t| {
        let stats = fam.stats(t)?;
        let s = t + t / stats.mean;
        let inside = match radius {
            Radius::Finite(r) => s < r,
            _ => s.is_finite(),
        };
        let (mut mean_ratio, mut log_quotient, mut mgf_log) = (None, None, None);
        if inside {
            if 1.0 / stats.mean >= DIRECT_SHIFT_MIN {
                mean_ratio = Some(fam.mean(s)? / stats.mean);
                if shifted {
                    let lq = fam.ln_f(s)? - stats.log_f;
                    log_quotient = Some(lq);
                    mgf_log = Some(lq - stats.mean * (1.0 / stats.mean).ln_1p());
                }
            } else if let Some(c) = shift_by_cumulants(fam, t)? {
                mean_ratio = Some(c.mean_ratio);
                if shifted {
                    log_quotient = Some(c.log_quotient);
                    mgf_log = Some(c.mgf_log);
                }
            }
        }
        Ok(ClanPoint { stats, mean_ratio, log_quotient, mgf_log })
    });
    if points.len() < 2 {
        return Err(Error::Evaluation(format!("only {} grid points could be evaluated", points.len())));
    }
    let mut notes = Vec::new();
    let conditional = matches!(mf, MfClass::Unknown);
    if !shifted {
        notes.push(format!("M_f = {mf}: log-quotient and mgf criteria omitted"));
    }
    if conditional {
        notes.push("M_f unclassified: verdict is conditional".into());
    }
    let ratio: Vec<f64> = points.iter().map(|p| p.stats.ratio).collect();
    let mean_ratio: Vec<Option<f64>> = points.iter().map(|p| p.mean_ratio).collect();
    let lq: Option<Vec<Option<f64>>> = shifted.then(|| points.iter().map(|p| p.log_quotient).collect());
    let mgf = shifted.then(|| points.iter().map(|p| p.mgf_log.map(f64::exp)).collect::<Vec<_>>());
    let rm = match radius {
        Radius::Finite(r) => Some(points.iter().map(|p| (r - p.stats.t) * p.stats.mean).collect::<Vec<_>>()),
        _ => None,
    };

    let k = ratio.len();
    let tail = cfg.trend_points.min(k);
    let last = ratio[k - 1];
    let mut primary = last < cfg.threshold && strictly_decreasing(&ratio[k - tail..]);
    if let Some(rm) = &rm {
        primary &= strictly_increasing(&rm[k - tail..]);
    }
    let mut votes = Vec::new();
    let mut secondary = vec![("mean ratio", last_some(&mean_ratio))];
    if let (Some(lq), Some(mgf)) = (&lq, &mgf) {
        secondary.push(("log quotient", last_some(lq)));
        secondary.push(("mgf", last_some(mgf)));
    }
    for (name, v) in secondary {
        match v {
            Some(v) if (v - 1.0).abs() < cfg.agree => votes.push(true),
            Some(v) if (v - 1.0).abs() > cfg.disagree => {
                notes.push(format!("{name} criterion ends at {v}, away from 1"));
                votes.push(false)
            }
            Some(_) => {}
            None => notes.push(format!("{name} criterion undefined at the end of the grid")),
        }
    }
    let any_clan = votes.iter().any(|&v| v);
    let any_nonclan = votes.iter().any(|&v| !v);
    let verdict = if primary {
        if any_nonclan { Verdict::Indeterminate } else { Verdict::ClanConsistent }
    } else if last >= cfg.threshold && !any_clan {
        Verdict::NonclanConsistent { limit: last }
    } else {
        Verdict::Indeterminate
    };
    if !trimmed.is_empty() {
        notes.push(format!("{} grid points trimmed after evaluation failures", trimmed.len()));
    }
    Ok(ClanVerdict {
        grid,
        l_series: points.iter().map(|p| p.stats.l_f).collect(),
        second_moment_quotient: points.iter().map(|p| p.stats.second_moment_quotient).collect(),
        ratio_series: ratio,
        mean_ratio_series: mean_ratio,
        log_quotient_series: lq,
        mgf_series: mgf,
        rm_series: rm,
        verdict,
        conditional,
        trimmed,
        notes,
    })
}

// ---------------------------------------------------------------- weak clans

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakClanReport {
    pub grid: Vec<f64>,
    pub ratio_series: Vec<f64>,
    pub l_series: Vec<f64>,
    /// `min` of `sigma/m` over the grid from each point onward.
    pub running_min_ratio: Vec<f64>,
    /// `min` of `L_f` over the grid from each point onward.
    pub running_min_l: Vec<f64>,
    /// `(1/t) int_c^t L_f(s) ds` by quadrature, `c` the first grid point.
    pub average_quadrature: Vec<f64>,
    /// The same average from `(t - c) - (t/m(t) - c/m(c))`.
    pub average_closed_form: Vec<f64>,
    /// Largest relative gap between the two integrals.
    pub max_rel_gap: f64,
    pub identity_holds: bool,
    pub trimmed: Trimmed,
    pub notes: Vec<String>,
}

/// Double-exponential quadrature with bisection wherever the error estimate
/// exceeds its share of `tol`.
pub(crate) fn integrate_adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let out = quadrature::double_exponential::integrate(f, a, b, tol);
    if depth == 0 || !out.integral.is_finite() || out.error_estimate <= tol {
        return out.integral;
    }
    let mid = 0.5 * (a + b);
    integrate_adaptive(f, a, mid, 0.5 * tol, depth - 1) + integrate_adaptive(f, mid, b, 0.5 * tol, depth - 1)
}

/// `min_{j >= i} xs[j]`: the grid version of `inf_{s >= t}`, whose limit is the liminf.
fn suffix_min(xs: &[f64]) -> Vec<f64> {
    let mut out = xs.to_vec();
    for i in (0..out.len().saturating_sub(1)).rev() {
        out[i] = out[i].min(out[i + 1]);
    }
    out
}

pub fn weak_clan_diagnose(fam: &KhinchinFamily, grid: &GridSpec) -> Result<WeakClanReport> {
    weak_clan_diagnose_with(fam, grid, Execution::default())
}

pub fn weak_clan_diagnose_with(fam: &KhinchinFamily, grid: &GridSpec, exec: Execution) -> Result<WeakClanReport> {
    if fam.radius() != Radius::Infinite {
        return Err(Error::Precondition("weak-clan average needs an entire function".into()));
    }
    let mut notes = Vec::new();
    if fam.f.is_polynomial() {
        notes.push("polynomial: L_f -> 1 trivially along with sigma/m -> 0".into());
    }
    let pts: Vec<f64> = grid.points(fam.radius())?.into_iter().filter(|&t| t > 0.0).collect();
    let (grid, stats, trimmed) = eval_grid(&pts, exec, |t| fam.stats(t));
    if stats.len() < 2 {
        return Err(Error::Evaluation("fewer than 2 grid points could be evaluated".into()));
    }
    let l = |s: f64| fam.stats(s).map(|st| st.l_f).unwrap_or(f64::NAN);
    let segments: Vec<(f64, f64)> = grid.windows(2).map(|w| (w[0], w[1])).collect();
    let pieces = par::map(exec, &segments, |&(a, b)| integrate_adaptive(&l, a, b, 1e-10 * (b - a), 16));
    let c = grid[0];
    let c_term = c / stats[0].mean;
    let (mut quad, mut closed) = (vec![0.0], vec![0.0]);
    let mut acc = 0.0;
    let mut max_gap = 0.0f64;
    for (i, p) in pieces.iter().enumerate() {
        acc += p;
        let t = grid[i + 1];
        let exact = (t - c) - (t / stats[i + 1].mean - c_term);
        let gap = if acc.is_finite() { (acc - exact).abs() / exact.abs().max(t - c) } else { f64::INFINITY };
        max_gap = max_gap.max(gap);
        quad.push(acc / t);
        closed.push(exact / t);
    }
    let ratio: Vec<f64> = stats.iter().map(|s| s.ratio).collect();
    let ls: Vec<f64> = stats.iter().map(|s| s.l_f).collect();
    Ok(WeakClanReport {
        running_min_ratio: suffix_min(&ratio),
        running_min_l: suffix_min(&ls),
        grid,
        ratio_series: ratio,
        l_series: ls,
        average_quadrature: quad,
        average_closed_form: closed,
        identity_holds: max_gap <= 1e-6,
        max_rel_gap: max_gap,
        trimmed,
        notes,
    })
}

// ---------------------------------------------------------------- order

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderSummary {
    pub loglog_final: Option<f64>,
    pub hadamard_final: Option<f64>,
    pub moment_final: Option<f64>,
    /// Largest minus smallest of the available final values.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderEstimate {
    /// `(t, ln ln f(t) / ln t)` where `t > 1` and `ln f(t) > 0`.
    pub loglog_trace: Vec<(f64, f64)>,
    /// `(n, windowed max of k ln k / ln(1/a_k))` over support indices.
    pub hadamard_trace: Vec<(u64, f64)>,
    /// `(t, ln E(X_t^p)^(1/p) / ln t)` for `t > 1`.
    pub moment_trace: Vec<(f64, f64)>,
    pub p: f64,
    /// Running extremes of `sigma^2/m` over the grid.
    pub var_over_mean_min: f64,
    pub var_over_mean_max: f64,
    pub var_over_mean_final: f64,
    pub summary: OrderSummary,
    pub trimmed: Trimmed,
}

/// Support indices examined by the coefficient-side trace.
pub const HADAMARD_SUPPORT_POINTS: usize = 4000;

pub fn order_estimate(fam: &KhinchinFamily, grid: &GridSpec, p: f64) -> Result<OrderEstimate> {
    order_estimate_with(fam, grid, p, Execution::default())
}

pub fn order_estimate_with(fam: &KhinchinFamily, grid: &GridSpec, p: f64, exec: Execution) -> Result<OrderEstimate> {
    if fam.radius() != Radius::Infinite {
        return Err(Error::Precondition("order of growth is defined for entire functions".into()));
    }
    if !(p > 0.0) {
        return Err(Error::Precondition("moment exponent p must be positive".into()));
    }
    let pts: Vec<f64> = grid.points(fam.radius())?.into_iter().filter(|&t| t > 0.0).collect();
    let (ts, rows, trimmed) = eval_grid(&pts, exec, |t| {
        let st = fam.stats(t)?;
        let mp = if p == 1.0 { st.mean } else { fam.moment(p, t)? };
        Ok((st, mp))
    });
    let mut loglog = Vec::new();
    let mut moment = Vec::new();
    let mut vm = Vec::new();
    for (&t, (st, mp)) in ts.iter().zip(&rows) {
        vm.push(st.var / st.mean);
        if t > 1.0 {
            if st.log_f > 0.0 {
                loglog.push((t, st.log_f.ln() / t.ln()));
            }
            if *mp > 0.0 {
                moment.push((t, mp.ln() / p / t.ln()));
            }
        }
    }
    let mut raw = Vec::new();
    let mut n = 2u64;
    while raw.len() < HADAMARD_SUPPORT_POINTS {
        let Some(k) = fam.f.oracle.next_support(n) else { break };
        if let Some(kmax) = fam.f.oracle.known_up_to() {
            if k > kmax {
                break;
            }
        }
        let denom = -fam.f.ln_coeff(k);
        if denom > 0.0 {
            let kf = k as f64;
            raw.push((k, kf * kf.ln() / denom));
        }
        match k.checked_add(1) {
            Some(next) => n = next,
            None => break,
        }
    }
    let hadamard: Vec<(u64, f64)> = (0..raw.len())
        .map(|i| {
            let w = window_len(i + 1);
            let m = raw[i + 1 - w..=i].iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
            (raw[i].0, m)
        })
        .collect();
    let finals = [loglog.last().map(|x| x.1), hadamard.last().map(|x| x.1), moment.last().map(|x| x.1)];
    let present: Vec<f64> = finals.iter().flatten().copied().collect();
    let spread = if present.is_empty() {
        f64::NAN
    } else {
        present.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - present.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    Ok(OrderEstimate {
        loglog_trace: loglog,
        hadamard_trace: hadamard,
        moment_trace: moment,
        p,
        var_over_mean_min: vm.iter().cloned().fold(f64::INFINITY, f64::min),
        var_over_mean_max: vm.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        var_over_mean_final: vm.last().copied().unwrap_or(f64::NAN),
        summary: OrderSummary { loglog_final: finals[0], hadamard_final: finals[1], moment_final: finals[2], spread },
        trimmed,
    })
}
