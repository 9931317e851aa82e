//! Adaptive partial sums over the coefficient oracle.
//!
//! Terms `w_n = a_n t^n` are visited in increasing support order.  The walk
//! stops once the term ratios have stayed below one for a run of steps and
//! the geometric tail bound `w q / (1 - q)` is negligible relative to the
//! partial sum; on finite radius the ratio bound is never taken below the
//! root-test limit `(t/R)^gap`.

use super::genfn::{GenFunction, Radius};
use super::signed_log::{LogSum, SignedLog};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumConfig {
    /// Relative tail tolerance (absolute error in `ln f`).
    pub tol: f64,
    pub max_terms: usize,
    /// Consecutive decreasing ratios required before the tail test applies.
    pub run: usize,
}

impl Default for SumConfig {
    fn default() -> Self {
        SumConfig { tol: 1e-16, max_terms: 20_000_000, run: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkReport {
    pub terms: usize,
    pub last_index: u64,
    /// Achieved relative tail bound (0 when the support was exhausted).
    pub tail_rel: f64,
}

/// Visit `(n, ln(a_n t^n))` until the tail of `sum n^pmax a_n t^n` is below tolerance.
pub fn walk_terms(
    f: &GenFunction,
    t: f64,
    pmax: f64,
    cfg: &SumConfig,
    mut visit: impl FnMut(u64, f64),
) -> Result<WalkReport> {
    f.radius.check(t)?;
    let oracle = &f.oracle;
    if t == 0.0 {
        let l0 = oracle.ln_coeff(0);
        visit(0, l0);
        return Ok(WalkReport { terms: 1, last_index: 0, tail_rel: 0.0 });
    }
    let lt = t.ln();
    let root_limit = match f.radius {
        Radius::Finite(r) => Some((t / r).ln()),
        _ => None,
    };
    let weight = |n: u64| if n == 0 { if pmax == 0.0 { 0.0 } else { f64::NEG_INFINITY } } else { pmax * (n as f64).ln() };
    let mut acc = LogSum::new();
    let mut n = match oracle.next_support(0) {
        Some(n) => n,
        None => return Err(Error::Evaluation("empty support".into())),
    };
    let mut terms = 0usize;
    let mut prev: Option<f64> = None; // ln of the previous weighted term
    let mut run = 0usize;
    let mut last_tail = f64::INFINITY;
    loop {
        let lw = oracle.ln_coeff(n) + n as f64 * lt;
        visit(n, lw);
        terms += 1;
        let lwp = lw + weight(n);
        if lwp > f64::NEG_INFINITY {
            acc.push_ln(lwp);
        }
        let next = oracle.next_support(n + 1);
        if let Some(plw) = prev {
            let mut lq = lwp - plw;
            if let Some(rl) = root_limit {
                lq = lq.max(rl);
            }
            if lq < 0.0 && lwp > f64::NEG_INFINITY {
                run += 1;
            } else {
                run = 0;
            }
            if run >= cfg.run {
                let ln_tail = lwp + lq - (-lq.exp()).ln_1p();
                let rel = (ln_tail - acc.value().ln_mag).exp();
                last_tail = rel;
                if rel < cfg.tol {
                    return Ok(WalkReport { terms, last_index: n, tail_rel: rel });
                }
            }
        }
        prev = Some(lwp);
        match next {
            None => {
                if oracle.known_up_to().is_some() {
                    return Err(Error::TailUnattainable { achieved: last_tail, terms });
                }
                return Ok(WalkReport { terms, last_index: n, tail_rel: 0.0 });
            }
            Some(k) => n = k,
        }
        if terms >= cfg.max_terms {
            return Err(Error::TailUnattainable { achieved: last_tail, terms });
        }
    }
}

/// Weighted mean and variance accumulator in rescaled linear space.
#[derive(Debug, Clone, Copy)]
pub struct WeightedMoments {
    max_ln: f64,
    w: f64,
    mean: f64,
    m2: f64,
}

impl Default for WeightedMoments {
    fn default() -> Self {
        WeightedMoments { max_ln: f64::NEG_INFINITY, w: 0.0, mean: 0.0, m2: 0.0 }
    }
}

impl WeightedMoments {
    pub fn push(&mut self, x: f64, ln_w: f64) {
        if ln_w == f64::NEG_INFINITY {
            return;
        }
        if ln_w > self.max_ln {
            if self.max_ln > f64::NEG_INFINITY {
                let s = (self.max_ln - ln_w).exp();
                self.w *= s;
                self.m2 *= s;
            }
            self.max_ln = ln_w;
        }
        let wi = (ln_w - self.max_ln).exp();
        let w_new = self.w + wi;
        let delta = x - self.mean;
        self.mean += wi / w_new * delta;
        self.m2 += wi * delta * (x - self.mean);
        self.w = w_new;
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn var(&self) -> f64 {
        (self.m2 / self.w).max(0.0)
    }
}

/// `ln f(t)` by partial sums.
pub fn eval_log_f_series(f: &GenFunction, t: f64, cfg: &SumConfig) -> Result<(f64, WalkReport)> {
    let mut acc = LogSum::new();
    let rep = walk_terms(f, t, 0.0, cfg, |_, lw| acc.push_ln(lw))?;
    Ok((acc.value().ln_mag, rep))
}

/// `f(t)` as a log-space value (its `ln_mag` is `ln f(t)`), through the
/// closed-form evaluator when present.
pub fn eval_log_f(f: &GenFunction, t: f64, cfg: &SumConfig) -> Result<SignedLog> {
    f.radius.check(t)?;
    if let Some(ev) = &f.eval {
        let j = ev.jet(t, 0)?;
        return Ok(SignedLog::new(j.sign, j.ln_mag));
    }
    let (l, _) = eval_log_f_series(f, t, cfg)?;
    Ok(SignedLog::from_ln(l))
}

/// `S_p(t) = sum n^p a_n t^n` in log space.
pub fn weighted_power_sum(f: &GenFunction, p: f64, t: f64, cfg: &SumConfig) -> Result<(SignedLog, WalkReport)> {
    assert!(p >= 0.0);
    let mut acc = LogSum::new();
    let rep = walk_terms(f, t, p, cfg, |n, lw| {
        if p == 0.0 {
            acc.push_ln(lw);
        } else if n > 0 {
            acc.push_ln(lw + p * (n as f64).ln());
        }
    })?;
    Ok((acc.value(), rep))
}

/// Several weighted sums `ln S_p` in one walk.
pub fn power_sums(f: &GenFunction, ps: &[f64], t: f64, cfg: &SumConfig) -> Result<(Vec<f64>, WalkReport)> {
    let pmax = ps.iter().cloned().fold(0.0, f64::max);
    let mut accs = vec![LogSum::new(); ps.len()];
    let rep = walk_terms(f, t, pmax, cfg, |n, lw| {
        let ln_n = (n as f64).ln();
        for (acc, &p) in accs.iter_mut().zip(ps) {
            if p == 0.0 {
                acc.push_ln(lw);
            } else if n > 0 {
                acc.push_ln(lw + p * ln_n);
            }
        }
    })?;
    Ok((accs.iter().map(|a| a.value().ln_mag).collect(), rep))
}

/// Falling factorial `n (n-1) ... (n-k+1)` in log space (`-inf` if `n < k`).
pub fn ln_falling(n: u64, k: u32) -> f64 {
    if (n as u128) < k as u128 {
        return f64::NEG_INFINITY;
    }
    (0..k as u64).map(|i| ((n - i) as f64).ln()).sum()
}

/// Normalized factorial-moment sums `E X^(k)` for `k = 0..=k_max`, in one walk.
pub fn factorial_moments_series(f: &GenFunction, t: f64, k_max: u32, cfg: &SumConfig) -> Result<(Vec<f64>, WalkReport)> {
    let mut accs = vec![LogSum::new(); k_max as usize + 1];
    let rep = walk_terms(f, t, k_max as f64, cfg, |n, lw| {
        let mut lf = 0.0;
        for k in 0..=k_max {
            if k > 0 {
                if n < k as u64 {
                    break;
                }
                lf += ((n - k as u64 + 1) as f64).ln();
            }
            accs[k as usize].push_ln(lw + lf);
        }
    })?;
    let l0 = accs[0].value().ln_mag;
    Ok((accs.iter().map(|a| (a.value().ln_mag - l0).exp()).collect(), rep))
}

/// Mean, variance and second factorial moment from one walk.
#[derive(Debug, Clone, Copy)]
pub struct SeriesMoments {
    pub ln_f: f64,
    pub mean: f64,
    pub var: f64,
    /// `E X(X-1)`
    pub fact2: f64,
    /// `E X^2 = S_2 / S_0`
    pub second: f64,
    pub report: WalkReport,
}

pub fn series_moments(f: &GenFunction, t: f64, cfg: &SumConfig) -> Result<SeriesMoments> {
    let mut s0 = LogSum::new();
    let mut s2 = LogSum::new();
    let mut f2 = LogSum::new();
    let mut wm = WeightedMoments::default();
    let report = walk_terms(f, t, 2.0, cfg, |n, lw| {
        s0.push_ln(lw);
        wm.push(n as f64, lw);
        if n > 0 {
            s2.push_ln(lw + 2.0 * (n as f64).ln());
        }
        if n > 1 {
            f2.push_ln(lw + (n as f64).ln() + ((n - 1) as f64).ln());
        }
    })?;
    let ln_f = s0.value().ln_mag;
    Ok(SeriesMoments {
        ln_f,
        mean: wm.mean(),
        var: wm.var(),
        fact2: (f2.value().ln_mag - ln_f).exp(),
        second: (s2.value().ln_mag - ln_f).exp(),
        report,
    })
}
