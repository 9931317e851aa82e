//! Exact sampling of `X_t` by inverse CDF over an explicitly truncated
//! support, and Monte Carlo checks of concentration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::KhinchinFamily;
use crate::gf::MfClass;
use crate::par::{self, Execution};

/// Identifier of the pseudorandom generator recorded in every batch.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng::seed_from_u64";

/// Default bound on the probability mass left outside the sampled support.
pub const TAIL_EPS: f64 = 1e-12;

/// Largest support table the sampler will build.
pub const MAX_SUPPORT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBatch {
    pub t: f64,
    pub seed: u64,
    pub count: usize,
    pub rng: &'static str,
    pub samples: Vec<u64>,
    /// Upper bound on `P(X_t < lo) + P(X_t > hi)`.
    pub truncation_tail_mass: f64,
    pub support: (u64, u64),
}

/// The law of `X_t` restricted to `[lo, hi]`, as a cumulative table.
#[derive(Debug, Clone)]
pub struct TruncatedLaw {
    pub t: f64,
    pub lo: u64,
    pub hi: u64,
    /// Support points with nonzero probability.
    pub points: Vec<u64>,
    /// Normalised probabilities, aligned with `points`.
    pub pmf: Vec<f64>,
    cdf: Vec<f64>,
    pub tail_mass: f64,
}

impl TruncatedLaw {
    pub fn new(fam: &KhinchinFamily, t: f64, eps: f64) -> Result<Self> {
        fam.f.radius.check(t)?;
        if t == 0.0 {
            return Ok(TruncatedLaw { t, lo: 0, hi: 0, points: vec![0], pmf: vec![1.0], cdf: vec![1.0], tail_mass: 0.0 });
        }
        let (lo, hi, tail_mass) = truncation(fam, t, eps)?;
        let lf = fam.ln_f(t)?;
        let lt = t.ln();
        let mut points = Vec::new();
        let mut pmf = Vec::new();
        let mut n = fam.f.oracle.next_support(lo);
        while let Some(k) = n.filter(|&k| k <= hi) {
            let l = fam.f.ln_coeff(k);
            if l > f64::NEG_INFINITY {
                points.push(k);
                pmf.push((l + k as f64 * lt - lf).exp());
            }
            n = k.checked_add(1).and_then(|k| fam.f.oracle.next_support(k));
        }
        let total: f64 = pmf.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Evaluation(format!("no probability mass on [{lo}, {hi}] at t = {t}")));
        }
        let mut acc = 0.0;
        let mut cdf = Vec::with_capacity(pmf.len());
        for p in pmf.iter_mut() {
            *p /= total;
            acc += *p;
            cdf.push(acc);
        }
        *cdf.last_mut().unwrap() = 1.0;
        Ok(TruncatedLaw { t, lo, hi, points, pmf, cdf, tail_mass })
    }

    /// The support point at cumulative probability `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> u64 {
        let i = self.cdf.partition_point(|&c| c <= u);
        self.points[i.min(self.points.len() - 1)]
    }

    pub fn prob(&self, n: u64) -> f64 {
        self.points.binary_search(&n).map_or(0.0, |i| self.pmf[i])
    }
}

/// Chernoff bound `P(X_t >= N) <= f(s) t^N / (f(t) s^N)` at the saddle `m(s) = N`
/// (and the mirror bound for `X_t <= N`).
fn chernoff(fam: &KhinchinFamily, t: f64, lf: f64, n: f64) -> Result<f64> {
    let s = fam.solve_t_for_mean(n)?;
    Ok((fam.ln_f(s)? - lf + n * (t.ln() - s.ln())).exp().min(1.0))
}

/// Support window `[lo, hi]` with mass outside below `eps`.
fn truncation(fam: &KhinchinFamily, t: f64, eps: f64) -> Result<(u64, u64, f64)> {
    let st = fam.stats(t)?;
    let (m, sigma) = (st.mean, st.var.sqrt().max(1.0));
    let mf = match fam.classify_mf() {
        MfClass::Finite(mf) => Some(mf),
        _ => None,
    };
    let half = 0.5 * eps;
    let mut k = 8.0;
    let (mut hi, mut right) = (None, 1.0);
    while k <= 4096.0 {
        let n = (m + k * sigma).ceil();
        if mf.is_some_and(|mf| n >= mf) {
            hi = Some(mf.unwrap() as u64);
            right = 0.0;
            break;
        }
        let b = chernoff(fam, t, st.log_f, n)?;
        if b < half {
            hi = Some(n as u64);
            right = b;
            break;
        }
        k *= 1.5;
    }
    let mut k = 8.0;
    let (mut lo, mut left) = (None, 1.0);
    while k <= 4096.0 {
        let n = (m - k * sigma).floor();
        if n <= 0.0 {
            lo = Some(0);
            left = 0.0;
            break;
        }
        let b = chernoff(fam, t, st.log_f, n)?;
        if b < half {
            lo = Some(n as u64);
            left = b;
            break;
        }
        k *= 1.5;
    }
    let (Some(lo), Some(hi)) = (lo, hi) else {
        return Err(Error::TailUnattainable { achieved: left + right, terms: 0 });
    };
    if hi - lo >= MAX_SUPPORT {
        return Err(Error::TailUnattainable { achieved: left + right, terms: (hi - lo) as usize });
    }
    Ok((lo, hi, left + right))
}

pub fn sample(fam: &KhinchinFamily, t: f64, count: usize, seed: u64) -> Result<SampleBatch> {
    let law = TruncatedLaw::new(fam, t, TAIL_EPS)?;
    Ok(sample_law(&law, count, seed))
}

pub fn sample_law(law: &TruncatedLaw, count: usize, seed: u64) -> SampleBatch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..count).map(|_| law.quantile(rng.random::<f64>())).collect();
    SampleBatch {
        t: law.t,
        seed,
        count,
        rng: RNG_ALGORITHM,
        samples,
        truncation_tail_mass: law.tail_mass,
        support: (law.lo, law.hi),
    }
}

// ---------------------------------------------------------------- concentration

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationPoint {
    pub t: f64,
    pub seed: u64,
    pub mean: f64,
    /// Empirical `P(|X_t/m - 1| > eps)`.
    pub empirical: f64,
    /// `sigma^2 / (eps^2 m^2)`
    pub chebyshev: f64,
    /// Binomial standard error at the Chebyshev level.
    pub std_error: f64,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub eps: f64,
    pub count: usize,
    pub points: Vec<ConcentrationPoint>,
    pub all_consistent: bool,
}

/// Grid point `i` is sampled with seed `seed + i`.
pub fn concentration_test(fam: &KhinchinFamily, grid: &[f64], eps: f64, count: usize, seed: u64) -> Result<ConcentrationReport> {
    concentration_test_with(fam, grid, eps, count, seed, Execution::default())
}

pub fn concentration_test_with(
    fam: &KhinchinFamily,
    grid: &[f64],
    eps: f64,
    count: usize,
    seed: u64,
    exec: Execution,
) -> Result<ConcentrationReport> {
    if count == 0 {
        return Err(Error::EmptyBatch);
    }
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!("eps = {eps} must be positive")));
    }
    let jobs: Vec<(usize, f64)> = grid.iter().copied().enumerate().collect();
    let points = par::map(exec, &jobs, |&(i, t)| -> Result<ConcentrationPoint> {
        let s = seed.wrapping_add(i as u64);
        let batch = sample(fam, t, count, s)?;
        let st = fam.stats(t)?;
        let m = st.mean;
        let hits = batch.samples.iter().filter(|&&n| (n as f64 / m - 1.0).abs() > eps).count();
        let empirical = hits as f64 / count as f64;
        let chebyshev = st.var / (eps * eps * m * m);
        let q = chebyshev.min(1.0);
        let std_error = (q * (1.0 - q) / count as f64).sqrt();
        Ok(ConcentrationPoint {
            t,
            seed: s,
            mean: m,
            empirical,
            chebyshev,
            std_error,
            consistent: empirical <= chebyshev + 3.0 * std_error,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let all_consistent = points.iter().all(|p| p.consistent);
    Ok(ConcentrationReport { eps, count, points, all_consistent })
}

/// Total-variation distance between the empirical law of a batch and the
/// truncated pmf.
pub fn empirical_tv(fam: &KhinchinFamily, t: f64, count: usize, seed: u64) -> Result<f64> {
    if count == 0 {
        return Err(Error::EmptyBatch);
    }
    let law = TruncatedLaw::new(fam, t, TAIL_EPS)?;
    let batch = sample_law(&law, count, seed);
    Ok(tv_distance(&law, &batch.samples))
}

pub fn tv_distance(law: &TruncatedLaw, samples: &[u64]) -> f64 {
    let mut freq = vec![0u64; law.points.len()];
    for &n in samples {
        if let Ok(i) = law.points.binary_search(&n) {
            freq[i] += 1;
        }
    }
    let c = samples.len() as f64;
    0.5 * freq.iter().zip(&law.pmf).map(|(&k, &p)| (k as f64 / c - p).abs()).sum::<f64>()
}
