//! Special functions used by closed forms and tail bounds.

use statrs::function::gamma;

/// Even-index Bernoulli numbers `B_2, B_4, ..., B_20`.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// `q^s * zeta(s, q)` for `s > 1`, `q >= 1`, by Euler-Maclaurin summation.
///
/// The scaling keeps the value of order one for large `s`.
pub fn hurwitz_zeta_scaled(s: f64, q: f64) -> f64 {
    assert!(s > 1.0 && q > 0.0);
    const M: usize = 12;
    let mut sum = 0.0;
    for n in 0..M {
        sum += (-(s) * (1.0 + n as f64 / q).ln()).exp();
    }
    let qm = q + M as f64;
    let lr = (q / qm).ln(); // ln(q/(q+M))
    let base = (s * lr).exp(); // (q/(q+M))^s
    sum += base * qm / (s - 1.0) + 0.5 * base;
    // Bernoulli corrections: B_{2j}/(2j)! * s(s+1)...(s+2j-2) * (q+M)^{-s-2j+1}
    let mut rising = s; // s (s+1) ... (s + 2j - 2)
    let mut fact = 2.0; // (2j)!
    let mut pow = 1.0 / qm; // (q+M)^{-(2j-1)}
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b / fact * rising * pow * base;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        let jj = (j + 1) as f64;
        rising *= (s + 2.0 * jj - 1.0) * (s + 2.0 * jj);
        fact *= (2.0 * jj + 1.0) * (2.0 * jj + 2.0);
        pow /= qm * qm;
    }
    sum
}

/// Hurwitz zeta `sum_{n>=0} (q+n)^{-s}`.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    hurwitz_zeta_scaled(s, q) * (-s * q.ln()).exp()
}

/// Riemann zeta for real `s > 1`.
pub fn zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1.0)
}

pub fn ln_gamma(x: f64) -> f64 {
    gamma::ln_gamma(x)
}

pub fn gamma_fn(x: f64) -> f64 {
    gamma::gamma(x)
}

/// `ln n!`
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else if n < 32 {
        (2..=n).map(|k| (k as f64).ln()).sum()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// `pi^2 / 6`
pub const ZETA2: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;
