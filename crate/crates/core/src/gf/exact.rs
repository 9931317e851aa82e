//! Exact coefficients in arbitrary precision.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

/// Families with an exact coefficient channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ExactFamily {
    Partition,
    Bell,
    /// `(1+z)^N`
    Binomial(u64),
    /// `(1-z)^{-N}`
    NegBinomial(u64),
    /// `e^z`
    Exponential,
}

/// Exact value of the coefficient of `z^n`.
///
/// Bell returns the ordinary coefficient `B(n)/n!` of `e^{e^z - 1}`; use
/// [`bell_numbers`] for the integers themselves.
pub fn exact_coeff(family: ExactFamily, n: usize) -> BigRational {
    match family {
        ExactFamily::Partition => int(partition_numbers(n).swap_remove(n)),
        ExactFamily::Bell => BigRational::new(
            BigInt::from(bell_numbers(n).swap_remove(n)),
            BigInt::from(factorial(n as u64)),
        ),
        ExactFamily::Binomial(big_n) => int(binomial(big_n, n as u64)),
        ExactFamily::NegBinomial(big_n) => {
            if big_n == 0 {
                return if n == 0 { BigRational::one() } else { BigRational::zero() };
            }
            int(binomial(n as u64 + big_n - 1, big_n - 1))
        }
        ExactFamily::Exponential => {
            BigRational::new(BigInt::one(), BigInt::from(factorial(n as u64)))
        }
    }
}

fn int(x: BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// `p(0..=n)` via Euler's pentagonal-number recurrence.
pub fn partition_numbers(n: usize) -> Vec<BigUint> {
    let mut p: Vec<BigInt> = Vec::with_capacity(n + 1);
    p.push(BigInt::one());
    for m in 1..=n {
        let mut acc = BigInt::zero();
        let mut k: i64 = 1;
        loop {
            let g1 = (k * (3 * k - 1) / 2) as usize;
            if g1 > m {
                break;
            }
            let sign_pos = k % 2 == 1;
            let term = &p[m - g1];
            if sign_pos { acc += term } else { acc -= term }
            let g2 = (k * (3 * k + 1) / 2) as usize;
            if g2 <= m {
                let term = &p[m - g2];
                if sign_pos { acc += term } else { acc -= term }
            }
            k += 1;
        }
        p.push(acc);
    }
    p.into_iter().map(|x| x.to_biguint().expect("partition numbers are positive")).collect()
}

/// `B(0..=n)` via the Bell triangle.
pub fn bell_numbers(n: usize) -> Vec<BigUint> {
    let mut out = vec![BigUint::one()];
    let mut row = vec![BigUint::one()];
    for _ in 1..=n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(row.last().unwrap().clone());
        for x in &row {
            let v = next.last().unwrap() + x;
            next.push(v);
        }
        out.push(next[0].clone());
        row = next;
    }
    out.truncate(n + 1);
    out
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |a, k| a * k)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut num = BigUint::one();
    for i in 0..k {
        num = num * (n - i) / (i + 1);
    }
    num
}

/// Triangle of second-kind Stirling numbers `S(k, j)`, `0 <= j <= k <= k_max`.
#[derive(Debug, Clone)]
pub struct StirlingTable {
    rows: Vec<Vec<BigUint>>,
}

impl StirlingTable {
    pub fn new(k_max: usize) -> Self {
        let mut rows: Vec<Vec<BigUint>> = vec![vec![BigUint::one()]];
        for k in 1..=k_max {
            let prev = &rows[k - 1];
            let mut row = vec![BigUint::zero(); k + 1];
            for j in 1..=k {
                let a = if j < prev.len() { prev[j].clone() * j } else { BigUint::zero() };
                row[j] = a + &prev[j - 1];
            }
            rows.push(row);
        }
        StirlingTable { rows }
    }

    pub fn k_max(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn get(&self, k: usize, j: usize) -> &BigUint {
        &self.rows[k][j]
    }

    pub fn get_f64(&self, k: usize, j: usize) -> f64 {
        self.rows[k][j].to_f64().unwrap_or(f64::INFINITY)
    }
}

/// `ln` of a positive big integer, accurate for integers beyond `f64` range.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 60;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln` of a positive rational.
pub fn ln_rational(x: &BigRational) -> f64 {
    let n = x.numer().to_biguint().expect("positive rational");
    let d = x.denom().to_biguint().expect("positive rational");
    ln_biguint(&n) - ln_biguint(&d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn partitions_brute(n: usize) -> Vec<BigUint> {
        // dp over largest part <= n
        let mut ways = vec![BigUint::zero(); n + 1];
        ways[0] = BigUint::one();
        for part in 1..=n {
            for m in part..=n {
                let add = ways[m - part].clone();
                ways[m] += add;
            }
        }
        ways
    }

    fn set_partitions(n: usize) -> u64 {
        // restricted growth strings
        fn rec(i: usize, n: usize, max: usize) -> u64 {
            if i == n {
                return 1;
            }
            (0..=max + 1).map(|b| rec(i + 1, n, max.max(b))).sum()
        }
        if n == 0 { 1 } else { rec(1, n, 0) }
    }

    #[test]
    fn partition_small() {
        assert_eq!(exact_coeff(ExactFamily::Partition, 0), BigRational::one());
        let p = partition_numbers(10);
        let want = [1u32, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42];
        for (i, w) in want.iter().enumerate() {
            assert_eq!(p[i], BigUint::from(*w));
        }
    }

    #[test]
    fn partition_two_oracles_agree() {
        assert_eq!(partition_numbers(100), partitions_brute(100));
        assert_eq!(partition_numbers(100)[100], BigUint::from(190_569_292u64));
    }

    #[test]
    fn bell_matches_enumeration() {
        let b = bell_numbers(9);
        for n in 0..=9 {
            assert_eq!(b[n], BigUint::from(set_partitions(n)), "n = {n}");
        }
        assert_eq!(b[3], BigUint::from(5u32));
        assert_eq!(bell_numbers(20)[20], BigUint::from(51_724_158_235_372u64));
    }

    #[test]
    fn binomial_families() {
        assert_eq!(exact_coeff(ExactFamily::Binomial(5), 2), int(BigUint::from(10u32)));
        // (1-z)^{-3}: C(n+2, 2)
        for n in 0..20u64 {
            let want = (n + 1) * (n + 2) / 2;
            assert_eq!(exact_coeff(ExactFamily::NegBinomial(3), n as usize), int(BigUint::from(want)));
        }
        assert_eq!(
            exact_coeff(ExactFamily::Exponential, 4),
            BigRational::new(BigInt::one(), BigInt::from(24))
        );
    }

    #[test]
    fn stirling_recurrence() {
        let s = StirlingTable::new(10);
        for k in 1..=10 {
            assert_eq!(*s.get(k, k), BigUint::one());
            assert_eq!(*s.get(k, 1), BigUint::one());
        }
        assert_eq!(*s.get(5, 2), BigUint::from(15u32));
        assert_eq!(*s.get(0, 0), BigUint::one());
        // row sums are Bell numbers
        let b = bell_numbers(10);
        for k in 0..=10 {
            let sum: BigUint = (0..=k).map(|j| s.get(k, j).clone()).sum();
            assert_eq!(sum, b[k]);
        }
    }

    #[test]
    fn big_logs() {
        let f = factorial(300);
        let want: f64 = (1..=300).map(|k| (k as f64).ln()).sum();
        assert!((ln_biguint(&f) - want).abs() < 1e-10);
    }
}
