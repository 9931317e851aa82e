use approx::assert_relative_eq;
use khinchin::family::exact::exact_stats;
use khinchin::family::KhinchinFamily;
use khinchin::gf::{builtins, MfClass};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fam(src: &str) -> KhinchinFamily {
    KhinchinFamily::from_expr(src).unwrap()
}

fn partition() -> KhinchinFamily {
    KhinchinFamily::new(builtins::partition()).unwrap()
}

fn corpus() -> Vec<(KhinchinFamily, f64)> {
    // (family, largest parameter used in property checks)
    vec![
        (fam("exp(z)"), 20.0),
        (fam("1/(1-z)"), 0.95),
        (fam("1+z+z^2"), 5.0),
        (fam("exp(exp(z)-1)"), 3.0),
        (partition(), 0.95),
        (fam("(1+z)^5"), 5.0),
        (fam("1/(1-z)^2.5"), 0.9),
        (KhinchinFamily::new(builtins::polylog(4.0, 1.0)).unwrap(), 0.99),
        (fam("canon(geometric,1,2)"), 50.0),
    ]
}

#[test]
fn pmf_examples() {
    let e = fam("exp(z)");
    let want = 5f64.powi(3) * (-5f64).exp() / 6.0;
    assert_relative_eq!(e.pmf(3, 5.0).unwrap().to_f64(), want, max_relative = 1e-13);
    for f in [fam("exp(z)"), fam("1/(1-z)"), partition()] {
        assert_eq!(f.pmf(0, 0.0).unwrap().to_f64(), 1.0);
        assert_eq!(f.pmf(3, 0.0).unwrap().to_f64(), 0.0);
    }
    let g = fam("1/(1-z)");
    for n in 0..20 {
        assert_relative_eq!(g.pmf(n, 0.5).unwrap().to_f64(), 0.5f64.powi(n as i32 + 1), max_relative = 1e-13);
    }
    assert!(g.pmf(1, 1.0).is_err());
}

#[test]
fn stats_examples() {
    let b = fam("exp(exp(z)-1)");
    let s = b.stats(1.0).unwrap();
    let e = std::f64::consts::E;
    assert_relative_eq!(s.mean, e, max_relative = 1e-13);
    // m_B = t e^t, sigma^2 = t m'(t) = t (1 + t) e^t
    assert_relative_eq!(s.var, 2.0 * e, max_relative = 1e-13);
    let p = fam("1+z");
    assert_relative_eq!(p.stats(1.0).unwrap().var, 0.25, max_relative = 1e-15);
    let g = fam("1/(1-z)").stats(0.5).unwrap();
    assert_relative_eq!(g.mean, 1.0, max_relative = 1e-14);
    assert_relative_eq!(g.var, 2.0, max_relative = 1e-14);
    assert_relative_eq!(g.l_f, 2.0, max_relative = 1e-14);
}

#[test]
fn equality_case_in_exact_arithmetic() {
    let one = BigRational::from_integer(1.into());
    let s = exact_stats(&[one.clone(), one.clone()], &one);
    assert_eq!(s.var, BigRational::new(1.into(), 4.into()));
    assert_eq!(khinchin::family::exact::decimal(&s.var, 50), format!("0.25{}", "0".repeat(48)));
}

#[test]
fn moment_examples() {
    for f in [fam("exp(z)"), partition(), fam("1/(1-z)")] {
        let s = f.stats(0.5).unwrap();
        assert_relative_eq!(f.moment(1.0, 0.5).unwrap(), s.mean, max_relative = 1e-12);
    }
    let e = fam("exp(z)");
    for t in [0.3, 1.0, 7.5] {
        assert_relative_eq!(e.moment(2.0, t).unwrap(), t * t + t, max_relative = 1e-12);
    }
    assert_relative_eq!(fam("1/(1-z)").moment(2.0, 0.5).unwrap(), 3.0, max_relative = 1e-12);
}

#[test]
fn factorial_moment_examples() {
    let e = fam("exp(z)");
    for k in 0..6 {
        assert_relative_eq!(e.factorial_moment(k, 1.7).unwrap(), 1.7f64.powi(k as i32), max_relative = 1e-12);
    }
    for f in [partition(), fam("1/(1-z)^3"), fam("1+z+z^2")] {
        assert_eq!(f.factorial_moment(0, 0.4).unwrap(), 1.0);
        assert_relative_eq!(f.factorial_moment(1, 0.4).unwrap(), f.mean(0.4).unwrap(), max_relative = 1e-12);
    }
}

#[test]
fn stirling_bridge() {
    let e = fam("exp(z)");
    assert_relative_eq!(e.moment_via_stirling(2, 2.0).unwrap(), 6.0, max_relative = 1e-12);
    let p = partition();
    assert_relative_eq!(p.moment_via_stirling(1, 0.5).unwrap(), p.mean(0.5).unwrap(), max_relative = 1e-12);
    assert_relative_eq!(p.moment_via_stirling(3, 0.5).unwrap(), p.moment(3.0, 0.5).unwrap(), max_relative = 1e-8);
    for (f, tmax) in corpus() {
        for k in 1..=4 {
            let t = 0.5 * tmax;
            assert_relative_eq!(f.moment_via_stirling(k, t).unwrap(), f.moment(k as f64, t).unwrap(), max_relative = 1e-8);
        }
    }
}

#[test]
fn mf_classification() {
    assert_eq!(fam("1+z^3").classify_mf(), MfClass::Finite(3.0));
    assert_eq!(fam("exp(z)").classify_mf(), MfClass::Infinite);
    let z3 = khinchin::gf::special::zeta(3.0);
    let z4 = khinchin::gf::special::zeta(4.0);
    match KhinchinFamily::new(builtins::polylog(4.0, 1.0)).unwrap().classify_mf() {
        MfClass::Finite(v) => assert_relative_eq!(v, z3 / (1.0 + z4), max_relative = 1e-12),
        other => panic!("{other:?}"),
    }
    assert_eq!(fam("1/(1-z)").classify_mf(), MfClass::Infinite);
    assert_eq!(partition().classify_mf(), MfClass::Infinite);
}

#[test]
fn saddle_solver() {
    assert_relative_eq!(fam("exp(z)").solve_t_for_mean(5.0).unwrap(), 5.0, max_relative = 1e-10);
    assert_relative_eq!(fam("1/(1-z)").solve_t_for_mean(1.0).unwrap(), 0.5, max_relative = 1e-10);
    let p = partition();
    let t = p.solve_t_for_mean(10.0).unwrap();
    let m: f64 = (1..2000).map(|k| k as f64 * t.powi(k) / (1.0 - t.powi(k))).sum();
    assert_relative_eq!(m, 10.0, max_relative = 1e-9);
    assert!(matches!(fam("1+z^3").solve_t_for_mean(3.0), Err(khinchin::Error::TargetAboveMf { .. })));
    let pl = KhinchinFamily::new(builtins::polylog(4.0, 1.0)).unwrap();
    assert!(pl.solve_t_for_mean(0.9).is_err());
    let t = pl.solve_t_for_mean(0.3).unwrap();
    assert_relative_eq!(pl.mean(t).unwrap(), 0.3, max_relative = 1e-9);
}

#[test]
fn derivative_family_examples() {
    let e = fam("exp(z)").derivative_family().unwrap();
    for t in [0.5, 2.0, 9.0] {
        assert_relative_eq!(e.mean(t).unwrap(), t + 1.0, max_relative = 1e-12);
    }
    let q = fam("1+z+z^2").derivative_family().unwrap();
    assert_eq!(q.f.support_up_to(10), vec![1, 2]);
    let p = partition();
    let w = p.derivative_family().unwrap();
    let want = p.moment(2.0, 0.5).unwrap() / p.moment(1.0, 0.5).unwrap();
    assert_relative_eq!(w.mean(0.5).unwrap(), want, max_relative = 1e-10);
    // E W^p = E X^{p+1} / m
    let x = fam("1/(1-z)^2");
    let wx = x.derivative_family().unwrap();
    for pw in [0.5, 1.5, 2.0] {
        let lhs = wx.moment(pw, 0.4).unwrap();
        let rhs = x.moment(pw + 1.0, 0.4).unwrap() / x.mean(0.4).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
    }
    assert!(!fam("1+z").derivative_family().unwrap().warnings.is_empty());
}

#[test]
fn normalization() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let fams = corpus();
    for _ in 0..20 {
        let (f, tmax) = &fams[rng.random_range(0..fams.len())];
        let t = rng.random_range(0.05..0.9) * tmax;
        let mut total = 0.0;
        let mut n = 0;
        let m = f.mean(t).unwrap();
        let sd = f.stats(t).unwrap().var.sqrt();
        let limit = (m + 60.0 * sd + 200.0) as u64;
        while n <= limit {
            total += f.pmf(n, t).unwrap().to_f64();
            n += 1;
            if f.f.oracle.degree().is_some_and(|d| n > d) {
                break;
            }
        }
        assert!((total - 1.0).abs() < 1e-10, "{} at {t}: {total}", f.f.name);
    }
}

#[test]
fn monotonicity_and_inequalities() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (f, tmax) in corpus() {
        let grid: Vec<f64> = (1..=60).map(|i| tmax * i as f64 / 60.0).collect();
        let means: Vec<f64> = grid.iter().map(|&t| f.mean(t).unwrap()).collect();
        assert!(means.windows(2).all(|w| w[1] > w[0]), "{}", f.f.name);
        if f.f.nonzero_count(3) >= 3 {
            // E X^2 / E X is the mean of the derivative family and increases with t
            let q: Vec<f64> = grid
                .iter()
                .map(|&t| {
                    let s = f.stats(t).unwrap();
                    s.mean + s.var / s.mean
                })
                .collect();
            assert!(q.windows(2).all(|w| w[1] > w[0]), "{}", f.f.name);
        }
        for _ in 0..5 {
            let t = rng.random_range(0.05..1.0) * tmax;
            let a = rng.random_range(1.0..5.0);
            let b = rng.random_range(a..6.0);
            let m = f.mean(t).unwrap();
            let ma = f.moment(a, t).unwrap();
            let mb = f.moment(b, t).unwrap();
            assert!(ma >= m.powf(a) * (1.0 - 1e-12), "Jensen");
            assert!(ma / m.powf(a) <= mb / m.powf(b) * (1.0 + 1e-10), "normalized moments");
            let lambda = rng.random_range(1.0..2.0);
            if lambda * t < tmax {
                let lnq = f.ln_f(lambda * t).unwrap() - f.ln_f(t).unwrap();
                let ll = lambda.ln();
                assert!(m * ll <= lnq * (1.0 + 1e-12));
                assert!(lnq <= f.mean(lambda * t).unwrap() * ll * (1.0 + 1e-12));
            }
        }
    }
}
