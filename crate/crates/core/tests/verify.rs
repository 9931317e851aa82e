use std::f64::consts::{E, PI};

use khinchin::corpus::{load, DEFAULT_CORPUS};
use khinchin::family::KhinchinFamily;
use khinchin::gf::canonical::{CanonicalProductSpec, ZeroRule};
use khinchin::par::Execution;
use khinchin::verify::*;

fn fam(src: &str) -> KhinchinFamily {
    KhinchinFamily::from_expr(src).unwrap()
}

fn canon(rule: ZeroRule) -> CanonicalProductSpec {
    CanonicalProductSpec::new(rule).unwrap()
}

#[test]
fn boichuk_goldberg_equality_cases() {
    let std = VerifyConfig::default();
    let r = check_boichuk_goldberg(&fam("1+z"), (0, 1), &std).unwrap();
    assert!(r.passed);
    assert!((r.get("t_star") - 1.0).abs() < 1e-10);
    assert!((r.get("lhs") - 0.25).abs() < 1e-10 && r.get("rhs") == 0.25);

    let hi = VerifyConfig::high();
    let r = check_boichuk_goldberg(&fam("1+z"), (0, 1), &hi).unwrap();
    assert!(r.passed && r.outcome == Outcome::Pass);
    assert_eq!(r.get("t_star"), 1.0);
    assert_eq!(r.get("slack"), 0.0);
    assert!(matches!(r.witness["lhs"], Witness::Exact(_)));

    let r = check_boichuk_goldberg(&fam("1+z^3"), (0, 3), &hi).unwrap();
    assert!(r.passed);
    assert_eq!((r.get("t_star"), r.get("lhs"), r.get("rhs")), (1.0, 2.25, 2.25));
    assert!(r.get("slack").abs() <= 1e-9);
}

#[test]
fn boichuk_goldberg_exponential() {
    let f = fam("exp(z)");
    for k in [0u64, 1, 5, 40] {
        let r = check_boichuk_goldberg(&f, (k, k + 1), &VerifyConfig::default()).unwrap();
        assert!(r.passed);
        // sigma^2 = t = m for e^z
        assert!((r.get("lhs") - (k as f64 + 0.5)).abs() < 1e-9 * (k as f64 + 1.0), "k={k}");
    }
    // not consecutive
    assert!(check_boichuk_goldberg(&f, (1, 3), &VerifyConfig::default()).is_err());
}

#[test]
fn quotient_bound() {
    let cfg = VerifyConfig::default();
    let f = fam("hadamard_gap()");
    for j in [1u32, 4, 10, 20] {
        let r = check_quotient_bound(&f, (1 << j, 1 << (j + 1)), &cfg).unwrap();
        assert!((r.get("rhs") - 1.0 / 3.0).abs() < 1e-15);
        assert!(r.passed, "j={j}: {:?}", r.witness);
    }
    let f = fam("exp(z)");
    for k in [1u64, 10, 1000] {
        let r = check_quotient_bound(&f, (k, k + 1), &cfg).unwrap();
        assert!((r.get("rhs") - 1.0 / (2 * k + 1) as f64).abs() < 1e-15);
        let t = k as f64 + 0.5;
        assert!((r.get("lhs") - t.sqrt().recip()).abs() < 1e-9);
        assert!(r.passed);
    }
    assert!(check_quotient_bound(&fam("1+z^3"), (0, 3), &cfg).is_err());
}

#[test]
fn zero_free_region() {
    let std = VerifyConfig::default();
    let r = check_zero_free(&fam("1+z"), (1.0, PI), &std).unwrap();
    assert!(r.passed && r.get("slack").abs() < 1e-12);
    assert!(r.get("abs_ratio") < ZERO_CONFIRMATION);

    let r = check_zero_free(&fam("1+z^2"), (1.0, PI / 2.0), &std).unwrap();
    assert!(r.passed && (r.get("sigma") - 1.0).abs() < 1e-12);

    for f in ["1+z", "1+z^2"] {
        let theta = if f == "1+z" { PI } else { PI / 2.0 };
        let r = check_zero_free(&fam(f), (1.0, theta), &VerifyConfig::high()).unwrap();
        assert!(r.passed && r.get("slack") == 0.0, "{f}");
    }

    let g = fam("canon(geometric,1,2)");
    let r = check_zero_free(&g, (2.0, PI), &std).unwrap();
    assert!(r.passed && (r.get("sigma") - 0.91).abs() < 0.01, "{}", r.get("sigma"));

    // not a zero
    assert!(check_zero_free(&fam("1+z"), (1.0, PI / 2.0), &std).is_err());
}

#[test]
fn polynomial_zeros_are_zero_free() {
    for src in ["1+z+z^2", "1+2*z+3*z^2+z^5", "(1+z)^4*(2+z^2)"] {
        let f = fam(src);
        let reports = run_suite(&[(src.into(), f)], &[CheckKind::ZeroFree], &VerifyConfig::default());
        assert!(!reports.is_empty());
        assert!(reports.iter().all(|r| r.outcome == Outcome::Pass), "{src}: {reports:?}");
    }
}

#[test]
fn sandwich() {
    let spec = canon(ZeroRule::Geometric { c: 1.0, r: 2.0 });
    let v = spec.eval(2.0).unwrap();
    assert_eq!(v.count, 1);
    assert!((v.var - 0.8463).abs() < 1e-4, "{}", v.var);
    assert!(v.var < v.mean && v.mean < 2.0 * v.var + 1.0);
    assert!(check_canonical_sandwich(&spec, &[2.0]).unwrap().passed);

    let grid: Vec<f64> = (-20..=40).map(|j| 2f64.powi(j)).collect();
    assert!(check_canonical_sandwich(&spec, &grid).unwrap().passed);

    let sq = canon(ZeroRule::Power { a: 2.0, c: 1.0 });
    assert_eq!(sq.eval(100.0).unwrap().count, 10);
    let r = check_canonical_sandwich(&sq, &[1e-6, 100.0, 1e6]).unwrap();
    assert!(r.passed);
    assert!(r.get("min_rel_margin_var_below_mean") > 0.0);

    let double = CanonicalProductSpec::with_multiplicity(ZeroRule::Geometric { c: 1.0, r: 2.0 }, 2).unwrap();
    assert!(check_canonical_sandwich(&double, &[1.0]).is_err());
}

#[test]
fn spacing_bounds() {
    let w = SpacingWindow::new(&canon(ZeroRule::Geometric { c: 1.0, r: 2.0 }), 5).unwrap();
    assert!((w.lower - 2f64.powf(4.5)).abs() < 1e-9 && (w.upper - 2f64.powf(5.5)).abs() < 1e-9);
    assert_eq!(SpacingWindow::phi(1.0), 0.25);
    assert!(SpacingWindow::phi(0.9) < 0.25 && SpacingWindow::phi(1.1) < 0.25);

    let r = check_spacing_bounds(&canon(ZeroRule::Geometric { c: 1.0, r: 2.0 }), 5, 33).unwrap();
    let h = 0.5f64.sqrt();
    assert!((r.get("bound_upper") - (0.25 + 4.0 * h)).abs() < 1e-12);
    assert!((r.get("bound_lower") - 0.25 * h).abs() < 1e-12);
    assert!(r.passed);

    let r = check_spacing_bounds(&canon(ZeroRule::Factorial), 6, 33).unwrap();
    assert!((r.get("bound_upper") - (0.25 + 4.0 / 6f64.sqrt())).abs() < 1e-9);
    assert!((r.get("bound_lower") - 0.25 / 7f64.sqrt()).abs() < 1e-9);
    assert!(r.passed);

    // b_k = e^{k^2}: sigma^2 on I_n hugs 1/4 ever more tightly
    let spec = canon(ZeroRule::ExpSquare);
    let mut widths = Vec::new();
    for n in [3u64, 5, 8] {
        let r = check_spacing_bounds(&spec, n, 33).unwrap();
        assert!(r.passed);
        widths.push((r.get("bound_upper") - 0.25, (r.get("sigma2_max") - 0.25).abs()));
    }
    assert!(widths.windows(2).all(|w| w[1].0 < w[0].0 && w[1].1 < w[0].1), "{widths:?}");
    assert!(widths[2].1 < 1e-5);

    assert!(check_spacing_bounds(&canon(ZeroRule::Power { a: 2.0, c: 1.0 }), 5, 9).is_err());
}

#[test]
fn flambda_series() {
    let r = check_flambda_series(&fam("exp(z)"), 4.0).unwrap();
    assert!(r.passed);
    assert!((r.get("lhs") - E).abs() < 1e-12);
    assert!((r.get("rhs") - E).abs() < 1e-9);

    // m(1) = 1/2, so the shifted point is 3 and f(3)/f(1) = 1 + E X / m = 2
    let r = check_flambda_series(&fam("1+z"), 1.0).unwrap();
    assert!(r.passed && r.get("lhs") == 2.0 && r.get("rhs") == 2.0);

    // 1+z+z^2 has m = 1 at t = 1
    let r = check_flambda_series(&fam("1+z+z^2"), 1.0).unwrap();
    assert!(r.passed && (r.get("lhs") - 7.0 / 3.0).abs() < 1e-13);

    for (f, t) in [("partition()", 0.5), ("bell()", 2.0), ("1/(1-z)^3", 0.3)] {
        assert!(check_flambda_series(&fam(f), t).unwrap().passed, "{f}");
    }
    // 1/(1-z) at t = 0.9: m = 9, t + t/m = 1 is not inside
    assert!(check_flambda_series(&fam("1/(1-z)"), 0.9).is_err());
}

#[test]
fn derivative_relation() {
    let cfg = VerifyConfig::default();
    let r = check_derivative_relation(&fam("exp(z)"), 1, 3.0, &cfg).unwrap();
    assert!(r.passed && (r.get("lhs") - 4.0).abs() < 1e-12 && (r.get("rhs") - 4.0).abs() < 1e-12);

    let r = check_derivative_relation(&fam("partition()"), 2, 0.5, &cfg).unwrap();
    assert!(r.passed, "{:?}", r.witness);
    assert!(r.get("rel_gap") <= 1e-10);

    assert!(check_derivative_relation(&fam("1+z"), 1, 1.0, &cfg).is_err());
    assert!(check_derivative_relation(&fam("2+3*z^4"), 2, 1.0, &cfg).is_err());
}

#[test]
fn stirling() {
    let cfg = VerifyConfig::default();
    for (f, t) in [("exp(z)", 3.0), ("partition()", 0.5), ("bell()", 1.5), ("1+z^3", 1.0)] {
        let r = check_stirling(&fam(f), 8, t, &cfg).unwrap();
        assert!(r.passed, "{f}: {:?}", r.witness);
    }
}

#[test]
fn check_names() {
    assert_eq!(CheckKind::parse_list("full").unwrap(), CheckKind::ALL.to_vec());
    assert_eq!(CheckKind::parse_list("").unwrap(), vec![]);
    assert_eq!(
        CheckKind::parse_list("zero-free, stirling").unwrap(),
        vec![CheckKind::ZeroFree, CheckKind::Stirling]
    );
    assert_eq!(CheckKind::parse_list("canonical").unwrap(), vec![CheckKind::Sandwich]);
    assert!(CheckKind::parse_list("nonsense").is_err());
}

#[test]
fn suite_on_default_corpus() {
    let corpus = load(&DEFAULT_CORPUS).unwrap();
    let cfg = VerifyConfig::default();
    let reports = run_suite(&corpus, &CheckKind::ALL, &cfg);
    let fails: Vec<_> = reports.iter().filter(|r| r.outcome == Outcome::Fail).collect();
    assert!(fails.is_empty(), "{fails:#?}");
    assert!(all_passed(&reports));
    let passes = reports.iter().filter(|r| r.outcome == Outcome::Pass).count();
    assert!(passes > 60, "{passes}");
    // every function in the corpus is exercised by at least one passing check
    for (name, _) in &corpus {
        assert!(reports.iter().any(|r| &r.subject == name && r.passed), "{name}");
    }

    let seq = run_suite(&corpus, &CheckKind::ALL, &VerifyConfig { exec: Execution::Sequential, ..cfg });
    assert_eq!(seq, reports);

    let high = run_suite(&corpus, &CheckKind::ALL, &VerifyConfig::high());
    assert!(all_passed(&high));
}

#[test]
fn suite_edge_cases() {
    let corpus = load(&["1/(1-z)"]).unwrap();
    assert!(run_suite(&corpus, &[], &VerifyConfig::default()).is_empty());
    let r = run_suite(&corpus, &[CheckKind::ZeroFree], &VerifyConfig::default());
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].outcome, Outcome::Skip);
    assert!(r[0].note.as_deref().unwrap().contains("no known zeros"));
}

#[test]
fn gap_series_pairs_are_capped() {
    let corpus = load(&["gap_series(0.5)"]).unwrap();
    let r = run_suite(&corpus, &[CheckKind::BoichukGoldberg, CheckKind::QuotientBound], &VerifyConfig::default());
    assert!(all_passed(&r), "{r:#?}");
    assert!(r.iter().filter(|x| x.passed).count() >= 4);
}
