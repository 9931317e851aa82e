use khinchin::asymptotics::*;
use khinchin::diagnostics::{order_estimate, GridSpec};
use khinchin::family::KhinchinFamily;
use khinchin::gf::canonical::{CanonicalProductSpec, ZeroRule};
use khinchin::gf::exact::{bell_numbers, partition_numbers};
use khinchin::gf::special::ln_factorial;
use khinchin::par::Execution;
use num_bigint::BigUint;

fn fam(src: &str) -> KhinchinFamily {
    KhinchinFamily::from_expr(src).unwrap()
}

fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(60);
    let top: BigUint = x >> shift;
    (top.to_string().parse::<f64>().unwrap()).ln() + shift as f64 * std::f64::consts::LN_2
}

#[test]
fn hayman_exponential() {
    let e = hayman_estimate(&fam("exp(z)"), 100).unwrap();
    assert!((e.t_n - 100.0).abs() < 1e-9);
    assert_eq!(e.exact_source, Some(ExactSource::Exact));
    assert!((e.log_exact.unwrap() + ln_factorial(100)).abs() < 1e-9);
    // n!/(sqrt(2 pi n) n^n e^-n) = 1 + 1/(12n) + 1/(288 n^2) - ...
    let stirling = 1.0 + 1.0 / 1200.0 + 1.0 / 2_880_000.0;
    let r = e.ratio.unwrap();
    assert!((r / stirling - 1.0).abs() < 1e-6, "{r}");
    assert!((r - 1.0).abs() < 0.002);
    assert!(e.caveat.is_none());
}

#[test]
fn hayman_partition_and_bell() {
    let p = partition_numbers(100);
    let e = hayman_estimate(&fam("partition()"), 100).unwrap();
    assert!((e.log_exact.unwrap() - ln_big(&p[100])).abs() < 1e-9);
    let r = e.ratio.unwrap();
    assert!((0.9..=1.1).contains(&r), "{r}");

    let b = bell_numbers(20);
    let e = hayman_estimate(&fam("bell()"), 20).unwrap();
    assert!((e.log_exact.unwrap() - (ln_big(&b[20]) - ln_factorial(20))).abs() < 1e-9);
    let r = e.ratio.unwrap();
    assert!((0.95..=1.05).contains(&r), "{r}");
}

#[test]
fn hayman_improves_with_n() {
    for f in ["exp(z)", "partition()"] {
        let f = fam(f);
        let errs: Vec<f64> =
            [20u64, 40, 60, 80, 100].iter().map(|&n| (hayman_estimate(&f, n).unwrap().ratio.unwrap() - 1.0).abs()).collect();
        assert!(errs.windows(2).all(|w| w[1] <= 1.2 * w[0]), "{errs:?}");
        assert!(errs[4] < errs[0]);
    }
}

#[test]
fn hayman_preconditions() {
    assert!(matches!(
        hayman_estimate(&fam("1+z^3"), 3),
        Err(khinchin::Error::TargetAboveMf { .. })
    ));
    // a_2 = 0: the estimate exists, the ratio does not
    let e = hayman_estimate(&fam("1+z^3"), 2).unwrap();
    assert!(e.ratio.is_none() && e.log_estimate.is_finite());
    let e = hayman_estimate(&fam("1+z+z^2+z^3"), 2).unwrap();
    assert!(e.ratio.unwrap() > 0.0);
    // a lacunary series is far from Gaussian
    let e = hayman_estimate(&fam("hadamard_gap()"), 12).unwrap();
    assert!(e.caveat.is_some());
}

#[test]
fn local_clt() {
    let f = fam("exp(z)");
    let big = local_clt_deviation(&f, 1e4).unwrap();
    assert!(big.deviation < 0.05, "{}", big.deviation);
    assert_eq!(big.stride, 1);
    assert!(big.outside_bound.unwrap() < 1e-10);
    let small = local_clt_deviation(&f, 100.0).unwrap();
    assert!(big.deviation < small.deviation);

    // sampled windows still anchor at the mean
    let huge = local_clt_deviation(&f, 1e9).unwrap();
    assert!(huge.stride > 1 && huge.deviation < 1e-4);
    assert!(huge.rounding_floor < 1e-4);
    // beyond that, cancellation in ln P(X = n) dominates and is reported
    let beyond = local_clt_deviation(&f, 1e12).unwrap();
    assert!(beyond.rounding_floor > 1e-3);

    // Bell coefficients are tabulated up to n = 3000, which caps t near 5
    let bell_grid: Vec<f64> = (2..=10).map(|k| k as f64 / 2.0).collect();
    for src in ["exp(z)", "partition()", "bell()"] {
        let f = fam(src);
        let pts: Vec<f64> = GridSpec::Default.points(f.radius()).unwrap().into_iter().take(12).collect();
        let pts = if src == "bell()" { bell_grid.clone() } else { pts[2..].to_vec() };
        let (d, trimmed) = clt_trace(&f, &GridSpec::Explicit(pts), Execution::Parallel).unwrap();
        assert!(trimmed.is_empty(), "{src}: {trimmed:?}");
        let dev: Vec<f64> = d.iter().map(|x| x.deviation).collect();
        assert!(dev.windows(2).all(|w| w[1] < w[0]), "{src}: {dev:?}");
    }

    let g = fam("hadamard_gap()");
    let (d, _) = clt_trace(&g, &GridSpec::Default, Execution::Parallel).unwrap();
    assert!(d.len() >= 20);
    assert!(d.iter().all(|x| x.deviation > 0.1));

    assert!(local_clt_deviation(&f, 0.0).is_err());
}

#[test]
fn asymptotic_targets() {
    let p = fam("partition()");
    let tr = compare_asymptotic(&p, AsymptoticTarget::PartitionMean, &GridSpec::Explicit(vec![0.5, 0.9, 0.99])).unwrap();
    assert!((0.97..=1.03).contains(&tr.final_ratio), "{}", tr.final_ratio);
    assert!(tr.toward_one);
    let tr = compare_asymptotic(&p, AsymptoticTarget::PartitionVariance, &GridSpec::Default).unwrap();
    assert!((tr.final_ratio - 1.0).abs() < 1e-3 && tr.toward_one);

    let b = fam("bell()");
    let tr = compare_asymptotic(&b, AsymptoticTarget::BellMean, &GridSpec::Explicit(vec![1.0, 3.0, 10.0])).unwrap();
    assert!((tr.ratio[0] - 1.0).abs() < 1e-14);
    assert!(tr.ratio.iter().all(|r| (r - 1.0).abs() < 1e-12));
    let tr = compare_asymptotic(&b, AsymptoticTarget::BellVariance, &GridSpec::Explicit(vec![0.5, 2.0, 20.0])).unwrap();
    assert!(tr.ratio.iter().all(|r| (r - 1.0).abs() < 1e-10));

    let nb = fam("1/(1-z)^2");
    let target = AsymptoticTarget::NegBinMomentQuotient { n: 2.0, beta: 3.0 };
    assert!((target.expected(0.5) - 3.0).abs() < 1e-12);
    let tr = compare_asymptotic(&nb, target, &GridSpec::Explicit(vec![0.9, 0.99, 0.999])).unwrap();
    assert!((tr.final_ratio - 1.0).abs() < 0.02, "{}", tr.final_ratio);

    let tr = compare_asymptotic(&p, AsymptoticTarget::ClanMoment { p: 3.0 }, &GridSpec::Explicit(vec![0.9, 0.99, 0.999])).unwrap();
    assert!((tr.observed[2] - 1.0).abs() < 0.05 && tr.toward_one);

    assert!(compare_asymptotic(&b, AsymptoticTarget::PartitionMean, &GridSpec::Default).is_err());
}

#[test]
fn beta_products() {
    let sq = CanonicalProductSpec::new(ZeroRule::Power { a: 2.0, c: 1.0 }).unwrap();
    let grid = [1e2, 1e4, 1e6];
    let b = beta_product_check(&sq, &grid).unwrap();
    assert_eq!((b.rho, b.c), (0.5, 1.0));
    assert!((b.beta_constant - std::f64::consts::PI).abs() < 1e-12);
    assert!((b.ln_f_ratio[2] - 1.0).abs() < 0.05, "{:?}", b.ln_f_ratio);
    assert!((b.var_over_mean[2] - 0.5).abs() < 0.05);
    for tr in [&b.ln_f_ratio, &b.mean_ratio, &b.var_ratio] {
        assert!((tr[2] - 1.0).abs() < (tr[0] - 1.0).abs() + 1e-12);
    }

    // agrees with the order-of-growth trace of the same function
    let o = order_estimate(&fam("canon(power,2)"), &GridSpec::Explicit(vec![1e4, 1e6]), 1.0).unwrap();
    assert!((o.var_over_mean_final - b.var_over_mean[2]).abs() < 0.05);

    let p = CanonicalProductSpec::new(ZeroRule::Power { a: 1.1, c: 1.0 }).unwrap();
    let b = beta_product_check(&p, &grid).unwrap();
    let rho = 1.0 / 1.1;
    assert!((b.beta_constant - std::f64::consts::PI / (std::f64::consts::PI * rho).sin()).abs() < 1e-12);
    assert!(b.ln_f_ratio.iter().chain(&b.mean_ratio).chain(&b.var_ratio).all(|x| x.is_finite()));

    assert!(beta_product_check(&CanonicalProductSpec::new(ZeroRule::Geometric { c: 1.0, r: 2.0 }).unwrap(), &grid).is_err());
    assert!(CanonicalProductSpec::new(ZeroRule::Power { a: 0.5, c: 1.0 }).is_err());
}

#[test]
fn valiron() {
    let geo = CanonicalProductSpec::new(ZeroRule::Geometric { c: 1.0, r: 2.0 }).unwrap();
    let r = valiron_identity(&geo, 10.0).unwrap();
    assert!(r.passed, "{:?}", r.witness);

    let r = valiron_identity(&geo, 0.0).unwrap();
    assert!(r.passed && r.get("quadrature") == 0.0 && r.get("direct") == 0.0);
    let r = valiron_identity(&geo, 1e-9).unwrap();
    assert!(r.passed && r.get("direct") < 1e-9);

    let sq = CanonicalProductSpec::new(ZeroRule::Power { a: 2.0, c: 1.0 }).unwrap();
    let r = valiron_identity(&sq, 1000.0).unwrap();
    assert!(r.passed, "{:?}", r.witness);

    for rule in [ZeroRule::Factorial, ZeroRule::ExpSquare, ZeroRule::List(vec![1.0, 3.0, 7.5])] {
        let spec = CanonicalProductSpec::new(rule).unwrap();
        for t in [0.5, 40.0, 1e5] {
            let r = valiron_identity(&spec, t).unwrap();
            assert!(r.passed, "{:?} {t}: {:?}", spec.rule, r.witness);
        }
    }
}
