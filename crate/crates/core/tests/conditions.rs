use std::f64::consts::PI;

use orlicz_gauge::conditions::*;
use orlicz_gauge::grid::{window_edges, DEFAULT_WINDOW};
use orlicz_gauge::spec::{ClosedForm, Profile};
use orlicz_gauge::{GaugeSpec, GridFunction, KernelFamily, KernelGrid, NFunction, Weight};

fn sq() -> NFunction {
    NFunction::power(2.0).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn hardy_indicator(x: f64, y: f64) -> f64 {
    if y < x {
        1.0
    } else {
        0.0
    }
}

#[test]
fn hardy_indicator_with_reciprocal_weight() {
    // α = β = λ²/x, both conditions reduce to c²/2 ≤ 1
    let w = BkWeights { w: Density::power(1.0, -1.0), ..BkWeights::unweighted() };
    let r = bk_check(&hardy_indicator, &sq(), &sq(), &w, &ScanConfig::default()).unwrap();
    assert!(rel(r.c_star, 2f64.sqrt()) < 1e-12, "{}", r.c_star);
    assert_eq!(r.verdict, Verdict::Holds);
    let (c1, c2) = r.point_constants.as_ref().unwrap();
    for (a, b) in c1.iter().zip(c2) {
        assert!(rel(*a, *b) <= 1e-10, "{a} vs {b}");
    }
}

#[test]
fn hardy_indicator_without_decay_fails() {
    let r = bk_check(&hardy_indicator, &sq(), &sq(), &BkWeights::unweighted(), &ScanConfig::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Fails);
    assert_eq!(r.c_star, 0.0);
}

#[test]
fn bk_refuses_decreasing_kernel() {
    let k = |x: f64, y: f64| (-x - y).exp();
    let e = bk_check(&k, &sq(), &sq(), &BkWeights::unweighted(), &ScanConfig::default()).unwrap_err();
    assert!(e.to_string().contains("decreases"), "{e}");
}

#[test]
fn bk_refuses_nonconvex_composition() {
    let k = |x: f64, y: f64| hardy_indicator(x, y);
    let e = bk_check(&k, &sq(), &NFunction::power(3.0).unwrap(), &BkWeights::unweighted(), &ScanConfig::default()).unwrap_err();
    assert!(e.to_string().contains("convex"), "{e}");
}

#[test]
fn hardy_average_quadratic() {
    let r = hardy_avg_check(&sq(), &Density::one(), &ScanConfig::default()).unwrap();
    let a = r.part("A").unwrap();
    let b = r.part("B").unwrap();
    assert!(rel(a.c_star, 0.5f64.sqrt()) < 1e-9, "{}", a.c_star);
    assert!(rel(b.c_star, 2f64.sqrt()) < 1e-9, "{}", b.c_star);
    assert_eq!(r.verdict, Verdict::Holds);
    assert!(r.warnings.is_empty(), "{:?}", r.warnings);
}

#[test]
fn hardy_average_reports_lambda_mismatch() {
    let scan = ScanConfig { nested: 2, lambdas: vec![0.1, 1.0, 10.0], x_points: 9, ..ScanConfig::default() };
    let r = hardy_avg_check(&NFunction::power(3.0).unwrap(), &Density::one(), &scan).unwrap();
    assert!(r.warnings.iter().any(|w| w.contains("λ^4")), "{:?}", r.warnings);
}

#[test]
fn hlp_examples() {
    let scan = ScanConfig::default();
    let h = hlp_check(&KernelFamily::Hilbert, 2.0, &scan).unwrap();
    assert!((h.value - PI).abs() < 1e-2, "{}", h.value);
    assert_eq!(h.verdict, Verdict::Holds);
    let a = hlp_check(&KernelFamily::HardyAveraging, 2.0, &scan).unwrap();
    assert!((a.value - 2.0).abs() < 1e-6, "{}", a.value);
    let chi = KernelFamily::Homogeneous(Profile::Closed(ClosedForm::Indicator { a: 2.0, b: 3.0 }));
    let c = hlp_check(&chi, 2.0, &scan).unwrap();
    assert!((c.value - 2.0 * (3f64.sqrt() - 2f64.sqrt())).abs() < 1e-9, "{}", c.value);
    assert!(hlp_check(&KernelFamily::HardyIndicator, 2.0, &scan).is_err());
}

fn unit_spec(p: f64) -> GaugeSpec {
    GaugeSpec::new(NFunction::power(p).unwrap(), Weight::unit(window_edges(DEFAULT_WINDOW, 240)))
}

#[test]
fn dilation_unweighted_power() {
    let s = unit_spec(2.0);
    let mode = DilationMode::PowerClosedForm { p: 2.0, u: Density::one() };
    let h4 = dilation_function(&s, &s, 4.0, &mode, DEFAULT_WINDOW).unwrap();
    assert!((h4 - 0.5).abs() < 1e-6, "{h4}");
    assert_eq!(dilation_function(&s, &s, 1.0, &mode, DEFAULT_WINDOW).unwrap(), 1.0);
    let fam = vec![GridFunction::indicator(0.5, 2.0, 1.0).unwrap()];
    let emp = DilationMode::Empirical(fam);
    let e4 = dilation_function(&s, &s, 4.0, &emp, DEFAULT_WINDOW).unwrap();
    assert!((e4 - 0.5).abs() < 1e-9, "{e4}");
    let e1 = dilation_function(&s, &s, 1.0, &emp, DEFAULT_WINDOW).unwrap();
    assert!((e1 - 1.0).abs() < 1e-12);
}

#[test]
fn dilation_empirical_below_closed_form() {
    let u = Density::power_weight(0.5);
    let spec = GaugeSpec::new(sq(), Weight::power(window_edges(DEFAULT_WINDOW, 240), 0.5).unwrap());
    let fam: Vec<GridFunction> = [(0.1, 1.0), (1.0, 3.0), (0.01, 100.0), (5.0, 6.0)]
        .iter()
        .map(|&(a, b)| GridFunction::indicator(a, b, 1.0).unwrap())
        .collect();
    for t in [0.25, 4.0] {
        let closed = dilation_function(&spec, &spec, t, &DilationMode::PowerClosedForm { p: 2.0, u: u.clone() }, DEFAULT_WINDOW).unwrap();
        let emp = dilation_function(&spec, &spec, t, &DilationMode::Empirical(fam.clone()), DEFAULT_WINDOW).unwrap();
        assert!(emp <= closed * (1.0 + 1e-3), "t={t}: {emp} > {closed}");
    }
}

#[test]
fn homogeneous_hilbert() {
    let scan = ScanConfig::default();
    for (p, expect) in [(2.0, PI), (4.0, PI / (PI / 4.0).sin())] {
        let s = unit_spec(p);
        let mode = DilationMode::PowerClosedForm { p, u: Density::one() };
        let r = homogeneous_check(&KernelFamily::Hilbert, &s, &s, &mode, &scan).unwrap();
        assert!(rel(r.value, expect) < 0.03, "p={p}: {}", r.value);
        assert_eq!(r.verdict, Verdict::Holds);
    }
}

#[test]
fn radial_power_examples() {
    let k = KernelFamily::PowerRadial { lambda: 0.75 };
    let scan = ScanConfig::default();
    let good = radial_check(&k, 2.0, 4.0, &scan).unwrap();
    assert_eq!(good.details["exponent_a"], 0.0);
    assert_eq!(good.details["exponent_b"], 0.0);
    assert_eq!(good.verdict, Verdict::Holds);
    let bad = radial_check(&k, 2.0, 3.0, &scan).unwrap();
    assert!((bad.details["exponent_a"] - 1.0 / 6.0).abs() < 1e-15);
    assert!((bad.details["exponent_b"] - 0.25).abs() < 1e-15);
    assert_ne!(bad.verdict, Verdict::Holds);
    // sup of x^{1/6} over windows one decade wider on each side
    let g = &bad.part("A").unwrap().growth;
    assert!(g.iter().all(|&v| (v - 10f64.powf(1.0 / 6.0)).abs() < 1e-3), "{g:?}");
    let strip = radial_check(&KernelFamily::PowerRadial { lambda: 0.4 }, 2.0, 4.0, &scan).unwrap();
    assert!(strip.warnings.iter().any(|w| w.contains("strip")));
}

#[test]
fn kantorovic_examples() {
    let edges = window_edges(DEFAULT_WINDOW, 480);
    let mut xs = edges.clone();
    xs.push(1.0);
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    let boxk = KernelGrid::from_fn(xs.clone(), xs.clone(), |x, y| if x < 1.0 && y < 1.0 { 1.0 } else { 0.0 }).unwrap();
    let r = kantorovic_mixed_norm(&boxk, 2.0, 2.0, &[DEFAULT_WINDOW]).unwrap();
    assert!((r.values[0] - 1.0).abs() < 1e-5, "{:?}", r.values);

    let e = KernelGrid::from_fn(edges.clone(), edges.clone(), |x, y| (-x - y).exp()).unwrap();
    let windows = ScanConfig::default().windows();
    let r = kantorovic_mixed_norm(&e, 2.0, 2.0, &windows).unwrap();
    assert!(rel(*r.values.last().unwrap(), 0.25) < 1e-3, "{:?}", r.values);
    assert_eq!(r.verdict, Verdict::Holds);
}

#[test]
fn power_case_exponential_profile() {
    let k = KernelFamily::Sum(Profile::Closed(ClosedForm::Exp { c: 1.0 }));
    let r = power_case_check(&k, 2.0, 2.0, &Density::one(), &Density::one(), &ScanConfig::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Holds, "{:?}", r.parts);
    assert!(r.c_star > 0.0 && r.c_star.is_finite());
    assert!(power_case_check(&k, 2.0, 1.5, &Density::one(), &Density::one(), &ScanConfig::default()).is_err());
    assert!(power_case_check(&k, 1.0, 2.0, &Density::one(), &Density::one(), &ScanConfig::default()).is_err());
}

#[test]
fn power_case_is_lambda_free() {
    let k = KernelFamily::Sum(Profile::Closed(ClosedForm::Exp { c: 1.0 }));
    let a = ScanConfig::default();
    let b = ScanConfig { lambdas: a.lambdas.iter().map(|l| l * 37.0).collect(), ..a.clone() };
    let ra = power_case_check(&k, 2.0, 3.0, &Density::one(), &Density::one(), &a).unwrap();
    let rb = power_case_check(&k, 2.0, 3.0, &Density::one(), &Density::one(), &b).unwrap();
    assert_eq!(ra.parts, rb.parts);
    assert_eq!(ra.c_star, rb.c_star);
}

#[test]
fn power_case_compact_u1_vanishing_alpha() {
    let k = KernelFamily::Sum(Profile::Closed(ClosedForm::Exp { c: 1.0 }));
    // ũ₁ vanishes above 1, so α = 0 and condition A is void there
    let u1 = Density::closed(ClosedForm::Indicator { a: 0.0, b: 1.0 });
    let r = power_case_check(&k, 2.0, 2.0, &u1, &Density::one(), &ScanConfig::default()).unwrap();
    assert!(r.warnings.iter().any(|w| w.contains("u1")));
    assert!(r.part("A").unwrap().suprema.iter().all(|s| s.is_finite()));
}

#[test]
fn rearranged_sum_kernel() {
    let edges = window_edges(DEFAULT_WINDOW, 240);
    let fam = KernelFamily::Sum(Profile::Closed(ClosedForm::Exp { c: 1.0 }));
    let k = KernelGrid::from_family(fam, edges.clone(), edges).unwrap();
    let scan = ScanConfig { nested: 2, lambdas: orlicz_gauge::quad::log_edges(1e-2, 1e2, 8), x_points: 17, ..ScanConfig::default() };
    let r = rearranged_check(&k, &sq(), &sq(), &Density::one(), &Density::one(), &scan).unwrap();
    assert_eq!(r.details["l_equals_k"], 1.0);
    assert!(r.c_star > 0.0);
}
