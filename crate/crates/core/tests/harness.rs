use orlicz_gauge::harness::*;
use orlicz_gauge::spec::{ClosedForm, Profile};
use orlicz_gauge::{Error, GridFunction};

fn small(inequality: Inequality, kernel: &str) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(inequality, kernel);
    c.window = [1e-3, 1e3];
    c.grid_n = 120;
    c.windows_nested = 2;
    c.check = false;
    c
}

fn config_field(e: Error) -> String {
    match e {
        Error::Config { field, .. } => field,
        other => panic!("expected a configuration error, got {other}"),
    }
}

#[test]
fn family_is_deterministic_and_valid() {
    let spec = FamilySpec::default();
    assert_eq!(spec.size(), 50);
    let a = build_family(&spec, (1e-4, 1e4), 160, 7).unwrap();
    let b = build_family(&spec, (1e-4, 1e4), 160, 7).unwrap();
    assert_eq!(a.len(), 50);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.name, y.name);
        assert_eq!(x.f, y.f);
        assert!(x.f.values().iter().all(|v| *v >= 0.0 && v.is_finite()));
    }
    let c = build_family(&spec, (1e-4, 1e4), 160, 8).unwrap();
    assert!(a.iter().zip(&c).any(|(x, y)| x.f != y.f));
}

#[test]
fn config_errors_name_the_field() {
    let mut c = small(Inequality::Main, "hilbert");
    c.family = FamilySpec { indicators: 0, powers: vec![], exponentials: 0, random_steps: 0, pieces: 4 };
    assert_eq!(config_field(c.validate().unwrap_err()), "family.size");

    let e = ExperimentConfig::from_json(r#"{"inequality":"main","kernel":"bogus"}"#).unwrap_err();
    assert_eq!(config_field(e), "kernel");
    let e = ExperimentConfig::from_json(r#"{"inequality":"main","kernel":"hilbert","window":[10,1]}"#).unwrap_err();
    assert_eq!(config_field(e), "window");
    let e = ExperimentConfig::from_json(r#"{"inequality":"main","kernel":"hilbert","phi1":"power:p=abc"}"#).unwrap_err();
    assert_eq!(config_field(e), "phi1");
    let e = ExperimentConfig::from_json(r#"{"inequality":"power","kernel":"hilbert","p":2}"#).unwrap_err();
    assert_eq!(config_field(e), "q");
    let e = ExperimentConfig::from_json(r#"{"inequality":"main","kernel":"hilbert","colour":1}"#).unwrap_err();
    assert!(config_field(e).contains("colour"));
    let e = ExperimentConfig::from_json(r#"{"inequality":"sideways","kernel":"hilbert"}"#).unwrap_err();
    assert!(matches!(e, Error::Config { .. }));
    let e = ExperimentConfig::from_json(r#"{"inequality":"main","kernel":"hilbert","grid_n":"many"}"#).unwrap_err();
    assert!(matches!(e, Error::Config { .. }));
}

#[test]
fn config_roundtrips_through_json() {
    let mut c = small(Inequality::Power, "power-radial");
    c.lambda = Some(0.75);
    c.p = Some(2.0);
    c.q = Some(4.0);
    let text = serde_json::to_string(&c).unwrap();
    assert_eq!(ExperimentConfig::from_json(&text).unwrap(), c);
}

#[test]
fn zero_kernel_gives_zero_constant() {
    let r = run_config(&small(Inequality::OperatorGauge, "sum:k=const:c=0")).unwrap();
    assert_eq!(r.c_hat, 0.0);
    assert!(r.windows.iter().all(|w| w.members.iter().all(|m| m.ratio == 0.0)));
}

#[test]
fn enlarging_the_family_cannot_lower_c_hat() {
    let mut c = small(Inequality::OperatorGauge, "hilbert");
    c.family = FamilySpec { random_steps: 4, powers: vec![0.3], ..FamilySpec::default() };
    let a = run_config(&c).unwrap();
    c.family.powers.push(0.5);
    c.family.random_steps = 8;
    let b = run_config(&c).unwrap();
    assert!(b.c_hat >= a.c_hat);
}

#[test]
fn rearranged_input_dominates_for_sum_kernels() {
    for kernel in ["sum:k=exp:c=1", "hilbert"] {
        let main = run_config(&small(Inequality::Main, kernel)).unwrap();
        let rin = run_config(&small(Inequality::RearrangedInput, kernel)).unwrap();
        for (a, b) in main.windows.last().unwrap().members.iter().zip(&rin.windows.last().unwrap().members) {
            assert!(a.ratio <= b.ratio * (1.0 + 1e-9), "{kernel} {}: {} > {}", a.member, a.ratio, b.ratio);
        }
    }
}

#[test]
fn c_hat_is_the_max_of_the_csv_table() {
    let r = run_config(&small(Inequality::RearrangedInput, "hardy-averaging")).unwrap();
    let csv = report_csv(&r).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "member,ratio,numerator,denominator");
    let max = lines
        .map(|l| l.rsplitn(4, ',').nth(2).unwrap().parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert!((max - r.c_hat).abs() <= 1e-11 * r.c_hat, "{max} vs {}", r.c_hat);
}

#[test]
fn json_numbers_carry_twelve_digits() {
    let r = run_config(&small(Inequality::OperatorGauge, "hilbert")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&to_json(&r).unwrap()).unwrap();
    let c = v["c_hat"].as_f64().unwrap();
    assert_eq!(c, orlicz_gauge::grid::round_sig(r.c_hat, 12));
    assert_eq!(v["inequality"], "operator-gauge");
}

#[test]
fn reports_are_reproducible_across_thread_counts() {
    let mut c = small(Inequality::Main, "sum:k=exp:c=1");
    c.seed = 11;
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let r = run_config(&c).unwrap();
            (report_csv(&r).unwrap(), to_json(&r).unwrap())
        })
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(3));
}

#[test]
fn run_experiment_writes_both_files() {
    let dir = std::env::temp_dir().join(format!("og-harness-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("config.json");
    std::fs::write(
        &cfg,
        r#"{"inequality":"power","kernel":"power-radial","lambda":0.75,"p":2,"q":4,
            "window":[1e-3,1e3],"grid_n":120,"windows_nested":2}"#,
    )
    .unwrap();
    let out = dir.join("out");
    let r = run_experiment(&cfg, &out).unwrap();
    assert!(out.join("report.json").exists() && out.join("report.csv").exists());
    let cond = r.condition.expect("radial checker applies");
    assert_eq!(cond.condition, "radial");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn checker_refusal_is_reported_not_raised() {
    // a radial profile that increases is refused by the kernel builder itself
    let c = small(Inequality::OperatorGauge, "radial:k=indicator:a=1,b=2");
    assert!(run_config(&c).is_err());
    let mut ok = small(Inequality::OperatorGauge, "hardy-indicator");
    ok.check = true;
    ok.phi2 = Some("power:p=3".into());
    let r = run_config(&ok).unwrap();
    assert!(r.condition_error.unwrap().contains("convex"));
}

fn exp_profile() -> Profile {
    Profile::Closed(ClosedForm::Exp { c: 1.0 })
}

#[test]
fn oneil_spot_value_and_ordering() {
    let f = GridFunction::indicator(0.0, 1.0, 1.0).unwrap();
    let rows = oneil_compare(&exp_profile(), &f, &[1.0], OneilConvention::Sqrt, (1e-4, 1e4), 480).unwrap();
    let r = rows[0];
    assert!((r.oneil_bound - (2.0 - 4.0 / std::f64::consts::E)).abs() < 1e-4, "{r:?}");
    assert!(r.rearranged_pointwise < r.oneil_bound);
    assert!(r.lhs <= r.oneil_bound && r.lhs <= r.rearranged_bound * (1.0 + 1e-6), "{r:?}");
}

#[test]
fn oneil_zero_function() {
    let rows = oneil_compare(&exp_profile(), &GridFunction::zero(), &[0.5, 2.0], OneilConvention::Exact, (1e-3, 1e3), 60).unwrap();
    for r in rows {
        assert_eq!((r.lhs, r.rearranged_bound, r.oneil_bound), (0.0, 0.0, 0.0));
    }
}

#[test]
fn oneil_pointwise_domination() {
    assert_eq!(oneil_pointwise_violations(&exp_profile(), OneilConvention::Sqrt, (1e-3, 1e3), 10_000, 5), 0);
    let power = Profile::Closed(ClosedForm::Power { a: 0.75 });
    assert_eq!(oneil_pointwise_violations(&power, OneilConvention::Sqrt, (1e-3, 1e3), 10_000, 6), 0);
}
