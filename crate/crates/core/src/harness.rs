//! Empirical best constants over a test family, the O'Neil comparison, and
//! experiment configs and reports.
//!
//! Ĉ is always a lower bound for the true constant: it is the largest ratio
//! seen over a finite family on a truncated grid.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditions::{
    bk_check, hardy_avg_check, hlp_check, homogeneous_check, power_case_check, radial_check, rearranged_check,
    verdict_from_suprema, BkWeights, ConditionReport, DilationMode, ScanConfig, Verdict,
};
use crate::error::{Error, Result};
use crate::gauge::{gauge_norm, GaugeSpec};
use crate::grid::{fmt12, round_sig, window_edges, GridFunction, DEFAULT_WINDOW};
use crate::kernel::{KernelFamily, KernelGrid};
use crate::operators::apply;
use crate::quad::log_edges;
use crate::spec::{parse_density, parse_kernel, parse_nfunction, parse_weight, random_step, Profile};
use crate::young::NFunction;

fn config_err(field: &str, reason: impl Into<String>) -> Error {
    Error::Config { field: field.to_string(), reason: reason.into() }
}

/// Composition of the test family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilySpec {
    /// `χ_(0,a)` for log-spaced `a` inside the window
    pub indicators: usize,
    /// `y^{-a} χ_W` for the listed exponents
    pub powers: Vec<f64>,
    /// `e^{-cy}` for log-spaced `c`
    pub exponentials: usize,
    /// seeded random steps; the second half is rearranged
    pub random_steps: usize,
    /// pieces per random step
    pub pieces: usize,
}

impl Default for FamilySpec {
    fn default() -> Self {
        Self {
            indicators: 12,
            powers: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.75, 0.9],
            exponentials: 6,
            random_steps: 24,
            pieces: 16,
        }
    }
}

impl FamilySpec {
    pub fn size(&self) -> usize {
        self.indicators + self.powers.len() + self.exponentials + self.random_steps
    }
}

/// One member of a test family.
#[derive(Debug, Clone)]
pub struct Member {
    pub name: String,
    pub f: GridFunction,
}

/// `[0, lo, …, hi]`: the window's log grid with the origin prepended so
/// rearrangements (which start at 0) are fully covered.
pub fn harness_edges(window: (f64, f64), cells: usize) -> Vec<f64> {
    let mut e = window_edges(window, cells);
    e.insert(0, 0.0);
    e
}

/// Builds the family on `window` with `cells` log cells. Deterministic in `seed`.
pub fn build_family(spec: &FamilySpec, window: (f64, f64), cells: usize, seed: u64) -> Result<Vec<Member>> {
    if spec.size() == 0 {
        return Err(config_err("family.size", "the test family is empty"));
    }
    if spec.random_steps > 0 && spec.pieces == 0 {
        return Err(config_err("family.pieces", "random steps need at least one piece"));
    }
    let (lo, hi) = window;
    let edges = harness_edges(window, cells);
    let mut out = Vec::with_capacity(spec.size());
    let n = spec.indicators;
    for j in 0..n {
        let s = (j + 1) as f64 / (n + 1) as f64;
        let a = lo.powf(1.0 - s) * hi.powf(s);
        let f = GridFunction::from_antiderivative(edges.clone(), |y| y.min(a))?;
        out.push(Member { name: format!("indicator(0,{})", fmt12(a)), f });
    }
    for &a in &spec.powers {
        if !(a >= 0.0 && a < 1.0) {
            return Err(config_err("family.powers", format!("exponent {a} outside [0, 1)")));
        }
        let f = GridFunction::from_antiderivative(edges.clone(), |y| y.clamp(lo, hi).powf(1.0 - a) / (1.0 - a))?;
        out.push(Member { name: format!("power(a={})", fmt12(a)), f });
    }
    let m = spec.exponentials;
    for j in 0..m {
        let s = (j + 1) as f64 / (m + 1) as f64;
        let c = 1.0 / (lo.powf(1.0 - s) * hi.powf(s));
        let f = GridFunction::from_antiderivative(edges.clone(), |y| -(-c * y).exp() / c)?;
        out.push(Member { name: format!("exp(c={})", fmt12(c)), f });
    }
    let half = spec.random_steps / 2;
    for j in 0..spec.random_steps {
        let s = seed.wrapping_mul(1_000_003).wrapping_add(j as u64);
        let f = random_step(s, spec.pieces, window, cells)?;
        if j < spec.random_steps - half {
            out.push(Member { name: format!("randomstep(seed={s})"), f });
        } else {
            out.push(Member { name: format!("rearranged-randomstep(seed={s})"), f: f.rearrange() });
        }
    }
    Ok(out)
}

/// Which inequality a ratio measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Inequality {
    /// `ρ₁((T_K f)*) ≤ C ρ₂(f*)`
    Main,
    /// `ρ₁(T_K f*) ≤ C ρ₂(f*)`
    RearrangedInput,
    /// `ρ_{Φ₁,u₁}(T_K f) ≤ C ρ_{Φ₂,u₂}(f)`
    OperatorGauge,
    /// `‖(T_K f)*‖_{q,u₁} ≤ C ‖f*‖_{p,u₂}`
    Power,
    /// `ρ_{Φ₁,u₁}(T_K f) ≤ C ρ_{Φ₂,u₂}(f)` for a kernel homogeneous of degree −1
    Homogeneous,
}

impl std::str::FromStr for Inequality {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| config_err("inequality", format!("unknown inequality `{s}`")))
    }
}

fn default_u() -> String {
    "one".into()
}
fn default_grid_n() -> usize {
    480
}
fn default_window() -> [f64; 2] {
    [DEFAULT_WINDOW.0, DEFAULT_WINDOW.1]
}
fn default_nested() -> usize {
    3
}
fn default_true() -> bool {
    true
}

/// An experiment, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub inequality: Inequality,
    pub kernel: String,
    #[serde(default)]
    pub phi1: Option<String>,
    #[serde(default)]
    pub phi2: Option<String>,
    #[serde(default = "default_u")]
    pub u1: String,
    #[serde(default = "default_u")]
    pub u2: String,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub q: Option<f64>,
    /// exponent of a `power-radial` kernel given without one
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub family: FamilySpec,
    /// log cells on the widest window
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    /// the widest window
    #[serde(default = "default_window")]
    pub window: [f64; 2],
    #[serde(default = "default_nested")]
    pub windows_nested: usize,
    #[serde(default)]
    pub seed: u64,
    /// also run the matching condition checker
    #[serde(default = "default_true")]
    pub check: bool,
}

impl ExperimentConfig {
    pub fn new(inequality: Inequality, kernel: &str) -> Self {
        Self {
            inequality,
            kernel: kernel.to_string(),
            phi1: None,
            phi2: None,
            u1: default_u(),
            u2: default_u(),
            p: None,
            q: None,
            lambda: None,
            family: FamilySpec::default(),
            grid_n: default_grid_n(),
            window: default_window(),
            windows_nested: default_nested(),
            seed: 0,
            check: true,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let field = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.contains("field"))
                .unwrap_or("config")
                .to_string();
            Error::Config { field, reason: msg }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn window(&self) -> (f64, f64) {
        (self.window[0], self.window[1])
    }

    /// `W_k`, narrowest first; the configured window is the widest.
    pub fn windows(&self) -> Vec<(f64, f64)> {
        ScanConfig { window: self.window(), nested: self.windows_nested, ..ScanConfig::default() }.windows()
    }

    fn exponents(&self) -> Result<(f64, f64)> {
        let p = self.p.ok_or_else(|| config_err("p", "the power inequality needs p"))?;
        let q = self.q.ok_or_else(|| config_err("q", "the power inequality needs q"))?;
        if !(p > 1.0 && p.is_finite()) {
            return Err(config_err("p", "needs 1 < p < ∞"));
        }
        if !(q > 1.0 && q.is_finite()) {
            return Err(config_err("q", "needs 1 < q < ∞"));
        }
        Ok((p, q))
    }

    /// `(Φ₁, Φ₂)`: from `p, q` for the power inequality, otherwise the specs
    /// (default `t²`).
    pub fn phis(&self) -> Result<(NFunction, NFunction)> {
        if self.inequality == Inequality::Power {
            let (p, q) = self.exponents()?;
            return Ok((NFunction::power(q)?, NFunction::power(p)?));
        }
        let get = |field: &str, s: &Option<String>| -> Result<NFunction> {
            parse_nfunction(s.as_deref().unwrap_or("power:p=2")).map_err(|e| config_err(field, e.to_string()))
        };
        Ok((get("phi1", &self.phi1)?, get("phi2", &self.phi2)?))
    }

    pub fn kernel_family(&self, window: (f64, f64), cells: usize) -> Result<KernelFamily> {
        let spec = match (self.kernel.trim(), self.lambda) {
            ("power-radial", Some(l)) => format!("power-radial:lambda={l}"),
            (k, _) => k.to_string(),
        };
        parse_kernel(&spec, window, cells).map_err(|e| config_err("kernel", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.window;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(config_err("window", format!("impossible window [{lo}, {hi}]")));
        }
        if self.windows_nested == 0 {
            return Err(config_err("windows_nested", "needs at least one window"));
        }
        if (hi / lo).log10() <= 2.0 * (self.windows_nested as f64 - 1.0) {
            return Err(config_err("windows_nested", "window too narrow for that many nested windows"));
        }
        if self.grid_n < 8 {
            return Err(config_err("grid_n", "needs at least 8 cells"));
        }
        if self.family.size() == 0 {
            return Err(config_err("family.size", "the test family is empty"));
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(config_err("lambda", "needs λ > 0"));
            }
        }
        self.phis()?;
        self.kernel_family(self.window(), self.grid_n)?;
        for (field, s) in [("u1", &self.u1), ("u2", &self.u2)] {
            parse_weight(s, self.window(), self.grid_n).map_err(|e| config_err(field, e.to_string()))?;
        }
        Ok(())
    }
}

/// One row of the per-member table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberRatio {
    pub member: String,
    pub ratio: f64,
    pub numerator: f64,
    pub denominator: f64,
    /// why the member was left out of Ĉ
    #[serde(skip_serializing_if = "Option::is_none")]
    pub excluded: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowResult {
    pub window: (f64, f64),
    pub cells: usize,
    pub c_hat: f64,
    pub argmax: Option<String>,
    pub members: Vec<MemberRatio>,
}

/// How Ĉ moved across the nested windows, and whether that agrees with the checker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossCheck {
    Consistent,
    Inconsistent,
    Inconclusive,
    Unchecked,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub inequality: Inequality,
    pub kernel: String,
    pub c_hat: f64,
    pub argmax: Option<String>,
    pub c_hat_by_window: Vec<f64>,
    pub growth: Vec<f64>,
    /// `holds` = stable, `fails` = growing, by the nested-window rule
    pub empirical_trend: Verdict,
    pub windows: Vec<WindowResult>,
    pub excluded: usize,
    pub condition: Option<ConditionReport>,
    pub condition_error: Option<String>,
    pub cross_check: CrossCheck,
    pub notes: Vec<String>,
    pub runtime: Runtime,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Runtime {
    pub version: &'static str,
    pub members_per_window: usize,
    pub seed: u64,
}

/// One member's ratio for `inequality`.
pub fn member_ratio(inequality: Inequality, k: &KernelGrid, f: &GridFunction, s1: &GaugeSpec, s2: &GaugeSpec) -> (f64, f64) {
    let (num_input, den_input) = match inequality {
        Inequality::Main | Inequality::Power => (apply(k, f).rearrange(), f.rearrange()),
        Inequality::RearrangedInput => {
            let fs = f.rearrange();
            (apply(k, &fs), fs)
        }
        Inequality::OperatorGauge | Inequality::Homogeneous => (apply(k, f), f.clone()),
    };
    (gauge_norm(&num_input, s1).value, gauge_norm(&den_input, s2).value)
}

fn window_result(cfg: &ExperimentConfig, window: (f64, f64), cells: usize) -> Result<WindowResult> {
    let (phi1, phi2) = cfg.phis()?;
    let weight = |field: &str, s: &str| parse_weight(s, window, cells).map_err(|e| config_err(field, e.to_string()));
    let s1 = GaugeSpec::new(phi1, weight("u1", &cfg.u1)?);
    let s2 = GaugeSpec::new(phi2, weight("u2", &cfg.u2)?);
    let edges = harness_edges(window, cells);
    let fam = cfg.kernel_family(window, cells)?;
    let k = KernelGrid::from_family(fam, edges.clone(), edges)?;
    let members = build_family(&cfg.family, window, cells, cfg.seed)?;
    let rows: Vec<MemberRatio> = members
        .par_iter()
        .map(|m| {
            let (num, den) = member_ratio(cfg.inequality, &k, &m.f, &s1, &s2);
            let excluded = if !(den > 0.0) {
                Some("zero denominator".to_string())
            } else if !den.is_finite() || !num.is_finite() {
                Some("infinite gauge".to_string())
            } else {
                None
            };
            let ratio = if den > 0.0 { num / den } else { 0.0 };
            MemberRatio { member: m.name.clone(), ratio, numerator: num, denominator: den, excluded }
        })
        .collect();
    let mut c_hat = 0.0;
    let mut argmax = None;
    for r in rows.iter().filter(|r| r.excluded.is_none()) {
        if r.ratio > c_hat {
            c_hat = r.ratio;
            argmax = Some(r.member.clone());
        }
    }
    Ok(WindowResult { window, cells, c_hat, argmax, members: rows })
}

/// Ĉ on each nested window, without the condition checker.
pub fn empirical_best_constant(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let widest = cfg.window();
    let decades = (widest.1 / widest.0).log10();
    let windows: Vec<WindowResult> = cfg
        .windows()
        .into_iter()
        .map(|w| {
            // keep the cells per decade of the widest window
            let cells = ((cfg.grid_n as f64) * (w.1 / w.0).log10() / decades).round().max(8.0) as usize;
            window_result(cfg, w, cells)
        })
        .collect::<Result<_>>()?;
    let c_hat_by_window: Vec<f64> = windows.iter().map(|w| w.c_hat).collect();
    let last = windows.last().unwrap();
    let excluded = last.members.iter().filter(|m| m.excluded.is_some()).count();
    let mut notes = vec!["Ĉ is a lower bound for the best constant: a maximum over a finite family on a truncated grid".to_string()];
    if excluded > 0 {
        notes.push(format!("{excluded} member(s) excluded from Ĉ on the widest window"));
    }
    Ok(Report {
        inequality: cfg.inequality,
        kernel: cfg.kernel.clone(),
        c_hat: last.c_hat,
        argmax: last.argmax.clone(),
        growth: crate::conditions::growth_factors(&c_hat_by_window),
        empirical_trend: verdict_from_suprema(&c_hat_by_window),
        c_hat_by_window,
        excluded,
        condition: None,
        condition_error: None,
        cross_check: CrossCheck::Unchecked,
        notes,
        runtime: Runtime { version: env!("CARGO_PKG_VERSION"), members_per_window: cfg.family.size(), seed: cfg.seed },
        windows,
    })
}

/// The checker matching the config's inequality and kernel, if one applies.
pub fn matching_condition(cfg: &ExperimentConfig) -> Result<Option<ConditionReport>> {
    let window = cfg.window();
    let scan = ScanConfig { window, nested: cfg.windows_nested, ..ScanConfig::default() };
    let fam = cfg.kernel_family(window, cfg.grid_n)?;
    let (phi1, phi2) = cfg.phis()?;
    let density = |field: &str, s: &str| parse_density(s, window, cfg.grid_n).map_err(|e| config_err(field, e.to_string()));
    let (u1, u2) = (density("u1", &cfg.u1)?, density("u2", &cfg.u2)?);
    let same_phi = phi1 == phi2;
    let report = match (cfg.inequality, &fam) {
        (Inequality::Power, KernelFamily::Radial(_) | KernelFamily::PowerRadial { .. }) => {
            let (p, q) = cfg.exponents()?;
            Some(radial_check(&fam, p, q, &scan)?)
        }
        (Inequality::Power, _) if fam.sum_row_integral(1.0, 1.0).is_some() => {
            let (p, q) = cfg.exponents()?;
            Some(power_case_check(&fam, p, q, &u1, &u2, &scan)?)
        }
        (Inequality::RearrangedInput, KernelFamily::HardyAveraging) if same_phi && cfg.u1 == cfg.u2 => {
            Some(hardy_avg_check(&phi1, &u1, &scan)?)
        }
        (Inequality::Main, _) => {
            let edges = window_edges(window, cfg.grid_n);
            let k = KernelGrid::from_family(fam.clone(), edges.clone(), edges)?;
            Some(rearranged_check(&k, &phi1, &phi2, &u1, &u2, &scan)?)
        }
        (Inequality::OperatorGauge, KernelFamily::HardyIndicator | KernelFamily::HardyAveraging) => {
            let f = fam.clone();
            let kernel = move |x: f64, y: f64| if y < x { f.eval(x, y) } else { 0.0 };
            let weights = BkWeights { t: u1.clone(), v: u2.clone(), ..BkWeights::unweighted() };
            Some(bk_check(&kernel, &phi1, &phi2, &weights, &scan)?)
        }
        (Inequality::OperatorGauge | Inequality::Homogeneous, _) if fam.flags().homogeneous => {
            let r = match (phi1.power_exponent(), same_phi && cfg.u1 == cfg.u2) {
                (Some(p), true) if cfg.u1 == "one" || cfg.u1 == "unit" => hlp_check(&fam, p, &scan)?,
                (Some(p), true) => {
                    let s = GaugeSpec::new(phi1.clone(), parse_weight(&cfg.u1, window, cfg.grid_n)?);
                    homogeneous_check(&fam, &s, &s, &DilationMode::PowerClosedForm { p, u: u1.clone() }, &scan)?
                }
                _ => {
                    let s1 = GaugeSpec::new(phi1.clone(), parse_weight(&cfg.u1, window, cfg.grid_n)?);
                    let s2 = GaugeSpec::new(phi2.clone(), parse_weight(&cfg.u2, window, cfg.grid_n)?);
                    let members = build_family(&cfg.family, window, cfg.grid_n, cfg.seed)?;
                    let mode = DilationMode::Empirical(members.into_iter().map(|m| m.f).collect());
                    homogeneous_check(&fam, &s1, &s2, &mode, &scan)?
                }
            };
            Some(homogeneous_as_report(&r, &scan))
        }
        _ => None,
    };
    Ok(report)
}

/// A homogeneous-kernel integral in report form: the suprema are the
/// per-window integrals.
pub fn homogeneous_as_report(r: &crate::conditions::HomogeneousResult, scan: &ScanConfig) -> ConditionReport {
    let part = crate::conditions::ConditionPart::new("integral", r.window_values.clone(), 1.0 / r.value);
    let mut rep = ConditionReport::assemble("homogeneous", scan, Vec::new(), Vec::new(), vec![part]);
    rep.verdict = r.verdict;
    rep.tail_share = r.tail_share;
    rep.details.insert("integral".into(), r.value);
    rep.warnings = r.warnings.clone();
    rep
}

fn cross_check(condition: Option<&ConditionReport>, trend: Verdict) -> CrossCheck {
    match (condition.map(|c| c.verdict), trend) {
        (None, _) => CrossCheck::Unchecked,
        (Some(Verdict::Holds), Verdict::Holds) | (Some(Verdict::Fails), Verdict::Fails) => CrossCheck::Consistent,
        (Some(Verdict::Holds), Verdict::Fails) => CrossCheck::Inconsistent,
        _ => CrossCheck::Inconclusive,
    }
}

/// Ĉ plus the matching checker (when `cfg.check`), cross-checked.
pub fn run_config(cfg: &ExperimentConfig) -> Result<Report> {
    let mut report = empirical_best_constant(cfg)?;
    if cfg.check {
        match matching_condition(cfg) {
            Ok(Some(c)) => report.condition = Some(c),
            Ok(None) => report.notes.push("no condition checker applies to this inequality and kernel".into()),
            // checker refusals are data, not run failures
            Err(Error::Precondition(msg)) => report.condition_error = Some(msg),
            Err(e) => return Err(e),
        }
    }
    report.cross_check = cross_check(report.condition.as_ref(), report.empirical_trend);
    Ok(report)
}

/// Rounds every number in a JSON tree to 12 significant digits.
fn round_json(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(x) = n.as_f64() {
                if n.is_f64() {
                    if let Some(r) = serde_json::Number::from_f64(round_sig(x, 12)) {
                        *n = r;
                    }
                }
            }
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(round_json),
        serde_json::Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Any serializable value as pretty JSON with 12 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_json(&mut v);
    Ok(serde_json::to_string_pretty(&v)?)
}

/// `member,ratio,numerator,denominator` for the widest window.
pub fn report_csv(report: &Report) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["member", "ratio", "numerator", "denominator"]).map_err(csv_err)?;
    if let Some(last) = report.windows.last() {
        for m in &last.members {
            w.write_record([m.member.clone(), fmt12(m.ratio), fmt12(m.numerator), fmt12(m.denominator)]).map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Reads a config, runs it, and writes `report.json` and `report.csv` into `out_dir`.
pub fn run_experiment(config: &Path, out_dir: &Path) -> Result<Report> {
    let cfg = ExperimentConfig::from_path(config)?;
    let report = run_config(&cfg)?;
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("report.json"), to_json(&report)?)?;
    std::fs::write(out_dir.join("report.csv"), report_csv(&report)?)?;
    Ok(report)
}

/// Which `K*` the O'Neil bound uses for a radial kernel `k(√(x²+y²))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OneilConvention {
    /// `K*(t) = k(√t)`
    Sqrt,
    /// `K*(t) = k(2√(t/π))`, the rearrangement of `k(|·|)` on the quadrant
    Exact,
}

impl OneilConvention {
    fn k_star(self, k: &Profile, t: f64) -> f64 {
        match self {
            OneilConvention::Sqrt => k.eval(t.sqrt()),
            OneilConvention::Exact => k.eval(2.0 * (t / std::f64::consts::PI).sqrt()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OneilRow {
    pub x: f64,
    /// `(T_K f)**(x)`
    pub lhs: f64,
    /// `(T_K f*)**(x)`, the rearranged-kernel side
    pub rearranged_bound: f64,
    /// `∫ K*(xy) f*(y) dy`
    pub oneil_bound: f64,
    /// `(T_K f*)(x)` pointwise, for the tightness comparison
    pub rearranged_pointwise: f64,
}

/// `T_K g` at the midpoints of `x_edges`, integrating the kernel exactly over each cell of `g`.
fn radial_apply(fam: &KernelFamily, g: &GridFunction, x_edges: &[f64]) -> GridFunction {
    let cells: Vec<(f64, f64, f64)> = (0..g.len())
        .filter(|&i| g.values()[i] > 0.0)
        .map(|i| (g.edges()[i], g.edges()[i + 1], g.values()[i]))
        .collect();
    let vals: Vec<f64> = x_edges
        .windows(2)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|w| {
            let x = 0.5 * (w[0] + w[1]);
            crate::sum::fsum(cells.iter().map(|&(a, b, v)| v * fam.integrate_y(x, a, b)))
        })
        .collect();
    GridFunction::new(x_edges.to_vec(), vals).expect("valid edges")
}

/// O'Neil's bound against `(T_K f)**` and `(T_K f*)**` for a radial kernel,
/// on `cells` log cells of `window` plus `[0, lo]`.
pub fn oneil_compare(
    k: &Profile,
    f: &GridFunction,
    xs: &[f64],
    convention: OneilConvention,
    window: (f64, f64),
    cells: usize,
) -> Result<Vec<OneilRow>> {
    let fam = KernelFamily::Radial(k.clone());
    fam.check_profile(window.0, window.1)?;
    let edges = harness_edges(window, cells);
    let fs = f.rearrange();
    let tf = radial_apply(&fam, f, &edges).rearrange();
    let tfs = radial_apply(&fam, &fs, &edges);
    let tfs_star = tfs.rearrange();
    let fs_cells: Vec<(f64, f64, f64)> = (0..fs.len()).map(|i| (fs.edges()[i], fs.edges()[i + 1], fs.values()[i])).collect();
    xs.par_iter()
        .map(|&x| {
            if !(x > 0.0) {
                return Err(crate::error::invalid("x", "samples must be positive"));
            }
            let oneil = crate::sum::fsum(fs_cells.iter().map(|&(a, b, v)| {
                v * crate::quad::integrate(|y| convention.k_star(k, x * y), a, b, 1e-12)
            }));
            let pointwise = crate::sum::fsum(fs_cells.iter().map(|&(a, b, v)| v * fam.integrate_y(x, a, b)));
            Ok(OneilRow {
                x,
                lhs: tf.prefix_integral(x) / x,
                rearranged_bound: tfs_star.prefix_integral(x) / x,
                oneil_bound: oneil,
                rearranged_pointwise: pointwise,
            })
        })
        .collect()
}

/// Counts `(x, y)` among `n` seeded log-uniform samples with
/// `k(√(x²+y²)) > K*(xy)`.
pub fn oneil_pointwise_violations(k: &Profile, convention: OneilConvention, window: (f64, f64), n: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (l0, l1) = (window.0.ln(), window.1.ln());
    (0..n)
        .filter(|_| {
            let x = (l0 + (l1 - l0) * rng.gen::<f64>()).exp();
            let y = (l0 + (l1 - l0) * rng.gen::<f64>()).exp();
            k.eval((x * x + y * y).sqrt()) > convention.k_star(k, x * y)
        })
        .count()
}

/// `n` log-uniform sample points of `window`, end points included.
pub fn sample_points(window: (f64, f64), n: usize) -> Vec<f64> {
    log_edges(window.0, window.1, n.max(2) - 1)
}
