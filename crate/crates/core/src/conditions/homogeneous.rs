//! Kernels homogeneous of degree −1: the HLP integral and the dilation-function test.

use rayon::prelude::*;
use serde::Serialize;

use super::{growth_factors, Density, ScanConfig, Verdict};
use crate::error::{invalid, Error, Result};
use crate::gauge::{gauge_norm, GaugeSpec};
use crate::grid::GridFunction;
use crate::kernel::KernelFamily;
use crate::quad::{integrate_half_line, integrate_log, log_edges, tail_estimate};

/// A half-line integral with the nested-window values behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneousResult {
    pub value: f64,
    pub windows: Vec<(f64, f64)>,
    pub window_values: Vec<f64>,
    pub growth: Vec<f64>,
    pub tail_share: f64,
    /// `holds` when the integral is finite, `fails` when a tail diverges.
    pub verdict: Verdict,
    pub warnings: Vec<String>,
}

fn require_homogeneous(family: &KernelFamily) -> Result<()> {
    if !family.flags().homogeneous {
        return Err(Error::Precondition(format!("{} kernel is not homogeneous of degree −1", family.name())));
    }
    Ok(())
}

fn half_line_result<F: Fn(f64) -> f64 + Sync>(f: F, family: &KernelFamily, scan: &ScanConfig) -> HomogeneousResult {
    let mut breaks = family.y_breaks(1.0);
    if let Some(prof) = family.profile() {
        breaks.extend(prof.breakpoints());
    }
    let windows = scan.windows();
    let parts: Vec<_> = windows
        .iter()
        .map(|&(lo, hi)| integrate_half_line(&f, lo, hi, scan.cells_per_decade, &breaks))
        .collect();
    let last = parts.last().unwrap();
    let window_values: Vec<f64> = parts.iter().map(|t| t.total()).collect();
    let value = last.total();
    HomogeneousResult {
        value,
        windows,
        growth: growth_factors(&window_values),
        window_values,
        tail_share: last.outside_share(),
        verdict: if value.is_finite() { Verdict::Holds } else { Verdict::Fails },
        warnings: Vec::new(),
    }
}

/// `∫_0^∞ K(1,y) y^{−1/p} dy`
pub fn hlp_check(family: &KernelFamily, p: f64, scan: &ScanConfig) -> Result<HomogeneousResult> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", "needs 1 < p < ∞"));
    }
    scan.validate()?;
    require_homogeneous(family)?;
    Ok(half_line_result(|y| family.eval(1.0, y) * y.powf(-1.0 / p), family, scan))
}

/// How to evaluate the dilation function `h(t)`.
#[derive(Debug, Clone)]
pub enum DilationMode {
    /// Supremum of gauge ratios over a test family; a lower bound for `h`.
    Empirical(Vec<GridFunction>),
    /// `Φ₁ = Φ₂ = t^p` with a common weight `u`:
    /// `h(t) = sup_s [D(s/t)/D(s)]^{1/p}`, `D(s) = U(s) + s^p ∫_s^∞ u(y) y^{−p} dy`.
    PowerClosedForm { p: f64, u: Density },
}

/// `D(s)` tabulated on a log grid wide enough for every `s/t` the scan asks for.
struct DTable {
    ln_s: Vec<f64>,
    ln_d: Vec<f64>,
}

impl DTable {
    fn new(p: f64, u: &Density, lo: f64, hi: f64) -> Result<Self> {
        let decades = (hi / lo).log10();
        let s = log_edges(lo, hi, (decades * 16.0).ceil() as usize);
        let big_u = |x: f64| match u.cumulative(x) {
            Some(v) => v,
            None => integrate_half_line(|y| u.eval(y), lo * 1e-6, x, 8, &[]).total(),
        };
        let d: Vec<f64> = s
            .par_iter()
            .map(|&x| {
                let g = |y: f64| u.eval(y) * y.powf(-p);
                let far = hi * 1e6;
                let tail = integrate_log(g, x, far, 8, &[]) + tail_estimate(&g, far);
                big_u(x) + x.powf(p) * tail
            })
            .collect();
        if d.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Precondition("D(s) is not finite and positive on the grid".into()));
        }
        Ok(Self { ln_s: s.iter().map(|v| v.ln()).collect(), ln_d: d.iter().map(|v| v.ln()).collect() })
    }

    fn eval(&self, s: f64) -> f64 {
        let x = s.ln();
        let n = self.ln_s.len();
        let i = self.ln_s.partition_point(|&v| v < x).clamp(1, n - 1);
        let (x0, x1) = (self.ln_s[i - 1], self.ln_s[i]);
        let (y0, y1) = (self.ln_d[i - 1], self.ln_d[i]);
        (y0 + (y1 - y0) * (x - x0) / (x1 - x0)).exp()
    }
}

/// Dilation functions for many `t` at once.
fn dilation_many(spec1: &GaugeSpec, spec2: &GaugeSpec, ts: &[f64], mode: &DilationMode, window: (f64, f64)) -> Result<Vec<f64>> {
    if let Some(&t) = ts.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(invalid("t", format!("needs t > 0, got {t}")));
    }
    match mode {
        DilationMode::Empirical(family) => {
            if family.is_empty() {
                return Err(invalid("family", "empty test family"));
            }
            let dens: Vec<f64> = family.iter().map(|f| gauge_norm(f, spec2).value).collect();
            ts.par_iter()
                .map(|&t| {
                    let mut sup: f64 = 0.0;
                    for (f, &den) in family.iter().zip(&dens) {
                        if !(den > 0.0 && den.is_finite()) {
                            continue;
                        }
                        let num = gauge_norm(&f.dilate(t)?, spec1).value;
                        sup = sup.max(num / den);
                    }
                    Ok(sup)
                })
                .collect()
        }
        DilationMode::PowerClosedForm { p, u } => {
            let p = *p;
            if !(p > 1.0) {
                return Err(invalid("p", "needs p > 1"));
            }
            for (name, spec) in [("phi1", spec1), ("phi2", spec2)] {
                match spec.phi.power_exponent() {
                    Some(e) if (e - p).abs() < 1e-12 => {}
                    _ => return Err(invalid(name, format!("closed form needs Φ = t^{p}"))),
                }
            }
            let gate = integrate_half_line(|y| u.eval(y) / (1.0 + y.powf(p)), window.0, window.1, 8, &[]).total();
            if !gate.is_finite() {
                return Err(Error::Precondition("∫u(y)/(1+y^p) dy diverges; closed form does not apply".into()));
            }
            let tmax = ts.iter().fold(1.0f64, |m, &t| m.max(t).max(1.0 / t));
            let table = DTable::new(p, u, window.0 / tmax, window.1 * tmax)?;
            let s = log_edges(window.0, window.1, ((window.1 / window.0).log10() * 16.0).ceil() as usize);
            Ok(ts
                .par_iter()
                .map(|&t| {
                    if t == 1.0 {
                        return 1.0;
                    }
                    s.iter().map(|&x| table.eval(x / t) / table.eval(x)).fold(0.0, f64::max).powf(1.0 / p)
                })
                .collect())
        }
    }
}

/// `h(t) = inf{M : ρ₁(f(t·)) ≤ M ρ₂(f)}`, evaluated per `mode` over `window`.
pub fn dilation_function(spec1: &GaugeSpec, spec2: &GaugeSpec, t: f64, mode: &DilationMode, window: (f64, f64)) -> Result<f64> {
    Ok(dilation_many(spec1, spec2, &[t], mode, window)?[0])
}

/// `∫_0^∞ K(1,t) h(t) dt`, with `h` tabulated at 8 points per decade and
/// interpolated log-log between them.
pub fn homogeneous_check(
    family: &KernelFamily,
    spec1: &GaugeSpec,
    spec2: &GaugeSpec,
    mode: &DilationMode,
    scan: &ScanConfig,
) -> Result<HomogeneousResult> {
    scan.validate()?;
    require_homogeneous(family)?;
    let (lo, hi) = scan.window;
    let n = ((hi / lo).log10() * 8.0).ceil() as usize + 2;
    // one extra decade each side for the head/tail fits
    let ts = log_edges(lo / 10.0, hi * 10.0, n + 16);
    let h = dilation_many(spec1, spec2, &ts, mode, scan.window)?;
    let mut warnings = Vec::new();
    if matches!(mode, DilationMode::Empirical(_)) {
        warnings.push("empirical h is a lower bound; the integral is a lower bound too".into());
    }
    let ln_t: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let h_at = |t: f64| {
        let x = t.ln();
        let i = ln_t.partition_point(|&v| v < x).clamp(1, ln_t.len() - 1);
        let (a, b) = (h[i - 1], h[i]);
        let w = (x - ln_t[i - 1]) / (ln_t[i] - ln_t[i - 1]);
        if a > 0.0 && b > 0.0 {
            (a.ln() + (b.ln() - a.ln()) * w).exp()
        } else {
            a + (b - a) * w
        }
    };
    let mut res = half_line_result(|t| family.eval(1.0, t) * h_at(t), family, scan);
    res.warnings = warnings;
    Ok(res)
}
