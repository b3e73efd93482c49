//! Power-type conditions: `L^p → L^q` rearranged inequalities, radial kernels
//! and the Kantorovic mixed norm.

use rayon::prelude::*;
use serde::Serialize;

use super::{growth_factors, share, upper_integral, verdict_from_suprema, ConditionPart, ConditionReport, Density, ScanConfig, Verdict};
use crate::error::{invalid, Error, Result};
use crate::kernel::{KernelFamily, KernelGrid};
use crate::sum::fsum;

fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

fn check_indices(p: f64, q: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", "needs 1 < p < ∞"));
    }
    if !(q >= p && q.is_finite()) {
        return Err(invalid("q", "needs p ≤ q < ∞"));
    }
    Ok(())
}

/// `c_max` with `c^{p′}·a ≤ 1`.
fn power_admissible(a: f64, pp: f64) -> f64 {
    if a <= 0.0 {
        f64::INFINITY
    } else if !a.is_finite() {
        0.0
    } else {
        a.powf(-1.0 / pp)
    }
}

/// `(T_K f)*` in `L^q(u₁)` against `f*` in `L^p(u₂)` for a sum kernel, via
///
/// ```text
/// A: c^{p′} α(x)^{p′−1} ∫_0^x [M(x,y)/U₂(1/y)]^{p′} ũ₂(y) dy ≤ 1,   α = (∫_x^∞ ũ₁)^{p/q}
/// B: c^{p′} β(x)^{p′−1} ∫_0^x U₂(1/y)^{−p′} ũ₂(y) dy ≤ 1,          β = (∫_x^∞ M(y,x)^q ũ₁(y) dy)^{p/q}
/// ```
///
/// with `M(a,b) = ∫_0^{1/b} k(1/a + z) dz`. No `λ` enters; the scan's
/// `λ`-grid is only echoed in the report.
pub fn power_case_check(
    family: &KernelFamily,
    p: f64,
    q: f64,
    u1: &Density,
    u2: &Density,
    scan: &ScanConfig,
) -> Result<ConditionReport> {
    check_indices(p, q)?;
    scan.validate()?;
    if family.sum_row_integral(1.0, 1.0).is_none() {
        return Err(Error::Precondition(format!(
            "power_case_check needs a sum kernel with closed-form profile, got {}",
            family.name()
        )));
    }
    family.check_profile(scan.window.0, scan.window.1)?;
    if !u2.has_cumulative() {
        return Err(Error::Precondition("power_case_check needs U₂ in closed form or from a grid weight".into()));
    }
    let mut warnings = Vec::new();
    for (name, d) in [("u1", u1), ("u2", u2)] {
        if d.divergent != Some(true) {
            warnings.push(format!("∫{name} = ∞ is not established"));
        }
    }
    let pp = conjugate(p);
    let m = |a: f64, b: f64| family.sum_row_integral(1.0 / a, 1.0 / b).unwrap_or(0.0);
    let ut1 = u1.reciprocal();
    let ut2 = u2.reciprocal();
    let big_u2 = |y: f64| u2.cumulative(1.0 / y).unwrap();
    let nodes = scan.nodes();
    let mut sa = Vec::new();
    let mut sb = Vec::new();
    let mut cs = (f64::INFINITY, f64::INFINITY);
    let mut tail_share: f64 = 0.0;
    for window in scan.windows() {
        let (a, b, xs) = nodes.window_indices(window, scan.x_points);
        let res: Vec<(f64, f64, f64)> = xs
            .par_iter()
            .map(|&xi| {
                let x = nodes.edges[xi];
                let (ia, ta) = upper_integral(&nodes, &|y| ut1.eval(y), xi, b);
                let alpha = ia.powf(p / q);
                let ga = |y: f64| {
                    let w = ut2.eval(y);
                    if w == 0.0 {
                        0.0
                    } else {
                        (m(x, y) / big_u2(y)).powf(pp) * w
                    }
                };
                let (la, ha) = super::lower_integral(&nodes, &ga, a, xi);
                let fb = |y: f64| {
                    let w = ut1.eval(y);
                    if w == 0.0 {
                        0.0
                    } else {
                        m(y, x).powf(q) * w
                    }
                };
                let (ib, tb) = upper_integral(&nodes, &fb, xi, b);
                let beta = ib.powf(p / q);
                let gb = |y: f64| {
                    let w = ut2.eval(y);
                    if w == 0.0 {
                        0.0
                    } else {
                        big_u2(y).powf(-pp) * w
                    }
                };
                let (lb, hb) = super::lower_integral(&nodes, &gb, a, xi);
                let lhs_a = if alpha == 0.0 { 0.0 } else { alpha.powf(pp - 1.0) * la };
                let lhs_b = if beta == 0.0 { 0.0 } else { beta.powf(pp - 1.0) * lb };
                let tails = share(ta, ia).max(share(tb, ib)).max(share(ha, la)).max(share(hb, lb));
                (power_admissible(lhs_a, pp), power_admissible(lhs_b, pp), tails)
            })
            .collect();
        let ca = res.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
        let cb = res.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        tail_share = tail_share.max(res.iter().map(|r| r.2).fold(0.0, f64::max));
        sa.push(1.0 / ca);
        sb.push(1.0 / cb);
        cs = (ca, cb);
    }
    let (_, _, xs) = nodes.window_indices(scan.window, scan.x_points);
    let x_grid = xs.iter().map(|&i| nodes.edges[i]).collect();
    let parts = vec![ConditionPart::new("A", sa, cs.0), ConditionPart::new("B", sb, cs.1)];
    let mut report = ConditionReport::assemble("power", scan, x_grid, scan.lambdas.clone(), parts);
    report.tail_share = tail_share;
    report.details.insert("p".into(), p);
    report.details.insert("q".into(), q);
    report.warnings = warnings;
    Ok(report)
}

/// Radial kernel `k(√(x²+y²))` from `L^p` to `L^q`:
///
/// ```text
/// A(x) = x (∫_x^∞ k^q)^{p′/q} ≤ c^{−p′}
/// B(x) = x (∫_x^∞ k^{p′})^{q/p′} ≤ c
/// ```
///
/// The suprema are the largest left sides over the scan points.
pub fn radial_check(family: &KernelFamily, p: f64, q: f64, scan: &ScanConfig) -> Result<ConditionReport> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", "needs 1 < p < ∞"));
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(invalid("q", "needs 0 < q < ∞"));
    }
    scan.validate()?;
    let k: Box<dyn Fn(f64) -> f64 + Sync> = match family {
        KernelFamily::Radial(prof) => {
            let prof = prof.clone();
            Box::new(move |t| prof.eval(t))
        }
        KernelFamily::PowerRadial { lambda } => {
            let l = *lambda;
            Box::new(move |t: f64| t.powf(-l))
        }
        other => return Err(Error::Precondition(format!("radial_check needs a radial kernel, got {}", other.name()))),
    };
    family.check_profile(scan.window.0, scan.window.1)?;
    let mut warnings = Vec::new();
    let doubling = family.doubling_constant(scan.window.0, scan.window.1).unwrap_or(f64::INFINITY);
    if !doubling.is_finite() {
        warnings.push("k has no finite doubling constant on the window".into());
    }
    let pp = conjugate(p);
    let exponent = match family {
        KernelFamily::PowerRadial { lambda } => Some(*lambda),
        KernelFamily::Radial(prof) => prof.power_exponent(),
        _ => None,
    };
    let nodes = scan.nodes();
    let mut sa = Vec::new();
    let mut sb = Vec::new();
    let mut tail_share: f64 = 0.0;
    for window in scan.windows() {
        let (_, b, xs) = nodes.window_indices(window, scan.x_points);
        let res: Vec<(f64, f64, f64)> = xs
            .par_iter()
            .map(|&xi| {
                let x = nodes.edges[xi];
                let (ia, ta) = upper_integral(&nodes, &|y| k(y).powf(q), xi, b);
                let (ib, tb) = upper_integral(&nodes, &|y| k(y).powf(pp), xi, b);
                (x * ia.powf(pp / q), x * ib.powf(q / pp), share(ta, ia).max(share(tb, ib)))
            })
            .collect();
        sa.push(res.iter().map(|r| r.0).fold(0.0, f64::max));
        sb.push(res.iter().map(|r| r.1).fold(0.0, f64::max));
        tail_share = tail_share.max(res.iter().map(|r| r.2).fold(0.0, f64::max));
    }
    let ca = sa.last().map(|s| s.powf(-1.0 / pp)).unwrap_or(f64::NAN);
    let cb = sb.last().copied().unwrap_or(f64::NAN);
    let (_, _, xs) = nodes.window_indices(scan.window, scan.x_points);
    let x_grid = xs.iter().map(|&i| nodes.edges[i]).collect();
    let parts = vec![ConditionPart::new("A", sa, ca), ConditionPart::new("B", sb, cb)];
    let mut report = ConditionReport::assemble("radial", scan, x_grid, Vec::new(), parts);
    report.tail_share = tail_share;
    report.details.insert("doubling_constant".into(), doubling);
    if let Some(l) = exponent {
        report.details.insert("exponent_a".into(), 1.0 + pp * (1.0 / q - l));
        report.details.insert("exponent_b".into(), 1.0 + q * (1.0 / pp - l));
        let strip = (1.0 / pp).max(1.0 / q);
        if !(l > strip && l < 1.0) {
            warnings.push(format!("λ = {l} lies outside the admissible strip ({strip}, 1)"));
        }
    }
    report.warnings = warnings;
    Ok(report)
}

/// Mixed norm `∫_W (∫_W K(x,y)^{p′} dy)^{q/p′} dx` on a sequence of windows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KantorovicResult {
    pub windows: Vec<(f64, f64)>,
    pub values: Vec<f64>,
    pub growth: Vec<f64>,
    pub verdict: Verdict,
}

/// Cell overlaps of `[lo, hi)` with a grid, as `(index, length)` pairs.
fn overlaps(edges: &[f64], lengths: &[f64], lo: f64, hi: f64) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for i in 0..lengths.len() {
        let (a, b) = (edges[i], edges[i + 1]);
        if b <= lo || a >= hi {
            continue;
        }
        let l = if a >= lo && b <= hi { lengths[i] } else { b.min(hi) - a.max(lo) };
        if l > 0.0 {
            out.push((i, l));
        }
    }
    out
}

pub fn kantorovic_mixed_norm(k: &KernelGrid, p: f64, q: f64, windows: &[(f64, f64)]) -> Result<KantorovicResult> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", "needs 1 < p < ∞"));
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(invalid("q", "needs 0 < q < ∞"));
    }
    if windows.is_empty() {
        return Err(invalid("windows", "at least one window"));
    }
    let pp = conjugate(p);
    let values: Vec<f64> = windows
        .iter()
        .map(|&(lo, hi)| {
            let ys = overlaps(k.y_edges(), k.y_lengths(), lo, hi);
            let xs = overlaps(k.x_edges(), k.x_lengths(), lo, hi);
            let rows: Vec<f64> = xs
                .par_iter()
                .map(|&(i, lx)| {
                    let inner = fsum(ys.iter().map(|&(j, ly)| k.value(i, j).powf(pp) * ly));
                    inner.powf(q / pp) * lx
                })
                .collect();
            fsum(rows)
        })
        .collect();
    Ok(KantorovicResult {
        windows: windows.to_vec(),
        growth: growth_factors(&values),
        verdict: verdict_from_suprema(&values),
        values,
    })
}
