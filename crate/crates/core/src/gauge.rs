//! Luxemburg gauges `ρ_{Φ,u}(f) = inf{λ > 0 : ∫ Φ(f/λ) u ≤ 1}`, the dual
//! gauge `ρ_{Ψ,u}(g/u)` and the down-dual formula.

use serde::Serialize;

use crate::error::Result;
use crate::grid::{GridFunction, Weight};
use crate::sum::fsum;
use crate::young::NFunction;

/// Bisection stops once `hi/lo - 1` drops below this.
pub const GAUGE_REL_TOL: f64 = 1e-13;
const BRACKET_CAP: f64 = 1e30;

#[derive(Debug, Clone)]
pub struct GaugeSpec {
    pub phi: NFunction,
    pub u: Weight,
}

impl GaugeSpec {
    pub fn new(phi: NFunction, u: Weight) -> Self {
        Self { phi, u }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeValue {
    /// The gauge; `f64::INFINITY` when the modular never drops to 1.
    pub value: f64,
    pub modular_at_value: f64,
    pub bisection_iterations: u32,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl GaugeValue {
    fn exact(value: f64) -> Self {
        Self { value, modular_at_value: 0.0, bisection_iterations: 0, warnings: Vec::new() }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// Cell values of `f` with the matching `u`-masses.
struct Modular<'a> {
    phi: &'a NFunction,
    cells: Vec<(f64, f64)>,
}

impl<'a> Modular<'a> {
    fn new(f: &GridFunction, spec: &'a GaugeSpec) -> Self {
        let masses = spec.u.masses_on(f.edges());
        let cells = f
            .values()
            .iter()
            .zip(masses)
            .filter(|(v, m)| **v > 0.0 && *m > 0.0)
            .map(|(v, m)| (*v, m))
            .collect();
        Self { phi: &spec.phi, cells }
    }

    fn at(&self, lambda: f64) -> f64 {
        fsum(self.cells.iter().map(|&(v, m)| self.phi.eval(v / lambda) * m))
    }
}

/// `∫ Φ(f/λ) u`, as an exact cell sum.
pub fn modular(f: &GridFunction, spec: &GaugeSpec, lambda: f64) -> f64 {
    assert!(lambda > 0.0, "modular needs λ > 0");
    Modular::new(f, spec).at(lambda)
}

/// ρ_{Φ,u}(f)
pub fn gauge_norm(f: &GridFunction, spec: &GaugeSpec) -> GaugeValue {
    let m = Modular::new(f, spec);
    if m.cells.is_empty() {
        return GaugeValue::exact(0.0);
    }
    if m.cells.iter().any(|&(_, w)| !w.is_finite()) {
        return GaugeValue { warnings: vec!["weight has infinite mass on the support of f".into()], ..GaugeValue::exact(f64::INFINITY) };
    }
    let mut iterations = 0;
    let start = m.cells.iter().map(|c| c.0).fold(0.0, f64::max);
    let (mut lo, mut hi) = (start, start);
    while m.at(hi) > 1.0 {
        hi *= 2.0;
        iterations += 1;
        if hi > BRACKET_CAP {
            return GaugeValue { value: f64::INFINITY, modular_at_value: m.at(BRACKET_CAP), bisection_iterations: iterations, warnings: Vec::new() };
        }
    }
    while m.at(lo) <= 1.0 {
        lo *= 0.5;
        iterations += 1;
        if lo < 1.0 / BRACKET_CAP {
            return GaugeValue { value: 0.0, modular_at_value: m.at(lo), bisection_iterations: iterations, warnings: Vec::new() };
        }
    }
    if hi <= lo {
        hi = lo * 2.0;
    }
    while hi / lo - 1.0 > GAUGE_REL_TOL {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if m.at(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    GaugeValue { value: hi, modular_at_value: m.at(hi), bisection_iterations: iterations, warnings: Vec::new() }
}

/// ρ′(g) = ρ_{Ψ,u}(g/u), Ψ the complementary function of Φ.
pub fn dual_gauge(g: &GridFunction, spec: &GaugeSpec) -> Result<GaugeValue> {
    let psi = spec.phi.complementary()?;
    let edges = g.edges();
    let mut blocked = false;
    let ratio = g.map_values(|v, i| {
        if v == 0.0 {
            return 0.0;
        }
        let avg = spec.u.average(edges[i], edges[i + 1]);
        if avg > 0.0 {
            v / avg
        } else {
            0.0
        }
    })?;
    for (i, &v) in g.values().iter().enumerate() {
        if v > 0.0 && !(spec.u.average(edges[i], edges[i + 1]) > 0.0) {
            blocked = true;
        }
    }
    if blocked {
        return Ok(GaugeValue {
            warnings: vec!["u vanishes on a cell where g > 0".into()],
            ..GaugeValue::exact(f64::INFINITY)
        });
    }
    Ok(gauge_norm(&ratio, &GaugeSpec::new(psi, spec.u.clone())))
}

/// `(ρ′₂)_d(h) = ρ_{Ψ₂,u₂}(x ↦ ∫_0^x h / U₂(x))`.
///
/// The quotient is sampled at cell midpoints of the union of the cells of
/// `h` and `u₂`. When the `∫u₂ = ∞` heuristic does not hold a warning is
/// attached; the formula is not validated in that regime.
pub fn down_dual_gauge(h: &GridFunction, phi2: &NFunction, u2: &Weight) -> Result<GaugeValue> {
    let psi = phi2.complementary()?;
    if h.is_zero() {
        return Ok(GaugeValue::exact(0.0));
    }
    let mut edges: Vec<f64> = h.edges().iter().chain(u2.base().edges()).copied().collect();
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup();
    let mut infinite = false;
    let values: Vec<f64> = edges
        .windows(2)
        .map(|w| {
            let x = 0.5 * (w[0] + w[1]);
            let num = h.prefix_integral(x);
            let den = u2.cumulative(x);
            if num == 0.0 {
                0.0
            } else if den > 0.0 {
                num / den
            } else {
                infinite = true;
                0.0
            }
        })
        .collect();
    let mut warnings = Vec::new();
    if !u2.is_divergent() {
        warnings.push("∫u₂ = ∞ does not hold (heuristic); down-dual formula unvalidated here".to_string());
    }
    if infinite {
        warnings.push("U₂ vanishes where ∫_0^x h > 0".to_string());
        return Ok(GaugeValue { warnings, ..GaugeValue::exact(f64::INFINITY) });
    }
    let quotient = GridFunction::new(edges, values)?;
    let mut out = gauge_norm(&quotient, &GaugeSpec::new(psi, u2.clone()));
    out.warnings.extend(warnings);
    Ok(out)
}
