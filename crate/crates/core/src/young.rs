//! N-functions `Φ(t) = ∫_0^t φ`, their inverses and complementary functions.
//!
//! Two representations are supported: the scaled power `a·t^p` with exact
//! closed forms, and a tabulated density on a log grid. Between table points
//! the density is interpolated as a local power law (linear in log-log
//! coordinates) and extrapolated the same way from the end cells, so `Φ`,
//! `Φ⁻¹`, `φ⁻¹` and the complementary function are all exact for the
//! interpolant.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::quad::log_edges;

/// Default table for sampled densities: 2048 log-uniform points.
pub const SAMPLED_POINTS: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct NFunction {
    repr: Repr,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Power { coef: f64, exponent: f64 },
    Sampled(Table),
}

#[derive(Debug, Clone, PartialEq)]
struct Table {
    t: Vec<f64>,
    phi: Vec<f64>,
    /// log-log slope of φ on each cell; `slope.len() == t.len() - 1`
    slope: Vec<f64>,
    /// Φ at each table point
    cum: Vec<f64>,
}

impl Table {
    fn new(t: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        if t.len() < 2 || t.len() != phi.len() {
            return Err(invalid("sampled", "need at least two (t, φ) pairs of equal length"));
        }
        for w in t.windows(2) {
            if !(w[0] > 0.0 && w[1] > w[0] && w[1].is_finite()) {
                return Err(invalid("sampled", "t must be positive, finite and strictly increasing"));
            }
        }
        for w in phi.windows(2) {
            if !(w[0] > 0.0 && w[1] >= w[0] && w[1].is_finite()) {
                return Err(invalid("sampled", "φ must be positive, finite and nondecreasing"));
            }
        }
        let slope: Vec<f64> = (0..t.len() - 1)
            .map(|i| (phi[i + 1] / phi[i]).ln() / (t[i + 1] / t[i]).ln())
            .collect();
        if !(slope[0] > 0.0) {
            return Err(invalid("sampled", "φ must vanish at 0+ (first cell is flat)"));
        }
        if !(slope[slope.len() - 1] > 0.0) {
            return Err(invalid("sampled", "φ must be unbounded (last cell is flat)"));
        }
        let mut cum = Vec::with_capacity(t.len());
        cum.push(phi[0] * t[0] / (slope[0] + 1.0));
        for i in 0..slope.len() {
            let inc = cell_integral(t[i], phi[i], slope[i], t[i + 1]);
            cum.push(cum[i] + inc);
        }
        Ok(Self { t, phi, slope, cum })
    }

    fn last_slope(&self) -> f64 {
        self.slope[self.slope.len() - 1]
    }

    /// Index of the cell containing `x` within `table` (clamped), for x inside.
    fn cell(table: &[f64], x: f64) -> usize {
        let i = table.partition_point(|&v| v <= x);
        i.saturating_sub(1).min(table.len() - 2)
    }

    fn density(&self, x: f64) -> f64 {
        let n = self.t.len() - 1;
        if x <= self.t[0] {
            return self.phi[0] * (x / self.t[0]).powf(self.slope[0]);
        }
        if x >= self.t[n] {
            return self.phi[n] * (x / self.t[n]).powf(self.last_slope());
        }
        let i = Self::cell(&self.t, x);
        self.phi[i] * (x / self.t[i]).powf(self.slope[i])
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.t.len() - 1;
        if x <= 0.0 {
            return 0.0;
        }
        if x <= self.t[0] {
            return self.density(x) * x / (self.slope[0] + 1.0);
        }
        if x >= self.t[n] {
            return self.cum[n] + cell_integral(self.t[n], self.phi[n], self.last_slope(), x);
        }
        let i = Self::cell(&self.t, x);
        self.cum[i] + cell_integral(self.t[i], self.phi[i], self.slope[i], x)
    }

    fn inverse(&self, s: f64) -> f64 {
        let n = self.t.len() - 1;
        if s <= 0.0 {
            return 0.0;
        }
        if s <= self.cum[0] {
            return self.t[0] * (s / self.cum[0]).powf(1.0 / (self.slope[0] + 1.0));
        }
        let (i, k) = if s >= self.cum[n] {
            (n, self.last_slope())
        } else {
            let i = Self::cell(&self.cum, s);
            (i, self.slope[i])
        };
        let z = (s - self.cum[i]) * (k + 1.0) / (self.phi[i] * self.t[i]);
        self.t[i] * (z.ln_1p() / (k + 1.0)).exp()
    }

    fn density_inverse(&self, s: f64) -> f64 {
        let n = self.t.len() - 1;
        if s <= 0.0 {
            return 0.0;
        }
        if s <= self.phi[0] {
            return self.t[0] * (s / self.phi[0]).powf(1.0 / self.slope[0]);
        }
        if s >= self.phi[n] {
            return self.t[n] * (s / self.phi[n]).powf(1.0 / self.last_slope());
        }
        let mut i = Self::cell(&self.phi, s);
        // skip flat cells: any point of a flat run is a valid preimage
        while self.slope[i] == 0.0 && i + 1 < self.slope.len() {
            i += 1;
        }
        self.t[i] * (s / self.phi[i]).powf(1.0 / self.slope[i])
    }
}

/// `∫_{t0}^{x} φ0 (y/t0)^k dy`
fn cell_integral(t0: f64, phi0: f64, k: f64, x: f64) -> f64 {
    let r = (x / t0).ln();
    phi0 * t0 * ((k + 1.0) * r).exp_m1() / (k + 1.0)
}

impl NFunction {
    /// `Φ(t) = t^p`, `p > 1`.
    pub fn power(p: f64) -> Result<Self> {
        Self::scaled_power(1.0, p)
    }

    /// `Φ(t) = a·t^p`.
    pub fn scaled_power(coef: f64, p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(invalid("p", format!("power N-function needs p > 1, got {p}")));
        }
        if !(coef > 0.0 && coef.is_finite()) {
            return Err(invalid("coef", format!("must be positive, got {coef}")));
        }
        Ok(Self { repr: Repr::Power { coef, exponent: p } })
    }

    /// Tabulated density `φ(t_i)`.
    pub fn sampled(t: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        Ok(Self { repr: Repr::Sampled(Table::new(t, phi)?) })
    }

    /// Samples `density` on `n` log-uniform points of `[lo, hi]`.
    pub fn sampled_from_density<F: Fn(f64) -> f64>(density: F, lo: f64, hi: f64, n: usize) -> Result<Self> {
        let t = log_edges(lo, hi, n - 1);
        let phi = t.iter().map(|&x| density(x)).collect();
        Self::sampled(t, phi)
    }

    /// `Φ(t) = e^t - t - 1` from its sampled density `e^t - 1`. The table stops
    /// at `t = 700`, where `e^t` is still representable.
    pub fn exp_minus_linear() -> Self {
        Self::sampled_from_density(f64::exp_m1, 1e-8, 700.0, SAMPLED_POINTS)
            .expect("e^t - 1 is a valid density")
    }

    /// Exponent `p` when `Φ = a·t^p`.
    pub fn power_exponent(&self) -> Option<f64> {
        match self.repr {
            Repr::Power { exponent, .. } => Some(exponent),
            Repr::Sampled(_) => None,
        }
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self.repr, Repr::Sampled(_))
    }

    /// Φ(t)
    pub fn eval(&self, t: f64) -> f64 {
        match &self.repr {
            Repr::Power { coef, exponent } => {
                if t <= 0.0 {
                    0.0
                } else {
                    coef * t.powf(*exponent)
                }
            }
            Repr::Sampled(tab) => tab.eval(t),
        }
    }

    /// φ(t) = Φ'(t)
    pub fn density(&self, t: f64) -> f64 {
        match &self.repr {
            Repr::Power { coef, exponent } => {
                if t <= 0.0 {
                    0.0
                } else {
                    coef * exponent * t.powf(exponent - 1.0)
                }
            }
            Repr::Sampled(tab) => tab.density(t),
        }
    }

    /// Φ⁻¹(s)
    pub fn inverse(&self, s: f64) -> f64 {
        match &self.repr {
            Repr::Power { coef, exponent } => {
                if s <= 0.0 {
                    0.0
                } else {
                    (s / coef).powf(1.0 / exponent)
                }
            }
            Repr::Sampled(tab) => tab.inverse(s),
        }
    }

    /// φ⁻¹(s)
    pub fn density_inverse(&self, s: f64) -> f64 {
        match &self.repr {
            Repr::Power { coef, exponent } => {
                if s <= 0.0 {
                    0.0
                } else {
                    (s / (coef * exponent)).powf(1.0 / (exponent - 1.0))
                }
            }
            Repr::Sampled(tab) => tab.density_inverse(s),
        }
    }

    /// Ψ(t) = ∫_0^t φ⁻¹.
    pub fn complementary(&self) -> Result<Self> {
        match &self.repr {
            Repr::Power { coef, exponent } => {
                let p = *exponent;
                let conj = p / (p - 1.0);
                let c = (coef * p).powf(-1.0 / (p - 1.0)) / conj;
                Self::scaled_power(c, conj)
            }
            Repr::Sampled(tab) => {
                if let Some(i) = tab.slope.iter().position(|&k| k == 0.0) {
                    return Err(Error::Degenerate(format!(
                        "density is flat on [{}, {}]; φ⁻¹ jumps there",
                        tab.t[i],
                        tab.t[i + 1]
                    )));
                }
                Self::sampled(tab.phi.clone(), tab.t.clone())
            }
        }
    }

    /// `Φ / Φ(1)`, so that the result takes the value 1 at 1.
    pub fn normalized(&self) -> Self {
        let s = self.eval(1.0);
        match &self.repr {
            Repr::Power { coef, exponent } => Self { repr: Repr::Power { coef: coef / s, exponent: *exponent } },
            Repr::Sampled(tab) => {
                let phi = tab.phi.iter().map(|v| v / s).collect();
                Self::sampled(tab.t.clone(), phi).expect("scaling keeps a valid table")
            }
        }
    }

    /// Table points of a sampled density (empty for closed forms).
    pub fn table_points(&self) -> &[f64] {
        match &self.repr {
            Repr::Power { .. } => &[],
            Repr::Sampled(tab) => &tab.t,
        }
    }
}

/// An N-function together with its complementary function.
#[derive(Debug, Clone)]
pub struct ComplementaryPair {
    pub phi: NFunction,
    pub psi: NFunction,
}

impl ComplementaryPair {
    pub fn new(phi: NFunction) -> Result<Self> {
        let psi = phi.complementary()?;
        Ok(Self { phi, psi })
    }

    /// `Φ(s) + Ψ(t) - s·t`, nonnegative by Young's inequality.
    pub fn young_gap(&self, s: f64, t: f64) -> f64 {
        self.phi.eval(s) + self.psi.eval(t) - s * t
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Delta2Report {
    /// sup over the grid of Φ(2t)/Φ(t)
    pub sup_ratio: f64,
    /// largest ratio within each of the top three decades of the grid
    pub top_decades: Vec<f64>,
    pub pass: bool,
}

/// Δ₂ check on a grid spanning at least eight decades.
pub fn check_delta2(phi: &NFunction, t_grid: &[f64]) -> Result<Delta2Report> {
    let (lo, hi) = match (t_grid.first(), t_grid.last()) {
        (Some(&a), Some(&b)) if a > 0.0 && b > a => (a, b),
        _ => return Err(invalid("t_grid", "needs increasing positive points")),
    };
    if (hi / lo).log10() < 8.0 - 1e-9 {
        return Err(invalid("t_grid", "must span at least 8 decades"));
    }
    let ratio = |t: f64| {
        let num = phi.eval(2.0 * t);
        let den = phi.eval(t);
        if !num.is_finite() || den == 0.0 {
            f64::INFINITY
        } else {
            num / den
        }
    };
    let ratios: Vec<f64> = t_grid.iter().map(|&t| ratio(t)).collect();
    let sup_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let top_decades: Vec<f64> = (0..3)
        .rev()
        .map(|d| {
            let upper = hi / 10f64.powi(d);
            let lower = upper / 10.0;
            t_grid
                .iter()
                .zip(&ratios)
                .filter(|(&t, _)| t > lower * (1.0 + 1e-12) && t <= upper * (1.0 + 1e-12))
                .map(|(_, &r)| r)
                .fold(0.0, f64::max)
        })
        .collect();
    let min = top_decades.iter().copied().fold(f64::INFINITY, f64::min);
    let max = top_decades.iter().copied().fold(0.0, f64::max);
    let pass = sup_ratio.is_finite() && min > 0.0 && (max - min) / min <= 0.1;
    Ok(Delta2Report { sup_ratio, top_decades, pass })
}

/// Default Δ₂ grid: 1e-8 .. 1e8, eight points per decade.
pub fn default_delta2_grid() -> Vec<f64> {
    log_edges(1e-8, 1e8, 128)
}

#[derive(Debug, Clone, Serialize)]
pub struct CompositionReport {
    /// most negative change of slope of `outer ∘ inner⁻¹`, relative to the slope scale
    pub worst_curvature: f64,
    pub convex: bool,
}

/// Is `outer ∘ inner⁻¹` convex on `grid`?
pub fn check_convex_composition(outer: &NFunction, inner: &NFunction, grid: &[f64]) -> CompositionReport {
    let vals: Vec<f64> = grid.iter().map(|&s| outer.eval(inner.inverse(s))).collect();
    let slopes: Vec<f64> = (0..grid.len().saturating_sub(1))
        .map(|i| (vals[i + 1] - vals[i]) / (grid[i + 1] - grid[i]))
        .collect();
    let scale = slopes.iter().fold(0.0f64, |m, s| m.max(s.abs())).max(f64::MIN_POSITIVE);
    let worst = slopes
        .windows(2)
        .map(|w| (w[1] - w[0]) / scale)
        .fold(f64::INFINITY, f64::min);
    let worst_curvature = if worst.is_finite() { worst } else { 0.0 };
    CompositionReport { worst_curvature, convex: worst_curvature >= -1e-10 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn power_values() {
        let p2 = NFunction::power(2.0).unwrap();
        assert_eq!(p2.eval(3.0), 9.0);
        assert_eq!(p2.density(3.0), 6.0);
        let p4 = NFunction::power(4.0).unwrap();
        assert!(rel(p4.inverse(16.0), 2.0) < 1e-15);
    }

    #[test]
    fn power_rejects_p_le_one() {
        assert!(NFunction::power(1.0).is_err());
        assert!(NFunction::power(0.5).is_err());
    }

    #[test]
    fn complementary_of_square_matches_legendre_maximization() {
        let psi = NFunction::power(2.0).unwrap().complementary().unwrap();
        // oracle: sup_s (s t - s²) over a fine s grid
        for &t in &[0.3, 1.0, 2.5, 10.0] {
            let oracle = (0..200_001)
                .map(|i| {
                    let s = 20.0 * i as f64 / 200_000.0;
                    s * t - s * s
                })
                .fold(f64::MIN, f64::max);
            assert!(rel(psi.eval(t), oracle) < 1e-8, "t={t}");
            assert!(rel(psi.eval(t), t * t / 4.0) < 1e-14);
        }
    }

    #[test]
    fn complementary_of_cube_at_two() {
        let psi = NFunction::power(3.0).unwrap().complementary().unwrap();
        // oracle: Simpson on φ⁻¹(s) = (s/3)^{1/2} over (0, 2)
        let n = 200_000;
        let h = 2.0 / n as f64;
        let f = |s: f64| (s / 3.0).sqrt();
        let mut acc = f(0.0) + f(2.0);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        let oracle = acc * h / 3.0;
        assert!((psi.eval(2.0) - oracle).abs() < 1e-6);
        // closed form 3^{-1/2}·(2/3)·2^{3/2}
        assert!((psi.eval(2.0) - 1.088_662_107_903_635_5).abs() < 1e-12);
    }

    #[test]
    fn double_complementary_is_identity() {
        let phi = NFunction::power(2.0).unwrap();
        let back = phi.complementary().unwrap().complementary().unwrap();
        for &t in &[1e-6, 0.5, 3.0, 1e5] {
            assert!(rel(back.eval(t), phi.eval(t)) < 1e-9);
        }
        let e = NFunction::exp_minus_linear();
        let back = e.complementary().unwrap().complementary().unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn sampled_inverse_round_trip() {
        let e = NFunction::exp_minus_linear();
        for &t in e.table_points().iter().step_by(37) {
            assert!(rel(e.inverse(e.eval(t)), t) < 1e-9, "t={t}");
            assert!(rel(e.density_inverse(e.density(t)), t) < 1e-9);
        }
        // closed form check in the interior
        let t = 3.0;
        assert!(rel(e.eval(t), t.exp() - t - 1.0) < 1e-4);
    }

    #[test]
    fn sampled_rejects_flat_density_for_complement() {
        let t = vec![0.1, 1.0, 2.0, 3.0];
        let phi = vec![0.1, 1.0, 1.0, 5.0];
        let f = NFunction::sampled(t, phi).unwrap();
        assert!(matches!(f.complementary(), Err(Error::Degenerate(_))));
    }

    #[test]
    fn sampled_rejects_bad_tables() {
        assert!(NFunction::sampled(vec![1.0, 0.5], vec![1.0, 2.0]).is_err());
        assert!(NFunction::sampled(vec![1.0, 2.0], vec![2.0, 1.0]).is_err());
        assert!(NFunction::sampled(vec![1.0, 2.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn delta2_verdicts() {
        let grid = default_delta2_grid();
        let r = check_delta2(&NFunction::power(2.0).unwrap(), &grid).unwrap();
        assert!(rel(r.sup_ratio, 4.0) < 1e-12 && r.pass);
        let r = check_delta2(&NFunction::power(5.0).unwrap(), &grid).unwrap();
        assert!(rel(r.sup_ratio, 32.0) < 1e-12 && r.pass);
        // oracle: the ratio at t = 2^k keeps growing
        let e = NFunction::exp_minus_linear();
        let ratios: Vec<f64> = (0..=20).map(|k| {
            let t = 2f64.powi(k);
            e.eval(2.0 * t) / e.eval(t)
        }).collect();
        assert!(ratios[10] > 1e100 || !ratios[10].is_finite());
        let r = check_delta2(&e, &grid).unwrap();
        assert!(!r.pass);
        assert!(!r.sup_ratio.is_finite());
    }

    #[test]
    fn delta2_needs_eight_decades() {
        let g = log_edges(1.0, 1e7, 20);
        assert!(check_delta2(&NFunction::power(2.0).unwrap(), &g).is_err());
    }

    #[test]
    fn convex_composition_verdicts() {
        let g = log_edges(1e-6, 1e6, 96);
        let t2 = NFunction::power(2.0).unwrap();
        let t4 = NFunction::power(4.0).unwrap();
        assert!(check_convex_composition(&t4, &t2, &g).convex);
        assert!(!check_convex_composition(&t2, &t4, &g).convex);
        let t3 = NFunction::power(3.0).unwrap();
        assert!(check_convex_composition(&t3, &t3, &g).convex);
    }

    #[test]
    fn normalization() {
        let f = NFunction::scaled_power(5.0, 2.0).unwrap().normalized();
        assert!(rel(f.eval(1.0), 1.0) < 1e-15);
        let e = NFunction::exp_minus_linear().normalized();
        assert!(rel(e.eval(1.0), 1.0) < 1e-12);
    }

    #[test]
    fn young_equality_case() {
        for phi in [NFunction::power(2.0).unwrap(), NFunction::power(3.0).unwrap(), NFunction::exp_minus_linear()] {
            let pair = ComplementaryPair::new(phi).unwrap();
            for &s in &[1e-3, 0.1, 1.0, 7.0, 50.0] {
                let ds = pair.phi.density(s);
                let gap = pair.young_gap(s, ds);
                assert!(gap.abs() <= 1e-8 * s * ds, "s={s} gap={gap}");
            }
        }
    }

    #[test]
    fn conjugate_exponent_from_growth() {
        let psi = NFunction::power(3.0).unwrap().complementary().unwrap();
        let growth = (psi.eval(2e3) / psi.eval(1e3)).ln() / 2f64.ln();
        assert!((growth - 1.5).abs() < 1e-6);
    }
}
