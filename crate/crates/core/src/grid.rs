//! Nonnegative piecewise-constant functions on a truncated half-line.
//!
//! A [`GridFunction`] stores its cells both as edges and as exact lengths.
//! Operations that move cells around (rearrangement, dilation) keep the
//! lengths bit-for-bit, so integrals and distribution functions computed with
//! [`fsum`] are invariant under those operations.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::quad::log_edges;
use crate::sum::{fsum, prefix_fsum};

/// Default truncation window.
pub const DEFAULT_WINDOW: (f64, f64) = (1e-6, 1e6);
/// Default number of cells for functions on the default window.
pub const DEFAULT_CELLS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    edges: Vec<f64>,
    lengths: Vec<f64>,
    values: Vec<f64>,
}

impl GridFunction {
    /// Builds a function from `n + 1` edges and `n` cell values.
    pub fn new(edges: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if edges.is_empty() || edges.len() != values.len() + 1 {
            return Err(invalid("edges", "need exactly one more edge than values"));
        }
        if !(edges[0] >= 0.0) {
            return Err(invalid("edges", "edges must be nonnegative"));
        }
        if edges.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(invalid("edges", "edges must be finite and strictly increasing"));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(invalid("values", "values must be finite and nonnegative"));
        }
        let lengths = edges.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Self { edges, lengths, values })
    }

    /// Builds a function from a start point, exact cell lengths and values.
    pub fn from_lengths(start: f64, lengths: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if lengths.len() != values.len() {
            return Err(invalid("lengths", "need one length per value"));
        }
        if lengths.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(invalid("lengths", "cell lengths must be positive"));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(invalid("values", "values must be finite and nonnegative"));
        }
        let mut edges = Vec::with_capacity(lengths.len() + 1);
        edges.push(start);
        let mut x = start;
        for l in &lengths {
            x += l;
            edges.push(x);
        }
        if edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("lengths", "cells collapse under rounding"));
        }
        Ok(Self { edges, lengths, values })
    }

    /// Trusted constructor for cells already validated elsewhere.
    pub(crate) fn from_parts(edges: Vec<f64>, lengths: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert!(edges.len() == lengths.len() + 1 && lengths.len() == values.len());
        Self { edges, lengths, values }
    }

    /// `∫` over each cell of `edges`; uses the stored lengths when the grids coincide.
    pub fn masses_on(&self, edges: &[f64]) -> Vec<f64> {
        if edges == self.edges.as_slice() {
            return self.values.iter().zip(&self.lengths).map(|(v, l)| v * l).collect();
        }
        edges.windows(2).map(|w| self.mass_between(w[0], w[1])).collect()
    }

    /// The zero function (no cells).
    pub fn zero() -> Self {
        Self { edges: vec![0.0], lengths: Vec::new(), values: Vec::new() }
    }

    /// `c·χ_(a,b)`
    pub fn indicator(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![c])
    }

    /// Constant `c` on each cell of `edges`.
    pub fn constant(edges: Vec<f64>, c: f64) -> Result<Self> {
        let n = edges.len().saturating_sub(1);
        Self::new(edges, vec![c; n])
    }

    /// Cell averages of a function with known antiderivative `prim`.
    pub fn from_antiderivative<F: Fn(f64) -> f64>(edges: Vec<f64>, prim: F) -> Result<Self> {
        let values = edges
            .windows(2)
            .map(|w| ((prim(w[1]) - prim(w[0])) / (w[1] - w[0])).max(0.0))
            .collect();
        Self::new(edges, values)
    }

    /// Values of `f` at the cell midpoints.
    pub fn from_midpoints<F: Fn(f64) -> f64>(edges: Vec<f64>, f: F) -> Result<Self> {
        let values = edges.windows(2).map(|w| f(0.5 * (w[0] + w[1]))).collect();
        Self::new(edges, values)
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// `[first edge, last edge]`
    pub fn support_window(&self) -> (f64, f64) {
        (self.edges[0], self.edges[self.edges.len() - 1])
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Cell index containing `x` (cells are half-open `[a, b)`).
    pub fn cell_of(&self, x: f64) -> Option<usize> {
        if self.values.is_empty() || x < self.edges[0] || x >= self.edges[self.edges.len() - 1] {
            return None;
        }
        Some(self.edges.partition_point(|&e| e <= x) - 1)
    }

    /// f(x), zero outside the cells.
    pub fn eval(&self, x: f64) -> f64 {
        self.cell_of(x).map_or(0.0, |i| self.values[i])
    }

    /// `∫ f`, exactly rounded.
    pub fn integrate(&self) -> f64 {
        fsum(self.values.iter().zip(&self.lengths).map(|(v, l)| v * l))
    }

    /// `∫_0^x f` with the partial cell handled exactly.
    pub fn prefix_integral(&self, x: f64) -> f64 {
        if self.values.is_empty() || x <= self.edges[0] {
            return 0.0;
        }
        let last = self.edges.len() - 1;
        if x >= self.edges[last] {
            return self.integrate();
        }
        let i = self.edges.partition_point(|&e| e <= x) - 1;
        let full = self.values[..i].iter().zip(&self.lengths[..i]).map(|(v, l)| v * l);
        fsum(full.chain(std::iter::once(self.values[i] * (x - self.edges[i]))))
    }

    /// `∫_0^x f` at every edge.
    pub fn prefix_table(&self) -> Vec<f64> {
        let masses: Vec<f64> = self.values.iter().zip(&self.lengths).map(|(v, l)| v * l).collect();
        prefix_fsum(&masses)
    }

    /// μ_f(λ) = |{f > λ}|
    pub fn distribution(&self, lambda: f64) -> Result<f64> {
        if !(lambda >= 0.0) {
            return Err(invalid("lambda", "distribution needs λ ≥ 0"));
        }
        Ok(fsum(
            self.values
                .iter()
                .zip(&self.lengths)
                .filter(|(v, _)| **v > lambda)
                .map(|(_, l)| *l),
        ))
    }

    /// The distribution function as a step table over the distinct values.
    pub fn distribution_function(&self) -> DistributionFunction {
        let mut thresholds: Vec<f64> = self.values.iter().copied().filter(|v| *v > 0.0).collect();
        thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
        thresholds.dedup();
        let measures = thresholds
            .iter()
            .map(|&t| self.distribution(t).expect("thresholds are nonnegative"))
            .collect();
        DistributionFunction { thresholds, measures }
    }

    /// Nonincreasing rearrangement f*, laid out from 0. Zero cells are dropped,
    /// ties keep their original order.
    pub fn rearrange(&self) -> GridFunction {
        let mut cells: Vec<(f64, f64)> = self
            .values
            .iter()
            .zip(&self.lengths)
            .filter(|(v, _)| **v > 0.0)
            .map(|(v, l)| (*v, *l))
            .collect();
        if cells.is_empty() {
            return GridFunction::zero();
        }
        cells.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
        let (values, lengths) = cells.into_iter().unzip::<f64, f64, Vec<f64>, Vec<f64>>();
        GridFunction::from_lengths(0.0, lengths, values).expect("rearrangement keeps valid cells")
    }

    /// f**(t) = t⁻¹ ∫_0^t f*
    pub fn maximal(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(invalid("t", "maximal function needs t > 0"));
        }
        Ok(self.rearrange().prefix_integral(t) / t)
    }

    /// x ↦ f(t·x)
    pub fn dilate(&self, t: f64) -> Result<GridFunction> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid("t", "dilation needs t > 0"));
        }
        if self.values.is_empty() {
            return Ok(self.clone());
        }
        let lengths = self.lengths.iter().map(|l| l / t).collect();
        GridFunction::from_lengths(self.edges[0] / t, lengths, self.values.clone())
    }

    /// Dilation clipped to `window`; also returns the mass (`∫`) cut off.
    pub fn dilate_within(&self, t: f64, window: (f64, f64)) -> Result<(GridFunction, f64)> {
        let d = self.dilate(t)?;
        let total = d.integrate();
        let clipped = d.restrict(window.0, window.1);
        let kept = clipped.integrate();
        Ok((clipped, (total - kept).max(0.0)))
    }

    /// The function restricted to `[a, b]`.
    pub fn restrict(&self, a: f64, b: f64) -> GridFunction {
        let mut edges = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.values.len() {
            let lo = self.edges[i].max(a);
            let hi = self.edges[i + 1].min(b);
            if hi > lo {
                if edges.last() != Some(&lo) {
                    if !edges.is_empty() {
                        values.push(0.0);
                    }
                    edges.push(lo);
                }
                edges.push(hi);
                values.push(self.values[i]);
            }
        }
        if values.is_empty() {
            return GridFunction::zero();
        }
        GridFunction::new(edges, values).expect("restriction keeps valid cells")
    }

    /// Cell averages of `self` on the cells of `edges` (conservative remap).
    pub fn project(&self, edges: &[f64]) -> GridFunction {
        let values = edges
            .windows(2)
            .map(|w| self.mass_between(w[0], w[1]) / (w[1] - w[0]))
            .collect();
        GridFunction::new(edges.to_vec(), values).expect("projection keeps valid cells")
    }

    /// `∫_a^b f`
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        if self.values.is_empty() || b <= self.edges[0] || a >= self.edges[self.edges.len() - 1] {
            return 0.0;
        }
        let start = self.edges.partition_point(|&e| e <= a).saturating_sub(1);
        let mut parts = Vec::new();
        for i in start..self.values.len() {
            let lo = self.edges[i].max(a);
            let hi = self.edges[i + 1].min(b);
            if self.edges[i] >= b {
                break;
            }
            if hi > lo {
                parts.push(self.values[i] * (hi - lo));
            }
        }
        fsum(parts)
    }

    /// Pointwise `c·f`.
    pub fn scale(&self, c: f64) -> GridFunction {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// Same cells, values replaced by `g(value, cell index)`.
    pub fn map_values<F: Fn(f64, usize) -> f64>(&self, g: F) -> Result<GridFunction> {
        let values = self.values.iter().enumerate().map(|(i, &v)| g(v, i)).collect();
        let mut out = self.clone();
        out.values = values;
        if out.values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(invalid("values", "mapped values must be finite and nonnegative"));
        }
        Ok(out)
    }

    /// Two-column text: `edge value` rows, the last row holds only the final edge.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for i in 0..self.values.len() {
            s.push_str(&format!("{} {}\n", fmt12(self.edges[i]), fmt12(self.values[i])));
        }
        s.push_str(&format!("{}\n", fmt12(self.edges[self.edges.len() - 1])));
        s
    }

    /// Parses the two-column text format written by [`GridFunction::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut values = Vec::new();
        let rows: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect();
        for (k, row) in rows.iter().enumerate() {
            let cols: Vec<&str> = row.split_whitespace().collect();
            let num = |s: &str| s.parse::<f64>().map_err(|e| invalid("grid file", format!("row {}: {e}", k + 1)));
            match cols.as_slice() {
                [e, v] if k + 1 < rows.len() => {
                    edges.push(num(e)?);
                    values.push(num(v)?);
                }
                [e] if k + 1 == rows.len() => edges.push(num(e)?),
                _ => return Err(invalid("grid file", format!("row {} is malformed", k + 1))),
            }
        }
        Self::new(edges, values)
    }
}

/// Formats with 12 significant digits.
pub fn fmt12(x: f64) -> String {
    format!("{}", round_sig(x, 12))
}

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

/// μ_f as a step table: `measures[k] = |{f > thresholds[k]}|`, thresholds descending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionFunction {
    pub thresholds: Vec<f64>,
    pub measures: Vec<f64>,
}

/// Log-uniform cells over `window`.
pub fn window_edges(window: (f64, f64), cells: usize) -> Vec<f64> {
    log_edges(window.0, window.1, cells)
}

/// Outcome of the "∫u = ∞" heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Divergence {
    Divergent,
    Finite,
}

/// A weight `u` with its cumulative integral `U(x) = ∫_0^x u`.
///
/// `head` is the mass of `u` on `(0, first edge)` and `tail` the mass beyond
/// the last edge (possibly infinite); both are known for closed-form weights
/// and zero for weights read from data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Weight {
    base: GridFunction,
    cumulative: Vec<f64>,
    head: f64,
    tail: f64,
    divergence: Divergence,
    overridden: bool,
}

impl Weight {
    pub fn new(base: GridFunction) -> Self {
        Self::with_outside_mass(base, 0.0, 0.0)
    }

    pub fn with_outside_mass(base: GridFunction, head: f64, tail: f64) -> Self {
        let table = base.prefix_table();
        let cumulative = table.iter().map(|c| c + head).collect();
        let divergence = if tail.is_infinite() { Divergence::Divergent } else { divergence_heuristic(&base) };
        Self { base, cumulative, head, tail, divergence, overridden: false }
    }

    /// u ≡ 1 on the cells of `edges` (and on the whole half-line for `U`).
    pub fn unit(edges: Vec<f64>) -> Self {
        let head = edges[0];
        Self::with_outside_mass(GridFunction::constant(edges, 1.0).expect("valid edges"), head, f64::INFINITY)
    }

    /// u(x) = (α+1)x^α, α > -1, as exact cell averages.
    pub fn power(edges: Vec<f64>, alpha: f64) -> Result<Self> {
        if !(alpha > -1.0) {
            return Err(invalid("alpha", "power weight needs α > -1"));
        }
        let head = edges[0].powf(alpha + 1.0);
        let base = GridFunction::from_antiderivative(edges, |x| x.powf(alpha + 1.0))?;
        Ok(Self::with_outside_mass(base, head, f64::INFINITY))
    }

    pub fn base(&self) -> &GridFunction {
        &self.base
    }

    pub fn head_mass(&self) -> f64 {
        self.head
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail
    }

    pub fn divergence(&self) -> Divergence {
        self.divergence
    }

    pub fn is_divergent(&self) -> bool {
        self.divergence == Divergence::Divergent
    }

    pub fn is_overridden(&self) -> bool {
        self.overridden
    }

    /// Replaces the heuristic verdict on `∫u = ∞`.
    pub fn with_divergence(mut self, d: Divergence) -> Self {
        self.divergence = d;
        self.overridden = true;
        self
    }

    /// Cumulative table at the edges of the base function.
    pub fn cumulative_table(&self) -> &[f64] {
        &self.cumulative
    }

    /// Density used outside the cells: uniform below, last value above.
    fn head_density(&self) -> f64 {
        let e0 = self.base.edges()[0];
        if self.head > 0.0 && e0 > 0.0 {
            self.head / e0
        } else {
            0.0
        }
    }

    fn tail_density(&self) -> f64 {
        if self.tail > 0.0 {
            self.base.values().last().copied().unwrap_or(0.0)
        } else {
            0.0
        }
    }

    /// U(x), exact prefix sum with linear interpolation inside a cell.
    pub fn cumulative(&self, x: f64) -> f64 {
        let edges = self.base.edges();
        if x <= 0.0 {
            return 0.0;
        }
        if self.base.is_empty() {
            return 0.0;
        }
        if x <= edges[0] {
            return self.head_density() * x;
        }
        let last = edges.len() - 1;
        if x >= edges[last] {
            return self.cumulative[last] + self.tail_density() * (x - edges[last]);
        }
        let i = edges.partition_point(|&e| e <= x) - 1;
        self.cumulative[i] + self.base.values()[i] * (x - edges[i])
    }

    /// `∫_a^b u`, with the outside densities.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let (e0, e1) = self.base.support_window();
        let mut parts = vec![self.base.mass_between(a, b)];
        if a < e0 {
            parts.push(self.head_density() * (b.min(e0) - a.max(0.0)));
        }
        if b > e1 {
            parts.push(self.tail_density() * (b - a.max(e1)));
        }
        fsum(parts)
    }

    /// Mass of `u` on each cell of `edges`.
    pub fn masses_on(&self, edges: &[f64]) -> Vec<f64> {
        edges.windows(2).map(|w| self.mass(w[0], w[1])).collect()
    }

    /// Average of `u` on `[a, b]`.
    pub fn average(&self, a: f64, b: f64) -> f64 {
        self.mass(a, b) / (b - a)
    }

    /// `ũ(y) = u(1/y)·y⁻²`. A cell `[a, b)` of value `v` maps to `[1/b, 1/a)`
    /// with value `v·a·b`, which preserves its mass; head and tail swap.
    pub fn reciprocal_transform(&self) -> Result<Weight> {
        let edges = self.base.edges();
        if edges[0] <= 0.0 {
            return Err(invalid("weight", "reciprocal transform needs cells away from 0"));
        }
        let n = self.base.len();
        let new_edges: Vec<f64> = (0..=n).rev().map(|i| 1.0 / edges[i]).collect();
        let new_values: Vec<f64> = (0..n).rev().map(|i| self.base.values()[i] * edges[i] * edges[i + 1]).collect();
        let base = GridFunction::new(new_edges, new_values)?;
        let mut w = Weight::with_outside_mass(base, self.tail, self.head);
        if self.overridden {
            w = w.with_divergence(self.divergence);
        }
        Ok(w)
    }
}

/// "∫u = ∞" heuristic: masses over the nested windows `[lo, 10^k]`,
/// k = 2..6, must grow by at least 2× at every step. Weights whose tail mass
/// is known to be infinite skip the heuristic.
pub fn divergence_heuristic(u: &GridFunction) -> Divergence {
    if u.is_empty() {
        return Divergence::Finite;
    }
    let (lo, _) = u.support_window();
    let masses: Vec<f64> = (2..=6)
        .map(|k| 10f64.powi(k))
        .filter(|&b| b > lo)
        .map(|b| u.mass_between(lo, b))
        .collect();
    if masses.len() >= 2 && masses.windows(2).all(|w| w[0] > 0.0 && w[1] >= 2.0 * w[0]) {
        Divergence::Divergent
    } else {
        Divergence::Finite
    }
}
