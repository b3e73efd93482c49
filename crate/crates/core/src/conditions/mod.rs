//! Numerical verdicts for boundedness conditions.
//!
//! Every checker scans its condition over `(λ, x)` on a sequence of nested
//! windows `W_0 ⊂ … ⊂ W_{n-1}` (each one decade wider at both ends than the
//! previous) and records, per window, a supremum `S_k`:
//!
//! - for conditions of the form "LHS(c) ≤ c⁻¹λ" (or "c^{p′}·… ≤ 1"), `S = 1/c*`
//!   where `c*` is the largest constant admissible at every scan point;
//! - for conditions stated directly as "left side ≤ constant", `S` is the
//!   supremum of the left side.
//!
//! The verdict is `holds` when the last step grows by less than 10%, `fails`
//! when every step grows by at least 2× (or the supremum is infinite), and
//! `inconclusive` otherwise.

mod bk;
mod homogeneous;
mod power;

pub use bk::{bk_check, hardy_avg_check, rearranged_check, BkWeights};
pub use homogeneous::{dilation_function, hlp_check, homogeneous_check, DilationMode, HomogeneousResult};
pub use power::{kantorovic_mixed_norm, power_case_check, radial_check, KantorovicResult};

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::grid::{Weight, DEFAULT_WINDOW};
use crate::quad::{log_edges, power_exponent};
use crate::spec::ClosedForm;
use crate::sum::fsum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Growth of a positive sequence step by step (`∞` once a term is infinite).
pub fn growth_factors(suprema: &[f64]) -> Vec<f64> {
    suprema
        .windows(2)
        .map(|w| {
            if !w[1].is_finite() {
                f64::INFINITY
            } else if w[0] > 0.0 {
                w[1] / w[0]
            } else if w[1] > 0.0 {
                f64::INFINITY
            } else {
                1.0
            }
        })
        .collect()
}

/// The nested-window rule.
pub fn verdict_from_suprema(suprema: &[f64]) -> Verdict {
    if suprema.iter().any(|s| s.is_nan()) {
        return Verdict::Inconclusive;
    }
    if suprema.last().is_some_and(|s| s.is_infinite()) {
        return Verdict::Fails;
    }
    let g = growth_factors(suprema);
    match g.last() {
        None => Verdict::Inconclusive,
        Some(&last) if last < 1.1 => Verdict::Holds,
        _ if g.iter().all(|&x| x >= 2.0) => Verdict::Fails,
        _ => Verdict::Inconclusive,
    }
}

/// One condition of a checker, evaluated on every nested window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionPart {
    pub name: String,
    pub suprema: Vec<f64>,
    pub growth: Vec<f64>,
    /// Best admissible constant on the widest window.
    pub c_star: f64,
    pub verdict: Verdict,
}

impl ConditionPart {
    pub fn new(name: impl Into<String>, suprema: Vec<f64>, c_star: f64) -> Self {
        let growth = growth_factors(&suprema);
        let verdict = verdict_from_suprema(&suprema);
        Self { name: name.into(), suprema, growth, c_star, verdict }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: String,
    pub windows: Vec<(f64, f64)>,
    pub lambda_grid: Vec<f64>,
    pub x_grid: Vec<f64>,
    pub parts: Vec<ConditionPart>,
    pub c_star: f64,
    pub verdict: Verdict,
    /// Largest share of any integral that came from head/tail extrapolation.
    pub tail_share: f64,
    pub details: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    /// Per-point largest admissible constants of the two parts on the widest
    /// window, `λ`-major, when the checker records them.
    #[serde(skip)]
    pub point_constants: Option<(Vec<f64>, Vec<f64>)>,
}

impl ConditionReport {
    pub(crate) fn assemble(condition: &str, scan: &ScanConfig, x_grid: Vec<f64>, lambdas: Vec<f64>, parts: Vec<ConditionPart>) -> Self {
        let c_star = parts.iter().map(|p| p.c_star).fold(f64::INFINITY, f64::min);
        let verdict = if parts.iter().all(|p| p.verdict == Verdict::Holds) {
            Verdict::Holds
        } else if parts.iter().any(|p| p.verdict == Verdict::Fails) {
            Verdict::Fails
        } else {
            Verdict::Inconclusive
        };
        Self {
            condition: condition.to_string(),
            windows: scan.windows(),
            lambda_grid: lambdas,
            x_grid,
            parts,
            c_star,
            verdict,
            tail_share: 0.0,
            details: BTreeMap::new(),
            warnings: Vec::new(),
            point_constants: None,
        }
    }

    pub fn part(&self, name: &str) -> Option<&ConditionPart> {
        self.parts.iter().find(|p| p.name == name)
    }
}

/// Scan settings shared by all checkers.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    /// The widest window.
    pub window: (f64, f64),
    pub nested: usize,
    pub lambdas: Vec<f64>,
    pub x_points: usize,
    /// Quadrature cells per decade (5-point Gauss-Legendre in `ln y` on each).
    pub cells_per_decade: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            nested: 3,
            lambdas: log_edges(1e-4, 1e4, 32),
            x_points: 65,
            cells_per_decade: 16,
        }
    }
}

impl ScanConfig {
    /// `W_k = [lo·10^{n−1−k}, hi·10^{−(n−1−k)}]`
    pub fn windows(&self) -> Vec<(f64, f64)> {
        let n = self.nested.max(1);
        (0..n)
            .map(|k| {
                let shrink = 10f64.powi((n - 1 - k) as i32);
                (self.window.0 * shrink, self.window.1 / shrink)
            })
            .collect()
    }

    pub(crate) fn validate(&self) -> crate::Result<()> {
        let (lo, hi) = self.window;
        let shrink = 10f64.powi(self.nested.max(1) as i32 - 1);
        if !(lo > 0.0 && hi.is_finite() && hi / shrink > lo * shrink * 10.0) {
            return Err(crate::error::invalid("window", "window too narrow for the nested windows"));
        }
        if self.lambdas.is_empty() || self.lambdas.iter().any(|l| !(*l > 0.0)) {
            return Err(crate::error::invalid("lambdas", "need positive λ values"));
        }
        if self.x_points < 2 || self.cells_per_decade == 0 {
            return Err(crate::error::invalid("x_points", "need at least two scan points"));
        }
        Ok(())
    }

    pub(crate) fn nodes(&self) -> Nodes {
        Nodes::new(self.window, self.cells_per_decade)
    }
}

const GL_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_W: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

/// Gauss-Legendre nodes on log-uniform cells of the widest window, with the
/// `dy = y ds` Jacobian folded into the weights.
#[derive(Debug, Clone)]
pub(crate) struct Nodes {
    pub edges: Vec<f64>,
    pub y: Vec<f64>,
    pub w: Vec<f64>,
}

impl Nodes {
    fn new(window: (f64, f64), per_decade: usize) -> Self {
        let decades = (window.1 / window.0).log10();
        let cells = ((decades * per_decade as f64).round() as usize).max(1);
        let edges = log_edges(window.0, window.1, cells);
        let mut y = Vec::with_capacity(cells * 5);
        let mut w = Vec::with_capacity(cells * 5);
        for e in edges.windows(2) {
            let (a, b) = (e[0].ln(), e[1].ln());
            let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
            for k in 0..5 {
                let yy = (c + h * GL_X[k]).exp();
                y.push(yy);
                w.push(GL_W[k] * h * yy);
            }
        }
        Self { edges, y, w }
    }

    /// Index of the edge closest to `x`.
    pub fn edge_index(&self, x: f64) -> usize {
        let i = self.edges.partition_point(|&e| e < x);
        if i == 0 {
            0
        } else if i >= self.edges.len() {
            self.edges.len() - 1
        } else if (x / self.edges[i - 1]).ln() < (self.edges[i] / x).ln() {
            i - 1
        } else {
            i
        }
    }

    /// Node index range of the cells between edge indices `a` and `b`.
    pub fn range(&self, a: usize, b: usize) -> std::ops::Range<usize> {
        5 * a..5 * b
    }

    /// `∫` of `f` over the cells between edges `a` and `b`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: usize, b: usize) -> f64 {
        fsum(self.range(a, b).map(|k| self.w[k] * f(self.y[k])))
    }

    /// Window edge indices and 65-ish scan points for window `(lo, hi)`.
    pub fn window_indices(&self, window: (f64, f64), points: usize) -> (usize, usize, Vec<usize>) {
        let (a, b) = (self.edge_index(window.0), self.edge_index(window.1));
        let n = points.min(b - a + 1).max(2);
        let mut xs: Vec<usize> = (0..n).map(|k| a + ((b - a) as f64 * k as f64 / (n - 1) as f64).round() as usize).collect();
        xs.dedup();
        (a, b, xs)
    }
}

/// `∫_{edge a}^{∞} f`: window part on nodes plus a power-law tail.
pub(crate) fn upper_integral<F: Fn(f64) -> f64>(nodes: &Nodes, f: &F, a: usize, b: usize) -> (f64, f64) {
    let inside = nodes.integrate(f, a, b);
    let tail = outer_tail(f, nodes.edges[b]);
    (inside + tail, tail)
}

/// `∫_0^{edge b} f`: window part on nodes plus a power-law head.
pub(crate) fn lower_integral<F: Fn(f64) -> f64>(nodes: &Nodes, f: &F, a: usize, b: usize) -> (f64, f64) {
    let inside = nodes.integrate(f, a, b);
    let head = outer_head(f, nodes.edges[a]);
    (inside + head, head)
}

/// `∫_hi^∞ f` from a power-law fit on `[hi, 10hi]`. Sampling outside the
/// window keeps kernels cut off at the diagonal from fitting a zero.
pub(crate) fn outer_tail<F: Fn(f64) -> f64>(f: &F, hi: f64) -> f64 {
    let f0 = f(hi * (1.0 + 1e-12));
    if f0 == 0.0 {
        return 0.0;
    }
    match power_exponent(f0, f(10.0 * hi), hi, 10.0 * hi) {
        Some(g) if g < -1.0 - 1e-9 => f0 * hi / (-g - 1.0),
        Some(_) => f64::INFINITY,
        None if f0.is_finite() => f0 * hi,
        None => f64::INFINITY,
    }
}

/// `∫_0^lo f` from a power-law fit on `[lo/10, lo]`.
pub(crate) fn outer_head<F: Fn(f64) -> f64>(f: &F, lo: f64) -> f64 {
    let f0 = f(lo * (1.0 - 1e-12));
    if f0 == 0.0 {
        return 0.0;
    }
    match power_exponent(f(0.1 * lo), f0, 0.1 * lo, lo) {
        Some(g) if g > -1.0 + 1e-9 => f0 * lo / (g + 1.0),
        Some(_) => f64::INFINITY,
        None if f0.is_finite() => f0 * lo,
        None => f64::INFINITY,
    }
}

pub(crate) fn share(part: f64, total: f64) -> f64 {
    if total > 0.0 && total.is_finite() {
        part / total
    } else if total.is_infinite() {
        1.0
    } else {
        0.0
    }
}

pub(crate) const C_RANGE: (f64, f64) = (1e-8, 1e8);

/// Largest `c` in `[1e-8, 1e8]` with `c·lhs(c) ≤ rhs` for a left side that is
/// nondecreasing in `c`; bisection on `log c`, 60 steps. Returns 0 when even
/// `c = 1e-8` fails and `1e8` when the whole range is admissible.
pub fn largest_admissible<F: Fn(f64) -> f64>(lhs: F, rhs: f64) -> f64 {
    let ok = |c: f64| {
        let v = c * lhs(c);
        v.is_finite() && v <= rhs
    };
    let (mut lo, mut hi) = (C_RANGE.0.ln(), C_RANGE.1.ln());
    if ok(C_RANGE.1) {
        return C_RANGE.1;
    }
    if !ok(C_RANGE.0) {
        return 0.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid.exp()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo.exp()
}

/// A nonnegative function on the half-line, with its cumulative when known.
#[derive(Clone)]
pub struct Density {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    cumulative: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    /// Known to have `∫_0^∞ = ∞` (`Some(true)`), finite (`Some(false)`), or unknown.
    pub divergent: Option<bool>,
    pub label: String,
}

impl std::fmt::Debug for Density {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Density({})", self.label)
    }
}

impl Density {
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(label: &str, f: F) -> Self {
        Self { f: Arc::new(f), cumulative: None, divergent: None, label: label.to_string() }
    }

    pub fn with_cumulative<G: Fn(f64) -> f64 + Send + Sync + 'static>(mut self, g: G) -> Self {
        self.cumulative = Some(Arc::new(g));
        self
    }

    pub fn one() -> Self {
        let mut d = Self::new("1", |_| 1.0).with_cumulative(|x| x);
        d.divergent = Some(true);
        d
    }

    /// `coef·x^a`
    pub fn power(coef: f64, a: f64) -> Self {
        let mut d = Self::new(&format!("{coef}·x^{a}"), move |x| coef * x.powf(a));
        if a > -1.0 {
            d = d.with_cumulative(move |x| coef * x.powf(a + 1.0) / (a + 1.0));
        }
        d.divergent = Some(a >= -1.0);
        d
    }

    /// `(α+1)x^α`
    pub fn power_weight(alpha: f64) -> Self {
        let mut d = Self::power(alpha + 1.0, alpha);
        d.label = format!("power_weight(α={alpha})");
        d
    }

    pub fn closed(cf: ClosedForm) -> Self {
        let label = format!("{cf:?}");
        let g = cf.clone();
        let mut d = Self::new(&label, move |x| g.eval(x));
        d.divergent = Some(match cf {
            ClosedForm::Indicator { .. } | ClosedForm::Exp { .. } => false,
            ClosedForm::Power { a } => (a - 1.0).abs() < 1e-15 || a < 1.0,
            ClosedForm::Const { c } => c > 0.0,
        });
        if !matches!(cf, ClosedForm::Power { a } if a >= 1.0) {
            let h = cf.clone();
            let base = h.antiderivative(0.0);
            d = d.with_cumulative(move |x| h.antiderivative(x) - base);
        }
        d
    }

    /// A grid weight, extended outside its cells by its head/tail densities.
    pub fn from_weight(u: &Weight) -> Self {
        let w = u.clone();
        let c = u.clone();
        let (lo, hi) = u.base().support_window();
        let head_density = if lo > 0.0 { u.head_mass() / lo } else { 0.0 };
        let last = u.base().values().last().copied().unwrap_or(0.0);
        let tail_density = if u.tail_mass() > 0.0 { last } else { 0.0 };
        let mut d = Self::new("weight", move |x| {
            if x < lo {
                head_density
            } else if x >= hi {
                tail_density
            } else {
                w.base().eval(x)
            }
        })
        .with_cumulative(move |x| c.cumulative(x));
        d.divergent = Some(u.is_divergent());
        d
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn cumulative(&self, x: f64) -> Option<f64> {
        self.cumulative.as_ref().map(|g| g(x))
    }

    pub fn has_cumulative(&self) -> bool {
        self.cumulative.is_some()
    }

    /// `ũ(y) = u(1/y)/y²`
    pub fn reciprocal(&self) -> Density {
        let f = self.f.clone();
        let mut d = Density::new(&format!("~{}", self.label), move |y| f(1.0 / y) / (y * y));
        d.divergent = None;
        d
    }
}
