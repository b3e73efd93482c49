//! Kernels `K(x, y) ≥ 0` on the quarter-plane and their grid samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::GridFunction;
use crate::quad::integrate;
use crate::spec::Profile;

/// Kernel families with an exact pointwise formula.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelFamily {
    /// `x⁻¹ χ(y < x)`
    HardyAveraging,
    /// `χ(y < x)`
    HardyIndicator,
    /// `k(x + y)`
    Sum(Profile),
    /// `k(√(x² + y²))`
    Radial(Profile),
    /// `(x² + y²)^{-λ/2}`
    PowerRadial { lambda: f64 },
    /// `1/(x + y)`
    Hilbert,
    /// `x⁻¹ h(y/x)`
    Homogeneous(Profile),
}

/// Structural properties a kernel claims. Every flag set on a [`KernelGrid`]
/// built from a family has been checked by sampling.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct KernelFlags {
    pub nonincreasing_x: bool,
    pub nonincreasing_y: bool,
    /// `K(λx, λy) = λ⁻¹ K(x, y)`
    pub homogeneous: bool,
    pub sum: bool,
    pub radial: bool,
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::HardyAveraging => "hardy-averaging",
            KernelFamily::HardyIndicator => "hardy-indicator",
            KernelFamily::Sum(_) => "sum",
            KernelFamily::Radial(_) => "radial",
            KernelFamily::PowerRadial { .. } => "power-radial",
            KernelFamily::Hilbert => "hilbert",
            KernelFamily::Homogeneous(_) => "homogeneous",
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            KernelFamily::HardyAveraging => {
                if y < x {
                    1.0 / x
                } else {
                    0.0
                }
            }
            KernelFamily::HardyIndicator => {
                if y < x {
                    1.0
                } else {
                    0.0
                }
            }
            KernelFamily::Sum(k) => k.eval(x + y),
            KernelFamily::Radial(k) => k.eval(x.hypot(y)),
            KernelFamily::PowerRadial { lambda } => (x * x + y * y).powf(-0.5 * lambda),
            KernelFamily::Hilbert => 1.0 / (x + y),
            KernelFamily::Homogeneous(h) => h.eval(y / x) / x,
        }
    }

    pub fn flags(&self) -> KernelFlags {
        let mut f = KernelFlags::default();
        match self {
            KernelFamily::HardyAveraging => f.homogeneous = true,
            KernelFamily::HardyIndicator => {}
            KernelFamily::Sum(_) => {
                f.sum = true;
                f.nonincreasing_x = true;
                f.nonincreasing_y = true;
            }
            KernelFamily::Radial(_) => {
                f.radial = true;
                f.nonincreasing_x = true;
                f.nonincreasing_y = true;
            }
            KernelFamily::PowerRadial { lambda } => {
                f.radial = true;
                f.nonincreasing_x = true;
                f.nonincreasing_y = true;
                f.homogeneous = *lambda == 1.0;
            }
            KernelFamily::Hilbert => {
                f.sum = true;
                f.homogeneous = true;
                f.nonincreasing_x = true;
                f.nonincreasing_y = true;
            }
            KernelFamily::Homogeneous(_) => f.homogeneous = true,
        }
        f
    }

    /// Points in `y` where `K(x, ·)` may jump.
    pub fn y_breaks(&self, x: f64) -> Vec<f64> {
        match self {
            KernelFamily::HardyAveraging | KernelFamily::HardyIndicator => vec![x],
            KernelFamily::Sum(k) => k.breakpoints().into_iter().map(|b| b - x).filter(|&y| y > 0.0).collect(),
            KernelFamily::Radial(k) => {
                k.breakpoints().into_iter().filter(|&b| b > x).map(|b| (b * b - x * x).sqrt()).collect()
            }
            KernelFamily::Homogeneous(h) => h.breakpoints().into_iter().map(|b| b * x).collect(),
            _ => Vec::new(),
        }
    }

    /// `∫_a^b K(x, y) dy`.
    pub fn integrate_y(&self, x: f64, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        match self {
            KernelFamily::HardyAveraging => (b.min(x) - a).max(0.0) / x,
            KernelFamily::HardyIndicator => (b.min(x) - a).max(0.0),
            KernelFamily::Hilbert => ((b - a) / (x + a)).ln_1p(),
            _ => {
                let mut pts = vec![a];
                pts.extend(self.y_breaks(x).into_iter().filter(|&y| y > a && y < b));
                pts.push(b);
                pts.sort_by(|p, q| p.partial_cmp(q).unwrap());
                let mut parts = Vec::with_capacity(pts.len());
                for w in pts.windows(2) {
                    parts.push(integrate(|y| self.eval(x, y), w[0], w[1], 1e-12));
                }
                crate::sum::fsum(parts)
            }
        }
    }

    /// `∫_0^z K(t, ζ) dζ` in closed form for sum kernels with a closed-form profile.
    pub fn sum_row_integral(&self, t: f64, z: f64) -> Option<f64> {
        match self {
            KernelFamily::Hilbert => Some((z / t).ln_1p()),
            KernelFamily::Sum(Profile::Closed(cf)) => Some((cf.antiderivative(t + z) - cf.antiderivative(t)).max(0.0)),
            _ => None,
        }
    }

    /// The profile of a sum or radial kernel.
    pub fn profile(&self) -> Option<&Profile> {
        match self {
            KernelFamily::Sum(k) | KernelFamily::Radial(k) | KernelFamily::Homogeneous(k) => Some(k),
            _ => None,
        }
    }

    /// Checks that a sum or radial profile is nonincreasing on `[lo, hi]`.
    pub fn check_profile(&self, lo: f64, hi: f64) -> Result<()> {
        let k = match self {
            KernelFamily::Sum(k) | KernelFamily::Radial(k) => k,
            _ => return Ok(()),
        };
        let pts = profile_points(k, lo, hi);
        for w in pts.windows(2) {
            let (a, b) = (k.eval(w[0]), k.eval(w[1]));
            if b > a * (1.0 + 1e-12) {
                return Err(Error::Precondition(format!(
                    "{} kernel needs a nonincreasing profile: k({:e}) = {a:e} < k({:e}) = {b:e}",
                    self.name(),
                    w[0],
                    w[1]
                )));
            }
        }
        Ok(())
    }

    /// `sup k(t/2)/k(t)` over `[lo, hi]` for radial kernels (`None` otherwise).
    /// Infinite when `k` vanishes at a point where `k(t/2) > 0`.
    pub fn doubling_constant(&self, lo: f64, hi: f64) -> Option<f64> {
        let k = match self {
            KernelFamily::Radial(k) => k,
            KernelFamily::PowerRadial { lambda } => return Some(2f64.powf(*lambda)),
            _ => return None,
        };
        if let Some(a) = k.power_exponent() {
            return Some(2f64.powf(a));
        }
        let mut sup: f64 = 1.0;
        for t in profile_points(k, lo, hi) {
            let (num, den) = (k.eval(0.5 * t), k.eval(t));
            if num > 0.0 {
                sup = sup.max(if den > 0.0 { num / den } else { f64::INFINITY });
            }
        }
        Some(sup)
    }

    fn uses_cell_average(&self) -> bool {
        matches!(self, KernelFamily::HardyAveraging | KernelFamily::HardyIndicator)
    }
}

fn profile_points(k: &Profile, lo: f64, hi: f64) -> Vec<f64> {
    let lo = lo.max(1e-300);
    let mut pts = crate::quad::log_edges(lo, hi.max(lo * 2.0), 512);
    for b in k.breakpoints() {
        if b > lo && b < hi {
            pts.push(b * (1.0 - 1e-9));
            pts.push(b * (1.0 + 1e-9));
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts
}

/// `K` sampled on a tensor grid: `values[i * ny + j]` is the value on
/// `[x_i, x_{i+1}) × [y_j, y_{j+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGrid {
    x_edges: Vec<f64>,
    y_edges: Vec<f64>,
    x_lengths: Vec<f64>,
    y_lengths: Vec<f64>,
    values: Vec<f64>,
    family: Option<KernelFamily>,
    flags: KernelFlags,
}

fn check_edges(name: &'static str, edges: &[f64]) -> Result<()> {
    if edges.len() < 2 || !(edges[0] >= 0.0) || edges.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
        return Err(invalid(name, "need at least two finite, nonnegative, strictly increasing edges"));
    }
    Ok(())
}

fn lengths_of(edges: &[f64]) -> Vec<f64> {
    edges.windows(2).map(|w| w[1] - w[0]).collect()
}

impl KernelGrid {
    /// A grid kernel from explicit values (row-major, one row per x cell).
    pub fn new(x_edges: Vec<f64>, y_edges: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_edges("x_edges", &x_edges)?;
        check_edges("y_edges", &y_edges)?;
        let (x_lengths, y_lengths) = (lengths_of(&x_edges), lengths_of(&y_edges));
        Self::with_lengths(x_edges, y_edges, x_lengths, y_lengths, values)
    }

    /// Like [`KernelGrid::new`] but with exact cell lengths supplied, as for
    /// grids laid out from rearranged cells.
    pub fn with_lengths(
        x_edges: Vec<f64>,
        y_edges: Vec<f64>,
        x_lengths: Vec<f64>,
        y_lengths: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != x_lengths.len() * y_lengths.len() {
            return Err(invalid("values", "need nx * ny values"));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(invalid("values", "kernel values must be finite and nonnegative"));
        }
        Ok(Self { x_edges, y_edges, x_lengths, y_lengths, values, family: None, flags: KernelFlags::default() })
    }

    /// Samples `f` at cell midpoints.
    pub fn from_fn<F: Fn(f64, f64) -> f64 + Sync>(x_edges: Vec<f64>, y_edges: Vec<f64>, f: F) -> Result<Self> {
        check_edges("x_edges", &x_edges)?;
        check_edges("y_edges", &y_edges)?;
        let ym: Vec<f64> = y_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let values: Vec<f64> = x_edges
            .par_windows(2)
            .flat_map_iter(|w| {
                let x = 0.5 * (w[0] + w[1]);
                ym.iter().map(|&y| f(x, y)).collect::<Vec<_>>()
            })
            .collect();
        Self::new(x_edges, y_edges, values)
    }

    /// Samples a family. Values are taken at cell midpoints, except for the
    /// Hardy kernels, whose cells hold the exact `y`-average at the `x`
    /// midpoint (so the diagonal is resolved to partial cells). Monotone
    /// families are cleaned with a running minimum so that rounding never
    /// breaks monotonicity, and every claimed flag is verified.
    pub fn from_family(family: KernelFamily, x_edges: Vec<f64>, y_edges: Vec<f64>) -> Result<Self> {
        check_edges("x_edges", &x_edges)?;
        check_edges("y_edges", &y_edges)?;
        let (x0, x1) = (x_edges[0], x_edges[x_edges.len() - 1]);
        let (y0, y1) = (y_edges[0], y_edges[y_edges.len() - 1]);
        family.check_profile(x0.min(y0).max(1e-12 * x1.max(y1)), x1 + y1)?;
        let ny = y_edges.len() - 1;
        let avg = family.uses_cell_average();
        let values: Vec<f64> = x_edges
            .par_windows(2)
            .flat_map_iter(|w| {
                let x = 0.5 * (w[0] + w[1]);
                let fam = &family;
                let ye = &y_edges;
                (0..ny).map(move |j| {
                    let (a, b) = (ye[j], ye[j + 1]);
                    let v = if avg { fam.integrate_y(x, a, b) / (b - a) } else { fam.eval(x, 0.5 * (a + b)) };
                    if v.is_finite() {
                        v.max(0.0)
                    } else {
                        0.0
                    }
                })
            })
            .collect();
        let flags = family.flags();
        let mut grid = Self::new(x_edges, y_edges, values)?;
        if flags.nonincreasing_x || flags.nonincreasing_y {
            grid.monotone_cleanup(flags.nonincreasing_x, flags.nonincreasing_y);
        }
        grid.family = Some(family);
        grid.flags = flags;
        let report = grid.verify_flags(0x5eed);
        if let Some(msg) = report.failures.first() {
            return Err(Error::Precondition(format!("kernel flag check failed: {msg}")));
        }
        Ok(grid)
    }

    fn monotone_cleanup(&mut self, along_x: bool, along_y: bool) {
        let (nx, ny) = (self.nx(), self.ny());
        if along_y {
            for row in self.values.chunks_mut(ny) {
                for j in 1..ny {
                    row[j] = row[j].min(row[j - 1]);
                }
            }
        }
        if along_x {
            for i in 1..nx {
                for j in 0..ny {
                    let prev = self.values[(i - 1) * ny + j];
                    let v = &mut self.values[i * ny + j];
                    *v = v.min(prev);
                }
            }
        }
    }

    /// Attaches an exact family to a grid that already samples it.
    pub(crate) fn with_family(mut self, family: KernelFamily) -> Self {
        self.flags = family.flags();
        self.family = Some(family);
        self
    }

    /// Declares flags on a grid kernel; they are verified before being kept.
    pub fn with_flags(mut self, flags: KernelFlags) -> Result<Self> {
        self.flags = flags;
        let report = self.verify_flags(0x5eed);
        match report.failures.first() {
            Some(msg) => Err(Error::Precondition(format!("kernel flag check failed: {msg}"))),
            None => Ok(self),
        }
    }

    /// Checks the declared flags: monotonicity along 32 random rows and
    /// columns of the grid, homogeneity at 100 random points of the exact
    /// family (grid kernels without a family cannot claim homogeneity).
    pub fn verify_flags(&self, seed: u64) -> FlagReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut failures = Vec::new();
        let (nx, ny) = (self.nx(), self.ny());
        if self.flags.nonincreasing_y {
            for _ in 0..32 {
                let i = rng.gen_range(0..nx);
                if let Some(j) = (1..ny).find(|&j| self.value(i, j) > self.value(i, j - 1)) {
                    failures.push(format!("row {i} increases at column {j}"));
                    break;
                }
            }
        }
        if self.flags.nonincreasing_x {
            for _ in 0..32 {
                let j = rng.gen_range(0..ny);
                if let Some(i) = (1..nx).find(|&i| self.value(i, j) > self.value(i - 1, j)) {
                    failures.push(format!("column {j} increases at row {i}"));
                    break;
                }
            }
        }
        if self.flags.homogeneous {
            match &self.family {
                None => failures.push("homogeneity needs an exact family".into()),
                Some(fam) => {
                    let (lo, hi) = (self.x_edges[0].max(1e-300), self.x_edges[nx]);
                    let span = (hi / lo).ln();
                    for _ in 0..100 {
                        let x = lo * (span * rng.gen::<f64>()).exp();
                        let y = lo * (span * rng.gen::<f64>()).exp();
                        let l = (rng.gen::<f64>() * 8.0 - 4.0).exp();
                        let (a, b) = (fam.eval(l * x, l * y), fam.eval(x, y) / l);
                        if (a - b).abs() > 1e-9 * a.abs().max(b.abs()) {
                            failures.push(format!("K({x:e},{y:e}) is not homogeneous under λ = {l:e}"));
                            break;
                        }
                    }
                }
            }
        }
        FlagReport { checked: self.flags, failures }
    }

    pub fn nx(&self) -> usize {
        self.x_lengths.len()
    }

    pub fn ny(&self) -> usize {
        self.y_lengths.len()
    }

    pub fn x_edges(&self) -> &[f64] {
        &self.x_edges
    }

    pub fn y_edges(&self) -> &[f64] {
        &self.y_edges
    }

    pub fn x_lengths(&self) -> &[f64] {
        &self.x_lengths
    }

    pub fn y_lengths(&self) -> &[f64] {
        &self.y_lengths
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ny() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let ny = self.ny();
        &self.values[i * ny..(i + 1) * ny]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.nx()).map(|i| self.value(i, j)).collect()
    }

    pub fn family(&self) -> Option<&KernelFamily> {
        self.family.as_ref()
    }

    pub fn flags(&self) -> KernelFlags {
        self.flags
    }

    pub fn x_midpoints(&self) -> Vec<f64> {
        self.x_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn y_midpoints(&self) -> Vec<f64> {
        self.y_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// The step value at `(x, y)`; zero outside the grid.
    pub fn eval_cell(&self, x: f64, y: f64) -> f64 {
        let (nx, ny) = (self.nx(), self.ny());
        if x < self.x_edges[0] || x >= self.x_edges[nx] || y < self.y_edges[0] || y >= self.y_edges[ny] {
            return 0.0;
        }
        let i = self.x_edges.partition_point(|&e| e <= x) - 1;
        let j = self.y_edges.partition_point(|&e| e <= y) - 1;
        self.value(i, j)
    }

    /// Row `i` as a function of `y`.
    pub fn row_function(&self, i: usize) -> GridFunction {
        GridFunction::from_lengths(self.y_edges[0], self.y_lengths.clone(), self.row(i).to_vec())
            .expect("kernel rows are valid grid functions")
    }

    /// Column `j` as a function of `x`.
    pub fn column_function(&self, j: usize) -> GridFunction {
        GridFunction::from_lengths(self.x_edges[0], self.x_lengths.clone(), self.column(j))
            .expect("kernel columns are valid grid functions")
    }

    /// `max |K_ij|` and whether all entries are zero.
    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_bimonotone(&self) -> bool {
        let (nx, ny) = (self.nx(), self.ny());
        (0..nx).all(|i| (1..ny).all(|j| self.value(i, j) <= self.value(i, j - 1)))
            && (1..nx).all(|i| (0..ny).all(|j| self.value(i, j) <= self.value(i - 1, j)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlagReport {
    pub checked: KernelFlags,
    pub failures: Vec<String>,
}

/// A real-valued grid kernel, for splitting into positive and negative parts.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedKernelGrid {
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    pub values: Vec<f64>,
}

impl SignedKernelGrid {
    pub fn from_fn<F: Fn(f64, f64) -> f64>(x_edges: Vec<f64>, y_edges: Vec<f64>, f: F) -> Result<Self> {
        check_edges("x_edges", &x_edges)?;
        check_edges("y_edges", &y_edges)?;
        let ym: Vec<f64> = y_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let mut values = Vec::with_capacity((x_edges.len() - 1) * ym.len());
        for w in x_edges.windows(2) {
            let x = 0.5 * (w[0] + w[1]);
            values.extend(ym.iter().map(|&y| f(x, y)));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("values", "kernel values must be finite"));
        }
        Ok(Self { x_edges, y_edges, values })
    }

    /// `(K⁺, K⁻)` with `K = K⁺ − K⁻`.
    pub fn split_signed(&self) -> Result<(KernelGrid, KernelGrid)> {
        let pos = self.values.iter().map(|&v| v.max(0.0)).collect();
        let neg = self.values.iter().map(|&v| (-v).max(0.0)).collect();
        Ok((
            KernelGrid::new(self.x_edges.clone(), self.y_edges.clone(), pos)?,
            KernelGrid::new(self.x_edges.clone(), self.y_edges.clone(), neg)?,
        ))
    }
}
