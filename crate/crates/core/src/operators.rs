//! Integral operators built from grid kernels.
//!
//! Convention for the derived kernel: `M(a, b) = ∫_0^{1/b} L(1/a, z) dz`,
//! first argument outer, so `(Hg)(a) = ∫_0^a M(a, b) g(b) db`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::grid::GridFunction;
use crate::kernel::{KernelFlags, KernelGrid};
use crate::sum::{fsum, prefix_fsum};

fn on_x_grid(k: &KernelGrid, values: Vec<f64>) -> GridFunction {
    GridFunction::from_parts(k.x_edges().to_vec(), k.x_lengths().to_vec(), values)
}

fn on_y_grid(k: &KernelGrid, values: Vec<f64>) -> GridFunction {
    GridFunction::from_parts(k.y_edges().to_vec(), k.y_lengths().to_vec(), values)
}

/// `(T_K f)(x) = ∫ K(x, y) f(y) dy`, one value per `x` cell.
pub fn apply(k: &KernelGrid, f: &GridFunction) -> GridFunction {
    let masses = f.masses_on(k.y_edges());
    let out: Vec<f64> = (0..k.nx())
        .into_par_iter()
        .map(|i| fsum(k.row(i).iter().zip(&masses).map(|(a, m)| a * m)))
        .collect();
    on_x_grid(k, out)
}

/// `(T_K f)(x)` at a single point. Uses the exact family when there is one,
/// otherwise the grid row containing `x`.
pub fn apply_at(k: &KernelGrid, f: &GridFunction, x: f64) -> f64 {
    match k.family() {
        Some(fam) => fsum(
            f.edges()
                .windows(2)
                .zip(f.values())
                .filter(|(_, v)| **v > 0.0)
                .map(|(w, v)| v * fam.integrate_y(x, w[0], w[1])),
        ),
        None => {
            let ex = k.x_edges();
            if x < ex[0] || x >= ex[ex.len() - 1] {
                return 0.0;
            }
            let i = ex.partition_point(|&e| e <= x) - 1;
            let masses = f.masses_on(k.y_edges());
            fsum(k.row(i).iter().zip(&masses).map(|(a, m)| a * m))
        }
    }
}

/// `(T′_K g)(y) = ∫ K(x, y) g(x) dx`, one value per `y` cell.
pub fn apply_adjoint(k: &KernelGrid, g: &GridFunction) -> GridFunction {
    let masses = g.masses_on(k.x_edges());
    let ny = k.ny();
    let vals = k.values();
    let out: Vec<f64> = (0..ny)
        .into_par_iter()
        .map(|j| fsum(masses.iter().enumerate().map(|(i, m)| vals[i * ny + j] * m)))
        .collect();
    on_y_grid(k, out)
}

/// First pass of the iterated rearrangement: each row `y ↦ K(x_i, y)`
/// rearranged on its own cells.
pub fn rearrange_rows(k: &KernelGrid) -> Vec<GridFunction> {
    (0..k.nx()).into_par_iter().map(|i| k.row_function(i).rearrange()).collect()
}

/// Edges of a grid laid out from 0 with the given lengths. Every edge is
/// the correctly rounded partial sum, so equal measures give equal edges.
fn canonical_edges(lengths: &[f64]) -> Vec<f64> {
    prefix_fsum(lengths)
}

/// Decreasing rearrangement of `(value, length)` cells, sampled at the left
/// edge of each target cell: the smallest step majorant on that grid.
/// Cumulative measures are correctly rounded, which keeps sampled columns
/// ordered whenever the inputs are ordered cellwise.
fn sup_sample(values: &[f64], lengths: &[f64], left_edges: &[f64]) -> Vec<f64> {
    let mut cells: Vec<(f64, f64)> =
        values.iter().zip(lengths).filter(|(v, _)| **v > 0.0).map(|(v, l)| (*v, *l)).collect();
    cells.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let ends = prefix_fsum(&cells.iter().map(|c| c.1).collect::<Vec<_>>());
    left_edges
        .iter()
        .map(|&s| {
            let k = ends[1..].partition_point(|&c| c <= s);
            cells.get(k).map_or(0.0, |c| c.0)
        })
        .collect()
}

/// `L = (K^{*₂})^{*₁}`: rows rearranged in `y`, then columns in `x`.
///
/// The result lives on grids laid out from 0 with the cell lengths of `K`.
/// Each rearranged row or column is sampled at left cell edges, so `L` is the
/// smallest majorant of the exact iterated rearrangement on that grid, and a
/// kernel that is already nonincreasing in both variables comes back cellwise
/// unchanged.
pub fn iterated_rearrangement(k: &KernelGrid) -> Result<KernelGrid> {
    let (nx, ny) = (k.nx(), k.ny());
    let s_edges = canonical_edges(k.y_lengths());
    let t_edges = canonical_edges(k.x_lengths());
    let first: Vec<Vec<f64>> =
        (0..nx).into_par_iter().map(|i| sup_sample(k.row(i), k.y_lengths(), &s_edges[..ny])).collect();
    let columns: Vec<Vec<f64>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let col: Vec<f64> = first.iter().map(|row| row[j]).collect();
            sup_sample(&col, k.x_lengths(), &t_edges[..nx])
        })
        .collect();
    let mut values = vec![0.0; nx * ny];
    for (j, col) in columns.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            values[i * ny + j] = *v;
        }
    }
    let unchanged = values == k.values();
    let l = KernelGrid::with_lengths(t_edges, s_edges, k.x_lengths().to_vec(), k.y_lengths().to_vec(), values)?;
    let l = l.with_flags(KernelFlags { nonincreasing_x: true, nonincreasing_y: true, ..Default::default() })?;
    // a sum kernel that comes back cellwise unchanged is its own L, so the
    // exact formula carries over
    Ok(match k.family() {
        Some(fam) if unchanged && fam.flags().sum => l.with_family(fam.clone()),
        _ => l,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MKernelReport {
    /// Largest share of an `M` value that came from extending `L` past its
    /// last `s` cell.
    pub extrapolated_share: f64,
    /// Output rows whose reciprocal coordinate fell outside `L`'s row range.
    pub clamped_rows: usize,
}

/// `M(a, b) = ∫_0^{1/b} L(1/a, z) dz` on `edges × edges`, sampled at cell
/// midpoints. `L` rows are interpolated linearly in `log t`; beyond the last
/// `s` cell the last value is continued and the share reported. When `L`
/// carries an exact sum-kernel family the integral is taken in closed form.
pub fn m_kernel(l: &KernelGrid, edges: &[f64]) -> Result<(KernelGrid, MKernelReport)> {
    if let Some(fam) = l.family() {
        if fam.sum_row_integral(1.0, 1.0).is_some() {
            let mids: Vec<f64> = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
            let values: Vec<f64> = mids
                .par_iter()
                .flat_map_iter(|&a| {
                    mids.iter().map(move |&b| fam.sum_row_integral(1.0 / a, 1.0 / b).unwrap_or(0.0))
                })
                .collect();
            let m = KernelGrid::new(edges.to_vec(), edges.to_vec(), values)?;
            return Ok((m, MKernelReport { extrapolated_share: 0.0, clamped_rows: 0 }));
        }
    }
    let (nx, ny) = (l.nx(), l.ny());
    let tm = l.x_midpoints();
    let s = l.y_edges();
    let s_end = s[ny];
    let prefixes: Vec<Vec<f64>> = (0..nx)
        .into_par_iter()
        .map(|i| prefix_fsum(&l.row(i).iter().zip(l.y_lengths()).map(|(v, w)| v * w).collect::<Vec<_>>()))
        .collect();
    // (inside, extrapolated) parts of ∫_0^z L(t_i, ·)
    let row_integral = |i: usize, z: f64| -> (f64, f64) {
        let p = &prefixes[i];
        if z >= s_end {
            return (p[ny], l.value(i, ny - 1) * (z - s_end));
        }
        if z <= s[0] {
            return (0.0, 0.0);
        }
        let j = s.partition_point(|&e| e <= z) - 1;
        (p[j] + l.value(i, j) * (z - s[j]), 0.0)
    };
    let mids: Vec<f64> = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let n = mids.len();
    let rows: Vec<(Vec<f64>, f64, bool)> = mids
        .par_iter()
        .map(|&a| {
            let t = 1.0 / a;
            let (lo, hi, w, clamped) = if t <= tm[0] {
                (0, 0, 0.0, t < tm[0] && l.x_edges()[0] > 0.0)
            } else if t >= tm[nx - 1] {
                (nx - 1, nx - 1, 0.0, t > l.x_edges()[nx])
            } else {
                let k = tm.partition_point(|&m| m <= t) - 1;
                let w = (t / tm[k]).ln() / (tm[k + 1] / tm[k]).ln();
                (k, k + 1, w, false)
            };
            let mut share: f64 = 0.0;
            let row = mids
                .iter()
                .map(|&b| {
                    let z = 1.0 / b;
                    let (i0, e0) = row_integral(lo, z);
                    let (i1, e1) = row_integral(hi, z);
                    let inside = (1.0 - w) * i0 + w * i1;
                    let extra = (1.0 - w) * e0 + w * e1;
                    let total = inside + extra;
                    if total > 0.0 {
                        share = share.max(extra / total);
                    }
                    total
                })
                .collect();
            (row, share, clamped)
        })
        .collect();
    let mut values = Vec::with_capacity(n * n);
    let mut report = MKernelReport { extrapolated_share: 0.0, clamped_rows: 0 };
    for (row, share, clamped) in rows {
        values.extend(row);
        report.extrapolated_share = report.extrapolated_share.max(share);
        report.clamped_rows += clamped as usize;
    }
    // nondecreasing in the first argument, nonincreasing in the second
    for i in 0..n {
        for j in 1..n {
            values[i * n + j] = values[i * n + j].min(values[i * n + j - 1]);
        }
        if i > 0 {
            for j in 0..n {
                values[i * n + j] = values[i * n + j].max(values[(i - 1) * n + j]);
            }
        }
    }
    Ok((KernelGrid::new(edges.to_vec(), edges.to_vec(), values)?, report))
}

/// `(Sg)(x) = ∫_0^x (T′_K g)(y) dy` at one point.
pub fn s_operator_at(k: &KernelGrid, g: &GridFunction, x: f64) -> f64 {
    apply_adjoint(k, g).prefix_integral(x)
}

/// `Sg` sampled at the midpoints of the `y` cells.
pub fn s_operator(k: &KernelGrid, g: &GridFunction) -> GridFunction {
    let adj = apply_adjoint(k, g);
    let vals = adj.midpoints().into_iter().map(|y| adj.prefix_integral(y)).collect();
    on_y_grid(k, vals)
}

/// `(Hg)(a) = ∫_0^a M(a, b) g(b) db` at one point, using row of `M` containing `a`.
pub fn h_operator_at(m: &KernelGrid, g: &GridFunction, a: f64) -> f64 {
    let ex = m.x_edges();
    if a < ex[0] || a >= ex[ex.len() - 1] {
        return 0.0;
    }
    let i = ex.partition_point(|&e| e <= a) - 1;
    let masses = g.masses_on(m.y_edges());
    h_row(m, i, g, &masses, a)
}

fn h_row(m: &KernelGrid, i: usize, g: &GridFunction, masses: &[f64], a: f64) -> f64 {
    let ey = m.y_edges();
    let row = m.row(i);
    let full = ey.partition_point(|&e| e <= a).saturating_sub(1).min(row.len());
    let mut parts: Vec<f64> = row[..full].iter().zip(masses).map(|(v, w)| v * w).collect();
    if full < row.len() && a > ey[full] {
        parts.push(row[full] * g.mass_between(ey[full], a));
    }
    fsum(parts)
}

/// `Hg` at the midpoints of `M`'s first-argument cells.
pub fn h_operator(m: &KernelGrid, g: &GridFunction) -> GridFunction {
    let masses = g.masses_on(m.y_edges());
    let mids = m.x_midpoints();
    let vals = mids.par_iter().enumerate().map(|(i, &a)| h_row(m, i, g, &masses, a)).collect();
    on_x_grid(m, vals)
}

/// `x ↦ x⁻¹ ∫_0^x f` at the midpoints of `f`'s cells.
pub fn hardy_average(f: &GridFunction) -> GridFunction {
    if f.is_empty() {
        return f.clone();
    }
    let vals = f.midpoints().into_iter().map(|x| f.prefix_integral(x) / x).collect();
    GridFunction::from_parts(f.edges().to_vec(), f.lengths().to_vec(), vals)
}
