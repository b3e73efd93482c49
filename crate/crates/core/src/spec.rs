//! The text language used by the CLI and experiment configs.
//!
//! ```text
//! N-function   power:p=2 | sampled:path=<file> | expm1
//! function     indicator:a=..,b=.. | power:a=.. | exp:c=.. | randomstep:seed=..,cells=.. | const:c=.. | file:path=..
//! weight       one | power_weight:alpha=.. | <function>   (also read as a Density)
//! gauge        gauge(phi=<N-function>, u=<weight>)
//! kernel       hardy-averaging | hardy-indicator | hilbert | sum:k=<function>
//!              | radial:k=<function> | power-radial:lambda=.. | homogeneous:profile=<function>
//! ```

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conditions::Density;
use crate::error::{Error, Result};
use crate::gauge::GaugeSpec;
use crate::grid::{window_edges, GridFunction, Weight};
use crate::kernel::KernelFamily;
use crate::young::NFunction;

fn spec_err(spec: &str, reason: impl Into<String>) -> Error {
    Error::Spec { spec: spec.to_string(), reason: reason.into() }
}

/// Splits `tag:k=v,k=v` into the tag and its parameters.
fn split_params(spec: &str) -> Result<(&str, BTreeMap<String, String>)> {
    let (tag, rest) = match spec.split_once(':') {
        Some((t, r)) => (t.trim(), r),
        None => (spec.trim(), ""),
    };
    let mut params = BTreeMap::new();
    for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| spec_err(spec, format!("expected key=value, got `{part}`")))?;
        params.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok((tag, params))
}

fn num(spec: &str, params: &BTreeMap<String, String>, key: &str) -> Result<f64> {
    let raw = params.get(key).ok_or_else(|| spec_err(spec, format!("missing parameter `{key}`")))?;
    let v: f64 = raw.parse().map_err(|_| spec_err(spec, format!("`{key}` is not a number: `{raw}`")))?;
    if !v.is_finite() {
        return Err(spec_err(spec, format!("`{key}` must be finite")));
    }
    Ok(v)
}

pub fn parse_nfunction(spec: &str) -> Result<NFunction> {
    let (tag, params) = split_params(spec)?;
    match tag {
        "power" => NFunction::power(num(spec, &params, "p")?),
        "expm1" => Ok(NFunction::exp_minus_linear()),
        "sampled" => {
            let path = params.get("path").ok_or_else(|| spec_err(spec, "missing parameter `path`"))?;
            let text = std::fs::read_to_string(path)?;
            let mut t = Vec::new();
            let mut phi = Vec::new();
            for (k, line) in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).enumerate() {
                let cols: Vec<f64> = line
                    .split_whitespace()
                    .map(|c| c.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| spec_err(spec, format!("row {}: {e}", k + 1)))?;
                if cols.len() != 2 {
                    return Err(spec_err(spec, format!("row {} needs two columns", k + 1)));
                }
                t.push(cols[0]);
                phi.push(cols[1]);
            }
            if t.windows(2).any(|w| w[1] <= w[0]) || phi.windows(2).any(|w| w[1] <= w[0]) {
                return Err(spec_err(spec, "both columns must be strictly increasing"));
            }
            NFunction::sampled(t, phi)
        }
        other => Err(spec_err(spec, format!("unknown N-function tag `{other}`"))),
    }
}

/// Closed-form nonnegative functions on the half-line.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm {
    /// `χ_(a,b)`
    Indicator { a: f64, b: f64 },
    /// `y^{-a}`
    Power { a: f64 },
    /// `e^{-c y}`
    Exp { c: f64 },
    Const { c: f64 },
}

impl ClosedForm {
    pub fn eval(&self, y: f64) -> f64 {
        match *self {
            ClosedForm::Indicator { a, b } => {
                if y > a && y < b {
                    1.0
                } else {
                    0.0
                }
            }
            ClosedForm::Power { a } => {
                if y > 0.0 {
                    y.powf(-a)
                } else {
                    f64::INFINITY
                }
            }
            ClosedForm::Exp { c } => (-c * y).exp(),
            ClosedForm::Const { c } => c,
        }
    }

    /// An antiderivative, when one exists in closed form.
    pub fn antiderivative(&self, y: f64) -> f64 {
        match *self {
            ClosedForm::Indicator { a, b } => y.clamp(a, b) - a,
            ClosedForm::Power { a } => {
                if (a - 1.0).abs() < 1e-15 {
                    y.ln()
                } else {
                    y.powf(1.0 - a) / (1.0 - a)
                }
            }
            ClosedForm::Exp { c } => -(-c * y).exp() / c,
            ClosedForm::Const { c } => c * y,
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            ClosedForm::Indicator { a, b } => vec![a, b],
            _ => Vec::new(),
        }
    }
}

/// A parsed function spec, discretized on demand.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    Closed(ClosedForm),
    RandomStep { seed: u64, cells: usize },
    File(String),
}

impl FunctionSpec {
    /// Cell averages on `cells` log-uniform cells of `window`; indicator
    /// ends are inserted as extra edges so indicators are represented exactly.
    pub fn discretize(&self, window: (f64, f64), cells: usize) -> Result<GridFunction> {
        match self {
            FunctionSpec::Closed(cf) => {
                let mut edges = window_edges(window, cells);
                for b in cf.breakpoints() {
                    if b > window.0 && b < window.1 {
                        edges.push(b);
                    }
                }
                edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
                edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
                GridFunction::from_antiderivative(edges, |y| cf.antiderivative(y))
            }
            FunctionSpec::RandomStep { seed, cells: n } => random_step(*seed, *n, window, cells),
            FunctionSpec::File(path) => GridFunction::from_text(&std::fs::read_to_string(path)?),
        }
    }

    pub fn closed_form(&self) -> Option<&ClosedForm> {
        match self {
            FunctionSpec::Closed(c) => Some(c),
            _ => None,
        }
    }
}

/// A seeded step function: `pieces` log-uniform pieces of the window, about a
/// quarter of them zero, the rest uniform in (0, 1]; sampled on `cells` cells.
pub fn random_step(seed: u64, pieces: usize, window: (f64, f64), cells: usize) -> Result<GridFunction> {
    if pieces == 0 {
        return Err(crate::error::invalid("cells", "random step needs at least one piece"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels: Vec<f64> = (0..pieces)
        .map(|_| if rng.gen::<f64>() < 0.25 { 0.0 } else { 1.0 - rng.gen::<f64>() })
        .collect();
    let edges = window_edges(window, cells);
    let span = (window.1 / window.0).ln();
    GridFunction::from_midpoints(edges, |y| {
        let k = (((y / window.0).ln() / span) * pieces as f64) as usize;
        levels[k.min(pieces - 1)]
    })
}

pub fn parse_function(spec: &str) -> Result<FunctionSpec> {
    let (tag, params) = split_params(spec)?;
    Ok(match tag {
        "indicator" => {
            let (a, b) = (num(spec, &params, "a")?, num(spec, &params, "b")?);
            if !(a >= 0.0 && b > a) {
                return Err(spec_err(spec, "indicator needs 0 ≤ a < b"));
            }
            FunctionSpec::Closed(ClosedForm::Indicator { a, b })
        }
        "power" => FunctionSpec::Closed(ClosedForm::Power { a: num(spec, &params, "a")? }),
        "exp" => {
            let c = num(spec, &params, "c")?;
            if !(c > 0.0) {
                return Err(spec_err(spec, "exp needs c > 0"));
            }
            FunctionSpec::Closed(ClosedForm::Exp { c })
        }
        "const" => FunctionSpec::Closed(ClosedForm::Const { c: num(spec, &params, "c")?.max(0.0) }),
        "randomstep" => {
            let seed = num(spec, &params, "seed")?;
            let cells = num(spec, &params, "cells")?;
            if seed < 0.0 || cells < 1.0 || seed.fract() != 0.0 || cells.fract() != 0.0 {
                return Err(spec_err(spec, "seed and cells must be nonnegative integers, cells ≥ 1"));
            }
            FunctionSpec::RandomStep { seed: seed as u64, cells: cells as usize }
        }
        "file" => FunctionSpec::File(params.get("path").ok_or_else(|| spec_err(spec, "missing parameter `path`"))?.clone()),
        other => return Err(spec_err(spec, format!("unknown function tag `{other}`"))),
    })
}

pub fn parse_weight(spec: &str, window: (f64, f64), cells: usize) -> Result<Weight> {
    let (tag, params) = split_params(spec)?;
    let edges = window_edges(window, cells);
    match tag {
        "one" | "unit" => Ok(Weight::unit(edges)),
        "power_weight" => Weight::power(edges, num(spec, &params, "alpha")?),
        _ => Ok(Weight::new(parse_function(spec)?.discretize(window, cells)?)),
    }
}

/// A weight spec as a [`Density`] on the half-line, keeping closed forms exact.
pub fn parse_density(spec: &str, window: (f64, f64), cells: usize) -> Result<Density> {
    let (tag, params) = split_params(spec)?;
    match tag {
        "one" | "unit" => Ok(Density::one()),
        "power_weight" => {
            let alpha = num(spec, &params, "alpha")?;
            if !(alpha > -1.0) {
                return Err(spec_err(spec, "power_weight needs α > -1"));
            }
            Ok(Density::power_weight(alpha))
        }
        _ => match parse_function(spec)? {
            FunctionSpec::Closed(cf) => Ok(Density::closed(cf)),
            other => Ok(Density::from_weight(&Weight::new(other.discretize(window, cells)?))),
        },
    }
}

pub fn parse_gauge(spec: &str, window: (f64, f64), cells: usize) -> Result<GaugeSpec> {
    let inner = spec
        .trim()
        .strip_prefix("gauge(")
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| spec_err(spec, "expected gauge(phi=..., u=...)"))?;
    let idx = inner.find("u=").filter(|&i| i > 0 && inner[..i].trim_end().ends_with(','));
    let idx = idx.ok_or_else(|| spec_err(spec, "missing `u=`"))?;
    let phi_part = inner[..idx].trim_end().trim_end_matches(',').trim();
    let u_part = inner[idx + 2..].trim();
    let phi_spec = phi_part.strip_prefix("phi=").ok_or_else(|| spec_err(spec, "missing `phi=`"))?;
    Ok(GaugeSpec::new(parse_nfunction(phi_spec)?, parse_weight(u_part, window, cells)?))
}

/// Profiles for sum, radial and homogeneous kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Closed(ClosedForm),
    Grid(GridFunction),
}

impl Profile {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Profile::Closed(c) => c.eval(t),
            Profile::Grid(g) => g.eval(t),
        }
    }

    pub fn from_spec(spec: &FunctionSpec, window: (f64, f64), cells: usize) -> Result<Self> {
        Ok(match spec {
            FunctionSpec::Closed(c) => Profile::Closed(c.clone()),
            other => Profile::Grid(other.discretize(window, cells)?),
        })
    }

    pub fn power_exponent(&self) -> Option<f64> {
        match self {
            Profile::Closed(ClosedForm::Power { a }) => Some(*a),
            _ => None,
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Profile::Closed(c) => c.breakpoints(),
            Profile::Grid(g) => g.edges().to_vec(),
        }
    }
}

pub fn parse_kernel(spec: &str, window: (f64, f64), cells: usize) -> Result<KernelFamily> {
    let spec = spec.trim();
    let (tag, rest) = match spec.split_once(':') {
        Some((t, r)) => (t, r),
        None => (spec, ""),
    };
    let profile = |key: &str| -> Result<Profile> {
        let f = rest
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| spec_err(spec, format!("expected `{tag}:{key}=<function>`")))?;
        Profile::from_spec(&parse_function(f)?, window, cells)
    };
    match tag {
        "hardy-averaging" => Ok(KernelFamily::HardyAveraging),
        "hardy-indicator" => Ok(KernelFamily::HardyIndicator),
        "hilbert" => Ok(KernelFamily::Hilbert),
        "sum" => Ok(KernelFamily::Sum(profile("k")?)),
        "radial" => Ok(KernelFamily::Radial(profile("k")?)),
        "homogeneous" => Ok(KernelFamily::Homogeneous(profile("profile")?)),
        "power-radial" => {
            let (_, params) = split_params(spec)?;
            let lambda = num(spec, &params, "lambda")?;
            if !(lambda > 0.0) {
                return Err(spec_err(spec, "power-radial needs λ > 0"));
            }
            Ok(KernelFamily::PowerRadial { lambda })
        }
        other => Err(spec_err(spec, format!("unknown kernel tag `{other}`"))),
    }
}
