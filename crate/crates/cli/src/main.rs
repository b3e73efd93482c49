use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use orlicz_gauge::conditions::{
    bk_check, hardy_avg_check, hlp_check, homogeneous_check, kantorovic_mixed_norm, power_case_check, radial_check,
    rearranged_check, BkWeights, DilationMode, ScanConfig,
};
use orlicz_gauge::gauge::{dual_gauge, gauge_norm};
use orlicz_gauge::grid::window_edges;
use orlicz_gauge::harness::{
    build_family, homogeneous_as_report, oneil_compare, run_experiment, sample_points, to_json, FamilySpec, OneilConvention,
};
use orlicz_gauge::operators::{apply, iterated_rearrangement};
use orlicz_gauge::spec::{parse_density, parse_function, parse_gauge, parse_kernel, parse_nfunction, parse_weight, Profile};
use orlicz_gauge::{Error, GaugeSpec, GridFunction, KernelFamily, KernelGrid};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "orlicz-gauge", version, about = "Orlicz-Lorentz gauges, kernel operators and boundedness checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Grid {
    /// Truncation window `lo,hi`.
    #[arg(long, value_parser = parse_window, default_value = "1e-6,1e6")]
    window: (f64, f64),
    /// Log-uniform cells across the window.
    #[arg(long, default_value_t = 1024)]
    cells: usize,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Nonincreasing rearrangement f* of a function.
    Rearrange {
        #[arg(long)]
        f: String,
        #[command(flatten)]
        grid: Grid,
    },
    /// Luxemburg gauge of f (or of f*, or the dual gauge).
    GaugeNorm {
        #[arg(long)]
        f: String,
        /// `gauge(phi=<nfunction>, u=<weight>)`
        #[arg(long)]
        gauge: String,
        /// Take the gauge of f* instead of f.
        #[arg(long)]
        rearranged: bool,
        /// The dual gauge ρ_{Ψ,u}(f/u).
        #[arg(long)]
        dual: bool,
        #[command(flatten)]
        grid: Grid,
    },
    /// T_K f on the grid.
    Apply {
        #[arg(long)]
        kernel: String,
        #[arg(long)]
        f: String,
        #[command(flatten)]
        grid: Grid,
    },
    /// The iterated rearrangement of a kernel, as a cell matrix.
    IterateRearrange {
        #[arg(long)]
        kernel: String,
        #[command(flatten)]
        grid: Grid,
    },
    /// Run a condition checker.
    Check(CheckArgs),
    /// O'Neil's bound against the rearranged-kernel bound for a radial kernel.
    Oneil {
        /// `radial:k=<function>` or `power-radial:lambda=<λ>`
        #[arg(long)]
        kernel: String,
        #[arg(long)]
        f: String,
        #[arg(long, value_enum, default_value_t = Convention::Sqrt)]
        convention: Convention,
        /// Number of log-uniform sample points.
        #[arg(long, default_value_t = 13)]
        points: usize,
        #[command(flatten)]
        grid: Grid,
    },
    /// Run an experiment config; writes report.json and report.csv.
    Run {
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    Sqrt,
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConditionId {
    Bk,
    HardyAvg,
    Rearranged,
    PowerCase,
    Radial,
    Kantorovic,
    Hlp,
    Homogeneous,
}

#[derive(Args)]
struct CheckArgs {
    condition: ConditionId,
    #[arg(long)]
    kernel: String,
    #[arg(long, default_value = "power:p=2")]
    phi1: String,
    #[arg(long, default_value = "power:p=2")]
    phi2: String,
    #[arg(long, default_value = "one")]
    u1: String,
    #[arg(long, default_value = "one")]
    u2: String,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// Exponent for `power-radial` kernels given without one.
    #[arg(long)]
    lambda: Option<f64>,
    /// Nested windows in the divergence scan.
    #[arg(long, default_value_t = 3)]
    windows: usize,
    #[command(flatten)]
    grid: Grid,
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err("needs 0 < lo < hi < ∞".into());
    }
    Ok((lo, hi))
}

#[derive(Serialize)]
struct FunctionOut {
    edges: Vec<f64>,
    values: Vec<f64>,
    integral: f64,
}

impl From<&GridFunction> for FunctionOut {
    fn from(f: &GridFunction) -> Self {
        Self { edges: f.edges().to_vec(), values: f.values().to_vec(), integral: f.integrate() }
    }
}

#[derive(Serialize)]
struct KernelOut {
    x_edges: Vec<f64>,
    y_edges: Vec<f64>,
    /// Row-major, one row per x cell.
    values: Vec<Vec<f64>>,
    unchanged: bool,
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Error> {
    let text = to_json(value)?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn function(spec: &str, g: &Grid) -> Result<GridFunction, Error> {
    parse_function(spec)?.discretize(g.window, g.cells)
}

fn kernel_grid(spec: &str, g: &Grid) -> Result<KernelGrid, Error> {
    let fam = parse_kernel(spec, g.window, g.cells)?;
    let edges = window_edges(g.window, g.cells);
    KernelGrid::from_family(fam, edges.clone(), edges)
}

fn check(a: &CheckArgs) -> Result<serde_json::Value, Error> {
    let g = &a.grid;
    let scan = ScanConfig { window: g.window, nested: a.windows, ..ScanConfig::default() };
    let mut kernel = a.kernel.clone();
    if let (Some(l), true) = (a.lambda, kernel == "power-radial") {
        kernel = format!("power-radial:lambda={l}");
    }
    let fam = parse_kernel(&kernel, g.window, g.cells)?;
    let phi1 = parse_nfunction(&a.phi1)?;
    let phi2 = parse_nfunction(&a.phi2)?;
    let u1 = parse_density(&a.u1, g.window, g.cells)?;
    let u2 = parse_density(&a.u2, g.window, g.cells)?;
    let need = |v: Option<f64>, name: &'static str| v.ok_or(Error::Config { field: name.into(), reason: "required by this condition".into() });
    let report = match a.condition {
        ConditionId::Bk => {
            let f = fam.clone();
            let k = move |x: f64, y: f64| if y < x { f.eval(x, y) } else { 0.0 };
            let w = BkWeights { t: u1, v: u2, ..BkWeights::unweighted() };
            serde_json::to_value(bk_check(&k, &phi1, &phi2, &w, &scan)?)?
        }
        ConditionId::HardyAvg => serde_json::to_value(hardy_avg_check(&phi1, &u1, &scan)?)?,
        ConditionId::Rearranged => {
            let k = KernelGrid::from_family(fam, window_edges(g.window, g.cells), window_edges(g.window, g.cells))?;
            serde_json::to_value(rearranged_check(&k, &phi1, &phi2, &u1, &u2, &scan)?)?
        }
        ConditionId::PowerCase => {
            serde_json::to_value(power_case_check(&fam, need(a.p, "p")?, need(a.q, "q")?, &u1, &u2, &scan)?)?
        }
        ConditionId::Radial => serde_json::to_value(radial_check(&fam, need(a.p, "p")?, need(a.q, "q")?, &scan)?)?,
        ConditionId::Kantorovic => {
            let k = KernelGrid::from_family(fam, window_edges(g.window, g.cells), window_edges(g.window, g.cells))?;
            let r = kantorovic_mixed_norm(&k, need(a.p, "p")?, need(a.q, "q")?, &scan.windows())?;
            serde_json::to_value(r)?
        }
        ConditionId::Hlp => serde_json::to_value(homogeneous_as_report(&hlp_check(&fam, need(a.p, "p")?, &scan)?, &scan))?,
        ConditionId::Homogeneous => {
            let s1 = GaugeSpec::new(phi1.clone(), parse_weight(&a.u1, g.window, g.cells)?);
            let s2 = GaugeSpec::new(phi2.clone(), parse_weight(&a.u2, g.window, g.cells)?);
            let mode = match phi1.power_exponent() {
                Some(p) if phi1 == phi2 && a.u1 == a.u2 => DilationMode::PowerClosedForm { p, u: u1 },
                _ => {
                    let members = build_family(&FamilySpec::default(), g.window, g.cells, 0)?;
                    DilationMode::Empirical(members.into_iter().map(|m| m.f).collect())
                }
            };
            serde_json::to_value(homogeneous_as_report(&homogeneous_check(&fam, &s1, &s2, &mode, &scan)?, &scan))?
        }
    };
    let mut report = report;
    let id = a.condition.to_possible_value().expect("no skipped variants");
    report["condition"] = id.get_name().into();
    Ok(report)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Rearrange { f, grid } => emit(&FunctionOut::from(&function(&f, &grid)?.rearrange()), grid.out.as_deref()),
        Command::GaugeNorm { f, gauge, rearranged, dual, grid } => {
            let mut f = function(&f, &grid)?;
            if rearranged {
                f = f.rearrange();
            }
            let spec = parse_gauge(&gauge, grid.window, grid.cells)?;
            let value = if dual { dual_gauge(&f, &spec)? } else { gauge_norm(&f, &spec) };
            emit(&value, grid.out.as_deref())
        }
        Command::Apply { kernel, f, grid } => {
            let k = kernel_grid(&kernel, &grid)?;
            emit(&FunctionOut::from(&apply(&k, &function(&f, &grid)?)), grid.out.as_deref())
        }
        Command::IterateRearrange { kernel, grid } => {
            let k = kernel_grid(&kernel, &grid)?;
            let l = iterated_rearrangement(&k)?;
            let out = KernelOut {
                x_edges: l.x_edges().to_vec(),
                y_edges: l.y_edges().to_vec(),
                values: (0..l.nx()).map(|i| l.row(i).to_vec()).collect(),
                unchanged: l.values() == k.values(),
            };
            emit(&out, grid.out.as_deref())
        }
        Command::Check(a) => {
            let report = check(&a)?;
            emit(&report, a.grid.out.as_deref())
        }
        Command::Oneil { kernel, f, convention, points, grid } => {
            let profile = match parse_kernel(&kernel, grid.window, grid.cells)? {
                KernelFamily::Radial(p) => p,
                KernelFamily::PowerRadial { lambda } => Profile::Closed(orlicz_gauge::spec::ClosedForm::Power { a: lambda }),
                _ => return Err(Error::Config { field: "kernel".into(), reason: "oneil needs a radial kernel".into() }),
            };
            let conv = match convention {
                Convention::Sqrt => OneilConvention::Sqrt,
                Convention::Exact => OneilConvention::Exact,
            };
            let xs = sample_points((grid.window.0 * 10.0, grid.window.1 / 10.0), points);
            let rows = oneil_compare(&profile, &function(&f, &grid)?, &xs, conv, grid.window, grid.cells)?;
            emit(&rows, grid.out.as_deref())
        }
        Command::Run { config, out } => {
            std::fs::create_dir_all(&out)?;
            let report = run_experiment(&config, &out)?;
            let verdict = report.condition.as_ref().map(|c| c.verdict.to_string()).unwrap_or_else(|| "unchecked".into());
            println!("C_hat = {:.12e}, trend {}, condition {}", report.c_hat, report.empirical_trend, verdict);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
