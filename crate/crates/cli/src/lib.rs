//! Command-line front end: curvature tables, deflection angles, parameter
//! sweeps and Gauss-Bonnet identity checks.
//!
//! Exit codes: 0 success, 1 tolerance or identity failure, 2 invalid input or
//! domain error, 3 ray capture.

// `!(x > 0.0)` guards are intentional: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod format;

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use lensgeo_core::{
    closed_form_k, deflection_gb, gauss_curvature, gauss_curvature_liouville, gb_terms, kerr_riemannian_correction,
    sereno_series, shoot_deflection, DeflectionMethod, GeoError, MetricId, OrbitSense, Point, QuadratureConfig,
    SectorRegion, ShootConfig, SpacetimeParams,
};

use crate::format::{Cell, Format, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CAPTURE: i32 = 3;

/// Radians to arcseconds.
pub const ARCSEC_PER_RAD: f64 = 206_264.806_247_096_36;

pub const SWEEP_HEADER: [&str; 8] = ["metric", "M", "a", "sense", "b", "method", "delta", "error_estimate"];

#[derive(Debug, Parser)]
#[command(name = "lensgeo", version, about = "Light deflection in black-hole optical geometries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gauss curvature by the Riemann, Liouville and closed-form routes.
    Curvature(CurvatureArgs),
    /// Deflection angle at one impact parameter.
    Deflect(DeflectArgs),
    /// Deflection angles over a range of impact parameters, as CSV or JSON.
    Sweep(SweepArgs),
    /// Numerical check of the Gauss-Bonnet identity on an annular sector.
    Gbcheck(GbcheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Flat,
    Schwarzschild,
    Kerr,
}

impl From<MetricArg> for MetricId {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Flat => MetricId::Flat,
            MetricArg::Schwarzschild => MetricId::SchwarzschildOptical,
            MetricArg::Kerr => MetricId::KerrReducedOptical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SenseArg {
    Pro,
    Retro,
}

impl From<SenseArg> for OrbitSense {
    fn from(s: SenseArg) -> Self {
        match s {
            SenseArg::Pro => OrbitSense::Prograde,
            SenseArg::Retro => OrbitSense::Retrograde,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum)]
pub enum MethodArg {
    GaussBonnet,
    Shooting,
    Series,
    ClosedForm,
}

impl MethodArg {
    pub fn name(self) -> &'static str {
        match self {
            MethodArg::GaussBonnet => DeflectionMethod::GaussBonnet.name(),
            MethodArg::Shooting => DeflectionMethod::Shooting.name(),
            MethodArg::Series => DeflectionMethod::Series.name(),
            MethodArg::ClosedForm => "closed-form",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Log,
    Lin,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long, value_enum, default_value = "schwarzschild")]
    pub metric: MetricArg,
    /// Lens mass M in geometric units.
    #[arg(long = "mass", default_value_t = 1.0, allow_negative_numbers = true)]
    pub mass: f64,
    /// Spin parameter a >= 0 (kerr only).
    #[arg(long = "spin", default_value_t = 0.0, allow_negative_numbers = true)]
    pub spin: f64,
    /// Orbit sense for the closed-form spin terms.
    #[arg(long, value_enum, default_value = "retro")]
    pub sense: SenseArg,
    /// Relative tolerance; its meaning depends on the subcommand.
    #[arg(long = "rel-tol")]
    pub rel_tol: Option<f64>,
    /// Write output here instead of standard output.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Report angles in arcseconds instead of radians.
    #[arg(long)]
    pub arcsec: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CurvatureArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Single radius to evaluate.
    #[arg(long, conflicts_with_all = ["r_min", "r_max", "r_points"])]
    pub r: Option<f64>,
    /// First radius of a linear grid.
    #[arg(long = "r-min")]
    pub r_min: Option<f64>,
    /// Last radius of a linear grid.
    #[arg(long = "r-max")]
    pub r_max: Option<f64>,
    /// Number of grid radii.
    #[arg(long = "r-points")]
    pub r_points: Option<usize>,
    /// Azimuth of the sample points (the catalog metrics do not depend on it).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi: f64,
}

#[derive(Debug, Clone, Args)]
pub struct DeflectArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Impact parameter.
    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,
    /// Comma-separated list of methods.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "gauss-bonnet,shooting,series")]
    pub method: Vec<MethodArg>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Smallest impact parameter.
    #[arg(long = "b-min", allow_negative_numbers = true)]
    pub b_min: f64,
    /// Largest impact parameter.
    #[arg(long = "b-max", allow_negative_numbers = true)]
    pub b_max: f64,
    /// Number of impact parameters, endpoints included.
    #[arg(long = "b-points")]
    pub b_points: usize,
    /// Grid spacing.
    #[arg(long = "b-scale", value_enum, default_value = "log")]
    pub b_scale: ScaleArg,
    /// Comma-separated list of methods.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "gauss-bonnet")]
    pub method: Vec<MethodArg>,
}

#[derive(Debug, Clone, Args)]
pub struct GbcheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Inner arc radius.
    #[arg(long = "r-min")]
    pub r_min: f64,
    /// Outer arc radius.
    #[arg(long = "r-max")]
    pub r_max: f64,
    #[arg(long = "phi-min", default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi_min: f64,
    #[arg(long = "phi-max", default_value_t = std::f64::consts::FRAC_PI_2, allow_negative_numbers = true)]
    pub phi_max: f64,
    /// Largest acceptable |residual|.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

/// A failure that maps onto an exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(field: &str, message: impl std::fmt::Display) -> Self {
        Self { code: EXIT_INPUT, message: format!("invalid --{field}: {message}") }
    }
}

impl From<GeoError> for Failure {
    fn from(e: GeoError) -> Self {
        Self { code: exit_code(&e), message: e.to_string() }
    }
}

pub fn exit_code(e: &GeoError) -> i32 {
    match e {
        GeoError::Capture { .. } => EXIT_CAPTURE,
        GeoError::Domain(_) | GeoError::InvalidInput(_) | GeoError::DegenerateTangent(_) => EXIT_INPUT,
        GeoError::StepFailure { .. } | GeoError::NonConvergence(_) | GeoError::ToleranceNotMet { .. } => {
            EXIT_TOLERANCE
        }
    }
}

fn status_name(e: &GeoError) -> &'static str {
    match e {
        GeoError::Capture { .. } => "captured",
        GeoError::Domain(_) => "domain-error",
        GeoError::InvalidInput(_) => "invalid-input",
        GeoError::DegenerateTangent(_) => "degenerate-tangent",
        GeoError::StepFailure { .. } => "step-failure",
        GeoError::NonConvergence(_) => "no-convergence",
        GeoError::ToleranceNotMet { .. } => "tolerance-not-met",
    }
}

/// Validated physical parameters shared by all subcommands.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub metric: MetricId,
    pub params: SpacetimeParams,
    pub sense: OrbitSense,
    pub format: Format,
    pub arcsec: bool,
}

impl RunConfig {
    pub fn from_common(c: &CommonArgs) -> Result<Self, Failure> {
        if !(c.mass.is_finite() && c.mass >= 0.0) {
            return Err(Failure::input("mass", format!("must be finite and >= 0, got {}", c.mass)));
        }
        if !(c.spin.is_finite() && c.spin >= 0.0) {
            return Err(Failure::input("spin", format!("must be finite and >= 0, got {}", c.spin)));
        }
        if c.metric == MetricArg::Schwarzschild && c.spin != 0.0 {
            return Err(Failure::input("spin", "must be 0 for the schwarzschild metric (use --metric kerr)"));
        }
        if let Some(t) = c.rel_tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(Failure::input("rel-tol", format!("must be > 0, got {t}")));
            }
        }
        Ok(Self {
            metric: c.metric.into(),
            params: SpacetimeParams::unchecked(c.mass, c.spin),
            sense: c.sense.into(),
            format: match c.format {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            },
            arcsec: c.arcsec,
        })
    }

    fn angle(&self, rad: f64) -> f64 {
        if self.arcsec {
            rad * ARCSEC_PER_RAD
        } else {
            rad
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Table output goes to `--out` or `stdout`; diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let (common, result) = match &cli.command {
        Command::Curvature(a) => (&a.common, cmd_curvature(a)),
        Command::Deflect(a) => (&a.common, cmd_deflect(a)),
        Command::Sweep(a) => (&a.common, cmd_sweep(a)),
        Command::Gbcheck(a) => (&a.common, cmd_gbcheck(a)),
    };
    let (body, failure) = match result {
        Ok(outcome) => (outcome.body, outcome.failure),
        Err(f) => (None, Some(f)),
    };
    if let Some(body) = body {
        let written = match &common.out {
            Some(path) => std::fs::write(path, body.as_bytes()),
            None => stdout.write_all(body.as_bytes()),
        };
        if let Err(e) = written {
            let _ = writeln!(stderr, "error: cannot write output: {e}");
            return EXIT_INPUT;
        }
    }
    match failure {
        Some(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
        None => EXIT_OK,
    }
}

/// Rendered output plus an optional failure that still lets the output be emitted.
pub struct Outcome {
    pub body: Option<String>,
    pub failure: Option<Failure>,
}

fn relative_gap(x: f64, y: f64, floor: f64) -> f64 {
    let scale = x.abs().max(y.abs());
    if scale <= floor {
        0.0
    } else {
        (x - y).abs() / scale
    }
}

pub fn cmd_curvature(args: &CurvatureArgs) -> Result<Outcome, Failure> {
    let cfg = RunConfig::from_common(&args.common)?;
    let radii: Vec<f64> = match (args.r, args.r_min, args.r_max, args.r_points) {
        (Some(r), None, None, None) => vec![r],
        (None, Some(lo), Some(hi), Some(n)) => {
            if n < 2 || !(lo > 0.0 && lo < hi) {
                return Err(Failure::input("r-points", "need r-min < r-max and at least 2 points"));
            }
            log_grid(lo, hi, n)
        }
        _ => return Err(Failure::input("r", "give --r or all of --r-min, --r-max, --r-points")),
    };
    let tol = args.common.rel_tol.unwrap_or(1e-6);
    let mut table = Table::new(vec!["r", "phi", "K_riemann", "K_liouville", "K_closed_form", "max_pairwise_rel_err"]);
    let mut worst: f64 = 0.0;
    for r in radii {
        let p = Point::new(r, args.phi);
        let kr = gauss_curvature(cfg.metric, cfg.params, p)?;
        let kl = gauss_curvature_liouville(cfg.metric, cfg.params, p)?;
        let kc = closed_form_k(cfg.metric, cfg.params, p)?;
        // curvature has units 1/length^2; anything below 1e-10/r^2 counts as zero
        let floor = 1e-10 / (r * r);
        let gap = relative_gap(kr, kl, floor)
            .max(relative_gap(kr, kc, floor))
            .max(relative_gap(kl, kc, floor));
        worst = worst.max(gap);
        table.push(vec![Cell::Num(r), Cell::Num(args.phi), Cell::Num(kr), Cell::Num(kl), Cell::Num(kc), Cell::Num(gap)]);
    }
    let failure = (worst > tol).then(|| Failure {
        code: EXIT_TOLERANCE,
        message: format!("curvature routes disagree: max relative gap {worst:e} > {tol:e}"),
    });
    Ok(Outcome { body: Some(table.render(cfg.format)), failure })
}

/// Deflection by one method, with the configured tolerance.
pub fn deflection(cfg: &RunConfig, method: MethodArg, b: f64, rel_tol: Option<f64>) -> Result<(f64, f64, u64), GeoError> {
    if !(b.is_finite() && b > 0.0) {
        return Err(GeoError::InvalidInput(format!("impact parameter must be > 0, got {b}")));
    }
    let flat = cfg.metric == MetricId::Flat;
    let (m, a) = (cfg.params.mass, cfg.params.spin);
    match method {
        MethodArg::GaussBonnet => {
            let q = QuadratureConfig { rel_tol: rel_tol.unwrap_or(1e-10), ..Default::default() };
            let d = deflection_gb(cfg.metric, cfg.params, b, &q)?;
            Ok((d.angle, d.error_estimate, d.evaluations as u64))
        }
        MethodArg::Shooting => {
            let mut s = ShootConfig::default();
            if let Some(t) = rel_tol {
                s.integrator.tol.rel = t;
            }
            let d = shoot_deflection(cfg.metric, cfg.params, b, &s)?;
            Ok((d.angle, d.error_estimate, d.evaluations as u64))
        }
        MethodArg::Series => Ok((if flat { 0.0 } else { sereno_series(m, a, b, cfg.sense) }, 0.0, 1)),
        MethodArg::ClosedForm => Ok((if flat { 0.0 } else { kerr_riemannian_correction(m, a, b) }, 0.0, 1)),
    }
}

fn dedup_methods(methods: &[MethodArg]) -> Vec<MethodArg> {
    let mut out: Vec<MethodArg> = methods.to_vec();
    out.sort();
    out.dedup();
    out
}

pub fn cmd_deflect(args: &DeflectArgs) -> Result<Outcome, Failure> {
    let cfg = RunConfig::from_common(&args.common)?;
    if !(args.b.is_finite() && args.b > 0.0) {
        return Err(Failure::input("b", format!("must be > 0, got {}", args.b)));
    }
    let mut table = Table::new(vec!["method", "b", "M", "a", "sense", "delta", "error_estimate", "evaluations"]);
    for method in dedup_methods(&args.method) {
        let (delta, err, evals) = deflection(&cfg, method, args.b, args.common.rel_tol)?;
        table.push(vec![
            Cell::Text(method.name().into()),
            Cell::Num(args.b),
            Cell::Num(cfg.params.mass),
            Cell::Num(cfg.params.spin),
            Cell::Text(cfg.sense.name().into()),
            Cell::Num(cfg.angle(delta)),
            Cell::Num(cfg.angle(err)),
            Cell::Int(evals),
        ]);
    }
    Ok(Outcome { body: Some(table.render(cfg.format)), failure: None })
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (l0, l1) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => 10f64.powf(l0 + (l1 - l0) * i as f64 / (n - 1) as f64),
        })
        .collect()
}

fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<Outcome, Failure> {
    let cfg = RunConfig::from_common(&args.common)?;
    if args.b_points < 2 {
        return Err(Failure::input("b-points", format!("need at least 2 points, got {}", args.b_points)));
    }
    if !(args.b_min.is_finite() && args.b_max.is_finite() && args.b_min > 0.0 && args.b_min < args.b_max) {
        return Err(Failure::input(
            "b-min",
            format!("need 0 < b-min < b-max, got [{}, {}]", args.b_min, args.b_max),
        ));
    }
    let bs = match args.b_scale {
        ScaleArg::Log => log_grid(args.b_min, args.b_max, args.b_points),
        ScaleArg::Lin => lin_grid(args.b_min, args.b_max, args.b_points),
    };
    let methods = dedup_methods(&args.method);
    let jobs: Vec<(f64, MethodArg)> = bs.iter().flat_map(|&b| methods.iter().map(move |&m| (b, m))).collect();
    let results: Vec<Result<(f64, f64, u64), GeoError>> = jobs
        .par_iter()
        .map(|&(b, m)| deflection(&cfg, m, b, args.common.rel_tol))
        .collect();

    let any_failed = results.iter().any(|r| r.is_err());
    let mut headers = SWEEP_HEADER.to_vec();
    if any_failed {
        headers.push("status");
    }
    let mut table = Table::new(headers);
    let mut failure = None;
    for (&(b, m), res) in jobs.iter().zip(&results) {
        let mut row = vec![
            Cell::Text(cfg.metric.name().into()),
            Cell::Num(cfg.params.mass),
            Cell::Num(cfg.params.spin),
            Cell::Text(cfg.sense.name().into()),
            Cell::Num(b),
            Cell::Text(m.name().into()),
        ];
        match res {
            Ok((delta, err, _)) => {
                row.push(Cell::Num(cfg.angle(*delta)));
                row.push(Cell::Num(cfg.angle(*err)));
                if any_failed {
                    row.push(Cell::Text("ok".into()));
                }
            }
            Err(e) => {
                row.push(Cell::Empty);
                row.push(Cell::Empty);
                row.push(Cell::Text(status_name(e).into()));
                if failure.is_none() {
                    failure = Some(Failure {
                        code: exit_code(e),
                        message: format!("b = {b}, method {}: {e}", m.name()),
                    });
                }
            }
        }
        table.push(row);
    }
    Ok(Outcome { body: Some(table.render(cfg.format)), failure })
}

pub fn cmd_gbcheck(args: &GbcheckArgs) -> Result<Outcome, Failure> {
    let cfg = RunConfig::from_common(&args.common)?;
    if !(args.tol.is_finite() && args.tol > 0.0) {
        return Err(Failure::input("tol", format!("must be > 0, got {}", args.tol)));
    }
    let region = SectorRegion::new(args.r_min, args.r_max, args.phi_min, args.phi_max)?;
    let quad = QuadratureConfig { rel_tol: args.common.rel_tol.unwrap_or(1e-10), ..Default::default() };
    let terms = gb_terms(cfg.metric, cfg.params, &region, &quad)?;
    let residual = terms.residual();
    let mut table = Table::new(vec![
        "metric",
        "r_min",
        "r_max",
        "phi_min",
        "phi_max",
        "boundary_integral",
        "area_integral",
        "corner_sum",
        "residual",
    ]);
    table.push(vec![
        Cell::Text(cfg.metric.name().into()),
        Cell::Num(region.r_min),
        Cell::Num(region.r_max),
        Cell::Num(region.phi_min),
        Cell::Num(region.phi_max),
        Cell::Num(terms.boundary_integral),
        Cell::Num(terms.area_integral),
        Cell::Num(terms.corner_sum),
        Cell::Num(residual),
    ]);
    // the residual only certifies the identity up to the quadrature error
    let bound = residual.abs() + terms.area_error;
    let failure = (!(bound < args.tol)).then(|| Failure {
        code: EXIT_TOLERANCE,
        message: format!(
            "Gauss-Bonnet residual {residual:e} (quadrature error {:e}) exceeds tolerance {:e}",
            terms.area_error, args.tol
        ),
    });
    Ok(Outcome { body: Some(table.render(cfg.format)), failure })
}
