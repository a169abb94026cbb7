//! Command-line front end. Every subcommand parses its flags, calls one
//! library operation and prints the result; no numerics live here.

use std::path::PathBuf;

use clap::{error::ErrorKind, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::analysis::{
    admissible_theta_window, locate_vortex, paraxial_error, paraxial_field,
    shell_energy_converged, EnergyDensity,
};
use crate::grids::{
    export_csv, export_json, figure_grid, sample_grid, Axis, Figure, DEFAULT_1D_RESOLUTION,
    DEFAULT_2D_RESOLUTION,
};
use crate::riccati::{crosscheck_angular, crosscheck_radial};
use crate::verification::{helmholtz_residual, helmholtz_residual_of, pde_envelope_residual, Stencil};
use crate::{
    eval_branch, eval_field, select_branch, spherical_from_cartesian, BeamSpec, Branch,
    CartesianPoint, ComplexValue, Error, Result, SphericalPoint,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandResult {
    pub exit_code: i32,
    pub stdout: String,
    pub diagnostics: Vec<String>,
}

/// Field used by `residual` in place of the closed form. Test hook.
pub type FieldOverride = dyn Fn(&SphericalPoint) -> Result<ComplexValue> + Sync;

#[derive(Default, Clone, Copy)]
pub struct Overrides<'a> {
    pub field: Option<&'a FieldOverride>,
}

#[derive(Debug, Parser)]
#[command(name = "helmbeam", version, about = "Exact non-paraxial Helmholtz beam toolkit")]
struct Cli {
    /// Emit a single JSON document instead of key=value text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the field at a point.
    Eval(EvalArgs),
    /// Finite-difference residual of the Helmholtz (or envelope) equation.
    Residual(ResidualArgs),
    /// Integrate a Riccati equation and compare against its closed form.
    Riccati(RiccatiArgs),
    /// Endpoints of the admissible θ-window.
    Window,
    /// Polar angle of the zero line.
    Vortex(VortexArgs),
    /// Exact vs paraxial Cartesian form.
    Paraxial(ParaxialArgs),
    /// Shell energy by Gauss–Legendre quadrature.
    Energy(EnergyArgs),
    /// Sample a grid and export it.
    Grid(GridArgs),
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    k: f64,
    #[arg(long)]
    a: f64,
    #[arg(long, requires = "theta", conflicts_with_all = ["x", "y", "z"])]
    r: Option<f64>,
    #[arg(long, requires = "r")]
    theta: Option<f64>,
    #[arg(long, requires = "r")]
    phi: Option<f64>,
    #[arg(long, requires_all = ["y", "z"])]
    x: Option<f64>,
    #[arg(long, requires_all = ["x", "z"])]
    y: Option<f64>,
    #[arg(long, requires_all = ["x", "y"])]
    z: Option<f64>,
    /// Force a branch instead of selecting it from kR.
    #[arg(long)]
    branch: Option<BranchArg>,
    /// Angles are given in degrees.
    #[arg(long)]
    deg: bool,
}

#[derive(Debug, Args)]
struct ResidualArgs {
    #[arg(long)]
    k: f64,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long)]
    r: f64,
    #[arg(long)]
    theta: f64,
    #[arg(long, default_value_t = 1e-3)]
    h: f64,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Check the envelope PDE instead of the Helmholtz equation.
    #[arg(long)]
    envelope: bool,
    #[arg(long)]
    deg: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Which {
    Angular,
    Radial,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BranchArg {
    Cos,
    Sin,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Cos => Branch::Cos,
            BranchArg::Sin => Branch::Sin,
        }
    }
}

#[derive(Debug, Args)]
struct RiccatiArgs {
    #[arg(long)]
    which: Which,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    #[arg(long = "c0-re", default_value_t = 0.0)]
    c0_re: f64,
    #[arg(long = "c0-im", default_value_t = 0.0)]
    c0_im: f64,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long, default_value = "cos")]
    branch: BranchArg,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 50)]
    samples: usize,
}

#[derive(Debug, Args)]
struct VortexArgs {
    #[arg(long)]
    k: f64,
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
}

#[derive(Debug, Args)]
struct ParaxialArgs {
    #[arg(long)]
    k: f64,
    #[arg(long)]
    z: f64,
    #[arg(long)]
    rho: f64,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
}

#[derive(Debug, Args)]
struct EnergyArgs {
    #[arg(long)]
    k: f64,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    rlo: f64,
    #[arg(long)]
    rhi: f64,
    /// Integrate over θ ∈ (0, π) instead of the admissible window.
    #[arg(long)]
    full_theta: bool,
    /// Integrate |A| instead of |A|².
    #[arg(long)]
    magnitude: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FieldKind {
    Exact,
    Paraxial,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long, conflicts_with = "field", required_unless_present = "field", value_parser = ["3", "4", "5", "6"])]
    figure: Option<String>,
    /// `exact`: field over (R, θ); `paraxial`: Cartesian profile over (r, Z).
    #[arg(long)]
    field: Option<FieldKind>,
    #[arg(long)]
    k: f64,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    xlo: Option<f64>,
    #[arg(long)]
    xhi: Option<f64>,
    #[arg(long)]
    ylo: Option<f64>,
    #[arg(long)]
    yhi: Option<f64>,
    #[arg(long)]
    format: Format,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for sampling; output bytes do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

/// Ordered key/value output rendered as text or JSON.
struct Payload {
    schema: &'static str,
    fields: Vec<(&'static str, Value)>,
}

impl Payload {
    fn new(schema: &'static str) -> Self {
        Payload { schema, fields: Vec::new() }
    }

    fn num(mut self, key: &'static str, v: f64) -> Self {
        self.fields.push((key, json!(v)));
        self
    }

    fn int(mut self, key: &'static str, v: usize) -> Self {
        self.fields.push((key, json!(v)));
        self
    }

    fn text(mut self, key: &'static str, v: impl Into<String>) -> Self {
        self.fields.push((key, Value::String(v.into())));
        self
    }

    fn flag(mut self, key: &'static str, v: bool) -> Self {
        self.fields.push((key, Value::Bool(v)));
        self
    }

    fn render(&self, as_json: bool) -> String {
        if as_json {
            let mut map = Map::new();
            map.insert("schema".into(), Value::String(self.schema.into()));
            for (k, v) in &self.fields {
                map.insert((*k).into(), v.clone());
            }
            let mut s = Value::Object(map).to_string();
            s.push('\n');
            s
        } else {
            let parts: Vec<String> = self
                .fields
                .iter()
                .map(|(k, v)| match v {
                    // Display for f64 is the shortest round-trip decimal
                    Value::Number(n) if n.is_f64() => format!("{k}={}", n.as_f64().unwrap()),
                    Value::String(s) => format!("{k}={s}"),
                    other => format!("{k}={other}"),
                })
                .collect();
            format!("{}\n", parts.join(" "))
        }
    }
}

enum Outcome {
    Ok(Payload),
    Failed(Payload, String),
}

pub fn run<I, T>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, Overrides::default())
}

pub fn run_with<I, T>(argv: I, overrides: Overrides<'_>) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
                    if e.exit_code() == 0 =>
                {
                    CommandResult { exit_code: EXIT_OK, stdout: rendered, diagnostics: vec![] }
                }
                _ => CommandResult {
                    exit_code: EXIT_INVALID,
                    stdout: String::new(),
                    diagnostics: vec![rendered],
                },
            };
        }
    };

    match dispatch(&cli.command, overrides) {
        Ok(Outcome::Ok(payload)) => CommandResult {
            exit_code: EXIT_OK,
            stdout: payload.render(cli.json),
            diagnostics: vec![],
        },
        Ok(Outcome::Failed(payload, why)) => CommandResult {
            exit_code: EXIT_VERIFICATION,
            stdout: payload.render(cli.json),
            diagnostics: vec![why],
        },
        Err(e) => CommandResult {
            exit_code: exit_code_for(&e),
            stdout: String::new(),
            diagnostics: vec![e.to_string()],
        },
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::PoleEncountered { .. } | Error::StepUnderflow { .. } => EXIT_VERIFICATION,
        _ => EXIT_INVALID,
    }
}

fn dispatch(command: &Command, overrides: Overrides<'_>) -> Result<Outcome> {
    match command {
        Command::Eval(args) => eval(args),
        Command::Residual(args) => residual(args, overrides),
        Command::Riccati(args) => riccati(args),
        Command::Window => {
            let w = admissible_theta_window();
            Ok(Outcome::Ok(Payload::new("window").num("theta0", w.theta0).num("theta1", w.theta1)))
        }
        Command::Vortex(args) => {
            let beam = BeamSpec::new(args.a, args.k)?;
            let theta = locate_vortex(&beam, args.r)?;
            Ok(Outcome::Ok(Payload::new("vortex").num("theta", theta)))
        }
        Command::Paraxial(args) => {
            let beam = BeamSpec::new(args.a, args.k)?;
            let c = paraxial_error(&beam, args.rho, 0.0, args.z)?;
            Ok(Outcome::Ok(
                Payload::new("paraxial")
                    .num("exact", c.exact)
                    .num("approx", c.approx)
                    .num("abs_error", c.abs_error)
                    .num("rel_error", c.rel_error)
                    .num("fresnel_parameter", c.fresnel_parameter)
                    .flag("non_paraxial", c.non_paraxial),
            ))
        }
        Command::Energy(args) => energy(args),
        Command::Grid(args) => grid(args),
    }
}

fn angle(value: f64, deg: bool) -> f64 {
    if deg {
        value.to_radians()
    } else {
        value
    }
}

fn eval(args: &EvalArgs) -> Result<Outcome> {
    let beam = BeamSpec::new(args.a, args.k)?;
    let pt = match (args.r, args.theta, args.x, args.y, args.z) {
        (Some(r), Some(theta), None, None, None) => {
            SphericalPoint::new(r, angle(theta, args.deg), angle(args.phi.unwrap_or(0.0), args.deg))?
        }
        (None, None, Some(x), Some(y), Some(z)) => {
            spherical_from_cartesian(CartesianPoint::new(x, y, z)?)?
        }
        _ => return Err(Error::domain("give either --r/--theta or --x/--y/--z")),
    };
    let (value, branch) = match args.branch {
        Some(b) => {
            let b = Branch::from(b);
            (eval_branch(&beam, &pt, b)?, b)
        }
        None => eval_field(&beam, &pt)?,
    };
    Ok(Outcome::Ok(
        Payload::new("eval")
            .num("re", value.re)
            .num("im", value.im)
            .text("branch", branch.as_str()),
    ))
}

fn residual(args: &ResidualArgs, overrides: Overrides<'_>) -> Result<Outcome> {
    let beam = BeamSpec::new(args.a, args.k)?;
    if !(args.tol.is_finite() && args.tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be > 0, got {}", args.tol)));
    }
    let pt = SphericalPoint::new(args.r, angle(args.theta, args.deg), 0.0)?;
    let (report, kind) = if args.envelope {
        let branch = select_branch(beam.k, pt.r)?;
        (pde_envelope_residual(&beam, &pt, branch, args.h)?, "envelope")
    } else if let Some(field) = overrides.field {
        let mut rep = helmholtz_residual_of(field, beam.k, &pt, args.h, Stencil::SecondOrder)?;
        rep.branch = Some(select_branch(beam.k, pt.r)?);
        (rep, "helmholtz")
    } else {
        (helmholtz_residual(&beam, &pt, args.h)?, "helmholtz")
    };
    let passed = report.relative_magnitude <= args.tol;
    let payload = Payload::new("residual")
        .text("equation", kind)
        .num("re", report.residual.re)
        .num("im", report.residual.im)
        .num("relative_magnitude", report.relative_magnitude)
        .num("h", report.h)
        .text("branch", report.branch.map_or("none", |b| b.as_str()))
        .flag("passed", passed);
    Ok(if passed {
        Outcome::Ok(payload)
    } else {
        let why = format!(
            "{kind} residual {} exceeds tolerance {}",
            report.relative_magnitude, args.tol
        );
        Outcome::Failed(payload, why)
    })
}

fn riccati(args: &RiccatiArgs) -> Result<Outcome> {
    let (report, which) = match args.which {
        Which::Angular => (
            crosscheck_angular(
                ComplexValue::new(args.c0_re, args.c0_im),
                args.from,
                args.to,
                args.tol,
                args.samples,
            )?,
            "angular",
        ),
        Which::Radial => {
            let k = args.k.ok_or_else(|| Error::domain("--which radial requires --k"))?;
            (
                crosscheck_radial(k, args.from, args.to, args.branch.into(), args.tol, args.samples)?,
                "radial",
            )
        }
    };
    let payload = Payload::new("riccati")
        .text("which", which)
        .num("max_abs_error", report.max_abs_error)
        .num("max_rel_error", report.max_rel_error)
        .num("from", report.interval.0)
        .num("to", report.interval.1)
        .int("n_samples", report.n_samples)
        .num("threshold", report.threshold)
        .int("accepted_steps", report.meta.accepted_steps)
        .int("rejected_steps", report.meta.rejected_steps)
        .flag("passed", report.passed);
    Ok(if report.passed {
        Outcome::Ok(payload)
    } else {
        let why = format!(
            "max relative error {} exceeds {}",
            report.max_rel_error, report.threshold
        );
        Outcome::Failed(payload, why)
    })
}

fn energy(args: &EnergyArgs) -> Result<Outcome> {
    let beam = BeamSpec::new(args.a, args.k)?;
    let theta = if args.full_theta {
        (0.0, std::f64::consts::PI)
    } else {
        let w = admissible_theta_window();
        (w.theta0, w.theta1)
    };
    let density = if args.magnitude { EnergyDensity::Magnitude } else { EnergyDensity::Intensity };
    let rep = shell_energy_converged(&beam, (args.rlo, args.rhi), theta, density)?;
    Ok(Outcome::Ok(
        Payload::new("energy")
            .num("r_lo", rep.r_lo)
            .num("r_hi", rep.r_hi)
            .num("theta_lo", rep.theta_lo)
            .num("theta_hi", rep.theta_hi)
            .num("value", rep.value)
            .int("n_radial", rep.n_radial)
            .int("n_angular", rep.n_angular)
            .text("density", match rep.density {
                EnergyDensity::Intensity => "intensity",
                EnergyDensity::Magnitude => "magnitude",
            }),
    ))
}

fn grid(args: &GridArgs) -> Result<Outcome> {
    let build = || -> Result<crate::grids::FieldGrid> {
        if let Some(fig) = &args.figure {
            let figure: Figure = fig.parse()?;
            let (nx, ny) = if figure.is_one_dimensional() {
                (1, args.ny.unwrap_or(DEFAULT_1D_RESOLUTION))
            } else {
                (args.nx.unwrap_or(DEFAULT_2D_RESOLUTION), args.ny.unwrap_or(DEFAULT_2D_RESOLUTION))
            };
            return figure_grid(figure, args.k, nx, ny);
        }
        let beam = BeamSpec::new(args.a, args.k)?;
        let nx = args.nx.unwrap_or(DEFAULT_2D_RESOLUTION);
        let ny = args.ny.unwrap_or(DEFAULT_2D_RESOLUTION);
        match args.field.expect("clap enforces --figure or --field") {
            FieldKind::Exact => {
                let x = Axis::new("R", args.xlo.unwrap_or(0.0), args.xhi.unwrap_or(10.0), nx)?;
                let y = Axis::new(
                    "theta",
                    args.ylo.unwrap_or(0.0),
                    args.yhi.unwrap_or(std::f64::consts::PI),
                    ny,
                )?;
                let generator = format!("exact k={} a={} over (R, theta)", beam.k, beam.a);
                sample_grid(
                    |r, t| Ok(eval_field(&beam, &SphericalPoint::new(r, t, 0.0)?)?.0),
                    x,
                    y,
                    generator,
                )
            }
            FieldKind::Paraxial => {
                let x = Axis::new("r", args.xlo.unwrap_or(0.0), args.xhi.unwrap_or(1.0), nx)?;
                let y = Axis::new("Z", args.ylo.unwrap_or(0.0), args.yhi.unwrap_or(1000.0), ny)?;
                let generator = format!("paraxial k={} a={} over (r, Z)", beam.k, beam.a);
                sample_grid(
                    |r, z| Ok(ComplexValue::new(paraxial_field(&beam, r, 0.0, z)?, 0.0)),
                    x,
                    y,
                    generator,
                )
            }
        }
    };

    let grid = match args.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::domain(format!("cannot start {n} worker threads: {e}")))?
            .install(build)?,
        None => build()?,
    };
    match args.format {
        Format::Csv => export_csv(&grid, &args.out)?,
        Format::Json => export_json(&grid, &args.out)?,
    }
    Ok(Outcome::Ok(
        Payload::new("grid")
            .text("out", args.out.display().to_string())
            .text("generator", grid.generator.clone())
            .int("nx", grid.x_axis.n)
            .int("ny", grid.y_axis.n)
            .int("masked", grid.masked_count()),
    ))
}
