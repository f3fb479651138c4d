use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use formguide_conic::{Backend, ExternalProcess, InteriorPoint, SolveOptions, SolverCapabilities};
use formguide_core::formulation::ScaleFactor;
use formguide_core::scenario::resolve;
use formguide_core::scp::InitialGuess;
use formguide_core::{FormulationKind, Scenario, ScpConfig};

#[derive(Parser, Debug)]
#[command(name = "formguide", version, about = "Fuel-optimal, collision-free formation reconfiguration planning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Plan one scenario and write trajectory, control and distance profiles.
    Solve(SolveArgs),
    /// Time every (scenario, formulation, backend) cell.
    Bench(BenchArgs),
    /// Time the planner while the number of deputies grows.
    #[command(name = "sweep-n")]
    SweepN(SweepArgs),
    /// Write the zeroth convex program of a scenario in the text format.
    Export(ExportArgs),
    /// Replay a solution directory against a scenario.
    Check(CheckArgs),
    /// Print the forced/coast time grid of a scenario.
    Grid(GridArgs),
    /// Solve a program read from stdin and print the solution record.
    #[command(name = "solve-program")]
    SolveProgram(SolveProgramArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Qcqp,
    Socp,
    Lp,
    #[value(name = "lp-scaled")]
    LpScaled,
}

impl From<Kind> for FormulationKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Qcqp => FormulationKind::Qcqp,
            Kind::Socp => FormulationKind::Socp,
            Kind::Lp => FormulationKind::Lp,
            Kind::LpScaled => FormulationKind::LpScaled,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Guess {
    /// Solve once without keep-out rows.
    Solve,
    /// Drift every deputy from its initial state.
    Uncontrolled,
}

#[derive(Args, Debug, Clone)]
pub struct PolyArgs {
    /// Transverse-normal facet count of the thrust polyhedron.
    #[arg(long)]
    pub ndir: Option<usize>,
    /// Fixed polyhedron scale factor.
    #[arg(long, conflicts_with = "auto_scale")]
    pub scale_c: Option<f64>,
    /// Compute the smallest inscribing scale factor.
    #[arg(long)]
    pub auto_scale: bool,
}

impl PolyArgs {
    pub fn apply(&self, scenario: &mut Scenario) {
        if let Some(n) = self.ndir {
            scenario.poly.n_dir = n;
        }
        if let Some(c) = self.scale_c {
            scenario.poly.scale_c = ScaleFactor::Fixed(c);
        }
        if self.auto_scale {
            scenario.poly.scale_c = ScaleFactor::Auto;
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct ScpArgs {
    /// Reference-convergence threshold (m).
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    #[arg(long, default_value_t = 10)]
    pub max_iter: usize,
    /// Stop as soon as an iterate passes the exact keep-out check.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub stop_on_collision_free: bool,
    #[arg(long, value_enum, default_value_t = Guess::Solve)]
    pub initial_guess: Guess,
}

impl ScpArgs {
    pub fn config(&self) -> ScpConfig {
        ScpConfig {
            epsilon: self.eps,
            max_iterations: self.max_iter,
            stop_on_collision_free: self.stop_on_collision_free,
            initial_guess: match self.initial_guess {
                Guess::Solve => InitialGuess::SolveWithoutCollision,
                Guess::Uncontrolled => InitialGuess::UncontrolledPropagation,
            },
            ..ScpConfig::default()
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// `ipm`, `ipm-lp`, or `external:<command> [args..]`.
    #[arg(long, default_value = "ipm")]
    pub backend: String,
    /// Per-subproblem wall-time cap (s).
    #[arg(long, default_value_t = 30.0)]
    pub time_limit: f64,
}

impl SolverArgs {
    pub fn options(&self) -> Result<SolveOptions> {
        if !(self.time_limit > 0.0) {
            bail!("--time-limit must be positive");
        }
        Ok(SolveOptions { time_limit: Some(Duration::from_secs_f64(self.time_limit)), ..SolveOptions::default() })
    }
}

pub fn backend(spec: &str) -> Result<Box<dyn Backend>> {
    match spec {
        "ipm" => Ok(Box::new(InteriorPoint::new())),
        "ipm-lp" => Ok(Box::new(InteriorPoint::lp_only())),
        _ => {
            let Some(cmd) = spec.strip_prefix("external:") else {
                bail!("unknown backend `{spec}` (expected ipm, ipm-lp or external:<command>)");
            };
            let mut words = cmd.split_whitespace();
            let program = words.next().context("external backend needs a command")?;
            let caps = SolverCapabilities { supports_lp: true, supports_soc: true, supports_quadratic_cost: true };
            Ok(Box::new(ExternalProcess::new(program, words.map(String::from).collect(), caps)))
        }
    }
}

pub fn load_scenario(name: &str) -> Result<Scenario> {
    resolve(name).with_context(|| format!("loading scenario `{name}`"))
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Bundled scenario name or path to a scenario file.
    #[arg(long, default_value = "case-study")]
    pub scenario: String,
    #[arg(long, value_enum, default_value_t = Kind::LpScaled)]
    pub kind: Kind,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub scp: ScpArgs,
    #[command(flatten)]
    pub poly: PolyArgs,
    /// Output directory for the profiles and summary.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Scenarios to run; defaults to the four benchmark reconfigurations.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub scenario: Vec<String>,
    #[arg(long, value_enum, num_args = 1.., value_delimiter = ',', default_values_t = [Kind::Qcqp, Kind::Socp, Kind::LpScaled])]
    pub kind: Vec<Kind>,
    /// Backends to compare; repeat the flag for several.
    #[arg(long = "backend", default_values_t = ["ipm".to_string()])]
    pub backends: Vec<String>,
    #[arg(long, default_value_t = 30.0)]
    pub time_limit: f64,
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    /// Worker threads for independent cells.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[command(flatten)]
    pub scp: ScpArgs,
    #[command(flatten)]
    pub poly: PolyArgs,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Scenario supplying the chief, thruster and timing.
    #[arg(long, default_value = "case-study")]
    pub scenario: String,
    #[arg(long, default_value_t = 1)]
    pub n_min: usize,
    #[arg(long, default_value_t = 12)]
    pub n_max: usize,
    /// Along-track slot spacing (m).
    #[arg(long, default_value_t = 200.0)]
    pub spacing: f64,
    /// Final projected-circular-orbit radius (m).
    #[arg(long, default_value_t = 500.0)]
    pub pco_radius: f64,
    #[arg(long, value_enum, default_value_t = Kind::Socp)]
    pub kind: Kind,
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub scp: ScpArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[arg(long, default_value = "case-study")]
    pub scenario: String,
    #[arg(long, value_enum, default_value_t = Kind::LpScaled)]
    pub kind: Kind,
    /// Add keep-out rows linearized about the uncontrolled drift.
    #[arg(long)]
    pub collisions: bool,
    #[command(flatten)]
    pub poly: PolyArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long, default_value = "case-study")]
    pub scenario: String,
    /// Directory holding controls.csv and, optionally, trajectory.csv.
    #[arg(long)]
    pub solution: PathBuf,
    /// Print the full report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct GridArgs {
    #[arg(long, default_value = "case-study")]
    pub scenario: String,
}

#[derive(Args, Debug)]
pub struct SolveProgramArgs {
    /// In-process backend used for the solve.
    #[arg(long, default_value = "ipm")]
    pub backend: String,
}
