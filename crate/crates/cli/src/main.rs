mod args;
mod artifacts;

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use formguide_conic::text::{write_solution, SolutionText};
use formguide_conic::{parse_program, write_program, SolveOptions};
use formguide_core::bench::{bench, spearman, sweep_n, BenchRow, SweepSettings};
use formguide_core::formulation::{build_program, BuildOptions, CheckTolerances, Reference};
use formguide_core::oracle::replay_trajectory;
use formguide_core::scenario::bundled_names;
use formguide_core::{ArcKind, FormulationKind, ScpError};
use serde_json::json;

use args::{backend, load_scenario, BenchArgs, CheckArgs, Cli, Command, ExportArgs, GridArgs, SolveArgs, SolveProgramArgs, SweepArgs};
use artifacts::{DeputySummary, Summary};

const EXIT_UNCERTIFIED: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_BACKEND: u8 = 4;

/// An error with its exit code and a short machine-readable class.
struct Failure {
    code: u8,
    class: &'static str,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Self { code: 1, class: "input", error }
    }
}

impl From<ScpError> for Failure {
    fn from(e: ScpError) -> Self {
        let (code, class) = match &e {
            _ if e.is_infeasible() => (EXIT_INFEASIBLE, "infeasible"),
            ScpError::Build(_) => (1, "build"),
            ScpError::Backend { .. } | ScpError::Subproblem { .. } => (EXIT_BACKEND, "backend"),
        };
        Self { code, class, error: e.into() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Bench(a) => run_bench(a).map_err(Failure::from),
        Command::SweepN(a) => run_sweep(a).map_err(Failure::from),
        Command::Export(a) => export(a).map_err(Failure::from),
        Command::Check(a) => check(a).map_err(Failure::from),
        Command::Grid(a) => grid(a).map_err(Failure::from),
        Command::SolveProgram(a) => solve_program(a).map_err(Failure::from),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            let message = format!("{:#}", f.error);
            eprintln!("{}", json!({ "error": f.class, "message": message }));
            ExitCode::from(f.code)
        }
    }
}

fn solve(a: SolveArgs) -> Result<u8, Failure> {
    let mut scenario = load_scenario(&a.scenario)?;
    a.poly.apply(&mut scenario);
    let disc = scenario.discretize().context("building the time grid")?;
    let kind = FormulationKind::from(a.kind);
    let backend = backend(&a.solver.backend)?;
    if !backend.capabilities().admits(kind.class()) {
        return Err(Failure {
            code: EXIT_BACKEND,
            class: "backend",
            error: anyhow::anyhow!("backend `{}` cannot solve {kind} programs", backend.name()),
        });
    }
    let options = a.solver.options()?;
    let config = a.scp.config();
    let outcome = formguide_core::run_scp(&scenario, &disc, kind, &config, backend.as_ref(), &options)?;

    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    artifacts::write_solution(&a.out, &outcome.solution, &disc)?;
    artifacts::write_trace(&a.out.join("trace.csv"), &outcome)?;
    let min_separation = outcome.trace.iterates.last().map_or(f64::NAN, |it| it.min_separation);
    let summary = Summary {
        scenario: scenario.name.clone(),
        kind,
        backend: backend.name().to_string(),
        delta_v: outcome.solution.delta_v,
        deputies: scenario
            .deputies
            .iter()
            .zip(&outcome.solution.delta_v_per_deputy)
            .map(|(d, &dv)| DeputySummary { name: d.name.clone(), delta_v: dv })
            .collect(),
        scp_iterations: outcome.iterations,
        termination: outcome.termination,
        certified: outcome.certified,
        status: outcome.solution.status.to_string(),
        size: outcome.size,
        solver_time_s: outcome.trace.solver_time().as_secs_f64(),
        min_separation_m: min_separation,
        r_ca_m: scenario.r_ca,
        scale_c: (kind == FormulationKind::LpScaled).then(|| scenario.poly.resolve_scale().ok()).flatten(),
    };
    artifacts::write_summary(&a.out.join("summary.json"), &summary)?;

    println!(
        "{} {kind}: ΔV {:.4} m/s, {} SCP iteration(s), {:?}, min separation {:.2} m, {}",
        scenario.name,
        outcome.solution.delta_v,
        outcome.iterations,
        outcome.termination,
        min_separation,
        if outcome.certified { "certified" } else { "NOT certified" }
    );
    for w in scenario.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(if outcome.certified { 0 } else { EXIT_UNCERTIFIED })
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(text: &str) -> Result<()> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn write_rows(out: Option<&Path>, rows: impl IntoIterator<Item = impl serde::Serialize>) -> Result<()> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn run_bench(a: BenchArgs) -> Result<u8> {
    if a.repeats == 0 {
        bail!("--repeats must be at least 1");
    }
    let names: Vec<String> = if a.scenario.is_empty() {
        bundled_names().iter().filter(|n| n.starts_with("reconfig")).map(|n| n.to_string()).collect()
    } else {
        a.scenario.clone()
    };
    let scenarios = names
        .iter()
        .map(|n| {
            let mut s = load_scenario(n)?;
            a.poly.apply(&mut s);
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    let kinds: Vec<FormulationKind> = a.kind.iter().map(|&k| k.into()).collect();
    let options = args::SolverArgs { backend: String::new(), time_limit: a.time_limit }.options()?;
    let config = a.scp.config();
    let mut rows: Vec<BenchRow> = Vec::new();
    for spec in &a.backends {
        let b = backend(spec)?;
        rows.extend(bench(&scenarios, &kinds, b.as_ref(), &config, &options, a.repeats, a.threads));
    }
    write_rows(a.out.as_deref(), &rows)?;
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    if failed > 0 {
        eprintln!("{failed} of {} cells failed; see the status column", rows.len());
    }
    Ok(0)
}

fn run_sweep(a: SweepArgs) -> Result<u8> {
    if a.n_min == 0 || a.n_max > 20 || a.n_min > a.n_max {
        bail!("deputy range {}..={} must lie within 1..=20", a.n_min, a.n_max);
    }
    if a.repeats == 0 {
        bail!("--repeats must be at least 1");
    }
    let base = load_scenario(&a.scenario)?;
    let settings = SweepSettings { spacing: a.spacing, pco_radius: a.pco_radius, kind: a.kind.into(), repeats: a.repeats };
    let b = backend(&a.solver.backend)?;
    let rows = sweep_n(&base, a.n_min..=a.n_max, &settings, b.as_ref(), &a.scp.config(), &a.solver.options()?);
    write_rows(a.out.as_deref(), &rows)?;
    let ok: Vec<&BenchRow> = rows.iter().filter(|r| r.status == "ok").collect();
    if ok.len() >= 2 {
        let n: Vec<f64> = ok.iter().map(|r| r.deputies as f64).collect();
        let t: Vec<f64> = ok.iter().map(|r| r.mean_solver_time).collect();
        eprintln!("Spearman(N, solve time) = {:.3}", spearman(&n, &t));
    }
    Ok(0)
}

fn export(a: ExportArgs) -> Result<u8> {
    let mut scenario = load_scenario(&a.scenario)?;
    a.poly.apply(&mut scenario);
    let disc = scenario.discretize()?;
    let reference = Reference::uncontrolled(&scenario, &disc);
    let options = if a.collisions { BuildOptions::default() } else { BuildOptions::without_collisions() };
    let compiled = build_program(a.kind.into(), &scenario, &disc, Some(&reference), &options)?;
    let text = write_program(&compiled.program);
    match &a.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => emit(&text)?,
    }
    let size = compiled.size();
    eprintln!("{}: {} variables, {} constraints", compiled.program.name, size.variables, size.constraints);
    Ok(0)
}

fn check(a: CheckArgs) -> Result<u8> {
    let scenario = load_scenario(&a.scenario)?;
    let disc = scenario.discretize()?;
    let solution = artifacts::read_solution(&a.solution, &scenario, &disc)?;
    let report = replay_trajectory(&solution, &scenario, &disc, &CheckTolerances::default());
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        let f = &report.feasibility;
        let flag = |ok: bool| if ok { "ok" } else { "VIOLATED" };
        println!("replay error        {:.3e} m  {}", report.replay_error, flag(report.replay_ok()));
        let worst = report.terminal_mismatch.iter().cloned().fold(0.0, f64::max);
        println!("terminal mismatch   {worst:.3e} m  {}", flag(report.terminal_ok()));
        let tol = &f.tolerances;
        println!("boundary residual   {:.3e} m  {}", f.boundary_residual, flag(f.boundary_residual <= tol.state));
        println!("dynamics residual   {:.3e} m  {}", f.dynamics_residual, flag(f.dynamics_residual <= tol.state));
        println!("coast thrust        {:.3e} m/s²  {}", f.off_arc_thrust, flag(f.off_arc_thrust <= tol.accel));
        println!("thrust ratio        {:.6}  {}", f.thrust_ratio, flag(f.thrust_ok()));
        if let Some((d, k, i, j)) = f.min_deputy_deputy {
            println!("min deputy-deputy   {d:.3} m (epoch {k}, {i}-{j})");
        }
        if let Some((d, k, i)) = f.min_deputy_chief {
            println!("min deputy-chief    {d:.3} m (epoch {k}, deputy {i})");
        }
        println!("keep-out {:.1} m     {}", f.r_ca, flag(f.collision_free()));
        println!("ΔV                  {:.6} m/s (R {:.4}, T {:.4}, N {:.4})", report.delta_v, report.delta_v_axes[0], report.delta_v_axes[1], report.delta_v_axes[2]);
        println!("{}", if report.passed() { "PASSED" } else { "FAILED" });
    }
    Ok(if report.passed() { 0 } else { EXIT_UNCERTIFIED })
}

fn grid(a: GridArgs) -> Result<u8> {
    let scenario = load_scenario(&a.scenario)?;
    let g = scenario.time_grid()?;
    let t = g.epochs();
    let mut out = format!(
        "{}: {} burns, {} arcs, {:.1} s total, coast floor {:.1} s\n",
        scenario.name,
        g.n_burns(),
        g.num_intervals(),
        g.duration(),
        scenario.min_coast()?
    );
    out += &format!("{:>4}  {:<7} {:>12} {:>12} {:>10}\n", "arc", "kind", "start_s", "end_s", "dt_s");
    for k in 0..g.num_intervals() {
        let kind = match g.kind(k) {
            ArcKind::Forced => "forced",
            ArcKind::Natural => "coast",
        };
        out += &format!("{k:>4}  {kind:<7} {:>12.3} {:>12.3} {:>10.3}\n", t[k], t[k + 1], g.dt(k));
    }
    emit(&out)?;
    Ok(0)
}

fn solve_program(a: SolveProgramArgs) -> Result<u8> {
    let mut text = String::new();
    io::stdin().read_to_string(&mut text)?;
    let program = parse_program(&text)?;
    let b = backend(&a.backend)?;
    let mut options = SolveOptions::default();
    if let Some(t) = std::env::var("FORMGUIDE_TOLERANCE").ok().and_then(|v| v.parse().ok()) {
        options.tolerance = Some(t);
    }
    if let Some(t) = std::env::var("FORMGUIDE_TIME_LIMIT").ok().and_then(|v| v.parse().ok()) {
        options.time_limit = Some(std::time::Duration::from_secs_f64(t));
    }
    if let Some(n) = std::env::var("FORMGUIDE_ITERATION_LIMIT").ok().and_then(|v| v.parse().ok()) {
        options.iteration_limit = n;
    }
    let report = b.solve(&program, &options)?;
    let record = SolutionText { status: report.status, iterations: report.iterations, primal: report.primal };
    emit(&write_solution(&record))?;
    Ok(0)
}
