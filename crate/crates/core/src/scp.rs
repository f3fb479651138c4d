//! Sequential convex programming: solve, relinearize the keep-out rows about
//! the last trajectory, repeat.

use std::time::Duration;

use formguide_conic::{Backend, SolveOptions, SolveStatus};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, ScpError};
use crate::formulation::collision::{DEGENERACY_FLOOR, DEGENERACY_PERTURBATION};
use crate::formulation::{
    build_program, check_nonconvex_feasibility, BuildOptions, CheckTolerances, FormulationKind, GuidanceSolution,
    ProblemSize, Reference,
};
use crate::model::Discretization;
use crate::scenario::Scenario;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialGuess {
    UncontrolledPropagation,
    SolveWithoutCollision,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScpConfig {
    /// Convergence threshold on the reference displacement (m).
    pub epsilon: f64,
    pub max_iterations: usize,
    pub stop_on_collision_free: bool,
    pub initial_guess: InitialGuess,
    pub tolerances: CheckTolerances,
}

impl Default for ScpConfig {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            max_iterations: 10,
            stop_on_collision_free: true,
            initial_guess: InitialGuess::SolveWithoutCollision,
            tolerances: CheckTolerances::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The zeroth solve was already collision-free.
    ZerothCollisionFree,
    Converged,
    CollisionFree,
    IterationCap,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScpIterate {
    /// 0 is the initial guess.
    pub iteration: usize,
    pub objective: f64,
    pub delta_v: f64,
    /// Largest change of any reference state (m); NaN for the initial guess.
    pub displacement: f64,
    pub collision_free: bool,
    pub min_separation: f64,
    pub solver_time: Duration,
    pub solver_iterations: usize,
    /// `None` when no program was solved.
    pub status: Option<SolveStatus>,
    pub size: Option<ProblemSize>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScpTrace {
    pub iterates: Vec<ScpIterate>,
}

impl ScpTrace {
    pub fn solver_time(&self) -> Duration {
        self.iterates.iter().map(|i| i.solver_time).sum()
    }
}

#[derive(Clone, Debug)]
pub struct ScpOutcome {
    pub solution: GuidanceSolution,
    pub trace: ScpTrace,
    /// Iterations after the zeroth.
    pub iterations: usize,
    pub termination: Termination,
    /// Last solution passes the exact keep-out check at every grid epoch.
    pub certified: bool,
    /// Size of the last program solved.
    pub size: ProblemSize,
}

/// Nudges reference states whose pairwise or chief separation is degenerate.
pub fn desingularize(reference: &mut Reference, disc: &Discretization) {
    let n = reference.y.len();
    for k in 0..disc.num_epochs() {
        let t = &disc.rtn[k];
        for i in 0..n {
            if (t * reference.y[i][k]).norm() < DEGENERACY_FLOOR {
                reference.y[i][k][0] += DEGENERACY_PERTURBATION;
            }
            for j in 0..i {
                if (t * (reference.y[i][k] - reference.y[j][k])).norm() < DEGENERACY_FLOOR {
                    reference.y[i][k][0] += DEGENERACY_PERTURBATION;
                }
            }
        }
    }
}

struct Solved {
    solution: GuidanceSolution,
    size: ProblemSize,
    time: Duration,
    iterations: usize,
}

fn solve_once(
    kind: FormulationKind,
    scenario: &Scenario,
    disc: &Discretization,
    reference: Option<&Reference>,
    build: &BuildOptions,
    backend: &dyn Backend,
    options: &SolveOptions,
    iteration: usize,
) -> Result<Solved, ScpError> {
    let compiled = build_program(kind, scenario, disc, reference, build)?;
    let report = backend
        .solve(&compiled.program, options)
        .map_err(|source| ScpError::Backend { iteration, source })?;
    let Some(x) = report.primal.as_deref() else {
        return Err(ScpError::Subproblem { iteration, status: report.status });
    };
    let solution = GuidanceSolution::from_primal(&compiled, disc, x, report.status, report.objective)?;
    Ok(Solved { solution, size: compiled.size(), time: report.wall_time, iterations: report.iterations })
}

pub fn initial_reference(
    kind: FormulationKind,
    scenario: &Scenario,
    disc: &Discretization,
    strategy: InitialGuess,
    backend: &dyn Backend,
    options: &SolveOptions,
) -> Result<Reference, ScpError> {
    match strategy {
        InitialGuess::UncontrolledPropagation => Ok(Reference::uncontrolled(scenario, disc)),
        InitialGuess::SolveWithoutCollision => {
            let s = solve_once(kind, scenario, disc, None, &BuildOptions::without_collisions(), backend, options, 0)?;
            Ok(s.solution.as_reference())
        }
    }
}

pub fn run_scp(
    scenario: &Scenario,
    disc: &Discretization,
    kind: FormulationKind,
    config: &ScpConfig,
    backend: &dyn Backend,
    options: &SolveOptions,
) -> Result<ScpOutcome, ScpError> {
    run_scp_with(scenario, disc, kind, config, &BuildOptions::default(), backend, options)
}

pub fn run_scp_with(
    scenario: &Scenario,
    disc: &Discretization,
    kind: FormulationKind,
    config: &ScpConfig,
    build: &BuildOptions,
    backend: &dyn Backend,
    options: &SolveOptions,
) -> Result<ScpOutcome, ScpError> {
    if !(config.epsilon > 0.0) || config.max_iterations == 0 {
        return Err(ScpError::Build(CoreError::Grid("SCP needs epsilon > 0 and at least one iteration".into())));
    }
    let mut trace = ScpTrace::default();
    let check = |s: &GuidanceSolution| check_nonconvex_feasibility(s, scenario, disc, &config.tolerances);
    let min_sep = |r: &crate::formulation::FeasibilityReport| {
        let dd = r.min_deputy_deputy.map_or(f64::INFINITY, |m| m.0);
        let dc = r.min_deputy_chief.map_or(f64::INFINITY, |m| m.0);
        dd.min(dc)
    };

    let mut reference = match config.initial_guess {
        InitialGuess::UncontrolledPropagation => {
            let r = Reference::uncontrolled(scenario, disc);
            let sol = GuidanceSolution::assemble(
                kind,
                disc,
                r.y.clone(),
                vec![vec![Default::default(); disc.num_intervals()]; r.y.len()],
                None,
                SolveStatus::Optimal,
                f64::NAN,
            );
            let rep = check(&sol);
            trace.iterates.push(ScpIterate {
                iteration: 0,
                objective: f64::NAN,
                delta_v: 0.0,
                displacement: f64::NAN,
                collision_free: rep.collision_free(),
                min_separation: min_sep(&rep),
                solver_time: Duration::ZERO,
                solver_iterations: 0,
                status: None,
                size: None,
            });
            r
        }
        InitialGuess::SolveWithoutCollision => {
            let s = solve_once(kind, scenario, disc, None, &BuildOptions::without_collisions(), backend, options, 0)?;
            let rep = check(&s.solution);
            let free = rep.collision_free();
            trace.iterates.push(ScpIterate {
                iteration: 0,
                objective: s.solution.objective,
                delta_v: s.solution.delta_v,
                displacement: f64::NAN,
                collision_free: free,
                min_separation: min_sep(&rep),
                solver_time: s.time,
                solver_iterations: s.iterations,
                status: Some(s.solution.status),
                size: Some(s.size),
            });
            let r = s.solution.as_reference();
            if free && config.stop_on_collision_free {
                return Ok(ScpOutcome {
                    solution: s.solution,
                    trace,
                    iterations: 0,
                    termination: Termination::ZerothCollisionFree,
                    certified: true,
                    size: s.size,
                });
            }
            r
        }
    };

    for it in 1..=config.max_iterations {
        desingularize(&mut reference, disc);
        let s = solve_once(kind, scenario, disc, Some(&reference), build, backend, options, it)?;
        let displacement = reference.max_displacement(&s.solution.as_reference());
        let rep = check(&s.solution);
        let free = rep.collision_free();
        trace.iterates.push(ScpIterate {
            iteration: it,
            objective: s.solution.objective,
            delta_v: s.solution.delta_v,
            displacement,
            collision_free: free,
            min_separation: min_sep(&rep),
            solver_time: s.time,
            solver_iterations: s.iterations,
            status: Some(s.solution.status),
            size: Some(s.size),
        });
        reference = s.solution.as_reference();
        let termination = if displacement <= config.epsilon {
            Some(Termination::Converged)
        } else if free && config.stop_on_collision_free {
            Some(Termination::CollisionFree)
        } else if it == config.max_iterations {
            Some(Termination::IterationCap)
        } else {
            None
        };
        if let Some(termination) = termination {
            return Ok(ScpOutcome {
                solution: s.solution,
                trace,
                iterations: it,
                termination,
                certified: free,
                size: s.size,
            });
        }
    }
    unreachable!("the last iteration always terminates")
}
