//! Backend contract and the in-repo interior-point backends.

use std::fmt;
use std::time::{Duration, Instant};

use crate::error::SolverError;
use crate::ipm::{self, Outcome, Settings};
use crate::program::{ConicProgram, ProgramClass};
use crate::standard::{Presolved, StandardForm};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverCapabilities {
    pub supports_lp: bool,
    pub supports_soc: bool,
    pub supports_quadratic_cost: bool,
}

impl SolverCapabilities {
    pub fn admits(&self, class: ProgramClass) -> bool {
        match class {
            ProgramClass::Linear => self.supports_lp,
            ProgramClass::SecondOrderCone => self.supports_soc,
            ProgramClass::QuadraticCost => self.supports_quadratic_cost,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    /// The objective is unbounded below (dual infeasible).
    Unbounded,
    IterationLimit,
    TimeLimit,
    NumericalFailure,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::IterationLimit => "iteration_limit",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::NumericalFailure => "numerical_failure",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for SolveStatus {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "optimal" => SolveStatus::Optimal,
            "infeasible" => SolveStatus::Infeasible,
            "unbounded" => SolveStatus::Unbounded,
            "iteration_limit" => SolveStatus::IterationLimit,
            "time_limit" => SolveStatus::TimeLimit,
            "numerical_failure" => SolveStatus::NumericalFailure,
            other => return Err(format!("unknown status {other:?}")),
        })
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Feasibility and gap tolerance; `None` picks the class default
    /// (1e-8 for LP, 1e-7 with cones).
    pub tolerance: Option<f64>,
    pub time_limit: Option<Duration>,
    pub iteration_limit: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tolerance: None, time_limit: Some(Duration::from_secs(30)), iteration_limit: 100 }
    }
}

impl SolveOptions {
    pub fn tolerance_for(&self, class: ProgramClass) -> f64 {
        self.tolerance.unwrap_or(match class {
            ProgramClass::Linear => 1e-8,
            _ => 1e-7,
        })
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Objective of the original program at `primal` (NaN without a primal).
    pub objective: f64,
    /// Present only when `status` is `Optimal`.
    pub primal: Option<Vec<f64>>,
    pub wall_time: Duration,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Optimal only to a relaxed tolerance after the method stalled.
    pub reduced_accuracy: bool,
}

impl SolveReport {
    fn without_primal(status: SolveStatus, wall_time: Duration) -> Self {
        Self {
            status,
            objective: f64::NAN,
            primal: None,
            wall_time,
            iterations: 0,
            primal_residual: f64::NAN,
            dual_residual: f64::NAN,
            reduced_accuracy: false,
        }
    }
}

pub trait Backend: Send + Sync {
    fn name(&self) -> &str;
    fn capabilities(&self) -> SolverCapabilities;
    fn solve_unchecked(&self, program: &ConicProgram, options: &SolveOptions) -> Result<SolveReport, SolverError>;

    /// Validates the program and the capability match, then solves.
    fn solve(&self, program: &ConicProgram, options: &SolveOptions) -> Result<SolveReport, SolverError> {
        program.validate()?;
        let class = program.class();
        if !self.capabilities().admits(class) {
            return Err(SolverError::Capability {
                backend: self.name().to_string(),
                class: format!("{class:?}"),
            });
        }
        self.solve_unchecked(program, options)
    }
}

/// Homogeneous self-dual interior-point backend.
#[derive(Clone, Debug)]
pub struct InteriorPoint {
    name: String,
    caps: SolverCapabilities,
}

impl InteriorPoint {
    /// Full conic backend: LP, SOCP and diagonal quadratic costs (through
    /// their second-order cone epigraph).
    pub fn new() -> Self {
        Self {
            name: "ipm".into(),
            caps: SolverCapabilities { supports_lp: true, supports_soc: true, supports_quadratic_cost: true },
        }
    }

    /// Linear programs only.
    pub fn lp_only() -> Self {
        Self {
            name: "ipm-lp".into(),
            caps: SolverCapabilities { supports_lp: true, supports_soc: false, supports_quadratic_cost: false },
        }
    }
}

impl Default for InteriorPoint {
    fn default() -> Self {
        Self::new()
    }
}

impl Backend for InteriorPoint {
    fn name(&self) -> &str {
        &self.name
    }

    fn capabilities(&self) -> SolverCapabilities {
        self.caps
    }

    fn solve_unchecked(&self, program: &ConicProgram, options: &SolveOptions) -> Result<SolveReport, SolverError> {
        let start = Instant::now();
        let sf = match StandardForm::presolve(program) {
            Presolved::Form(sf) => sf,
            Presolved::Infeasible(_) => return Ok(SolveReport::without_primal(SolveStatus::Infeasible, start.elapsed())),
            Presolved::Unbounded(_) => return Ok(SolveReport::without_primal(SolveStatus::Unbounded, start.elapsed())),
        };
        let tol = options.tolerance_for(program.class());
        let settings = Settings {
            tol_feas: tol,
            tol_gap: tol,
            max_iter: options.iteration_limit,
            time_limit: options.time_limit,
            ..Settings::default()
        };
        let r = ipm::solve(&sf, &settings);
        let status = match r.outcome {
            Outcome::Optimal => SolveStatus::Optimal,
            Outcome::PrimalInfeasible => SolveStatus::Infeasible,
            Outcome::DualInfeasible => SolveStatus::Unbounded,
            Outcome::IterationLimit => SolveStatus::IterationLimit,
            Outcome::TimeLimit => SolveStatus::TimeLimit,
            Outcome::NumericalFailure => SolveStatus::NumericalFailure,
        };
        let (primal, objective) = if status == SolveStatus::Optimal {
            let x = sf.recover(&r.x);
            let obj = program.objective(&x);
            (Some(x), obj)
        } else {
            (None, f64::NAN)
        };
        Ok(SolveReport {
            status,
            objective,
            primal,
            wall_time: start.elapsed(),
            iterations: r.iterations,
            primal_residual: r.primal_residual,
            dual_residual: r.dual_residual,
            reduced_accuracy: r.reduced_accuracy,
        })
    }
}
