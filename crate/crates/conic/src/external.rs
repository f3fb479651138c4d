//! Adapter for solvers running as a separate process.
//!
//! The program is written to the child's stdin in the text format of
//! [`crate::text`]; the child answers on stdout with a solution record.

use std::io::Write;
use std::process::{Command, Stdio};
use std::time::Instant;

use crate::backend::{Backend, SolveOptions, SolveReport, SolveStatus, SolverCapabilities};
use crate::error::SolverError;
use crate::program::ConicProgram;
use crate::text::{parse_solution, write_program};

#[derive(Clone, Debug)]
pub struct ExternalProcess {
    pub name: String,
    pub program: String,
    pub args: Vec<String>,
    pub capabilities: SolverCapabilities,
}

impl ExternalProcess {
    pub fn new(program: impl Into<String>, args: Vec<String>, capabilities: SolverCapabilities) -> Self {
        let program = program.into();
        Self { name: format!("external:{program}"), program, args, capabilities }
    }
}

impl Backend for ExternalProcess {
    fn name(&self) -> &str {
        &self.name
    }

    fn capabilities(&self) -> SolverCapabilities {
        self.capabilities
    }

    fn solve_unchecked(&self, program: &ConicProgram, options: &SolveOptions) -> Result<SolveReport, SolverError> {
        let start = Instant::now();
        let mut cmd = Command::new(&self.program);
        cmd.args(&self.args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
        if let Some(t) = options.tolerance {
            cmd.env("FORMGUIDE_TOLERANCE", t.to_string());
        }
        if let Some(t) = options.time_limit {
            cmd.env("FORMGUIDE_TIME_LIMIT", t.as_secs_f64().to_string());
        }
        cmd.env("FORMGUIDE_ITERATION_LIMIT", options.iteration_limit.to_string());
        let mut child = cmd.spawn()?;
        let text = write_program(program);
        {
            let mut stdin = child.stdin.take().expect("piped stdin");
            stdin.write_all(text.as_bytes())?;
        }
        let out = child.wait_with_output()?;
        if !out.status.success() {
            return Err(SolverError::External(format!(
                "`{}` exited with {}: {}",
                self.program,
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        let stdout = String::from_utf8_lossy(&out.stdout);
        let sol = parse_solution(&stdout).map_err(|e| SolverError::External(format!("bad solution record: {e}")))?;
        let primal = match (sol.status, sol.primal) {
            (SolveStatus::Optimal, Some(x)) if x.len() == program.num_vars() => Some(x),
            (SolveStatus::Optimal, _) => {
                return Err(SolverError::External("optimal status without a matching primal".into()));
            }
            _ => None,
        };
        let objective = primal.as_ref().map_or(f64::NAN, |x| program.objective(x));
        let (pres, dres) = match &primal {
            Some(x) => (program.violations(x).scaled_max(), f64::NAN),
            None => (f64::NAN, f64::NAN),
        };
        Ok(SolveReport {
            status: sol.status,
            objective,
            primal,
            wall_time: start.elapsed(),
            iterations: sol.iterations,
            primal_residual: pres,
            dual_residual: dres,
            reduced_accuracy: false,
        })
    }
}
