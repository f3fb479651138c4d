use formguide_conic::{ProgramError, SolverError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid orbital elements: {0}")]
    InvalidElements(String),
    #[error("infeasible time grid: {0}")]
    Grid(String),
    #[error("invalid deputy `{name}`: {message}")]
    Deputy { name: String, message: String },
    #[error("invalid polyhedron: {0}")]
    Polyhedron(String),
    #[error("collision linearization requires a reference trajectory")]
    MissingReference,
    #[error("reference trajectory has shape {found:?}, expected {expected:?}")]
    ReferenceShape { expected: (usize, usize), found: (usize, usize) },
    #[error("degenerate collision reference at epoch {epoch} (pair {pair:?}); perturb the reference")]
    DegenerateReference { epoch: usize, pair: (usize, Option<usize>) },
    #[error("solution has wrong length {found}, expected {expected}")]
    SolutionShape { expected: usize, found: usize },
    #[error(transparent)]
    Program(#[from] ProgramError),
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("unsupported scenario format {0:?}")]
    Format(String),
    #[error("unknown bundled scenario {0:?}")]
    UnknownBundled(String),
    #[error(transparent)]
    Invalid(#[from] CoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("serialization failed: {0}")]
    Serialize(String),
}

#[derive(Debug, Error)]
pub enum ScpError {
    #[error(transparent)]
    Build(#[from] CoreError),
    #[error("iteration {iteration}: backend failed: {source}")]
    Backend { iteration: usize, source: SolverError },
    #[error("iteration {iteration}: subproblem {status}")]
    Subproblem { iteration: usize, status: formguide_conic::SolveStatus },
}

impl ScpError {
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            ScpError::Subproblem { status: formguide_conic::SolveStatus::Infeasible, .. }
        )
    }
}
