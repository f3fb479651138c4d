use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ProgramError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("variable index {index} out of range ({num_vars} variables) in {context}")]
    Index { index: usize, num_vars: usize, context: String },
    #[error("variable {index} has empty bound interval [{lower}, {upper}]")]
    Bounds { index: usize, lower: f64, upper: f64 },
    #[error("non-convex objective: {0}")]
    NonConvex(String),
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unsupported format header {0:?}")]
    Header(String),
    #[error(transparent)]
    Program(#[from] ProgramError),
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("backend `{backend}` cannot solve {class} programs")]
    Capability { backend: String, class: String },
    #[error("invalid program: {0}")]
    Program(#[from] ProgramError),
    #[error("external solver: {0}")]
    External(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
