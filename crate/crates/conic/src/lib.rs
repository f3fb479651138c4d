//! Standard-form conic programs (linear cost, linear rows, second-order cones,
//! variable bounds, optional diagonal quadratic cost) and deterministic
//! solvers for them.

pub mod backend;
pub mod cones;
mod error;
pub mod external;
pub mod ipm;
pub mod ldl;
pub mod program;
pub mod sparse;
pub mod standard;
pub mod text;

pub use backend::{Backend, InteriorPoint, SolveOptions, SolveReport, SolveStatus, SolverCapabilities};
pub use error::{ParseError, ProgramError, SolverError};
pub use external::ExternalProcess;
pub use program::{ConeHead, ConicProgram, LinearRow, ProgramClass, SecondOrderCone, Violations};
pub use text::{parse_program, write_program, FORMAT_HEADER};
