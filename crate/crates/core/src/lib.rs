//! Guidance for reconfiguring a formation of single-thruster deputies about
//! an uncontrolled chief.
//!
//! The pipeline is: [`scenario::Scenario`] → [`model::Discretization`] →
//! [`formulation::build_program`] → a [`formguide_conic::Backend`] →
//! [`scp::run_scp`], with [`oracle`] replaying the result.

pub mod bench;
pub mod error;
pub mod formulation;
pub mod grid;
pub mod model;
pub mod oracle;
pub mod roe;
pub mod scenario;
pub mod scp;

pub use error::{CoreError, ScenarioError, ScpError};
pub use formulation::{FormulationKind, GuidanceSolution};
pub use grid::{ArcKind, BurnCount, TimeGrid};
pub use model::Discretization;
pub use scenario::Scenario;
pub use scp::{run_scp, ScpConfig, ScpOutcome};
