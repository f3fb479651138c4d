//! Audit of a solution against the exact (non-convex) problem.

use serde::{Deserialize, Serialize};

use super::GuidanceSolution;
use crate::model::Discretization;
use crate::scenario::Scenario;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckTolerances {
    /// Boundary and dynamics residual (m).
    pub state: f64,
    /// Acceleration (m/s²), for coast-arc thrust and the thrust bound.
    pub accel: f64,
    /// Keep-out distance shortfall (m).
    pub distance: f64,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        Self { state: 1e-3, accel: 1e-9, distance: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub boundary_residual: f64,
    pub dynamics_residual: f64,
    /// Largest acceleration on a coast arc (m/s²).
    pub off_arc_thrust: f64,
    /// Largest `‖u‖ − u_max` over forced arcs (m/s²); negative when inside.
    pub thrust_excess: f64,
    /// Largest `‖u‖ / u_max` over forced arcs.
    pub thrust_ratio: f64,
    /// Smallest deputy-deputy RTN distance and where (epoch, i, j).
    pub min_deputy_deputy: Option<(f64, usize, usize, usize)>,
    /// Smallest deputy-chief RTN distance and where (epoch, i).
    pub min_deputy_chief: Option<(f64, usize, usize)>,
    pub r_ca: f64,
    /// `(1/a²)ΣΣΔt²ūᵀū`.
    pub quadratic_cost: f64,
    /// `(1/a)ΣΣΔt‖ū‖`.
    pub norm_cost: f64,
    pub tolerances: CheckTolerances,
}

impl FeasibilityReport {
    pub fn collision_free(&self) -> bool {
        let ok = |d: f64| d + self.tolerances.distance >= self.r_ca;
        self.min_deputy_deputy.is_none_or(|m| ok(m.0)) && self.min_deputy_chief.is_none_or(|m| ok(m.0))
    }

    pub fn dynamics_ok(&self) -> bool {
        self.boundary_residual <= self.tolerances.state
            && self.dynamics_residual <= self.tolerances.state
            && self.off_arc_thrust <= self.tolerances.accel
    }

    pub fn thrust_ok(&self) -> bool {
        self.thrust_excess <= self.tolerances.accel
    }

    pub fn feasible(&self) -> bool {
        self.collision_free() && self.dynamics_ok() && self.thrust_ok()
    }
}

pub fn check_nonconvex_feasibility(
    solution: &GuidanceSolution,
    scenario: &Scenario,
    disc: &Discretization,
    tolerances: &CheckTolerances,
) -> FeasibilityReport {
    let a = disc.chief.a();
    let last = disc.num_epochs() - 1;
    let mut boundary: f64 = 0.0;
    let mut dynamics: f64 = 0.0;
    let mut off_arc: f64 = 0.0;
    let mut excess = f64::NEG_INFINITY;
    let mut ratio: f64 = 0.0;
    let mut quadratic_cost = 0.0;
    let mut norm_cost = 0.0;
    for (i, d) in scenario.deputies.iter().enumerate() {
        let (y, u) = (&solution.y[i], &solution.u[i]);
        boundary = boundary.max((y[0] - d.y0).amax()).max((y[last] - d.yf).amax());
        for (k, arc) in disc.arcs.iter().enumerate() {
            dynamics = dynamics.max((y[k + 1] - arc.propagate(&y[k], &u[k])).amax());
            let acc = u[k].norm() / a;
            if disc.is_forced(k) {
                excess = excess.max(acc - d.u_max());
                ratio = ratio.max(acc / d.u_max());
                quadratic_cost += arc.dt * arc.dt * u[k].norm_squared() / (a * a);
                norm_cost += arc.dt * u[k].norm() / a;
            } else {
                off_arc = off_arc.max(acc);
            }
        }
    }
    let mut min_dd: Option<(f64, usize, usize, usize)> = None;
    let mut min_dc: Option<(f64, usize, usize)> = None;
    for k in 0..disc.num_epochs() {
        let t = &disc.rtn[k];
        for i in 0..solution.y.len() {
            let dc = (t * solution.y[i][k]).norm();
            if min_dc.is_none_or(|m| dc < m.0) {
                min_dc = Some((dc, k, i));
            }
            for j in i + 1..solution.y.len() {
                let dd = (t * (solution.y[i][k] - solution.y[j][k])).norm();
                if min_dd.is_none_or(|m| dd < m.0) {
                    min_dd = Some((dd, k, i, j));
                }
            }
        }
    }
    FeasibilityReport {
        boundary_residual: boundary,
        dynamics_residual: dynamics,
        off_arc_thrust: off_arc,
        thrust_excess: excess,
        thrust_ratio: ratio,
        min_deputy_deputy: min_dd,
        min_deputy_chief: min_dc,
        r_ca: scenario.r_ca,
        quadratic_cost,
        norm_cost,
        tolerances: *tolerances,
    }
}
