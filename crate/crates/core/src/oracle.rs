//! Independent checks of a solution: replay of the controls through the
//! dynamics, the exact constraint audit and a per-axis ΔV split.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::formulation::polyhedron::{enumerate_vertices_brute_force, PolyhedronSpec};
use crate::formulation::{check_nonconvex_feasibility, CheckTolerances, FeasibilityReport, GuidanceSolution};
use crate::model::Discretization;
use crate::roe::{rtn_map, stm, control_convolution, Vec3, Vec6};
use crate::scenario::Scenario;

/// RTN distance between deputy `i` and deputy `j` (or the chief) at an epoch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub epoch: usize,
    pub time: f64,
    pub i: usize,
    pub j: Option<usize>,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Largest `|Y − replay(Y)|` component (m).
    pub replay_error: f64,
    /// Replayed final state minus the required one, per deputy (m).
    pub terminal_mismatch: Vec<f64>,
    pub feasibility: FeasibilityReport,
    pub delta_v: f64,
    pub delta_v_per_deputy: Vec<f64>,
    /// `Σ Δt|ū_c|/a` per axis (R, T, N).
    pub delta_v_axes: [f64; 3],
    pub separations: Vec<Separation>,
    pub replay_tolerance: f64,
}

impl ValidationReport {
    pub fn replay_ok(&self) -> bool {
        self.replay_error <= self.replay_tolerance
    }

    pub fn terminal_ok(&self) -> bool {
        self.terminal_mismatch.iter().all(|&e| e <= self.replay_tolerance)
    }

    pub fn passed(&self) -> bool {
        self.replay_ok() && self.terminal_ok() && self.feasibility.feasible()
    }
}

pub fn replay_trajectory(
    solution: &GuidanceSolution,
    scenario: &Scenario,
    disc: &Discretization,
    tolerances: &CheckTolerances,
) -> ValidationReport {
    let a = disc.chief.a();
    let last = disc.num_epochs() - 1;
    let mut replay_error: f64 = 0.0;
    let mut terminal = Vec::new();
    let mut per_deputy = Vec::new();
    let mut axes = [0.0; 3];
    for (i, d) in scenario.deputies.iter().enumerate() {
        let replay = disc.propagate(&d.y0, &solution.u[i]);
        for (p, q) in replay.iter().zip(&solution.y[i]) {
            replay_error = replay_error.max((p - q).amax());
        }
        terminal.push((replay[last] - d.yf).amax());
        let mut dv = 0.0;
        for k in disc.grid.forced_arcs() {
            let dt = disc.grid.dt(k);
            let u = solution.u[i][k];
            dv += dt * u.norm() / a;
            for c in 0..3 {
                axes[c] += dt * u[c].abs() / a;
            }
        }
        per_deputy.push(dv);
    }
    let mut separations = Vec::new();
    let t = disc.grid.epochs();
    for k in 0..disc.num_epochs() {
        let map = &disc.rtn[k];
        for i in 0..solution.y.len() {
            separations.push(Separation { epoch: k, time: t[k], i, j: None, distance: (map * solution.y[i][k]).norm() });
            for j in i + 1..solution.y.len() {
                let d = (map * (solution.y[i][k] - solution.y[j][k])).norm();
                separations.push(Separation { epoch: k, time: t[k], i, j: Some(j), distance: d });
            }
        }
    }
    ValidationReport {
        replay_error,
        terminal_mismatch: terminal,
        feasibility: check_nonconvex_feasibility(solution, scenario, disc, tolerances),
        delta_v: per_deputy.iter().sum(),
        delta_v_per_deputy: per_deputy,
        delta_v_axes: axes,
        separations,
        replay_tolerance: tolerances.state,
    }
}

/// Separations sampled `subsamples` times inside every arc, propagating from
/// the arc's start epoch with the arc's control.
pub fn dense_separations(solution: &GuidanceSolution, disc: &Discretization, subsamples: usize) -> Vec<Separation> {
    let t = disc.grid.epochs();
    let mut out = Vec::new();
    for k in 0..disc.num_intervals() {
        for s in 0..subsamples.max(1) {
            let tau = t[k] + (t[k + 1] - t[k]) * s as f64 / subsamples.max(1) as f64;
            let phi = stm(&disc.chief, t[k], tau);
            let psi = if tau > t[k] { control_convolution(&disc.chief, t[k], tau) } else { Default::default() };
            let states: Vec<Vec6> = (0..solution.y.len())
                .map(|i| {
                    let u: Vec3 = solution.u[i][k];
                    phi * solution.y[i][k] + psi * u
                })
                .collect();
            let map = rtn_map(&disc.chief, tau);
            for i in 0..states.len() {
                out.push(Separation { epoch: k, time: tau, i, j: None, distance: (map * states[i]).norm() });
                for j in i + 1..states.len() {
                    let d = (map * (states[i] - states[j])).norm();
                    out.push(Separation { epoch: k, time: tau, i, j: Some(j), distance: d });
                }
            }
        }
    }
    out
}

/// Vertices of the unit-slack facet system, by brute force over facet triples.
pub fn vertex_enumerate_polyhedron(poly: &PolyhedronSpec) -> Result<Vec<Vec3>, CoreError> {
    poly.validate()?;
    enumerate_vertices_brute_force(poly.n_dir)
}
