//! Compilation of a scenario into conic programs.
//!
//! Decision vector layout, deputy `i`, epoch `k`, arc `k`, forced arc `l`:
//! `[ ȳ(i,k) ; ū(i,k) ; Γ(i,l) ]`, each block deputy-major. Boundary states
//! and coast-arc controls are pinned through variable bounds.

pub mod check;
pub mod collision;
pub mod polyhedron;

use std::fmt;
use std::str::FromStr;

use formguide_conic::{ConeHead, ConicProgram, ProgramClass, SolveStatus};
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::model::Discretization;
use crate::roe::{Vec3, Vec6};
use crate::scenario::Scenario;

pub use check::{check_nonconvex_feasibility, CheckTolerances, FeasibilityReport};
pub use collision::{linearize_collision, CollisionRow};
pub use polyhedron::{compute_scale_factor, PolyhedronSpec, ScaleFactor};

#[derive(Clone, Debug, PartialEq)]
pub struct DeputySpec {
    pub name: String,
    /// Initial dimensional ROE (m).
    pub y0: Vec6,
    /// Required final dimensional ROE (m).
    pub yf: Vec6,
    /// Thrust (N).
    pub f_max: f64,
    /// Mass (kg).
    pub mass: f64,
}

impl DeputySpec {
    pub fn u_max(&self) -> f64 {
        self.f_max / self.mass
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        let bad = |message: &str| CoreError::Deputy { name: self.name.clone(), message: message.into() };
        if !(self.mass > 0.0) {
            return Err(bad("mass must be positive"));
        }
        if !(self.f_max > 0.0) || !self.f_max.is_finite() {
            return Err(bad("thrust must be positive"));
        }
        if self.y0.iter().chain(self.yf.iter()).any(|v| !v.is_finite()) {
            return Err(bad("non-finite boundary state"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulationKind {
    /// Quadratic cost, sphere thrust bound.
    Qcqp,
    /// Epigraph slack per forced arc, cone thrust bound.
    Socp,
    /// Facet relaxation of the cone, unscaled.
    Lp,
    /// Facet relaxation shrunk by the scale factor.
    LpScaled,
}

impl FormulationKind {
    pub const ALL: [FormulationKind; 4] = [Self::Qcqp, Self::Socp, Self::Lp, Self::LpScaled];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Qcqp => "qcqp",
            Self::Socp => "socp",
            Self::Lp => "lp",
            Self::LpScaled => "lp-scaled",
        }
    }

    pub fn class(&self) -> ProgramClass {
        match self {
            Self::Qcqp => ProgramClass::QuadraticCost,
            Self::Socp => ProgramClass::SecondOrderCone,
            Self::Lp | Self::LpScaled => ProgramClass::Linear,
        }
    }

    pub fn has_slack(&self) -> bool {
        !matches!(self, Self::Qcqp)
    }

    pub fn is_lp(&self) -> bool {
        matches!(self, Self::Lp | Self::LpScaled)
    }
}

impl fmt::Display for FormulationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FormulationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "qcqp" => Ok(Self::Qcqp),
            "socp" => Ok(Self::Socp),
            "lp" => Ok(Self::Lp),
            "lp-scaled" | "lpscaled" => Ok(Self::LpScaled),
            _ => Err(format!("unknown formulation {s:?} (qcqp, socp, lp, lp-scaled)")),
        }
    }
}

/// Index maps for the flattened decision vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecisionLayout {
    pub n_deputies: usize,
    pub m: usize,
    pub has_slack: bool,
}

impl DecisionLayout {
    pub fn new(n_deputies: usize, m: usize, has_slack: bool) -> Self {
        Self { n_deputies, m, has_slack }
    }

    pub fn epochs(&self) -> usize {
        self.m + 2
    }

    pub fn arcs(&self) -> usize {
        self.m + 1
    }

    pub fn forced_per_deputy(&self) -> usize {
        self.arcs() / 2
    }

    pub fn y_len(&self) -> usize {
        6 * self.n_deputies * self.epochs()
    }

    pub fn u_len(&self) -> usize {
        3 * self.n_deputies * self.arcs()
    }

    pub fn gamma_len(&self) -> usize {
        if self.has_slack { self.n_deputies * self.forced_per_deputy() } else { 0 }
    }

    pub fn num_vars(&self) -> usize {
        self.y_len() + self.u_len() + self.gamma_len()
    }

    pub fn y(&self, i: usize, k: usize, c: usize) -> usize {
        6 * (i * self.epochs() + k) + c
    }

    pub fn u(&self, i: usize, k: usize, c: usize) -> usize {
        self.y_len() + 3 * (i * self.arcs() + k) + c
    }

    pub fn gamma(&self, i: usize, l: usize) -> usize {
        debug_assert!(self.has_slack);
        self.y_len() + self.u_len() + i * self.forced_per_deputy() + l
    }
}

/// Per-deputy, per-epoch reference states used to linearize collisions.
#[derive(Clone, Debug, PartialEq)]
pub struct Reference {
    pub y: Vec<Vec<Vec6>>,
}

impl Reference {
    pub fn uncontrolled(scenario: &Scenario, disc: &Discretization) -> Self {
        Self { y: scenario.deputies.iter().map(|d| disc.propagate(&d.y0, &[])).collect() }
    }

    /// Max over deputies and epochs of `‖a − b‖`.
    pub fn max_displacement(&self, other: &Reference) -> f64 {
        self.y
            .iter()
            .zip(&other.y)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q).norm()))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub collisions: bool,
    pub deputy_deputy: bool,
    pub deputy_chief: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { collisions: true, deputy_deputy: true, deputy_chief: true }
    }
}

impl BuildOptions {
    pub fn without_collisions() -> Self {
        Self { collisions: false, ..Self::default() }
    }
}

#[derive(Clone, Debug)]
pub struct Compiled {
    pub kind: FormulationKind,
    pub program: ConicProgram,
    pub layout: DecisionLayout,
    /// Facet scale used by LP kinds (1 otherwise).
    pub scale_c: f64,
    pub collision_rows: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemSize {
    pub variables: usize,
    pub constraints: usize,
}

impl Compiled {
    pub fn size(&self) -> ProblemSize {
        ProblemSize { variables: self.program.num_vars(), constraints: self.program.num_constraints() }
    }
}

pub fn build_qcqp(scenario: &Scenario, disc: &Discretization, reference: Option<&Reference>) -> Result<Compiled, CoreError> {
    build_program(FormulationKind::Qcqp, scenario, disc, reference, &BuildOptions::default())
}

pub fn build_socp(scenario: &Scenario, disc: &Discretization, reference: Option<&Reference>) -> Result<Compiled, CoreError> {
    build_program(FormulationKind::Socp, scenario, disc, reference, &BuildOptions::default())
}

/// `scaled = false` gives the unit-scale facets, `true` the scenario's scale factor.
pub fn build_lp(
    scenario: &Scenario,
    disc: &Discretization,
    reference: Option<&Reference>,
    scaled: bool,
) -> Result<Compiled, CoreError> {
    let kind = if scaled { FormulationKind::LpScaled } else { FormulationKind::Lp };
    build_program(kind, scenario, disc, reference, &BuildOptions::default())
}

pub fn build_program(
    kind: FormulationKind,
    scenario: &Scenario,
    disc: &Discretization,
    reference: Option<&Reference>,
    options: &BuildOptions,
) -> Result<Compiled, CoreError> {
    let deps = &scenario.deputies;
    for d in deps {
        d.validate()?;
    }
    let grid = &disc.grid;
    let m = grid.m();
    let layout = DecisionLayout::new(deps.len(), m, kind.has_slack());
    let a = disc.chief.a();
    let mut p = ConicProgram::new(format!("{} {}", scenario.name, kind), layout.num_vars());

    let scale_c = match kind {
        FormulationKind::LpScaled => scenario.poly.resolve_scale()?,
        FormulationKind::Lp => {
            scenario.poly.validate()?;
            1.0
        }
        _ => 1.0,
    };
    let facets = if kind.is_lp() { polyhedron::facets(scenario.poly.n_dir) } else { Vec::new() };

    for (i, d) in deps.iter().enumerate() {
        for c in 0..6 {
            p.fix(layout.y(i, 0, c), d.y0[c]);
            p.fix(layout.y(i, m + 1, c), d.yf[c]);
        }
        let head = a * d.u_max();
        for k in 0..=m {
            let arc = &disc.arcs[k];
            let forced = disc.is_forced(k);
            if !forced {
                for c in 0..3 {
                    p.fix(layout.u(i, k, c), 0.0);
                }
            }
            for r in 0..6 {
                let mut row = vec![(layout.y(i, k + 1, r), 1.0)];
                for c in 0..6 {
                    let v = arc.phi[(r, c)];
                    if v != 0.0 {
                        row.push((layout.y(i, k, c), -v));
                    }
                }
                if forced {
                    for c in 0..3 {
                        let v = arc.psi[(r, c)];
                        if v != 0.0 {
                            row.push((layout.u(i, k, c), -v));
                        }
                    }
                }
                p.add_equality(row, 0.0);
            }
            if !forced {
                continue;
            }
            let u: Vec<usize> = (0..3).map(|c| layout.u(i, k, c)).collect();
            let dt = arc.dt;
            match kind {
                FormulationKind::Qcqp => {
                    p.add_cone(ConeHead::Constant(head), u.clone());
                    for &j in &u {
                        p.quadratic_cost.push((j, dt * dt / (a * a)));
                    }
                }
                _ => {
                    let g = layout.gamma(i, k / 2);
                    p.lower[g] = 0.0;
                    p.upper[g] = head;
                    p.cost[g] = dt / a;
                    if kind == FormulationKind::Socp {
                        p.add_cone(ConeHead::Variable(g), u.clone());
                    } else {
                        for f in &facets {
                            let mut row: Vec<(usize, f64)> = (0..3)
                                .filter(|&c| f.normal[c] != 0.0)
                                .map(|c| (u[c], scale_c * f.normal[c]))
                                .collect();
                            row.push((g, -f.offset));
                            p.add_inequality(row, 0.0);
                        }
                    }
                }
            }
        }
    }

    let before = p.inequalities.len();
    if options.collisions && scenario.r_ca > 0.0 {
        let reference = reference.ok_or(CoreError::MissingReference)?;
        let shape = (reference.y.len(), reference.y.first().map_or(0, |v| v.len()));
        if shape != (deps.len(), layout.epochs()) || reference.y.iter().any(|v| v.len() != layout.epochs()) {
            return Err(CoreError::ReferenceShape { expected: (deps.len(), layout.epochs()), found: shape });
        }
        let r = scenario.r_ca;
        for k in 0..layout.epochs() {
            let t = &disc.rtn[k];
            if options.deputy_deputy {
                for i in 0..deps.len() {
                    for j in i + 1..deps.len() {
                        let row = linearize_collision(&reference.y[i][k], Some(&reference.y[j][k]), t, r)
                            .ok_or(CoreError::DegenerateReference { epoch: k, pair: (i, Some(j)) })?;
                        let mut entries = Vec::with_capacity(12);
                        for c in 0..6 {
                            if row.gradient[c] != 0.0 {
                                entries.push((layout.y(i, k, c), -row.gradient[c]));
                                entries.push((layout.y(j, k, c), row.gradient[c]));
                            }
                        }
                        p.add_inequality(entries, -row.rhs);
                    }
                }
            }
            if options.deputy_chief {
                for i in 0..deps.len() {
                    let row = linearize_collision(&reference.y[i][k], None, t, r)
                        .ok_or(CoreError::DegenerateReference { epoch: k, pair: (i, None) })?;
                    let entries = (0..6)
                        .filter(|&c| row.gradient[c] != 0.0)
                        .map(|c| (layout.y(i, k, c), -row.gradient[c]))
                        .collect();
                    p.add_inequality(entries, -row.rhs);
                }
            }
        }
    }
    let collision_rows = p.inequalities.len() - before;
    p.validate()?;
    Ok(Compiled { kind, program: p, layout, scale_c, collision_rows })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GuidanceSolution {
    pub kind: FormulationKind,
    /// `y[i][k]`, dimensional ROE (m) at every epoch.
    pub y: Vec<Vec<Vec6>>,
    /// `u[i][k]`, scaled control `a_c·u` (m²/s²) on every arc.
    pub u: Vec<Vec<Vec3>>,
    /// `gamma[i][l]` per forced arc, when the formulation has slacks.
    pub gamma: Option<Vec<Vec<f64>>>,
    pub delta_v: f64,
    pub delta_v_per_deputy: Vec<f64>,
    pub status: SolveStatus,
    pub objective: f64,
}

impl GuidanceSolution {
    pub fn from_primal(
        compiled: &Compiled,
        disc: &Discretization,
        x: &[f64],
        status: SolveStatus,
        objective: f64,
    ) -> Result<Self, CoreError> {
        let l = &compiled.layout;
        if x.len() != l.num_vars() {
            return Err(CoreError::SolutionShape { expected: l.num_vars(), found: x.len() });
        }
        let y = (0..l.n_deputies)
            .map(|i| (0..l.epochs()).map(|k| Vec6::from_fn(|c, _| x[l.y(i, k, c)])).collect())
            .collect();
        let u = (0..l.n_deputies)
            .map(|i| (0..l.arcs()).map(|k| Vec3::from_fn(|c, _| x[l.u(i, k, c)])).collect())
            .collect();
        let gamma = l.has_slack.then(|| {
            (0..l.n_deputies).map(|i| (0..l.forced_per_deputy()).map(|j| x[l.gamma(i, j)]).collect()).collect()
        });
        Ok(Self::assemble(compiled.kind, disc, y, u, gamma, status, objective))
    }

    /// Builds a solution from trajectories, computing the ΔV totals.
    pub fn assemble(
        kind: FormulationKind,
        disc: &Discretization,
        y: Vec<Vec<Vec6>>,
        u: Vec<Vec<Vec3>>,
        gamma: Option<Vec<Vec<f64>>>,
        status: SolveStatus,
        objective: f64,
    ) -> Self {
        let delta_v_per_deputy: Vec<f64> = u.iter().map(|ui| delta_v(disc, ui)).collect();
        let delta_v = delta_v_per_deputy.iter().sum();
        Self { kind, y, u, gamma, delta_v, delta_v_per_deputy, status, objective }
    }

    pub fn as_reference(&self) -> Reference {
        Reference { y: self.y.clone() }
    }

    pub fn n_deputies(&self) -> usize {
        self.y.len()
    }
}

/// `Σ_k Δt_k‖ū_k‖/a_c` over forced arcs (m/s).
pub fn delta_v(disc: &Discretization, u: &[Vec3]) -> f64 {
    let a = disc.chief.a();
    disc.grid.forced_arcs().map(|k| disc.grid.dt(k) * u[k].norm() / a).sum()
}
