//! Dynamics evaluated on a time grid: one `(Φ, Ψ)` per interval and one RTN
//! map per epoch.

use crate::grid::{ArcKind, TimeGrid};
use crate::roe::{rtn_map, ArcModel, ChiefOrbit, Mat3x6, Vec3, Vec6};

#[derive(Clone, Debug)]
pub struct Discretization {
    pub chief: ChiefOrbit,
    pub grid: TimeGrid,
    pub arcs: Vec<ArcModel>,
    pub rtn: Vec<Mat3x6>,
}

impl Discretization {
    pub fn new(chief: ChiefOrbit, grid: TimeGrid) -> Self {
        let t = grid.epochs();
        let arcs = t.windows(2).map(|w| ArcModel::new(&chief, w[0], w[1])).collect();
        let rtn = t.iter().map(|&tk| rtn_map(&chief, tk)).collect();
        Self { chief, grid, arcs, rtn }
    }

    pub fn num_epochs(&self) -> usize {
        self.grid.num_epochs()
    }

    pub fn num_intervals(&self) -> usize {
        self.grid.num_intervals()
    }

    /// Chains the arc models from `y0` with the given per-interval controls.
    /// Missing controls are zero.
    pub fn propagate(&self, y0: &Vec6, u: &[Vec3]) -> Vec<Vec6> {
        let mut out = Vec::with_capacity(self.num_epochs());
        out.push(*y0);
        for (k, arc) in self.arcs.iter().enumerate() {
            let uk = u.get(k).copied().unwrap_or_else(Vec3::zeros);
            let next = arc.propagate(&out[k], &uk);
            out.push(next);
        }
        out
    }

    pub fn is_forced(&self, k: usize) -> bool {
        self.grid.kind(k) == ArcKind::Forced
    }
}
