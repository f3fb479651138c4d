//! Supporting-hyperplane relaxation of the keep-out constraint
//! `‖T(y_i − y_j)‖ ≥ R`.
//!
//! About a reference separation `v` the row is `n̂ᵀT(y_i − y_j) ≥ R` with
//! `n̂ = Tv/‖Tv‖`. Because `n̂ᵀTx ≤ ‖Tx‖`, any point satisfying the row also
//! satisfies the exact constraint.

use crate::roe::{Mat3x6, Vec6};

/// Below this RTN separation (m) the hyperplane direction is undefined.
pub const DEGENERACY_FLOOR: f64 = 1e-6;
/// Radial offset (m) applied to a degenerate reference.
pub const DEGENERACY_PERTURBATION: f64 = 1e-3;

/// `gᵀ(y_i − y_j) ≥ rhs`, or `gᵀy_i ≥ rhs` for the chief.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionRow {
    pub gradient: Vec6,
    pub rhs: f64,
}

impl CollisionRow {
    pub fn slack(&self, separation: &Vec6) -> f64 {
        self.gradient.dot(separation) - self.rhs
    }
}

/// `reference_j = None` linearizes against the chief at the origin.
pub fn linearize_collision(
    reference_i: &Vec6,
    reference_j: Option<&Vec6>,
    map: &Mat3x6,
    r_ca: f64,
) -> Option<CollisionRow> {
    let v = match reference_j {
        Some(rj) => reference_i - rj,
        None => *reference_i,
    };
    let tv = map * v;
    let norm = tv.norm();
    if norm < DEGENERACY_FLOOR {
        return None;
    }
    Some(CollisionRow { gradient: map.transpose() * (tv / norm), rhs: r_ca })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roe::rtn_map_at;

    #[test]
    fn active_on_sphere() {
        let t = rtn_map_at(0.3);
        let y = Vec6::new(0.0, 100.0, 0.0, 0.0, 0.0, 0.0);
        let row = linearize_collision(&y, None, &t, 100.0).unwrap();
        assert!(row.slack(&y).abs() < 1e-12);
    }

    #[test]
    fn along_track_margin() {
        let t = rtn_map_at(1.0);
        let a = Vec6::new(0.0, -200.0, 0.0, 0.0, 0.0, 0.0);
        let b = Vec6::new(0.0, 200.0, 0.0, 0.0, 0.0, 0.0);
        let row = linearize_collision(&a, Some(&b), &t, 100.0).unwrap();
        assert!((row.slack(&(a - b)) - 300.0).abs() < 1e-9);
    }

    #[test]
    fn coincident_is_degenerate() {
        let t = rtn_map_at(0.0);
        let a = Vec6::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        assert!(linearize_collision(&a, Some(&a), &t, 100.0).is_none());
    }
}
