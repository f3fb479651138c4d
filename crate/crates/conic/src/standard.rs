//! Reduction of a [`ConicProgram`] to `min cᵀx  s.t.  Ax + s = b, s ∈ K`.
//!
//! Fixed variables are substituted out, bounds become nonnegative rows,
//! diagonal quadratic costs become rotated-cone epigraphs and rows that
//! end up empty are checked and dropped.

use crate::cones::{Block, ConeKind};
use crate::program::{ConeHead, ConicProgram, LinearRow};
use crate::sparse::Csc;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VarSource {
    Fixed(f64),
    Column(usize),
    /// Appears nowhere and has no cost: any value is optimal, zero is returned.
    Unused,
}

#[derive(Clone, Debug)]
pub struct StandardForm {
    pub a: Csc,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub blocks: Vec<Block>,
    /// Objective contribution of substituted variables.
    pub offset: f64,
    pub source: Vec<VarSource>,
}

#[derive(Debug)]
pub enum Presolved {
    Form(StandardForm),
    /// A row with no free variables is violated.
    Infeasible(String),
    /// A variable with nonzero cost appears in no row.
    Unbounded(usize),
}

type Row = (Vec<(usize, f64)>, f64);

fn empty_row_tol(rhs: f64) -> f64 {
    1e-9 * rhs.abs().max(1.0)
}

impl StandardForm {
    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    /// Maps a standard-form primal back to the original variables.
    pub fn recover(&self, x: &[f64]) -> Vec<f64> {
        self.source
            .iter()
            .map(|s| match *s {
                VarSource::Fixed(v) => v,
                VarSource::Column(k) => x[k],
                VarSource::Unused => 0.0,
            })
            .collect()
    }

    pub fn presolve(p: &ConicProgram) -> Presolved {
        let nv = p.num_vars();
        let mut source = Vec::with_capacity(nv);
        let mut ncols = 0;
        for j in 0..nv {
            if p.is_fixed(j) {
                source.push(VarSource::Fixed(p.lower[j]));
            } else {
                source.push(VarSource::Column(ncols));
                ncols += 1;
            }
        }
        let mut c = vec![0.0; ncols];
        let mut offset = 0.0;
        for j in 0..nv {
            match source[j] {
                VarSource::Fixed(v) => offset += p.cost[j] * v,
                VarSource::Column(k) => c[k] = p.cost[j],
                VarSource::Unused => unreachable!(),
            }
        }

        let affine = |row: &LinearRow| -> Row {
            let mut rhs = row.rhs;
            let mut entries = Vec::with_capacity(row.entries.len());
            for &(j, a) in &row.entries {
                match source[j] {
                    VarSource::Fixed(v) => rhs -= a * v,
                    VarSource::Column(k) => entries.push((k, a)),
                    VarSource::Unused => unreachable!(),
                }
            }
            (entries, rhs)
        };
        // `s = b − Ax` for a single variable term `x[j]`.
        let term = |j: usize| -> Row {
            match source[j] {
                VarSource::Fixed(v) => (Vec::new(), v),
                VarSource::Column(k) => (vec![(k, -1.0)], 0.0),
                VarSource::Unused => unreachable!(),
            }
        };

        let zero: Vec<Row> = p.equalities.iter().map(affine).collect();
        let mut nonneg: Vec<Row> = p.inequalities.iter().map(affine).collect();
        for j in 0..nv {
            if let VarSource::Column(k) = source[j] {
                if p.upper[j].is_finite() {
                    nonneg.push((vec![(k, 1.0)], p.upper[j]));
                }
                if p.lower[j].is_finite() {
                    nonneg.push((vec![(k, -1.0)], -p.lower[j]));
                }
            }
        }
        let mut socs: Vec<Vec<Row>> = Vec::with_capacity(p.cones.len());
        for cone in &p.cones {
            let mut rows = Vec::with_capacity(cone.tail.len() + 1);
            rows.push(match cone.head {
                ConeHead::Variable(j) => term(j),
                ConeHead::Constant(h) => (Vec::new(), h),
            });
            rows.extend(cone.tail.iter().map(|&j| term(j)));
            socs.push(rows);
        }

        // Quadratic costs: q·x² ≤ q·r·t with ‖(2x, t − r)‖ ≤ t + r, t a new column.
        let mut quad: Vec<(usize, f64)> = Vec::new();
        for &(j, q) in &p.quadratic_cost {
            match quad.iter_mut().find(|(k, _)| *k == j) {
                Some(e) => e.1 += q,
                None => quad.push((j, q)),
            }
        }
        for &(j, q) in &quad {
            match source[j] {
                VarSource::Fixed(v) => offset += q * v * v,
                VarSource::Column(k) => {
                    if q == 0.0 {
                        continue;
                    }
                    let r = epigraph_scale(p, j);
                    let t = c.len();
                    c.push(q * r);
                    socs.push(vec![
                        (vec![(t, -1.0)], r),
                        (vec![(k, -2.0)], 0.0),
                        (vec![(t, -1.0)], -r),
                    ]);
                }
                VarSource::Unused => unreachable!(),
            }
        }
        let ncols = c.len();

        // Empty linear rows.
        let mut zero_kept = Vec::with_capacity(zero.len());
        for (r, row) in zero.into_iter().enumerate() {
            if row.0.is_empty() {
                if row.1.abs() > empty_row_tol(row.1) {
                    return Presolved::Infeasible(format!("equality row {r} fixed at residual {}", row.1));
                }
            } else {
                zero_kept.push(row);
            }
        }
        let mut nonneg_kept = Vec::with_capacity(nonneg.len());
        for (r, row) in nonneg.into_iter().enumerate() {
            if row.0.is_empty() {
                if row.1 < -empty_row_tol(row.1) {
                    return Presolved::Infeasible(format!("inequality row {r} fixed at residual {}", -row.1));
                }
            } else {
                nonneg_kept.push(row);
            }
        }
        let mut soc_kept = Vec::with_capacity(socs.len());
        for (k, rows) in socs.into_iter().enumerate() {
            if rows.iter().all(|r| r.0.is_empty()) {
                let head = rows[0].1;
                let tail: f64 = rows[1..].iter().map(|r| r.1 * r.1).sum::<f64>().sqrt();
                if tail - head > empty_row_tol(head) {
                    return Presolved::Infeasible(format!("cone {k} fixed outside the cone"));
                }
            } else {
                soc_kept.push(rows);
            }
        }

        // Columns that appear in no row.
        let mut used = vec![false; ncols];
        let all_rows = zero_kept.iter().chain(&nonneg_kept).chain(soc_kept.iter().flatten());
        for row in all_rows {
            for &(k, _) in &row.0 {
                used[k] = true;
            }
        }
        let mut remap = vec![usize::MAX; ncols];
        let mut nc = 0;
        for k in 0..ncols {
            if used[k] {
                remap[k] = nc;
                nc += 1;
            } else if c[k] != 0.0 {
                let orig = source.iter().position(|s| *s == VarSource::Column(k)).unwrap_or(k);
                return Presolved::Unbounded(orig);
            }
        }
        for s in source.iter_mut() {
            if let VarSource::Column(k) = *s {
                *s = if used[k] { VarSource::Column(remap[k]) } else { VarSource::Unused };
            }
        }
        let c: Vec<f64> = (0..ncols).filter(|&k| used[k]).map(|k| c[k]).collect();

        let mut trip = Vec::new();
        let mut b = Vec::new();
        let mut blocks = Vec::new();
        let mut push_rows = |rows: &[Row], kind: ConeKind, blocks: &mut Vec<Block>| {
            if rows.is_empty() {
                return;
            }
            let start = b.len();
            for (entries, rhs) in rows {
                let i = b.len();
                for &(k, a) in entries {
                    trip.push((i, remap[k], a));
                }
                b.push(*rhs);
            }
            blocks.push(Block { kind, start, dim: rows.len() });
        };
        push_rows(&zero_kept, ConeKind::Zero, &mut blocks);
        push_rows(&nonneg_kept, ConeKind::NonNeg, &mut blocks);
        for rows in &soc_kept {
            push_rows(rows, ConeKind::Soc, &mut blocks);
        }
        let m = b.len();
        let a = Csc::from_triplets(m, nc, &trip);
        Presolved::Form(StandardForm { a, b, c, blocks, offset, source })
    }
}

/// Scale `r` for the epigraph of `x²`: the square of a constant cone head
/// bounding `x`, else of its largest finite bound, else 1.
fn epigraph_scale(p: &ConicProgram, j: usize) -> f64 {
    let from_cone = p
        .cones
        .iter()
        .filter(|c| c.tail.contains(&j))
        .filter_map(|c| match c.head {
            ConeHead::Constant(h) if h > 0.0 => Some(h),
            _ => None,
        })
        .fold(f64::INFINITY, f64::min);
    let h = if from_cone.is_finite() {
        from_cone
    } else {
        let bnd = p.lower[j].abs().max(p.upper[j].abs());
        if bnd.is_finite() && bnd > 0.0 { bnd } else { 1.0 }
    };
    h * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_variables_move_to_rhs() {
        let mut p = ConicProgram::new("t", 3);
        p.fix(1, 2.0);
        p.cost = vec![1.0, 5.0, 0.0];
        p.add_equality(vec![(0, 1.0), (1, 3.0), (2, 1.0)], 10.0);
        p.add_inequality(vec![(1, 1.0)], 4.0);
        let Presolved::Form(sf) = StandardForm::presolve(&p) else { panic!() };
        assert_eq!(sf.offset, 10.0);
        assert_eq!(sf.m(), 1);
        assert_eq!(sf.b, vec![4.0]);
        assert_eq!(sf.recover(&[7.0, 8.0]), vec![7.0, 2.0, 8.0]);
    }

    #[test]
    fn violated_empty_row_is_infeasible() {
        let mut p = ConicProgram::new("t", 1);
        p.fix(0, 1.0);
        p.add_inequality(vec![(0, 1.0)], 0.5);
        assert!(matches!(StandardForm::presolve(&p), Presolved::Infeasible(_)));
    }

    #[test]
    fn costed_unused_column_is_unbounded() {
        let mut p = ConicProgram::new("t", 2);
        p.cost[1] = -1.0;
        p.add_equality(vec![(0, 1.0)], 1.0);
        assert!(matches!(StandardForm::presolve(&p), Presolved::Unbounded(1)));
    }
}
