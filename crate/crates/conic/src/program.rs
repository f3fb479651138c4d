//! Solver-agnostic standard-form conic program.
//!
//! A [`ConicProgram`] is a linear (optionally diagonal-quadratic) objective over
//! `n` scalar decisions subject to linear equalities `a·x = b`, linear
//! inequalities `a·x ≤ b`, second-order cone memberships `‖x[tail]‖ ≤ head` and
//! per-variable bounds. Bounds are not counted as constraints in size reports.

use crate::error::ProgramError;

/// A sparse affine row `Σ coef·x[idx]` compared against `rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearRow {
    pub entries: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl LinearRow {
    pub fn new(entries: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self { entries, rhs }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.entries.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// `Σ |coef·x[idx]|`, the natural magnitude of the row at `x`.
    fn magnitude(&self, x: &[f64]) -> f64 {
        self.entries.iter().map(|&(j, a)| (a * x[j]).abs()).sum()
    }
}

/// Upper bound of a second-order cone: a decision variable or a constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConeHead {
    Variable(usize),
    Constant(f64),
}

/// `‖(x[tail[0]], x[tail[1]], …)‖₂ ≤ head`.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondOrderCone {
    pub head: ConeHead,
    pub tail: Vec<usize>,
}

impl SecondOrderCone {
    pub fn head_value(&self, x: &[f64]) -> f64 {
        match self.head {
            ConeHead::Variable(j) => x[j],
            ConeHead::Constant(h) => h,
        }
    }

    pub fn tail_norm(&self, x: &[f64]) -> f64 {
        self.tail.iter().map(|&j| x[j] * x[j]).sum::<f64>().sqrt()
    }
}

/// Which solver features a program needs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ProgramClass {
    Linear,
    SecondOrderCone,
    QuadraticCost,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConicProgram {
    pub name: String,
    pub cost: Vec<f64>,
    /// Diagonal quadratic objective terms `q·x[j]²`.
    pub quadratic_cost: Vec<(usize, f64)>,
    pub equalities: Vec<LinearRow>,
    pub inequalities: Vec<LinearRow>,
    pub cones: Vec<SecondOrderCone>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Worst residuals of a candidate point, one per constraint family.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Violations {
    pub equality: f64,
    pub inequality: f64,
    pub cone: f64,
    pub bound: f64,
    /// Normalisation used by [`Violations::scaled_max`]: `max(1, |rhs|, Σ|a·x|)` over all rows.
    pub scale: f64,
}

impl Violations {
    pub fn max(&self) -> f64 {
        self.equality.max(self.inequality).max(self.cone).max(self.bound)
    }

    pub fn scaled_max(&self) -> f64 {
        self.max() / self.scale
    }
}

impl ConicProgram {
    pub fn new(name: impl Into<String>, num_vars: usize) -> Self {
        Self {
            name: name.into(),
            cost: vec![0.0; num_vars],
            quadratic_cost: Vec::new(),
            equalities: Vec::new(),
            inequalities: Vec::new(),
            cones: Vec::new(),
            lower: vec![f64::NEG_INFINITY; num_vars],
            upper: vec![f64::INFINITY; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    /// Constraint count excluding variable bounds: one per equality row,
    /// inequality row and cone.
    pub fn num_constraints(&self) -> usize {
        self.equalities.len() + self.inequalities.len() + self.cones.len()
    }

    pub fn fix(&mut self, j: usize, value: f64) {
        self.lower[j] = value;
        self.upper[j] = value;
    }

    pub fn is_fixed(&self, j: usize) -> bool {
        self.lower[j] == self.upper[j]
    }

    pub fn add_equality(&mut self, entries: Vec<(usize, f64)>, rhs: f64) {
        self.equalities.push(LinearRow::new(entries, rhs));
    }

    pub fn add_inequality(&mut self, entries: Vec<(usize, f64)>, rhs: f64) {
        self.inequalities.push(LinearRow::new(entries, rhs));
    }

    pub fn add_cone(&mut self, head: ConeHead, tail: Vec<usize>) {
        self.cones.push(SecondOrderCone { head, tail });
    }

    pub fn class(&self) -> ProgramClass {
        if !self.quadratic_cost.is_empty() {
            ProgramClass::QuadraticCost
        } else if !self.cones.is_empty() {
            ProgramClass::SecondOrderCone
        } else {
            ProgramClass::Linear
        }
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let lin: f64 = self.cost.iter().zip(x).map(|(c, v)| c * v).sum();
        let quad: f64 = self.quadratic_cost.iter().map(|&(j, q)| q * x[j] * x[j]).sum();
        lin + quad
    }

    pub fn validate(&self) -> Result<(), ProgramError> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(ProgramError::Dimension(format!(
                "bounds have lengths {}/{} for {} variables",
                self.lower.len(),
                self.upper.len(),
                n
            )));
        }
        let check = |j: usize, what: &str| {
            if j >= n {
                Err(ProgramError::Index { index: j, num_vars: n, context: what.to_string() })
            } else {
                Ok(())
            }
        };
        for (j, _) in &self.quadratic_cost {
            check(*j, "quadratic cost")?;
        }
        for (r, row) in self.equalities.iter().enumerate() {
            for (j, _) in &row.entries {
                check(*j, &format!("equality row {r}"))?;
            }
        }
        for (r, row) in self.inequalities.iter().enumerate() {
            for (j, _) in &row.entries {
                check(*j, &format!("inequality row {r}"))?;
            }
        }
        for (k, cone) in self.cones.iter().enumerate() {
            if let ConeHead::Variable(j) = cone.head {
                check(j, &format!("cone {k} head"))?;
            }
            for j in &cone.tail {
                check(*j, &format!("cone {k} tail"))?;
            }
        }
        for j in 0..n {
            if self.lower[j] > self.upper[j] || self.lower[j].is_nan() || self.upper[j].is_nan() {
                return Err(ProgramError::Bounds { index: j, lower: self.lower[j], upper: self.upper[j] });
            }
        }
        if let Some((j, q)) = self.quadratic_cost.iter().find(|(_, q)| *q < 0.0 || !q.is_finite()) {
            return Err(ProgramError::NonConvex(format!("quadratic weight {q} on variable {j}")));
        }
        Ok(())
    }

    /// Replays every row, cone and bound at `x`.
    pub fn violations(&self, x: &[f64]) -> Violations {
        let mut v = Violations { scale: 1.0, ..Default::default() };
        for row in &self.equalities {
            v.equality = v.equality.max((row.eval(x) - row.rhs).abs());
            v.scale = v.scale.max(row.rhs.abs()).max(row.magnitude(x));
        }
        for row in &self.inequalities {
            v.inequality = v.inequality.max(row.eval(x) - row.rhs);
            v.scale = v.scale.max(row.rhs.abs()).max(row.magnitude(x));
        }
        for cone in &self.cones {
            let head = cone.head_value(x);
            v.cone = v.cone.max(cone.tail_norm(x) - head);
            v.scale = v.scale.max(head.abs());
        }
        for j in 0..self.num_vars() {
            v.bound = v.bound.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_exclude_bounds() {
        let mut p = ConicProgram::new("t", 4);
        p.fix(0, 1.0);
        p.upper[3] = 2.0;
        p.add_equality(vec![(0, 1.0), (1, -1.0)], 0.0);
        p.add_inequality(vec![(2, 1.0)], 5.0);
        p.add_cone(ConeHead::Variable(3), vec![1, 2]);
        assert_eq!(p.num_constraints(), 3);
        assert_eq!(p.class(), ProgramClass::SecondOrderCone);
        p.validate().unwrap();
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        let mut p = ConicProgram::new("t", 2);
        p.add_inequality(vec![(2, 1.0)], 0.0);
        assert!(matches!(p.validate(), Err(ProgramError::Index { index: 2, .. })));
    }

    #[test]
    fn violations_measure_each_family() {
        let mut p = ConicProgram::new("t", 3);
        p.add_equality(vec![(0, 1.0)], 1.0);
        p.add_inequality(vec![(1, 1.0)], 0.0);
        p.add_cone(ConeHead::Constant(1.0), vec![0, 1]);
        p.upper[2] = 0.5;
        let v = p.violations(&[1.5, 0.25, 1.0]);
        assert!((v.equality - 0.5).abs() < 1e-15);
        assert!((v.inequality - 0.25).abs() < 1e-15);
        assert!((v.cone - ((1.5f64 * 1.5 + 0.0625).sqrt() - 1.0)).abs() < 1e-15);
        assert!((v.bound - 0.5).abs() < 1e-15);
    }
}
