//! Polyhedral relaxation of the thrust sphere `‖ū‖ ≤ Γ`.
//!
//! With unit slack the relaxed set is an `n_dir`-gon prism in the T-N plane
//! cut by the four R-T and four R-N planes `|u_R| + |u_T| ≤ 1`,
//! `|u_R| + |u_N| ≤ 1`. Components are ordered `(R, T, N)`.

use std::f64::consts::{FRAC_PI_4, PI};

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::roe::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ScaleFactor {
    Fixed(f64),
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyhedronSpec {
    pub n_dir: usize,
    pub scale_c: ScaleFactor,
}

impl PolyhedronSpec {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.n_dir <= 4 {
            return Err(CoreError::Polyhedron(format!("n_dir = {} must exceed 4", self.n_dir)));
        }
        if let ScaleFactor::Fixed(c) = self.scale_c {
            if !(c >= 1.0) || !c.is_finite() {
                return Err(CoreError::Polyhedron(format!("scale factor {c} must be at least 1")));
            }
        }
        Ok(())
    }

    pub fn resolve_scale(&self) -> Result<f64, CoreError> {
        self.validate()?;
        match self.scale_c {
            ScaleFactor::Fixed(c) => Ok(c),
            ScaleFactor::Auto => compute_scale_factor(self.n_dir),
        }
    }
}

/// Half-space `normal·ū ≤ offset·Γ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Facet {
    pub normal: Vec3,
    pub offset: f64,
}

pub fn facets(n_dir: usize) -> Vec<Facet> {
    let nf = n_dir as f64;
    let mut out = Vec::with_capacity(n_dir + 8);
    for d in 1..=n_dir {
        let g = (2 * d - 1) as f64 * PI / nf;
        out.push(Facet { normal: Vec3::new(0.0, g.cos(), g.sin()), offset: (PI / nf).cos() });
    }
    for d in 1..=4 {
        let g = (2 * d - 1) as f64 * FRAC_PI_4;
        out.push(Facet { normal: Vec3::new(g.cos(), g.sin(), 0.0), offset: FRAC_PI_4.cos() });
    }
    for d in 1..=4 {
        let g = (2 * d - 1) as f64 * FRAC_PI_4;
        out.push(Facet { normal: Vec3::new(g.cos(), 0.0, g.sin()), offset: FRAC_PI_4.cos() });
    }
    out
}

fn cross_height(t: f64, n: f64) -> f64 {
    1.0 - t.abs().max(n.abs())
}

/// Vertices of the unit-slack polyhedron, built from its structure: polygon
/// corners lifted to the cross planes, polygon edge crossings with the
/// diagonals `|T| = |N|`, and the two radial apexes.
pub fn vertices(n_dir: usize) -> Result<Vec<Vec3>, CoreError> {
    if n_dir <= 4 {
        return Err(CoreError::Polyhedron(format!("n_dir = {n_dir} must exceed 4")));
    }
    let nf = n_dir as f64;
    let corner = |j: usize| {
        let phi = 2.0 * PI * j as f64 / nf;
        (phi.cos(), phi.sin())
    };
    let mut out = vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0)];
    let mut lift = |t: f64, n: f64| {
        let r = cross_height(t, n);
        out.push(Vec3::new(r, t, n));
        if r > 0.0 {
            out.push(Vec3::new(-r, t, n));
        }
    };
    for j in 0..n_dir {
        let (t0, n0) = corner(j);
        let (t1, n1) = corner(j + 1);
        lift(t0, n0);
        for sign in [1.0, -1.0] {
            // T(s) = sign·N(s) along the edge
            let f0 = t0 - sign * n0;
            let f1 = t1 - sign * n1;
            if f0 * f1 < 0.0 {
                let s = f0 / (f0 - f1);
                lift(t0 + s * (t1 - t0), n0 + s * (n1 - n0));
            }
        }
    }
    Ok(out)
}

/// Largest vertex norm of the unit-slack polyhedron; dividing the facets by
/// this value inscribes the polyhedron in the sphere.
pub fn compute_scale_factor(n_dir: usize) -> Result<f64, CoreError> {
    Ok(vertices(n_dir)?.iter().map(|v| v.norm()).fold(0.0, f64::max))
}

/// Area of the inscribed T-N polygon relative to the unit disc.
pub fn tn_coverage(n_dir: usize) -> f64 {
    let nf = n_dir as f64;
    nf / (2.0 * PI) * (2.0 * PI / nf).sin()
}

/// Vertices by brute force: every facet triple with a unique intersection
/// that satisfies all facets.
pub fn enumerate_vertices_brute_force(n_dir: usize) -> Result<Vec<Vec3>, CoreError> {
    if n_dir <= 4 {
        return Err(CoreError::Polyhedron(format!("n_dir = {n_dir} must exceed 4")));
    }
    let f = facets(n_dir);
    let mut out: Vec<Vec3> = Vec::new();
    for a in 0..f.len() {
        for b in a + 1..f.len() {
            for c in b + 1..f.len() {
                let m = Matrix3::from_rows(&[f[a].normal.transpose(), f[b].normal.transpose(), f[c].normal.transpose()]);
                let Some(inv) = m.try_inverse() else { continue };
                if m.determinant().abs() < 1e-12 {
                    continue;
                }
                let v = inv * Vec3::new(f[a].offset, f[b].offset, f[c].offset);
                if f.iter().all(|h| h.normal.dot(&v) <= h.offset + 1e-9) && !out.iter().any(|w| (w - v).norm() < 1e-9) {
                    out.push(v);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_directions() {
        let c = compute_scale_factor(12).unwrap();
        assert!((1.015..=1.020).contains(&c), "{c}");
        assert!((tn_coverage(12) - 0.9549).abs() < 1e-4);
    }

    #[test]
    fn structural_matches_brute_force() {
        for n in [5, 6, 8, 12, 16, 24] {
            let a = compute_scale_factor(n).unwrap();
            let b = enumerate_vertices_brute_force(n).unwrap().iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!((a - b).abs() < 1e-12, "n = {n}: {a} vs {b}");
        }
    }

    #[test]
    fn small_n_rejected() {
        assert!(compute_scale_factor(4).is_err());
    }
}
