//! Independent dynamics oracle: a plant matrix from finite differences of
//! the secular J2 rates, integrated with RK4.

#![allow(dead_code)]

use formguide_core::roe::{ChiefOrbit, Vec3, Vec6};
use nalgebra::SMatrix;

pub type Mat6 = SMatrix<f64, 6, 6>;
pub type Mat6x3 = SMatrix<f64, 6, 3>;

/// Secular rates of a circular orbit: (dθ/dt, dω/dt, dΩ/dt).
pub fn secular_rates(c: &ChiefOrbit, a: f64, i: f64) -> (f64, f64, f64) {
    let n = (c.mu / a.powi(3)).sqrt();
    let k = 0.75 * c.j2 * c.r_earth * c.r_earth * c.mu.sqrt() / a.powf(3.5);
    let ci = i.cos();
    let m_dot = n + k * (3.0 * ci * ci - 1.0);
    let w_dot = k * (5.0 * ci * ci - 1.0);
    let raan_dot = -2.0 * k * ci;
    (m_dot + w_dot, w_dot, raan_dot)
}

/// Dimensional plant matrix from central differences of the secular rates.
pub fn plant_by_differences(c: &ChiefOrbit) -> Mat6 {
    let (a, i) = (c.elements.a, c.elements.i);
    let lambda_rate = |a: f64, i: f64| {
        let (th, _, om) = secular_rates(c, a, i);
        th + om * c.elements.i.cos()
    };
    let iy_rate = |a: f64, i: f64| secular_rates(c, a, i).2 * c.elements.i.sin();
    let (ha, hi) = (1.0, 1e-6);
    let mut m = Mat6::zeros();
    // δa_dim = Δa, δix_dim = a·Δi
    m[(1, 0)] = a * (lambda_rate(a + ha, i) - lambda_rate(a - ha, i)) / (2.0 * ha);
    m[(1, 4)] = (lambda_rate(a, i + hi) - lambda_rate(a, i - hi)) / (2.0 * hi);
    m[(5, 0)] = a * (iy_rate(a + ha, i) - iy_rate(a - ha, i)) / (2.0 * ha);
    m[(5, 4)] = (iy_rate(a, i + hi) - iy_rate(a, i - hi)) / (2.0 * hi);
    let w = secular_rates(c, a, i).1;
    m[(2, 3)] = -w;
    m[(3, 2)] = w;
    m
}

/// Gauss variational influence for a circular chief, written out per row.
pub fn influence(c: &ChiefOrbit, u: f64) -> Mat6x3 {
    let a = c.elements.a;
    let n = (c.mu / a.powi(3)).sqrt();
    let mut b = Mat6x3::zeros();
    b[(0, 1)] = 2.0;
    b[(1, 0)] = -2.0;
    b[(2, 0)] = u.sin();
    b[(2, 1)] = 2.0 * u.cos();
    b[(3, 0)] = -u.cos();
    b[(3, 1)] = 2.0 * u.sin();
    b[(4, 2)] = u.cos();
    b[(5, 2)] = u.sin();
    b / (n * a)
}

pub fn latitude(c: &ChiefOrbit, t: f64) -> f64 {
    c.elements.theta + secular_rates(c, c.elements.a, c.elements.i).0 * t
}

pub fn rk4(c: &ChiefOrbit, y0: Vec6, u: Vec3, t0: f64, t1: f64, h: f64) -> Vec6 {
    let a = plant_by_differences(c);
    let f = |t: f64, y: &Vec6| a * y + influence(c, latitude(c, t)) * u;
    let steps = ((t1 - t0) / h).ceil().max(1.0) as usize;
    let h = (t1 - t0) / steps as f64;
    let mut y = y0;
    let mut t = t0;
    for _ in 0..steps {
        let k1 = f(t, &y);
        let k2 = f(t + h / 2.0, &(y + k1 * (h / 2.0)));
        let k3 = f(t + h / 2.0, &(y + k2 * (h / 2.0)));
        let k4 = f(t + h, &(y + k3 * h));
        y += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
        t += h;
    }
    y
}

pub fn rel(a: &Vec6, b: &Vec6) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}
