//! Orbital elements, quasi-non-singular relative orbital elements (ROE) and the
//! linear J2-perturbed relative dynamics used by every formulation.
//!
//! The dynamics are the near-circular secular model: Keplerian drift of the
//! mean along-track separation, J2 rotation of the relative eccentricity vector
//! and J2 drift of the along-track and cross-track inclination components. The
//! state is the dimensional ROE vector `ȳ = a_c·δα` in metres, the control is
//! the scaled acceleration `ū = a_c·u` (m²/s²).

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::CoreError;

pub type Vec3 = SVector<f64, 3>;
pub type Vec6 = SVector<f64, 6>;
pub type Mat6 = SMatrix<f64, 6, 6>;
pub type Mat6x3 = SMatrix<f64, 6, 3>;
pub type Mat3x6 = SMatrix<f64, 3, 6>;

pub const MU_EARTH: f64 = 3.986004418e14;
pub const J2_EARTH: f64 = 1.08262668e-3;
pub const R_EARTH: f64 = 6378137.0;

/// Mean orbital elements with the eccentricity vector `(e cos ω, e sin ω)`
/// and the mean argument of latitude `theta = ω + M`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitalElements {
    pub a: f64,
    pub theta: f64,
    pub e_x: f64,
    pub e_y: f64,
    pub i: f64,
    pub raan: f64,
}

impl OrbitalElements {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.a > 0.0) {
            return Err(CoreError::InvalidElements(format!("semi-major axis {} must be positive", self.a)));
        }
        if self.eccentricity() >= 1.0 {
            return Err(CoreError::InvalidElements(format!("eccentricity {} must be below 1", self.eccentricity())));
        }
        if !(self.i > 0.0 && self.i < PI) {
            return Err(CoreError::InvalidElements(format!("inclination {} rad outside (0, π)", self.i)));
        }
        let all = [self.a, self.theta, self.e_x, self.e_y, self.i, self.raan];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::InvalidElements("non-finite element".into()));
        }
        Ok(())
    }

    pub fn eccentricity(&self) -> f64 {
        self.e_x.hypot(self.e_y)
    }

    pub fn arg_perigee(&self) -> f64 {
        self.e_y.atan2(self.e_x)
    }
}

/// Dimensionless quasi-non-singular ROE `(δa, δλ, δe_x, δe_y, δi_x, δi_y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoeVector {
    pub d_a: f64,
    pub d_lambda: f64,
    pub d_ex: f64,
    pub d_ey: f64,
    pub d_ix: f64,
    pub d_iy: f64,
}

impl RoeVector {
    pub fn from_vector(v: &Vec6) -> Self {
        Self { d_a: v[0], d_lambda: v[1], d_ex: v[2], d_ey: v[3], d_ix: v[4], d_iy: v[5] }
    }

    pub fn to_vector(&self) -> Vec6 {
        Vec6::new(self.d_a, self.d_lambda, self.d_ex, self.d_ey, self.d_ix, self.d_iy)
    }

    /// Linearization holds for small separations; flags components above 1e-2.
    pub fn exceeds_linear_range(&self) -> bool {
        self.to_vector().iter().any(|v| v.abs() > 1e-2)
    }
}

/// Dimensional ROE state `ȳ = a_c·δα` in metres.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DimRoeState(pub Vec6);

fn wrap_angle(x: f64) -> f64 {
    if (-PI..=PI).contains(&x) {
        return x;
    }
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI { PI } else { y }
}

pub fn roe_from_elements(deputy: &OrbitalElements, chief: &OrbitalElements) -> Result<RoeVector, CoreError> {
    if !(chief.a > 0.0) {
        return Err(CoreError::InvalidElements(format!("chief semi-major axis {} must be positive", chief.a)));
    }
    let d_raan = wrap_angle(deputy.raan - chief.raan);
    Ok(RoeVector {
        d_a: (deputy.a - chief.a) / chief.a,
        d_lambda: wrap_angle(deputy.theta - chief.theta) + d_raan * chief.i.cos(),
        d_ex: deputy.e_x - chief.e_x,
        d_ey: deputy.e_y - chief.e_y,
        d_ix: deputy.i - chief.i,
        d_iy: d_raan * chief.i.sin(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiefOrbit {
    pub elements: OrbitalElements,
    pub mu: f64,
    pub j2: f64,
    pub r_earth: f64,
}

impl ChiefOrbit {
    pub fn earth(elements: OrbitalElements) -> Self {
        Self { elements, mu: MU_EARTH, j2: J2_EARTH, r_earth: R_EARTH }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        self.elements.validate()?;
        if !(self.mu > 0.0) || !(self.r_earth > 0.0) || !self.j2.is_finite() {
            return Err(CoreError::InvalidElements("non-physical gravity constants".into()));
        }
        Ok(())
    }

    pub fn a(&self) -> f64 {
        self.elements.a
    }

    pub fn mean_motion(&self) -> f64 {
        (self.mu / self.elements.a.powi(3)).sqrt()
    }

    /// Keplerian period.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.mean_motion()
    }

    /// `κ = ¾·J2·R²·√μ / a^{7/2}` (circular chief).
    pub fn kappa(&self) -> f64 {
        0.75 * self.j2 * self.r_earth.powi(2) * self.mu.sqrt() / self.elements.a.powf(3.5)
    }

    fn inclination_factors(&self) -> (f64, f64, f64, f64) {
        let (s, c) = self.elements.i.sin_cos();
        (3.0 * c * c - 1.0, 5.0 * c * c - 1.0, 2.0 * s * c, s * s)
    }

    /// Secular rotation rate of the eccentricity vector.
    pub fn perigee_rate(&self) -> f64 {
        let (_, q, _, _) = self.inclination_factors();
        self.kappa() * q
    }

    /// Mean argument of latitude at `t` seconds after the epoch.
    pub fn arg_latitude(&self, t: f64) -> f64 {
        let (p, q, _, _) = self.inclination_factors();
        self.elements.theta + (self.mean_motion() + self.kappa() * (p + q)) * t
    }

    pub fn dimensionalize(&self, roe: &RoeVector) -> DimRoeState {
        DimRoeState(roe.to_vector() * self.elements.a)
    }

    pub fn dimensionless(&self, y: &DimRoeState) -> RoeVector {
        RoeVector::from_vector(&(y.0 / self.elements.a))
    }
}

/// State transition matrix over `[t_k, t_k1]`.
pub fn stm(chief: &ChiefOrbit, t_k: f64, t_k1: f64) -> Mat6 {
    stm_span(chief, t_k1 - t_k)
}

fn stm_span(chief: &ChiefOrbit, tau: f64) -> Mat6 {
    let n = chief.mean_motion();
    let k = chief.kappa();
    let (p, _, s, t) = chief.inclination_factors();
    let (sw, cw) = (chief.perigee_rate() * tau).sin_cos();
    let mut phi = Mat6::identity();
    phi[(1, 0)] = -(1.5 * n + 7.0 * k * p) * tau;
    phi[(1, 4)] = -7.0 * k * s * tau;
    phi[(2, 2)] = cw;
    phi[(2, 3)] = -sw;
    phi[(3, 2)] = sw;
    phi[(3, 3)] = cw;
    phi[(5, 0)] = 3.5 * k * s * tau;
    phi[(5, 4)] = 2.0 * k * t * tau;
    phi
}

/// Near-circular Gauss variational influence of a scaled RTN acceleration
/// `ū = a_c·u` on the dimensional ROE at argument of latitude `u`.
pub fn control_influence(chief: &ChiefOrbit, u: f64) -> Mat6x3 {
    let (su, cu) = u.sin_cos();
    let f = 1.0 / (chief.mean_motion() * chief.a());
    #[rustfmt::skip]
    let b = Mat6x3::new(
        0.0,  2.0,      0.0,
        -2.0, 0.0,      0.0,
        su,   2.0 * cu, 0.0,
        -cu,  2.0 * su, 0.0,
        0.0,  0.0,      cu,
        0.0,  0.0,      su,
    );
    b * f
}

/// 32-point Gauss–Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = 32;
        let mut rule = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        rule
    })
}

/// `Ψ = ∫ Φ(t_k1 − τ)·B(u(τ)) dτ` over `[t_k, t_k1]` for a constant `ū`.
pub fn control_convolution(chief: &ChiefOrbit, t_k: f64, t_k1: f64) -> Mat6x3 {
    let half = 0.5 * (t_k1 - t_k);
    let mid = 0.5 * (t_k1 + t_k);
    let mut psi = Mat6x3::zeros();
    for &(x, w) in gauss_legendre() {
        let tau = mid + half * x;
        psi += stm_span(chief, t_k1 - tau) * control_influence(chief, chief.arg_latitude(tau)) * (w * half);
    }
    psi
}

/// Dimensional ROE → RTN position (m) at `t` seconds after the epoch.
pub fn rtn_map(chief: &ChiefOrbit, t: f64) -> Mat3x6 {
    rtn_map_at(chief.arg_latitude(t))
}

pub fn rtn_map_at(u: f64) -> Mat3x6 {
    let (su, cu) = u.sin_cos();
    #[rustfmt::skip]
    let m = Mat3x6::new(
        1.0, 0.0, -cu,       -su,       0.0, 0.0,
        0.0, 1.0, 2.0 * su,  -2.0 * cu, 0.0, 0.0,
        0.0, 0.0, 0.0,       0.0,       su,  -cu,
    );
    m
}

/// Per-interval pair `(Φ_k, Ψ_k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcModel {
    pub phi: Mat6,
    pub psi: Mat6x3,
    pub dt: f64,
}

impl ArcModel {
    pub fn new(chief: &ChiefOrbit, t_k: f64, t_k1: f64) -> Self {
        Self { phi: stm(chief, t_k, t_k1), psi: control_convolution(chief, t_k, t_k1), dt: t_k1 - t_k }
    }

    pub fn propagate(&self, y: &Vec6, u: &Vec3) -> Vec6 {
        self.phi * y + self.psi * u
    }
}
