//! Dynamics against independent oracles: a plant matrix built by finite
//! differences of secular J2 rates and integrated with RK4, and a two-orbit
//! Keplerian construction for the RTN map.

use std::f64::consts::PI;

use formguide_core::roe::{
    control_convolution, roe_from_elements, rtn_map, rtn_map_at, stm, ChiefOrbit, OrbitalElements, RoeVector, Vec3,
    Vec6,
};
use nalgebra::Matrix3;
use proptest::prelude::*;

mod common;
use common::{latitude, rel, rk4, Mat6};

fn case_study_chief() -> ChiefOrbit {
    ChiefOrbit::earth(OrbitalElements {
        a: 6_771_000.0,
        theta: PI,
        e_x: 1e-3,
        e_y: 0.0,
        i: 98f64.to_radians(),
        raan: 0.0,
    })
}

#[test]
fn identical_orbits_and_single_differences() {
    let c = case_study_chief().elements;
    assert_eq!(roe_from_elements(&c, &c).unwrap().to_vector(), Vec6::zeros());
    let mut d = c;
    d.theta += 1e-4;
    let r = roe_from_elements(&d, &c).unwrap().to_vector();
    assert!((r[1] - 1e-4).abs() < 1e-15);
    assert!(r.iter().enumerate().all(|(k, v)| k == 1 || *v == 0.0));
}

#[test]
fn raan_offset_at_98_degrees() {
    let c = case_study_chief().elements;
    let mut d = c;
    d.raan = 1e-4;
    let r = roe_from_elements(&d, &c).unwrap();
    let i = 98.0 * PI / 180.0;
    assert!((r.d_lambda - 1e-4 * i.cos()).abs() < 1e-17);
    assert!((r.d_iy - 1e-4 * i.sin()).abs() < 1e-17);
}

#[test]
fn non_positive_chief_axis_rejected() {
    let mut c = case_study_chief().elements;
    let d = c;
    c.a = 0.0;
    assert!(roe_from_elements(&d, &c).is_err());
}

#[test]
fn along_track_table_entry() {
    let c = case_study_chief();
    let roe = RoeVector { d_a: 0.0, d_lambda: -400.0 / 6_771_000.0, d_ex: 0.0, d_ey: 0.0, d_ix: 0.0, d_iy: 0.0 };
    let y = c.dimensionalize(&roe);
    assert!((y.0[1] + 400.0).abs() < 1e-12);
    let back = c.dimensionless(&y).to_vector();
    assert!((back - roe.to_vector()).amax() <= 1e-15 * roe.to_vector().amax());
    assert_eq!(c.dimensionalize(&RoeVector::from_vector(&Vec6::zeros())).0, Vec6::zeros());
}

#[test]
fn stm_identity_at_zero_span() {
    let c = case_study_chief();
    assert_eq!(stm(&c, 123.0, 123.0), Mat6::identity());
}

#[test]
fn keplerian_drift_over_one_orbit() {
    let mut c = case_study_chief();
    c.j2 = 0.0;
    let t = c.period();
    let phi = stm(&c, 0.0, t);
    let y = phi * Vec6::new(100.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    let expected = -300.0 * PI;
    assert!(((y[1] - expected) / expected).abs() < 1e-12, "{}", y[1]);
    let mut off = phi - Mat6::identity();
    off[(1, 0)] = 0.0;
    assert!(off.amax() < 1e-15);
}

#[test]
fn stm_matches_differenced_plant() {
    let c = case_study_chief();
    let y0 = Vec6::new(40.0, -300.0, 120.0, -80.0, 250.0, -150.0);
    let tau = c.period();
    let closed = stm(&c, 0.0, tau) * y0;
    let integrated = rk4(&c, y0, Vec3::zeros(), 0.0, tau, 1.0);
    assert!(rel(&closed, &integrated) < 1e-6, "{}", rel(&closed, &integrated));
}

#[test]
fn convolution_matches_rk4_on_a_forced_arc() {
    let c = case_study_chief();
    let t0 = 1234.0;
    let t1 = t0 + 0.2 * c.period();
    let u = Vec3::new(30.0, -120.0, 200.0);
    let y_ref = rk4(&c, Vec6::zeros(), u, t0, t1, 1.0);
    let y = control_convolution(&c, t0, t1) * u;
    assert!(rel(&y, &y_ref) < 1e-6, "{}", rel(&y, &y_ref));
}

#[test]
fn normal_thrust_touches_only_out_of_plane_rows() {
    let c = case_study_chief();
    let y = control_convolution(&c, 0.0, 60.0) * Vec3::new(0.0, 0.0, 100.0);
    assert_eq!([y[0], y[2], y[3]], [0.0, 0.0, 0.0]);
    assert!(y[4].abs() > 0.0 && y[5].abs() > 0.0);
    assert!(y[1].abs() < 1e-3 * y[4].abs().max(y[5].abs()));
}

#[test]
fn rtn_of_pure_inclination_offset() {
    let r = rtn_map_at(0.0) * Vec6::new(0.0, 0.0, 0.0, 0.0, 0.0, -300.0);
    assert_eq!(r, nalgebra::Vector3::new(0.0, 0.0, 300.0));
    assert_eq!(rtn_map_at(1.3) * Vec6::zeros(), nalgebra::Vector3::zeros());
}

fn kepler_position(el: &OrbitalElements, mu: f64) -> (nalgebra::Vector3<f64>, nalgebra::Vector3<f64>) {
    let e = el.e_x.hypot(el.e_y);
    let w = el.e_y.atan2(el.e_x);
    let m = el.theta - w;
    let mut ea = m;
    for _ in 0..50 {
        ea -= (ea - e * ea.sin() - m) / (1.0 - e * ea.cos());
    }
    let nu = 2.0 * ((1.0 + e).sqrt() * (ea / 2.0).sin()).atan2((1.0 - e).sqrt() * (ea / 2.0).cos());
    let p = el.a * (1.0 - e * e);
    let r = p / (1.0 + e * nu.cos());
    let u = w + nu;
    let rz = |x: f64| Matrix3::new(x.cos(), -x.sin(), 0.0, x.sin(), x.cos(), 0.0, 0.0, 0.0, 1.0);
    let rx = |x: f64| Matrix3::new(1.0, 0.0, 0.0, 0.0, x.cos(), -x.sin(), 0.0, x.sin(), x.cos());
    let rot = rz(el.raan) * rx(el.i) * rz(u);
    let pos = rot * nalgebra::Vector3::new(r, 0.0, 0.0);
    let h = (mu * p).sqrt();
    let vel = rot * nalgebra::Vector3::new(mu / h * e * nu.sin(), h / r, 0.0);
    (pos, vel)
}

fn nonlinear_rtn(c: &ChiefOrbit, y: &Vec6) -> nalgebra::Vector3<f64> {
    let ce = c.elements;
    let a = ce.a;
    let d_raan = y[5] / (a * ce.i.sin());
    let dep = OrbitalElements {
        a: a + y[0],
        theta: ce.theta + y[1] / a - d_raan * ce.i.cos(),
        e_x: ce.e_x + y[2] / a,
        e_y: ce.e_y + y[3] / a,
        i: ce.i + y[4] / a,
        raan: ce.raan + d_raan,
    };
    let (rc, vc) = kepler_position(&ce, c.mu);
    let (rd, _) = kepler_position(&dep, c.mu);
    let rhat = rc.normalize();
    let nhat = rc.cross(&vc).normalize();
    let that = nhat.cross(&rhat);
    let d = rd - rc;
    nalgebra::Vector3::new(d.dot(&rhat), d.dot(&that), d.dot(&nhat))
}

#[test]
fn rtn_map_against_two_orbit_construction_on_case_study_states() {
    let c = case_study_chief();
    let states = [
        Vec6::new(0.0, -400.0, 0.0, 0.0, 0.0, 0.0),
        Vec6::new(0.0, 0.0, 0.0, -150.0, 300.0, 0.0),
        Vec6::new(0.0, 0.0, -150.0, 0.0, 0.0, -300.0),
        Vec6::new(50.0, 200.0, 100.0, -100.0, 250.0, 300.0),
    ];
    for y in &states {
        let lin = rtn_map(&c, 0.0) * y;
        let non = nonlinear_rtn(&c, y);
        assert!((lin - non).norm() <= 0.01 * non.norm(), "{lin} vs {non}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn stm_composes(t0 in 0.0..20_000.0f64, d1 in 0.0..20_000.0f64, d2 in 0.0..20_000.0f64) {
        let c = case_study_chief();
        let (t1, t2) = (t0 + d1, t0 + d1 + d2);
        let lhs = stm(&c, t0, t2);
        let rhs = stm(&c, t1, t2) * stm(&c, t0, t1);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm());
    }

    #[test]
    fn semi_major_axis_row_is_invariant(t0 in 0.0..1e5f64, d in 0.0..1e5f64) {
        let phi = stm(&case_study_chief(), t0, t0 + d);
        prop_assert_eq!(phi.row(0).into_owned(), Mat6::identity().row(0).into_owned());
    }

    #[test]
    fn rtn_map_is_linear(u in -10.0..10.0f64, a in -5.0..5.0f64, b in -5.0..5.0f64,
                         y1 in proptest::array::uniform6(-500.0..500.0f64),
                         y2 in proptest::array::uniform6(-500.0..500.0f64)) {
        let t = rtn_map_at(u);
        let (y1, y2) = (Vec6::from(y1), Vec6::from(y2));
        let lhs = t * (a * y1 + b * y2);
        let rhs = a * (t * y1) + b * (t * y2);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn chained_arcs_match_integration(y0 in proptest::array::uniform6(-800.0..800.0f64),
                                      controls in proptest::collection::vec(proptest::array::uniform3(-200.0..200.0f64), 3),
                                      spans in proptest::collection::vec(100.0..1500.0f64, 3)) {
        let c = case_study_chief();
        let mut y = Vec6::from(y0);
        let mut y_ode = y;
        let mut t = 0.0;
        for (u, dt) in controls.iter().zip(&spans) {
            let u = Vec3::from(*u);
            y = stm(&c, t, t + dt) * y + control_convolution(&c, t, t + dt) * u;
            y_ode = rk4(&c, y_ode, u, t, t + dt, 1.0);
            t += dt;
        }
        prop_assert!(rel(&y, &y_ode) < 1e-6 * (t / c.period()).max(1.0), "{}", rel(&y, &y_ode));
    }

    #[test]
    fn rtn_map_against_two_orbit_construction(y in proptest::array::uniform6(-400.0..400.0f64), t in 0.0..6000.0f64) {
        let mut c = case_study_chief();
        let y = Vec6::from(y);
        c.elements.theta = latitude(&c, t);
        let non = nonlinear_rtn(&c, &y);
        prop_assume!(non.norm() >= 100.0 && non.norm() <= 1000.0);
        let lin = rtn_map_at(c.elements.theta) * y;
        prop_assert!((lin - non).norm() <= 0.01 * non.norm(), "{} vs {}", lin, non);
    }
}
