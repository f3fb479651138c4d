//! Scenario schema, TOML (de)serialization and the bundled scenarios.
//!
//! Every dimensional field is a `"value unit"` string; vectors are
//! `{ values = [...], unit = "m" }`. Loaded scenarios are held in SI units.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, ScenarioError};
use crate::formulation::{DeputySpec, PolyhedronSpec, ScaleFactor};
use crate::grid::{build_time_grid, min_coast_duration, BurnCount, TimeGrid};
use crate::model::Discretization;
use crate::roe::{rtn_map, ChiefOrbit, OrbitalElements, Vec6};

pub const SCENARIO_FORMAT: &str = "formguide-scenario v1";
/// Directory searched for `<name>.toml` before the compiled-in copies.
pub const DATA_DIR_ENV: &str = "FORMGUIDE_DATA_DIR";

const BUNDLED: [(&str, &str); 5] = [
    ("case-study", include_str!("../data/scenarios/case-study.toml")),
    ("reconfig-1", include_str!("../data/scenarios/reconfig-1.toml")),
    ("reconfig-2", include_str!("../data/scenarios/reconfig-2.toml")),
    ("reconfig-3", include_str!("../data/scenarios/reconfig-3.toml")),
    ("reconfig-4", include_str!("../data/scenarios/reconfig-4.toml")),
];

/// Duration given either in seconds or in chief orbital periods.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TimeSpan {
    Seconds(f64),
    Orbits(f64),
}

impl TimeSpan {
    pub fn seconds(&self, period: f64) -> f64 {
        match *self {
            TimeSpan::Seconds(s) => s,
            TimeSpan::Orbits(o) => o * period,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub chief: ChiefOrbit,
    pub deputies: Vec<DeputySpec>,
    pub duration: TimeSpan,
    pub t_forced: TimeSpan,
    /// Nominal coast duration (s).
    pub t_natural: f64,
    /// Maximum slew rate (rad/s).
    pub omega_max: f64,
    /// Settling margin after a slew (s).
    pub t_safety: f64,
    /// Keep-out radius (m).
    pub r_ca: f64,
    pub poly: PolyhedronSpec,
    pub n_burns: BurnCount,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), CoreError> {
        self.chief.validate()?;
        if self.deputies.is_empty() {
            return Err(CoreError::Deputy { name: String::new(), message: "at least one deputy is required".into() });
        }
        for d in &self.deputies {
            d.validate()?;
        }
        if !(self.r_ca >= 0.0) {
            return Err(CoreError::Grid(format!("keep-out radius {} must be non-negative", self.r_ca)));
        }
        self.poly.validate()?;
        self.time_grid()?;
        Ok(())
    }

    pub fn period(&self) -> f64 {
        self.chief.period()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.duration.seconds(self.period())
    }

    pub fn min_coast(&self) -> Result<f64, CoreError> {
        min_coast_duration(self.omega_max, self.t_safety)
    }

    pub fn time_grid(&self) -> Result<TimeGrid, CoreError> {
        let p = self.period();
        build_time_grid(self.duration.seconds(p), self.t_forced.seconds(p), self.t_natural, self.n_burns, self.min_coast()?)
    }

    pub fn discretize(&self) -> Result<Discretization, CoreError> {
        Ok(Discretization::new(self.chief, self.time_grid()?))
    }

    /// Boundary states closer than the keep-out radius, as readable notes.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let t_end = self.duration_seconds();
        for (label, t, pick) in [("initial", 0.0, 0usize), ("final", t_end, 1)] {
            let map = rtn_map(&self.chief, t);
            let state = |d: &DeputySpec| if pick == 0 { d.y0 } else { d.yf };
            for (i, a) in self.deputies.iter().enumerate() {
                let dc = (map * state(a)).norm();
                if dc < self.r_ca {
                    out.push(format!("{label} state of {} is {dc:.1} m from the chief", a.name));
                }
                for b in &self.deputies[i + 1..] {
                    let dd = (map * (state(a) - state(b))).norm();
                    if dd < self.r_ca {
                        out.push(format!("{label} states of {} and {} are {dd:.1} m apart", a.name, b.name));
                    }
                }
            }
        }
        out
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let de = toml::Deserializer::parse(text).map_err(|e| ScenarioError::Schema {
            path: "<document>".into(),
            message: e.to_string(),
        })?;
        let doc: Document = serde_path_to_error::deserialize(de).map_err(|e| ScenarioError::Schema {
            path: e.path().to_string(),
            message: e.inner().message().to_string(),
        })?;
        let s = doc.into_scenario()?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml_string(&self) -> Result<String, ScenarioError> {
        toml::to_string(&Document::from_scenario(self)).map_err(|e| ScenarioError::Serialize(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }
}

pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|b| b.0).collect()
}

/// A bundled scenario, preferring `$FORMGUIDE_DATA_DIR/<name>.toml` when present.
pub fn bundled(name: &str) -> Result<Scenario, ScenarioError> {
    if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
        let path = Path::new(&dir).join(format!("{name}.toml"));
        if path.is_file() {
            return Scenario::load(path);
        }
    }
    let text = BUNDLED
        .iter()
        .find(|b| b.0 == name)
        .map(|b| b.1)
        .ok_or_else(|| ScenarioError::UnknownBundled(name.to_string()))?;
    Scenario::from_toml_str(text)
}

pub fn bundled_scenarios() -> Result<Vec<Scenario>, ScenarioError> {
    bundled_names().into_iter().map(bundled).collect()
}

/// Bundled name or file path.
pub fn resolve(name_or_path: &str) -> Result<Scenario, ScenarioError> {
    if BUNDLED.iter().any(|b| b.0 == name_or_path) {
        bundled(name_or_path)
    } else {
        Scenario::load(name_or_path)
    }
}

/// `n` deputies starting in along-track slots `±spacing, ±2·spacing, …` and
/// ending evenly phased on a projected circular orbit of radius `pco_radius`.
/// Chief, thruster and timing come from `base`; the duration is 10 orbits.
pub fn n_sweep_scenario(base: &Scenario, n: usize, spacing: f64, pco_radius: f64) -> Scenario {
    let mut slots: Vec<f64> = (0..n).map(|j| (j / 2 + 1) as f64 * spacing * if j % 2 == 0 { -1.0 } else { 1.0 }).collect();
    slots.sort_by(f64::total_cmp);
    let template = &base.deputies[0];
    let deputies = slots
        .iter()
        .enumerate()
        .map(|(j, &s)| {
            let phi = -PI / 2.0 - 2.0 * PI * j as f64 / n as f64;
            let (sp, cp) = phi.sin_cos();
            let rho = pco_radius;
            DeputySpec {
                name: format!("D{}", j + 1),
                y0: Vec6::new(0.0, s, 0.0, 0.0, 0.0, 0.0),
                yf: Vec6::new(0.0, 0.0, 0.5 * rho * cp, 0.5 * rho * sp, -rho * sp, rho * cp),
                f_max: template.f_max,
                mass: template.mass,
            }
        })
        .collect();
    Scenario {
        name: format!("sweep-n{n}"),
        description: format!("{n} deputies, along-track line to projected circular orbit"),
        deputies,
        duration: TimeSpan::Orbits(10.0),
        n_burns: BurnCount::Auto,
        ..base.clone()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    format: String,
    name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    description: String,
    chief: ChiefDoc,
    timing: TimingDoc,
    safety: SafetyDoc,
    polyhedron: PolyDoc,
    deputies: Vec<DeputyDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChiefDoc {
    a: String,
    e_x: f64,
    e_y: f64,
    i: String,
    raan: String,
    theta: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    j2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r_earth: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CountOrWord {
    Count(u64),
    Word(String),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NumberOrWord {
    Number(f64),
    Word(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimingDoc {
    duration: String,
    t_forced: String,
    t_natural: String,
    n_burns: CountOrWord,
    omega_max: String,
    t_safety: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SafetyDoc {
    r_ca: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyDoc {
    n_dir: u64,
    scale_c: NumberOrWord,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorDoc {
    values: Vec<f64>,
    unit: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeputyDoc {
    name: String,
    y0: VectorDoc,
    yf: VectorDoc,
    thrust: String,
    mass: String,
}

#[derive(Clone, Copy)]
enum Dim {
    Length,
    Angle,
    Time,
    Rate,
    Force,
    Mass,
    Mu,
}

fn unit_factor(dim: Dim, unit: &str) -> Option<f64> {
    Some(match (dim, unit) {
        (Dim::Length, "m") => 1.0,
        (Dim::Length, "km") => 1e3,
        (Dim::Angle, "rad") => 1.0,
        (Dim::Angle, "deg") => PI / 180.0,
        (Dim::Time, "s") => 1.0,
        (Dim::Time, "min") => 60.0,
        (Dim::Time, "h") => 3600.0,
        (Dim::Rate, "rad/s") => 1.0,
        (Dim::Rate, "deg/s") => PI / 180.0,
        (Dim::Force, "N") => 1.0,
        (Dim::Force, "mN") => 1e-3,
        (Dim::Force, "uN" | "µN") => 1e-6,
        (Dim::Mass, "kg") => 1.0,
        (Dim::Mass, "g") => 1e-3,
        (Dim::Mu, "m^3/s^2") => 1.0,
        (Dim::Mu, "km^3/s^2") => 1e9,
        _ => return None,
    })
}

fn schema(path: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Schema { path: path.to_string(), message: message.into() }
}

fn split_quantity<'a>(path: &str, text: &'a str) -> Result<(f64, &'a str), ScenarioError> {
    let mut it = text.split_whitespace();
    let (Some(v), Some(u), None) = (it.next(), it.next(), it.next()) else {
        return Err(schema(path, format!("expected \"<value> <unit>\", found {text:?}")));
    };
    let v: f64 = v.parse().map_err(|_| schema(path, format!("bad number {v:?}")))?;
    if !v.is_finite() {
        return Err(schema(path, "value must be finite"));
    }
    Ok((v, u))
}

fn quantity(path: &str, text: &str, dim: Dim) -> Result<f64, ScenarioError> {
    let (v, u) = split_quantity(path, text)?;
    let f = unit_factor(dim, u).ok_or_else(|| schema(path, format!("unit {u:?} not allowed here")))?;
    Ok(if f == 1.0 { v } else { v * f })
}

fn time_span(path: &str, text: &str) -> Result<TimeSpan, ScenarioError> {
    let (v, u) = split_quantity(path, text)?;
    if u == "orbit" || u == "orbits" {
        return Ok(TimeSpan::Orbits(v));
    }
    let f = unit_factor(Dim::Time, u).ok_or_else(|| schema(path, format!("unit {u:?} not allowed here")))?;
    Ok(TimeSpan::Seconds(v * f))
}

fn vector(path: &str, doc: &VectorDoc) -> Result<Vec6, ScenarioError> {
    if doc.values.len() != 6 {
        return Err(schema(path, format!("expected 6 values, found {}", doc.values.len())));
    }
    let f = unit_factor(Dim::Length, &doc.unit)
        .ok_or_else(|| schema(&format!("{path}.unit"), format!("unit {:?} not allowed here", doc.unit)))?;
    Ok(Vec6::from_iterator(doc.values.iter().map(|v| v * f)))
}

fn span_text(t: &TimeSpan) -> String {
    match t {
        TimeSpan::Seconds(s) => format!("{s} s"),
        TimeSpan::Orbits(o) => format!("{o} orbit"),
    }
}

impl Document {
    fn into_scenario(self) -> Result<Scenario, ScenarioError> {
        if self.format != SCENARIO_FORMAT {
            return Err(ScenarioError::Format(self.format));
        }
        let c = &self.chief;
        let elements = OrbitalElements {
            a: quantity("chief.a", &c.a, Dim::Length)?,
            theta: quantity("chief.theta", &c.theta, Dim::Angle)?,
            e_x: c.e_x,
            e_y: c.e_y,
            i: quantity("chief.i", &c.i, Dim::Angle)?,
            raan: quantity("chief.raan", &c.raan, Dim::Angle)?,
        };
        let mut chief = ChiefOrbit::earth(elements);
        if let Some(mu) = &c.mu {
            chief.mu = quantity("chief.mu", mu, Dim::Mu)?;
        }
        if let Some(j2) = c.j2 {
            chief.j2 = j2;
        }
        if let Some(r) = &c.r_earth {
            chief.r_earth = quantity("chief.r_earth", r, Dim::Length)?;
        }
        let t = &self.timing;
        let n_burns = match &t.n_burns {
            CountOrWord::Count(n) => BurnCount::Fixed(*n as usize),
            CountOrWord::Word(w) if w == "auto" => BurnCount::Auto,
            CountOrWord::Word(w) => return Err(schema("timing.n_burns", format!("expected an integer or \"auto\", found {w:?}"))),
        };
        let scale_c = match &self.polyhedron.scale_c {
            NumberOrWord::Number(v) => ScaleFactor::Fixed(*v),
            NumberOrWord::Word(w) if w == "auto" => ScaleFactor::Auto,
            NumberOrWord::Word(w) => {
                return Err(schema("polyhedron.scale_c", format!("expected a number or \"auto\", found {w:?}")))
            }
        };
        let deputies = self
            .deputies
            .iter()
            .enumerate()
            .map(|(k, d)| {
                let p = |f: &str| format!("deputies[{k}].{f}");
                Ok(DeputySpec {
                    name: d.name.clone(),
                    y0: vector(&p("y0"), &d.y0)?,
                    yf: vector(&p("yf"), &d.yf)?,
                    f_max: quantity(&p("thrust"), &d.thrust, Dim::Force)?,
                    mass: quantity(&p("mass"), &d.mass, Dim::Mass)?,
                })
            })
            .collect::<Result<Vec<_>, ScenarioError>>()?;
        Ok(Scenario {
            name: self.name,
            description: self.description,
            chief,
            deputies,
            duration: time_span("timing.duration", &t.duration)?,
            t_forced: time_span("timing.t_forced", &t.t_forced)?,
            t_natural: quantity("timing.t_natural", &t.t_natural, Dim::Time)?,
            omega_max: quantity("timing.omega_max", &t.omega_max, Dim::Rate)?,
            t_safety: quantity("timing.t_safety", &t.t_safety, Dim::Time)?,
            r_ca: quantity("safety.r_ca", &self.safety.r_ca, Dim::Length)?,
            poly: PolyhedronSpec { n_dir: self.polyhedron.n_dir as usize, scale_c },
            n_burns,
        })
    }

    fn from_scenario(s: &Scenario) -> Self {
        let e = &s.chief.elements;
        Document {
            format: SCENARIO_FORMAT.into(),
            name: s.name.clone(),
            description: s.description.clone(),
            chief: ChiefDoc {
                a: format!("{} m", e.a),
                e_x: e.e_x,
                e_y: e.e_y,
                i: format!("{} rad", e.i),
                raan: format!("{} rad", e.raan),
                theta: format!("{} rad", e.theta),
                mu: Some(format!("{} m^3/s^2", s.chief.mu)),
                j2: Some(s.chief.j2),
                r_earth: Some(format!("{} m", s.chief.r_earth)),
            },
            timing: TimingDoc {
                duration: span_text(&s.duration),
                t_forced: span_text(&s.t_forced),
                t_natural: format!("{} s", s.t_natural),
                n_burns: match s.n_burns {
                    BurnCount::Auto => CountOrWord::Word("auto".into()),
                    BurnCount::Fixed(n) => CountOrWord::Count(n as u64),
                },
                omega_max: format!("{} rad/s", s.omega_max),
                t_safety: format!("{} s", s.t_safety),
            },
            safety: SafetyDoc { r_ca: format!("{} m", s.r_ca) },
            polyhedron: PolyDoc {
                n_dir: s.poly.n_dir as u64,
                scale_c: match s.poly.scale_c {
                    ScaleFactor::Fixed(c) => NumberOrWord::Number(c),
                    ScaleFactor::Auto => NumberOrWord::Word("auto".into()),
                },
            },
            deputies: s
                .deputies
                .iter()
                .map(|d| DeputyDoc {
                    name: d.name.clone(),
                    y0: VectorDoc { values: d.y0.iter().copied().collect(), unit: "m".into() },
                    yf: VectorDoc { values: d.yf.iter().copied().collect(), unit: "m".into() },
                    thrust: format!("{} N", d.f_max),
                    mass: format!("{} kg", d.mass),
                })
                .collect(),
        }
    }
}
