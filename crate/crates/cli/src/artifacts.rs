//! CSV and JSON artifacts of a solve, and reading them back for `check`.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use formguide_conic::SolveStatus;
use formguide_core::formulation::ProblemSize;
use formguide_core::roe::{Vec3, Vec6};
use formguide_core::scp::{ScpOutcome, Termination};
use formguide_core::{Discretization, FormulationKind, GuidanceSolution, Scenario};
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub epoch: usize,
    pub time_s: f64,
    pub deputy: usize,
    pub da_m: f64,
    pub dlambda_m: f64,
    pub dex_m: f64,
    pub dey_m: f64,
    pub dix_m: f64,
    pub diy_m: f64,
    pub r_m: f64,
    pub t_m: f64,
    pub n_m: f64,
}

/// Accelerations in m/s².
#[derive(Debug, Serialize, Deserialize)]
pub struct ControlRow {
    pub arc: usize,
    pub deputy: usize,
    pub t_start_s: f64,
    pub t_end_s: f64,
    pub u_r: f64,
    pub u_t: f64,
    pub u_n: f64,
    pub u_norm: f64,
    pub gamma_over_a: Option<f64>,
}

#[derive(Debug, Serialize)]
struct DistanceRow {
    epoch: usize,
    time_s: f64,
    pair: String,
    separation_m: f64,
}

#[derive(Debug, Serialize)]
struct TraceRow {
    iteration: usize,
    objective: f64,
    delta_v: f64,
    displacement_m: f64,
    collision_free: bool,
    min_separation_m: f64,
    solver_time_s: f64,
    solver_iterations: usize,
    status: String,
}

#[derive(Debug, Serialize)]
pub struct DeputySummary {
    pub name: String,
    pub delta_v: f64,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub kind: FormulationKind,
    pub backend: String,
    pub delta_v: f64,
    pub deputies: Vec<DeputySummary>,
    pub scp_iterations: usize,
    pub termination: Termination,
    pub certified: bool,
    pub status: String,
    pub size: ProblemSize,
    pub solver_time_s: f64,
    pub min_separation_m: f64,
    pub r_ca_m: f64,
    pub scale_c: Option<f64>,
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

pub fn pair_label(i: usize, j: Option<usize>) -> String {
    match j {
        Some(j) => format!("{i}-{j}"),
        None => format!("{i}-chief"),
    }
}

pub fn write_solution(dir: &Path, sol: &GuidanceSolution, disc: &Discretization) -> Result<()> {
    let a = disc.chief.a();
    let t = disc.grid.epochs();

    let mut w = writer(&dir.join("trajectory.csv"))?;
    for k in 0..disc.num_epochs() {
        for (i, y) in sol.y.iter().enumerate() {
            let y = y[k];
            let r = disc.rtn[k] * y;
            w.serialize(TrajectoryRow {
                epoch: k,
                time_s: t[k],
                deputy: i,
                da_m: y[0],
                dlambda_m: y[1],
                dex_m: y[2],
                dey_m: y[3],
                dix_m: y[4],
                diy_m: y[5],
                r_m: r[0],
                t_m: r[1],
                n_m: r[2],
            })?;
        }
    }
    w.flush()?;

    let mut w = writer(&dir.join("controls.csv"))?;
    for (l, k) in disc.grid.forced_arcs().enumerate() {
        for (i, u) in sol.u.iter().enumerate() {
            let u = u[k] / a;
            w.serialize(ControlRow {
                arc: k,
                deputy: i,
                t_start_s: t[k],
                t_end_s: t[k + 1],
                u_r: u[0],
                u_t: u[1],
                u_n: u[2],
                u_norm: u.norm(),
                gamma_over_a: sol.gamma.as_ref().map(|g| g[i][l] / a),
            })?;
        }
    }
    w.flush()?;

    let mut w = writer(&dir.join("distances.csv"))?;
    for k in 0..disc.num_epochs() {
        let map = &disc.rtn[k];
        for i in 0..sol.y.len() {
            let chief = (map * sol.y[i][k]).norm();
            w.serialize(DistanceRow { epoch: k, time_s: t[k], pair: pair_label(i, None), separation_m: chief })?;
            for j in i + 1..sol.y.len() {
                let d = (map * (sol.y[i][k] - sol.y[j][k])).norm();
                w.serialize(DistanceRow { epoch: k, time_s: t[k], pair: pair_label(i, Some(j)), separation_m: d })?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace(path: &Path, outcome: &ScpOutcome) -> Result<()> {
    let mut w = writer(path)?;
    for it in &outcome.trace.iterates {
        w.serialize(TraceRow {
            iteration: it.iteration,
            objective: it.objective,
            delta_v: it.delta_v,
            displacement_m: it.displacement,
            collision_free: it.collision_free,
            min_separation_m: it.min_separation,
            solver_time_s: it.solver_time.as_secs_f64(),
            solver_iterations: it.solver_iterations,
            status: it.status.map_or_else(|| "none".to_string(), |s| s.to_string()),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<()> {
    let text = serde_json::to_string_pretty(summary)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// Rebuilds a solution from `controls.csv` and, when present, `trajectory.csv`.
/// Without a trajectory the states are propagated from the scenario's initial
/// conditions.
pub fn read_solution(dir: &Path, scenario: &Scenario, disc: &Discretization) -> Result<GuidanceSolution> {
    let n = scenario.deputies.len();
    let a = disc.chief.a();
    let arcs = disc.num_intervals();
    let epochs = disc.num_epochs();

    let path = dir.join("controls.csv");
    let mut reader = csv::Reader::from_path(&path).with_context(|| format!("opening {}", path.display()))?;
    let mut u = vec![vec![Vec3::zeros(); arcs]; n];
    for (line, row) in reader.deserialize::<ControlRow>().enumerate() {
        let row = row.with_context(|| format!("{} row {}", path.display(), line + 1))?;
        if row.deputy >= n || row.arc >= arcs {
            bail!("{} row {}: deputy {} arc {} out of range", path.display(), line + 1, row.deputy, row.arc);
        }
        u[row.deputy][row.arc] = Vec3::new(row.u_r, row.u_t, row.u_n) * a;
    }

    let path = dir.join("trajectory.csv");
    let y = if path.exists() {
        let mut reader = csv::Reader::from_path(&path).with_context(|| format!("opening {}", path.display()))?;
        let mut y = vec![vec![None; epochs]; n];
        for (line, row) in reader.deserialize::<TrajectoryRow>().enumerate() {
            let r = row.with_context(|| format!("{} row {}", path.display(), line + 1))?;
            if r.deputy >= n || r.epoch >= epochs {
                bail!("{} row {}: deputy {} epoch {} out of range", path.display(), line + 1, r.deputy, r.epoch);
            }
            y[r.deputy][r.epoch] = Some(Vec6::new(r.da_m, r.dlambda_m, r.dex_m, r.dey_m, r.dix_m, r.diy_m));
        }
        y.into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.into_iter()
                    .enumerate()
                    .map(|(k, s)| s.with_context(|| format!("trajectory.csv lacks deputy {i} epoch {k}")))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        scenario.deputies.iter().zip(&u).map(|(d, u)| disc.propagate(&d.y0, u)).collect()
    };
    Ok(GuidanceSolution::assemble(FormulationKind::Socp, disc, y, u, None, SolveStatus::Optimal, f64::NAN))
}
