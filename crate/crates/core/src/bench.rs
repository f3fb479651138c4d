//! Timing harness over (scenario, formulation) cells and the deputy-count sweep.

use std::sync::Mutex;
use std::time::Duration;

use formguide_conic::{Backend, SolveOptions};
use serde::Serialize;

use crate::formulation::{FormulationKind, ProblemSize};
use crate::scenario::{n_sweep_scenario, Scenario};
use crate::scp::{run_scp, ScpConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub scenario: String,
    pub kind: FormulationKind,
    pub backend: String,
    pub deputies: usize,
    pub repeats: usize,
    /// Mean over repeats of the summed solver time of one SCP run (s).
    pub mean_solver_time: f64,
    pub delta_v: f64,
    pub variables: usize,
    pub constraints: usize,
    pub scp_iterations: usize,
    pub certified: bool,
    /// `ok` or the failure message.
    pub status: String,
}

pub fn bench_cell(
    scenario: &Scenario,
    kind: FormulationKind,
    backend: &dyn Backend,
    config: &ScpConfig,
    options: &SolveOptions,
    repeats: usize,
) -> BenchRow {
    let mut row = BenchRow {
        scenario: scenario.name.clone(),
        kind,
        backend: backend.name().to_string(),
        deputies: scenario.deputies.len(),
        repeats: repeats.max(1),
        mean_solver_time: f64::NAN,
        delta_v: f64::NAN,
        variables: 0,
        constraints: 0,
        scp_iterations: 0,
        certified: false,
        status: "ok".into(),
    };
    let disc = match scenario.discretize() {
        Ok(d) => d,
        Err(e) => {
            row.status = e.to_string();
            return row;
        }
    };
    let mut total = Duration::ZERO;
    for _ in 0..row.repeats {
        match run_scp(scenario, &disc, kind, config, backend, options) {
            Ok(out) => {
                total += out.trace.solver_time();
                let ProblemSize { variables, constraints } = out.size;
                row.delta_v = out.solution.delta_v;
                row.variables = variables;
                row.constraints = constraints;
                row.scp_iterations = out.iterations;
                row.certified = out.certified;
            }
            Err(e) => {
                row.status = e.to_string();
                return row;
            }
        }
    }
    row.mean_solver_time = total.as_secs_f64() / row.repeats as f64;
    row
}

/// Runs every (scenario, kind) cell, fanning out over `threads` workers.
/// Rows come back in input order.
pub fn bench(
    scenarios: &[Scenario],
    kinds: &[FormulationKind],
    backend: &dyn Backend,
    config: &ScpConfig,
    options: &SolveOptions,
    repeats: usize,
    threads: usize,
) -> Vec<BenchRow> {
    let cells: Vec<(usize, &Scenario, FormulationKind)> = scenarios
        .iter()
        .flat_map(|s| kinds.iter().map(move |&k| (s, k)))
        .enumerate()
        .map(|(n, (s, k))| (n, s, k))
        .collect();
    let queue = Mutex::new(cells.into_iter());
    let rows = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..threads.max(1) {
            scope.spawn(|| loop {
                let next = queue.lock().unwrap().next();
                let Some((n, s, k)) = next else { break };
                let row = bench_cell(s, k, backend, config, options, repeats);
                rows.lock().unwrap().push((n, row));
            });
        }
    });
    let mut rows = rows.into_inner().unwrap();
    rows.sort_by_key(|r| r.0);
    rows.into_iter().map(|r| r.1).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSettings {
    pub spacing: f64,
    pub pco_radius: f64,
    pub kind: FormulationKind,
    pub repeats: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self { spacing: 200.0, pco_radius: 500.0, kind: FormulationKind::Socp, repeats: 1 }
    }
}

pub fn sweep_n(
    base: &Scenario,
    counts: impl IntoIterator<Item = usize>,
    settings: &SweepSettings,
    backend: &dyn Backend,
    config: &ScpConfig,
    options: &SolveOptions,
) -> Vec<BenchRow> {
    counts
        .into_iter()
        .map(|n| {
            let s = n_sweep_scenario(base, n, settings.spacing, settings.pco_radius);
            bench_cell(&s, settings.kind, backend, config, options, settings.repeats)
        })
        .collect()
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut s = 0;
    while s < idx.len() {
        let mut e = s;
        while e + 1 < idx.len() && v[idx[e + 1]] == v[idx[s]] {
            e += 1;
        }
        let avg = (s + e) as f64 / 2.0 + 1.0;
        for &i in &idx[s..=e] {
            r[i] = avg;
        }
        s = e + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_of_monotone_series_is_one() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((spearman(&x, &[0.1, 0.5, 0.7, 9.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&x, &[4.0, 3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
    }
}
