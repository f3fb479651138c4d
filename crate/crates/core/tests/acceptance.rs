//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are evaluated at full tolerance and
//! reported as FAIL, but do not fail the process unless
//! `FORMGUIDE_ACCEPTANCE_STRICT` is set. Any other FAIL exits non-zero.

use std::process::ExitCode;
use std::time::Instant;

use formguide_conic::{InteriorPoint, SolveOptions};
use formguide_core::bench::{spearman, sweep_n, SweepSettings};
use formguide_core::formulation::polyhedron::{enumerate_vertices_brute_force, tn_coverage};
use formguide_core::formulation::{build_program, compute_scale_factor, BuildOptions, CheckTolerances, Reference, ScaleFactor};
use formguide_core::oracle::replay_trajectory;
use formguide_core::roe::{control_convolution, stm, Vec3, Vec6};
use formguide_core::scenario::bundled;
use formguide_core::scp::Termination;
use formguide_core::{run_scp, Discretization, FormulationKind, Scenario, ScpConfig, ScpOutcome};

mod common;

const KNOWN_FAILURES: [usize; 2] = [3, 9];
const BENCHMARKS: [&str; 4] = ["reconfig-1", "reconfig-2", "reconfig-3", "reconfig-4"];

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

struct Problem {
    scenario: Scenario,
    disc: Discretization,
}

fn problem(name: &str) -> Problem {
    let scenario = bundled(name).expect("bundled scenario");
    let disc = scenario.discretize().expect("discretization");
    Problem { scenario, disc }
}

fn scp(p: &Problem, kind: FormulationKind, config: &ScpConfig) -> Result<ScpOutcome, String> {
    run_scp(&p.scenario, &p.disc, kind, config, &InteriorPoint::new(), &SolveOptions::default()).map_err(|e| e.to_string())
}

/// Largest `‖u‖ − u_max` (m/s²) and `‖u‖ / u_max` over forced arcs.
fn thrust_margin(p: &Problem, out: &ScpOutcome) -> (f64, f64) {
    let a = p.disc.chief.a();
    let mut excess = f64::NEG_INFINITY;
    let mut ratio: f64 = 0.0;
    for (i, d) in p.scenario.deputies.iter().enumerate() {
        for k in p.disc.grid.forced_arcs() {
            let u = out.solution.u[i][k].norm() / a;
            excess = excess.max(u - d.u_max());
            ratio = ratio.max(u / d.u_max());
        }
    }
    (excess, ratio)
}

/// Largest `|Γ − ‖ū‖| / (a·u_max)` over forced arcs.
fn gamma_gap(p: &Problem, out: &ScpOutcome) -> f64 {
    let a = p.disc.chief.a();
    let gamma = out.solution.gamma.as_ref().expect("slack formulation");
    let mut worst: f64 = 0.0;
    for (i, d) in p.scenario.deputies.iter().enumerate() {
        for (l, k) in p.disc.grid.forced_arcs().enumerate() {
            worst = worst.max((gamma[i][l] - out.solution.u[i][k].norm()).abs() / (a * d.u_max()));
        }
    }
    worst
}

struct Runs {
    case: Problem,
    case_lps: Result<ScpOutcome, String>,
    case_lps_secs: f64,
    case_eps: Result<ScpOutcome, String>,
    case_socp: Result<ScpOutcome, String>,
    case_lp: Result<ScpOutcome, String>,
    case_lp_eps: Result<ScpOutcome, String>,
    bench: Vec<(Problem, [Result<ScpOutcome, String>; 3])>,
}

fn eps_config() -> ScpConfig {
    ScpConfig { stop_on_collision_free: false, max_iterations: 15, ..ScpConfig::default() }
}

fn run_all() -> Runs {
    let case = problem("case-study");
    let start = Instant::now();
    let case_lps = scp(&case, FormulationKind::LpScaled, &ScpConfig::default());
    let case_lps_secs = start.elapsed().as_secs_f64();
    let case_eps = scp(&case, FormulationKind::LpScaled, &eps_config());
    let case_socp = scp(&case, FormulationKind::Socp, &ScpConfig::default());
    let case_lp = scp(&case, FormulationKind::Lp, &ScpConfig::default());
    let case_lp_eps = scp(&case, FormulationKind::Lp, &eps_config());
    let bench = BENCHMARKS
        .iter()
        .map(|name| {
            let p = problem(name);
            let runs = [FormulationKind::Qcqp, FormulationKind::Socp, FormulationKind::LpScaled]
                .map(|k| scp(&p, k, &ScpConfig::default()));
            (p, runs)
        })
        .collect();
    Runs { case, case_lps, case_lps_secs, case_eps, case_socp, case_lp, case_lp_eps, bench }
}

fn criterion_1(r: &Runs) -> Verdict {
    match &r.case_lps {
        Ok(out) => {
            let dv = out.solution.delta_v;
            let pass = (1.55..=2.10).contains(&dv) && out.certified && r.case_lps_secs < 60.0;
            Verdict::new(pass, format!("ΔV {dv:.4} m/s, certified {}, {:.2} s", out.certified, r.case_lps_secs))
        }
        Err(e) => Verdict::new(false, e.clone()),
    }
}

fn criterion_2(r: &Runs) -> Verdict {
    let (Ok(quick), Ok(full)) = (&r.case_lps, &r.case_eps) else {
        return Verdict::new(false, "SCP run failed");
    };
    let pass = quick.iterations == 1
        && quick.termination == Termination::CollisionFree
        && full.termination == Termination::Converged
        && (2..=15).contains(&full.iterations)
        && full.solution.delta_v <= quick.solution.delta_v;
    Verdict::new(
        pass,
        format!(
            "collision-free run {} iteration(s) ({:?}); ε run {} iterations ({:?}), ΔV {:.4} vs {:.4}",
            quick.iterations, quick.termination, full.iterations, full.termination, full.solution.delta_v, quick.solution.delta_v
        ),
    )
}

fn criterion_3(r: &Runs) -> Verdict {
    let table = [[1.18, 1.03, 1.05], [3.04, 2.66, 2.76], [1.32, 1.25, 1.31], [4.77, 4.30, 4.50]];
    let mut pass = true;
    let mut parts = Vec::new();
    for ((p, runs), expect) in r.bench.iter().zip(table) {
        let dv: Vec<f64> = runs.iter().map(|o| o.as_ref().map_or(f64::NAN, |o| o.solution.delta_v)).collect();
        let (q, s, l) = (dv[0], dv[1], dv[2]);
        let ordered = s < l && l < q;
        let within = dv.iter().zip(expect).all(|(v, e)| (v - e).abs() <= 0.15 * e);
        pass &= ordered && within;
        let mark = match (ordered, within) {
            (true, true) => "",
            (false, true) => " [order]",
            (true, false) => " [±15%]",
            (false, false) => " [order, ±15%]",
        };
        parts.push(format!("{} Q {q:.4} S {s:.4} L {l:.4}{mark}", p.scenario.name));
    }
    Verdict::new(pass, parts.join("; "))
}

fn criterion_4(r: &Runs) -> Verdict {
    let expected = [(1248, 1316, 1292), (2412, 2544, 2508), (960, 1012, 988), (3816, 4026, 3990)];
    let mut pass = true;
    let mut parts = Vec::new();
    for ((p, _), (nq, ns, delta)) in r.bench.iter().zip(expected) {
        let reference = Reference::uncontrolled(&p.scenario, &p.disc);
        let build = |k| build_program(k, &p.scenario, &p.disc, Some(&reference), &BuildOptions::default());
        let (Ok(q), Ok(s), Ok(lp)) = (build(FormulationKind::Qcqp), build(FormulationKind::Socp), build(FormulationKind::Lp))
        else {
            return Verdict::new(false, format!("{}: build failed", p.scenario.name));
        };
        let d = lp.size().constraints as i64 - s.size().constraints as i64;
        let got = (q.size().variables, s.size().variables, lp.size().variables);
        pass &= got == (nq, ns, ns) && d == delta as i64;
        parts.push(format!("{} vars {}/{} Δcons {d}", p.scenario.name, got.0, got.1));
    }
    Verdict::new(pass, parts.join("; "))
}

fn criterion_5() -> Verdict {
    let Ok(c) = compute_scale_factor(12) else {
        return Verdict::new(false, "scale factor failed");
    };
    let vertices = enumerate_vertices_brute_force(12).unwrap_or_default();
    let inside = !vertices.is_empty() && vertices.iter().all(|v| (v / c).norm() <= 1.0 + 1e-12);
    let coverage = tn_coverage(12);
    let pass = (1.015..=1.020).contains(&c) && inside && (coverage - 0.9549).abs() <= 1e-4;
    Verdict::new(pass, format!("c(12) = {c:.5}, {} vertices inside unit sphere: {inside}, coverage {coverage:.4}", vertices.len()))
}

fn criterion_6(r: &Runs) -> Verdict {
    let mut scaled = vec![(&r.case, &r.case_lps), (&r.case, &r.case_eps)];
    scaled.extend(r.bench.iter().map(|(p, runs)| (p, &runs[2])));
    let mut worst = f64::NEG_INFINITY;
    for (p, out) in scaled {
        match out {
            Ok(out) => worst = worst.max(thrust_margin(p, out).0),
            Err(e) => return Verdict::new(false, e.clone()),
        }
    }
    let mut ratios = Vec::new();
    for out in [&r.case_lp, &r.case_lp_eps] {
        match out {
            Ok(out) => ratios.push(thrust_margin(&r.case, out).1),
            Err(e) => return Verdict::new(false, e.clone()),
        }
    }
    let bound = ratios.iter().all(|&x| x <= 1.017);
    let exceeds = ratios.iter().any(|&x| x > 1.0);
    let note = if exceeds { "exceedance reproduced" } else { "no exceedance observed, containment bound only" };
    Verdict::new(
        worst <= 1e-12 && bound,
        format!("LPScaled max ‖u‖ − u_max = {worst:.3e} m/s²; LP c = 1 ratios {ratios:.4?} ({note})"),
    )
}

fn criterion_7(r: &Runs) -> Verdict {
    let mut runs = vec![(&r.case, &r.case_socp)];
    runs.extend(r.bench.iter().map(|(p, runs)| (p, &runs[1])));
    let mut worst: f64 = 0.0;
    for (p, out) in runs {
        match out {
            Ok(out) => worst = worst.max(gamma_gap(p, out)),
            Err(e) => return Verdict::new(false, e.clone()),
        }
    }
    Verdict::new(worst <= 1e-6, format!("max |Γ − ‖ū‖| = {worst:.3e}·a·u_max"))
}

fn criterion_8(r: &Runs) -> Verdict {
    let chief = &r.case.disc.chief;
    let mat_rel = |a: &common::Mat6, b: &common::Mat6| (a - b).norm() / b.norm();

    let identity = stm(chief, 500.0, 500.0) == common::Mat6::identity();
    let mut composition: f64 = 0.0;
    for (t0, t1, t2) in [(0.0, 700.0, 2500.0), (123.4, 4000.0, 9000.0), (0.0, 5555.5, 27_000.0)] {
        let direct = stm(chief, t0, t2);
        composition = composition.max(mat_rel(&(stm(chief, t1, t2) * stm(chief, t0, t1)), &direct));
    }

    let mut kepler = *chief;
    kepler.j2 = 0.0;
    let (da, span) = (100.0, 3.0 * kepler.period());
    let drift = (stm(&kepler, 0.0, span) * Vec6::new(da, 0.0, 0.0, 0.0, 0.0, 0.0))[1];
    let expected = -1.5 * kepler.mean_motion() * da * span;
    let drift_err = ((drift - expected) / expected).abs();

    let t = r.case.disc.grid.epochs();
    let mut psi_err: f64 = 0.0;
    for k in r.case.disc.grid.forced_arcs() {
        let psi = control_convolution(chief, t[k], t[k + 1]);
        let mut oracle = common::Mat6x3::zeros();
        for c in 0..3 {
            let mut u = Vec3::zeros();
            u[c] = 1.0;
            oracle.set_column(c, &common::rk4(chief, Vec6::zeros(), u, t[k], t[k + 1], 1.0));
        }
        psi_err = psi_err.max((psi - oracle).norm() / oracle.norm());
    }

    let replay = match &r.case_lps {
        Ok(out) => {
            let tol = CheckTolerances { state: 1e-6, ..CheckTolerances::default() };
            replay_trajectory(&out.solution, &r.case.scenario, &r.case.disc, &tol).replay_error
        }
        Err(_) => f64::INFINITY,
    };
    let pass = identity && composition <= 1e-12 && drift_err <= 1e-12 && psi_err <= 1e-6 && replay <= 1e-6;
    Verdict::new(
        pass,
        format!(
            "identity {identity}, composition {composition:.1e}, drift {drift_err:.1e}, Ψ vs RK4 {psi_err:.1e}, replay {replay:.1e} m"
        ),
    )
}

fn criterion_9() -> Verdict {
    let base = problem("reconfig-3");
    let socp = match scp(&base, FormulationKind::Socp, &ScpConfig::default()) {
        Ok(o) => o.solution.delta_v,
        Err(e) => return Verdict::new(false, e),
    };
    let mut values = Vec::new();
    for n in [12, 24, 48, 96] {
        let mut p = problem("reconfig-3");
        p.scenario.poly.n_dir = n;
        p.scenario.poly.scale_c = ScaleFactor::Auto;
        match scp(&p, FormulationKind::LpScaled, &ScpConfig::default()) {
            Ok(o) => values.push(o.solution.delta_v),
            Err(e) => return Verdict::new(false, format!("n_dir {n}: {e}")),
        }
    }
    let above = values.iter().all(|&v| v >= socp);
    let monotone = values.windows(2).all(|w| w[1] <= w[0]);
    let gap = (values[3] - socp) / socp;
    Verdict::new(
        above && monotone && gap < 0.005,
        format!("LPScaled {values:.4?} vs SOCP {socp:.4}; monotone {monotone}, final gap {:.2}%", 100.0 * gap),
    )
}

fn criterion_10() -> Verdict {
    let base = bundled("case-study").expect("bundled scenario");
    let settings = SweepSettings { repeats: 3, ..SweepSettings::default() };
    let rows = sweep_n(&base, 1..=12, &settings, &InteriorPoint::new(), &ScpConfig::default(), &SolveOptions::default());
    if let Some(bad) = rows.iter().find(|r| r.status != "ok") {
        return Verdict::new(false, format!("N = {}: {}", bad.deputies, bad.status));
    }
    let n: Vec<f64> = rows.iter().map(|r| r.deputies as f64).collect();
    let times: Vec<f64> = rows.iter().map(|r| r.mean_solver_time).collect();
    let rho = spearman(&n, &times);
    Verdict::new(rho > 0.9, format!("Spearman {rho:.3}; mean times {:.3} s .. {:.3} s", times[0], times[11]))
}

fn main() -> ExitCode {
    let strict = std::env::var_os("FORMGUIDE_ACCEPTANCE_STRICT").is_some();
    let start = Instant::now();
    let runs = run_all();
    let verdicts = [
        criterion_1(&runs),
        criterion_2(&runs),
        criterion_3(&runs),
        criterion_4(&runs),
        criterion_5(),
        criterion_6(&runs),
        criterion_7(&runs),
        criterion_8(&runs),
        criterion_9(),
        criterion_10(),
    ];
    let mut unexpected = 0;
    for (i, v) in verdicts.iter().enumerate() {
        let id = i + 1;
        let known = KNOWN_FAILURES.contains(&id);
        let tag = match (v.pass, known) {
            (true, false) => "PASS",
            (true, true) => "PASS (listed as a known failure)",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("{tag} criterion {id}: {}", v.detail);
        if !v.pass && (strict || !known) {
            unexpected += 1;
        }
    }
    let passed = verdicts.iter().filter(|v| v.pass).count();
    println!("acceptance: {passed}/10 criteria pass in {:.1} s", start.elapsed().as_secs_f64());
    if unexpected > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
