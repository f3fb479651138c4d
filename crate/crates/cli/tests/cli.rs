use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use formguide_conic::parse_program;
use formguide_core::formulation::{build_program, BuildOptions, Reference};
use formguide_core::roe::Vec3;
use formguide_core::scenario::bundled;
use formguide_core::FormulationKind;

const BIN: &str = env!("CARGO_BIN_EXE_formguide");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn formguide")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap_or_default().to_string()
}

fn solve_into(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["solve", "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn artifact_headers_are_pinned() {
    let dir = tempfile::tempdir().unwrap();
    let out = solve_into(dir.path(), &["--scenario", "reconfig-3", "--kind", "socp"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let expect = [
        ("trajectory.csv", "epoch,time_s,deputy,da_m,dlambda_m,dex_m,dey_m,dix_m,diy_m,r_m,t_m,n_m"),
        ("controls.csv", "arc,deputy,t_start_s,t_end_s,u_r,u_t,u_n,u_norm,gamma_over_a"),
        ("distances.csv", "epoch,time_s,pair,separation_m"),
        (
            "trace.csv",
            "iteration,objective,delta_v,displacement_m,collision_free,min_separation_m,solver_time_s,solver_iterations,status",
        ),
    ];
    for (file, line) in expect {
        assert_eq!(header(&dir.path().join(file)), line, "{file}");
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    let keys: Vec<&str> = summary.as_object().unwrap().keys().map(String::as_str).collect();
    for k in ["scenario", "kind", "backend", "delta_v", "deputies", "scp_iterations", "termination", "certified", "size"] {
        assert!(keys.contains(&k), "{k} missing from {keys:?}");
    }
    assert_eq!(summary["kind"], "socp");
    assert_eq!(summary["termination"], "zeroth_collision_free");
    assert_eq!(summary["size"]["variables"], 1012);
}

#[test]
fn case_study_solution_checks_clean_and_tampering_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let out = solve_into(dir.path(), &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    let dv = summary["delta_v"].as_f64().unwrap();
    assert!((1.55..=2.10).contains(&dv), "{dv}");
    assert_eq!(summary["certified"], true);
    assert!(summary["min_separation_m"].as_f64().unwrap() >= 100.0 - 1e-3);

    let sol = dir.path().to_str().unwrap();
    let out = run(&["check", "--solution", sol, "--json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["replay_error"].as_f64().unwrap() <= 1e-6);

    let path = dir.path().join("controls.csv");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let row = lines.iter().position(|l| l.starts_with("2,1,")).unwrap();
    let mut cells: Vec<String> = lines[row].split(',').map(String::from).collect();
    for c in &mut cells[4..8] {
        *c = "0".into();
    }
    lines[row] = cells.join(",");
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    fs::remove_file(dir.path().join("trajectory.csv")).unwrap();
    let out = run(&["check", "--solution", sol]);
    assert_eq!(code(&out), 2);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let terminal = stdout.lines().find(|l| l.starts_with("terminal mismatch")).unwrap();
    assert!(terminal.ends_with("VIOLATED"), "{stdout}");
}

#[test]
fn export_roundtrip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("program.txt");
    let out = run(&["export", "--scenario", "reconfig-1", "--kind", "lp-scaled", "--collisions", "--out", file.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let parsed = parse_program(&fs::read_to_string(&file).unwrap()).unwrap();

    let s = bundled("reconfig-1").unwrap();
    let d = s.discretize().unwrap();
    let reference = Reference::uncontrolled(&s, &d);
    let built = build_program(FormulationKind::LpScaled, &s, &d, Some(&reference), &BuildOptions::default()).unwrap();
    assert_eq!(parsed, built.program);
    assert!(parsed.cost.iter().zip(&built.program.cost).all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn external_backend_matches_in_process_solve() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let external = format!("external:{BIN} solve-program");
    let args = ["--scenario", "reconfig-3", "--kind", "socp"];
    assert_eq!(code(&solve_into(a.path(), &args)), 0);
    let out = solve_into(b.path(), &[&args[..], &["--backend", &external]].concat());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["trajectory.csv", "controls.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn drifting_targets_need_no_thrust() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = bundled("reconfig-3").unwrap();
    s.name = "drift".into();
    let d = s.discretize().unwrap();
    let zeros = vec![Vec3::zeros(); d.num_intervals()];
    for dep in &mut s.deputies {
        dep.yf = *d.propagate(&dep.y0, &zeros).last().unwrap();
    }
    let file = dir.path().join("drift.toml");
    s.save(&file).unwrap();
    let out_dir = dir.path().join("out");
    let out = solve_into(&out_dir, &["--scenario", file.to_str().unwrap(), "--kind", "socp"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert!(summary["delta_v"].as_f64().unwrap() < 1e-6);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = bundled("case-study").unwrap();
    for dep in &mut s.deputies {
        dep.f_max *= 1e-4;
    }
    let file = dir.path().join("weak.toml");
    s.save(&file).unwrap();
    let out = solve_into(&dir.path().join("weak"), &["--scenario", file.to_str().unwrap(), "--kind", "socp"]);
    assert_eq!(code(&out), 3);
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "infeasible");

    let out = solve_into(&dir.path().join("x"), &["--kind", "qcqp", "--backend", "ipm-lp"]);
    assert_eq!(code(&out), 4);

    let out = solve_into(&dir.path().join("y"), &["--scenario", "no-such-scenario"]);
    assert_eq!(code(&out), 1);
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "input");
}

#[test]
fn grid_lists_every_arc() {
    let out = run(&["grid", "--scenario", "case-study"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("case-study: 22 burns, 44 arcs"), "{text}");
    assert_eq!(text.lines().filter(|l| l.contains("forced")).count(), 22);
}

#[test]
fn bench_and_sweep_tables() {
    let out = run(&["bench", "--scenario", "reconfig-3", "--kind", "socp,lp-scaled", "--repeats", "2"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "scenario,kind,backend,deputies,repeats,mean_solver_time,delta_v,variables,constraints,scp_iterations,certified,status"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("reconfig-3,socp,ipm,4,2,"));
    assert!(lines[2].ends_with(",0,true,ok"));

    let out = run(&["sweep-n", "--n-min", "2", "--n-max", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(1).unwrap().starts_with("sweep-n2,socp,ipm,2,"));
    assert_eq!(code(&run(&["sweep-n", "--n-max", "21"])), 1);
}
