mod common;

use std::path::Path;

use bbm_core::io::read_field_binary;
use common::{binary, csvs, set, summary, with, Run, SMALL, SMALL_VERIFY};

fn error_record(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("error.json")).unwrap()).unwrap()
}

fn assert_trailers(dir: &Path) {
    let hash = summary(dir)["config_hash"].as_str().unwrap().to_string();
    let files = csvs(dir);
    assert!(!files.is_empty());
    for (name, bytes) in files {
        let text = String::from_utf8(bytes).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines.len() >= 2, "{name} has no header");
        assert!(!lines[0].starts_with('#'), "{name}: header row missing");
        assert_eq!(lines.last().unwrap(), &format!("# config-hash={hash}"), "{name}");
    }
}

#[test]
fn simulate_writes_trajectory_snapshots_and_trailers() {
    let run = Run::new(SMALL);
    assert_eq!(run.invoke("simulate", "out", &[]), 0);
    let out = run.out("out");
    for name in ["trajectory.csv", "lwp.csv", "snapshot_000.csv", "snapshot_001.bbm1", "summary.json"] {
        assert!(out.join(name).exists(), "{name}");
    }
    let header = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(header.starts_with("t,l2_norm,h_ell_norm,h1_I_norm\n"));
    let s = summary(&out);
    assert_eq!(s["snapshots"], 201);
    assert_trailers(&out);
}

#[test]
fn every_subcommand_is_deterministic_across_runs_and_jobs() {
    for (command, config) in [
        ("simulate", SMALL),
        ("find-periodic", SMALL),
        ("picard", SMALL),
        ("stability", SMALL),
        ("verify", SMALL_VERIFY),
    ] {
        let run = Run::new(config);
        let a = run.invoke(command, "a", &["--jobs", "1"]);
        let b = run.invoke(command, "b", &["--jobs", "4"]);
        let c = run.invoke(command, "c", &[]);
        assert_eq!(a, b, "{command}");
        assert_eq!(a, c, "{command}");
        let first = csvs(&run.out("a"));
        assert!(!first.is_empty(), "{command}");
        assert_eq!(first, csvs(&run.out("b")), "{command}: --jobs changed the output");
        assert_eq!(first, csvs(&run.out("c")), "{command}: rerun changed the output");
        assert_trailers(&run.out("a"));
    }
}

#[test]
fn seed_changes_random_output() {
    let config = with(SMALL, |t| {
        set(t, "initial", toml::Table::new());
        set(t, "initial.kind", "random");
        set(t, "initial.max_xi", 2.0);
        set(t, "initial.norm", 0.05);
    });
    let run = Run::new(&config);
    assert_eq!(run.invoke("simulate", "a", &[]), 0);
    assert_eq!(run.invoke("simulate", "b", &["--seed", "99"]), 0);
    let (a, b) = (csvs(&run.out("a")), csvs(&run.out("b")));
    assert_ne!(a["trajectory.csv"], b["trajectory.csv"]);
    assert_ne!(summary(&run.out("a"))["config_hash"], summary(&run.out("b"))["config_hash"]);
}

#[test]
fn unknown_field_is_a_config_error_with_its_path() {
    let run = Run::new(&format!("{SMALL}\n[orbit]\nbogus = 1\n"));
    let out = run.out("out");
    let output = binary(
        &["simulate", "--config", run.config().to_str().unwrap(), "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("orbit.bogus"), "{stderr}");
}

#[test]
fn invalid_values_are_config_errors() {
    for (path, value) in [("solver.dt", toml::Value::from(-0.1)), ("grid.m", toml::Value::from(7))] {
        let run = Run::new(&with(SMALL, |t| set(t, path, value.clone())));
        let output = binary(
            &["simulate", "--config", run.config().to_str().unwrap(), "--out", run.out("o").to_str().unwrap()],
            &[],
        );
        assert_eq!(output.status.code(), Some(2), "{path}");
        assert!(String::from_utf8_lossy(&output.stderr).contains(path), "{path}");
    }
    let missing = binary(&["simulate", "--config", "/nonexistent/run.toml"], &[]);
    assert_eq!(missing.status.code(), Some(2));
    assert_eq!(binary(&["frobnicate"], &[]).status.code(), Some(2));
    assert_eq!(binary(&["--help"], &[]).status.code(), Some(0));
}

#[test]
fn environment_overrides_out() {
    let run = Run::new(SMALL);
    let env_dir = run.out("from_env");
    let flag_dir = run.out("from_flag");
    let output = binary(
        &["simulate", "--config", run.config().to_str().unwrap(), "--out", flag_dir.to_str().unwrap()],
        &[("BBM_ORBIT_OUT", &env_dir)],
    );
    assert_eq!(output.status.code(), Some(0));
    assert!(env_dir.join("trajectory.csv").exists());
    assert!(!flag_dir.exists());
}

#[test]
fn failing_threshold_exits_3_with_record() {
    let config = with(SMALL_VERIFY, |t| {
        set(t, "verify.inequalities", toml::Value::Array(vec!["equivalence".into()]));
        set(t, "verify.equivalence.c_low", 10.0);
    });
    let run = Run::new(&config);
    assert_eq!(run.invoke("verify", "out", &[]), 3);
    let record = error_record(&run.out("out"));
    assert_eq!(record["kind"], "threshold");
    assert_eq!(record["exit_code"], 3);
    assert!(run.out("out").join("estimates.csv").exists());
}

#[test]
fn divergence_exits_1_with_record() {
    let config = with(SMALL, |t| {
        set(t, "solver.dt", 0.5);
        set(t, "solver.dealias", false);
        set(t, "initial.amplitude", 1e150);
        set(t, "initial.width", 0.3);
    });
    let run = Run::new(&config);
    assert_eq!(run.invoke("simulate", "out", &[]), 1);
    let record = error_record(&run.out("out"));
    assert_eq!(record["kind"], "divergence");
    assert!(record["step"].as_u64().unwrap() >= 1);
}

#[test]
fn zero_forcing_orbit_is_zero_and_stable_under_tighter_tolerance() {
    let base = with(SMALL, |t| {
        set(t, "forcing.amplitude", 0.0);
        set(t, "orbit.theta", 2.0);
    });
    let tight = with(&base, |t| {
        set(t, "orbit.abs_tol", 1e-10);
        set(t, "orbit.rel_tol", 1e-10);
    });
    let runs = [Run::new(&base), Run::new(&tight)];
    let mut phis = Vec::new();
    for run in &runs {
        assert_eq!(run.invoke("find-periodic", "out", &[]), 0);
        let file = std::fs::File::open(run.out("out").join("phi.bbm1")).unwrap();
        phis.push(read_field_binary(std::io::BufReader::new(file)).unwrap());
    }
    let norm = |f: &bbm_core::spectral::SpectralField| f.sobolev_norm(0.5);
    assert!(norm(&phis[0]) <= 1e-9);
    assert!(norm(&(&phis[0] - &phis[1])) <= 1e-9);
}

#[test]
fn periodic_datum_round_trips_into_simulate() {
    let run = Run::new(SMALL);
    assert_eq!(run.invoke("find-periodic", "orbit", &[]), 0);
    let phi = run.out("orbit").join("phi.bbm1");
    let s = summary(&run.out("orbit"));
    assert!(s["regeneration_residual"].as_f64().unwrap() <= 2e-9);

    let config = with(SMALL, |t| {
        set(t, "initial", toml::Table::new());
        set(t, "initial.kind", "file");
        set(t, "initial.path", phi.display().to_string());
        set(t, "simulate.t_end", 2.0);
    });
    let again = Run::new(&config);
    assert_eq!(again.invoke("simulate", "sim", &[]), 0);
    let start = std::fs::File::open(again.out("sim").join("snapshot_000.bbm1")).unwrap();
    let end = std::fs::File::open(again.out("sim").join("snapshot_001.bbm1")).unwrap();
    let start = read_field_binary(std::io::BufReader::new(start)).unwrap();
    let end = read_field_binary(std::io::BufReader::new(end)).unwrap();
    assert!((&start - &end).sobolev_norm(0.5) <= 2e-9);
}
