//! End-to-end runs of the `hkdelay` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn hkdelay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hkdelay")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn certified_pair_simulates_and_certifies() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().to_str().unwrap();
    let path = scenario("certified_pair.toml");
    let out = hkdelay(&["simulate", "--scenario", path.to_str().unwrap(), "--out-dir", out_dir]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let line = stdout(&out);
    assert_eq!(line.lines().count(), 1);
    assert!(line.contains("holds=true") && line.contains("fitted_rate="), "{line}");

    let cert: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("certificate.json")).unwrap()).unwrap();
    assert_eq!(cert["holds"], true);
    for key in ["R", "psi_2R", "lhs", "rhs", "beta_min", "beta_max", "beta_chosen", "K"] {
        assert!(cert.get(key).is_some(), "missing {key}");
    }
    let traj = std::fs::read_to_string(tmp.path().join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,agent,x_1,speed_max\n"));
    // 401 stamps from t = 0 to 5, two agents each
    assert_eq!(traj.lines().count(), 1 + 2 * 401);
    let diag = std::fs::read_to_string(tmp.path().join("diagnostics.csv")).unwrap();
    assert!(diag.starts_with("t,d_X,gamma,lyapunov,speed_max\n"));

    let out = hkdelay(&["certify", "--scenario", path.to_str().unwrap(), "--out-dir", out_dir, "--quiet"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
}

#[test]
fn step_equal_to_the_delay_exits_2_naming_dt() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("certified_pair.toml"))
        .unwrap()
        .replace("dt = 0.0125", "dt = 0.25");
    let path = write(tmp.path(), "bad_dt.toml", &text);
    let out = hkdelay(&["run", "--scenario", path.to_str().unwrap(), "--out-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`model.dt`"), "{}", stderr(&out));
}

#[test]
fn dirac_weight_exits_2_with_the_exclusion_message() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("certified_pair.toml"))
        .unwrap()
        .replace("family = \"constant\"\nvalue = 1.0", "family = \"dirac\"");
    let path = write(tmp.path(), "dirac.toml", &text);
    let out = hkdelay(&["simulate", "--scenario", path.to_str().unwrap(), "--out-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("Dirac"), "{}", stderr(&out));
}

#[test]
fn threshold_sweep_flips_between_025_and_030() {
    let tmp = tempfile::tempdir().unwrap();
    let path = scenario("threshold_sweep.toml");
    let out = hkdelay(&["sweep", "--scenario", path.to_str().unwrap(), "--out-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let rows: Vec<serde_json::Value> = std::fs::read_to_string(tmp.path().join("sweep.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let holds: Vec<bool> = rows.iter().map(|r| r["holds"].as_bool().unwrap()).collect();
    assert_eq!(holds, vec![true, true, true, false, false]);
    for r in &rows {
        assert!(r["final_d_X"].as_f64().unwrap() > 0.0);
        assert_eq!(r["K"].is_null(), !r["holds"].as_bool().unwrap());
    }
}

#[test]
fn sweep_values_from_the_command_line() {
    let tmp = tempfile::tempdir().unwrap();
    let path = scenario("certified_pair.toml");
    let out = hkdelay(&[
        "sweep",
        "--scenario",
        path.to_str().unwrap(),
        "--out-dir",
        tmp.path().to_str().unwrap(),
        "--param",
        "dt",
        "--values",
        "0.0125,0.00625,0.1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(tmp.path().join("sweep.jsonl")).unwrap();
    let rows: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 3);
    // dt = 0.1 breaks dt ≤ τ*/20 and fails in its own row only
    assert!(rows[2]["error"].as_str().unwrap().contains("dt"));
    assert!(rows[0].get("error").is_none() && rows[1].get("error").is_none());
}

#[test]
fn empty_sweep_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("threshold_sweep.toml"))
        .unwrap()
        .replace("values = [0.1, 0.2, 0.25, 0.3, 0.4]", "values = []");
    let path = write(tmp.path(), "empty.toml", &text);
    let out = hkdelay(&["sweep", "--scenario", path.to_str().unwrap(), "--out-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("experiment.values"));
}

#[test]
fn thread_count_can_be_pinned() {
    let tmp = tempfile::tempdir().unwrap();
    let path = scenario("threshold_sweep.toml");
    let run = |threads: &str, dir: &str| {
        let out_dir = tmp.path().join(dir);
        let out = Command::new(env!("CARGO_BIN_EXE_hkdelay"))
            .args(["sweep", "--scenario", path.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()])
            .env("HKDELAY_THREADS", threads)
            .output()
            .unwrap();
        (out.status.code(), std::fs::read(out_dir.join("sweep.jsonl")).ok())
    };
    let (one, a) = run("1", "one");
    let (four, b) = run("4", "four");
    assert_eq!((one, four), (Some(0), Some(0)));
    assert_eq!(a, b);
    assert_eq!(run("zero", "bad").0, Some(2));
}

#[test]
fn seed_changes_sampled_measures_only_when_asked() {
    let tmp = tempfile::tempdir().unwrap();
    let path = scenario("planar_clusters.toml");
    let run = |seed: Option<&str>, dir: &str| {
        let out_dir = tmp.path().join(dir);
        let mut args = vec!["simulate", "--scenario", path.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()];
        if let Some(s) = seed {
            args.extend(["--seed", s]);
        }
        let out = hkdelay(&args);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        std::fs::read(out_dir.join("trajectory.csv")).unwrap()
    };
    assert_eq!(run(None, "a"), run(Some("7"), "b"));
    assert_ne!(run(None, "c"), run(Some("8"), "d"));
}

#[test]
fn missing_file_and_bad_syntax_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hkdelay(&["run", "--scenario", "/nonexistent/x.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let path = write(tmp.path(), "broken.toml", "schema_version = [");
    let out = hkdelay(&["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn meanfield_command_needs_a_meanfield_scenario() {
    let out = hkdelay(&["meanfield", "--scenario", scenario("certified_pair.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("experiment.kind"));
}

#[test]
fn meanfield_report_is_jsonl() {
    let tmp = tempfile::tempdir().unwrap();
    let path = scenario("uniform_meanfield.toml");
    let out = hkdelay(&["meanfield", "--scenario", path.to_str().unwrap(), "--out-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("diameter_within_bound=true"));
    let text = std::fs::read_to_string(tmp.path().join("meanfield.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 12);
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["N"], 50);
    assert_eq!(first["t"], 1.0);
}
