use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn radshoot(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radshoot"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("RADSHOOT_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn shoot_small_height_is_slow_decay_without_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("configA.json");
    let o = radshoot(
        dir.path(),
        &["--config", cfg.to_str().unwrap(), "shoot", "--d", "1e-3"],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(
        stdout(&o).contains("SlowDecay P+ zeros=0"),
        "{}",
        stdout(&o)
    );
    let csv = std::fs::read_to_string(dir.path().join("shot_trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,x,y,theta,rho,H,r,u,du\n"));
    assert!(csv.lines().count() > 100);
}

#[test]
fn validate_oracle_passes_with_small_hamiltonian_drift() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("oracleB.json");
    let o = radshoot(dir.path(), &["--config", cfg.to_str().unwrap(), "validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report = read_json(&dir.path().join("validation.json"));
    assert_eq!(report["passed"], true);
    let ham = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "hamiltonian")
        .unwrap();
    assert!(ham["applicable"].as_bool().unwrap());
    assert!(ham["worst"].as_f64().unwrap() <= 1e-7);
}

#[test]
fn sequence_reports_increasing_thresholds_and_witness_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("configA.json");
    let o = radshoot(
        dir.path(),
        &["--config", cfg.to_str().unwrap(), "sequence", "--kmax", "2"],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let report = read_json(&dir.path().join("sequence.json"));
    let a: Vec<f64> = report["A"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(a.len(), 3);
    assert!(
        0.0 < a[0] && a[0] < a[1] && a[1] < a[2] && a[2] < 1.0,
        "{a:?}"
    );
    for w in report["witnesses"].as_array().unwrap() {
        let file = w["trajectory_file"].as_str().unwrap();
        assert!(dir.path().join(file).exists(), "{file}");
    }
}

#[test]
fn sequence_json_is_independent_of_job_count() {
    let cfg = config("configA.json");
    let run = |jobs: &str| {
        let dir = tempfile::tempdir().unwrap();
        let o = radshoot(
            dir.path(),
            &[
                "--config",
                cfg.to_str().unwrap(),
                "--jobs",
                jobs,
                "sequence",
                "--kmax",
                "1",
            ],
        );
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(dir.path().join("sequence.json")).unwrap()
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn invalid_problem_exits_2_and_names_the_clause() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"problem": {"n": 3, "p": 2, "q": 7, "Q": 9, "delta": -3,
            "h": {"type": "const", "params": [1]}}}"#,
    )
    .unwrap();
    let o = radshoot(
        dir.path(),
        &["--config", cfg.to_str().unwrap(), "shoot", "--d", "0.1"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("(K) delta > -p"));
}

#[test]
fn oracle_problem_is_refused_by_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("oracleB.json");
    let o = radshoot(dir.path(), &["--config", cfg.to_str().unwrap(), "sequence"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("l > p*"));
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"problem": {"n": 3}}"#).unwrap();
    let o = radshoot(dir.path(), &["--config", cfg.to_str().unwrap(), "validate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_validation_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.json");
    // a crude integrator tolerance breaks the Hamiltonian budget
    std::fs::write(
        &cfg,
        r#"{"problem": {"n": 4, "p": 2, "q": 4, "h": {"type": "const", "params": [1]},
            "oracle_mode": true}, "policy": {"rtol": 1e-3, "atol": 1e-3}}"#,
    )
    .unwrap();
    let o = radshoot(dir.path(), &["--config", cfg.to_str().unwrap(), "validate"]);
    assert_eq!(o.status.code(), Some(4), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAILED"));
}

#[test]
fn manifold_intersections_match_sequence_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let o = radshoot(dir.path(), &["manifold", "--kind", "u+", "--tau", "2"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let recs = read_json(&dir.path().join("intersections.json"));
    let d: Vec<f64> = recs
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["d_at"].as_f64().unwrap())
        .collect();
    assert_eq!(d.len(), 3);
    for (got, want) in d.iter().zip([0.8352080343, 0.9582430154, 0.9875091128]) {
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    }
    for name in [
        "manifold_unstable-plus.csv",
        "manifold_stable-plus.csv",
        "manifold_stable-minus.csv",
    ] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(text.starts_with("param,t,x,y,theta,rho\n"), "{name}");
    }
}

#[test]
fn portrait_writes_field_isoclines_and_critical_points() {
    let dir = tempfile::tempdir().unwrap();
    let o = radshoot(dir.path(), &["portrait", "--grid", "-1:1:11,-1:1:9"]);
    assert_eq!(o.status.code(), Some(0));
    let field = std::fs::read_to_string(dir.path().join("portrait_field.csv")).unwrap();
    assert_eq!(field.lines().count(), 1 + 11 * 9);
    let iso = std::fs::read_to_string(dir.path().join("portrait_isoclines.csv")).unwrap();
    assert!(
        iso.lines().any(|l| l.starts_with("dx0,")) && iso.lines().any(|l| l.starts_with("dy0,"))
    );
    let crit = read_json(&dir.path().join("portrait_critical.json"));
    let p_plus = &crit["equilibria"][1];
    assert!((p_plus["x"].as_f64().unwrap() - 0.7516960).abs() < 1e-6);
    assert!((p_plus["y"].as_f64().unwrap() + 0.3006784).abs() < 1e-6);
}

#[test]
fn output_directory_can_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_radshoot"))
        .args(["shoot", "--d", "0.2"])
        .env("RADSHOOT_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("shot.json").exists());
}
