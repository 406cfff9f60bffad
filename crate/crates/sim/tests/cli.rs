use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dcx_sim::scenarios::SCENARIOS;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dcx-sim"))
}

fn run_with(config: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg(config).args(extra).output().expect("spawn dcx-sim")
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn list_prints_every_scenario_in_order() {
    let o = bin().arg("list").output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let ids: Vec<&str> = text.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    let expected: Vec<&str> = SCENARIOS.iter().map(|s| s.id).collect();
    assert_eq!(ids, expected);
    for id in [
        "oracle-poisson-scaling",
        "ginibre-oracle",
        "ising-exact",
        "ising-vs-poisson",
        "ppcluster-family",
        "sinr-compare",
        "coverage-compare",
        "palm-poisson-check",
        "lo-extremal",
        "ripley-poisson",
        "ops-preservation",
    ] {
        assert!(ids.contains(&id), "missing {id}");
    }
    assert!(text.lines().all(|l| l.split_whitespace().count() > 1), "every id has a description");
}

#[test]
fn unknown_key_is_named_and_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "seed = 1\noutput_dir = \"out\"\n[[scenarios]]\nid = \"ripley-poisson\"\nlamda = 50\n",
    );
    let o = run_with(&cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("scenarios[0].lamda"), "{}", stderr(&o));
    assert!(!tmp.path().join("out").exists(), "nothing runs on a config error");
}

#[test]
fn malformed_toml_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", "seed = \noutput_dir = 3\n");
    assert_eq!(run_with(&cfg, &[]).status.code(), Some(2));
}

#[test]
fn bad_value_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "seed = 1\noutput_dir = \"out\"\n[[scenarios]]\nid = \"ops-preservation\"\nretention = 1.5\n",
    );
    let o = run_with(&cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("retention"), "{}", stderr(&o));
}

#[test]
fn unknown_scenario_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "seed = 1\noutput_dir = \"out\"\n[[scenarios]]\nid = \"no-such-thing\"\n",
    );
    let o = run_with(&cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no-such-thing"));
}

#[test]
fn missing_config_file_exits_2() {
    let o = run_with(Path::new("/definitely/not/here.toml"), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_dir_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        &format!(
            "seed = 1\noutput_dir = \"{}\"\n[[scenarios]]\nid = \"ginibre-oracle\"\n",
            blocker.join("sub").display()
        ),
    );
    assert_eq!(run_with(&cfg, &[]).status.code(), Some(2));
}

#[test]
fn every_scenario_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let mut body = format!("seed = 5\noutput_dir = \"{}\"\nthreads = 2\n", out.display());
    for s in SCENARIOS {
        body.push_str(&format!("\n[[scenarios]]\nid = \"{}\"\n", s.id));
        if !matches!(s.id, "oracle-poisson-scaling" | "ginibre-oracle" | "ising-exact") {
            body.push_str("n_reps = 300\n");
        }
    }
    let cfg = write_config(tmp.path(), "all.toml", &body);
    let o = run_with(&cfg, &[]);
    let code = o.status.code().unwrap();
    assert!(code == 0 || code == 1, "exit {code}: {}", stderr(&o));
    for s in SCENARIOS {
        let json: Value = serde_json::from_str(&fs::read_to_string(out.join(format!("{}.json", s.id))).unwrap()).unwrap();
        for key in [
            "scenario_id",
            "seed",
            "params_echo",
            "verdict",
            "per_function",
            "mean_equality",
            "runtime_seconds",
        ] {
            assert!(json.get(key).is_some(), "{}: missing {key}", s.id);
        }
        assert_eq!(json["scenario_id"], s.id);
        assert_eq!(json["seed"], 5);
        let v = json["verdict"].as_str().unwrap();
        assert!(
            ["pass", "fail", "CONSISTENT", "VIOLATION", "INCONCLUSIVE", "EXPLORATORY"].contains(&v),
            "{}: {v}",
            s.id
        );
        let csv = fs::read_to_string(out.join(format!("{}.csv", s.id))).unwrap();
        assert!(csv.lines().count() >= 2, "{}: empty table", s.id);
    }
    let oracle: Value =
        serde_json::from_str(&fs::read_to_string(out.join("oracle-poisson-scaling.json")).unwrap()).unwrap();
    assert_eq!(oracle["verdict"], "pass");
    assert!(oracle["details"]["max_violation"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn ripley_csv_has_documented_columns_and_defaults_are_echoed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "r.json",
        r#"{"seed": 9, "output_dir": "o", "scenarios": [{"id": "ripley-poisson", "n_reps": 50}]}"#,
    );
    let out = tmp.path().join("elsewhere");
    let o = run_with(&cfg, &["--output-dir", out.to_str().unwrap(), "--threads", "3"]);
    assert!(o.status.code() == Some(0) || o.status.code() == Some(1), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("ripley-poisson.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "r,K_hat,stderr,pi_r2");
    assert_eq!(csv.lines().count(), 5);
    let json: Value = serde_json::from_str(&fs::read_to_string(out.join("ripley-poisson.json")).unwrap()).unwrap();
    assert_eq!(json["params_echo"]["lambda"], 50.0);
    assert_eq!(json["params_echo"]["n_reps"], 50);
}

#[test]
fn oracle_failure_free_run_exits_0() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "seed = 2\noutput_dir = \"o\"\n[[scenarios]]\nid = \"ginibre-oracle\"\n[[scenarios]]\nid = \"ginibre-oracle\"\nb = 3\n",
    );
    let out = tmp.path().join("o");
    let o = run_with(&cfg, &["--output-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("ginibre-oracle.json").exists());
    assert!(out.join("ginibre-oracle-1.json").exists(), "repeated ids get distinct files");
}

#[test]
fn zero_threads_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "seed = 2\noutput_dir = \"o\"\n[[scenarios]]\nid = \"ginibre-oracle\"\n",
    );
    assert_eq!(run_with(&cfg, &["--threads", "0"]).status.code(), Some(2));
}
