//! End-to-end checks of the binary: exit codes, report schema, byte
//! stability, and config round-trips.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_padic-stringy"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

#[test]
fn orbvol_example() {
    let out = run(&[
        "orbvol",
        "--d",
        "2",
        "--weights",
        "1,1",
        "--q",
        "5",
        "--k",
        "8",
    ]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    assert_eq!(report["outputs"]["total_volume_rational"], "6/5");
    assert!(report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["pass"].as_bool().unwrap()));
    // every check carries an anchor
    assert!(report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["paper_anchor"].is_string()));
}

#[test]
fn malformed_weights_exit_2() {
    let out = run(&["orbvol", "--d", "2", "--weights", "1,x", "--q", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_model_data_exit_2() {
    // 3 does not divide 5 - 1
    let out = run(&["orbvol", "--d", "3", "--weights", "1", "--q", "5"]);
    assert_eq!(out.status.code(), Some(2));
    // unknown Weil model
    let out = run(&["weil", "--model", "nonsense", "--q", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stringy_report_schema() {
    let out = run(&["stringy", "--d", "2", "--weights", "1,1", "--q", "5"]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    let outputs = &report["outputs"];
    for field in [
        "count_terms",
        "epoly_terms",
        "sector_breakdown",
        "xi_invariance_checked",
    ] {
        assert!(!outputs[field].is_null(), "missing field {field}");
    }
    assert_eq!(outputs["xi_invariance_checked"], true);
}

#[test]
fn reports_are_byte_stable() {
    let a = run(&[
        "mirror-sim",
        "--group",
        "Z/2 x Z/4",
        "--fibers",
        "20",
        "--seed",
        "9",
    ]);
    let b = run(&[
        "mirror-sim",
        "--group",
        "Z/2 x Z/4",
        "--fibers",
        "20",
        "--seed",
        "9",
    ]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&[
        "mirror-sim",
        "--group",
        "Z/2 x Z/4",
        "--fibers",
        "20",
        "--seed",
        "10",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn inputs_round_trip_as_config() {
    let out = run(&["weil", "--model", "circle", "--q", "5", "--k", "2"]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    // the inputs section is a valid RunConfig: feed it back through --config
    let dir = std::env::temp_dir().join(format!("padic-stringy-rt-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("roundtrip.json");
    std::fs::write(&path, serde_json::to_vec(&report["inputs"]).unwrap()).unwrap();
    let again = run(&["--config", path.to_str().unwrap()]);
    assert!(again.status.success());
    assert_eq!(out.stdout, again.stdout);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_rejects_unknown_keys_and_versions() {
    let dir = std::env::temp_dir().join(format!("padic-stringy-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();

    let bad_key = dir.join("bad_key.json");
    std::fs::write(
        &bad_key,
        r#"{"version":1,"command":"weil","parameters":{"model":"line","q":5,"extra":1}}"#,
    )
    .unwrap();
    let out = run(&["--config", bad_key.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let bad_version = dir.join("bad_version.json");
    std::fs::write(
        &bad_version,
        r#"{"version":3,"command":"weil","parameters":{"model":"line","q":5}}"#,
    )
    .unwrap();
    let out = run(&["--config", bad_version.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn suite_filter_and_seed() {
    let out = bin()
        .args(["suite", "--filter", "pairing", "--seed", "7"])
        .env("PADIC_STRINGY_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let report = stdout_json(&out);
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 1);
    assert!(checks[0]["name"].as_str().unwrap().contains("pairing"));

    let out2 = bin()
        .args(["suite", "--filter", "pairing", "--seed", "7"])
        .env("PADIC_STRINGY_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(out.stdout, out2.stdout);

    let none = run(&["suite", "--filter", "no-such-criterion"]);
    assert_eq!(none.status.code(), Some(2));
}

#[test]
fn table_format_renders() {
    let out = run(&["--format", "table", "weil", "--model", "line", "--q", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("command: weil"));
    assert!(text.contains("pass"));
}

#[test]
fn probe_specialization_in_report() {
    let out = run(&[
        "orbvol",
        "--d",
        "2",
        "--weights",
        "1",
        "--q",
        "9",
        "--probe",
        "1*t^1 + O(t^8)",
    ]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    assert_eq!(report["outputs"]["probe"]["stratum"], "origin");
    assert_eq!(report["outputs"]["probe"]["inertia_power"], 1);
    assert_eq!(report["outputs"]["total_volume_rational"], "4/3");
}

#[test]
fn gerbe_twist_kills_a_sector() {
    let plain = stdout_json(&run(&[
        "stringy",
        "--d",
        "2",
        "--weights",
        "1,1",
        "--q",
        "5",
    ]));
    let twisted = stdout_json(&run(&[
        "stringy",
        "--d",
        "2",
        "--weights",
        "1,1",
        "--q",
        "5",
        "--gerbe",
        "0,1",
    ]));
    let n_plain = plain["outputs"]["epoly_terms"].as_array().unwrap().len();
    let n_twisted = twisted["outputs"]["epoly_terms"].as_array().unwrap().len();
    assert_eq!((n_plain, n_twisted), (2, 1));
}
