use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_grouptest"));
    c.env_remove("GT_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_c_at_one_tenth() {
    let v = json(&run(&["analyze", "--quantity", "c", "--p", "0.1"]));
    assert!((v["c"].as_f64().unwrap() - 0.480_191_979_374_018_9).abs() < 1e-9);
    assert_eq!(v["input"]["quantity"], "c");
}

#[test]
fn analyze_csv_has_header_and_row() {
    let out = run(&[
        "analyze",
        "--quantity",
        "lower-bound",
        "--p",
        "0.01",
        "--n",
        "1000",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].split(',').any(|h| h == "info_theoretic"));
}

#[test]
fn bad_parameters_give_json_error_and_nonzero_exit() {
    let out = run(&["analyze", "--quantity", "U", "--p", "1.5"]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].as_str().unwrap().contains("p = 1.5"));
}

#[test]
fn design_then_decode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.adj");
    let meta = json(&run(&[
        "design",
        "--family",
        "rr6",
        "--n",
        "12",
        "--l",
        "2",
        "--m",
        "6",
        "--seed",
        "3",
        "--out",
        s(&path),
    ]));
    assert_eq!(meta["girth_at_least_6"], true);
    let side: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("d.adj.meta.json")).unwrap())
            .unwrap();
    assert_eq!(side["n_tests"], 6);
    assert_eq!(side["seed"], 3);

    let v = json(&run(&[
        "decode",
        "--design",
        s(&path),
        "--x",
        "000000000000",
    ]));
    assert_eq!(v["T"], 6);
    assert_eq!(v["sure_zeros"].as_array().unwrap().len(), 12);

    let x = dir.path().join("x.txt");
    std::fs::write(&x, "100000000000\n").unwrap();
    let v = json(&run(&["decode", "--design", s(&path), "--x-file", s(&x)]));
    let undetermined = v["undetermined_zeros"].as_array().unwrap().len()
        + v["undetermined_ones"].as_array().unwrap().len();
    assert_eq!(v["T"].as_u64().unwrap() as usize, 6 + undetermined);
}

#[test]
fn same_seed_same_design() {
    let a = json(&run(&[
        "design", "--family", "pp", "--n", "50", "--p", "0.05", "--seed", "9",
    ]));
    let b = json(&run(&[
        "design", "--family", "pp", "--n", "50", "--p", "0.05", "--seed", "9",
    ]));
    assert_eq!(a["tests"], b["tests"]);
}

#[test]
fn seed_precedence_flag_config_env() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"family": "rp", "n": 40, "p": 0.05, "seed": 11}"#).unwrap();
    let seed_of = |extra: &[&str], env: Option<&str>| {
        let mut c = bin();
        c.args(["design"]).args(extra);
        if let Some(e) = env {
            c.env("GT_SEED", e);
        }
        json(&c.output().unwrap())["seed"].as_u64().unwrap()
    };
    let c = s(&cfg);
    assert_eq!(seed_of(&["--config", c, "--seed", "5"], Some("7")), 5);
    assert_eq!(seed_of(&["--config", c], Some("7")), 11);
    assert_eq!(
        seed_of(&["--family", "rp", "--n", "40", "--p", "0.05"], Some("7")),
        7
    );
    assert_eq!(
        seed_of(&["--family", "rp", "--n", "40", "--p", "0.05"], None),
        0
    );
}

#[test]
fn exact_simulation_of_stored_design() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    std::fs::write(
        &path,
        r#"{"n_variables": 2, "n_tests": 1, "tests": [[0, 1]]}"#,
    )
    .unwrap();
    let v = json(&run(&[
        "simulate",
        "--design",
        s(&path),
        "--p",
        "0.5",
        "--exact",
    ]));
    assert_eq!(v["mean_T"].as_f64().unwrap(), 2.5);
    assert_eq!(v["exact"], true);
}

#[test]
fn experiment_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &Path| {
        vec![
            "experiment".to_owned(),
            "--beta".into(),
            "0.25".into(),
            "--n-grid".into(),
            "2^8,2^9".into(),
            "--families".into(),
            "rr6,pp".into(),
            "--trials".into(),
            "50".into(),
            "--seed".into(),
            "4".into(),
            "--out".into(),
            s(out).into(),
        ]
    };
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        assert!(bin().args(args(p)).status().unwrap().success());
    }
    let (a, b) = (
        std::fs::read_to_string(a).unwrap(),
        std::fs::read_to_string(b).unwrap(),
    );
    assert!(a.starts_with("# grouptest "));
    assert!(a.lines().next().unwrap().contains("seed=4"));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 1 + 1 + 4);
}
