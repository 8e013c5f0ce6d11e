use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ou-weyl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn num(v: &Value) -> f64 {
    match v {
        Value::String(s) if s == "inf" => f64::INFINITY,
        other => other.as_f64().expect("number"),
    }
}

#[test]
fn bound_hand_value() {
    let out = run(&[
        "bound", "--p", "2", "--q", "2", "--alpha", "1", "--beta", "1", "--d", "1", "--s", "1,0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((num(&v["bound"]) - 0.5f64.sqrt()).abs() < 1e-5);
    assert_eq!(v["feasible"], true);
}

#[test]
fn bound_auto_bbg_sets_alpha() {
    let out = run(&[
        "bound", "--p", "1", "--q", "2", "--alpha", "auto-bbg", "--beta", "1", "--d", "1", "--t",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((num(&v["alpha"]) - (1.0 + (-2.0f64).exp())).abs() < 1e-14);
    assert!(v["s"].is_array());
    assert_eq!(v["feasible"], true);
}

#[test]
fn bound_infeasible_is_reported_not_failed() {
    let out = run(&["bound", "--p", "2", "--q", "4", "--t", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["feasible"], false);
    assert_eq!(v["bound"], "inf");
}

#[test]
fn bound_usage_errors() {
    for args in [
        &["bound", "--p", "2", "--q", "2"][..],
        &["bound", "--p", "2", "--q", "2", "--s", "1,0", "--z", "1,0"],
        &[
            "bound", "--p", "2", "--q", "2", "--alpha", "auto-bbg", "--s", "1,0",
        ],
        &["bound", "--p", "2", "--q", "2", "--s", "-1,0"],
        &["bound", "--p", "0.5", "--q", "2", "--s", "1,0"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn rational_flags() {
    let a = json(&run(&["bound", "--p", "4/3", "--q", "2", "--s", "0.5,0.5"]));
    let b = json(&run(&[
        "bound",
        "--p",
        "1.3333333333333333",
        "--q",
        "2",
        "--s",
        "0.5,0.5",
    ]));
    assert_eq!(a["bound"], b["bound"]);
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn region_sector_half_plane() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sector.csv");
    let out = run(&[
        "region",
        "--region",
        "sector",
        "--p",
        "2",
        "--window",
        "0,2,-2,2",
        "--res",
        "50",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&path);
    assert_eq!(rows.len(), 2500);
    assert!(rows.iter().all(|r| r[0] <= 0.0 || r[2] == 1.0));
    assert!(dir.path().join("sector.csv.manifest.json").exists());
}

#[test]
fn region_overlay_contained_in_figures() {
    let dir = tempfile::tempdir().unwrap();
    for (region, p) in [("epperson", "1.3333"), ("rp", "1.3333")] {
        let csv = dir.path().join(format!("{region}.csv"));
        let out = run(&[
            "region",
            "--region",
            region,
            "--p",
            p,
            "--overlay",
            "sector",
            "--res",
            "120",
            "--out",
            csv.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(json(&out)["overlay"]["contained"], true);
        let rows = csv_rows(&csv);
        assert!(rows.iter().any(|r| r[3] == 1.0));
        assert!(rows.iter().all(|r| r[3] == 0.0 || r[2] == 1.0));
        assert!(rows.iter().any(|r| r[2] == 1.0 && r[3] == 0.0));

        let svg = dir.path().join(format!("{region}.svg"));
        run(&[
            "region",
            "--region",
            region,
            "--p",
            p,
            "--overlay",
            "sector",
            "--out",
            svg.to_str().unwrap(),
        ]);
        let text = std::fs::read_to_string(&svg).unwrap();
        assert!(text.starts_with("<svg") && text.contains("#ff7f0e") && text.contains("#d62728"));
    }
}

#[test]
fn region_errors() {
    assert_eq!(run(&["region", "--region", "rp"]).status.code(), Some(2));
    assert_eq!(
        run(&["region", "--region", "rp", "--p", "2", "--window", "1,0,0,1"])
            .status
            .code(),
        Some(2)
    );
    let out = run(&[
        "region",
        "--region",
        "rp",
        "--p",
        "2",
        "--out",
        "/nonexistent-dir/x.csv",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.svg");
    let b = dir.path().join("b.svg");
    for p in [&a, &b] {
        run(&[
            "region",
            "--region",
            "epq",
            "--p",
            "2",
            "--q",
            "3",
            "--res",
            "60",
            "--out",
            p.to_str().unwrap(),
        ]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let x = run(&["probe", "--p", "2", "--q", "2", "--s", "0.5,0.3"]);
    let y = run(&["probe", "--p", "2", "--q", "2", "--s", "0.5,0.3"]);
    assert_eq!(x.stdout, y.stdout);
}

#[test]
fn verify_suites() {
    let out = run(&["verify", "--suite", "kernel-identity"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["checks"].as_array().unwrap().len(), 24);
    assert!(v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| num(&c["measured"]) < 1e-10));

    let out = run(&["verify", "--suite", "pq-identities"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(num(&json(&out)["checks"][0]["measured"]) < 1e-9);

    assert_eq!(
        run(&["verify", "--suite", "wiener", "--tol", "1e-30"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["verify", "--suite", "bogus"]).status.code(), Some(2));
}

#[test]
fn verify_all_passes() {
    let start = std::time::Instant::now();
    let out = run(&["verify", "--suite", "all"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(start.elapsed().as_secs() < 60);
}

#[test]
fn probe_nelson_sides() {
    let below = json(&run(&[
        "probe", "--p", "2", "--q", "4", "--alpha", "1", "--beta", "1", "--d", "1", "--nelson",
        "0.9",
    ]));
    assert_eq!(below["blow_up"], true);
    let above = json(&run(&["probe", "--p", "2", "--q", "4", "--nelson", "1.1"]));
    assert_eq!(above["exceeds_bound"], false);
    assert!(num(&above["max_ratio"]) <= num(&above["bound"]));
}

#[test]
fn probe_weyl_point() {
    let v = json(&run(&["probe", "--p", "2", "--q", "2", "--s", "0.5,0"]));
    assert!(num(&v["max_ratio"]) <= num(&v["bound"]));
    assert!((num(&v["ratio_at_zero"]) - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn probe_rejects_inadmissible_lambda_window() {
    let out = run(&[
        "probe",
        "--p",
        "2",
        "--q",
        "2",
        "--s",
        "0.5,0",
        "--lambda-window",
        "0,0.6",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_cap_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_ou-weyl"))
        .args(["verify", "--suite", "wiener"])
        .env("WEYL_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_ou-weyl"))
        .args(["verify", "--suite", "wiener"])
        .env("WEYL_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}
