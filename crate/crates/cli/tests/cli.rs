use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use petz_lab::io::{read_json, read_matrix, write_matrix, ChannelJson, MatrixJson};
use petz_lab::linalg::{schatten_norm, ComplexMatrix};
use petz_lab::states::QuantumChannel;
use serde_json::{json, Value};
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_petz-lab")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).trim().to_string()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_diag(dir: &Path, name: &str, diag: &[f64]) -> PathBuf {
    let d = diag.len();
    let mut m = ComplexMatrix::zeros(d, d);
    for (i, &v) in diag.iter().enumerate() {
        m[(i, i)] = petz_lab::linalg::re(v);
    }
    let path = dir.join(name);
    write_matrix(&path, &m).unwrap();
    path
}

fn compute_value(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    stdout(&out)
}

fn gen_instances(dir: &Path, count: usize) -> PathBuf {
    let spec = dir.join("spec.json");
    std::fs::write(&spec, json!({"dim": 3, "count": count, "seed": 9}).to_string()).unwrap();
    let out_dir = dir.join("instances");
    let out = run(&["gen", "--spec", path_str(&spec), "--out", path_str(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out_dir
}

#[test]
fn check_smoke_run_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a.json"), tmp.path().join("b.json"));
    for out in [&a, &b] {
        let res = run(&["check", "--suite", "all", "--dim", "2", "--instances", "4", "--seed", "7", "--out", path_str(out)]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let report: Value = serde_json::from_slice(&ta).unwrap();
    assert!(report["checks"].as_array().unwrap().len() >= 13);
    assert_eq!(report["total_failures"], 0);
    assert!(report["checks"][0]["runtime_ms"].is_null());
}

#[test]
fn check_writes_csv_rows() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("rows.csv");
    let res = run(&["check", "--suite", "dpi_relative_entropy,gt", "--dim", "2,3", "--instances", "3", "--out", path_str(&out)]);
    assert!(res.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("check,instance_id,lhs,rhs,margin"));
    assert_eq!(lines.count(), 12);
}

#[test]
fn unknown_check_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("r.json");
    let res = run(&["check", "--suite", "no_such_check", "--dim", "2", "--instances", "1", "--out", path_str(&out)]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn compute_classical_relative_entropy() {
    let tmp = TempDir::new().unwrap();
    let rho = write_diag(tmp.path(), "rho.json", &[0.75, 0.25]);
    let eta = write_diag(tmp.path(), "eta.json", &[0.5, 0.5]);
    let (r, e) = (path_str(&rho), path_str(&eta));
    for q in ["rel-entropy", "measured-rel-entropy"] {
        let v: f64 = compute_value(&["compute", q, "--rho", r, "--eta", e]).parse().unwrap();
        assert!((v - 0.130812036).abs() < 1e-6, "{q}: {v}");
    }
    let v = compute_value(&["compute", "p-fidelity", "--rho", r, "--eta", r, "--p", "2", "--normalized"]);
    assert!((v.parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn support_violation_prints_infinity() {
    let tmp = TempDir::new().unwrap();
    let rho = write_diag(tmp.path(), "rho.json", &[0.5, 0.5]);
    let eta = write_diag(tmp.path(), "eta.json", &[1.0, 0.0]);
    assert_eq!(compute_value(&["compute", "rel-entropy", "--rho", path_str(&rho), "--eta", path_str(&eta)]), "+inf");
}

#[test]
fn malformed_input_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, "{\"dim\": 2, \"re\": [[1.0]]").unwrap();
    let res = run(&["compute", "rel-entropy", "--rho", path_str(&bad), "--eta", path_str(&bad)]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn gen_is_reproducible_and_channels_validate() {
    let (t1, t2) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let (d1, d2) = (gen_instances(t1.path(), 3), gen_instances(t2.path(), 3));
    let mut names: Vec<String> =
        std::fs::read_dir(&d1).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names.len(), 6);
    assert_eq!(names[0], "instance-9-0000.channel.json");
    for name in &names {
        assert_eq!(std::fs::read(d1.join(name)).unwrap(), std::fs::read(d2.join(name)).unwrap(), "{name}");
        if name.ends_with(".channel.json") {
            let json: ChannelJson = read_json(&d1.join(name)).unwrap();
            assert!(QuantumChannel::try_from(json).unwrap().validate().pass, "{name}");
        }
    }
}

/// Both recovery maps send `Φ(η)` back to `η`.
#[test]
fn recovery_maps_fix_the_reference_state() {
    let tmp = TempDir::new().unwrap();
    let dir = gen_instances(tmp.path(), 2);
    for index in 0..2 {
        let stem = format!("instance-9-{index:04}");
        let states: Value = serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{stem}.state.json"))).unwrap()).unwrap();
        let eta: MatrixJson = serde_json::from_value(states["eta"].clone()).unwrap();
        let eta = eta.to_matrix().unwrap();
        let eta_path = tmp.path().join("eta.json");
        write_matrix(&eta_path, &eta).unwrap();
        let channel_path = dir.join(format!("{stem}.channel.json"));
        let ch = QuantumChannel::try_from(read_json::<ChannelJson>(&channel_path).unwrap()).unwrap();
        let x_path = tmp.path().join("x.json");
        write_matrix(&x_path, &ch.apply(&eta).unwrap()).unwrap();
        for quantity in ["petz", "universal-recovery"] {
            let out = tmp.path().join(format!("{quantity}.json"));
            compute_value(&[
                "compute",
                quantity,
                "--eta",
                path_str(&eta_path),
                "--channel",
                path_str(&channel_path),
                "--x",
                path_str(&x_path),
                "--out",
                path_str(&out),
            ]);
            let back = read_matrix(&out).unwrap();
            let err = schatten_norm(&(back - &eta), 1.0).unwrap();
            let tol = if quantity == "petz" { 1e-10 } else { 1e-8 };
            assert!(err < tol, "{stem} {quantity}: {err:e}");
        }
    }
}
