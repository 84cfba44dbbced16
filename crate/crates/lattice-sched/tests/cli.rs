use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lattice-sched"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn products(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn transpile_then_stats() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("c.gates"), "qubits 3\nh 0\nt 0\ncx 0 1\nt 1\ns 2\nh 2\ntdg 2\n").unwrap();
    let out = bin(&["transpile", "c.gates", "c.json"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let p = products(&d.join("c.json"));
    assert_eq!(p["products"], serde_json::json!(["X0", "X0 Z1", "Y2"]));

    let out = bin(&["stats", "c.json", "--window", "1", "--csv", "w.csv"], d);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("layers: 2"), "{text}");
    let rows = fs::read_to_string(d.join("w.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 2);
}

#[test]
fn bad_gate_file_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.gates"), "qubits 2\nh 5\n").unwrap();
    let out = bin(&["transpile", "bad.gates", "out.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn randgen_schedule_verify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = bin(&["randgen", "r.json", "--qubits", "12", "--products", "200", "--size-mean", "2", "--seed", "4"], d);
    assert!(out.status.success());
    assert_eq!(products(&d.join("r.json"))["products"].as_array().unwrap().len(), 200);
    let out = bin(&["schedule", "r.json", "--arch", "bus", "--reps", "2", "--out", "s", "--verify"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["layout.json", "trace_seed0.csv", "trace_seed1.csv", "metrics_seed1.json", "summary.json"] {
        assert!(d.join("s").join(f).exists(), "{f}");
    }
    let trace = fs::read_to_string(d.join("s/trace_seed0.csv")).unwrap();
    assert_eq!(trace.lines().next(), Some("cycle,product,weight,magic_cell,cells"));
    assert_eq!(trace.lines().count(), 201);
}

#[test]
fn sweep_outputs_and_partial_failure() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("empty.json"), "{}").unwrap();
    let out = bin(&["sweep", "empty.json", "--out", "e"], d);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(d.join("e/results.csv")).unwrap().lines().count(), 1);

    let spec = serde_json::json!({
        "matrix": {
            "inputs": [
                {"randgen": {"num_qubits": 8, "num_products": 60, "size_mean": 1.5, "seed": 1}},
                {"products": "missing.json"}
            ],
            "cultivation_means": [1.0, 8.0],
            "repetitions": 2
        }
    });
    fs::write(d.join("spec.json"), spec.to_string()).unwrap();
    let out = bin(&["sweep", "spec.json", "--out", "m"], d);
    assert_eq!(out.status.code(), Some(4));
    let results = fs::read_to_string(d.join("m/results.csv")).unwrap();
    // 2 inputs x 2 means x 2 archs x 2 repetitions
    assert_eq!(results.lines().count(), 1 + 16);
    assert_eq!(results.lines().skip(1).filter(|l| l.contains(",error,")).count(), 8);
    let pivot = fs::read_to_string(d.join("m/cultivation.csv")).unwrap();
    assert!(pivot.lines().next().unwrap().contains("improvement_8"));
    assert_eq!(pivot.lines().count(), 2);
}
