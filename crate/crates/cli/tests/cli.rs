use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qsmooth"))
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn run_json(args: &[&str]) -> Value {
    let (code, stdout, stderr) = run(args);
    assert_eq!(code, 0, "{args:?}: {stderr}");
    serde_json::from_str(&stdout).unwrap()
}

fn matrix(v: &Value) -> Vec<Vec<f64>> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|row| {
            row.as_array()
                .unwrap()
                .iter()
                .map(|x| x.as_f64().unwrap())
                .collect()
        })
        .collect()
}

fn assert_matrix(actual: &Value, expected: &[&[f64]], tol: f64) {
    let m = matrix(actual);
    assert_eq!(m.len(), expected.len());
    for (row, exp) in m.iter().zip(expected) {
        assert_eq!(row.len(), exp.len());
        for (a, b) in row.iter().zip(*exp) {
            assert!((a - b).abs() <= tol, "{m:?} vs {expected:?}");
        }
    }
}

fn golden(name: &str) -> Value {
    let text = std::fs::read_to_string(crate_dir().join("golden").join(name)).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn golden_files_regenerate_cleanly() {
    let dir = crate_dir().join("golden");
    let v = run_json(&["verify", "--golden", dir.to_str().unwrap()]);
    assert_eq!(v["passed"], Value::Bool(true));
    let golden = v["golden"].as_array().unwrap();
    assert!(golden.len() >= 19);
    for g in golden {
        assert_eq!(g["matches"], Value::Bool(true), "{g}");
    }
}

#[test]
fn corrupted_golden_fails_with_invariant_code() {
    let tmp = tempfile::tempdir().unwrap();
    let src = crate_dir().join("golden");
    for entry in std::fs::read_dir(&src).unwrap() {
        let path = entry.unwrap().path();
        std::fs::copy(&path, tmp.path().join(path.file_name().unwrap())).unwrap();
    }
    let target = tmp.path().join("wigner_0.json");
    let text = std::fs::read_to_string(&target)
        .unwrap()
        .replacen("0.5", "0.25", 1);
    std::fs::write(&target, text).unwrap();
    let (code, stdout, _) = run(&["verify", "--golden", tmp.path().to_str().unwrap()]);
    assert_eq!(code, 4);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    let bad: Vec<&Value> = v["golden"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|g| g["matches"] == false)
        .collect();
    assert_eq!(bad.len(), 1);
    assert_eq!(bad[0]["file"], "wigner_0.json");
}

#[test]
fn missing_golden_directory_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, _, _) = run(&[
        "verify",
        "--golden",
        tmp.path().join("absent").to_str().unwrap(),
    ]);
    assert_eq!(code, 4);
}

#[test]
fn golden_eigenstate_tables() {
    let expected: [(&str, [[f64; 2]; 2]); 6] = [
        ("wigner_0.json", [[0.5, 0.0], [0.5, 0.0]]),
        ("wigner_1.json", [[0.0, 0.5], [0.0, 0.5]]),
        ("wigner_plus.json", [[0.0, 0.0], [0.5, 0.5]]),
        ("wigner_minus.json", [[0.5, 0.5], [0.0, 0.0]]),
        ("wigner_i.json", [[0.0, 0.5], [0.5, 0.0]]),
        ("wigner_minus_i.json", [[0.5, 0.0], [0.0, 0.5]]),
    ];
    for (file, m) in expected {
        let rows: Vec<&[f64]> = m.iter().map(|r| r.as_slice()).collect();
        assert_matrix(&golden(file)["matrix"], &rows, 1e-12);
    }
}

#[test]
fn golden_worked_example() {
    let v = golden("smooth_x0_yi.json");
    assert_matrix(
        &v["posterior"]["matrix"],
        &[&[0.0, 0.0], &[1.0, 0.0]],
        1e-12,
    );
    assert_eq!(v["map"], serde_json::json!([[0, 0]]));
    assert!((v["evidence"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!(v["averages"]["r"].as_f64().unwrap().abs() < 1e-12);
    assert_matrix(
        &golden("wigner_povm_i.json")["matrix"],
        &[&[0.0, 1.0], &[1.0, 0.0]],
        1e-12,
    );
}

#[test]
fn golden_two_qubit_tables() {
    let v = golden("wigner_00+01.json");
    assert_eq!(v["points"].as_array().unwrap().len(), 16);
    let m = matrix(&v["matrix"]);
    assert_eq!(m.len(), 4);
    for row in &m {
        for &x in row {
            assert!(x.abs() < 1e-12 || (x - 0.25).abs() < 1e-12);
        }
    }
    let total: f64 = m.iter().flatten().sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn golden_strong_signal_bundle() {
    let v = golden("aav_strong_signal.json");
    let ratio = 2.0 * 0.1f64.sqrt() / 0.1;
    let m1 = v["q_marginal_t1"].as_array().unwrap();
    assert!((m1[0].as_f64().unwrap() - (0.5 - ratio)).abs() < 1e-10);
    assert!((m1[1].as_f64().unwrap() - (0.5 + ratio)).abs() < 1e-10);
    assert_eq!(v["q_map"], "1");
    assert_matrix(
        &v["tables"]["posterior_t1"]["matrix"],
        &[&[0.5 - ratio, 0.5 + ratio], &[0.0, 0.0]],
        1e-10,
    );
    assert_matrix(
        &v["tables"]["posterior_t2"]["matrix"],
        &[&[0.0, 0.0], &[0.5 - ratio, 0.5 + ratio]],
        1e-10,
    );
    for key in [
        "w1_t1",
        "w1_t2",
        "w2_t1",
        "w2_t2",
        "posterior_t1",
        "posterior_t2",
    ] {
        assert!(v["tables"][key]["matrix"].is_array(), "{key}");
    }
    assert_eq!(golden("aav_dz0.json")["q_map"], "ambiguous");
}

#[test]
fn golden_sweep_csv() {
    let text = std::fs::read_to_string(crate_dir().join("golden/aav_sweep.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("dz,q_bar,q_map,min_posterior"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 41);
    for row in rows {
        let dz: f64 = row[0].parse().unwrap();
        let q_bar: f64 = row[1].parse().unwrap();
        assert!((q_bar - (0.5 + 2.0 * dz / 0.1)).abs() < 1e-10);
        let expected_map = if dz.abs() < 1e-15 {
            "ambiguous"
        } else if dz > 0.0 {
            "1"
        } else {
            "0"
        };
        assert_eq!(row[2], expected_map);
    }
}

#[test]
fn golden_census_and_histories() {
    for (file, total, nonneg, neg) in [
        ("stabilizers_1.json", 6, 6, 0),
        ("stabilizers_2.json", 60, 48, 12),
    ] {
        let v = golden(file);
        assert_eq!(v["total"], total);
        assert_eq!(v["nonnegative_count"], nonneg);
        assert_eq!(v["negative_count"], neg);
        assert_eq!(v["states"].as_array().unwrap().len(), total);
    }
    let h = golden("histories.json");
    let expected = [[(0.25, 0.0), (0.0, -0.25)], [(0.0, 0.25), (0.25, 0.0)]];
    for (p, row) in expected.iter().enumerate() {
        for (q, (re, im)) in row.iter().enumerate() {
            let z = &h["matrix"][p][q];
            assert!((z[0].as_f64().unwrap() - re).abs() < 1e-12);
            assert!((z[1].as_f64().unwrap() - im).abs() < 1e-12);
        }
    }
    assert_eq!(h["weakly_consistent"], true);
}

#[test]
fn identical_config_gives_identical_bytes() {
    for args in [
        &["stabilizers", "--n-qubits", "2"][..],
        &["verify", "--seed", "3", "--format", "csv"][..],
        &[
            "aav",
            "--dt",
            "0.01",
            "--dz-grid",
            "-0.05:0.05:11",
            "--mode",
            "exact",
        ][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert_eq!(a.0, 0);
        assert_eq!(a, b);
    }
}

#[test]
fn verdicts_are_seed_independent() {
    let verdicts = |seed: &str| -> Vec<Value> {
        let v = run_json(&["verify", "--seed", seed]);
        v["checks"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c["passed"].clone())
            .collect()
    };
    let a = verdicts("0");
    assert!(a.iter().all(|p| p == true));
    assert_eq!(a, verdicts("987654321"));
}

#[test]
fn exit_codes() {
    assert_eq!(
        run(&["smooth", "--state=-", "--povm", "x", "--outcome", "+"]).0,
        3
    );
    assert_eq!(run(&["wigner", "--state", "2"]).0, 2);
    assert_eq!(
        run(&["smooth", "--state", "0", "--povm", "y", "--outcome", "nope"]).0,
        2
    );
    assert_eq!(run(&["smooth", "--state", "0"]).0, 2);
    assert_eq!(run(&["aav", "--dt", "-1", "--dz", "0"]).0, 2);
    assert_eq!(
        run(&["aav", "--dt", "0.1", "--dz", "0.05", "--mode", "exact"]).0,
        3
    );
    assert_eq!(run(&["stabilizers", "--n-qubits", "3"]).0, 2);
    assert_eq!(run(&["no-such-command"]).0, 2);
    let bad = crate_dir().join("tests/data/not_hermitian.json");
    assert_eq!(run(&["wigner", "--file", bad.to_str().unwrap()]).0, 2);
}

#[test]
fn operator_and_povm_files() {
    let mixed = crate_dir().join("tests/data/maximally_mixed.json");
    let v = run_json(&["wigner", "--file", mixed.to_str().unwrap()]);
    assert_matrix(&v["matrix"], &[&[0.25, 0.25], &[0.25, 0.25]], 1e-15);
    let v = run_json(&[
        "wigner",
        "--file",
        mixed.to_str().unwrap(),
        "--kind",
        "povm",
    ]);
    assert_eq!(v["kind"], "povm");
    assert_matrix(&v["matrix"], &[&[0.5, 0.5], &[0.5, 0.5]], 1e-15);
    let povm = crate_dir().join("tests/data/z_povm.json");
    let v = run_json(&[
        "smooth",
        "--state",
        "+",
        "--povm-file",
        povm.to_str().unwrap(),
        "--outcome",
        "down",
    ]);
    assert!((v["evidence"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((v["averages"]["q"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn identity_measurement_returns_prior() {
    let prior = run_json(&["wigner", "--state", "i"]);
    let v = run_json(&["smooth", "--state", "i", "--povm", "identity"]);
    let expected = matrix(&prior["matrix"]);
    let rows: Vec<&[f64]> = expected.iter().map(Vec::as_slice).collect();
    assert_matrix(&v["posterior"]["matrix"], &rows, 1e-12);
}

#[test]
fn steps_move_the_smoothing_time() {
    // H then S maps |0> to |i>, so a y outcome of i is certain
    let v = run_json(&[
        "smooth",
        "--state",
        "0",
        "--steps",
        "h,s",
        "--povm",
        "y",
        "--outcome",
        "i",
        "--at",
        "2",
    ]);
    assert!((v["evidence"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let (code, _, _) = run(&[
        "smooth",
        "--state",
        "0",
        "--steps",
        "h",
        "--povm",
        "z",
        "--outcome",
        "0",
        "--at",
        "5",
    ]);
    assert_eq!(code, 2);
}

#[test]
fn csv_uses_seventeen_significant_digits() {
    let (code, stdout, _) = run(&["wigner", "--state", "+", "--format", "csv"]);
    assert_eq!(code, 0);
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("q,p,w"));
    for line in lines {
        let w = line.rsplit(',').next().unwrap();
        let mantissa = w
            .split('e')
            .next()
            .unwrap()
            .trim_start_matches('-')
            .replace('.', "");
        assert_eq!(mantissa.len(), 17, "{w}");
    }
}

#[test]
fn out_flag_writes_file() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("census.json");
    let (code, stdout, _) = run(&[
        "stabilizers",
        "--n-qubits",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let v: Value =
        serde_json::from_str(&std::fs::read_to_string(Path::new(&path)).unwrap()).unwrap();
    assert_eq!(v["total"], 6);
}
