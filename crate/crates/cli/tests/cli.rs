use std::process::{Command, Output};

use morse_cs::coherent::closed_form_state;
use morse_cs::statistics::{g2, moment_n};
use morse_cs::{Complex64, MorseSpace};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morse-cs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows (no `#` header, no column line) split into cells.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .take_while(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn spectrum_small_well() {
    let o = run(&["spectrum", "--l", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    let pairs: Vec<(&str, &str)> = r.iter().map(|c| (c[0].as_str(), c[1].as_str())).collect();
    assert_eq!(pairs, vec![("0", "0"), ("1", "5"), ("2", "8")]);
}

#[test]
fn spectrum_molecule_notes_rounding() {
    let o = run(&["spectrum", "--molecule", "H2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(rows(&out).len(), 19);
    assert!(out.contains("# l: 18\n"));
    assert!(out.contains("# rounding residual: +0.8414\n"));
}

#[test]
fn spectrum_rejects_empty_well() {
    assert_eq!(run(&["spectrum", "--l", "0"]).status.code(), Some(2));
    assert_eq!(run(&["spectrum", "--l", "-3"]).status.code(), Some(2));
    assert_eq!(run(&["spectrum", "--molecule", "CO"]).status.code(), Some(2));
    assert_eq!(
        run(&["spectrum", "--l", "2", "--molecule", "H2"]).status.code(),
        Some(2)
    );
}

#[test]
fn preset_file_extends_builtins() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("presets.txt");
    std::fs::write(&path, "# test presets\nXY 10.2\n").unwrap();
    let o = run(&["spectrum", "--molecule", "XY", "--preset-file", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(rows(&stdout(&o)).len(), 5);
    std::fs::write(&path, "XY ten\n").unwrap();
    let o = run(&["spectrum", "--molecule", "XY", "--preset-file", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stats_row_at_unit_x() {
    let o = run(&["stats", "--l", "2", "--x-grid", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    let got: Vec<f64> = r[0].iter().map(|c| num(c)).collect();
    let want = [1.0, 1.0, 1.5, 0.5, -0.5, 4.5, 4.5];
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() < 1e-13, "{got:?}");
    }
}

#[test]
fn stats_null_marker_at_vacuum() {
    let o = run(&["stats", "--l", "3", "--x-grid", "0:1:3"]);
    let r = rows(&stdout(&o));
    assert_eq!(r[0][3], "NA");
    assert_eq!(r[0][4], "NA");
    assert_ne!(r[1][3], "NA");
}

#[test]
fn stats_log_grid_monotone() {
    let o = run(&["stats", "--l", "4", "--x-grid", "0.01:100:50:log"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 50);
    let n: Vec<f64> = r.iter().map(|c| num(&c[1])).collect();
    assert!(n.windows(2).all(|w| w[1] > w[0]));
    let g: Vec<f64> = r.iter().map(|c| num(&c[3])).collect();
    assert!(g.iter().all(|v| (v - 0.75).abs() < 1e-12));
}

#[test]
fn stats_reproducible_from_library() {
    let o = run(&["stats", "--l", "7", "--x-grid", "0.1:30:9", "--alpha", "0.4"]);
    let space = MorseSpace::new(7).unwrap();
    for (i, row) in rows(&stdout(&o)).iter().enumerate() {
        let x = if i == 8 { 30.0 } else { 0.1 + (30.0 - 0.1) * (i as f64 / 8.0) };
        assert_eq!(row[0], format!("{x:.14e}"));
        let st = closed_form_state(&space, Complex64::new(x.sqrt(), 0.0), 0.4);
        let lib = [moment_n(&st, 1).unwrap(), moment_n(&st, 2).unwrap(), g2(&st).unwrap()];
        for (cell, v) in row[1..4].iter().zip(lib) {
            assert_eq!(cell, &format!("{v:.14e}"));
        }
    }
}

#[test]
fn bad_grids_are_usage_errors() {
    for g in ["1:0:4", "0:1:0", "0:1:3:log", "x"] {
        let o = run(&["stats", "--l", "2", "--x-grid", g]);
        assert_eq!(o.status.code(), Some(2), "{g}");
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["thermal", "--l", "5", "--beta-grid", "0.1:3:7", "--husimi-x-grid", "0:4:5"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let seq: Vec<&str> = args.iter().copied().chain(["--sequential"]).collect();
    let c = run(&seq);
    // only the echoed command line differs
    let strip = |o: &Output| {
        stdout(o)
            .lines()
            .filter(|l| !l.starts_with("# command"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&c));
    assert!(!stdout(&a).contains('\r'));
}

#[test]
fn thermal_reference_rows() {
    let o = run(&["thermal", "--l", "2", "--a-grid", "0:1:2"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    // columns: A,B,Z,N,N2,g2,Q,gap,F,U,S,C_v
    assert_eq!(num(&r[0][2]), 3.0);
    assert!((num(&r[0][10]) - 3f64.ln()).abs() < 1e-14);
    assert!((num(&r[1][2]) - 1.698195346622805).abs() < 1e-13);
    assert!((num(&r[1][3]) - 0.5663615123261555).abs() < 1e-13);
    assert!((num(&r[1][5]) - 0.9678221881128345).abs() < 1e-13);
    assert!((num(&r[1][9]) - 0.4202272877475828).abs() < 1e-13);
}

#[test]
fn p_column_at_zero_anharmonicity_is_exact() {
    let o = run(&["pfunction", "--l", "3", "--a-grid", "0", "--x-grid", "0:5:6"]);
    assert_eq!(o.status.code(), Some(0));
    for row in rows(&stdout(&o)) {
        assert_eq!(row[4], "0");
        assert_eq!(row[5], "true");
        assert_eq!(row[3], row[6]);
    }
}

#[test]
fn unconverged_p_rows_are_warnings() {
    let o = run(&["pfunction", "--l", "2", "--a-grid", "2", "--x-grid", "0.5:5:4"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unconverged"));
    assert!(rows(&stdout(&o)).iter().any(|r| r[5] == "false"));
}

#[test]
fn json_and_side_files() {
    let o = run(&["stats", "--l", "2", "--x-grid", "0:1:2", "--format", "json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"][0]["g2"], Value::Null);
    assert_eq!(v["rows"][1]["Q"], -0.5);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("thermal.csv");
    let o = run(&[
        "thermal", "--l", "2", "--a-grid", "1", "--husimi-x-grid", "1", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let side = out.with_file_name(format!(
        "{}.husimi.csv",
        out.file_stem().unwrap().to_str().unwrap()
    ));
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("# table: thermal"));
    assert!(std::fs::read_to_string(&side).unwrap().starts_with("# table: husimi"));
}

fn report(args: &[&str]) -> (Option<i32>, Value) {
    let o = run(args);
    (o.status.code(), serde_json::from_slice(&o.stdout).unwrap())
}

#[test]
fn verify_coherent_scope() {
    let (code, v) = report(&["verify", "--scope", "coherent", "--l", "2,5,8"]);
    assert_eq!(code, Some(0));
    let checks = v["checks"].as_array().unwrap();
    let moments: Vec<&Value> = checks
        .iter()
        .filter(|c| c["name"] == "resolution_of_identity")
        .collect();
    assert_eq!(moments.len(), 3);
    assert!(moments.iter().all(|c| c["residual"].as_f64().unwrap() < 1e-10));
    assert!(v["wall_time_seconds"].as_f64().is_some());
}

#[test]
fn verify_ladder_diagnostics_are_informational() {
    let (code, v) = report(&["verify", "--scope", "ladder"]);
    assert_eq!(code, Some(0));
    let checks = v["checks"].as_array().unwrap();
    for name in ["delta_recurrence_residual", "j_ode_residual_max"] {
        assert!(checks.iter().any(|c| c["name"] == name && c["status"] == "info"));
    }
    assert_eq!(v["summary"]["fail"], 0);
}

#[test]
fn verify_thermal_warns_outside_small_anharmonicity() {
    let (code, v) = report(&["verify", "--scope", "thermal", "--l", "2"]);
    assert_eq!(code, Some(0));
    assert!(v["summary"]["warn"].as_u64().unwrap() > 0);
    assert_eq!(v["summary"]["fail"], 0);
}

#[test]
fn verify_impossible_tolerance_fails_cleanly() {
    let (code, v) = report(&["verify", "--scope", "statistics", "--l", "3", "--tol", "0"]);
    assert_eq!(code, Some(1));
    assert!(v["summary"]["fail"].as_u64().unwrap() > 0);
    assert_eq!(run(&["verify", "--scope", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--l", "0"]).status.code(), Some(2));
}
