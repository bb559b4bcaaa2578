use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtradeoff"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stdout_text(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn assert_schema_valid(doc: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema/qtradeoff.schema.json");
    let schema: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator
        .iter_errors(doc)
        .map(|e| format!("{} at {}", e, e.instance_path()))
        .collect();
    assert!(errors.is_empty(), "schema violations: {errors:#?}");
}

fn header(csv: &str) -> &str {
    csv.lines().next().unwrap()
}

fn sdp_value(doc: &Value, normalization: &str) -> f64 {
    doc["records"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["method"] == "sdp" && r["normalization"] == normalization)
        .expect("sdp record")["value"]
        .as_f64()
        .unwrap()
}

#[test]
fn bounds_at_origin_two_copies() {
    let doc = stdout_json(&[
        "bounds",
        "--theta",
        "0,0,0",
        "--weights",
        "1,1,1",
        "--copies",
        "2",
    ]);
    assert_schema_valid(&doc);
    assert_eq!(doc["kind"], "bounds");
    for r in doc["records"].as_array().unwrap() {
        let want = match (
            r["method"].as_str().unwrap(),
            r["normalization"].as_str().unwrap(),
        ) {
            ("analytic" | "sdp", "per_measurement") => 3.0,
            ("analytic" | "sdp", "per_qubit") => 6.0,
            ("qcrb" | "holevo", "per_measurement") => 1.5,
            ("qcrb" | "holevo", "per_qubit") => 3.0,
            other => panic!("unexpected record {other:?}"),
        };
        assert!((r["value"].as_f64().unwrap() - want).abs() < 1e-6, "{r}");
    }
}

#[test]
fn bounds_csv_header() {
    let csv = stdout_text(&["bounds", "--theta", "0,0,0", "--format", "csv"]);
    assert_eq!(
        header(&csv),
        "theta_x,theta_y,theta_z,wx,wy,wz,copies,method,normalization,value,gap,iterations"
    );
}

#[test]
fn tabulated_measurements_match_sdp() {
    for copies in ["1", "2"] {
        let povm = stdout_json(&[
            "povm",
            "--povm",
            "supp6",
            "--copies",
            copies,
            "--normalization",
            "per_qubit",
        ]);
        assert_schema_valid(&povm);
        let bounds = stdout_json(&[
            "bounds",
            "--theta",
            "0.3,0.3,0.3",
            "--weights",
            "1,4,9",
            "--copies",
            copies,
            "--normalization",
            "per_qubit",
        ]);
        let trace = povm["weighted_trace"].as_f64().unwrap();
        let bound = sdp_value(&bounds, "per_qubit") / 14.0;
        assert!(
            (trace - bound).abs() < 2e-3,
            "copies {copies}: {trace} vs {bound}"
        );
    }
}

#[test]
fn single_copy_tabulated_value() {
    let bounds = stdout_json(&[
        "bounds",
        "--theta",
        "0.3,0.3,0.3",
        "--weights",
        "1,4,9",
        "--copies",
        "1",
    ]);
    assert!((sdp_value(&bounds, "per_qubit") / 14.0 - 2.329480).abs() < 1e-5);
}

#[test]
fn povm_csv_header_and_rows() {
    let csv = stdout_text(&[
        "povm",
        "--povm",
        "opt2",
        "--weights",
        "1,1,1",
        "--format",
        "csv",
    ]);
    assert_eq!(header(&csv), "outcome,probability,dp_x,dp_y,dp_z");
    assert_eq!(csv.lines().count(), 8);
}

#[test]
fn surface_scan_artifact() {
    let doc = stdout_json(&[
        "surface", "--theta", "0,0,0", "--copies", "1", "--grid", "3",
    ]);
    assert_schema_valid(&doc);
    assert_eq!(doc["planes"].as_array().unwrap().len(), 25);
    for r in doc["residuals"].as_array().unwrap() {
        assert!(r.as_f64().unwrap() <= 1e-9);
    }
    let csv = stdout_text(&[
        "surface", "--theta", "0,0,0", "--copies", "2", "--grid", "2", "--format", "csv",
    ]);
    assert_eq!(header(&csv), "vx,vy,vz,residual");
}

#[test]
fn simulate_artifact() {
    let args = [
        "simulate",
        "--theta",
        "0,0,0",
        "--weights",
        "1,1,1",
        "--repeats",
        "100",
        "--seed",
        "7",
    ];
    let doc = stdout_json(&args);
    assert_schema_valid(&doc);
    let report = &doc["reports"][0];
    assert_eq!(report["estimator"], "linear");
    assert_eq!(stdout_json(&args), doc);
    let csv = stdout_text(&[
        "simulate",
        "--theta",
        "0.1,0.1,0.1",
        "--grid",
        "2",
        "--repeats",
        "20",
        "--shots",
        "100",
        "--format",
        "csv",
    ]);
    assert_eq!(
        header(&csv),
        "wx,wy,wz,vx,vy,vz,weighted_trace,stderr,c1,c2,z_c1"
    );
    assert_eq!(csv.lines().count(), 1 + 7);
}

#[test]
fn simulate_per_measurement_halves_per_qubit() {
    let base = [
        "simulate",
        "--theta",
        "0,0,0",
        "--weights",
        "1,2,3",
        "--repeats",
        "50",
    ];
    let per_qubit = stdout_json(&[&base[..], &["--normalization", "per_qubit"]].concat());
    let per_measurement =
        stdout_json(&[&base[..], &["--normalization", "per_measurement"]].concat());
    let a = per_qubit["reports"][0]["weighted_trace"].as_f64().unwrap();
    let b = per_measurement["reports"][0]["weighted_trace"]
        .as_f64()
        .unwrap();
    assert!((a - 2.0 * b).abs() < 1e-9 * a);
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bounds.json");
    let args = ["bounds", "--theta", "0.1,0.2,0.3", "--weights", "1,2,3"];
    let printed = stdout_text(&args);
    let out = run(&[&args[..], &["--out", path.to_str().unwrap()]].concat());
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(fs::read_to_string(path).unwrap(), printed);
}

#[test]
fn reproduce_writes_valid_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "reproduce",
        "--seed",
        "3",
        "--repeats",
        "40",
        "--grid",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_schema_valid(&summary);
    assert_eq!(summary["grid_points"], 7);
    let origin = fs::read_to_string(dir.path().join("origin.csv")).unwrap();
    assert_eq!(
        header(&origin),
        "ux,uy,uz,wx,wy,wz,vx,vy,vz,weighted_trace,stderr,sic_weighted_trace,sic_stderr,c1,c2,z_c1"
    );
    let sweep = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(
        header(&sweep),
        "t,shots,ux,uy,uz,weighted_trace,stderr,sic_weighted_trace,sic_stderr,theory,c1,c2,z_c1"
    );
    assert_eq!(sweep.lines().count(), 1 + 5 * 7);
}

#[test]
fn unphysical_state_exits_2() {
    let out = run(&["bounds", "--theta", "0,0,2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unphysical"));
}

#[test]
fn empty_grid_exits_2() {
    let out = run(&["surface", "--grid", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validation_errors_exit_2() {
    for args in [
        &["bounds", "--shots", "10"][..],
        &["bounds", "--copies", "3"],
        &["bounds", "--weights", "1,1"],
        &["bounds", "--weights", "-1,1,1"],
        &["bounds", "--weights", "1,1,1", "--grid", "2"],
        &["surface", "--weights", "1,1,1"],
        &["povm", "--povm", "sic", "--copies", "1"],
        &["simulate", "--repeats", "0"],
        &["reproduce", "--theta", "0,0,0"],
    ] {
        let out = run(args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn twelve_significant_digits() {
    let csv = stdout_text(&[
        "bounds",
        "--theta",
        "0.1,0.2,0.3",
        "--weights",
        "1,2,3",
        "--format",
        "csv",
    ]);
    for line in csv.lines().skip(1) {
        let value = line.split(',').nth(9).unwrap();
        let digits = value
            .trim_start_matches('-')
            .split('e')
            .next()
            .unwrap()
            .replace('.', "");
        assert!(digits.trim_start_matches('0').len() <= 12, "{value}");
    }
}
