use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn spheremix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spheremix"))
        .args(args)
        .env_remove("SPHEREMIX_THREADS")
        .output()
        .expect("spawn spheremix")
}

fn ok_stdout(args: &[&str]) -> String {
    let out = spheremix(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok_stdout(args)).unwrap()
}

fn schema_path(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(name)
}

fn assert_valid(schema: &str, doc: &Value) {
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_path(schema)).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}\n{doc}");
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn theta_arg(v: f64) -> String {
    format!("{v:?}")
}

#[test]
fn bounds_at_right_angle() {
    let t = theta_arg(FRAC_PI_2);
    let b = json(&["bounds", "--theta", &t, "--k", "16"]);
    assert_valid("bounds.schema.json", &b);
    assert_eq!(b["C"].as_f64().unwrap(), 16.0);
    assert!((b["upper_closed"].as_f64().unwrap() - 4.442 * (-2.0f64).exp()).abs() < 1e-15);
    assert!(b["lower_dominant"].as_f64().unwrap() < 1e-200);
    assert!(b["lower_plancherel"].as_f64().unwrap() >= b["lower_dominant"].as_f64().unwrap() - 1e-12);
}

#[test]
fn bounds_at_sixty_degrees() {
    let b = json(&["bounds", "--theta", "60", "--degrees", "--k", "2"]);
    assert_valid("bounds.schema.json", &b);
    assert!((b["lower_dominant"].as_f64().unwrap() - 3f64.sqrt() / 16.0).abs() < 1e-15);
    assert!(b["upper_series"].is_null());
    let radians = json(&["bounds", "--theta", &theta_arg(PI / 3.0), "--k", "2"]);
    assert_eq!(b, radians);
}

#[test]
fn bounds_csv_has_fixed_header() {
    let csv = ok_stdout(&["bounds", "--theta", "1", "--k", "5", "--csv"]);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "theta,k,C,upper_series,upper_closed,lower_dominant,lower_plancherel"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 7);
    assert_eq!(row[0], "1.0000000000000000e0");
    assert!(lines.next().is_none());
}

#[test]
fn argument_errors_exit_2() {
    for args in [
        vec!["bounds", "--theta", "4", "--k", "3"],
        vec!["bounds", "--theta", "1", "--k", "1"],
        vec!["bounds", "--theta", "0", "--k", "3"],
        vec!["bounds", "--k", "3"],
        vec!["exact", "--theta", "1", "--k", "1"],
        vec!["simulate", "--theta", "1", "--k", "2", "--formulation", "teleport"],
        vec!["simulate", "--theta", "1", "--k", "2", "--json"],
        vec!["curve", "--theta", "1", "--k-min", "5", "--k-max", "3"],
        vec!["verify", "--profile", "medium"],
        vec!["bounds", "--theta", "1", "--k", "3", "--threads", "0"],
        vec!["frobnicate"],
    ] {
        let out = spheremix(&args);
        assert_eq!(code(&out), 2, "{args:?}");
    }
}

#[test]
fn exact_output_and_determinism() {
    let t = theta_arg(FRAC_PI_2);
    let args = ["exact", "--theta", t.as_str(), "--k", "2"];
    let first = ok_stdout(&args);
    let second = ok_stdout(&args);
    assert_eq!(first, second);
    let v: Value = serde_json::from_str(&first).unwrap();
    assert_valid("exact.schema.json", &v);
    for field in ["value", "argmax_gamma", "argmax_r", "uncertainty"] {
        assert!(v[field].is_number(), "{field}");
    }
    let b = json(&["bounds", "--theta", &t, "--k", "2"]);
    let value = v["value"].as_f64().unwrap();
    let unc = v["uncertainty"].as_f64().unwrap();
    assert!(b["lower_plancherel"].as_f64().unwrap() <= value + unc);
}

#[test]
fn exact_sits_between_emitted_bounds() {
    for (theta, k) in [("1", "3"), ("1", "7"), ("2.2", "12")] {
        let v = json(&["exact", "--theta", theta, "--k", k]);
        let b = json(&["bounds", "--theta", theta, "--k", k]);
        let value = v["value"].as_f64().unwrap();
        let unc = v["uncertainty"].as_f64().unwrap();
        assert!(b["lower_plancherel"].as_f64().unwrap() <= value + unc);
        assert!(value <= b["upper_series"].as_f64().unwrap() + 1e-9);
    }
}

#[test]
fn exact_truncation_failure_exits_3() {
    let out = spheremix(&["exact", "--theta", "0.05", "--k", "4", "--n-gamma", "8", "--n-r", "8"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("truncation"));
}

#[test]
fn simulate_point_mass() {
    let csv = ok_stdout(&["simulate", "--theta", "1", "--k", "0", "--samples", "10"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "trajectory,cos_polar");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    for (i, row) in rows.iter().enumerate() {
        let (idx, c) = row.split_once(',').unwrap();
        assert_eq!(idx.parse::<usize>().unwrap(), i);
        assert_eq!(c.parse::<f64>().unwrap(), 1.0);
    }
}

#[test]
fn simulate_one_step_lands_on_the_circle() {
    for f in ["drunkard", "potted_plant", "rotate_spin", "bi_invariant"] {
        let csv = ok_stdout(&[
            "simulate", "--theta", "1.2", "--k", "1", "--samples", "200", "--formulation", f, "--points",
        ]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "trajectory,cos_polar,x,y,z");
        for row in lines {
            let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
            // rotate_spin and bi_invariant start with a spin about the pole,
            // which leaves the first step at the same polar angle
            assert!((cols[1] - 1.2f64.cos()).abs() < 1e-12, "{f}: {row}");
            assert!((cols[4] - cols[1]).abs() < 1e-15);
        }
    }
}

#[test]
fn simulate_files_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let p = path.to_str().unwrap();
        let out = spheremix(&[
            "simulate", "--theta", "0.8", "--k", "7", "--samples", "500", "--seed", "99", "--formulation",
            "potted_plant", "--out", p,
        ]);
        assert_eq!(code(&out), 0);
        assert!(out.stdout.is_empty());
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());

    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    assert_valid("manifest.schema.json", &manifest);
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["seed"], 99);
    assert_eq!(manifest["output_bytes"].as_u64().unwrap() as usize, bytes.len());
    let other: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("b.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["output_sha256"], other["output_sha256"]);

    // the recorded argument list reproduces the file
    let c = dir.path().join("c.csv");
    let mut args: Vec<String> = manifest["args"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    args.push("--out".into());
    args.push(c.to_str().unwrap().into());
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    assert_eq!(code(&spheremix(&refs)), 0);
    assert_eq!(std::fs::read(&c).unwrap(), bytes);
}

#[test]
fn manifests_for_json_outputs_reproduce() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exact.json");
    let p = out.to_str().unwrap();
    assert_eq!(code(&spheremix(&["exact", "--theta", "50", "--degrees", "--k", "6", "--n-r", "64", "--out", p])), 0);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_valid("exact.schema.json", &doc);
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("exact.json.manifest.json")).unwrap()).unwrap();
    assert_valid("manifest.schema.json", &manifest);
    let mut args: Vec<String> = manifest["args"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert!(!args.contains(&"--degrees".to_string()));
    let again = dir.path().join("again.json");
    args.push("--out".into());
    args.push(again.to_str().unwrap().into());
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    assert_eq!(code(&spheremix(&refs)), 0);
    assert_eq!(std::fs::read(&again).unwrap(), std::fs::read(&out).unwrap());
}

#[test]
fn unwritable_output_exits_4() {
    let out = spheremix(&["simulate", "--theta", "1", "--k", "2", "--samples", "10", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn thread_count_does_not_change_output() {
    let sim = ["simulate", "--theta", "1.1", "--k", "9", "--samples", "3000", "--seed", "5", "--points"];
    let one = ok_stdout(&[&sim[..], &["--threads", "1"]].concat());
    let eight = ok_stdout(&[&sim[..], &["--threads", "8"]].concat());
    assert_eq!(one, eight);
    let env = Command::new(env!("CARGO_BIN_EXE_spheremix"))
        .args(sim)
        .env("SPHEREMIX_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(env.stdout).unwrap(), one);

    let exact = ["exact", "--theta", "0.9", "--k", "5"];
    assert_eq!(
        ok_stdout(&[&exact[..], &["--threads", "1"]].concat()),
        ok_stdout(&[&exact[..], &["--threads", "8"]].concat())
    );
}

#[test]
fn curve_csv_layout_and_sandwich() {
    let csv = ok_stdout(&["curve", "--theta", "1", "--k-min", "2", "--k-max", "10"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "k,lower_plancherel,exact,upper_series,upper_closed");
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 9);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), 5);
        assert_eq!(row[0], (i + 2).to_string());
        // 17 significant digits in scientific notation
        for cell in &row[1..] {
            if cell != "inf" {
                let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
                assert_eq!(mantissa.replace('.', "").len(), 17, "{cell}");
            }
        }
    }
    assert_eq!(rows[0][3], "inf");

    let doc = json(&["curve", "--theta", "1", "--k-min", "2", "--k-max", "10", "--json"]);
    assert_valid("curve.schema.json", &doc);
    let rows = doc["rows"].as_array().unwrap();
    let mut prev: Option<(f64, f64)> = None;
    for row in rows {
        let exact = row["exact"].as_f64().unwrap();
        let unc = row["exact_uncertainty"].as_f64().unwrap();
        assert!(row["lower_plancherel"].as_f64().unwrap() <= exact + unc);
        if let Some(upper) = row["upper_series"].as_f64() {
            assert!(exact <= upper + 1e-9);
        }
        if let Some((p, pu)) = prev {
            assert!(exact <= p + pu + unc);
        }
        prev = Some((exact, unc));
    }
    assert!(rows[0]["upper_series"].is_null());
}

#[test]
fn curve_at_right_angle_has_positive_plancherel_column() {
    let t = theta_arg(FRAC_PI_2);
    let doc = json(&["curve", "--theta", &t, "--k-min", "2", "--k-max", "8", "--json"]);
    for row in doc["rows"].as_array().unwrap() {
        assert!(row["lower_plancherel"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn verify_quick_report() {
    let out = spheremix(&["verify", "--profile", "quick", "--json"]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_valid("verify.schema.json", &report);
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.len() >= 8);
    let all_passed = checks.iter().all(|c| c["passed"] == true);
    assert_eq!(code(&out), if all_passed { 0 } else { 1 });
    for c in checks {
        if c["id"] != 1 {
            assert_eq!(c["passed"], true, "{c}");
        }
    }
}
