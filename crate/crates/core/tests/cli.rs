use std::process::{Command, Output};

fn mqds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mqds"))
        .args(args)
        .env_remove("MQDS_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn toy_spectrum_csv() {
    let o = mqds(&["spectrum", "--model", "damped_toy", "--max-n", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("n,re,im\n"));
    assert_eq!(rows(&text), vec![vec![0.0, 0.0, 0.5], vec![1.0, 0.0, 1.5], vec![2.0, 0.0, 2.5]]);
}

#[test]
fn damped_oscillator_spectrum() {
    let o = mqds(&["spectrum", "--model", "damped_ho", "--omega", "2", "--max-n", "0", "--max-m", "1"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert_eq!(r[1], vec![0.0, 1.0, 2.0, -2.0]);
}

#[test]
fn spectrum_json_echoes_parameters() {
    let o = mqds(&["spectrum", "--model", "harmonic_oscillator", "--hbar", "0.5", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["metadata"]["hbar"], 0.5);
    assert_eq!(v["metadata"]["model"], "harmonic_oscillator");
    assert_eq!(v["rows"][0]["re"], 0.25);
}

#[test]
fn oscillator_ground_state_grid() {
    let o = mqds(&["eigenfunction", "--model", "harmonic_oscillator"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("x,p,re,im\n"));
    let r = rows(&text);
    assert_eq!(r.len(), 65 * 65);
    let peak = r.iter().map(|row| row[2]).fold(f64::MIN, f64::max);
    assert!((peak - 1.0 / std::f64::consts::PI).abs() < 1e-15);
    let centre = r.iter().find(|row| row[0] == 0.0 && row[1] == 0.0).unwrap();
    assert_eq!(centre[2], peak);
}

#[test]
fn two_dof_grid_has_fixed_header_and_json_dump() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("g.csv");
    let o = mqds(&[
        "eigenfunction", "--model", "damped_ho", "--axis", "x1=-1:1:3", "--axis", "p2=-1:1:5",
        "--out", csv.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("x1,x2,p1,p2,re,im\n"));
    assert_eq!(text.lines().count(), 1 + 15);

    let o = mqds(&["eigenfunction", "--model", "damped_toy", "--n", "1", "--axis", "x=0:1:4", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["values"].as_array().unwrap().len(), 4);
    assert_eq!(v["spec"]["axes"][0]["points"], 4);
    assert_eq!(v["metadata"]["sign"], "+");
    assert_eq!(v["metadata"]["gamma"], 1.0);
}

#[test]
fn output_is_byte_stable() {
    let args = ["eigenfunction", "--model", "damped_toy", "--n", "3", "--axis", "x=-2:2:9", "--axis", "p=-2:2:9"];
    assert_eq!(mqds(&args).stdout, mqds(&args).stdout);
    let args = ["verify", "koopman_zero_mode", "conjugation_symmetry"];
    let a: serde_json::Value = serde_json::from_slice(&mqds(&args).stdout).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&mqds(&args).stdout).unwrap();
    let strip = |mut v: serde_json::Value| {
        for c in v["checks"].as_array_mut().unwrap() {
            c.as_object_mut().unwrap().remove("wall_time");
        }
        v
    };
    assert_eq!(strip(a), strip(b));
}

#[test]
fn verify_selected_checks_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = mqds(&["verify", "eigen_residual,normalization", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["summary"]["failed"], 0);
    let names: std::collections::BTreeSet<&str> =
        v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names.into_iter().collect::<Vec<_>>(), ["eigen_residual", "normalization"]);
}

#[test]
fn impossible_tolerance_fails_verification() {
    let o = mqds(&["verify", "koopman_zero_mode", "--tolerance", "koopman_zero_mode=1e-30"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL koopman_zero_mode"));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["summary"]["failed"].as_u64().unwrap() > 0);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(mqds(&["verify", "no_such_check"]).status.code(), Some(2));
    assert_eq!(mqds(&["spectrum", "--model", "toy", "--hbar", "-1"]).status.code(), Some(2));
    assert_eq!(mqds(&["eigenfunction", "--model", "toy", "--axis", "x=1:0:5"]).status.code(), Some(2));
    assert_eq!(mqds(&["eigenfunction", "--model", "toy", "--axis", "x1=0:1:5"]).status.code(), Some(2));
    let big = mqds(&["eigenfunction", "--model", "dho", "--axis", "x1=0:1:10000", "--axis", "x2=0:1:10000"]);
    assert_eq!(big.status.code(), Some(2));
    assert_eq!(mqds(&["spectrum", "--model", "dho", "--family", "W"]).status.code(), Some(2));
    assert_eq!(mqds(&["oracle", "--f", "Q7", "--g", "x"]).status.code(), Some(2));
    assert_eq!(mqds(&["bogus"]).status.code(), Some(2));
    assert_eq!(mqds(&["--help"]).status.code(), Some(0));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing").join("x.csv");
    let o = mqds(&["spectrum", "--model", "ho", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let o = mqds(&["oracle", "--f", "@/nonexistent/f.json", "--g", "x"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn oracle_agrees_on_oscillator_pair() {
    let o = mqds(&["oracle", "--f", "W1", "--g", "W1", "--point", "0.3,-0.2", "--point", "0,0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("x,p,closed_re,closed_im,oracle_re,oracle_im,abs_err,rel_err\n"));
    for row in rows(&text) {
        assert!(row[6] < 1e-9 * row[2].abs().max(1e-3), "{row:?}");
    }
}

#[test]
fn oracle_reads_function_files() {
    let dir = tempfile::tempdir().unwrap();
    let s = mqds::algebra::VarSpace::new(1, 1.0).unwrap();
    let w = mqds::models::oscillator_wigner(2, s).unwrap();
    let path = dir.path().join("w2.json");
    std::fs::write(&path, w.to_json()).unwrap();
    let spec = format!("@{}", path.display());
    let o = mqds(&["oracle", "--f", &spec, "--g", "W0", "--point", "0.5,0.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn oracle_refuses_non_decaying_factors() {
    assert_eq!(mqds(&["oracle", "--model", "damped_ho", "--f", "G00", "--g", "G00"]).status.code(), Some(4));
    assert_eq!(mqds(&["oracle", "--f", "x", "--g", "p", "--point", "1,1"]).status.code(), Some(4));
}
