use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn appell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_appell")).args(args).env_remove("APPELL_OUT_DIR").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn without_timestamp(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).lines().filter(|l| !l.contains("\"timestamp\"")).collect::<Vec<_>>().join("\n")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn terminating_f4_is_one() {
    let out = appell(&["f4", "eval", "--a", "1", "--b", "0", "--c", "2", "--d", "-1", "--x", "0.3", "--y", "0.2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["value"], 1.0);
    assert_eq!(v["in_domain"], true);
    assert_eq!(v["manifest"]["subcommand"], "f4 eval");
}

#[test]
fn exact_f4_prints_the_rational() {
    let out = appell(&["f4", "eval", "--a", "-1", "--b", "1", "--c", "2", "--d", "3", "--x", "1/2", "--y", "1/3", "--exact"]);
    assert_eq!(out.status.code(), Some(0));
    // 1 + (-1)(1)/2 * 1/2 + (-1)(1)/3 * 1/3
    assert_eq!(json(&out)["exact_value"], "23/36");
}

#[test]
fn exact_residual_of_a_family_member_passes() {
    let out = appell(&["verify", "pde", "--system", "eq1", "--family", "ellipse", "--exponent", "2", "--lambda", "1", "--exact"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["pass"], true);
}

#[test]
fn quartic_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.poly", "1 * x0^4 x1^0\n");
    let out = appell(&["verify", "pde", "--system", "eq1", "--potential-file", &bad]);
    assert_eq!(out.status.code(), Some(1));
    let exact = appell(&["verify", "pde", "--system", "eq1", "--potential-file", &bad, "--exact"]);
    assert_eq!(exact.status.code(), Some(1));
    assert_eq!(json(&exact)["residuals"][0]["exact_zero"], false);
}

#[test]
fn generated_text_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("curved.poly");
    let f = file.to_str().unwrap();
    let gen = appell(&["potential", "gen", "--family", "curved", "--exponent", "3", "--curvature", "-1", "--out", f]);
    assert_eq!(gen.status.code(), Some(0));
    assert_eq!(json(&gen)["laurent"], std::fs::read_to_string(&file).unwrap());
    let out = appell(&["verify", "pde", "--system", "sys10", "--curvature", "-1", "--potential-file", f, "--exact"]);
    assert_eq!(out.status.code(), Some(0));
    let wrong = appell(&["verify", "pde", "--system", "sys10", "--curvature", "1", "--potential-file", f, "--exact"]);
    assert_eq!(wrong.status.code(), Some(1));
}

#[test]
fn non_integer_closed_forms_pass_by_finite_differences() {
    for args in [
        &["--system", "eq1", "--family", "ellipse", "--exponent", "2.7", "--lambda", "3/2"][..],
        &["--system", "sys8", "--family", "jacobi", "--exponent", "0.3", "--axes", "7,3,2"][..],
        &["--system", "sys4", "--family", "ellipsoid3d", "--exponent", "-0.5"][..],
    ] {
        let mut argv = vec!["verify", "pde"];
        argv.extend_from_slice(args);
        argv.extend_from_slice(&["--random", "8", "--seed", "3"]);
        let out = appell(&argv);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stdout));
        assert_eq!(json(&out)["backend"], "finite-difference");
    }
}

#[test]
fn explicit_points_are_used_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write(dir.path(), "pts.csv", "# x,y\n0.3,0.5\n-0.4,0.2\n");
    let out = appell(&["verify", "pde", "--system", "eq1", "--family", "ellipse", "--exponent", "3", "--points", &pts]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["points"][1][0], -0.4);
    assert_eq!(v["manifest"]["seed"], Value::Null);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(appell(&["bogus"]).status.code(), Some(2));
    assert_eq!(appell(&["f4", "eval", "--a", "x"]).status.code(), Some(2));
    let missing = appell(&["potential", "gen", "--family", "ellipse"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("--exponent"));
    let degenerate = appell(&["potential", "gen", "--family", "jacobi", "--exponent", "2", "--axes", "3,3,2"]);
    assert_eq!(degenerate.status.code(), Some(2));
    let planar = appell(&["simulate", "--family", "jacobi", "--exponent", "2"]);
    assert_eq!(planar.status.code(), Some(2));
    assert_eq!(appell(&["--help"]).status.code(), Some(0));
}

#[test]
fn identical_arguments_give_identical_output() {
    let argv = ["bracket", "check", "--kind", "ki", "--n", "3", "--axes", "5,3,2", "--samples", "30", "--seed", "11"];
    let (a, b) = (appell(&argv), appell(&argv));
    assert_eq!(without_timestamp(&a), without_timestamp(&b));
    let other = appell(&["bracket", "check", "--kind", "ki", "--n", "3", "--axes", "5,3,2", "--samples", "30", "--seed", "12"]);
    assert_ne!(without_timestamp(&a), without_timestamp(&other));
    let argv = ["verify", "pde", "--system", "eq1", "--family", "ellipse", "--exponent", "0.3", "--random", "5", "--seed", "4"];
    assert_eq!(without_timestamp(&appell(&argv)), without_timestamp(&appell(&argv)));
}

#[test]
fn brackets_of_the_ellipsoid_integrals_vanish() {
    let out = appell(&["bracket", "check", "--kind", "ki", "--n", "4", "--axes", "7,4,2,1", "--samples", "50", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["exact_zero"], true);
    assert!(v["max_relative"].as_f64().unwrap() <= 1e-10);
    assert_eq!(v["pairs"].as_array().unwrap().len(), 10);
    assert_eq!(v["manifest"]["seed"], 1);
}

#[test]
fn simulation_writes_csv_and_report_into_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_appell"))
        .args(["simulate", "--family", "ellipse", "--exponent", "2", "--alpha", "0.05", "--bounces", "5", "--dt", "2e-3"])
        .env("APPELL_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["bounces"], 5);
    assert!(report["report"]["max_rel_drift_k1tilde"].as_f64().unwrap() < 1e-6);
    assert_eq!(report["manifest"]["params"]["A"], 3.0);
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "t,x,y,px,py,H,K1tilde");
    assert!(csv.lines().any(|l| l.starts_with("# timestamp: ")));
}

#[test]
fn explicit_paths_override_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("sub").join("t.csv");
    let out = appell(&["simulate", "--bounces", "3", "--out", traj.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(traj.exists());
    assert_eq!(json(&out)["report"]["k1_backend"], "none");
}

#[test]
fn calibration_reproduces_the_committed_conventions() {
    let out = appell(&["calibrate"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["reproduced"], true);
    assert_eq!(v["families"].as_array().unwrap().len(), 5);
}

#[test]
fn dispatch_runs_in_process() {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = appell_cli::dispatch(
        ["appell", "potential", "eval", "--family", "ellipse", "--exponent", "2", "--form", "laurent", "--at", "0.3,0.5"],
        &mut out,
        &mut err,
    );
    assert_eq!(code, 0);
    let v: Value = serde_json::from_slice(&out).unwrap();
    assert!((v["value"].as_f64().unwrap() - 14.56).abs() < 1e-12);
    assert!(err.is_empty());
}
