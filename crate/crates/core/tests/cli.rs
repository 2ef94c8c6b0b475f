use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qmoment(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmoment")).args(args).output().expect("binary runs")
}

fn json_report(args: &[&str], dir: &Path, name: &str) -> Value {
    let path = dir.join(name);
    let mut all: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap();
    all.extend(["--out", p]);
    let out = qmoment(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

fn as_f64(v: &Value) -> f64 {
    v.as_str().expect("numbers are strings").parse().unwrap()
}

fn all_leaves_are_strings(v: &Value) -> bool {
    match v {
        Value::String(_) | Value::Null => true,
        Value::Array(a) => a.iter().all(all_leaves_are_strings),
        Value::Object(o) => o.values().all(all_leaves_are_strings),
        _ => false,
    }
}

#[test]
fn moments_csv_has_header_and_small_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    let out = qmoment(&["moments", "--horizon", "10", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,s2n_direct,s2n_closed_form,relative_gap,exponent");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 11);
    for r in &rows {
        assert_eq!(r.len(), 5);
        assert!(r[3].parse::<f64>().unwrap() < 1e-20);
    }
    assert_eq!(rows[3][4], "-6");
}

#[test]
fn invalid_q_fails_with_one_line() {
    let out = qmoment(&["moments", "--q", "1.2"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error[invalid-parameter]: "));
}

#[test]
fn bad_flag_is_a_usage_error() {
    let out = qmoment(&["criteria", "--format", "xml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error[usage]: "));
}

#[test]
fn criteria_p3_and_p2() {
    let dir = tempfile::tempdir().unwrap();
    let r = json_report(&["criteria"], dir.path(), "p3.json");
    assert!(all_leaves_are_strings(&r));
    assert_eq!(r["results"]["q_criterion"]["verdict"], "satisfied");
    assert_eq!(r["results"]["carleman"]["verdict"], "not_satisfied");
    assert_eq!(r["results"]["implication_chain"]["consistent"], "true");
    assert_eq!(r["results"]["q_criterion"]["test_values"].as_array().unwrap().len(), 60);

    let r = json_report(&["criteria", "--p", "2"], dir.path(), "p2.json");
    assert_eq!(r["results"]["q_criterion"]["verdict"], "not_satisfied");
    let vals = r["results"]["q_criterion"]["test_values"].as_array().unwrap();
    // tends to q^{-v/2} = 1 at v = 0
    assert!((as_f64(vals.last().unwrap()) - 1.0).abs() < 0.02);
}

#[test]
fn criteria_constant_toy() {
    let dir = tempfile::tempdir().unwrap();
    let r = json_report(&["criteria", "--toy", "constant"], dir.path(), "toy.json");
    for c in ["perron", "riesz", "carleman"] {
        assert_eq!(r["results"][c]["verdict"], "satisfied", "{c}");
    }
    assert_eq!(r["results"]["exact_exponents"], Value::Null);
}

#[test]
fn reproduce_p3_verdicts_do_not_depend_on_q() {
    let dir = tempfile::tempdir().unwrap();
    for (q, name) in [("0.5", "a.json"), ("0.9", "b.json")] {
        let r = json_report(&["reproduce-p3", "--q", q], dir.path(), name);
        let res = &r["results"];
        assert_eq!(res["verdicts"]["q_criterion"], "determinate (q_criterion)");
        assert_eq!(res["verdicts"]["carleman"], "not_satisfied");
        assert_eq!(res["exact_exponents"]["e_6"], "0");
        assert_eq!(res["exact_exponents"]["e_12"], "1/2");
        assert_eq!(res["exact_exponents"]["subsequence_holds"], "true");
        assert_eq!(res["ramanujan"]["converged"], "true");
        assert!(as_f64(&res["ramanujan"]["relative_error"]) < 1e-25);
        assert!(as_f64(&res["gram"]["max_identity_deviation"]) < 1e-15);
        assert_eq!(r["config"]["p"], "3");
    }
}

#[test]
fn reproduce_p3_forces_p() {
    let dir = tempfile::tempdir().unwrap();
    let r = json_report(&["reproduce-p3", "--p", "2"], dir.path(), "p.json");
    assert_eq!(r["config"]["p"], "3");
}

#[test]
fn fourier_check_reports() {
    let dir = tempfile::tempdir().unwrap();
    let r = json_report(&["fourier-check"], dir.path(), "f.json");
    assert_eq!(r["config"]["k_min"], "-8");
    assert_eq!(r["results"]["kernel_dim"], "17");
    assert!(as_f64(&r["results"]["smallest_singular_value"]) > 0.0);
    assert!(as_f64(&r["results"]["involution_residual_calibrated"]) < 1e-10);

    let r = json_report(&["fourier-check", "--kmin", "0", "--kmax", "0"], dir.path(), "one.json");
    assert_eq!(r["results"]["kernel_dim"], "1");
    assert!(as_f64(&r["results"]["smallest_singular_value"]) > 0.0);
}

#[test]
fn json_carries_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let r = json_report(&["moments", "--horizon", "8", "--precision", "512"], dir.path(), "p.json");
    let s = r["results"]["moments"][0]["s2n_closed_form"].as_str().unwrap();
    let digits = s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).count();
    assert!(digits >= 150, "{s}");
}

#[test]
fn stdout_when_no_out() {
    let out = qmoment(&["fourier-check", "--kmin", "-2", "--kmax", "2", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("kernel_dim,"));
    assert_eq!(text.lines().count(), 2);
}
