use std::path::Path;
use std::process::{Command, Output};

fn orthospec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orthospec"))
        .args(args)
        .env_remove("ORTHOSPEC_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = orthospec(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

#[test]
fn golden_scalars() {
    assert_eq!(stdout(&["cusp-coeff", "--dimension", "3"]), "1.0\n");
    assert_eq!(stdout(&["bk-function", "--dimension", "3", "--length", "1"]), "1.966859\n");
}

#[test]
fn golden_spectrum_csv() {
    let csv = stdout(&["apollonian-spectrum", "--curvature-bound", "10", "--output", "csv"]);
    assert_eq!(
        csv,
        "inversive_distance_num,inversive_distance_den,length,multiplicity\n\
         7,1,2.6339157938496336,2\n\
         17,1,3.5254943480781717,6\n"
    );
}

#[test]
fn golden_bk_function_csv() {
    let csv = stdout(&["bk-function", "--dimension", "3", "--length", "0.5,2", "--output", "csv"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,ell,estimate,std_error,closed_form_if_available");
    assert_eq!(lines[1], "3,0.5,5.48500124058317,0,5.48500124058317");
    assert_eq!(lines.len(), 3);
}

#[test]
fn identity_check_report() {
    let v = json(&["identity-check", "--curvature-bound", "100"]);
    assert_eq!(v["schema"], "orthospec/1");
    assert_eq!(v["cusp_term"], 3.0);
    assert!(v["residual"].as_f64().unwrap() > 0.0);
    for key in ["target", "ortho_sum", "K_schedule"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let ks: Vec<u64> = v["K_schedule"].as_array().unwrap().iter().map(|p| p["curvature_bound"].as_u64().unwrap()).collect();
    assert_eq!(ks, [1, 10, 100]);
}

#[test]
fn spectrum_json_carries_exact_inversive_distances() {
    let v = json(&["apollonian-spectrum", "--curvature-bound", "10"]);
    assert_eq!(v["entries"][0]["inversive_distance"], serde_json::json!({ "num": "7", "den": "1" }));
    assert_eq!(v["entries"][0]["multiplicity"], 2);
}

#[test]
fn verify_lemmas_all_pass() {
    let csv = stdout(&["verify-lemmas"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("kind,n,d,closed,quadrature,abs_err,tol,pass"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 36 + 7 + 8);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
}

#[test]
fn plot_series_have_headers() {
    let f3 = stdout(&["plot-data", "--points", "4", "--max-length", "2"]);
    assert_eq!(f3.lines().next(), Some("ell,f3"));
    assert_eq!(f3.lines().count(), 5);
    let conv = stdout(&["plot-data", "--series", "convergence", "--curvature-bound", "100"]);
    assert_eq!(conv.lines().count(), 4);
    let hist = stdout(&["plot-data", "--series", "histogram", "--curvature-bound", "100"]);
    assert_eq!(hist.lines().next(), Some("lo,hi,count,mass"));
}

#[test]
fn monte_carlo_output_is_reproducible_and_worker_independent() {
    let args = ["measure-check", "--samples", "100000", "--seed", "5"];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    let mut two = args.to_vec();
    two.extend(["--workers", "2"]);
    assert_eq!(a, stdout(&two));
    let other = stdout(&["measure-check", "--samples", "100000", "--seed", "6"]);
    assert_ne!(a, other);
    let bk = ["bk-function", "--dimension", "4", "--length", "1", "--samples", "50000", "--output", "json"];
    assert_eq!(stdout(&bk), stdout(&bk));
}

#[test]
fn exit_codes() {
    assert_eq!(orthospec(&["cusp-coeff", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(orthospec(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(orthospec(&["cusp-coeff", "--dimension", "1"]).status.code(), Some(2));
    assert_eq!(orthospec(&["cusp-coeff"]).status.code(), Some(2));
    assert_eq!(orthospec(&["bk-function", "--dimension", "3", "--length", "-1"]).status.code(), Some(2));
    assert_eq!(orthospec(&["identity-check", "--curvature-bound", "0"]).status.code(), Some(2));
    assert_eq!(orthospec(&["plot-data", "--output", "json"]).status.code(), Some(2));
    assert_eq!(orthospec(&["--help"]).status.code(), Some(0));
}

#[test]
fn overcounting_strategy_fails_the_check() {
    let out = orthospec(&["identity-check", "--curvature-bound", "100", "--strategy", "translation-only"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["bound_satisfied"], false);
}

#[test]
fn out_file_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested").join("spectrum.csv");
    let p = path.to_str().unwrap();
    let out = orthospec(&["apollonian-spectrum", "--curvature-bound", "10", "--output", "csv", "--out", p]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("inversive_distance_num,"));
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("nested/spectrum.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "apollonian-spectrum");
    assert!(meta["started_unix"].as_f64().unwrap() > 0.0);
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_orthospec"))
        .args(["cusp-coeff", "--dimension", "3", "--out", "c.txt"])
        .env("ORTHOSPEC_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(dir.path().join("c.txt")).unwrap(), "1.0\n");
    assert!(Path::new(&dir.path().join("c.txt.meta.json")).exists());
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# shared\ndimension = 5\nsamples = 1000\ncurvature_bound = 10\n").unwrap();
    let c = cfg.to_str().unwrap();
    assert_eq!(stdout(&["--config", c, "cusp-coeff"]), "0.9166666666666665\n");
    assert_eq!(stdout(&["--config", c, "cusp-coeff", "--dimension", "3"]), "1.0\n");
    let v = json(&["apollonian-spectrum", "--config", c]);
    assert_eq!(v["curvature_bound"], 10);
    std::fs::write(&cfg, "dimension\n").unwrap();
    assert_eq!(orthospec(&["--config", c, "cusp-coeff"]).status.code(), Some(2));
}

#[test]
fn self_test_on_every_subcommand() {
    for sub in ["cusp-coeff", "bk-function", "verify-lemmas", "measure-check", "apollonian-spectrum", "identity-check", "plot-data"] {
        let out = stdout(&[sub, "--self-test"]);
        assert!(!out.is_empty() && out.lines().all(|l| l.starts_with("PASS ")), "{sub}: {out}");
    }
    let v = json(&["cusp-coeff", "--self-test", "--output", "json"]);
    assert!(v.as_array().unwrap().iter().all(|c| c["passed"] == true));
}
