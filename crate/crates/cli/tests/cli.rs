use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_consensus-spectra"))
        .args(args)
        .env("CONSENSUS_SPECTRA_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

#[test]
fn table_is_deterministic() {
    let args = ["table", "--family", "ring", "--family", "star", "--sizes", "33,65"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 3);
    let ring = text.lines().find(|l| l.starts_with("ring,65,65,metropolis")).unwrap();
    assert!(ring.contains(",true,"), "{ring}");
}

#[test]
fn table_marks_missing_reference() {
    let o = run(&["table", "--family", "butterfly", "--size", "3", "--format", "json"]);
    assert!(o.status.success());
    let rows = json(&o);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["note"].as_str().unwrap().starts_with("n/a")));
}

#[test]
fn bounds_ring_prefers_ds() {
    let o = run(&["bounds", "--family", "ring", "--size", "21", "--format", "json"]);
    assert!(o.status.success());
    let r = json(&o);
    assert_eq!(r["sound"], true);
    assert!(r["beta_ds"].as_f64().unwrap() < r["beta_b"].as_f64().unwrap());
}

#[test]
fn bounds_star_prefers_b() {
    let o = run(&["bounds", "--family", "star", "--size", "50", "--format", "json"]);
    assert!(o.status.success());
    let r = json(&o);
    assert!(r["beta_b"].as_f64().unwrap() < r["beta_ds"].as_f64().unwrap());
    assert!(r["eta_bound"].is_null());
}

#[test]
fn bounds_butterfly_with_dumps() {
    let m = scratch("butterfly_matrix.json");
    let s = scratch("butterfly_spectrum.json");
    let o = run(&[
        "bounds",
        "--family",
        "butterfly",
        "--size",
        "5",
        "--dump-matrix",
        m.to_str().unwrap(),
        "--dump-spectrum",
        s.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("graph,rule,n,lambda2"));
    assert!(lines.next().unwrap().ends_with(",true"));
    let dump: serde_json::Value = serde_json::from_str(&fs::read_to_string(m).unwrap()).unwrap();
    assert_eq!(dump["n"], 10);
    let spec: serde_json::Value = serde_json::from_str(&fs::read_to_string(s).unwrap()).unwrap();
    assert!(spec["lambda_n"].as_f64().unwrap() >= -1e-10);
}

#[test]
fn graph_file_and_parse_errors() {
    let good = scratch("path3.txt");
    fs::write(&good, "n 3\n1 2\n2 1\n2 3\n3 2\n").unwrap();
    let o = run(&["bounds", "--graph-file", good.to_str().unwrap(), "--rule", "metropolis"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let bad = scratch("bad.txt");
    fs::write(&bad, "n 3\n1 2\n2 x\n").unwrap();
    let o = run(&["bounds", "--graph-file", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.txt:3:"));
}

#[test]
fn schedule_file_bounds() {
    let g = scratch("sched_ring.txt");
    fs::write(&g, "n 5\n1 2\n2 1\n2 3\n3 2\n3 4\n4 3\n4 5\n5 4\n5 1\n1 5\n").unwrap();
    let s = scratch("sched.json");
    fs::write(&s, r#"{"kind": "periodic", "graphs": ["sched_ring.txt", "sched_ring.txt"], "period": 2}"#).unwrap();
    let o = run(&["bounds", "--schedule-file", s.to_str().unwrap(), "--rule", "metropolis", "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    let theorem = r["reversible"]["theorem"].as_f64().unwrap();
    assert!(theorem <= r["reversible"]["corollary"].as_f64().unwrap());
    assert!((r["small_variation"]["nu"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn simulate_two_star_is_slow() {
    let o = run(&["simulate", "--schedule", "ot-two-star", "--size", "12", "--steps", "100000", "--seed", "7"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let header: serde_json::Value = serde_json::from_str(text.lines().next().unwrap().trim_start_matches("# ")).unwrap();
    assert!(header["rho_hat"].as_f64().unwrap() >= 0.875);
    assert_eq!(text.lines().nth(1), Some("t,V,N"));
}

#[test]
fn simulate_consensus_start_converges_at_once() {
    let o = run(&["simulate", "--family", "ring", "--size", "7", "--x0", "consensus", "--format", "json"]);
    assert!(o.status.success());
    let t = json(&o);
    assert_eq!(t["converged"], true);
    assert_eq!(t["steps"], 0);
}

#[test]
fn simulate_eigenvector_start_decays_at_lambda2() {
    let o = run(&["simulate", "--family", "barbell", "--size", "3", "--x0", "eigenvector", "--steps", "300", "--format", "json"]);
    assert!(o.status.success());
    let t = json(&o);
    let b = run(&["bounds", "--family", "barbell", "--size", "3", "--format", "json"]);
    let l2 = json(&b)["exact_lambda2"].as_f64().unwrap();
    assert!((t["rate"]["rho"].as_f64().unwrap() - l2).abs() < 1e-6);
}

#[test]
fn out_flag_and_tolerance_overrides() {
    let p = scratch("table.csv");
    let o = run(&["table", "--family", "ring", "--size", "9", "--out", p.to_str().unwrap(), "--tol-override", "soundness=1e-8"]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(fs::read_to_string(&p).unwrap().starts_with("family,size"));

    let o = run(&["table", "--family", "ring", "--size", "9", "--tol-override", "bogus=1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_slow_examples_passes() {
    let o = run(&["verify", "slow_examples", "--format", "json"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let r = json(&o);
    assert!(r["failures"].as_array().unwrap().is_empty());
}

#[test]
fn invalid_family_size_is_an_error() {
    let o = run(&["bounds", "--family", "ring", "--size", "4"]);
    assert_eq!(o.status.code(), Some(2));
}
