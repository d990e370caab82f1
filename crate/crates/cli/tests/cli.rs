use std::path::Path;
use std::process::{Command, Output};

fn gdblow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gdblow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn remark1_is_smooth() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = gdblow(&["classify", "preset:remark1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&out);
    assert_eq!(r["verdict"]["smooth"], true);
    assert!(r["verdict"]["predicted_t"].is_null());
    assert!(r.get("generated_unix").is_none());
}

#[test]
fn linear_compression_blows_up_at_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lc.json");
    let o = gdblow(&["classify", "preset:linear-compression", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let t = json(&out)["verdict"]["predicted_t"].as_f64().unwrap();
    assert!((t - 1.0).abs() < 1e-6, "{t}");
    assert!(stdout(&o).contains("smooth=false"));
}

#[test]
fn report_goes_to_stdout_without_out() {
    let o = gdblow(&["classify", "preset:constant"]);
    assert_eq!(code(&o), 0);
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["command"], "classify");
}

#[test]
fn malformed_expression_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        "gamma = 1.4\n[domain]\na = -1.0\nb = 1.0\n[profile]\nv0 = \"sin(x\"\nrho0 = \"1\"\np0 = \"1\"\n",
    )
    .unwrap();
    let o = gdblow(&["classify", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let e = stderr(&o);
    assert!(e.starts_with("error: profile error:"), "{e}");
    assert!(e.contains("v0") && e.contains("byte 5"), "{e}");
}

#[test]
fn input_errors_exit_one() {
    assert_eq!(code(&gdblow(&["classify", "preset:nope"])), 1);
    assert_eq!(code(&gdblow(&["classify", "/does/not/exist.toml"])), 1);
    assert_eq!(code(&gdblow(&["ode", "--r1", "1"])), 1);
    assert_eq!(code(&gdblow(&["ode", "--r1", "1", "--r2", "0", "--tol", "-1"])), 1);
    assert_eq!(code(&gdblow(&["frobnicate"])), 1);
    assert_eq!(code(&gdblow(&["--help"])), 0);
    assert_eq!(code(&gdblow(&["--version"])), 0);
}

#[test]
fn ode_riccati_and_closed_orbit() {
    let o = gdblow(&["ode", "--r1", "-1", "--r2", "0"]);
    assert_eq!(code(&o), 2);
    let line = stdout(&o);
    assert!(line.starts_with("outcome=blowup T=0.99999999"), "{line}");

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let o = gdblow(&["ode", "--r1", "1", "--r2", "0.5", "--b", "0.5", "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let line = stdout(&o);
    assert!(line.contains("outcome=bounded") && line.contains("closed_curve=true"), "{line}");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,R1,R2,C\n"));
    assert!(text.lines().count() > 10);
}

#[test]
fn portrait_writes_one_polyline_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("p.csv");
    let o = gdblow(&["portrait", "--b", "-0.5", "--seeds", "circle:8:1", "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("curves=8 "));
    let mut rd = csv::Reader::from_path(&csv).unwrap();
    let curves: std::collections::BTreeSet<String> = rd.records().map(|r| r.unwrap()[0].to_string()).collect();
    assert_eq!(curves.len(), 8);
}

#[test]
fn pde_constant_state_writes_series() {
    let dir = tempfile::tempdir().unwrap();
    let o = gdblow(&["pde", "preset:constant", "--t-end", "0.5", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("bounded gradients"));
    let hist = std::fs::read_to_string(dir.path().join("gradient_history.csv")).unwrap();
    assert!(hist.starts_with("t,dvdx_max,dpdx_max,x_argmax\n"));
    let snap = std::fs::read_to_string(dir.path().join("snapshot_000.csv")).unwrap();
    assert_eq!(snap.lines().count(), 129);
}

#[test]
fn pde_rejects_isothermal() {
    let o = gdblow(&["pde", "preset:isothermal-demo"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("gamma > 1"));
}

#[test]
fn xval_linear_compression_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let o = gdblow(&["xval", "preset:linear-compression", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let r = json(&out);
    assert_eq!(r["cross_validation"]["status"], "consistent");
    assert_eq!(r["pde"]["levels"].as_array().unwrap().len(), 3);
}

#[test]
fn xval_flags_a_wrong_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let o = gdblow(&[
        "xval",
        "preset:linear-compression",
        "--predicted-t-override",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
    assert_eq!(json(&out)["cross_validation"]["status"], "discrepant");
}

#[test]
fn xval_without_pde_is_incomplete() {
    let o = gdblow(&["xval", "preset:chaplygin-demo"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        assert_eq!(code(&gdblow(&["classify", "preset:linear-compression", "--out", p.to_str().unwrap()])), 2);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let o = gdblow(&["classify", "preset:constant", "--timestamp"]);
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(r["generated_unix"].as_u64().unwrap() > 0);
}

#[test]
fn presets_are_listed() {
    let o = gdblow(&["presets"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).lines().any(|l| l == "remark1"));
}
