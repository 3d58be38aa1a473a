use std::path::PathBuf;
use std::process::{Command, Output};

fn charflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_charflow")).args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("charflow-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn version() {
    let out = charflow(&["--version"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("charflow 0.1.0"));
}

#[test]
fn trace_csv() {
    let out = charflow(&["trace", "--field", "radial", "--start", "1,0", "--arclen", "0.1", "--step", "0.01"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("sigma,x,y,theta,H,kappa"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 11);
    let last = rows.last().unwrap();
    assert!((last[0] - 0.1).abs() < 1e-12);
    assert!((last[1].hypot(last[2]) - 1.0).abs() < 1e-9);
}

#[test]
fn exit_codes() {
    assert_eq!(charflow(&["verify", "nonsense", "--field", "radial"]).status.code(), Some(2));
    assert_eq!(charflow(&["trace", "--field", "no_such_field", "--start", "1,0"]).status.code(), Some(2));
    assert_eq!(charflow(&["trace", "--field", "bilinear", "--start", "0,0.3"]).status.code(), Some(2));
    assert_eq!(charflow(&["frobnicate"]).status.code(), Some(2));
    let failing = charflow(&["verify", "flux", "--field", "bilinear", "--tolerance", "flux.n=0"]);
    assert_eq!(failing.status.code(), Some(1));
    let io = charflow(&["trace", "--field", "radial", "--start", "1,0", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(io.status.code(), Some(3));
    assert_eq!(charflow(&["verify", "theorem-a", "--field", "radial"]).status.code(), Some(0));
}

#[test]
fn config_file_and_flags() {
    let cfg = scratch("run.conf");
    std::fs::write(&cfg, "# trace settings\nfield = radial\nstart = 1,0\narclen = 0.05\nstep = 0.01\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = charflow(&["--config", cfg, "trace"]);
    assert!(from_file.status.success());
    assert_eq!(String::from_utf8_lossy(&from_file.stdout).lines().count(), 7);
    let overridden = charflow(&["--config", cfg, "trace", "--arclen", "0.1"]);
    assert_eq!(String::from_utf8_lossy(&overridden.stdout).lines().count(), 12);

    let bad = scratch("bad.conf");
    std::fs::write(&bad, "feild = radial\n").unwrap();
    assert_eq!(charflow(&["--config", bad.to_str().unwrap(), "trace"]).status.code(), Some(2));
    let missing = scratch("missing.conf");
    assert_eq!(charflow(&["--config", missing.to_str().unwrap(), "trace"]).status.code(), Some(3));
}

#[test]
fn report_round_trip() {
    let out = scratch("flux.json");
    let status = charflow(&["flux", "--field", "bilinear", "--rect", "1,2,0,1", "--out", out.to_str().unwrap()]).status;
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let report = charflow::VerificationReport::from_json(&text).unwrap();
    assert!(report.passed());
    assert!(report.entry("flux.n").is_some() && report.entry("flux.dnperp").is_some());
}

#[test]
fn field_file() {
    let path = scratch("field.txt");
    std::fs::write(&path, "u = x*y\nF1 = -y\nF2 = x\n").unwrap();
    let p = path.to_str().unwrap();
    let out = charflow(&["trace", "--field", p, "--center", "1,0.5", "--start", "1,0.5", "--arclen", "0.2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let last = String::from_utf8(out.stdout).unwrap().lines().last().unwrap().to_string();
    let y: f64 = last.split(',').nth(2).unwrap().parse().unwrap();
    assert!((y - 0.5).abs() < 1e-9);
}

#[test]
fn catalog_list_json() {
    let out = charflow(&["catalog", "list"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = v.as_array().unwrap().iter().filter_map(|e| e["name"].as_str()).collect();
    for n in ["radial", "example32", "lipschitz_xy"] {
        assert!(names.contains(&n), "{names:?}");
    }
}
