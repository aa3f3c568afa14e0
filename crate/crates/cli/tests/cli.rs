use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const TRIPLE: &str = r#"
f = "1"
g = "z"
m = 2
samples = 4
[domain.region]
kind = "disk"
radius = 1.0
"#;

const ESTIMATE: &str = r#"
f = "1"
g = "z/2"
m = 2
resolution = 60
[property]
bounded = 0.5
[domain.region]
kind = "disk"
radius = 1.0
"#;

const ENNEPER: &str = r#"
resolution = 60
step = 0.01
[surface]
class = "maxface"
f = "1"
g = "z"
base_point = [0.0, 0.0]
[surface.domain.region]
kind = "disk"
radius = 1.5
"#;

const CATENOID: &str = r#"
resolution = 40
cycles = [[[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]]
[surface]
class = "minimal"
f = "1/z^2"
g = "z"
base_point = [1.0, 0.0]
[surface.domain.region]
kind = "annulus"
center = [0.0, 0.0]
r_in = 0.5
r_out = 2.0
"#;

fn wlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wlab")).args(args).output().expect("run wlab")
}

fn config(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn out_dir(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

/// Checks that stdout is exactly the report path and parses the report.
fn report(o: &Output) -> (PathBuf, Value) {
    let stdout = String::from_utf8(o.stdout.clone()).unwrap();
    let path = PathBuf::from(stdout.trim_end());
    assert_eq!(stdout.lines().count(), 1, "stdout: {stdout}");
    let v = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    (path, v)
}

fn error(o: &Output) -> Value {
    assert!(o.stdout.is_empty());
    let stderr = String::from_utf8(o.stderr.clone()).unwrap();
    let v: Value = serde_json::from_str(stderr.trim()).unwrap_or_else(|_| panic!("not JSON: {stderr}"));
    v["error"].clone()
}

#[test]
fn triple_check_reports_curvature_at_the_center() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "t.toml", TRIPLE);
    let o = wlab(&["triple", "check", &cfg, "--out", &out_dir(&dir, "run")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, r) = report(&o);
    assert_eq!(r["verdict"], "pass");
    assert_eq!(r["command"], "triple check");
    let first = &r["result"]["points"][0];
    assert_eq!(first["z"], serde_json::json!([0.0, 0.0]));
    assert!((first["curvature"].as_f64().unwrap() + 4.0).abs() < 1e-12);
    assert_eq!(r["result"]["points"].as_array().unwrap().len(), 5);
    assert_eq!(r["provenance"]["tool"], "wlab");
    assert_eq!(r["provenance"]["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn bounded_override_gives_constant_sixteen() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "e.toml", ESTIMATE);
    let run = out_dir(&dir, "run");
    let o = wlab(&["estimate", "verify", &cfg, "--bounded", "1", "--out", &run]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, r) = report(&o);
    assert_eq!(r["config"]["property"]["bounded"], 1.0);
    assert_eq!(r["result"]["c_squared"].as_f64(), Some(16.0));
    assert_eq!(r["verdict"], "pass");
    for f in ["nodes.csv", "edges.csv"] {
        assert!(Path::new(&run).join(f).is_file(), "{f}");
    }
}

#[test]
fn enneper_synthesis_writes_meshes_within_tolerance() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "s.toml", ENNEPER);
    let run = out_dir(&dir, "run");
    let o = wlab(&["surface", "synth", &cfg, "--class", "minimal", "--out", &run]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, r) = report(&o);
    assert_eq!(r["result"]["class"], "minimal");
    let inv = &r["result"]["invariants"];
    assert!(inv["gauss_normal"]["max_angle"].as_f64().unwrap() <= 1e-3);
    for k in ["conformality", "laplacian", "metric", "orthogonality"] {
        let x = inv["immersion"][k].as_f64().unwrap();
        assert!(x <= 1e-3, "{k} = {x}");
    }
    assert!(inv["immersion"]["vertices_checked"].as_u64().unwrap() > 0);
    let obj = std::fs::read_to_string(Path::new(&run).join("mesh.obj")).unwrap();
    assert!(obj.lines().any(|l| l.starts_with("v ")));
    assert!(obj.lines().any(|l| l.starts_with("f ")));
    for f in ["mesh.ply", "nodes.csv", "edges.csv"] {
        assert!(Path::new(&run).join(f).is_file(), "{f}");
    }
    assert!(r["result"]["periods"].is_array());
    assert!(r["result"]["singular_locus"].is_array());
}

#[test]
fn same_config_gives_identical_reports() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "t.toml", TRIPLE);
    let a = wlab(&["triple", "curvature", &cfg, "--seed", "11", "--out", &out_dir(&dir, "a")]);
    let b = wlab(&["triple", "curvature", &cfg, "--seed", "11", "--out", &out_dir(&dir, "b")]);
    let c = wlab(&["triple", "curvature", &cfg, "--seed", "12", "--out", &out_dir(&dir, "c")]);
    let read = |o: &Output| std::fs::read(report(o).0).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn default_run_directory_is_keyed_by_config_hash() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "t.toml", TRIPLE);
    let o = Command::new(env!("CARGO_BIN_EXE_wlab"))
        .args(["triple", "check", &cfg])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let rel = stdout.trim_end();
    let r: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join(rel)).unwrap()).unwrap();
    let hash = r["provenance"]["config_sha256"].as_str().unwrap();
    assert_eq!(rel, format!("wlab-runs/triple-check-{}/report.json", &hash[..12]));
}

#[test]
fn schema_violation_exits_one_with_a_pointer() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "t.toml", &TRIPLE.replace("m = 2", "m = \"two\""));
    let o = wlab(&["triple", "check", &cfg, "--out", &out_dir(&dir, "run")]);
    assert_eq!(o.status.code(), Some(1));
    let e = error(&o);
    assert_eq!(e["kind"], "config_schema");
    assert_eq!(e["pointer"], "/m");

    let cfg = config(&dir, "s.toml", &ENNEPER.replace("radius = 1.5", "radius = -1.5"));
    let e = error(&wlab(&["surface", "synth", &cfg, "--out", &out_dir(&dir, "run2")]));
    assert!(e["pointer"].as_str().unwrap().starts_with("/surface"), "{e}");
}

#[test]
fn operational_failures_are_json() {
    let dir = TempDir::new().unwrap();
    let e = error(&wlab(&["triple", "check", &out_dir(&dir, "missing.toml")]));
    assert_eq!(e["kind"], "io");
    let e = error(&wlab(&["triple", "frobnicate"]));
    assert_eq!(e["kind"], "usage");
    let cfg = config(&dir, "bad.toml", "f = ");
    let e = error(&wlab(&["triple", "check", &cfg]));
    assert_eq!(e["kind"], "config_syntax");
}

#[test]
fn help_exits_zero() {
    let o = wlab(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("surface"));
}

#[test]
fn coarse_catenoid_fails_the_tolerance_with_exit_two() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "c.toml", CATENOID);
    let o = wlab(&["surface", "synth", &cfg, "--out", &out_dir(&dir, "run")]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, r) = report(&o);
    assert_eq!(r["verdict"], "fail");
    assert!(r["result"]["periods"][0]["norm"].as_f64().unwrap() <= 1e-8);
    assert!(r["result"]["seam"]["max_mismatch"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn optimal_example_passes_and_probes() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "o.toml", "m = 1\nalphas = [[1.0, 0.0], [-1.0, 0.0]]\nresolution = 60\n");
    let o = wlab(&["example", "optimal", &cfg, "--out", &out_dir(&dir, "run")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, r) = report(&o);
    assert_eq!(r["result"]["census"]["omitted_count"], 3);
    assert_eq!(r["result"]["completeness"].as_array().unwrap().len(), 3);
}

#[test]
fn probes_run() {
    let dir = TempDir::new().unwrap();
    let runs: [(&str, &str); 3] = [
        ("marty", "family = \"{n}*z\"\nindices = [1, 2, 4, 8, 16]\nradius = 0.5\ngrid = 60\n"),
        ("zalcman", "h = \"exp(z)\"\n"),
        ("fujimoto", "f = \"exp(z)\"\nvalues = [0.0, \"inf\", -1.0]\neta = 0.1\nradius = 1.0\nresolution = 30\n"),
    ];
    for (probe, text) in runs {
        let cfg = config(&dir, &format!("{probe}.toml"), text);
        let o = wlab(&["probe", probe, &cfg, "--out", &out_dir(&dir, probe)]);
        assert_eq!(o.status.code(), Some(0), "{probe}: {}", String::from_utf8_lossy(&o.stderr));
        report(&o);
    }
    let zalcman = std::fs::read_to_string(dir.path().join("zalcman/report.json")).unwrap();
    let r: Value = serde_json::from_str(&zalcman).unwrap();
    assert!((r["result"]["gradient_at_zero"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn shipped_configs_run() {
    let dir = TempDir::new().unwrap();
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let runs = [
        ("triple", "check", "triple"),
        ("triple", "curvature", "triple"),
        ("estimate", "verify", "estimate"),
        ("surface", "synth", "enneper"),
        ("surface", "synth", "catenoid"),
        ("surface", "periods", "catenoid"),
        ("surface", "singular", "maxface"),
        ("probe", "marty", "marty"),
        ("probe", "zalcman", "zalcman"),
        ("probe", "fujimoto", "fujimoto"),
        ("probe", "completeness", "completeness"),
        ("example", "optimal", "optimal"),
    ];
    for (group, action, name) in runs {
        let cfg = configs.join(format!("{name}.toml"));
        let run = out_dir(&dir, &format!("{group}-{action}-{name}"));
        let o = wlab(&[group, action, cfg.to_str().unwrap(), "--out", &run]);
        assert_eq!(o.status.code(), Some(0), "{group} {action} {name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}
