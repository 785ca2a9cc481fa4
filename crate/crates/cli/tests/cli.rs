use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str], config: &str) -> (Output, PathBuf) {
    let cfg = dir.join("config.toml");
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let output = Command::new(env!("CARGO_BIN_EXE_parasplit"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    (output, out)
}

fn error_record(output: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&output.stderr);
    let line = stderr.lines().last().expect("error record on stderr");
    serde_json::from_str(line).unwrap()
}

fn manifest(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

const TWO_TRIANGLES: &str = "OFF\n4 2 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n3 0 1 2\n3 0 2 3\n";

#[test]
fn mesh_gen_writes_mesh_and_counts() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run(
        dir.path(),
        &["mesh-gen", "--seed", "3"],
        "[mesh]\nnoise = 0.01\ngenerator = { kind = \"icosphere\", level = 1 }\n",
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["command"], "mesh-gen");
    assert_eq!(m["seed"], 3);
    assert_eq!(m["outputs"]["vertices"], 42);
    assert_eq!(m["outputs"]["faces"], 80);
    assert!(out.join("mesh.off").is_file());
}

#[test]
fn mesh_noise_is_seeded() {
    let cfg = "[mesh]\nnoise = 0.01\ngenerator = { kind = \"icosphere\", level = 1 }\n";
    let read = |seed: &str| {
        let dir = TempDir::new().unwrap();
        let (o, out) = run(dir.path(), &["mesh-gen", "--seed", seed], cfg);
        assert!(o.status.success());
        std::fs::read_to_string(out.join("mesh.off")).unwrap()
    };
    assert_eq!(read("7"), read("7"));
    assert_ne!(read("7"), read("8"));
}

#[test]
fn evolve_on_a_mesh_file() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("square.off"), TWO_TRIANGLES).unwrap();
    let cfg = r#"
[mesh]
file = "square.off"

[pde]
kind = "fokker_planck"
epsilon = 0.1

[initial]
type = "gaussian"
centre = [0.5, 0.5, 0.0]
sigma = 0.3

[time]
h = 0.01
steps = 1
"#;
    let (o, out) = run(dir.path(), &["evolve"], cfg);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("mesh.off").is_file());
    assert!(out.join("manifest.json").is_file());
}

#[test]
fn missing_mesh_file_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"
[mesh]
file = "nowhere.off"

[pde]
kind = "fokker_planck"
epsilon = 0.1

[initial]
type = "constant"
value = 1.0

[time]
h = 0.01
steps = 1
"#;
    let (o, out) = run(dir.path(), &["evolve"], cfg);
    assert_eq!(o.status.code(), Some(2));
    let r = error_record(&o);
    assert_eq!(r["command"], "evolve");
    assert_eq!(r["error"], "validation");
    assert_eq!(r["exit_code"], 2);
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn a_single_halving_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"
[mesh.generator]
kind = "icosphere"
level = 1

[pde]
kind = "fokker_planck"
epsilon = 0.01

[initial]
type = "bump"
centre = 0
time = 0.1

[convergence]
h0 = 0.1
t_final = 0.2
halvings = 1
"#;
    let (o, out) = run(dir.path(), &["converge-time"], cfg);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn unknown_fields_are_rejected() {
    let dir = TempDir::new().unwrap();
    let (o, _) = run(
        dir.path(),
        &["mesh-gen"],
        "[mesh]\ngenerator = { kind = \"icosphere\", level = 1 }\ncolour = \"red\"\n",
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(error_record(&o)["message"].as_str().unwrap().contains("colour"));
}

#[test]
fn zero_threads_are_rejected() {
    let dir = TempDir::new().unwrap();
    let (o, _) = run(
        dir.path(),
        &["mesh-gen", "--threads", "0"],
        "[mesh]\ngenerator = { kind = \"icosphere\", level = 1 }\n",
    );
    assert_eq!(o.status.code(), Some(2));
}

fn line_barycenter(mode: &str, iters: usize) -> String {
    format!(
        r#"
[mesh.generator]
kind = "unit_line"
n = 1000

[sinkhorn]
gamma = 1e-7
max_iters = {iters}
mode = "{mode}"

[[inputs]]
type = "gaussian"
centre = [0.25, 0.0, 0.0]
sigma = 0.02

[[inputs]]
type = "gaussian"
centre = [0.75, 0.0, 0.0]
sigma = 0.02
"#
    )
}

#[test]
fn linear_barycenter_underflows_at_small_gamma() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run(dir.path(), &["barycenter"], &line_barycenter("linear", 10));
    assert_eq!(o.status.code(), Some(4));
    let r = error_record(&o);
    assert_eq!(r["error"], "underflow");
    let on_disk: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("error.json")).unwrap()).unwrap();
    assert_eq!(on_disk, r);
}

#[test]
fn log_domain_barycenter_runs() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run(dir.path(), &["barycenter"], &line_barycenter("log_domain", 2));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["outputs"]["iterations"], 2);
    assert!(out.join("barycenter.txt").is_file());
    assert!(out.join("residuals.csv").is_file());
}

#[test]
fn interpolate_writes_one_frame_per_time() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"
times = [0.0, 0.25, 0.5, 0.75, 1.0]

[mesh.generator]
kind = "icosphere"
level = 2

[sinkhorn]
gamma = 1e-2
max_iters = 5

[from]
type = "bump"
centre = [0.0, 0.0, 1.0]
time = 1e-2

[to]
type = "bump"
centre = [1.0, 0.0, 0.0]
time = 1e-2
"#;
    let (o, out) = run(dir.path(), &["interpolate"], cfg);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for k in 0..5 {
        assert!(out.join(format!("interp_{k:03}.txt")).is_file());
    }
    assert_eq!(manifest(&out)["outputs"]["frames"].as_array().unwrap().len(), 5);
}

#[test]
fn compare_grid_with_no_steps() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run(dir.path(), &["compare-grid"], "[compare]\nn = 20\nsteps = 0\n");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("compare.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn compare_grid_short_run() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run(
        dir.path(),
        &["compare-grid"],
        "[compare]\nn = 20\nh = 0.01\nsteps = 2\nboundary_strip = 2\n",
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("compare.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert_eq!(manifest(&out)["outputs"]["rows"], 2);
}

#[test]
fn converge_space_on_two_levels() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"
[pde]
kind = "fokker_planck"
epsilon = 0.01

[initial]
type = "bump"
centre = [0.0, 0.0, 1.0]
time = 0.2

[ladder]
meshes = [
  { generator = { kind = "icosphere", level = 1 } },
  { generator = { kind = "icosphere", level = 2 } },
]
"#;
    let (o, out) = run(dir.path(), &["converge-space"], cfg);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("convergence.csv").is_file());
    assert!(String::from_utf8_lossy(&o.stdout).contains("l_max"));
}

#[test]
fn missing_config_is_a_validation_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_parasplit"))
        .args(["mesh-gen", "--out"])
        .arg(TempDir::new().unwrap().path().join("out"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
