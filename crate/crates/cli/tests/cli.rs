use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "l_X = [[-1.0, 1.0], [-1.0, 1.0]]
l_A = [[-0.1, 0.1], [-0.1, 0.1]]
mu = 5.0
M = 1.0
k_max = 10
seed = 0
field = \"linear\"
mesh_vertices = 150
data_count = 150
k_nearest = 20
";

fn roa(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roa"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn certified_record(dir: &Path) -> String {
    let cfg = write_config(dir, SMALL);
    let out = roa(&["run", "--config", &cfg, "--out", "rec.json"], dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    dir.join("rec.json").display().to_string()
}

#[test]
fn run_then_check_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let rec = certified_record(dir.path());
    let text = std::fs::read_to_string(&rec).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["verdict"], "CERTIFIED");
    let out = roa(&["check", &rec], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("PASS"));
}

#[test]
fn zero_iterations_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("k_max = 10", "k_max = 0"));
    let out = roa(&["run", "--config", &cfg, "--out", "rec.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("verdict: MAX_ITER"));
    let out = roa(&["check", "rec.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("mu = 5.0", "mu = \"five\""));
    let out = roa(&["run", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let cfg = write_config(dir.path(), &SMALL.replace("mu = 5.0", "mu = -5.0"));
    let out = roa(&["run", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`mu`"));
    let out = roa(&["run", "--config", "missing.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn truncated_record_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let rec = certified_record(dir.path());
    let text = std::fs::read_to_string(&rec).unwrap();
    std::fs::write(&rec, &text[..text.len() / 2]).unwrap();
    assert_eq!(roa(&["check", &rec], dir.path()).status.code(), Some(2));
    assert_eq!(roa(&["plot", &rec], dir.path()).status.code(), Some(2));
}

#[test]
fn plot_writes_svg_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let rec = certified_record(dir.path());
    let out = roa(&["plot", &rec, "--out", "figs"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let figs = dir.path().join("figs");
    for name in ["iteration_0.svg", "level_set_0.csv", "progression.svg", "level_sets.csv"] {
        let path = figs.join(name);
        assert!(path.exists(), "{name} missing");
        assert!(std::fs::metadata(&path).unwrap().len() > 0);
    }
    let svg = std::fs::read_to_string(figs.join("iteration_0.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert_eq!(roa(&["plot", &rec, "--iteration", "7", "--out", "figs"], dir.path()).status.code(), Some(2));
    assert_eq!(roa(&["plot", &rec, "--iteration", "x", "--out", "figs"], dir.path()).status.code(), Some(2));
}

#[test]
fn gen_data_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = roa(&["gen-data", "--config", &cfg, "--count", "120", "--out", "d.csv", "--field", "pendulum"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2,f1,f2"));
    assert!(lines.count() >= 120);

    let path = dir.path().join("d.csv").display().to_string();
    let cfg = write_config(dir.path(), &SMALL.replace("M = 1.0", "M = 2.5"));
    let field = format!("csv:{path}");
    let out = roa(&["gen-data", "--config", &cfg, "--field", &field], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
