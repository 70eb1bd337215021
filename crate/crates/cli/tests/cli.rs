use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use canonical_cells::exact::{int, Mat3};
use canonical_cells::io::{decomposition_from_str, polyhedron_from_str};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn ccells(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccells")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn canonize_writes_trace_and_cells() {
    let dir = tempfile::tempdir().unwrap();
    let (log, cells) = (dir.path().join("run.log"), dir.path().join("cells.toml"));
    let o = ccells(&["canonize", path(&data("psl2-torus.toml")), "--trace", path(&log), "--out", path(&cells)]);
    assert_eq!(o.status.code(), Some(0));
    let trace = fs::read_to_string(&log).unwrap();
    assert_eq!(trace.lines().filter(|l| l.starts_with("FLIP")).count(), 1);
    assert!(trace.ends_with("DONE steps=1\n"));
    let d = decomposition_from_str(&fs::read_to_string(&cells).unwrap()).unwrap();
    assert_eq!(d.faces.len(), 2);
    assert!(d.faces.iter().all(|f| f.corners.len() == 3));
}

#[test]
fn step_budget_is_a_geometry_error() {
    let o = ccells(&["canonize", path(&data("goldman-two-flips.toml")), "--max-steps", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(ccells(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ccells(&["certify", "/nonexistent/cells.toml", "--depth", "1"]).status.code(), Some(2));
    assert_eq!(ccells(&["sweep", "--start", "1,2", "--end", "1,2,3,4,5,6", "--out-dir", "."]).status.code(), Some(2));
}

#[test]
fn malformed_structure_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    let text = fs::read_to_string(data("series-quad.toml")).unwrap().replacen("\"4/5\"", "\"3/4\"", 1);
    fs::write(&bad, text).unwrap();
    let o = ccells(&["canonize", path(&bad)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn develop_certify_and_orbit() {
    let dir = tempfile::tempdir().unwrap();
    let cells = dir.path().join("cells.toml");
    assert!(ccells(&["canonize", path(&data("psl2-torus.toml")), "--out", path(&cells)]).status.success());
    let svg = dir.path().join("dev.svg");
    let o = ccells(&["develop", path(&cells), "--depth", "3", "--chart", "klein", "--svg", path(&svg)]);
    assert!(o.status.success());
    assert!(fs::read_to_string(&svg).unwrap().contains("<polygon"));
    let o = ccells(&["certify", path(&cells), "--depth", "4"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("convex") && stdout(&o).contains("face 1: height 0"));
    let o = ccells(&["orbit", path(&data("psl2-torus.toml")), "--depth", "3", "--fit-conic"]);
    assert!(stdout(&o).contains("samples off the conic: 0 of"));
    let o = ccells(&["orbit", path(&data("goldman-one-flip.toml")), "--depth", "3", "--fit-conic"]);
    assert!(!stdout(&o).contains("samples off the conic: 0 of"));
}

#[test]
fn starting_triangulation_fails_certification() {
    let dir = tempfile::tempdir().unwrap();
    let start = dir.path().join("start.toml");
    let p = canonical_cells::io::structure_from_str(&fs::read_to_string(data("psl2-torus.toml")).unwrap())
        .unwrap()
        .initial_polyhedron()
        .unwrap();
    fs::write(&start, canonical_cells::io::polyhedron_to_string(&p)).unwrap();
    let o = ccells(&["certify", path(&start), "--depth", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("not convex"));
}

#[test]
fn scramble_round_trips_through_canonize() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scrambled.toml");
    let o = ccells(&["scramble", path(&data("psl2-torus.toml")), "--flips", "2", "--seed", "7", "--out", path(&out)]);
    assert!(o.status.success());
    assert!(polyhedron_from_str(&fs::read_to_string(&out).unwrap()).unwrap().validate().is_empty());
    let o = ccells(&["canonize", path(&out)]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().filter(|l| l.starts_with("FLIP")).count() >= 2);
}

#[test]
fn lift_prints_exact_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.toml");
    fs::write(&m, "matrix = [[\"2\", \"1\"], [\"1\", \"1\"]]\n").unwrap();
    let o = ccells(&["lift-psl2", path(&m)]);
    assert!(o.status.success());
    let expected = Mat3::from_rows([
        [canonical_cells::exact::ratio(7, 2), int(3), canonical_cells::exact::ratio(3, 2)],
        [int(3), int(3), int(1)],
        [canonical_cells::exact::ratio(3, 2), int(1), canonical_cells::exact::ratio(3, 2)],
    ]);
    assert_eq!(stdout(&o).trim(), expected.to_string().trim());
    fs::write(&m, "matrix = [[\"2\", \"0\"], [\"0\", \"1\"]]\n").unwrap();
    assert_eq!(ccells(&["lift-psl2", path(&m)]).status.code(), Some(1));
}

#[test]
fn sweep_writes_samples_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = ccells(&[
        "sweep", "--start", "8,2,7,2,4,2", "--end", "8,2,3,7,1,2", "--samples", "4", "--bisect-width", "1/100",
        "--out-dir", path(dir.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert_eq!(report.lines().filter(|l| l.starts_with("sample")).count(), 4);
    let svgs = fs::read_dir(dir.path()).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "svg"));
    let valid = report.lines().filter(|l| l.starts_with("sample") && !l.contains("invalid")).count();
    assert_eq!(svgs.count(), valid);
}
