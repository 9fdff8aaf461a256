use std::path::Path;
use std::process::{Command, Output};

use spdefem::io::read_field_csv;

fn spdefem(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spdefem")).current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Value following `label` on a line of `text`.
fn reported(text: &str, label: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(label)).unwrap_or_else(|| panic!("no `{label}` in {text}"));
    line[label.len()..].trim().parse().unwrap()
}

fn meshgen(dir: &Path, n: usize, max: f64) {
    let (n, max) = (n.to_string(), max.to_string());
    let o = spdefem(dir, &["meshgen", "--nx", &n, "--ny", &n, "--xmax", &max, "--ymax", &max, "--out", "m.mesh"]);
    assert!(o.status.success(), "{o:?}");
}

#[test]
fn solve_constant_rhs() {
    let dir = tempfile::tempdir().unwrap();
    meshgen(dir.path(), 8, 1.0);
    let o = spdefem(dir.path(), &["solve", "--mesh", "m.mesh", "--k", "2", "--f", "one", "--exact", "--out", "u.csv"]);
    assert!(o.status.success());
    assert!(reported(&stdout(&o), "max deviation:") <= 1e-10);
    let u = read_field_csv(&std::fs::read_to_string(dir.path().join("u.csv")).unwrap()).unwrap();
    assert!(u.values.iter().all(|v| (v - 0.5).abs() <= 1e-10));
}

#[test]
fn solve_cospi_reports_small_error() {
    let dir = tempfile::tempdir().unwrap();
    meshgen(dir.path(), 16, 1.0);
    let o = spdefem(dir.path(), &["solve", "--mesh", "m.mesh", "--k", "1", "--f", "cospi", "--exact"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(reported(&text, "L2 error:") < 1e-2);
    assert!(reported(&text, "L2 residual:") < 1e-10);
}

#[test]
fn project_and_solve_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    meshgen(dir.path(), 6, 1.0);
    assert!(spdefem(dir.path(), &["project", "--mesh", "m.mesh", "--f", "one", "--out", "p.csv"]).status.success());
    let p = read_field_csv(&std::fs::read_to_string(dir.path().join("p.csv")).unwrap()).unwrap();
    assert!(p.values.iter().all(|v| (v - 1.0).abs() < 1e-10));
    let o = spdefem(dir.path(), &["solve", "--mesh", "m.mesh", "--k", "4", "--f-csv", "p.csv", "--out", "u.csv"]);
    assert!(o.status.success());
    let u = read_field_csv(&std::fs::read_to_string(dir.path().join("u.csv")).unwrap()).unwrap();
    assert!(u.values.iter().all(|v| (v - 0.25).abs() < 1e-9));
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    meshgen(dir.path(), 30, 3.0);
    // Compliant mesh, centred probe.
    let o = spdefem(dir.path(), &["validate", "--mesh", "m.mesh", "--range", "1", "--probe", "1.5,1.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("verdict: pass"));
    // Too coarse for the range: flagged, reported, not enforced.
    let o = spdefem(dir.path(), &["validate", "--mesh", "m.mesh", "--range", "0.3", "--probe", "1.5,1.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("not enforced"));
    let o = spdefem(dir.path(), &["validate", "--mesh", "m.mesh", "--range", "1", "--probe", "4,4"]);
    assert_eq!(o.status.code(), Some(1));
    let o = spdefem(dir.path(), &["validate", "--mesh", "m.mesh", "--range", "0", "--probe", "1,1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn validate_fails_when_k_disagrees_with_range() {
    let dir = tempfile::tempdir().unwrap();
    meshgen(dir.path(), 30, 3.0);
    // Rules of thumb hold for range 1, but k = 32 has range 0.5.
    let o = spdefem(dir.path(), &["validate", "--mesh", "m.mesh", "--range", "1", "--k", "32", "--probe", "1.5,1.5"]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("verdict: FAIL"));
}

#[test]
fn bad_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.mesh"), "nodes 3\n0 0\n1 0\n2 0\ntriangles 1\n0 1 2\n").unwrap();
    let o = spdefem(dir.path(), &["assemble", "--mesh", "bad.mesh", "--out-mass", "J.mtx"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("J.mtx").exists());
    meshgen(dir.path(), 2, 1.0);
    assert_eq!(spdefem(dir.path(), &["assemble", "--mesh", "m.mesh"]).status.code(), Some(1));
    assert_eq!(
        spdefem(dir.path(), &["sample", "--mesh", "m.mesh", "--k", "-1", "--out-prefix", "s"]).status.code(),
        Some(1)
    );
    assert_eq!(
        spdefem(dir.path(), &["cov", "--mesh", "m.mesh", "--k", "1", "--probe", "5,5", "--out", "c.csv"]).status.code(),
        Some(1)
    );
}
