use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use semisparse::io::{load_mesh, write_mesh, RawMesh, ReadOptions, DEFAULT_PRECISION};
use semisparse::shapes;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semisparse")).args(args).current_dir(dir).output().unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let raw = RawMesh::from(&shapes::rounded_cube(4, 0.4));
    write_mesh(&raw, dir.path().join("gt.obj"), None, DEFAULT_PRECISION).unwrap();
    let out = run(dir.path(), &["add-noise", "gt.obj", "--sigma", "0.1", "--seed", "3", "-o", "noisy.off"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    dir
}

#[test]
fn add_noise_keeps_connectivity() {
    let dir = setup();
    let gt = load_mesh(dir.path().join("gt.obj"), None, ReadOptions::default()).unwrap();
    let noisy = load_mesh(dir.path().join("noisy.off"), None, ReadOptions::default()).unwrap();
    assert_eq!(gt.faces, noisy.faces);
    assert_ne!(gt.vertices, noisy.vertices);
}

#[test]
fn denoise_writes_mesh_diagnostics_and_metrics() {
    let dir = setup();
    let out = run(
        dir.path(),
        &[
            "denoise",
            "noisy.off",
            "-o",
            "out.ply",
            "--max-iters",
            "7",
            "--eps",
            "0",
            "--diag",
            "d.csv",
            "--reference",
            "gt.obj",
            "--error-map",
            "err.ply",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let diag = fs::read_to_string(dir.path().join("d.csv")).unwrap();
    assert_eq!(diag.lines().next(), Some("iter,energy,res_P,res_Q,dN"));
    assert_eq!(diag.lines().count(), 8);
    let line = String::from_utf8(out.stdout).unwrap();
    let fields: Vec<&str> = line.trim().split(',').collect();
    assert_eq!(fields.len(), 4);
    assert_eq!(fields[0], "out");
    assert!(fields[2].parse::<f64>().unwrap() >= 0.0);
    let map = fs::read_to_string(dir.path().join("err.ply")).unwrap();
    assert!(map.contains("property uchar red"));
    assert!(load_mesh(dir.path().join("out.ply"), None, ReadOptions::default()).is_ok());
}

#[test]
fn evaluate_prints_one_csv_line() {
    let dir = setup();
    let out = run(dir.path(), &["evaluate", "gt.obj", "--reference", "gt.obj", "--sigma", "0.1"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "gt,0.1,0.000000,0.000000000e0\n");
}

#[test]
fn params_file_overrides_flags() {
    let dir = setup();
    fs::write(dir.path().join("p.txt"), "# tuned\nmax_iters = 3\neps=0\n").unwrap();
    let out = run(
        dir.path(),
        &["denoise", "noisy.off", "-o", "out.obj", "--max-iters", "9", "--params", "p.txt", "--diag", "d.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(dir.path().join("d.csv")).unwrap().lines().count(), 4);

    fs::write(dir.path().join("bad.txt"), "gamma=1\n").unwrap();
    let out = run(dir.path(), &["denoise", "noisy.off", "-o", "out.obj", "--params", "bad.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown parameter"));
}

#[test]
fn ablate_reports_three_configurations() {
    let dir = setup();
    fs::write(dir.path().join("grid.txt"), "alpha=0.1,0.2\nbeta=0.3,1\nmax_iters=5\n").unwrap();
    let out = run(dir.path(), &["ablate", "noisy.off", "--reference", "gt.obj", "--grid", "grid.txt"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!((rows[0][0], rows[0][6]), ("full", "4"));
    assert_eq!((rows[1][0], rows[1][3], rows[1][6]), ("beta=0", "0", "2"));
    assert_eq!((rows[2][0], rows[2][2], rows[2][6]), ("alpha=0", "0", "2"));
}

#[test]
fn exit_codes() {
    let dir = setup();
    // usage errors
    assert_eq!(run(dir.path(), &["denoise"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(dir.path(), &["denoise", "noisy.off", "-o", "x.obj", "--error-map", "e.ply"]).status.code(),
        Some(2)
    );
    // input and parameter errors
    assert_eq!(run(dir.path(), &["denoise", "missing.obj", "-o", "x.obj"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["denoise", "noisy.off", "-o", "x.obj", "--lambda", "-1"]).status.code(), Some(1));
    fs::write(dir.path().join("broken.obj"), "v 0 0 0\nf 1 2 3\n").unwrap();
    assert_eq!(run(dir.path(), &["denoise", "broken.obj", "-o", "x.obj"]).status.code(), Some(1));
}

#[test]
fn thread_cap_does_not_change_output() {
    let dir = setup();
    for (threads, name) in [("1", "one.obj"), ("2", "two.obj")] {
        let out = run(dir.path(), &["--threads", threads, "denoise", "noisy.off", "--max-iters", "5", "-o", name]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(dir.path().join("one.obj")).unwrap(), fs::read(dir.path().join("two.obj")).unwrap());
}
