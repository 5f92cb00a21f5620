//! End-to-end tests of the binary: exit codes, CSV shapes and seed
//! determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("fixtures");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_planar-ising"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn compute_corr_values() {
    let out = run(&[
        "compute",
        "corr",
        "--graph",
        &fixture("triangle_half.json"),
        "--A",
        "0",
        "--B",
        "1",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out).trim(), "2/3");
    let out = run(&[
        "compute",
        "corr",
        "--graph",
        &fixture("cycle4_half.json"),
        "--A",
        "0",
        "--B",
        "1",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out).trim(), "10/17");
}

#[test]
fn compute_prob_parallel_matches_worked_example() {
    let out = run(&[
        "compute",
        "prob-parallel",
        "--graph",
        &fixture("cycle4_half.json"),
        "--A",
        "0,1",
        "--B",
        "3,2",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out).trim(), "9/34");
}

#[test]
fn compute_matrix_k_shape() {
    let out = run(&[
        "compute",
        "matrix",
        "K",
        "--graph",
        &fixture("cycle4_half.json"),
        "--A",
        "0,1",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    let rows: Vec<&str> = text.trim().lines().collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], "0/1,10/17");
    assert_eq!(rows[1], "-10/17,0/1");
}

#[test]
fn verify_all_on_triangle_exits_zero() {
    let out = run(&[
        "verify",
        "--graph",
        &fixture("triangle.json"),
        "--suite",
        "all",
        "--k-max",
        "2",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout_of(&out);
    assert!(text.starts_with("suite,identity,params,lhs,rhs,status"));
    assert!(text.contains(",ok"));
    assert!(!text.contains(",FAIL"));
}

#[test]
fn verify_pf_on_cycle4_reports_subsets() {
    let out = run(&[
        "verify",
        "--graph",
        &fixture("cycle4.json"),
        "--suite",
        "pf",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("pfK-equals-polynomial-ratio"));
}

#[test]
fn verify_respects_coloring_override() {
    let out = run(&[
        "verify",
        "--graph",
        &fixture("triangle.json"),
        "--suite",
        "det",
        "--k-max",
        "2",
        "--coloring",
        "o,b,o",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn corrupted_graph_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = run(&["verify", "--graph", path.to_str().unwrap(), "--suite", "pf"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn capacity_exit_is_three() {
    // A graph over the Gamma-enumeration cap: a 5x5 grid has 40 edges.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.json");
    let weights: Vec<planar_ising::Rat> = (0..40).map(planar_ising::corpus::palette).collect();
    let g = planar_ising::corpus::grid(5, 5, &weights);
    std::fs::write(&path, g.to_json_string()).unwrap();
    let out = run(&[
        "sample",
        "--graph",
        path.to_str().unwrap(),
        "--A",
        "0,4",
        "--samples",
        "1",
        "--seed",
        "1",
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn ordering_violation_exits_two() {
    let out = run(&[
        "compute",
        "prob-parallel",
        "--graph",
        &fixture("cycle4_half.json"),
        "--A",
        "0,2",
        "--B",
        "1,3",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sample_is_byte_deterministic() {
    let args = [
        "sample",
        "--graph",
        &fixture("cycle4_half.json"),
        "--A",
        "0,1,2,3",
        "--samples",
        "200",
        "--seed",
        "777",
    ];
    let a = run(&args.iter().map(|s| s as &str).collect::<Vec<_>>());
    let b = run(&args.iter().map(|s| s as &str).collect::<Vec<_>>());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout_of(&a);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "sample_index,omega1,omega2,pair_01_32,pair_30_21,all_connected"
    );
    assert_eq!(text.lines().count(), 201);
    // Exactly one of the three events holds per sample.
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let ones: u32 = cells[3..6].iter().map(|c| c.parse::<u32>().unwrap()).sum();
        assert_eq!(ones, 1, "{line}");
    }
}

#[test]
fn scaling_k1_gap_is_zero() {
    let out = run(&[
        "scaling", "--A", "0.25,0", "--B", "0.75,0", "--eps", "1/8,1/12",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "eps,lattice_p,continuum_p,gap");
    for line in lines {
        let gap: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(gap.abs() < 1e-12, "{line}");
    }
}

#[test]
fn scaling_reversed_ladder_exits_one() {
    // An inverted mesh ladder makes the gap column increase, which the
    // pipeline reports as a property failure.
    let out = run(&[
        "scaling",
        "--A",
        "0.2,0;0.4,0",
        "--B",
        "0.8,0;0.6,0",
        "--eps",
        "1/20,1/8",
    ]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn scaling_rejects_swapped_points() {
    let out = run(&[
        "scaling",
        "--A",
        "0.4,0;0.2,0",
        "--B",
        "0.8,0;0.6,0",
        "--eps",
        "1/8",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn matrix_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    let out = run(&[
        "compute",
        "matrix",
        "M",
        "--graph",
        &fixture("grid3.json"),
        "--A",
        "0,1",
        "--B",
        "7,8",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.trim().lines().count(), 2);
    for cell in text.trim().lines().flat_map(|l| l.split(',')) {
        assert!(cell.contains('/'), "{cell}");
    }
}
