use std::path::Path;
use std::process::{Command, Output};

fn uc_fem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uc-fem"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn run_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = uc_fem(&["run", "--preset", "fig2", "--n-list", "20,40,60", "--out", &out_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("preset,solution,N,gamma,n,h,err_l2,err_h1,est_data,est_jump,est_trace,est_residual,est_total,ratio_C,seconds")
    );
    assert_eq!(lines.count(), 6);
    let svg = std::fs::read_to_string(dir.path().join("fig2.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.contains("stroke-dasharray"));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("slope perturbed N=2"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = uc_fem(&[
            "run", "--preset", "fig1", "--n-list", "20,40", "--gamma", "0.01,0", "--delta", "1e-3", "--seed", "9",
            "--out", &out_arg(dir.path()),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("fig1.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn dump_matrix_writes_matrix_market() {
    let dir = tempfile::tempdir().unwrap();
    let out = uc_fem(&[
        "run", "--preset", "custom", "--solution", "mode2", "--n-list", "4", "--dump-matrix", "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dumps: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "mtx"))
        .collect();
    assert_eq!(dumps.len(), 1);
    let text = std::fs::read_to_string(&dumps[0]).unwrap();
    assert!(text.starts_with("%%MatrixMarket matrix coordinate real general\n"));
    // (n+1)² + N + (n−1)² with n = 4, N = 2
    assert!(text.lines().nth(1).unwrap().starts_with("36 36 "));
    // n = 4 is not a multiple of 20
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn configuration_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = out_arg(dir.path());
    for args in [
        vec!["run", "--preset", "fig1", "--n-list", "40,20", "--out", &d],
        vec!["run", "--preset", "fig1", "--gamma", "-1", "--out", &d],
        vec!["run", "--preset", "fig2", "--N", "0", "--out", &d],
        vec!["run", "--preset", "custom", "--out", &d],
        vec!["run", "--preset", "fig9"],
        vec!["run", "--preset", "fig1", "--n-list", "1,20", "--out", &d],
    ] {
        let out = uc_fem(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}
