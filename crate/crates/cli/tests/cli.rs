use std::fs;
use std::process::{Command, Output};

fn hpvem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hpvem")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn check_passes() {
    let o = hpvem(&["check"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn study_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = hpvem(&[
        "study", "--case", "tc1", "--regime", "h", "--p", "2", "--levels", "2,4,8", "--out", out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("tc1_square_laplace_h_p2.csv")).unwrap();
    // header plus three runs of four eigenvalues
    assert_eq!(csv.lines().count(), 13);
    let summary = fs::read_to_string(dir.path().join("tc1_square_laplace_h_p2_summary.txt")).unwrap();
    assert!(summary.contains("algebraic rate"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.cfg");
    fs::write(&cfg, "# p-study\ncase = tc2\nregime = p\npmax = 9\nseeds = 16\n").unwrap();
    let out = dir.path().to_str().unwrap();
    let o = hpvem(&[
        "study",
        "--config",
        cfg.to_str().unwrap(),
        "--pmin",
        "2",
        "--pmax",
        "3",
        "--out",
        out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("tc2_oscillator_p.csv")).unwrap();
    let runs: std::collections::BTreeSet<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(runs.len(), 2);
}

#[test]
fn solve_prints_reference_errors() {
    let o = hpvem(&["solve", "--case", "tc3", "--regime", "hp", "--layers", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("zero mode"));
    assert!(stdout(&o).contains("rel.err"));
}

#[test]
fn exit_codes() {
    assert_eq!(hpvem(&["study", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(hpvem(&["solve", "--case", "tc9"]).status.code(), Some(2));
    let missing = hpvem(&[
        "solve",
        "--case",
        "tc3",
        "--regime",
        "hp",
        "--layers",
        "1",
        "--ref-file",
        "/nonexistent/ref.txt",
    ]);
    // the solve itself still runs without a reference
    assert!(missing.status.success());
    let o = hpvem(&[
        "study",
        "--case",
        "tc3",
        "--regime",
        "hp",
        "--layers",
        "1",
        "--ref-file",
        "/nonexistent/ref.txt",
        "--out",
        "/tmp",
    ]);
    assert_eq!(o.status.code(), Some(4));
    let o = hpvem(&["solve", "--case", "tc4", "--regime", "h", "--levels", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reference_output_parses() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ref.txt");
    let o = hpvem(&[
        "reference",
        "--case",
        "tc3",
        "--layers",
        "3",
        "--neigs",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = hpvem::bench::read_reference(&path).unwrap();
    assert_eq!(r.len(), 3);
    assert!((r.values[0] - 1.4756).abs() < 0.05);
}
