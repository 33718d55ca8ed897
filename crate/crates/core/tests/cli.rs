use std::io::Write;
use std::process::{Command, Output, Stdio};

use fairenum::experiments::{default_schedule, FIG1_HEADER};
use fairenum::{exact_failure_probability, split_threshold, tail_probability};

fn fairenum(args: &[&str], stdin: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_fairenum"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn fairenum");
    child.stdin.take().unwrap().write_all(stdin).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn bound_prints_threshold() {
    let o = fairenum(
        &["bound", "--m", "2", "--epsilon", "0.01", "--M", "10"],
        b"",
    );
    assert!(o.status.success());
    assert_eq!(stdout(&o), "16\n");
    assert_eq!(split_threshold(2, 10, 0.01).unwrap(), 16);
}

#[test]
fn numeric_output_matches_library() {
    let o = fairenum(&["tail", "--m", "1", "--tau", "1", "--n", "5"], b"");
    assert_eq!(stdout(&o), "0\n");
    let o = fairenum(&["tail", "--m", "60", "--tau", "150", "--n", "80"], b"");
    let p = tail_probability(60, 150, 80).unwrap();
    assert_eq!(stdout(&o).trim(), fairenum::cli::format_sig12(p));
    let o = fairenum(&["failure", "--n", "1000"], b"");
    let p = exact_failure_probability(1000, &default_schedule()).unwrap();
    assert_eq!(stdout(&o).trim(), fairenum::cli::format_sig12(p));
}

#[test]
fn resolved_configuration_on_stderr() {
    let o = fairenum(
        &["fig1", "--runs", "5", "--sizes", "50", "--seed", "31337"],
        b"",
    );
    assert!(o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("seed: 31337"), "{err}");
    let out = stdout(&o);
    assert_eq!(out.lines().next().unwrap(), FIG1_HEADER);
    assert!(out.lines().nth(1).unwrap().starts_with("50,6,709,709,0,"));
}

#[test]
fn fig2_file_has_unit_ratio_at_n() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig2.csv");
    let o = fairenum(&["fig2", "--out", path.to_str().unwrap()], b"");
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(&path).unwrap();
    let row = csv.lines().find(|l| l.starts_with("100,")).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields, ["100", "100", "922", "0"]);
}

#[test]
fn compare_csv_layout() {
    let o = fairenum(&["compare", "--runs", "50", "--sizes", "1,50"], b"");
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "n,mean_diff,diff_stderr,predicted_diff,runs,seed");
    assert_eq!(lines[1], "1,0,0,0,50,0");
    assert!(lines[2].starts_with("50,"));
}

#[test]
fn stream_from_stdin_and_file() {
    let tokens = b"alpha\nbeta\n".repeat(100);
    let o = fairenum(&["enumerate", "--stdin", "--checkpoints", "2,4"], &tokens);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "collected 2\ntotal_samples 27\nstop_checkpoint 2\n"
    );

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tokens.txt");
    std::fs::write(&path, &tokens).unwrap();
    let o = fairenum(
        &[
            "enumerate",
            "--input",
            path.to_str().unwrap(),
            "--checkpoints",
            "2,4",
        ],
        b"",
    );
    assert_eq!(
        stdout(&o),
        "collected 2\ntotal_samples 27\nstop_checkpoint 2\n"
    );
}

#[test]
fn exit_codes() {
    assert_eq!(fairenum(&["bound", "--m", "3"], b"").status.code(), Some(1));
    assert_eq!(fairenum(&["frobnicate"], b"").status.code(), Some(1));
    assert_eq!(
        fairenum(&["bound", "--m", "3", "--epsilon", "0.9"], b"")
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        fairenum(&["fig1", "--sizes", "2000", "--runs", "1"], b"")
            .status
            .code(),
        Some(1)
    );
    let o = fairenum(&["enumerate", "--stdin", "--checkpoints", "2,4"], b"a\nb\n");
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(
        fairenum(&["enumerate", "--input", "/nonexistent/tokens"], b"")
            .status
            .code(),
        Some(2)
    );
    let o = Command::new(env!("CARGO_BIN_EXE_fairenum"))
        .args(["fig2", "--n", "5"])
        .env("FAIRENUM_WORKERS", "lots")
        .output()
        .unwrap();
    assert!(o.status.success(), "fig2 does not use workers");
    let o = Command::new(env!("CARGO_BIN_EXE_fairenum"))
        .args(["fig1", "--runs", "1", "--sizes", "5"])
        .env("FAIRENUM_WORKERS", "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
