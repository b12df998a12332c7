use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const FIG2: &str = "x1,x2,x3\nx1,0,1,3\nx2,2,0,3\nx3,2,1,0\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_quasiclust"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn dsl_leaves_fig2_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "fig2.csv", FIG2);
    let o = run(&["dsl", input.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), FIG2);
}

#[test]
fn dsl_of_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "net.tsv", "a\tb\t1\nb\tc\t2\nc\ta\t3\n");
    let o = run(&["dsl", input.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "a,b,c\na,0,1,2\nb,3,0,2\nc,3,3,0\n");
}

#[test]
fn validate_reports_properties() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "fig2.csv", FIG2);
    let o = run(&["validate", input.to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("3 nodes"));
    assert!(out.contains("strongly connected: true"));
    assert!(out.contains("quasi-ultrametric: yes"));
}

#[test]
fn empty_input_fails_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "empty.csv", "");
    let o = run(&["validate", input.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("empty.csv"));
}

#[test]
fn bad_number_error_carries_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bad.csv", "a,b\na,0,1\nb,x,0\n");
    let o = run(&["dsl", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn cut_dot_at_two_and_a_half() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "fig2.csv", FIG2);
    let o = run(&["cut", input.to_str().unwrap(), "--delta", "2.5", "--format", "dot"]);
    assert!(o.status.success());
    let dot = stdout(&o);
    assert_eq!(dot.matches("subgraph cluster_").count(), 2);
    assert!(dot.contains("\"x3\" -> \"x1\""));
}

#[test]
fn negative_delta_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "fig2.csv", FIG2);
    let o = run(&["cut", input.to_str().unwrap(), "--delta", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn distance_exact_and_upper() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.csv", "p,q\np,0,1\nq,2,0\n");
    let b = write(dir.path(), "b.csv", "r,s\nr,0,2\ns,4,0\n");
    let o = run(&["distance", a.to_str().unwrap(), b.to_str().unwrap(), "--exact"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("exact: 1\n"), "{}", stdout(&o));
    let o = run(&["distance", a.to_str().unwrap(), b.to_str().unwrap(), "--upper"]);
    assert!(stdout(&o).starts_with("upper bound: 1\n"), "{}", stdout(&o));
}

#[test]
fn transform_flow_warns_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "flow.csv", "a,b,c\na,0,0,30\nb,0,0,70\nc,5,0,0\n");
    let o = run(&["transform-flow", input.to_str().unwrap()]);
    assert!(o.status.success());
    let err = stderr(&o);
    assert!(err.contains("zero total inflow"), "{err}");
    assert!(err.contains("clamped"), "{err}");
    assert_eq!(stdout(&o), "a,b,c\na,0,inf,0.7\nb,1,0,0.30000000000000004\nc,1e-12,inf,0\n");
}

#[test]
fn check_axioms_passes() {
    let o = run(&["check-axioms", "--seed", "5", "--trials", "15"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
    assert_eq!(stdout(&o).matches("PASS").count(), 12);
}

#[test]
fn oracle_cap_env_is_validated() {
    let o = bin()
        .args(["check-axioms", "--trials", "1"])
        .env("QUASICLUST_ORACLE_CAP", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin()
        .args(["check-axioms", "--trials", "5"])
        .env("QUASICLUST_ORACLE_CAP", "3")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn export_json_and_dot() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "fig2.csv", FIG2);
    let o = run(&["export", input.to_str().unwrap(), "--format", "json"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("\"strongly_connected\": true"));
    let o = run(&["export", input.to_str().unwrap(), "--format", "dot"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["export", input.to_str().unwrap(), "--format", "dot", "--delta", "1", "--reduced"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).matches(" -> ").count(), 2);
}

#[test]
fn run_is_deterministic_and_summarizes() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "fig2.csv", FIG2);
    let mut outputs = Vec::new();
    for name in ["one", "two"] {
        let out_dir = dir.path().join(name);
        let o = run(&[
            "run",
            input.to_str().unwrap(),
            "--delta",
            "0.5",
            "1",
            "2",
            "3",
            "--format",
            "dot",
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let summary = stdout(&o);
        assert!(summary.contains("nodes: 3"));
        assert!(summary.contains("merge resolutions: [2, 3]"));
        assert!(summary.contains("delta 2: 2 blocks, 1 edges"));
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out_dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        outputs.push(files);
    }
    assert_eq!(outputs[0].len(), 6);
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn run_with_check_axioms() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "fig2.csv", FIG2);
    let out_dir = dir.path().join("out");
    let o = run(&[
        "run",
        input.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
        "--check-axioms",
        "9",
        "--trials",
        "10",
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("property suite (seed 9)"));
}
