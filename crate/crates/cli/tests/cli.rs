use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(file)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_closedform")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_prints_solution_and_json() {
    let heat = corpus("heat-exp.prob");
    let o = run(&["solve", heat.to_str().unwrap(), "--no-timing"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("solution: A*exp(x + a*t)"), "{out}");
    assert!(out.contains("\"expression_sexp\""));
}

#[test]
fn solve_writes_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = corpus("bh-exp.prob");
    let mut files = Vec::new();
    for n in ["a.json", "b.json"] {
        let path = dir.path().join(n);
        let o = run(&["solve", p.to_str().unwrap(), "--no-timing", "--out", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        files.push(std::fs::read(path).unwrap());
    }
    assert_eq!(files[0], files[1]);
    let v: serde_json::Value = serde_json::from_slice(&files[0]).unwrap();
    assert_eq!(v["problem"], "bh-exp");
}

#[test]
fn solve_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("decoy.prob");
    std::fs::write(&path, "name = decoy\nunknown = u(x, t)\npde = u_t - u_xx\ntime = t\nic = sin(x)\n").unwrap();
    let o = run(&["solve", path.to_str().unwrap(), "--budget", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("budget exhausted"));
}

#[test]
fn verify_accepts_and_rejects() {
    let heat = corpus("heat-exp.prob");
    let h = heat.to_str().unwrap();
    let ok = run(&["verify", h, "--candidate", "exp(x + a*t)"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("pde: certified-zero"), "{}", stdout(&ok));
    let bad = run(&["verify", h, "--candidate", "exp(x + 2*a*t)"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stdout(&bad).contains("witness-nonzero"));
    assert!(stdout(&bad).contains("fitness: 1"));
}

#[test]
fn equiv_reports_reparameterization() {
    let p = corpus("bh-rational.prob");
    let o = run(&["equiv", p.to_str().unwrap(), "--a", "(B + x)/(A + t)", "--b", "(x + 2*Q)/(P + t)"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("equivalent"));
    let o = run(&["equiv", p.to_str().unwrap(), "--a", "(B + x)/(A + t)", "--b", "x/(1 + t^2)"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(corpus("heat-exp.prob"), dir.path().join("heat-exp.prob")).unwrap();
    let csv = dir.path().join("r.csv");
    let json = dir.path().join("r.json");
    let o = run(&[
        "bench",
        dir.path().to_str().unwrap(),
        "--report",
        csv.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
        "--no-timing",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().next(), Some("name,status,solution,candidates,wall_time_ms"));
    assert!(text.contains("heat-exp,recovered,"));
    assert!(json.exists());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let heat = corpus("heat-exp.prob");
    let h = heat.to_str().unwrap();
    assert_eq!(run(&["solve", h, "--budget", "lots"]).status.code(), Some(1));
    assert_eq!(run(&["solve", h, "--budget", "0"]).status.code(), Some(1));
    let o = run(&["verify", h, "--candidate", "exp(x"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("usage:"));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn unreadable_problem_exits_two() {
    assert_eq!(run(&["solve", "/nonexistent/x.prob"]).status.code(), Some(2));
}
