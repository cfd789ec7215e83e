use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).to_string_lossy().into_owned()
}

fn lamina(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lamina")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(data(&format!("golden/{name}"))).unwrap()
}

#[test]
fn fiber_of_t_matches_golden() {
    let o = lamina(&["fiber", &data("tribonacci.aut"), "1,1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), golden("fiber_t.json"));
    assert!(stderr(&o).contains("degree (lower bound)  4"));
}

#[test]
fn analyze_matches_golden() {
    let o = lamina(&["analyze", &data("tribonacci.aut")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), golden("analyze.json"));
}

#[test]
fn carried_matches_golden() {
    let o = lamina(&["carried", &data("ab.sub"), "(abc)^inf", "--rank", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("carried_abc.json"));
    let a = lamina(&["carried", &data("ab.sub"), "a"]);
    assert!(stdout(&a).contains("\"verdict\": \"carried_at_depth\""));
}

#[test]
fn out_flag_writes_json_and_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    let o = lamina(&["fiber", &data("tribonacci.aut"), "1,1", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&path).unwrap(), golden("fiber_t.json"));
    assert!(stdout(&o).starts_with("fiber\n"));
}

#[test]
fn zero_exponent_runs_simple_point_check() {
    let o = lamina(&["fiber", &data("tribonacci.aut"), "a,0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"verdict\": \"PASS\""));
}

#[test]
fn negative_exponent_is_phi_inverse_type() {
    let o = lamina(&["fiber", &data("tribonacci.aut"), "1,-1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"type\": \"phi_inverse\""));
    assert!(stdout(&o).contains("\"degree_lower_bound\": 3"));
}

#[test]
fn parse_errors_exit_1_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.aut");
    std::fs::write(&bad, "rank 3\na -> ab\nb -> a?c\nc -> a\n").unwrap();
    let o = lamina(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3:"), "{}", stderr(&o));
    assert_eq!(lamina(&["fiber", &data("tribonacci.aut"), "zz"]).status.code(), Some(1));
    assert_eq!(lamina(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(lamina(&["analyze", &data("tribonacci.aut"), "--depth", "0"]).status.code(), Some(1));
}

#[test]
fn help_exits_0() {
    let o = lamina(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("singular-search"));
}

#[test]
fn budget_exhaustion_exits_4() {
    let o = lamina(&["fiber", &data("tribonacci.aut"), "1,1", "--budget", "5"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn non_atoroidal_rank_two_warns_and_exits_2() {
    let o = lamina(&["singular-search", &data("fibonacci.aut")]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("warning: rank 2"));
    assert!(err.contains("not atoroidal"));
}

#[test]
fn verify_bounds_accepts_candidates() {
    let o = lamina(&["verify-bounds", &data("tribonacci.aut"), "--candidate", "ab,2", "--candidate", "c,-1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("candidate ab,2"));
    assert!(err.contains("thresholds"));
}

#[test]
fn jobs_do_not_change_output() {
    let one = lamina(&["fiber", &data("tribonacci.aut"), "A,1", "--jobs", "1"]);
    let eight = lamina(&["fiber", &data("tribonacci.aut"), "A,1", "--jobs", "8"]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, eight.stdout);
}
