use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).to_str().unwrap().to_string()
}

fn khier(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_khier")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("khier-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn solve_prints_cost() {
    let o = khier(&["solve", "--alg", "brute", "--instance", &fixture("star3.ki")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("cost 18\n"));
    let o = khier(&["solve", "--alg", "approx-tree", "--eps", "0.5", "--instance", &fixture("star3.ki")]);
    assert!(stdout(&o).ends_with("cost 23\n"));
}

#[test]
fn solve_writes_out_file() {
    let out = scratch("star3.kh");
    let o = khier(&["solve", "--alg", "uniform-opt", "--instance", &fixture("star3.ki"), "--out", out.to_str().unwrap()]);
    assert_eq!(stdout(&o), "cost 18\n");
    let e = khier(&["eval", "--instance", &fixture("star3.ki"), "--hierarchy", out.to_str().unwrap()]);
    assert!(stdout(&e).starts_with("total 18\n"));
}

#[test]
fn eval_outputs() {
    let o = khier(&["eval", "--instance", &fixture("star3.ki"), "--hierarchy", &fixture("star3_flat.kh")]);
    assert_eq!(stdout(&o), "total 18\nmember v1 6\nmember v2 6\nmember v3 6\n");
    let o = khier(&["eval", "--instance", &fixture("nine_members.ki"), "--hierarchy", &fixture("nine_members.kh")]);
    assert!(stdout(&o).lines().any(|l| l == "member U4 29"));
    let o = khier(&["eval", "--instance", &fixture("star3.ki"), "--hierarchy", &fixture("star3_flat.kh"), "--uniform-oracle"]);
    assert!(stdout(&o).starts_with("total 9\n"));
}

#[test]
fn exit_codes() {
    assert_eq!(khier(&["solve", "--alg", "approx-graph", "--instance", &fixture("path.ki")]).status.code(), Some(3));
    assert_eq!(khier(&["eval", "--instance", &fixture("nine_members.ki"), "--hierarchy", &fixture("nine_members_missing.kh")]).status.code(), Some(3));
    assert_eq!(khier(&["solve", "--alg", "nope", "--instance", &fixture("star3.ki")]).status.code(), Some(1));
    assert_eq!(khier(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(khier(&["--help"]).status.code(), Some(0));
    assert_eq!(khier(&["--version"]).status.code(), Some(0));
    assert_eq!(khier(&["solve", "--alg", "brute", "--instance", "/no/such/file"]).status.code(), Some(2));
    let bad = scratch("bad.ki");
    std::fs::write(&bad, "khier-instance v1\nkind tree\nroot r\nedge r a 1\nedge r a 1\nmember a 1\n").unwrap();
    let o = khier(&["solve", "--alg", "brute", "--instance", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 5"));
}

#[test]
fn brute_cap_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_khier"))
        .args(["solve", "--alg", "brute", "--instance", &fixture("star3.ki")])
        .env("KHIER_BRUTE_CAP", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn ratio_csv() {
    let o = khier(&["ratio", "--alg", "ptas", "--kind", "random-tree", "--n-range", "2..4", "--trials", "0"]);
    assert_eq!(stdout(&o), "n,seed,alg,cost,baseline,baseline_value,ratio\n");
    let o = khier(&["ratio", "--alg", "ptas", "--n-range", "2..7", "--trials", "5", "--seed", "3", "--uniform-oracle", "--eps", "1/3"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 31);
    for row in text.lines().skip(1) {
        let ratio: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!((1.0..=2.0).contains(&ratio), "{row}");
    }
    let o = khier(&["ratio", "--alg", "brute", "--n-range", "2..12", "--trials", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn generate_reductions() {
    let o = khier(&["generate", "--kind", "3dmatching", "--q", "2", "--triples", "1:2:1,2:1:2", "--root-cost", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("member ")).count(), 9);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let o = khier(&["generate", "--kind", "3partition", "--sizes", "5,6,7", "--bound", "18", "--base-weight", "1", "--root-cost", "9"]);
    assert_eq!(o.status.code(), Some(3));
}
