use std::path::Path;
use std::process::{Command, Output};

use tightpoly::atlas::load_atlas;

fn tightpoly(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tightpoly"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_reports_order() {
    let o = tightpoly(&["verify", "--tuple", "3,6"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("order 36 = 2·3·6"));
    let o = tightpoly(&["verify", "--tuple", "5,10,5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn verify_rejects_inadmissible() {
    let o = tightpoly(&["verify", "--tuple", "3,4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("p2=4 is not an even divisor of 2p1=6"));
    let o = tightpoly(&["verify", "--tuple", "3,x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn budget_exhaustion_exits_3() {
    let o = tightpoly(&["--max-cosets", "20", "verify", "--tuple", "5,10,5"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn classify_counts() {
    let o = tightpoly(&["classify", "--type", "3,6", "--orientable"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("count 1"));
    assert!(stdout(&o).contains("≅ Γ(3,6)"));
    let o = tightpoly(&["classify", "--type", "3,4", "--orientable"]);
    assert!(stdout(&o).contains("count 0"));
    let o = tightpoly(&["classify", "--type", "3,4", "--non-orientable"]);
    assert!(stdout(&o).contains("count 1"));
    assert!(stdout(&o).contains("≅ Λ(1)"));
    let o = tightpoly(&["classify", "--type", "3,4", "--orientable", "--non-orientable"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn classify_writes_census_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("census.jsonl");
    let o = tightpoly(&["classify", "--type", "4,8", "--orientable", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let entries = load_atlas(&out).unwrap();
    assert_eq!(entries.len(), 2);
    assert!(entries.iter().all(|e| e.source.as_deref() == Some("census") && e.group_order == 64));
}

#[test]
fn check_presentations() {
    let dir = tempfile::tempdir().unwrap();
    let gamma = dir.path().join("gamma.txt");
    let o = tightpoly(&["family", "--out", path_str(&gamma), "gamma", "--tuple", "3,6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = tightpoly(&["check", "--presentation", path_str(&gamma)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("string C-group, tight, orientable, type {3,6}"));

    let cube = dir.path().join("cube.txt");
    std::fs::write(&cube, "gens 3\nrel 0 0\nrel 1 1\nrel 2 2\nrel 0 2 0 2\nrel 0 1 0 1 0 1 0 1\nrel 1 2 1 2 1 2\n").unwrap();
    let o = tightpoly(&["check", "--presentation", path_str(&cube)]);
    assert!(stdout(&o).contains("string C-group, NOT tight (48 flags vs 24)"), "{}", stdout(&o));

    let degenerate = dir.path().join("degenerate.txt");
    std::fs::write(&degenerate, "gens 3\nrel 0 0\nrel 1 1\nrel 2 2\nrel 0 2 0 2\nrel 0 1 0 1\nrel 1 2 1 2\nrel 0 2\n").unwrap();
    let o = tightpoly(&["check", "--presentation", path_str(&degenerate)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("intersection condition FAILS at I={0}, J={2}"));
}

#[test]
fn check_reports_parse_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "gens 2\nrel 0 0\nrel 0 7\n").unwrap();
    let o = tightpoly(&["check", "--presentation", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn family_emits_parseable_text() {
    let o = tightpoly(&["family", "lambda", "--k", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let p = tightpoly::words::Presentation::parse_text(&stdout(&o)).unwrap();
    assert_eq!(p, tightpoly::words::lambda_k_presentation(3).unwrap());
    let o = tightpoly(&["family", "lambda", "--k", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn atlas_contents() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("atlas.jsonl");
    let o = tightpoly(&["atlas", "--max-flags", "100", "--max-rank", "3", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let entries = load_atlas(&out).unwrap();
    let find = |t: &[u32]| entries.iter().find(|e| e.tuple == t).map(|e| e.group_order);
    assert_eq!(find(&[3, 6]), Some(36));
    assert_eq!(find(&[4, 4]), Some(32));
    assert_eq!(find(&[5, 10]), Some(100));
    assert_eq!(find(&[3, 4]), None);
    assert!(entries.iter().all(|e| e.ms.is_none() && e.tight && e.flag_count == e.group_order));

    let empty = dir.path().join("empty.jsonl");
    let o = tightpoly(&["atlas", "--max-flags", "4", "--max-rank", "3", "--out", path_str(&empty)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&empty).unwrap(), "");
}

#[test]
fn atlas_failure_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("atlas.jsonl");
    let o = tightpoly(&[
        "--max-cosets", "30", "atlas", "--max-flags", "100", "--max-rank", "3", "--out", path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    let o = tightpoly(&["atlas", "--max-flags", "3", "--max-rank", "3", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2));
}
