use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_f2rank2");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("F2RANK2_CACHE")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const BEASLEY1: &str = "[a,c,c;d,a+b,c;d,d,b]";
const T2: &str = "[0,a,b;c,0,b+c;0,c,c]";
const T3: &str = "[0,a,b;c,c,b+c;0,c,c]";

#[test]
fn classify_primitive_dim3_gives_six_classes() {
    let o = run(&[
        "classify",
        "--n",
        "3",
        "--p",
        "3",
        "--dim",
        "3",
        "--predicate",
        "primitive",
        "--action",
        "equiv",
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).ends_with("6 classes\n"), "{}", stdout(&o));
}

#[test]
fn classify_edge_cases() {
    let o = run(&[
        "classify",
        "--n",
        "3",
        "--p",
        "3",
        "--dim",
        "1",
        "--predicate",
        "reduced",
    ]);
    assert!(stdout(&o).ends_with("0 classes\n"));
    let o = run(&[
        "classify",
        "--n",
        "3",
        "--p",
        "4",
        "--dim",
        "3",
        "--predicate",
        "primitive",
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).ends_with("0 classes\n"));
    let o = run(&["classify", "--n", "6", "--p", "6", "--dim", "1"]);
    assert_eq!(code(&o), 2);
    let o = run(&[
        "classify",
        "--n",
        "3",
        "--p",
        "3",
        "--dim",
        "2",
        "--predicate",
        "shiny",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn classify_json_lines() {
    let o = run(&[
        "classify",
        "--n",
        "3",
        "--p",
        "3",
        "--dim",
        "4",
        "--predicate",
        "rank-constant-2",
        "--output",
        "json",
    ]);
    assert_eq!(code(&o), 0);
    let lines: Vec<serde_json::Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(lines[0]["config"].is_object());
    let classes: Vec<_> = lines.iter().filter(|v| v["class"].is_number()).collect();
    assert_eq!(lines.last().unwrap()["classes"], classes.len());
    assert!(classes.iter().any(|c| c["n2"] == 4));
}

#[test]
fn equiv_modes() {
    let v3 = "[0,a,c+d;c,0,b;a+b,d,0]";
    let o = run(&["equiv", BEASLEY1, v3]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("equivalent\nP="), "{out}");

    let o = run(&["equiv", "--mode", "similar", T2, T3]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).ends_with("inequivalent\n"));

    let o = run(&["equiv", T2, T3, "--output", "json"]);
    assert_eq!(code(&o), 0);
    let last: serde_json::Value = serde_json::from_str(stdout(&o).lines().last().unwrap()).unwrap();
    assert_eq!(last["result"], "equivalent");

    let o = run(&["equiv", v3, v3]);
    assert!(stdout(&o).contains("P=1,0,0;0,1,0;0,0,1\nQ=1,0,0;0,1,0;0,0,1"));

    let o = run(&[
        "equiv",
        "--mode",
        "affine",
        "[1,a,b;c,1,b+c;0,c,1+c]",
        "[1,a,b;c,1+c,b+c;0,c,1+c]",
    ]);
    assert_eq!(code(&o), 0);
}

#[test]
fn usage_and_parse_errors_exit_2() {
    assert_eq!(code(&run(&["equiv", "[a,b", "[a]"])), 2);
    assert_eq!(code(&run(&["verify", "everything"])), 2);
    assert_eq!(code(&run(&["equiv", "[1,a;0,1]", "[1,a;0,1]"])), 2);
    assert_eq!(code(&run(&[])), 2);
}

#[test]
fn verify_spectrum_is_deterministic() {
    let a = run(&["verify", "spectrum", "--output", "json"]);
    let b = run(&["verify", "spectrum", "--output", "json"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let classes = stdout(&a)
        .lines()
        .filter(|l| l.contains("\"class\":\"computed\""))
        .count();
    assert_eq!(classes, 6);
    for l in stdout(&a).lines().skip(1) {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        assert_eq!(v["suite"], "spectrum");
    }
}

#[test]
fn config_header_reports_resolved_settings() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(BIN)
        .args(["verify", "affine", "--seed", "9", "--threads", "1"])
        .env("F2RANK2_CACHE", dir.path())
        .output()
        .unwrap();
    let head = stdout(&o).lines().next().unwrap().to_string();
    assert!(head.contains(&format!("cache_dir={}", dir.path().display())));
    assert!(head.contains("threads=1"));
    assert!(head.contains("seed=9"));

    let other = tempfile::tempdir().unwrap();
    let o = Command::new(BIN)
        .args(["verify", "affine", "--cache-dir"])
        .arg(other.path())
        .env("F2RANK2_CACHE", dir.path())
        .output()
        .unwrap();
    let head = stdout(&o).lines().next().unwrap().to_string();
    assert!(head.contains(&format!("cache_dir={}", other.path().display())));
}

fn count_records(dir: &Path) -> usize {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| std::fs::read_to_string(e.unwrap().path()).unwrap())
        .map(|t| t.lines().count().saturating_sub(1))
        .sum()
}

#[test]
fn cache_persists_and_warm_runs_match() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let cold = run(&["verify", "j3", "--cache-dir", d]);
    assert_eq!(code(&cold), 0);
    let records = count_records(dir.path());
    assert!(records > 0);
    let warm = run(&["verify", "j3", "--cache-dir", d]);
    assert_eq!(cold.stdout, warm.stdout);
    assert_eq!(count_records(dir.path()), records);

    let stats = run(&["cache", "stats", "--cache-dir", d]);
    assert_eq!(code(&stats), 0);
    assert!(stdout(&stats).contains("equiv-3x3.cache"));
    let cleared = run(&["cache", "clear", "--cache-dir", d]);
    assert!(stdout(&cleared).contains("removed"));
    assert_eq!(count_records(dir.path()), 0);
    assert_eq!(code(&run(&["cache", "stats"])), 2);
}

#[test]
fn catalog_listing_and_check() {
    let o = run(&["catalog", "V3", "--check"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("PASS"));
    let o = run(&["catalog", "--output", "json"]);
    let names: Vec<String> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["name"].to_string())
        .collect();
    assert!(names.iter().any(|n| n == "\"Mata3\""));
    assert_eq!(code(&run(&["catalog", "Nope"])), 2);
}

#[test]
fn corrupted_catalog_fails_verification() {
    let text = include_str!("../../core/assets/catalog.txt")
        .replace(
            "expect: dim=4,urk=2,primitive=true,rank_constant_2=true",
            "expect: dim=4,urk=2,primitive=true,rank_constant_2=false",
        )
        .replace("name: J3_dim2", "name: J3_plane");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("catalog.txt");
    std::fs::write(&path, text).unwrap();
    let p = path.to_str().unwrap();

    let o = run(&["verify", "all", "--catalog", p]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.contains("FAIL  catalog expectations"), "{out}");
    assert!(out.contains("rank_constant_2"));

    let o = run(&["catalog", "--check", "--catalog", p]);
    assert_eq!(code(&o), 1);

    std::fs::write(&path, "name: broken\nmatrix: [a,\n").unwrap();
    assert_eq!(code(&run(&["verify", "core", "--catalog", p])), 2);
}
