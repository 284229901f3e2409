use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use holotest::specio;
use holotest_core::model::*;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/agc")
}

fn fixture(name: &str) -> String {
    fixtures().join(name).display().to_string()
}

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn holotest(args: &[&str], cwd: &Path) -> Out {
    let o = Command::new(env!("CARGO_BIN_EXE_holotest"))
        .args(args)
        .current_dir(cwd)
        .env_remove("HOLOTEST_TAXONOMY")
        .output()
        .unwrap();
    Out {
        code: o.status.code().unwrap(),
        stdout: String::from_utf8(o.stdout).unwrap(),
        stderr: String::from_utf8(o.stderr).unwrap(),
    }
}

fn map_fixture(dir: &Path, extra: &[&str]) -> Out {
    let tc = fixture("test_case.holo.json");
    let st = fixture("subtest_set.holo.json");
    let (a, b, c) = (fixture("lab_a.holo.json"), fixture("lab_b.holo.json"), fixture("lab_c.holo.json"));
    let mut args = vec!["map", &tc, &st, &a, &b, &c];
    args.extend_from_slice(extra);
    holotest(&args, dir)
}

fn tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn fixtures_validate() {
    let dir = tempfile::tempdir().unwrap();
    let mut paths: Vec<String> = fs::read_dir(fixtures())
        .unwrap()
        .map(|e| e.unwrap().path().display().to_string())
        .collect();
    paths.sort();
    paths.push(format!("{}/data/taxonomy.holo.json", env!("CARGO_MANIFEST_DIR")));
    let mut args = vec!["validate"];
    args.extend(paths.iter().map(String::as_str));
    let out = holotest(&args, dir.path());
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stderr.contains("7 document(s) valid"), "{}", out.stderr);
}

#[test]
fn invalid_scope_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let bytes = fs::read(fixtures().join("test_case.holo.json")).unwrap();
    let (mut tc, _) = specio::parse_as::<HolisticTestCase>(&bytes).unwrap();
    tc.scope.fui.push("f_local_der_control_missing".into());
    if let Some(ScSource::Ref(r)) = &mut tc.system_configuration {
        r.path = fixture("system_configuration.holo.json");
    }
    let path = dir.path().join("bad.holo.json");
    fs::write(&path, specio::to_bytes(&tc)).unwrap();
    let out = holotest(&["validate", path.to_str().unwrap()], dir.path());
    assert_eq!(out.code, 1, "{}", out.stderr);
    assert!(out.stderr.contains("E_FUI_NOT_IN_FUT"), "{}", out.stderr);
}

#[test]
fn json_mode_emits_diagnostic_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.holo.json");
    fs::write(&path, "{\"kind\": \"ri_profile\",\n  \"id\": ").unwrap();
    let out = holotest(&["--json", "validate", path.to_str().unwrap()], dir.path());
    assert_eq!(out.code, 1);
    let line: serde_json::Value = serde_json::from_str(out.stderr.lines().next().unwrap()).unwrap();
    assert_eq!(line["code"], "E_SYNTAX");
    assert!(line["line"].is_u64());
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(holotest(&["validate", "--frobnicate", "x"], dir.path()).code, 64);
    assert_eq!(holotest(&["explode"], dir.path()).code, 64);
    assert_eq!(holotest(&["run", "p.json", "--workspace", "w", "--jobs", "0"], dir.path()).code, 64);
    let help = holotest(&["--help"], dir.path());
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("validate"));
}

#[test]
fn infeasible_mapping_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let tc = fixture("test_case.holo.json");
    let st = fixture("subtest_set.holo.json");
    let (b, c) = (fixture("lab_b.holo.json"), fixture("lab_c.holo.json"));
    let out = holotest(&["map", &tc, &st, &b, &c], dir.path());
    assert_eq!(out.code, 2, "{}", out.stderr);
    assert!(out.stderr.contains("E_INFEASIBLE") && out.stderr.contains("st1"), "{}", out.stderr);
    assert!(!dir.path().join("plan.holo.json").exists());
}

#[test]
fn lambda_does_not_change_fixture_assignment() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(map_fixture(dir.path(), &["-o", "a.json"]).code, 0);
    assert_eq!(map_fixture(dir.path(), &["-o", "b.json", "--lambda", "10"]).code, 0);
    let read = |f: &str| specio::parse_as::<MappingPlan>(&fs::read(dir.path().join(f)).unwrap()).unwrap().0;
    let (a, b) = (read("a.json"), read("b.json"));
    assert_eq!(a.assignment, b.assignment);
    assert_eq!(a.assignment["st1"], "lab_A");
    assert_eq!(a.assignment["st2"], "lab_B");
    assert_eq!(a.total_cost, 4.0);
    assert_eq!(b.lambda, 10.0);

    let out = holotest(&["plan", "a.json"], dir.path());
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stderr.contains("stage 0: st1") && out.stderr.contains("stage 1: st2"), "{}", out.stderr);
}

#[test]
fn failed_record_makes_report_incomplete() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(map_fixture(dir.path(), &[]).code, 0);
    let run = holotest(&["run", "plan.holo.json", "--workspace", "ws"], dir.path());
    assert_eq!(run.code, 0, "{}", run.stderr);
    let sweep = holotest(&["sweep", "--workspace", "ws"], dir.path());
    assert_eq!(sweep.code, 0, "{}", sweep.stderr);
    let ok = holotest(&["report", "--workspace", "ws"], dir.path());
    assert_eq!(ok.code, 0, "{}", ok.stderr);

    let result = dir.path().join("ws/agc_split_plan/st2/0/result.holo.json");
    let (mut rs, _) = specio::parse_as::<ResultSet>(&fs::read(&result).unwrap()).unwrap();
    rs.records[0].status = RecordStatus::Failed;
    rs.records[0].metrics.clear();
    rs.records[0].message = Some("bench tripped".into());
    fs::write(&result, specio::to_bytes(&rs)).unwrap();

    let out = holotest(&["report", "--workspace", "ws"], dir.path());
    assert_eq!(out.code, 3, "{}", out.stderr);
    assert!(out.stderr.contains("W_INCOMPLETE"), "{}", out.stderr);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(map_fixture(dir.path(), &[]).code, 0);
    for (ws, jobs) in [("w1", "1"), ("w2", "4"), ("w1", "1")] {
        let out = holotest(&["run", "plan.holo.json", "--workspace", ws, "--seed", "42", "--jobs", jobs], dir.path());
        assert_eq!(out.code, 0, "{}", out.stderr);
        let out = holotest(&["sweep", "--workspace", ws], dir.path());
        assert_eq!(out.code, 0, "{}", out.stderr);
        let out = holotest(&["--json", "report", "--workspace", ws], dir.path());
        assert_eq!(out.code, 0, "{}", out.stderr);
        assert!(out.stdout.starts_with('{'));
    }
    let (a, b) = (tree(&dir.path().join("w1")), tree(&dir.path().join("w2")));
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn taxonomy_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.holo.json");
    let o = Command::new(env!("CARGO_BIN_EXE_holotest"))
        .args(["validate", &fixture("subtest_set.holo.json")])
        .env("HOLOTEST_TAXONOMY", &missing)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.holo.json"));
}
