use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn heapguard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heapguard")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf-8")
}

#[test]
fn running_example_guards_in_every_domain() {
    let o = heapguard(&["analyze", &fixture("running.sir"), "--domain", "all"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lines: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    assert_eq!(
        lines,
        [
            "m [deep] conditional: pc=low & lev(b)=low & reach(b)=low & (lev(i)=low | !freach(b,a))",
            "m [shal] conditional: pc=low & lev(b)=low & lev(i)=low & reach(b)=low",
            "m [dumb] conditional: pc=low & lev(a)=low & lev(b)=low & lev(i)=low & reach(a)=low & reach(b)=low",
        ]
    );
    assert!(stderr(&o).contains("secure-always"));
}

#[test]
fn dnf_lists_one_cube_per_line() {
    let o = heapguard(&["analyze", &fixture("running.sir"), "--format", "dnf"]);
    let out = stdout(&o);
    let cubes: Vec<&str> = out.lines().filter(|l| l.starts_with("  ")).collect();
    assert_eq!(cubes.len(), 2, "{out}");
    assert!(cubes.iter().any(|c| c.contains("!freach(b,a)")));
}

#[test]
fn output_is_deterministic() {
    let args = ["analyze", &fixture("running.sir"), &fixture("implicit.sir"), "--domain", "all", "--jobs", "3"];
    let a = heapguard(&args);
    let b = heapguard(&args);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn high_only_method_is_secure_always() {
    let o = heapguard(&["analyze", &fixture("high_only.sir")]);
    assert_eq!(stdout(&o).trim(), "h [deep] secure-always: true");
}

#[test]
fn malformed_input_exits_2() {
    for f in ["dup_label.sir", "mesh.sir"] {
        let o = heapguard(&["analyze", &fixture(f)]);
        assert_eq!(o.status.code(), Some(2), "{f}: {}", stderr(&o));
    }
    assert_eq!(heapguard(&["analyze", "/nonexistent.sir"]).status.code(), Some(2));
}

#[test]
fn calls_need_a_summary() {
    let o = heapguard(&["analyze", &fixture("calls.sir")]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("Log.write"));

    let o = heapguard(&["analyze", &fixture("calls.sir"), "--stubs", &fixture("log_stubs.json")]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("lev(g)=low"));

    let o = heapguard(&["analyze", &fixture("calls.sir"), "--assume-worst"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("c [deep]"));
}

#[test]
fn validate_reports_valid_scfgs() {
    let o = heapguard(&["validate", &fixture("running.sir"), "--domain", "all"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.contains(" valid: ")).count(), 3, "{out}");
}

#[test]
fn ni_suite_passes_on_inferred_guards() {
    let o = heapguard(&["xcheck", "--suite", "ni", "--program", &fixture("implicit.sir"), "--domain", "all"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.ends_with("PASS")).count(), 3);
}

#[test]
fn inductive_suite_catches_level_mutant() {
    let o = heapguard(&["xcheck", "--suite", "inductive", "--refs", "2", "--domain", "shal", "--mutant", "copy-skip-level"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn abstraction_suite_prints_reproducer() {
    let o = heapguard(&["xcheck", "--suite", "abstraction", "--mutant", "drop-fieldalias", "--trials", "300"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("reproducer"), "{out}");
    assert!(out.contains("method repro("), "{out}");
}

#[test]
fn unknown_mutant_is_a_usage_error() {
    let o = heapguard(&["xcheck", "--suite", "inductive", "--mutant", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_round_trips_json_and_writes_csv() {
    let dir = std::env::temp_dir().join(format!("heapguard-report-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let doc = dir.join("run.json");
    let csv = dir.join("run.csv");
    let o = heapguard(&["analyze", &fixture("running.sir"), "--domain", "all", "--format", "json"]);
    assert!(o.status.success());
    std::fs::write(&doc, &o.stdout).unwrap();
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json["guards"].as_array().unwrap().len(), 3);

    let o = heapguard(&["report", doc.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("deep"));
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().next(), Some("method,domain,refcount,statebits,millis,class"));
    assert_eq!(rows.lines().count(), 4);
    std::fs::remove_dir_all(&dir).ok();
}
