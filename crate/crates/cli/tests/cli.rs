use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_minimax-track"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn plan_prints_the_value_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plan.json");
    let o = run(&[
        "plan",
        "--scenario",
        scenario("tiny.toml").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("minimax value:"));
    assert!(out.exists());
}

#[test]
fn plan_reports_scenario_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "schema_version = 1\n[robot]\nstart = [0.0, 0.0]\n").unwrap();
    let o = run(&[
        "plan",
        "--scenario",
        bad.to_str().unwrap(),
        "--out",
        dir.path().join("p.json").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("[E004]"), "{}", stderr(&o));
}

#[test]
fn plan_refuses_an_overflowing_unpruned_tree() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("huge.toml");
    std::fs::write(
        &sc,
        "schema_version = 1\nhorizon = 40\n[robot]\nstart = [0.0, 0.0]\n[target]\nmean = [1.0, 1.0]\n[prune]\nalpha = false\nredundancy = false\n",
    )
    .unwrap();
    let o = run(&[
        "plan",
        "--scenario",
        sc.to_str().unwrap(),
        "--out",
        dir.path().join("p.json").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("overflow"), "{}", stderr(&o));
}

fn read_all(dir: &Path, files: &[&str]) -> Vec<Vec<u8>> {
    files
        .iter()
        .map(|f| std::fs::read(dir.join(f)).unwrap())
        .collect()
}

#[test]
fn simulate_is_bit_identical_across_runs() {
    let mut outputs = Vec::new();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let o = run(&[
            "simulate",
            "--scenario",
            scenario("default.toml").to_str().unwrap(),
            "--steps",
            "6",
            "--runs",
            "20",
            "--mode",
            "realistic",
            "--out-dir",
            d.path().to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push(read_all(d.path(), &["traces.csv", "summary.json"]));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn bench_is_bit_identical_across_runs() {
    let mut outputs = Vec::new();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let sweep = d.path().join("sweep.toml");
        std::fs::write(
            &sweep,
            "schema_version = 1\ndepths = [5, 7]\neps1 = [0.0, 0.5]\ntarget_samples = 3\n",
        )
        .unwrap();
        let out = d.path().join("bench.csv");
        let o = run(&[
            "bench",
            "--sweep",
            sweep.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push(read_all(d.path(), &["bench.csv", "bench.summary.csv"]));
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs[0][0].clone()).unwrap();
    assert!(text.lines().skip(1).all(|l| !l.is_empty()));
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 3);
}

#[test]
fn verify_lists_every_suite_and_catches_the_injected_fault() {
    let o = run(&["verify", "--seed", "1", "--count", "50"]);
    let text = stdout(&o);
    for suite in [
        "riccati_monotone",
        "oracle_equivalence",
        "eps1_sandwich",
        "eps2_sandwich",
        "psd_closure",
    ] {
        assert!(text.contains(suite), "{text}");
    }
    assert!(
        text.contains("PASS oracle_equivalence: 50 passed, 0 failed"),
        "{text}"
    );

    let o = run(&["verify", "--seed", "1", "--count", "200", "--inject-fault"]);
    assert!(!o.status.success());
    assert!(
        stdout(&o).contains("FAIL oracle_equivalence"),
        "{}",
        stdout(&o)
    );
}
