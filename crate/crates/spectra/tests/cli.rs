//! CLI contract tests: exit codes, the empty-region path, and ablation
//! resume behavior.

use std::path::Path;
use std::process::Output;

fn spectra(args: &[&str], cwd: &Path) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_spectra"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn write_planted_inputs(root: &Path) {
    std::fs::write(
        root.join("rules.json"),
        r#"{
            "bounds": [{"lo": 0.0, "hi": 1.0}, {"lo": 0.0, "hi": 1.0}],
            "alphabet": ["a", "b", "c"],
            "noise_rate": 0.0,
            "references": [
                {"id": "r1", "rules": [{"rect": [{"lo": 0.0, "hi": 0.5}, {"lo": 0.0, "hi": 1.0}], "allowed": ["a"], "priority": 1}]},
                {"id": "r2", "rules": [{"rect": [{"lo": 0.0, "hi": 0.5}, {"lo": 0.0, "hi": 1.0}], "allowed": ["a"], "priority": 1}]}
            ]
        }"#,
    )
    .unwrap();
}

#[test]
fn missing_trace_directory_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = spectra(
        &["simulate", "--abr", "bb", "--traces", "no-such-dir", "--out", "logs"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn invalid_threshold_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    write_planted_inputs(dir.path());
    let sim = spectra(
        &["simulate", "--planted", "rules.json", "--n", "200", "--out", "logs"],
        dir.path(),
    );
    assert!(sim.status.success());
    let out = spectra(
        &[
            "mine",
            "--schema",
            "logs/schema.json",
            "--logs",
            "logs",
            "--tau-rep",
            "0",
            "--parts",
            "10",
            "--out",
            "specs.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("tau_rep"), "stderr: {stderr}");
}

#[test]
fn missing_spec_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    write_planted_inputs(dir.path());
    let sim = spectra(
        &["simulate", "--planted", "rules.json", "--n", "100", "--out", "logs"],
        dir.path(),
    );
    assert!(sim.status.success());
    let out = spectra(
        &[
            "eval",
            "--specs",
            "missing.json",
            "--schema",
            "logs/schema.json",
            "--logs",
            "logs",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_with_disjoint_feature_schema_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    write_planted_inputs(dir.path());
    assert!(spectra(
        &["simulate", "--planted", "rules.json", "--n", "500", "--out", "logs"],
        dir.path(),
    )
    .status
    .success());
    assert!(spectra(
        &[
            "mine", "--schema", "logs/schema.json", "--logs", "logs",
            "--tau-max", "1", "--parts", "10", "--out", "specs.json",
        ],
        dir.path(),
    )
    .status
    .success());
    // A second schema renames the feature columns; the logs still parse
    // but the feature space no longer matches the specification set.
    std::fs::write(
        dir.path().join("other_schema.json"),
        r#"{
            "feature_columns": ["x1", "x0"],
            "output_column": "label",
            "trace_column": "trace",
            "step_column": "step",
            "alphabet": ["a", "b", "c"]
        }"#,
    )
    .unwrap();
    let out = spectra(
        &[
            "eval", "--specs", "specs.json", "--schema", "other_schema.json",
            "--logs", "logs",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("do not match"), "stderr: {stderr}");
}

#[test]
fn unknown_subcommand_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = spectra(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_interesting_table_exits_0_with_empty_set() {
    let dir = tempfile::tempdir().unwrap();
    // One reference emitting both labels at interleaved nearby points:
    // every region sees the full alphabet, so nothing is interesting.
    let mut csv = String::from("trace,step,x,y\n");
    for i in 0..200 {
        let jitter = (i % 5) as f64 * 1e-4;
        csv.push_str(&format!(
            "t0,{i},{},{}\n",
            0.5 + jitter,
            if i % 2 == 0 { "a" } else { "b" }
        ));
    }
    std::fs::write(dir.path().join("r1.csv"), csv).unwrap();
    std::fs::write(
        dir.path().join("schema.json"),
        r#"{
            "feature_columns": ["x"],
            "output_column": "y",
            "trace_column": "trace",
            "alphabet": ["a", "b"]
        }"#,
    )
    .unwrap();
    let out = spectra(
        &[
            "mine",
            "--schema",
            "schema.json",
            "--logs",
            "r1.csv",
            "--tau-max",
            "1",
            "--parts",
            "4",
            "--out",
            "specs.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("interesting regions: 0"), "stdout: {stdout}");
    let set = spectra::jsonio::load_spec_set(&dir.path().join("specs.json")).unwrap();
    assert!(set.is_empty());
}

#[test]
fn ablation_resume_skips_completed_rows() {
    let dir = tempfile::tempdir().unwrap();
    write_planted_inputs(dir.path());
    let sim = spectra(
        &["simulate", "--planted", "rules.json", "--n", "1000", "--out", "logs"],
        dir.path(),
    );
    assert!(sim.status.success());
    std::fs::write(
        dir.path().join("grid.json"),
        r#"{"tau_rep": [0.05, 0.1], "tau_max": [1]}"#,
    )
    .unwrap();
    let run = |_label: &str| {
        spectra(
            &[
                "ablate",
                "--schema",
                "logs/schema.json",
                "--logs",
                "logs",
                "--grid",
                "grid.json",
                "--parts",
                "10",
                "--out",
                "grid.csv",
            ],
            dir.path(),
        )
    };
    let first = run("first");
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let after_first = std::fs::read(dir.path().join("grid.csv")).unwrap();
    let lines = after_first.split(|&b| b == b'\n').filter(|l| !l.is_empty()).count();
    assert_eq!(lines, 3, "header plus two rows");

    let second = run("second");
    assert!(second.status.success());
    let stdout = String::from_utf8_lossy(&second.stdout);
    assert!(stdout.contains("resuming: 2 completed rows skipped"), "stdout: {stdout}");
    let after_second = std::fs::read(dir.path().join("grid.csv")).unwrap();
    assert_eq!(after_first, after_second, "resume must not duplicate rows");
}
