mod common;

use std::fs;

use codetrans::cli::{EXIT_CONFIG, EXIT_ENVIRONMENT, EXIT_GATEWAY, EXIT_NEGATIVE, EXIT_OK, EXIT_USAGE, REPORT_DIR};
use common::*;

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn judge_prints_the_verdict() {
    let dir = fixtures().join("verdicts/python");
    let (code, out, _) = run_cli(&["judge", path(&dir.join("correct/main.py"))]);
    assert_eq!((code, out.trim()), (EXIT_OK, "Success"));
    let (code, out, _) = run_cli(&["judge", path(&dir.join("wrong_output/main.py"))]);
    assert_eq!((code, out.trim()), (EXIT_NEGATIVE, "TestcaseFail"));
    let (code, out, _) = run_cli(&["judge", "--json", path(&dir.join("syntax_error/main.py"))]);
    assert_eq!(code, EXIT_NEGATIVE);
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["verdict"], "CompileFail");
    assert_eq!(report["per_testcase"].as_array().unwrap().len(), 0);
}

#[test]
fn judge_needs_testcases() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("main.py");
    fs::write(&file, "print(1)\n").unwrap();
    let (code, _, err) = run_cli(&["judge", path(&file)]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("testcases"), "{err}");
}

#[test]
fn env_check_flags_a_missing_toolchain() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("env.toml");
    fs::write(
        &cfg,
        r#"
[[toolchains]]
pl = "Go"
compile_cmd = "no-such-go-compiler-here build -o {bin} {src}"
run_cmd = "{bin}"
source_name_rule = { rule = "fixed", file = "main.go" }
compile_timeout_s = 30
run_timeout_s = 10
memory_limit_mb = 512
"#,
    )
    .unwrap();
    let (code, out, _) = run_cli(&["--config", path(&cfg), "env-check"]);
    assert_eq!(code, EXIT_ENVIRONMENT, "{out}");
    let go = out.lines().find(|l| l.starts_with("Go")).unwrap();
    assert!(
        go.contains("MISSING") && go.contains("no-such-go-compiler-here"),
        "{go}"
    );
    assert!(out.lines().filter(|l| l.contains(" ok ")).count() >= 4, "{out}");
}

#[test]
fn strip_then_density_is_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("a.c");
    fs::write(&src, "// add\nint add(int a, int b) {\n  return a + b; /* sum */\n}\n").unwrap();
    let (code, out, _) = run_cli(&["density", path(&src)]);
    assert_eq!(code, EXIT_OK);
    assert!(out.trim_end().ends_with("\t0.5000"), "{out}");
    let stripped = tmp.path().join("b.c");
    let (code, _, _) = run_cli(&["strip-comments", path(&src), "-o", path(&stripped)]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(
        fs::read_to_string(&stripped).unwrap(),
        "int add(int a, int b) {\n  return a + b;\n}\n"
    );
    let (_, out, _) = run_cli(&["density", path(&stripped)]);
    assert!(out.trim_end().ends_with("\t0.0000"), "{out}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run_cli(&["no-such-command"]).0, EXIT_USAGE);
    assert_eq!(run_cli(&["comment", "x.py"]).0, EXIT_USAGE);
    assert_eq!(run_cli(&["--help"]).0, EXIT_OK);
}

#[test]
fn replay_mode_rejects_real_endpoints() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(
        &cfg,
        r#"
replay = true
replay_script = "nothing.jsonl"

[[endpoints]]
id = "live"
base_url = "https://api.example.invalid/v1"
model_name = "m"
"#,
    )
    .unwrap();
    let src = fixtures().join("verdicts/python/correct/main.py");
    let (code, _, err) = run_cli(&[
        "--config",
        path(&cfg),
        "translate",
        path(&src),
        "--to",
        "Java",
        "--translator",
        "live",
    ]);
    assert_eq!(code, EXIT_CONFIG, "{err}");
}

#[test]
fn translate_is_served_from_the_replay_script() {
    let cfg = golden_dir().join("run.toml");
    let src = fixtures().join("mini-corpus/java-sum/main.java");
    let (code, out, err) = run_cli(&[
        "--config",
        path(&cfg),
        "translate",
        path(&src),
        "--to",
        "Python",
        "--translator",
        "gpt",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let expected = fs::read_to_string(golden_dir().join("translations/java-sum.base.py")).unwrap();
    assert_eq!(out.trim_end(), expected.trim_end());

    // a prompt that was never recorded is a gateway failure, not a network call
    let (code, _, err) = run_cli(&[
        "--config",
        path(&cfg),
        "translate",
        path(&src),
        "--to",
        "Go",
        "--translator",
        "gpt",
    ]);
    assert_eq!(code, EXIT_GATEWAY, "{err}");
}

#[test]
fn validate_corpus_prints_declared_statistics() {
    let corpus = fixtures().join("mini-corpus");
    let (code, out, err) = run_cli(&["--corpus", path(&corpus), "validate-corpus", "--stats-only"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let java = out.lines().find(|l| l.starts_with("Java")).unwrap();
    assert!(java.contains("13-17"), "{java}");
    assert!(out.contains("15"), "{out}");
}

#[test]
fn report_rerenders_a_run_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let run = tmp.path().join("run");
    let (code, err) = golden_cli_run(&run);
    assert_eq!(code, EXIT_OK, "{err}");
    let again = tmp.path().join("again");
    let (code, _, err) = run_cli(&["--format", "json,csv,txt", "report", path(&run), "--out", path(&again)]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(report_files(&again), report_files(&run.join(REPORT_DIR)));
}
