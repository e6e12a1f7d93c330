//! Judge three Python programs against the same testcases.

use codetrans::corpus::TestCase;
use codetrans::harness::{probe, Judge, ProcessJudge};
use codetrans::Language;

fn main() {
    let judge = ProcessJudge::with_defaults();
    let status = probe(judge.toolchain(Language::Python).unwrap());
    if !status.available {
        eprintln!("python toolchain missing: {}", status.missing.join(", "));
        std::process::exit(4);
    }
    let tests: Vec<TestCase> = [("2 3\n", "5\n"), ("10 -4\n", "6\n")]
        .iter()
        .enumerate()
        .map(|(index, (i, o))| TestCase {
            index,
            stdin: i.to_string(),
            expected_stdout: o.to_string(),
        })
        .collect();
    let programs = [
        ("correct", "a, b = map(int, input().split())\nprint(a + b)\n"),
        ("off by one", "a, b = map(int, input().split())\nprint(a + b + 1)\n"),
        ("syntax error", "a, b = map(int, input().split()\nprint(a + b)\n"),
    ];
    for (name, code) in programs {
        let report = judge.judge(code, Language::Python, &tests).unwrap();
        let outcomes: Vec<String> = report.per_testcase.iter().map(|t| format!("{:?}", t.outcome)).collect();
        println!(
            "{name:<13} {:<13} [{}]",
            report.verdict.to_string(),
            outcomes.join(", ")
        );
    }
}
