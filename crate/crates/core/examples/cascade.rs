//! A three-stage comment-on-failure cascade over synthetic samples, with a
//! scripted model and a marker-reading judge, followed by its report.

use codetrans::analysis::{emit_report, load_run_dir, MetricsBundle, ReportFormat};
use codetrans::corpus::{CodeSample, Origin, TestCase};
use codetrans::harness::Verdict;
use codetrans::orchestrator::{run_cascade, CascadeConfig, LanguagePair, RunDir, StageSpec};
use codetrans::sim::{self, fenced, MarkerJudge, ScriptedModel, SimTask};
use codetrans::Language;

fn samples(n: usize) -> Vec<CodeSample> {
    (0..n)
        .map(|i| {
            CodeSample::new(
                format!("s{i:02}"),
                Origin::Custom,
                Language::Python,
                format!("n = int(input())\nk = {i}\nprint(n + k)\n"),
                vec![TestCase {
                    index: 0,
                    stdin: "1\n".into(),
                    expected_stdout: format!("{}\n", i + 1),
                }],
            )
        })
        .collect()
}

fn main() {
    // stage 0 fixes every third sample, comments from D fix k % 3 == 1,
    // comments from G fix half of the rest
    let model = ScriptedModel::new(|r| {
        let k: usize = r
            .code
            .split("k = ")
            .nth(1)
            .and_then(|s| s.lines().next())
            .unwrap()
            .parse()
            .unwrap();
        match r.task {
            SimTask::CommentGen => Ok(fenced(
                &sim::comment_lines(&r.code, Language::Python, 1, &format!("by {}", r.endpoint)),
                Language::Python,
            )),
            SimTask::Translate => {
                let ok = if r.code.contains("# by G") {
                    k.is_multiple_of(2)
                } else if r.code.contains("# by D") {
                    k % 3 == 1
                } else {
                    k.is_multiple_of(3)
                };
                let v = if ok { Verdict::Success } else { Verdict::CompileFail };
                Ok(fenced(
                    &format!("class Main {{}}\n{}", sim::verdict_marker(v, Language::Java)),
                    Language::Java,
                ))
            }
            _ => Err("unsupported".into()),
        }
    });
    let gw = sim::scripted_gateway(&["T", "D", "G"], model.clone());
    let cfg = CascadeConfig {
        translator: "T".into(),
        stages: vec![
            StageSpec::uncommented("U"),
            StageSpec::commented("D", "D"),
            StageSpec::commented("G", "G"),
        ],
        pairs: vec![LanguagePair {
            source: Language::Python,
            target: Language::Java,
        }],
        fidelity_gate: true,
        workers: 4,
    };
    let dir = tempfile::tempdir().unwrap();
    let run_dir = RunDir::create(dir.path()).unwrap();
    let run = run_cascade(&samples(24), &gw, &MarkerJudge::new(), &cfg, Some(&run_dir), None).unwrap();
    for s in &run.result.stages {
        println!(
            "stage {} {:<2} attempted {:>2}  new {:>2}  cumulative {:>2}  commenting calls {:>2}",
            s.index, s.label, s.attempted, s.new_successes, s.cumulative_successes, s.commenting_calls
        );
    }
    println!("model calls: {}\n", model.calls());

    let data = load_run_dir(dir.path()).unwrap();
    let bundle = MetricsBundle::from_runs(&[data]);
    let out = dir.path().join("report");
    emit_report(&bundle, &out, &[ReportFormat::Text]).unwrap();
    print!("{}", std::fs::read_to_string(out.join("report.txt")).unwrap());
}
