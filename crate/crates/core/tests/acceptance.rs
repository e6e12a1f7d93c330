//! Acceptance criteria, one pass/fail line each. Runs without the libtest
//! harness so the lines are printed even when output capture is on.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use codetrans::analysis::{
    compute_gain, compute_intent_stats, compute_overlaps, compute_transitions, Rate, RATE_DECIMALS,
};
use codetrans::corpus::{self, CodeSample, DeclaredStats, Lineage, Origin, TestCase};
use codetrans::gateway::IntentLabel;
use codetrans::harness::{probe, Bucket, ExecutionReport, Judge, ProcessJudge, Verdict};
use codetrans::orchestrator::{
    run_cascade, AttemptRecord, AttemptStatus, CascadeConfig, ClassifiedComment, LanguagePair, RunDir, StageSpec,
};
use codetrans::sim::{self, fenced, MarkerJudge, ScriptedModel, SimRequest, SimTask};
use codetrans::surface;
use codetrans::Language;
use common::*;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// 1 -----------------------------------------------------------------------

fn expected_verdict(case: &str) -> Verdict {
    match case {
        "correct" => Verdict::Success,
        "syntax_error" => Verdict::CompileFail,
        "wrong_output" => Verdict::TestcaseFail,
        "infinite_loop" => Verdict::Timeout,
        "out_of_bounds" => Verdict::RuntimeError,
        other => panic!("unexpected verdict fixture {other}"),
    }
}

fn harness_verdicts() -> Check {
    let started = Instant::now();
    // timeouts are wall-clock, so oversubscribing a small machine is fine
    let judge = ProcessJudge::with_defaults().max_processes(8);
    for pl in Language::ALL {
        let st = probe(judge.toolchain(pl).unwrap());
        ensure(st.available, || {
            format!("{pl} toolchain missing: {}", st.missing.join(", "))
        })?;
    }
    let root = fixtures().join("verdicts");
    let mut cases = Vec::new();
    for pl in Language::ALL {
        let dir = root.join(pl.key());
        let mut names: Vec<String> = std::fs::read_dir(&dir)
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        names.sort();
        ensure(names.len() >= 4, || format!("{pl}: only {} programs", names.len()))?;
        for n in names {
            cases.push((pl, n));
        }
    }
    // judging mostly waits on child processes, so one thread per program
    let failures: Vec<String> = std::thread::scope(|scope| {
        let handles: Vec<_> = cases
            .iter()
            .map(|(pl, case)| {
                let (judge, root) = (&judge, &root);
                scope.spawn(move || {
                    let dir = root.join(pl.key()).join(case);
                    let code = std::fs::read_to_string(dir.join(format!("main.{}", pl.extension()))).unwrap();
                    let tcs = corpus::read_testcases(&dir).unwrap();
                    let got = judge.judge(&code, *pl, &tcs).map(|r| r.verdict);
                    let want = expected_verdict(case);
                    (got.as_ref().ok() != Some(&want)).then(|| format!("{pl}/{case}: {got:?}, want {want:?}"))
                })
            })
            .collect();
        handles.into_iter().filter_map(|h| h.join().unwrap()).collect()
    });
    ensure(failures.is_empty(), || failures.join("; "))?;
    let took = started.elapsed();
    ensure(took < Duration::from_secs(180), || format!("suite took {took:?}"))?;
    Ok(format!(
        "{} programs judged as expected in {:.1}s",
        cases.len(),
        took.as_secs_f64()
    ))
}

// 2 -----------------------------------------------------------------------

/// Percent gain in integer hundredths, computed independently in floating
/// point.
fn oracle_gain_hundredths(base: u64, variant: u64) -> i64 {
    ((variant as f64 - base as f64) / base as f64 * 10_000.0).round() as i64
}

fn gain_arithmetic() -> Check {
    let rate = |s| Rate::new(s, 200);
    let base = rate(152);
    ensure(base.render(2) == "0.76", || format!("baseline rate {}", base.render(2)))?;
    let mut lines = Vec::new();
    for s in [155, 161, 113] {
        let g = compute_gain(base, rate(s));
        let exact = g.exact.unwrap().scaled(2) as i64;
        let rounded = g.rounded_rate.unwrap().scaled(2) as i64;
        let oracle = oracle_gain_hundredths(152, s);
        ensure(exact == oracle, || format!("{s}/200: exact {exact} vs oracle {oracle}"))?;
        ensure((rounded - oracle).abs() <= 1, || {
            format!("{s}/200: rounded-rate {rounded} vs oracle {oracle}")
        })?;
        lines.push(format!("{} ({})", g.render(), g.render_rounded_rate()));
    }
    let drop = compute_gain(base, rate(113));
    ensure(drop.render() == "-25.66%", || format!("exact drop {}", drop.render()))?;
    let stated_drop = -2567;
    let rounded = drop.rounded_rate.unwrap().scaled(2) as i64;
    ensure((rounded - stated_drop).abs() <= 1, || {
        format!("rounded-rate drop {rounded} vs stated {stated_drop}")
    })?;
    let up = compute_gain(base, rate(155)).exact.unwrap().scaled(0);
    ensure(up == 2, || format!("DeepSeek gain rounds to {up}%, not 2%"))?;
    Ok(format!(
        "rate 0.76; gains {} (rate decimals {RATE_DECIMALS})",
        lines.join(", ")
    ))
}

// 3 -----------------------------------------------------------------------

fn attempt(id: &str, group: &str, verdict: Verdict) -> AttemptRecord {
    AttemptRecord {
        sample_id: id.into(),
        stage: 0,
        group: group.into(),
        lineage: Lineage::Base,
        source_pl: Language::Python,
        target_pl: Language::Java,
        translator: "t".into(),
        commenter: None,
        status: AttemptStatus::Judged,
        raw_output_ref: None,
        extracted_code: None,
        extraction_method: None,
        report: Some(ExecutionReport {
            verdict,
            per_testcase: Vec::new(),
            compile_diagnostics: String::new(),
            total_duration_ms: 0,
        }),
        exchange_refs: Vec::new(),
        wall_ms: 0,
    }
}

fn transition_conservation() -> Check {
    let counts = [
        (Bucket::Success, 1650usize),
        (Bucket::TestcaseFail, 733),
        (Bucket::CompileFail, 1889),
        (Bucket::Other, 128),
    ];
    let others = [Verdict::RuntimeError, Verdict::Timeout, Verdict::ExtractionFail];
    let all = [
        Verdict::Success,
        Verdict::TestcaseFail,
        Verdict::CompileFail,
        Verdict::RuntimeError,
        Verdict::Timeout,
        Verdict::ExtractionFail,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(4400);
    let (mut base, mut variant) = (Vec::new(), Vec::new());
    let mut n = 0;
    for (bucket, count) in counts {
        for _ in 0..count {
            let v = match bucket {
                Bucket::Success => Verdict::Success,
                Bucket::TestcaseFail => Verdict::TestcaseFail,
                Bucket::CompileFail => Verdict::CompileFail,
                Bucket::Other => others[rng.gen_range(0..others.len())],
            };
            let id = format!("s{n}");
            base.push(attempt(&id, "none", v));
            variant.push(attempt(&id, "gpt", all[rng.gen_range(0..all.len())]));
            n += 1;
        }
    }
    let m = compute_transitions(&base, &variant);
    for (bucket, count) in counts {
        let got = m.row_sum(bucket);
        ensure(got == count as u64, || {
            format!("{bucket:?} row sums to {got}, want {count}")
        })?;
    }
    ensure(m.total() == 4400, || format!("total {}", m.total()))?;
    ensure(m.unpaired == 0, || format!("{} unpaired", m.unpaired))?;
    let col_total: u64 = Bucket::ALL.iter().map(|&b| m.column_sum(b)).sum();
    ensure(col_total == 4400, || format!("columns total {col_total}"))?;
    Ok("rows 1650/733/1889/128, total 4400".into())
}

// 4 -----------------------------------------------------------------------

fn overlap_cardinalities() -> Check {
    let ids = |r: std::ops::Range<usize>| r.map(|i| format!("p{i:03}")).collect::<BTreeSet<_>>();
    // baseline p000-p128; GPT keeps 121 of them and adds 103; DeepSeek keeps 97 and adds 16
    let baseline = ids(0..129);
    let gpt: BTreeSet<String> = ids(0..121).into_iter().chain(ids(129..232)).collect();
    let ds: BTreeSet<String> = ids(8..105).into_iter().chain(ids(232..248)).collect();
    let sets: BTreeMap<String, BTreeSet<String>> = [("none", &baseline), ("gpt", &gpt), ("deepseek", &ds)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect();
    let r = compute_overlaps(&sets, "none").map_err(|e| e.to_string())?;
    let want_sizes = [("none", 129), ("gpt", 224), ("deepseek", 113)];
    for (k, n) in want_sizes {
        ensure(r.sizes[k] == n as u64, || format!("|{k}| = {}, want {n}", r.sizes[k]))?;
    }
    for (k, n, set) in [("gpt", 103, &gpt), ("deepseek", 16, &ds)] {
        let oracle = set.difference(&baseline).count();
        ensure(oracle == n, || format!("fixture: |{k} \\ none| = {oracle}"))?;
        ensure(r.added_value[k] == n as u64, || {
            format!("added value {k} = {}, want {n}", r.added_value[k])
        })?;
    }
    ensure(r.inclusion_exclusion_holds(), || "inclusion-exclusion fails".into())?;
    let union: BTreeSet<&String> = baseline.iter().chain(&gpt).chain(&ds).collect();
    let pair_sum: u64 = r.pairs.iter().map(|p| p.intersection).sum();
    let triple: u64 = r.triples.iter().map(|t| t.intersection).sum();
    let brute = 129 + 224 + 113 - pair_sum + triple;
    ensure(brute == union.len() as u64, || {
        format!("|A u B u C| {} vs {brute}", union.len())
    })?;
    Ok(format!(
        "|none|=129 |gpt|=224 (+103) |deepseek|=113 (+16), union {}",
        union.len()
    ))
}

// 5 -----------------------------------------------------------------------

fn trial_samples(n: usize) -> Vec<CodeSample> {
    (0..n)
        .map(|i| {
            CodeSample::new(
                format!("s{i}"),
                Origin::Custom,
                Language::Python,
                format!("n = int(input())\nname = \"s{i}\"\nprint(n + {i})\n"),
                vec![TestCase {
                    index: 0,
                    stdin: "1\n".into(),
                    expected_stdout: format!("{}\n", i + 1),
                }],
            )
        })
        .collect()
}

fn sample_index(code: &str) -> usize {
    let start = code.find("name = \"s").expect("sample marker") + 9;
    code[start..].split('"').next().unwrap().parse().unwrap()
}

/// Per-trial script: translation success per (sample, stage) and whether
/// the commenter alters code in its first and strict attempts.
struct TrialScript {
    ok: Vec<[bool; 3]>,
    mangle: Vec<[(bool, bool); 3]>,
}

const STAGE_COMMENTERS: [&str; 3] = ["", "D", "G"];

fn stage_of(code: &str) -> usize {
    if code.contains("# by G") {
        2
    } else if code.contains("# by D") {
        1
    } else {
        0
    }
}

fn trial_model(script: Arc<TrialScript>, accepted: Arc<Mutex<BTreeSet<(usize, usize)>>>) -> Arc<ScriptedModel> {
    ScriptedModel::new(move |r: &SimRequest| {
        let i = sample_index(&r.code);
        match r.task {
            SimTask::CommentGen => {
                let stage = STAGE_COMMENTERS.iter().position(|c| *c == r.endpoint).unwrap();
                let (first, strict) = script.mangle[i][stage];
                let alter = if r.strict { strict } else { first };
                let mut code = sim::comment_lines(&r.code, Language::Python, 1, &format!("by {}", r.endpoint));
                if alter {
                    code = code.replace("int(input())", "int(input().strip())");
                } else {
                    accepted.lock().unwrap().insert((stage, i));
                }
                Ok(fenced(&code, Language::Python))
            }
            SimTask::Translate => {
                let v = if script.ok[i][stage_of(&r.code)] {
                    Verdict::Success
                } else {
                    Verdict::CompileFail
                };
                Ok(fenced(
                    &format!("x\n{}", sim::verdict_marker(v, Language::Java)),
                    Language::Java,
                ))
            }
            _ => Err("unsupported".into()),
        }
    })
}

fn cascade_config() -> CascadeConfig {
    CascadeConfig {
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
        workers: 2,
    }
}

fn one_trial(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(20..=32);
    let p_ok = [
        rng.gen_range(0.1..0.7),
        rng.gen_range(0.0..0.6),
        rng.gen_range(0.0..0.6),
    ];
    let p_mangle = rng.gen_range(0.0..0.5);
    let script = Arc::new(TrialScript {
        ok: (0..n).map(|_| [0, 1, 2].map(|k| rng.gen_bool(p_ok[k]))).collect(),
        mangle: (0..n)
            .map(|_| [0, 1, 2].map(|_| (rng.gen_bool(p_mangle), rng.gen_bool(p_mangle))))
            .collect(),
    });
    let accepted = Arc::new(Mutex::new(BTreeSet::new()));
    let model = trial_model(script.clone(), accepted.clone());
    let gw = sim::scripted_gateway(&["T", "D", "G"], model);
    let corpus = trial_samples(n);
    let cfg = cascade_config();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let rd = RunDir::create(dir.path()).map_err(|e| e.to_string())?;
    let run = run_cascade(&corpus, &gw, &MarkerJudge::new(), &cfg, Some(&rd), None).map_err(|e| e.to_string())?;
    let stages = &run.result.stages;
    let accepted = accepted.lock().unwrap();
    for k in 1..stages.len() {
        let (prev, cur) = (&stages[k - 1], &stages[k]);
        ensure(cur.cumulative_successes >= prev.cumulative_successes, || {
            format!("seed {seed}: cumulative fell at stage {k}")
        })?;
        let survivors = n - prev.cumulative_successes;
        let expected = survivors - cur.fidelity_exclusions;
        ensure(cur.commenting_calls == expected, || {
            format!(
                "seed {seed} stage {k}: {} commenting calls, want {expected}",
                cur.commenting_calls
            )
        })?;
        let by_model = accepted.iter().filter(|(s, _)| *s == k).count();
        ensure(by_model == cur.commenting_calls, || {
            format!(
                "seed {seed} stage {k}: model accepted {by_model}, summary {}",
                cur.commenting_calls
            )
        })?;
    }
    let idle = ScriptedModel::new(|_| Err("resume must not call the model".into()));
    let gw2 = sim::scripted_gateway(&["T", "D", "G"], idle.clone());
    let judge2 = MarkerJudge::new();
    let again = run_cascade(&corpus, &gw2, &judge2, &cfg, Some(&rd), None).map_err(|e| e.to_string())?;
    ensure(idle.calls() == 0, || {
        format!("seed {seed}: resume made {} calls", idle.calls())
    })?;
    ensure(again.result == run.result, || {
        format!("seed {seed}: resumed result differs")
    })?;
    Ok(())
}

fn cascade_properties() -> Check {
    let failures = AtomicUsize::new(0);
    let first: Mutex<Option<String>> = Mutex::new(None);
    let pool = rayon::ThreadPoolBuilder::new()
        .stack_size(16 << 20)
        .build()
        .map_err(|e| e.to_string())?;
    pool.install(|| {
        (0..1000u64).into_par_iter().for_each(|seed| {
            if let Err(e) = one_trial(seed) {
                failures.fetch_add(1, Ordering::SeqCst);
                first.lock().unwrap().get_or_insert(e);
            }
        })
    });
    let failed = failures.into_inner();
    ensure(failed == 0, || {
        format!(
            "{failed}/1000 trials failed, first: {}",
            first.into_inner().unwrap().unwrap_or_default()
        )
    })?;
    Ok("1000/1000 trials monotone, call accounting exact, resume idle".into())
}

// 6 -----------------------------------------------------------------------

fn lexical_oracle() -> Check {
    let root = fixtures().join("lexical");
    let mut total = 0;
    let mut langs = BTreeSet::new();
    for pl in Language::ALL {
        let dir = root.join(pl.key());
        let Ok(entries) = std::fs::read_dir(&dir) else {
            continue;
        };
        for e in entries {
            let path = e.unwrap().path();
            let code = std::fs::read_to_string(&path).unwrap();
            let name = path.display();
            let stripped = surface::strip_comments(&code, pl).map_err(|e| format!("{name}: {e}"))?;
            let a = surface::lex_normalize(&code, pl).map_err(|e| format!("{name}: {e}"))?;
            let b = surface::lex_normalize(&stripped, pl).map_err(|e| format!("{name}: {e}"))?;
            ensure(a == b, || {
                format!("{name}: token streams differ at {:?}", a.first_difference(&b))
            })?;
            let twice = surface::strip_comments(&stripped, pl).map_err(|e| format!("{name}: {e}"))?;
            ensure(twice == stripped, || format!("{name}: strip is not idempotent"))?;
            let left = surface::scan_comments(&stripped, pl).map_err(|e| format!("{name}: {e}"))?;
            ensure(left.is_empty(), || format!("{name}: {} comments survive", left.len()))?;
            total += 1;
            langs.insert(pl);
        }
    }
    ensure(total >= 100, || format!("only {total} programs"))?;
    ensure(langs.len() == 5, || format!("only {} languages", langs.len()))?;
    Ok(format!("{total} programs over 5 languages"))
}

// 7 -----------------------------------------------------------------------

fn golden_end_to_end() -> Check {
    let expected = report_files(&golden_dir().join("expected"));
    ensure(!expected.is_empty(), || "no expected reports".into())?;
    let mut runs = Vec::new();
    for _ in 0..2 {
        let out = tempfile::tempdir().map_err(|e| e.to_string())?;
        let (code, err) = golden_cli_run(out.path());
        ensure(code == 0, || format!("run-cascade exited {code}: {err}"))?;
        runs.push(report_files(&out.path().join(codetrans::cli::REPORT_DIR)));
    }
    ensure(runs[0] == runs[1], || "repeated runs differ".into())?;
    for (name, bytes) in &expected {
        let got = runs[0].iter().find(|(n, _)| n == name);
        ensure(got.map(|g| &g.1) == Some(bytes), || {
            format!("{name} differs from the golden copy")
        })?;
    }
    ensure(runs[0].len() == expected.len(), || "report file sets differ".into())?;
    Ok(format!(
        "{} report files byte-identical across 2 runs and the golden copy",
        expected.len()
    ))
}

// 8 -----------------------------------------------------------------------

fn intent_statistics() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1532);
    let mut comments = Vec::new();
    for i in 0..1532usize {
        let words = if i < 29563 - 19 * 1532 { 20 } else { 19 };
        let text = vec!["word"; words].join(" ");
        let labels: Vec<IntentLabel> = IntentLabel::ALL.into_iter().filter(|_| rng.gen_bool(0.3)).collect();
        comments.push(ClassifiedComment {
            sample_id: format!("s{}", i / 4),
            source: "author".into(),
            start_line: i % 4,
            words: codetrans::orchestrator::comment_words(&text),
            text,
            labels,
            error: None,
        });
    }
    let total: usize = comments.iter().map(|c| c.text.split(' ').count()).sum();
    ensure(total == 29563, || format!("fixture totals {total} words"))?;
    let stats = compute_intent_stats(&comments);
    let s = &stats.per_source["author"];
    ensure(s.comment_count == 1532 && s.total_words == 29563, || {
        format!("{} comments, {} words", s.comment_count, s.total_words)
    })?;
    ensure(s.avg_words_rendered() == "19.30", || {
        format!("avg {}", s.avg_words_rendered())
    })?;
    for l in IntentLabel::ALL {
        let brute = comments.iter().filter(|c| c.labels.contains(&l)).count() as u64;
        ensure(s.histogram[&l] == brute, || {
            format!("{l:?}: {} vs {brute}", s.histogram[&l])
        })?;
    }
    let multi = comments.iter().filter(|c| c.labels.len() >= 2).count() as u64;
    ensure(s.multi_label == multi, || {
        format!("multi-label {} vs {multi}", s.multi_label)
    })?;
    Ok(format!(
        "avg {} words/comment, {} multi-label",
        s.avg_words_rendered(),
        multi
    ))
}

// 9 -----------------------------------------------------------------------

/// Table 1 shape: (language, origin, samples, min LOC, max LOC, avg testcases).
const TABLE1: [(Language, Origin, usize, usize, usize, u64); 5] = [
    (Language::Java, Origin::Avatar, 250, 12, 78, 12),
    (Language::Python, Origin::Avatar, 250, 1, 64, 12),
    (Language::C, Origin::Codenet, 200, 7, 318, 1),
    (Language::Cpp, Origin::Codenet, 200, 7, 194, 1),
    (Language::Go, Origin::Codenet, 200, 7, 393, 1),
];

fn synthetic_program(pl: Language, loc: usize) -> String {
    (0..loc)
        .map(|k| match pl {
            Language::Python => format!("v{k} = {k}\n"),
            _ => format!("v{k} = {k};\n"),
        })
        .collect()
}

fn write_table1_tree(root: &Path) -> std::io::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1100);
    let mut samples = Vec::new();
    let mut declared = BTreeMap::new();
    for (pl, origin, n, lo, hi, avg) in TABLE1 {
        for i in 0..n {
            let loc = match i {
                0 => lo,
                1 => hi,
                _ => rng.gen_range(lo..=hi),
            };
            // alternate around the average so the mean is exact
            let tcs = if avg > 1 { avg as usize - 1 + 2 * (i % 2) } else { 1 };
            let testcases = (0..tcs)
                .map(|k| TestCase {
                    index: k,
                    stdin: format!("{k}\n"),
                    expected_stdout: format!("{k}\n"),
                })
                .collect();
            let id = format!("{}-{}-{i:03}", origin_key(origin), pl.key());
            samples.push(CodeSample::new(id, origin, pl, synthetic_program(pl, loc), testcases));
        }
        declared.insert(
            pl.name().to_string(),
            DeclaredStats {
                samples: n,
                min_loc: lo,
                max_loc: hi,
                avg_testcases: avg,
            },
        );
    }
    corpus::write_corpus_declared(root, &samples, declared)
}

fn origin_key(o: Origin) -> &'static str {
    match o {
        Origin::Avatar => "avatar",
        Origin::Codenet => "codenet",
        _ => "other",
    }
}

fn corpus_statistics() -> Check {
    let mut checked = Vec::new();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    write_table1_tree(tmp.path()).map_err(|e| e.to_string())?;
    for (name, root) in [
        ("mini-corpus", fixtures().join("mini-corpus")),
        ("table-1 tree", tmp.path().to_path_buf()),
    ] {
        let samples = corpus::load_corpus_dir(&root).map_err(|e| format!("{name}: {e}"))?;
        let manifest = corpus::read_manifest(&root.join(corpus::MANIFEST_FILE)).map_err(|e| e.to_string())?;
        ensure(!manifest.declared.is_empty(), || {
            format!("{name}: no declared statistics")
        })?;
        let stats = corpus::corpus_stats(&samples).map_err(|e| e.to_string())?;
        let mismatches = corpus::declared_mismatches(&manifest, &stats);
        ensure(mismatches.is_empty(), || format!("{name}: {}", mismatches.join("; ")))?;
        let declared_total: usize = manifest.declared.values().map(|d| d.samples).sum();
        ensure(stats.total_samples() == declared_total, || {
            format!("{name}: {} samples, {declared_total} declared", stats.total_samples())
        })?;
        checked.push(format!("{name} {} samples", stats.total_samples()));
    }
    Ok(checked.join(", "))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("harness verdict suite", harness_verdicts),
        ("success rate and gain arithmetic", gain_arithmetic),
        ("verdict transition conservation", transition_conservation),
        ("success-set overlaps", overlap_cardinalities),
        ("cascade properties", cascade_properties),
        ("lexical oracle", lexical_oracle),
        ("golden end-to-end run", golden_end_to_end),
        ("intent statistics", intent_statistics),
        ("corpus statistics", corpus_statistics),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || *f == n.to_string()) {
            continue;
        }
        let started = Instant::now();
        let outcome = match panic::catch_unwind(AssertUnwindSafe(check)) {
            Ok(r) => r,
            Err(p) => Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into())),
        };
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n} PASS {name} ({secs:.1}s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} FAIL {name} ({secs:.1}s): {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
