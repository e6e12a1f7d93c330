//! Offline stand-ins for models and toolchains.
//!
//! [`ScriptedModel`] answers gateway prompts with a Rust closure, so whole
//! experiments can run without network access; its exchanges land in the
//! gateway cache and can be exported as a replay script. [`MarkerJudge`]
//! judges code by a `VERDICT=<name>` marker instead of compiling it.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use regex::Regex;

use crate::corpus::TestCase;
use crate::gateway::{Gateway, ModelBackend, ModelEndpoint, Prompt};
use crate::harness::{ExecutionReport, HarnessError, Judge, TestOutcome, TestcaseResult, Verdict};
use crate::lang::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimTask {
    CommentGen,
    Translate,
    CommentNlTranslate,
    Pseudocode,
    MethodSpec,
    IntentClassify,
}

/// A prompt as seen by a scripted model.
#[derive(Debug, Clone)]
pub struct SimRequest {
    pub endpoint: String,
    pub task: SimTask,
    /// Program text from the prompt's code block; the comment for
    /// intent classification.
    pub code: String,
    pub source_pl: Option<Language>,
    pub target_pl: Option<Language>,
    /// Whether the prompt restricts comment density, and to what.
    pub density: Option<String>,
    pub natural_language: Option<String>,
    pub strict: bool,
    pub pseudocode: Option<String>,
}

fn re(pattern: &'static str) -> Regex {
    static CACHE: OnceLock<Mutex<HashMap<&'static str, Regex>>> = OnceLock::new();
    let mut cache = CACHE.get_or_init(Default::default).lock().unwrap();
    cache
        .entry(pattern)
        .or_insert_with(|| Regex::new(pattern).unwrap())
        .clone()
}

fn language(name: &str) -> Option<Language> {
    name.parse().ok()
}

fn first_fence(text: &str) -> Option<String> {
    let start = text.find("```\n")? + 4;
    let end = text[start..].find("\n```")?;
    Some(text[start..start + end].to_string())
}

/// Recognises the default prompt templates.
pub fn parse_request(endpoint: &ModelEndpoint, prompt: &Prompt) -> Option<SimRequest> {
    let u = &prompt.user;
    let code = first_fence(u).unwrap_or_default();
    let mut req = SimRequest {
        endpoint: endpoint.id.clone(),
        task: SimTask::Translate,
        code,
        source_pl: None,
        target_pl: None,
        density: None,
        natural_language: None,
        strict: false,
        pseudocode: None,
    };
    let capture = |p: &'static str| re(p).captures(u).map(|c| c[1].to_string());
    if u.starts_with("Add comments") {
        req.task = SimTask::CommentGen;
        req.source_pl = capture(r"^Add comments to the following (\S+) code").and_then(|s| language(&s));
        req.density = capture(r"most complex (\S+) of the lines");
        req.natural_language = capture(r"Write the comments in (\w+)\.");
        req.strict = u.contains("only add comments");
    } else if u.starts_with("Translate every comment") {
        req.task = SimTask::CommentNlTranslate;
        req.source_pl = capture(r"following (\S+) code").and_then(|s| language(&s));
        req.natural_language = capture(r"into (\w+)\.");
    } else if u.starts_with("Translate the following") {
        let c = re(r"^Translate the following (\S+) code to (\S+)\.").captures(u)?;
        req.source_pl = language(&c[1]);
        req.target_pl = language(&c[2]);
        req.pseudocode = u
            .find("Pseudocode of the program:\n\n")
            .map(|i| u[i + "Pseudocode of the program:\n\n".len()..].trim_end().to_string());
    } else if u.starts_with("Write pseudocode") {
        req.task = SimTask::Pseudocode;
        req.source_pl = capture(r"following (\S+) program").and_then(|s| language(&s));
    } else if u.starts_with("Write a specification comment") || u.starts_with("Write one specification comment") {
        req.task = SimTask::MethodSpec;
        req.source_pl = capture(r"following (\S+) (?:code|program)").and_then(|s| language(&s));
    } else if u.starts_with("Classify the code comment") {
        req.task = SimTask::IntentClassify;
        req.code = u.split("Comment:\n").nth(1).unwrap_or("").trim().to_string();
    } else {
        return None;
    }
    Some(req)
}

type Policy = dyn Fn(&SimRequest) -> Result<String, String> + Send + Sync;

/// A model backend driven by a closure over the parsed request.
pub struct ScriptedModel {
    policy: Box<Policy>,
    calls: AtomicUsize,
}

impl ScriptedModel {
    pub fn new(policy: impl Fn(&SimRequest) -> Result<String, String> + Send + Sync + 'static) -> Arc<Self> {
        Arc::new(ScriptedModel {
            policy: Box::new(policy),
            calls: AtomicUsize::new(0),
        })
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl ModelBackend for ScriptedModel {
    fn respond(&self, endpoint: &ModelEndpoint, prompt: &Prompt) -> Result<String, String> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let req = parse_request(endpoint, prompt).ok_or_else(|| "unrecognised prompt".to_string())?;
        (self.policy)(&req)
    }
}

/// Keyless endpoints named `ids`, all served by `model`.
pub fn scripted_gateway(ids: &[&str], model: Arc<ScriptedModel>) -> Gateway {
    let endpoints = ids
        .iter()
        .map(|id| ModelEndpoint {
            id: id.to_string(),
            base_url: "http://scripted.invalid".into(),
            model_name: format!("{id}-sim"),
            auth_ref: String::new(),
            decoding: Default::default(),
            kind: Default::default(),
            requests_per_minute: None,
        })
        .collect();
    Gateway::new(endpoints, Default::default(), Default::default()).with_backend(model)
}

/// Line comment prefix for `pl`.
pub fn line_comment(pl: Language) -> &'static str {
    if pl == Language::Python {
        "#"
    } else {
        "//"
    }
}

/// Puts a line comment with `text` above every `step`-th non-blank line,
/// keeping each line's indentation.
pub fn comment_lines(code: &str, pl: Language, step: usize, text: &str) -> String {
    let mut out = String::new();
    let mut seen = 0;
    for line in code.lines() {
        if !line.trim().is_empty() {
            if seen % step.max(1) == 0 {
                let indent: String = line.chars().take_while(|c| c.is_whitespace()).collect();
                out.push_str(&format!("{indent}{} {text}\n", line_comment(pl)));
            }
            seen += 1;
        }
        out.push_str(line);
        out.push('\n');
    }
    out
}

/// Wraps code in a fenced block tagged with the language.
pub fn fenced(code: &str, pl: Language) -> String {
    format!("```{}\n{}\n```\n", pl.key(), code.trim_end())
}

/// Verdict marker read by [`MarkerJudge`].
pub fn verdict_marker(v: Verdict, pl: Language) -> String {
    format!("{} VERDICT={v}", line_comment(pl))
}

/// Judges code by its `VERDICT=<name>` marker; unmarked code does not
/// compile. Counts the programs it judged.
#[derive(Debug, Default)]
pub struct MarkerJudge {
    judged: AtomicUsize,
}

impl MarkerJudge {
    pub fn new() -> Self {
        MarkerJudge::default()
    }

    pub fn judged(&self) -> usize {
        self.judged.load(Ordering::SeqCst)
    }
}

impl Judge for MarkerJudge {
    fn judge(&self, code: &str, _pl: Language, testcases: &[TestCase]) -> Result<ExecutionReport, HarnessError> {
        self.judged.fetch_add(1, Ordering::SeqCst);
        let verdict = re(r"VERDICT=(\w+)").captures(code).and_then(|c| match &c[1] {
            "Success" => Some(Verdict::Success),
            "TestcaseFail" => Some(Verdict::TestcaseFail),
            "RuntimeError" => Some(Verdict::RuntimeError),
            "Timeout" => Some(Verdict::Timeout),
            _ => None,
        });
        let Some(verdict) = verdict else {
            return Ok(ExecutionReport::compile_fail("no verdict marker".into(), 0));
        };
        let outcome = match verdict {
            Verdict::Success => TestOutcome::Pass,
            Verdict::TestcaseFail => TestOutcome::WrongOutput,
            Verdict::RuntimeError => TestOutcome::Runtime,
            _ => TestOutcome::Timeout,
        };
        let per_testcase = testcases
            .iter()
            .map(|tc| TestcaseResult {
                index: tc.index,
                outcome,
                actual_stdout: String::new(),
                duration_ms: 0,
            })
            .collect();
        Ok(ExecutionReport::from_outcomes(per_testcase, String::new(), 0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CodeSample, Origin};
    use crate::gateway::{self, CommentOptions, Density};

    fn sample() -> CodeSample {
        CodeSample::new(
            "s1",
            Origin::Custom,
            Language::Python,
            "n = int(input())\nprint(n * 2)\n",
            vec![TestCase {
                index: 0,
                stdin: "2\n".into(),
                expected_stdout: "4\n".into(),
            }],
        )
    }

    #[test]
    fn parses_default_prompts() {
        let seen = Arc::new(std::sync::Mutex::new(Vec::new()));
        let log = seen.clone();
        let model = ScriptedModel::new(move |r| {
            log.lock().unwrap().push(r.clone());
            match r.task {
                SimTask::CommentGen => Ok(fenced(
                    &comment_lines(&r.code, Language::Python, 1, "step"),
                    Language::Python,
                )),
                SimTask::Translate => Ok(fenced("class Main {}", Language::Java)),
                SimTask::Pseudocode => Ok("read n; print 2n".into()),
                _ => Err("unexpected".into()),
            }
        });
        let gw = scripted_gateway(&["m"], model.clone());
        let s = sample();
        let opts = CommentOptions {
            density: Density::OneThird,
            ..CommentOptions::default()
        };
        let c = gateway::generate_comments(&gw, "m", &s, &opts, true).unwrap();
        assert!(c.fidelity.accepted());
        gateway::translate_code(&gw, "m", &s.code, Language::Python, Language::Java, Some("PSEUDO")).unwrap();
        let seen = seen.lock().unwrap();
        assert_eq!(seen[0].task, SimTask::CommentGen);
        assert_eq!(seen[0].density.as_deref(), Some("one-third"));
        assert!(seen[0].strict);
        assert_eq!(seen[0].code, s.code.trim_end());
        assert_eq!(seen[1].target_pl, Some(Language::Java));
        assert_eq!(seen[1].pseudocode.as_deref(), Some("PSEUDO"));
        assert_eq!(model.calls(), 2);
    }

    #[test]
    fn marker_judge_reads_markers() {
        let j = MarkerJudge::new();
        let tcs = sample().testcases;
        let ok = format!("x\n{}\n", verdict_marker(Verdict::Success, Language::Python));
        assert_eq!(j.judge(&ok, Language::Python, &tcs).unwrap().verdict, Verdict::Success);
        let bad = verdict_marker(Verdict::Timeout, Language::Go);
        assert_eq!(j.judge(&bad, Language::Go, &tcs).unwrap().verdict, Verdict::Timeout);
        assert_eq!(
            j.judge("nothing", Language::Go, &tcs).unwrap().verdict,
            Verdict::CompileFail
        );
        assert_eq!(j.judged(), 3);
    }
}
