//! Prompt-driven tasks: commenting, translation, comment-language
//! translation, pseudocode, method specifications and intent labelling.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::prompts::{Bindings, Task, TemplateError, INTENT_DESCRIPTIONS};
use super::{Exchange, Gateway, GatewayError};
use crate::corpus::CodeSample;
use crate::lang::Language;
use crate::surface::{self, ExtractError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Density {
    OneThird,
    TwoThirds,
    #[default]
    All,
}

impl Density {
    pub const ALL: [Density; 3] = [Density::OneThird, Density::TwoThirds, Density::All];

    pub fn key(self) -> &'static str {
        match self {
            Density::OneThird => "one_third",
            Density::TwoThirds => "two_thirds",
            Density::All => "all",
        }
    }

    fn phrase(self) -> &'static str {
        match self {
            Density::OneThird => "one-third",
            Density::TwoThirds => "two-thirds",
            Density::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub enum NaturalLanguage {
    #[default]
    English,
    Japanese,
    French,
    Chinese,
}

impl NaturalLanguage {
    pub fn name(self) -> &'static str {
        match self {
            NaturalLanguage::English => "English",
            NaturalLanguage::Japanese => "Japanese",
            NaturalLanguage::French => "French",
            NaturalLanguage::Chinese => "Chinese",
        }
    }
}

impl FromStr for NaturalLanguage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "english" | "en" => Ok(NaturalLanguage::English),
            "japanese" | "ja" => Ok(NaturalLanguage::Japanese),
            "french" | "fr" => Ok(NaturalLanguage::French),
            "chinese" | "zh" => Ok(NaturalLanguage::Chinese),
            _ => Err(format!("unknown natural language `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct CommentOptions {
    #[serde(default)]
    pub density: Density,
    #[serde(default)]
    pub natural_language: NaturalLanguage,
}

impl CommentOptions {
    /// Stable text form used in lineage tags and cache keys.
    pub fn label(&self) -> String {
        format!("density={};nl={}", self.density.key(), self.natural_language.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Rejection {
    LexError { detail: String },
    TokenMismatch { position: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Fidelity {
    Accepted,
    Rejected(Rejection),
}

impl Fidelity {
    pub fn accepted(&self) -> bool {
        *self == Fidelity::Accepted
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TaskError {
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("cannot extract code from response: {0}")]
    Extraction(#[from] ExtractError),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no known intent label in response `{0}`")]
    Classification(String),
}

impl TaskError {
    pub fn gateway(&self) -> Option<&GatewayError> {
        match self {
            TaskError::Gateway(e) => Some(e),
            _ => None,
        }
    }
}

/// Model output that should differ from its input only in comments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Commented {
    pub code: String,
    pub fidelity: Fidelity,
    pub exchange: Exchange,
}

/// Accepts iff `commented` minus its comments lexes to the same tokens as
/// `original`.
pub fn verify_injection_fidelity(original: &str, commented: &str, pl: Language) -> Fidelity {
    let lexed = |code: &str| surface::lex_normalize(code, pl);
    let (a, b) = match (lexed(original), lexed(commented)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return Fidelity::Rejected(Rejection::LexError { detail: e.to_string() }),
    };
    // lex_normalize already skips comments; strip is checked for lexability
    if let Err(e) = surface::strip_comments(commented, pl) {
        return Fidelity::Rejected(Rejection::LexError { detail: e.to_string() });
    }
    match a.first_difference(&b) {
        None => Fidelity::Accepted,
        Some(position) => Fidelity::Rejected(Rejection::TokenMismatch { position }),
    }
}

fn finish(sample_code: &str, pl: Language, ex: Exchange) -> Result<Commented, TaskError> {
    let code = surface::extract_code_block(&ex.response, pl)?.code;
    let fidelity = verify_injection_fidelity(sample_code, &code, pl);
    if let Fidelity::Rejected(r) = &fidelity {
        log::info!("fidelity rejected ({}): {r:?}", ex.endpoint_id);
    }
    Ok(Commented {
        code,
        fidelity,
        exchange: ex,
    })
}

/// Asks `endpoint` to comment `sample`. `strict` adds an explicit
/// instruction to leave code untouched, used when retrying a rejected
/// variant.
pub fn generate_comments(
    gw: &Gateway,
    endpoint: &str,
    sample: &CodeSample,
    opts: &CommentOptions,
    strict: bool,
) -> Result<Commented, TaskError> {
    let b = Bindings::new()
        .set("source_pl", sample.source_pl.name())
        .set("code", sample.code.trim_end())
        .set("density_fraction", opts.density.phrase())
        .set("natural_language", opts.natural_language.name())
        .clause_if("density", opts.density != Density::All)
        .clause_if("language", opts.natural_language != NaturalLanguage::English)
        .clause_if("strict", strict);
    let ex = gw.run_task(endpoint, Task::CommentGen, &b)?;
    finish(&sample.code, sample.source_pl, ex)
}

/// Raw translation exchange; extraction is the caller's job.
pub fn translate_code(
    gw: &Gateway,
    endpoint: &str,
    code: &str,
    source: Language,
    target: Language,
    pseudocode: Option<&str>,
) -> Result<Exchange, TaskError> {
    if source == target {
        return Err(TaskError::Precondition(format!("source and target are both {source}")));
    }
    let b = Bindings::new()
        .set("source_pl", source.name())
        .set("target_pl", target.name())
        .set("code", code.trim_end())
        .set("pseudocode", pseudocode.unwrap_or("").trim_end())
        .clause_if("pseudocode", pseudocode.is_some());
    gw.run_task(endpoint, Task::Translate, &b)
}

pub fn translate_comments_nl(
    gw: &Gateway,
    endpoint: &str,
    commented_code: &str,
    pl: Language,
    target: NaturalLanguage,
) -> Result<Commented, TaskError> {
    let spans = surface::scan_comments(commented_code, pl)
        .map_err(|e| TaskError::Precondition(format!("input does not lex: {e}")))?;
    if spans.is_empty() {
        return Err(TaskError::Precondition("input has no comments to translate".into()));
    }
    if target == NaturalLanguage::English {
        return Err(TaskError::Precondition("comments are already in English".into()));
    }
    let b = Bindings::new()
        .set("source_pl", pl.name())
        .set("natural_language", target.name())
        .set("code", commented_code.trim_end());
    let ex = gw.run_task(endpoint, Task::CommentNlTranslate, &b)?;
    finish(commented_code, pl, ex)
}

/// Free-text pseudocode, returned verbatim.
pub fn generate_pseudocode(gw: &Gateway, endpoint: &str, sample: &CodeSample) -> Result<(String, Exchange), TaskError> {
    let b = Bindings::new()
        .set("source_pl", sample.source_pl.name())
        .set("code", sample.code.trim_end());
    let ex = gw.run_task(endpoint, Task::Pseudocode, &b)?;
    Ok((ex.response.clone(), ex))
}

/// One specification comment above each detected method, or a single
/// leading comment when no method is found.
pub fn generate_method_specs(gw: &Gateway, endpoint: &str, sample: &CodeSample) -> Result<Commented, TaskError> {
    let points = surface::find_method_boundaries(&sample.code, sample.source_pl);
    let lines: Vec<String> = points.iter().map(usize::to_string).collect();
    let b = Bindings::new()
        .set("source_pl", sample.source_pl.name())
        .set("code", sample.code.trim_end())
        .set("method_lines", lines.join(", "))
        .clause_if("methods", !points.is_empty())
        .clause_if("whole", points.is_empty());
    let ex = gw.run_task(endpoint, Task::MethodSpec, &b)?;
    finish(&sample.code, sample.source_pl, ex)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IntentLabel {
    Descriptive,
    Explanatory,
    Informative,
    Analytical,
    Precautionary,
}

impl IntentLabel {
    pub const ALL: [IntentLabel; 5] = [
        IntentLabel::Descriptive,
        IntentLabel::Explanatory,
        IntentLabel::Informative,
        IntentLabel::Analytical,
        IntentLabel::Precautionary,
    ];

    pub fn name(self) -> &'static str {
        INTENT_DESCRIPTIONS[self as usize].0
    }
}

impl fmt::Display for IntentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IntentLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        IntentLabel::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub labels: BTreeSet<IntentLabel>,
    /// Response items that named no known label.
    pub dropped: Vec<String>,
}

/// Parses a comma, semicolon or newline separated label list,
/// case-insensitively. Bullets, numbering, quotes and trailing
/// explanations after a dash or colon are ignored.
pub fn parse_intents(response: &str) -> Classification {
    let mut labels = BTreeSet::new();
    let mut dropped = Vec::new();
    for item in response.split([',', ';', '\n', '|']) {
        let item = item.split([':', '(']).next().unwrap_or("");
        let item = item.split(" - ").next().unwrap_or("");
        let word = item.trim_matches(|c: char| !c.is_alphabetic());
        if word.is_empty() {
            continue;
        }
        match word.parse::<IntentLabel>() {
            Ok(l) => {
                labels.insert(l);
            }
            Err(_) => dropped.push(word.to_string()),
        }
    }
    Classification { labels, dropped }
}

pub fn classify_intents(gw: &Gateway, endpoint: &str, comment: &str) -> Result<(Classification, Exchange), TaskError> {
    if comment.trim().is_empty() {
        return Err(TaskError::Precondition("empty comment".into()));
    }
    let list: Vec<String> = INTENT_DESCRIPTIONS
        .iter()
        .map(|(name, desc)| format!("- {name}: {desc}"))
        .collect();
    let b = Bindings::new()
        .set("intent_category_list", list.join("\n"))
        .set("comment", comment.trim());
    let ex = gw.run_task(endpoint, Task::IntentClassify, &b)?;
    let parsed = parse_intents(&ex.response);
    if !parsed.dropped.is_empty() {
        log::warn!("dropped unknown intent label(s): {}", parsed.dropped.join(", "));
    }
    if parsed.labels.is_empty() {
        return Err(TaskError::Classification(ex.response));
    }
    Ok((parsed, ex))
}

#[cfg(test)]
mod tests {
    use super::super::{request_hash, ExchangeStore, ModelEndpoint, StoredExchange, Usage};
    use super::*;
    use crate::corpus::{Origin, TestCase};

    /// Replay gateway whose single endpoint answers `task` prompts built
    /// from `bindings` with `response`.
    struct Script {
        ep: ModelEndpoint,
        store: ExchangeStore,
    }

    impl Script {
        fn new() -> Self {
            Script {
                ep: ModelEndpoint::replay("r", "m"),
                store: ExchangeStore::in_memory(),
            }
        }

        fn answer(&self, task: Task, b: &Bindings, response: &str) {
            let prompt = super::super::default_template(task).render(b).unwrap();
            self.store
                .put(StoredExchange {
                    hash: request_hash(&self.ep, &prompt),
                    prompt,
                    response: response.into(),
                    usage: Usage::default(),
                    latency_ms: 1,
                })
                .unwrap();
        }

        fn gateway(self) -> Gateway {
            Gateway::replay_only(vec![self.ep], self.store)
        }
    }

    fn sample(pl: Language, code: &str) -> CodeSample {
        let tc = TestCase {
            index: 0,
            stdin: String::new(),
            expected_stdout: String::new(),
        };
        CodeSample::new("s", Origin::Custom, pl, code, vec![tc])
    }

    fn comment_bindings(s: &CodeSample, opts: &CommentOptions, strict: bool) -> Bindings {
        Bindings::new()
            .set("source_pl", s.source_pl.name())
            .set("code", s.code.trim_end())
            .set("density_fraction", opts.density.phrase())
            .set("natural_language", opts.natural_language.name())
            .clause_if("density", opts.density != Density::All)
            .clause_if("language", opts.natural_language != NaturalLanguage::English)
            .clause_if("strict", strict)
    }

    #[test]
    fn fidelity_gate() {
        let orig = "int x = 1;\nint y = x + 2;\n";
        let ok = "// set x\nint x = 1;\nint   y = x+2; /* sum */\n";
        assert_eq!(verify_injection_fidelity(orig, ok, Language::C), Fidelity::Accepted);
        let renamed = "int z = 1;\nint y = z + 2;\n";
        assert!(matches!(
            verify_injection_fidelity(orig, renamed, Language::C),
            Fidelity::Rejected(Rejection::TokenMismatch { position: 1 })
        ));
        let broken = "int x = 1; /* open\n";
        assert!(matches!(
            verify_injection_fidelity(orig, broken, Language::C),
            Fidelity::Rejected(Rejection::LexError { .. })
        ));
    }

    #[test]
    fn scripted_comment_generation() {
        let s = sample(
            Language::Python,
            "a = int(input())\nb = a * 2\nc = b + 1\nd = c - a\nprint(d)\n",
        );
        let opts = CommentOptions::default();
        let commented =
            "```python\n# read a\na = int(input())\nb = a * 2\nc = b + 1  # add one\nd = c - a\nprint(d)\n```";
        let script = Script::new();
        script.answer(Task::CommentGen, &comment_bindings(&s, &opts, false), commented);
        let gw = script.gateway();
        let out = generate_comments(&gw, "r", &s, &opts, false).unwrap();
        assert!(out.fidelity.accepted());
        assert_eq!(surface::scan_comments(&out.code, Language::Python).unwrap().len(), 2);
        assert_eq!(out.exchange.template.as_deref(), Some("comment_gen@v1"));
        // the strict retry renders a different prompt, so the script misses
        assert!(generate_comments(&gw, "r", &s, &opts, true).is_err());
    }

    #[test]
    fn density_clause_reaches_the_prompt() {
        let s = sample(Language::C, "int main(){return 0;}\n");
        let opts = CommentOptions {
            density: Density::OneThird,
            ..CommentOptions::default()
        };
        let script = Script::new();
        script.answer(
            Task::CommentGen,
            &comment_bindings(&s, &opts, false),
            "```c\n// m\nint main(){return 0;}\n```",
        );
        let gw = script.gateway();
        let out = generate_comments(&gw, "r", &s, &opts, false).unwrap();
        assert!(out.exchange.prompt.user.contains("one-third"));
    }

    #[test]
    fn nl_translation_preconditions_and_span_count() {
        let script = Script::new();
        let code = "x = 1  # one\n# print it\nprint(x)\n";
        let b = Bindings::new()
            .set("source_pl", "Python")
            .set("natural_language", "French")
            .set("code", code.trim_end());
        script.answer(
            Task::CommentNlTranslate,
            &b,
            "```python\nx = 1  # un\n# l'afficher\nprint(x)\n```",
        );
        let gw = script.gateway();
        let out = translate_comments_nl(&gw, "r", code, Language::Python, NaturalLanguage::French).unwrap();
        assert!(out.fidelity.accepted());
        assert_eq!(
            surface::scan_comments(&out.code, Language::Python).unwrap().len(),
            surface::scan_comments(code, Language::Python).unwrap().len()
        );
        assert!(matches!(
            translate_comments_nl(&gw, "r", "x = 1\n", Language::Python, NaturalLanguage::French),
            Err(TaskError::Precondition(_))
        ));
    }

    #[test]
    fn method_specs_sit_on_boundaries() {
        let code = "public class A {\n  static int f(int x) { return x + 1; }\n  public static void main(String[] a) {\n    System.out.println(f(1));\n  }\n}\n";
        let s = sample(Language::Java, code);
        let b = Bindings::new()
            .set("source_pl", "Java")
            .set("code", code.trim_end())
            .set("method_lines", "2, 3")
            .clause("methods");
        let out_code = "public class A {\n  /** Adds one. */\n  static int f(int x) { return x + 1; }\n  /** Prints f(1). */\n  public static void main(String[] a) {\n    System.out.println(f(1));\n  }\n}\n";
        let script = Script::new();
        script.answer(Task::MethodSpec, &b, &format!("```java\n{out_code}```"));
        let gw = script.gateway();
        let out = generate_method_specs(&gw, "r", &s).unwrap();
        assert!(out.fidelity.accepted());
        let spans = surface::scan_comments(&out.code, Language::Java).unwrap();
        let bounds = surface::find_method_boundaries(&out.code, Language::Java);
        assert_eq!(spans.len(), 2);
        for span in &spans {
            assert!(bounds.iter().any(|&b| b.abs_diff(span.end_line + 1) <= 1));
        }
    }

    #[test]
    fn method_specs_fall_back_to_whole_program() {
        let s = sample(Language::Python, "print(1)\n");
        let b = Bindings::new()
            .set("source_pl", "Python")
            .set("code", "print(1)")
            .set("method_lines", "")
            .clause("whole");
        let script = Script::new();
        script.answer(Task::MethodSpec, &b, "```python\n# Prints one.\nprint(1)\n```");
        let out = generate_method_specs(&script.gateway(), "r", &s).unwrap();
        assert_eq!(out.code, "# Prints one.\nprint(1)\n");
    }

    #[test]
    fn pseudocode_is_verbatim() {
        let s = sample(Language::Go, "package main\nfunc main() {}\n");
        let b = Bindings::new().set("source_pl", "Go").set("code", s.code.trim_end());
        let script = Script::new();
        script.answer(Task::Pseudocode, &b, "  BEGIN\n  END  ");
        let (text, _) = generate_pseudocode(&script.gateway(), "r", &s).unwrap();
        assert_eq!(text, "  BEGIN\n  END  ");
    }

    #[test]
    fn pseudocode_goes_after_source() {
        let script = Script::new();
        let b = Bindings::new()
            .set("source_pl", "C")
            .set("target_pl", "Go")
            .set("code", "int main(){}")
            .set("pseudocode", "NOTHING")
            .clause("pseudocode");
        script.answer(Task::Translate, &b, "```go\npackage main\n```");
        let gw = script.gateway();
        let ex = translate_code(&gw, "r", "int main(){}\n", Language::C, Language::Go, Some("NOTHING")).unwrap();
        assert!(ex.prompt.user.find("int main").unwrap() < ex.prompt.user.find("NOTHING").unwrap());
        assert!(matches!(
            translate_code(&gw, "r", "x", Language::C, Language::C, None),
            Err(TaskError::Precondition(_))
        ));
    }

    #[test]
    fn intent_parsing() {
        let p = parse_intents("descriptive, speculative");
        assert_eq!(p.labels, [IntentLabel::Descriptive].into_iter().collect());
        assert_eq!(p.dropped, vec!["speculative".to_string()]);
        let p = parse_intents("1. Descriptive - says what\n2. **Precautionary**\n- informative: background");
        assert_eq!(
            p.labels,
            [
                IntentLabel::Descriptive,
                IntentLabel::Precautionary,
                IntentLabel::Informative
            ]
            .into_iter()
            .collect()
        );
        assert!(parse_intents("none of them").labels.is_empty());
    }

    #[test]
    fn scripted_classification() {
        let script = Script::new();
        let list: Vec<String> = INTENT_DESCRIPTIONS.iter().map(|(n, d)| format!("- {n}: {d}")).collect();
        let b = Bindings::new()
            .set("intent_category_list", list.join("\n"))
            .set("comment", "Sorts the list in place");
        script.answer(Task::IntentClassify, &b, "Descriptive");
        let b2 = b.clone().set("comment", "Nothing useful");
        script.answer(Task::IntentClassify, &b2, "speculative");
        let gw = script.gateway();
        let (c, _) = classify_intents(&gw, "r", "Sorts the list in place").unwrap();
        assert_eq!(c.labels, [IntentLabel::Descriptive].into_iter().collect());
        assert!(matches!(
            classify_intents(&gw, "r", "Nothing useful"),
            Err(TaskError::Classification(_))
        ));
        assert!(matches!(
            classify_intents(&gw, "r", "  "),
            Err(TaskError::Precondition(_))
        ));
    }
}
