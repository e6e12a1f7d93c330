//! The commenter × translator matrix and the single-factor variant studies.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::store::{self, RunDir};
use super::{
    check_pairs, merge_exchanges, pair_universe, AttemptRecord, AttemptStatus, Engine, LanguagePair, OrchestratorError,
    VariantRecord, VariantSpec, VariantStatus,
};
use crate::analysis::SuccessMatrix;
use crate::corpus::{CodeSample, Lineage};
use crate::gateway::{self, CommentOptions, Density, Exchange, Gateway, IntentLabel, NaturalLanguage};
use crate::harness::Judge;
use crate::lang::Language;
use crate::surface::{self, CommentKind, CommentSpan};

/// Group label of the uncommented baseline.
pub const NO_COMMENTER: &str = "none";

fn default_gate() -> bool {
    true
}

fn default_workers() -> usize {
    4
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixConfig {
    pub pairs: Vec<LanguagePair>,
    /// Commenting endpoints; `"none"` adds the uncommented baseline.
    pub commenters: Vec<String>,
    pub translators: Vec<String>,
    #[serde(default)]
    pub options: CommentOptions,
    #[serde(default = "default_gate")]
    pub fidelity_gate: bool,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

pub struct MatrixRun {
    pub attempts: Vec<AttemptRecord>,
    pub variants: Vec<VariantRecord>,
    pub exchanges: Vec<Exchange>,
    pub matrix: SuccessMatrix,
}

struct Job<'c> {
    sample: &'c CodeSample,
    target: Language,
    translator: String,
    spec: VariantSpec,
    group: String,
}

type JobKey = (String, String, String, Language);

fn job_key(group: &str, translator: &str, sample_id: &str, target: Language) -> JobKey {
    (group.to_string(), translator.to_string(), sample_id.to_string(), target)
}

fn sort_attempts(attempts: &mut [AttemptRecord]) {
    attempts.sort_by(|a, b| {
        (&a.group, &a.translator, &a.sample_id, a.target_pl).cmp(&(&b.group, &b.translator, &b.sample_id, b.target_pl))
    });
}

/// Loads reusable attempts and variants from an earlier run in `dir`.
fn resume_state(
    engine: &Engine,
    dir: Option<&RunDir>,
    exchanges: &mut BTreeMap<String, Exchange>,
) -> Result<HashMap<JobKey, AttemptRecord>, OrchestratorError> {
    let mut previous = HashMap::new();
    if let Some(dir) = dir {
        for a in dir.read_jsonl::<AttemptRecord>(store::ATTEMPTS)? {
            if !matches!(a.status, AttemptStatus::GatewayFailed { .. }) {
                previous.insert(job_key(&a.group, &a.translator, &a.sample_id, a.target_pl), a);
            }
        }
        engine.preload(dir.read_jsonl(store::VARIANTS)?);
        merge_exchanges(exchanges, dir.read_jsonl::<Exchange>(store::EXCHANGES)?);
    }
    Ok(previous)
}

fn run_jobs(
    engine: &Engine,
    jobs: &[Job],
    previous: &HashMap<JobKey, AttemptRecord>,
    exchanges: &mut BTreeMap<String, Exchange>,
) -> Result<Vec<AttemptRecord>, OrchestratorError> {
    let results: Vec<(AttemptRecord, Vec<Exchange>)> = engine.install(|| {
        jobs.par_iter()
            .map(|j| {
                if let Some(prev) = previous.get(&job_key(&j.group, &j.translator, &j.sample.id, j.target)) {
                    return Ok((prev.clone(), Vec::new()));
                }
                engine.attempt(j.sample, j.target, &j.translator, &j.spec, 0, &j.group)
            })
            .collect::<Result<_, OrchestratorError>>()
    })?;
    let mut attempts = Vec::with_capacity(results.len());
    for (rec, ex) in results {
        merge_exchanges(exchanges, ex);
        attempts.push(rec);
    }
    let (_, variant_exchanges) = engine.variant_records();
    merge_exchanges(exchanges, variant_exchanges);
    sort_attempts(&mut attempts);
    Ok(attempts)
}

fn persist(
    dir: Option<&RunDir>,
    attempts: &[AttemptRecord],
    variants: &[VariantRecord],
    exchanges: &BTreeMap<String, Exchange>,
) -> Result<(), OrchestratorError> {
    if let Some(dir) = dir {
        dir.write_jsonl(store::ATTEMPTS, attempts)?;
        dir.write_jsonl(store::VARIANTS, variants)?;
        dir.write_jsonl(store::EXCHANGES, exchanges.values())?;
    }
    Ok(())
}

fn check_endpoints<'s>(gw: &Gateway, ids: impl IntoIterator<Item = &'s String>) -> Result<(), OrchestratorError> {
    for id in ids {
        gw.endpoint(id).map_err(|e| OrchestratorError::Config(e.to_string()))?;
    }
    Ok(())
}

/// Translates every sample with every (commenter, translator) combination.
/// Each commented variant is produced once per (sample, commenter) and
/// shared by all translators and targets.
pub fn run_matrix(
    corpus: &[CodeSample],
    gw: &Gateway,
    judge: &dyn Judge,
    cfg: &MatrixConfig,
    run_dir: Option<&RunDir>,
) -> Result<MatrixRun, OrchestratorError> {
    check_pairs(&cfg.pairs)?;
    if cfg.commenters.is_empty() || cfg.translators.is_empty() {
        return Err(OrchestratorError::Config(
            "a matrix needs at least one commenter and one translator".into(),
        ));
    }
    check_endpoints(
        gw,
        cfg.translators
            .iter()
            .chain(cfg.commenters.iter().filter(|c| *c != NO_COMMENTER)),
    )?;
    let engine = Engine::new(gw, judge, cfg.fidelity_gate, cfg.workers)?;
    let mut exchanges = BTreeMap::new();
    let previous = resume_state(&engine, run_dir, &mut exchanges)?;

    let mut jobs = Vec::new();
    for translator in &cfg.translators {
        for commenter in &cfg.commenters {
            let spec = if commenter == NO_COMMENTER {
                VariantSpec::Base
            } else {
                VariantSpec::Commented {
                    commenter: commenter.clone(),
                    options: cfg.options,
                }
            };
            for (sample, target) in pair_universe(corpus, &cfg.pairs) {
                jobs.push(Job {
                    sample,
                    target,
                    translator: translator.clone(),
                    spec: spec.clone(),
                    group: commenter.clone(),
                });
            }
        }
    }
    let attempts = run_jobs(&engine, &jobs, &previous, &mut exchanges)?;
    let (variants, _) = engine.variant_records();
    let matrix = SuccessMatrix::from_attempts(&attempts);
    persist(run_dir, &attempts, &variants, &exchanges)?;
    if let Some(dir) = run_dir {
        dir.write_json(store::MATRIX_RESULT, &matrix)?;
    }
    Ok(MatrixRun {
        attempts,
        variants,
        exchanges: exchanges.into_values().collect(),
        matrix,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantKind {
    Density,
    NlLanguage,
    Placement,
    IntentCorpus,
}

impl VariantKind {
    pub fn key(self) -> &'static str {
        match self {
            VariantKind::Density => "density",
            VariantKind::NlLanguage => "nl_language",
            VariantKind::Placement => "placement",
            VariantKind::IntentCorpus => "intent_corpus",
        }
    }
}

impl FromStr for VariantKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            VariantKind::Density,
            VariantKind::NlLanguage,
            VariantKind::Placement,
            VariantKind::IntentCorpus,
        ]
        .into_iter()
        .find(|k| k.key() == s.replace('-', "_"))
        .ok_or_else(|| format!("unknown variant kind `{s}`"))
    }
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    InlineComments,
    MethodSpecs,
    PseudocodeInPrompt,
}

impl Placement {
    pub const ALL: [Placement; 3] = [
        Placement::InlineComments,
        Placement::MethodSpecs,
        Placement::PseudocodeInPrompt,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Placement::InlineComments => "inline_comments",
            Placement::MethodSpecs => "method_specs",
            Placement::PseudocodeInPrompt => "pseudocode_in_prompt",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantConfig {
    pub kind: VariantKind,
    pub pairs: Vec<LanguagePair>,
    pub translator: String,
    /// Commenting endpoint for density, nl_language and placement runs.
    #[serde(default)]
    pub commenter: Option<String>,
    /// Re-commenting endpoints for intent_corpus runs.
    #[serde(default)]
    pub commenters: Vec<String>,
    /// Endpoint translating comments into other natural languages;
    /// defaults to the commenter.
    #[serde(default)]
    pub nl_translator: Option<String>,
    #[serde(default)]
    pub languages: Vec<NaturalLanguage>,
    #[serde(default)]
    pub densities: Vec<Density>,
    #[serde(default)]
    pub placements: Vec<Placement>,
    /// Endpoint labelling comment intents in intent_corpus runs.
    #[serde(default)]
    pub classifier: Option<String>,
    /// Adds the uncommented program as group `"none"`.
    #[serde(default = "default_true")]
    pub include_baseline: bool,
    #[serde(default = "default_gate")]
    pub fidelity_gate: bool,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl VariantConfig {
    pub fn new(kind: VariantKind, pairs: Vec<LanguagePair>, translator: &str) -> Self {
        VariantConfig {
            kind,
            pairs,
            translator: translator.into(),
            commenter: None,
            commenters: Vec::new(),
            nl_translator: None,
            languages: Vec::new(),
            densities: Vec::new(),
            placements: Vec::new(),
            classifier: None,
            include_baseline: true,
            fidelity_gate: true,
            workers: default_workers(),
        }
    }

    fn commenter(&self) -> Result<&String, OrchestratorError> {
        self.commenter
            .as_ref()
            .ok_or_else(|| OrchestratorError::Config(format!("{} runs need a commenter", self.kind)))
    }

    /// Group label and variant for each arm of the study, except the
    /// intent corpus arms that depend on stripped programs.
    fn arms(&self) -> Result<Vec<(String, VariantSpec)>, OrchestratorError> {
        let mut arms = Vec::new();
        if self.include_baseline && self.kind != VariantKind::IntentCorpus {
            arms.push((NO_COMMENTER.to_string(), VariantSpec::Base));
        }
        match self.kind {
            VariantKind::Density => {
                let c = self.commenter()?;
                let densities = if self.densities.is_empty() {
                    Density::ALL.to_vec()
                } else {
                    self.densities.clone()
                };
                for d in densities {
                    let options = CommentOptions {
                        density: d,
                        natural_language: NaturalLanguage::English,
                    };
                    arms.push((
                        d.key().to_string(),
                        VariantSpec::Commented {
                            commenter: c.clone(),
                            options,
                        },
                    ));
                }
            }
            VariantKind::NlLanguage => {
                let c = self.commenter()?;
                let via = self.nl_translator.as_ref().unwrap_or(c);
                arms.push((
                    NaturalLanguage::English.name().to_string(),
                    VariantSpec::Commented {
                        commenter: c.clone(),
                        options: CommentOptions::default(),
                    },
                ));
                let languages = if self.languages.is_empty() {
                    vec![
                        NaturalLanguage::Japanese,
                        NaturalLanguage::French,
                        NaturalLanguage::Chinese,
                    ]
                } else {
                    self.languages.clone()
                };
                for l in languages {
                    if l == NaturalLanguage::English {
                        return Err(OrchestratorError::Config(
                            "English is the source language of nl_language runs".into(),
                        ));
                    }
                    arms.push((
                        l.name().to_string(),
                        VariantSpec::NlTranslated {
                            commenter: c.clone(),
                            translator: via.clone(),
                            language: l,
                        },
                    ));
                }
            }
            VariantKind::Placement => {
                let c = self.commenter()?;
                let placements = if self.placements.is_empty() {
                    Placement::ALL.to_vec()
                } else {
                    self.placements.clone()
                };
                for p in placements {
                    let spec = match p {
                        Placement::InlineComments => VariantSpec::Commented {
                            commenter: c.clone(),
                            options: CommentOptions::default(),
                        },
                        Placement::MethodSpecs => VariantSpec::MethodSpecs { commenter: c.clone() },
                        Placement::PseudocodeInPrompt => VariantSpec::Pseudocode { commenter: c.clone() },
                    };
                    arms.push((p.key().to_string(), spec));
                }
            }
            VariantKind::IntentCorpus => {
                if self.commenters.is_empty() {
                    return Err(OrchestratorError::Config("intent_corpus runs need commenters".into()));
                }
            }
        }
        let labels: std::collections::BTreeSet<&String> = arms.iter().map(|(g, _)| g).collect();
        if labels.len() != arms.len() {
            return Err(OrchestratorError::Config("variant arms repeat".into()));
        }
        Ok(arms)
    }

    fn endpoints(&self) -> Vec<&String> {
        let mut ids = vec![&self.translator];
        ids.extend(self.commenter.iter());
        ids.extend(self.commenters.iter());
        ids.extend(self.nl_translator.iter());
        ids.extend(self.classifier.iter());
        ids
    }
}

/// One comment from an intent_corpus run with its intent labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedComment {
    pub sample_id: String,
    /// `"author"` or the commenting endpoint id.
    pub source: String,
    pub start_line: usize,
    pub text: String,
    pub words: usize,
    pub labels: Vec<IntentLabel>,
    /// Why no labels were obtained.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Summary written to `variant_result.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub kind: VariantKind,
    pub groups: Vec<String>,
    /// Mean comment density of the accepted variants in each group.
    pub densities: BTreeMap<String, Option<f64>>,
    /// Fidelity exclusions per group.
    pub exclusions: BTreeMap<String, usize>,
    pub matrix: SuccessMatrix,
    pub comments: Vec<ClassifiedComment>,
}

pub struct VariantRun {
    pub summary: VariantSummary,
    pub attempts: Vec<AttemptRecord>,
    pub variants: Vec<VariantRecord>,
    pub exchanges: Vec<Exchange>,
}

/// Source of author comments in intent corpus runs.
pub const AUTHOR: &str = "author";

/// Words in a comment payload; tokens without a letter or digit (leftover
/// `*` gutters, separators) are not words.
pub fn comment_words(text: &str) -> usize {
    text.split_whitespace()
        .filter(|w| w.chars().any(char::is_alphanumeric))
        .count()
}

/// Groups comments the way a reader sees them: runs of line comments on
/// consecutive lines form one comment.
pub fn logical_comments(spans: &[CommentSpan]) -> Vec<(usize, String)> {
    let mut out: Vec<(usize, String, usize, bool)> = Vec::new();
    for s in spans {
        let is_line = s.kind == CommentKind::Line;
        if let Some(last) = out.last_mut() {
            if is_line && last.3 && s.start_line == last.2 + 1 {
                last.1.push('\n');
                last.1.push_str(s.text.trim());
                last.2 = s.end_line;
                continue;
            }
        }
        out.push((s.start_line, s.text.trim().to_string(), s.end_line, is_line));
    }
    out.into_iter()
        .filter(|c| !c.1.trim().is_empty())
        .map(|(line, text, _, _)| (line, text))
        .collect()
}

fn variant_code(rec: &VariantRecord) -> Option<&str> {
    match &rec.status {
        VariantStatus::Ready { code, .. } => Some(code),
        _ => None,
    }
}

/// Runs one of the single-factor studies: comment density, comment
/// natural language, comment placement, or author versus model comments
/// with intent classification.
pub fn run_variant_experiment(
    corpus: &[CodeSample],
    gw: &Gateway,
    judge: &dyn Judge,
    cfg: &VariantConfig,
    run_dir: Option<&RunDir>,
) -> Result<VariantRun, OrchestratorError> {
    check_pairs(&cfg.pairs)?;
    check_endpoints(gw, cfg.endpoints())?;
    let arms = cfg.arms()?;
    let engine = Engine::new(gw, judge, cfg.fidelity_gate, cfg.workers)?;
    let mut exchanges = BTreeMap::new();
    let previous = resume_state(&engine, run_dir, &mut exchanges)?;
    let universe = pair_universe(corpus, &cfg.pairs);

    // stripped copies for the intent corpus arms; unstrippable samples
    // fall back to the original so the attempt records its exclusion
    let stripped: Vec<CodeSample> = if cfg.kind == VariantKind::IntentCorpus {
        corpus
            .iter()
            .map(|s| match surface::strip_comments(&s.code, s.source_pl) {
                Ok(code) => s.variant(code, Lineage::CommentStripped),
                Err(_) => s.clone(),
            })
            .collect()
    } else {
        Vec::new()
    };
    let stripped_of: HashMap<&str, &CodeSample> = stripped.iter().map(|s| (s.id.as_str(), s)).collect();

    let mut groups: Vec<String> = arms.iter().map(|(g, _)| g.clone()).collect();
    let mut jobs = Vec::new();
    for (group, spec) in &arms {
        for &(sample, target) in &universe {
            jobs.push(Job {
                sample,
                target,
                translator: cfg.translator.clone(),
                spec: spec.clone(),
                group: group.clone(),
            });
        }
    }
    if cfg.kind == VariantKind::IntentCorpus {
        groups.extend([AUTHOR.to_string(), "stripped".to_string()]);
        for &(sample, target) in &universe {
            for (group, spec) in [(AUTHOR, VariantSpec::Base), ("stripped", VariantSpec::Stripped)] {
                jobs.push(Job {
                    sample,
                    target,
                    translator: cfg.translator.clone(),
                    spec,
                    group: group.to_string(),
                });
            }
        }
        for c in &cfg.commenters {
            let group = format!("recommented:{c}");
            groups.push(group.clone());
            for &(sample, target) in &universe {
                let base = stripped_of[sample.id.as_str()];
                let spec = if base.lineage == Lineage::CommentStripped {
                    VariantSpec::Commented {
                        commenter: c.clone(),
                        options: CommentOptions::default(),
                    }
                } else {
                    VariantSpec::Stripped
                };
                jobs.push(Job {
                    sample: base,
                    target,
                    translator: cfg.translator.clone(),
                    spec,
                    group: group.clone(),
                });
            }
        }
    }
    let attempts = run_jobs(&engine, &jobs, &previous, &mut exchanges)?;
    let (variants, _) = engine.variant_records();

    // measured density and exclusions per group, over distinct variants
    let mut densities = BTreeMap::new();
    let mut exclusions = BTreeMap::new();
    for group in &groups {
        let mut seen = std::collections::BTreeSet::new();
        let mut sum = 0.0;
        let mut n = 0usize;
        let mut excluded = 0;
        for job in jobs.iter().filter(|j| &j.group == group) {
            if !seen.insert(job.sample.id.clone()) {
                continue;
            }
            let rec = engine.variant(job.sample, &job.spec)?;
            match variant_code(&rec) {
                Some(code) => {
                    if let Ok(d) = surface::comment_density(code, job.sample.source_pl) {
                        sum += d;
                        n += 1;
                    }
                }
                None => excluded += usize::from(matches!(rec.status, VariantStatus::Excluded { .. })),
            }
        }
        densities.insert(group.clone(), (n > 0).then(|| sum / n as f64));
        exclusions.insert(group.clone(), excluded);
    }

    let comments = if cfg.kind == VariantKind::IntentCorpus {
        let mut found: Vec<(String, String, usize, String)> = Vec::new();
        for sample in corpus {
            if let Ok(spans) = surface::scan_comments(&sample.code, sample.source_pl) {
                for (line, text) in logical_comments(&spans) {
                    found.push((sample.id.clone(), AUTHOR.to_string(), line, text));
                }
            }
            for c in &cfg.commenters {
                let base = stripped_of[sample.id.as_str()];
                if base.lineage != Lineage::CommentStripped {
                    continue;
                }
                let spec = VariantSpec::Commented {
                    commenter: c.clone(),
                    options: CommentOptions::default(),
                };
                let rec = engine.variant(base, &spec)?;
                let Some(code) = variant_code(&rec) else { continue };
                if let Ok(spans) = surface::scan_comments(code, sample.source_pl) {
                    for (line, text) in logical_comments(&spans) {
                        found.push((sample.id.clone(), c.clone(), line, text));
                    }
                }
            }
        }
        classify_all(&engine, gw, cfg.classifier.as_deref(), found, &mut exchanges)?
    } else {
        Vec::new()
    };

    let matrix = SuccessMatrix::from_attempts(&attempts);
    let summary = VariantSummary {
        kind: cfg.kind,
        groups,
        densities,
        exclusions,
        matrix,
        comments,
    };
    persist(run_dir, &attempts, &variants, &exchanges)?;
    if let Some(dir) = run_dir {
        dir.write_json(store::VARIANT_RESULT, &summary)?;
    }
    Ok(VariantRun {
        summary,
        attempts,
        variants,
        exchanges: exchanges.into_values().collect(),
    })
}

fn classify_all(
    engine: &Engine,
    gw: &Gateway,
    classifier: Option<&str>,
    found: Vec<(String, String, usize, String)>,
    exchanges: &mut BTreeMap<String, Exchange>,
) -> Result<Vec<ClassifiedComment>, OrchestratorError> {
    let results: Vec<(ClassifiedComment, Option<Exchange>)> = engine.install(|| {
        found
            .into_par_iter()
            .map(|(sample_id, source, start_line, text)| {
                let mut c = ClassifiedComment {
                    sample_id,
                    source,
                    start_line,
                    words: comment_words(&text),
                    text,
                    labels: Vec::new(),
                    error: None,
                };
                let Some(ep) = classifier else {
                    c.error = Some("no classifier configured".into());
                    return Ok((c, None));
                };
                match gateway::classify_intents(gw, ep, &c.text) {
                    Ok((cls, ex)) => {
                        c.labels = cls.labels.into_iter().collect();
                        Ok((c, Some(ex)))
                    }
                    Err(gateway::TaskError::Template(t)) => Err(OrchestratorError::Template(t)),
                    Err(e) => {
                        c.error = Some(e.to_string());
                        Ok((c, None))
                    }
                }
            })
            .collect::<Result<_, OrchestratorError>>()
    })?;
    let mut out = Vec::with_capacity(results.len());
    for (c, ex) in results {
        merge_exchanges(exchanges, ex);
        out.push(c);
    }
    out.sort_by(|a, b| (&a.source, &a.sample_id, a.start_line).cmp(&(&b.source, &b.sample_id, b.start_line)));
    Ok(out)
}
