//! Translation experiments: the comment-on-failure cascade, the
//! (source, target, commenter, translator) matrix and the variant studies.
//!
//! All three share [`Engine`], which turns a sample and a [`VariantSpec`]
//! into program text (generating and caching commented variants), asks a
//! translator for the target language, extracts the code and judges it.
//! Variants are generated at most once per (sample, input lineage, spec)
//! and reused across translators and targets.

mod cascade;
mod experiments;
mod store;

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::corpus::{CodeSample, Lineage};
use crate::gateway::{self, CommentOptions, Exchange, Fidelity, Gateway, NaturalLanguage, TaskError, TemplateError};
use crate::harness::{Bucket, ExecutionReport, HarnessError, Judge, Verdict};
use crate::lang::Language;
use crate::surface::{self, ExtractionMethod};

pub use cascade::{run_cascade, CascadeConfig, CascadeResult, CascadeRun, Halt, PairOutcome, StageSpec, StageSummary};
pub use experiments::{
    comment_words, logical_comments, run_matrix, run_variant_experiment, ClassifiedComment, MatrixConfig, MatrixRun,
    Placement, VariantConfig, VariantKind, VariantRun, VariantSummary, AUTHOR, NO_COMMENTER,
};
pub use store::RunDir;

pub mod files {
    pub use super::store::{
        ATTEMPTS, CASCADE_RESULT, CHECKPOINT, EFFECTIVE_CONFIG, EXCHANGES, MATRIX_RESULT, TOOL_VERSIONS, VARIANTS,
        VARIANT_RESULT,
    };
}

#[derive(Debug, thiserror::Error)]
pub enum OrchestratorError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("environment: {0}")]
    Environment(#[from] HarnessError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("run directory: {0}")]
    Io(String),
    #[error("cannot resume: {0}")]
    ResumeMismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LanguagePair {
    pub source: Language,
    pub target: Language,
}

impl std::fmt::Display for LanguagePair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}->{}", self.source, self.target)
    }
}

/// How the program shown to the translator is derived from a sample.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VariantSpec {
    Base,
    Stripped,
    Commented {
        commenter: String,
        options: CommentOptions,
    },
    NlTranslated {
        commenter: String,
        translator: String,
        language: NaturalLanguage,
    },
    MethodSpecs {
        commenter: String,
    },
    Pseudocode {
        commenter: String,
    },
}

impl VariantSpec {
    pub fn commenter(&self) -> Option<&str> {
        match self {
            VariantSpec::Base | VariantSpec::Stripped => None,
            VariantSpec::Commented { commenter, .. }
            | VariantSpec::NlTranslated { commenter, .. }
            | VariantSpec::MethodSpecs { commenter }
            | VariantSpec::Pseudocode { commenter } => Some(commenter),
        }
    }

    fn lineage(&self) -> Lineage {
        match self {
            VariantSpec::Base => Lineage::Base,
            VariantSpec::Stripped => Lineage::CommentStripped,
            VariantSpec::Commented { commenter, options } => Lineage::Commented {
                commenter_id: commenter.clone(),
                options: options.label(),
            },
            VariantSpec::NlTranslated {
                commenter,
                translator,
                language,
            } => Lineage::Commented {
                commenter_id: commenter.clone(),
                options: format!("nl={};via={translator}", language.name()),
            },
            VariantSpec::MethodSpecs { commenter } => Lineage::Commented {
                commenter_id: commenter.clone(),
                options: "method_specs".into(),
            },
            // the program itself is untouched; the pseudocode rides in the prompt
            VariantSpec::Pseudocode { .. } => Lineage::Base,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VariantKey {
    pub sample_id: String,
    /// Lineage of the program the variant was derived from.
    pub input: String,
    pub spec: VariantSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum VariantStatus {
    Ready {
        code: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pseudocode: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fidelity: Option<Fidelity>,
    },
    Excluded {
        reason: String,
    },
    GatewayFailed {
        error: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantRecord {
    pub key: VariantKey,
    pub status: VariantStatus,
    /// Model requests spent producing this variant, retries included.
    pub requests: usize,
    pub exchanges: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AttemptStatus {
    Judged,
    /// The variant could not be produced faithfully; nothing was translated.
    Excluded {
        reason: String,
    },
    /// A model call failed; retried on resume, never counted as a verdict.
    GatewayFailed {
        error: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub sample_id: String,
    pub stage: usize,
    /// Stage label, commenter or variant label the attempt belongs to.
    pub group: String,
    pub lineage: Lineage,
    pub source_pl: Language,
    pub target_pl: Language,
    pub translator: String,
    pub commenter: Option<String>,
    pub status: AttemptStatus,
    /// Hash of the translation exchange holding the raw model output.
    pub raw_output_ref: Option<String>,
    pub extracted_code: Option<String>,
    pub extraction_method: Option<ExtractionMethod>,
    pub report: Option<ExecutionReport>,
    pub exchange_refs: Vec<String>,
    /// Accounted time: translation latency plus judging time.
    pub wall_ms: u64,
}

impl AttemptRecord {
    pub fn verdict(&self) -> Option<Verdict> {
        self.report.as_ref().map(|r| r.verdict)
    }

    pub fn succeeded(&self) -> bool {
        self.verdict() == Some(Verdict::Success)
    }

    pub fn bucket(&self) -> Option<Bucket> {
        self.verdict().map(Verdict::bucket)
    }

    pub fn is_judged(&self) -> bool {
        self.status == AttemptStatus::Judged
    }
}

struct Variant {
    record: VariantRecord,
    exchanges: Vec<Exchange>,
}

type Slot = Arc<OnceLock<Arc<Variant>>>;

/// Shared machinery for producing variants and judged attempts.
pub struct Engine<'a> {
    gw: &'a Gateway,
    judge: &'a dyn Judge,
    fidelity_gate: bool,
    variants: Mutex<HashMap<VariantKey, Slot>>,
    pool: rayon::ThreadPool,
}

fn input_label(sample: &CodeSample) -> String {
    match &sample.lineage {
        Lineage::Base => "base".into(),
        Lineage::CommentStripped => "stripped".into(),
        Lineage::Commented { commenter_id, options } => format!("commented:{commenter_id}:{options}"),
    }
}

impl<'a> Engine<'a> {
    pub fn new(
        gw: &'a Gateway,
        judge: &'a dyn Judge,
        fidelity_gate: bool,
        workers: usize,
    ) -> Result<Self, OrchestratorError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| OrchestratorError::Config(e.to_string()))?;
        Ok(Engine {
            gw,
            judge,
            fidelity_gate,
            variants: Mutex::new(HashMap::new()),
            pool,
        })
    }

    pub(crate) fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }

    /// Seeds the cache with variants from an earlier run.
    pub(crate) fn preload(&self, records: Vec<VariantRecord>) {
        let mut map = self.variants.lock().unwrap();
        for record in records {
            if matches!(record.status, VariantStatus::GatewayFailed { .. }) {
                continue;
            }
            let slot: Slot = Arc::new(OnceLock::new());
            let _ = slot.set(Arc::new(Variant {
                record: record.clone(),
                exchanges: Vec::new(),
            }));
            map.insert(record.key, slot);
        }
    }

    /// Variant records and the exchanges produced while building them,
    /// sorted by key. Gateway failures are omitted so a resume retries them.
    pub(crate) fn variant_records(&self) -> (Vec<VariantRecord>, Vec<Exchange>) {
        let map = self.variants.lock().unwrap();
        let mut recs = Vec::new();
        let mut exchanges = Vec::new();
        for slot in map.values() {
            if let Some(v) = slot.get() {
                if !matches!(v.record.status, VariantStatus::GatewayFailed { .. }) {
                    recs.push(v.record.clone());
                }
                exchanges.extend(v.exchanges.iter().cloned());
            }
        }
        recs.sort_by(|a, b| a.key.cmp(&b.key));
        (recs, exchanges)
    }

    pub fn variant(&self, sample: &CodeSample, spec: &VariantSpec) -> Result<VariantRecord, OrchestratorError> {
        Ok(self.variant_full(sample, spec)?.record.clone())
    }

    fn variant_full(&self, sample: &CodeSample, spec: &VariantSpec) -> Result<Arc<Variant>, OrchestratorError> {
        let key = VariantKey {
            sample_id: sample.id.clone(),
            input: input_label(sample),
            spec: spec.clone(),
        };
        let slot = {
            let mut map = self.variants.lock().unwrap();
            map.entry(key.clone()).or_default().clone()
        };
        if let Some(v) = slot.get() {
            return Ok(v.clone());
        }
        let built = Arc::new(self.build_variant(sample, key)?);
        Ok(slot.get_or_init(|| built).clone())
    }

    fn build_variant(&self, sample: &CodeSample, key: VariantKey) -> Result<Variant, OrchestratorError> {
        let mut exchanges = Vec::new();
        let mut requests = 0;
        let ready = |code: String, fidelity: Option<Fidelity>| VariantStatus::Ready {
            code,
            pseudocode: None,
            fidelity,
        };
        let status = match &key.spec {
            VariantSpec::Base => ready(sample.code.clone(), None),
            VariantSpec::Stripped => match surface::strip_comments(&sample.code, sample.source_pl) {
                Ok(code) => ready(code, None),
                Err(e) => VariantStatus::Excluded { reason: e.to_string() },
            },
            VariantSpec::Commented { commenter, options } => {
                let mut status = VariantStatus::Excluded {
                    reason: "not attempted".into(),
                };
                for strict in [false, true] {
                    requests += 1;
                    match gateway::generate_comments(self.gw, commenter, sample, options, strict) {
                        Ok(c) => {
                            exchanges.push(c.exchange);
                            if !self.fidelity_gate || c.fidelity.accepted() {
                                status = ready(c.code, Some(c.fidelity));
                                break;
                            }
                            status = VariantStatus::Excluded {
                                reason: format!("fidelity: {:?}", c.fidelity),
                            };
                        }
                        Err(e) => match self.task_failure(e)? {
                            s @ VariantStatus::GatewayFailed { .. } => {
                                status = s;
                                break;
                            }
                            s => status = s,
                        },
                    }
                }
                status
            }
            VariantSpec::NlTranslated {
                commenter,
                translator,
                language,
            } => {
                let english = VariantSpec::Commented {
                    commenter: commenter.clone(),
                    options: CommentOptions::default(),
                };
                let base = self.variant_full(sample, &english)?;
                match &base.record.status {
                    VariantStatus::Ready { code, .. } => {
                        requests += 1;
                        match gateway::translate_comments_nl(self.gw, translator, code, sample.source_pl, *language) {
                            Ok(c) => {
                                exchanges.push(c.exchange);
                                self.gated(c.code, c.fidelity)
                            }
                            Err(e) => self.task_failure(e)?,
                        }
                    }
                    other => other.clone(),
                }
            }
            VariantSpec::MethodSpecs { commenter } => {
                requests += 1;
                match gateway::generate_method_specs(self.gw, commenter, sample) {
                    Ok(c) => {
                        exchanges.push(c.exchange);
                        self.gated(c.code, c.fidelity)
                    }
                    Err(e) => self.task_failure(e)?,
                }
            }
            VariantSpec::Pseudocode { commenter } => {
                requests += 1;
                match gateway::generate_pseudocode(self.gw, commenter, sample) {
                    Ok((text, ex)) => {
                        exchanges.push(ex);
                        VariantStatus::Ready {
                            code: sample.code.clone(),
                            pseudocode: Some(text),
                            fidelity: None,
                        }
                    }
                    Err(e) => self.task_failure(e)?,
                }
            }
        };
        if let VariantStatus::Excluded { reason } = &status {
            log::info!("variant {}/{:?} excluded: {reason}", key.sample_id, key.spec);
        }
        Ok(Variant {
            record: VariantRecord {
                key,
                status,
                requests,
                exchanges: exchanges.iter().map(|e| e.request_hash.clone()).collect(),
            },
            exchanges,
        })
    }

    fn gated(&self, code: String, fidelity: Fidelity) -> VariantStatus {
        if !self.fidelity_gate || fidelity.accepted() {
            VariantStatus::Ready {
                code,
                pseudocode: None,
                fidelity: Some(fidelity),
            }
        } else {
            VariantStatus::Excluded {
                reason: format!("fidelity: {fidelity:?}"),
            }
        }
    }

    fn task_failure(&self, e: TaskError) -> Result<VariantStatus, OrchestratorError> {
        match e {
            TaskError::Gateway(g) => Ok(VariantStatus::GatewayFailed { error: g.to_string() }),
            TaskError::Template(t) => Err(t.into()),
            other => Ok(VariantStatus::Excluded {
                reason: other.to_string(),
            }),
        }
    }

    /// Produces the variant, translates it to `target` and judges it.
    pub fn attempt(
        &self,
        sample: &CodeSample,
        target: Language,
        translator: &str,
        spec: &VariantSpec,
        stage: usize,
        group: &str,
    ) -> Result<(AttemptRecord, Vec<Exchange>), OrchestratorError> {
        let variant = self.variant_full(sample, spec)?;
        let mut record = AttemptRecord {
            sample_id: sample.id.clone(),
            stage,
            group: group.to_string(),
            lineage: spec.lineage(),
            source_pl: sample.source_pl,
            target_pl: target,
            translator: translator.to_string(),
            commenter: spec.commenter().map(str::to_string),
            status: AttemptStatus::Judged,
            raw_output_ref: None,
            extracted_code: None,
            extraction_method: None,
            report: None,
            exchange_refs: variant.record.exchanges.clone(),
            wall_ms: 0,
        };
        let (code, pseudocode) = match &variant.record.status {
            VariantStatus::Ready { code, pseudocode, .. } => (code, pseudocode),
            VariantStatus::Excluded { reason } => {
                record.status = AttemptStatus::Excluded { reason: reason.clone() };
                return Ok((record, Vec::new()));
            }
            VariantStatus::GatewayFailed { error } => {
                record.status = AttemptStatus::GatewayFailed { error: error.clone() };
                return Ok((record, Vec::new()));
            }
        };
        let ex = match gateway::translate_code(
            self.gw,
            translator,
            code,
            sample.source_pl,
            target,
            pseudocode.as_deref(),
        ) {
            Ok(ex) => ex,
            Err(TaskError::Template(t)) => return Err(t.into()),
            Err(e) => {
                record.status = AttemptStatus::GatewayFailed { error: e.to_string() };
                return Ok((record, Vec::new()));
            }
        };
        record.raw_output_ref = Some(ex.request_hash.clone());
        record.exchange_refs.push(ex.request_hash.clone());
        record.wall_ms = ex.latency_ms;
        let report = match surface::extract_code_block(&ex.response, target) {
            Ok(extracted) => {
                let report = self.judge.judge(&extracted.code, target, &sample.testcases)?;
                record.extracted_code = Some(extracted.code);
                record.extraction_method = Some(extracted.method);
                report
            }
            Err(e) => ExecutionReport::extraction_fail(e.to_string()),
        };
        record.wall_ms += report.total_duration_ms;
        record.report = Some(report);
        Ok((record, vec![ex]))
    }
}

/// Merges exchanges by hash, keeping the first occurrence.
pub(crate) fn merge_exchanges(into: &mut BTreeMap<String, Exchange>, more: impl IntoIterator<Item = Exchange>) {
    for ex in more {
        into.entry(ex.request_hash.clone()).or_insert(ex);
    }
}

/// Samples paired with each target their source language maps to.
pub(crate) fn pair_universe<'c>(corpus: &'c [CodeSample], pairs: &[LanguagePair]) -> Vec<(&'c CodeSample, Language)> {
    let mut out = Vec::new();
    for s in corpus {
        for p in pairs.iter().filter(|p| p.source == s.source_pl) {
            out.push((s, p.target));
        }
    }
    out
}

pub(crate) fn check_pairs(pairs: &[LanguagePair]) -> Result<(), OrchestratorError> {
    if pairs.is_empty() {
        return Err(OrchestratorError::Config("no language pairs configured".into()));
    }
    if let Some(p) = pairs.iter().find(|p| p.source == p.target) {
        return Err(OrchestratorError::Config(format!(
            "pair {p} translates a language to itself"
        )));
    }
    Ok(())
}
