//! Comment-on-failure cascade.
//!
//! Stage 0 translates every (sample, target) pair from uncommented code.
//! Each later stage comments only the pairs that have not yet succeeded,
//! with that stage's commenting model, and translates them again. Stages
//! are barriers: stage k starts only after every stage k-1 attempt has been
//! judged and persisted.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::store::{self, RunDir};
use super::{
    check_pairs, merge_exchanges, pair_universe, AttemptRecord, AttemptStatus, Engine, LanguagePair, OrchestratorError,
    VariantKey, VariantRecord, VariantSpec,
};
use crate::corpus::CodeSample;
use crate::gateway::{CommentOptions, Exchange, Gateway};
use crate::harness::{Judge, Verdict};
use crate::lang::Language;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSpec {
    /// Short tag such as `U` or `D`; reports join the tags of a stage and
    /// its predecessors into `U+D`.
    pub label: String,
    /// `None` only for stage 0.
    #[serde(default)]
    pub commenter: Option<String>,
    #[serde(default)]
    pub options: CommentOptions,
    /// Halts before the stage if it would need more commented variants.
    #[serde(default)]
    pub max_commenting_calls: Option<usize>,
    #[serde(default)]
    pub max_translation_calls: Option<usize>,
}

impl StageSpec {
    pub fn uncommented(label: &str) -> Self {
        StageSpec {
            label: label.into(),
            commenter: None,
            options: CommentOptions::default(),
            max_commenting_calls: None,
            max_translation_calls: None,
        }
    }

    pub fn commented(label: &str, commenter: &str) -> Self {
        StageSpec {
            commenter: Some(commenter.into()),
            ..StageSpec::uncommented(label)
        }
    }

    fn variant(&self) -> VariantSpec {
        match &self.commenter {
            None => VariantSpec::Base,
            Some(c) => VariantSpec::Commented {
                commenter: c.clone(),
                options: self.options,
            },
        }
    }
}

fn default_gate() -> bool {
    true
}

fn default_workers() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeConfig {
    pub translator: String,
    pub stages: Vec<StageSpec>,
    pub pairs: Vec<LanguagePair>,
    #[serde(default = "default_gate")]
    pub fidelity_gate: bool,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl CascadeConfig {
    pub fn validate(&self) -> Result<(), OrchestratorError> {
        let bad = |m: String| Err(OrchestratorError::Config(m));
        check_pairs(&self.pairs)?;
        let Some(first) = self.stages.first() else {
            return bad("a cascade needs at least one stage".into());
        };
        if first.commenter.is_some() {
            return bad(format!("stage 0 (`{}`) must not have a commenter", first.label));
        }
        for s in &self.stages[1..] {
            if s.commenter.is_none() {
                return bad(format!("stage `{}` has no commenter", s.label));
            }
        }
        let labels: BTreeSet<&str> = self.stages.iter().map(|s| s.label.as_str()).collect();
        if labels.len() != self.stages.len() {
            return bad("stage labels must be unique".into());
        }
        Ok(())
    }

    /// Identity of the experiment. Budgets and worker count are left out
    /// so a halted run can be resumed with a larger budget.
    pub fn digest(&self) -> String {
        let stages: Vec<_> = self
            .stages
            .iter()
            .map(|s| (s.label.as_str(), s.commenter.as_deref(), s.options))
            .collect();
        let ident = serde_json::json!({
            "translator": self.translator,
            "stages": stages,
            "pairs": self.pairs,
            "fidelity_gate": self.fidelity_gate,
        });
        hex::encode(&Sha256::digest(ident.to_string().as_bytes())[..12])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Halt {
    Budget {
        stage: usize,
        limit: String,
        needed: usize,
        cap: usize,
    },
    Interrupted {
        stage: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StageSummary {
    pub index: usize,
    pub label: String,
    pub commenter: Option<String>,
    /// Pairs in this stage's pool.
    pub attempted: usize,
    pub new_successes: usize,
    pub cumulative_successes: usize,
    /// Pool pairs whose commented variant passed the fidelity gate.
    pub commenting_calls: usize,
    /// Commenting requests sent for variants first needed at this stage,
    /// strict retries included.
    pub comment_requests: usize,
    pub fidelity_exclusions: usize,
    pub translation_calls: usize,
    pub gateway_failures: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub sample_id: String,
    pub source_pl: Language,
    pub target_pl: Language,
    /// Verdict of the last judged attempt.
    pub final_verdict: Option<Verdict>,
    pub success_stage: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeResult {
    pub translator: String,
    pub config_digest: String,
    pub total_pairs: usize,
    pub stages: Vec<StageSummary>,
    pub pairs: Vec<PairOutcome>,
    pub halt: Option<Halt>,
    pub complete: bool,
}

impl CascadeResult {
    pub fn successes(&self) -> usize {
        self.stages.last().map_or(0, |s| s.cumulative_successes)
    }
}

pub struct CascadeRun {
    pub result: CascadeResult,
    pub attempts: Vec<AttemptRecord>,
    pub variants: Vec<VariantRecord>,
    pub exchanges: Vec<Exchange>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Checkpoint {
    config_digest: String,
    completed_stages: usize,
    halt: Option<Halt>,
}

type PairKey = (String, Language);

fn sort_attempts(attempts: &mut [AttemptRecord]) {
    attempts.sort_by(|a, b| (a.stage, &a.sample_id, a.target_pl).cmp(&(b.stage, &b.sample_id, b.target_pl)));
}

/// Runs (or resumes) the cascade. With a run directory, state is persisted
/// after every stage and an existing checkpoint is resumed; completed
/// attempts are reused, so resuming a finished run sends no requests.
/// `stop` is polled at stage boundaries.
pub fn run_cascade(
    corpus: &[CodeSample],
    gw: &Gateway,
    judge: &dyn Judge,
    cfg: &CascadeConfig,
    run_dir: Option<&RunDir>,
    stop: Option<&AtomicBool>,
) -> Result<CascadeRun, OrchestratorError> {
    cfg.validate()?;
    for id in std::iter::once(&cfg.translator).chain(cfg.stages.iter().filter_map(|s| s.commenter.as_ref())) {
        gw.endpoint(id).map_err(|e| OrchestratorError::Config(e.to_string()))?;
    }
    let digest = cfg.digest();
    let engine = Engine::new(gw, judge, cfg.fidelity_gate, cfg.workers)?;
    let mut previous: HashMap<(usize, String, Language), AttemptRecord> = HashMap::new();
    let mut exchanges: BTreeMap<String, Exchange> = BTreeMap::new();
    if let Some(dir) = run_dir {
        if let Some(cp) = dir.read_json::<Checkpoint>(store::CHECKPOINT)? {
            if cp.config_digest != digest {
                return Err(OrchestratorError::ResumeMismatch(format!(
                    "{} was written by configuration {}, current configuration is {digest}",
                    dir.root().display(),
                    cp.config_digest
                )));
            }
            for a in dir.read_jsonl::<AttemptRecord>(store::ATTEMPTS)? {
                if !matches!(a.status, AttemptStatus::GatewayFailed { .. }) {
                    previous.insert((a.stage, a.sample_id.clone(), a.target_pl), a);
                }
            }
            engine.preload(dir.read_jsonl(store::VARIANTS)?);
            merge_exchanges(&mut exchanges, dir.read_jsonl::<Exchange>(store::EXCHANGES)?);
            log::info!("resuming cascade: {} reusable attempt(s)", previous.len());
        }
    }

    let universe = pair_universe(corpus, &cfg.pairs);
    let mut succeeded: BTreeMap<PairKey, usize> = BTreeMap::new();
    let mut last_verdict: BTreeMap<PairKey, Verdict> = BTreeMap::new();
    let mut attempts: Vec<AttemptRecord> = Vec::new();
    let mut summaries = Vec::new();
    let mut seen_variants: BTreeSet<VariantKey> = BTreeSet::new();
    let mut halt = None;

    for (k, stage) in cfg.stages.iter().enumerate() {
        let pool: Vec<(&CodeSample, Language)> = universe
            .iter()
            .filter(|(s, t)| !succeeded.contains_key(&(s.id.clone(), *t)))
            .copied()
            .collect();
        if stop.is_some_and(|f| f.load(Ordering::SeqCst)) {
            halt = Some(Halt::Interrupted { stage: k });
            break;
        }
        let caps = [
            (
                "max_commenting_calls",
                stage.max_commenting_calls.filter(|_| stage.commenter.is_some()),
            ),
            ("max_translation_calls", stage.max_translation_calls),
        ];
        if let Some((limit, cap)) = caps
            .iter()
            .find_map(|(l, c)| c.filter(|&c| pool.len() > c).map(|c| (*l, c)))
        {
            log::warn!("stage {k} needs {} call(s) but {limit} is {cap}; halting", pool.len());
            halt = Some(Halt::Budget {
                stage: k,
                limit: limit.to_string(),
                needed: pool.len(),
                cap,
            });
            break;
        }
        log::info!("stage {k} ({}): {} pair(s)", stage.label, pool.len());

        let spec = stage.variant();
        let results: Vec<(AttemptRecord, Vec<Exchange>)> = engine.install(|| {
            pool.par_iter()
                .map(|(sample, target)| {
                    if let Some(prev) = previous.get(&(k, sample.id.clone(), *target)) {
                        return Ok((prev.clone(), Vec::new()));
                    }
                    engine.attempt(sample, *target, &cfg.translator, &spec, k, &stage.label)
                })
                .collect::<Result<_, OrchestratorError>>()
        })?;

        let mut summary = StageSummary {
            index: k,
            label: stage.label.clone(),
            commenter: stage.commenter.clone(),
            attempted: pool.len(),
            ..StageSummary::default()
        };
        if stage.commenter.is_some() {
            let mut keys = BTreeSet::new();
            for (sample, _) in &pool {
                let v = engine.variant(sample, &spec)?;
                if keys.insert(v.key.clone()) && seen_variants.insert(v.key.clone()) {
                    summary.comment_requests += v.requests;
                }
            }
        }
        for (rec, ex) in results {
            merge_exchanges(&mut exchanges, ex);
            let key = (rec.sample_id.clone(), rec.target_pl);
            match &rec.status {
                AttemptStatus::Judged => {
                    summary.translation_calls += 1;
                    last_verdict.insert(key.clone(), rec.verdict().unwrap_or(Verdict::ExtractionFail));
                    if rec.succeeded() {
                        summary.new_successes += 1;
                        succeeded.insert(key, k);
                    }
                }
                AttemptStatus::Excluded { .. } => summary.fidelity_exclusions += 1,
                AttemptStatus::GatewayFailed { .. } => summary.gateway_failures += 1,
            }
            attempts.push(rec);
        }
        if stage.commenter.is_some() {
            summary.commenting_calls = summary.attempted - summary.fidelity_exclusions;
        }
        summary.cumulative_successes = succeeded.len();
        summaries.push(summary);

        let (variants, variant_exchanges) = engine.variant_records();
        merge_exchanges(&mut exchanges, variant_exchanges);
        if let Some(dir) = run_dir {
            sort_attempts(&mut attempts);
            dir.write_jsonl(store::ATTEMPTS, &attempts)?;
            dir.write_jsonl(store::VARIANTS, &variants)?;
            dir.write_jsonl(store::EXCHANGES, exchanges.values())?;
            dir.write_json(
                store::CHECKPOINT,
                &Checkpoint {
                    config_digest: digest.clone(),
                    completed_stages: k + 1,
                    halt: None,
                },
            )?;
        }
    }

    let pairs = universe
        .iter()
        .map(|(s, t)| {
            let key = (s.id.clone(), *t);
            PairOutcome {
                sample_id: s.id.clone(),
                source_pl: s.source_pl,
                target_pl: *t,
                final_verdict: last_verdict.get(&key).copied(),
                success_stage: succeeded.get(&key).copied(),
            }
        })
        .collect();
    let gateway_failures: usize = summaries.iter().map(|s| s.gateway_failures).sum();
    let result = CascadeResult {
        translator: cfg.translator.clone(),
        config_digest: digest.clone(),
        total_pairs: universe.len(),
        complete: halt.is_none() && gateway_failures == 0,
        stages: summaries,
        pairs,
        halt,
    };
    sort_attempts(&mut attempts);
    let (variants, _) = engine.variant_records();
    if let Some(dir) = run_dir {
        dir.write_jsonl(store::ATTEMPTS, &attempts)?;
        dir.write_json(
            store::CHECKPOINT,
            &Checkpoint {
                config_digest: digest,
                completed_stages: result.stages.len(),
                halt: result.halt.clone(),
            },
        )?;
        dir.write_json(store::CASCADE_RESULT, &result)?;
    }
    Ok(CascadeRun {
        result,
        attempts,
        variants,
        exchanges: exchanges.into_values().collect(),
    })
}
