//! Run configuration files.
//!
//! A run config is a TOML file. Relative paths are resolved against the
//! directory holding the file.
//!
//! ```toml
//! corpus = "corpus"
//! output_dir = "runs/cascade"
//! workers = 4
//! replay = true
//! replay_script = "replay.jsonl"
//!
//! [[endpoints]]
//! id = "translator"
//! model_name = "gpt-4o-mini"
//! kind = "replay"
//!
//! [judge]
//! mode = "process"
//!
//! [cascade]
//! translator = "translator"
//! pairs = [{ source = "Java", target = "Python" }]
//! stages = [{ label = "U" }, { label = "D", commenter = "deepseek" }]
//!
//! [report]
//! formats = ["json", "csv", "text"]
//! ```
//!
//! `[[toolchains]]` entries replace the built-in toolchain of their `pl`;
//! `[[prompts]]` entries replace the default template of their `task`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::ReportFormat;
use crate::gateway::{
    EndpointKind, ExchangeStore, Gateway, GatewayError, GatewayOptions, ModelEndpoint, PromptSet, PromptTemplate,
};
use crate::harness::{HarnessError, Judge, ProcessJudge, RecordedJudge, Toolchain};
use crate::lang::Language;
use crate::orchestrator::{CascadeConfig, MatrixConfig, VariantConfig, NO_COMMENTER};
use crate::surface::ScanOptions;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgeMode {
    /// Compile and run with the configured toolchains.
    #[default]
    Process,
    /// Serve recorded judgments only.
    Replay,
    /// Compile and run, appending every judgment to the log.
    Record,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeConfig {
    #[serde(default)]
    pub mode: JudgeMode,
    /// Judgment log for `replay` and `record`.
    #[serde(default)]
    pub judgments: Option<PathBuf>,
    /// Cap on simultaneous subject-language processes.
    #[serde(default)]
    pub max_processes: Option<usize>,
    #[serde(default = "default_true")]
    pub isolate_network: bool,
}

impl Default for JudgeConfig {
    fn default() -> Self {
        JudgeConfig {
            mode: JudgeMode::Process,
            judgments: None,
            max_processes: None,
            isolate_network: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    #[serde(default = "default_formats")]
    pub formats: Vec<ReportFormat>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            formats: default_formats(),
        }
    }
}

fn default_formats() -> Vec<ReportFormat> {
    ReportFormat::ALL.to_vec()
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Overrides the worker count of every experiment section.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Serve every model request from `replay_script`; real endpoints are
    /// rejected.
    #[serde(default)]
    pub replay: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replay_script: Option<PathBuf>,
    /// Exchange cache shared across runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub allow_network: bool,
    /// Check that every corpus sample passes its own testcases first.
    #[serde(default)]
    pub validate_sources: bool,
    #[serde(default)]
    pub endpoints: Vec<ModelEndpoint>,
    #[serde(default)]
    pub toolchains: Vec<Toolchain>,
    #[serde(default)]
    pub prompts: Vec<PromptTemplate>,
    #[serde(default)]
    pub scan: ScanOptions,
    #[serde(default)]
    pub judge: JudgeConfig,
    #[serde(default)]
    pub report: ReportConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cascade: Option<CascadeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<VariantConfig>,
}

/// Command-line values layered over a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub corpus: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub replay: Option<bool>,
    pub replay_script: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub allow_network: Option<bool>,
    pub judge_mode: Option<JudgeMode>,
    pub judgments: Option<PathBuf>,
    pub formats: Option<Vec<ReportFormat>>,
}

fn resolve(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Reads `path` and resolves its relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::from_toml(&text).map_err(|e| ConfigError::Read {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.resolve_paths(&base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        resolve(base, &mut self.corpus);
        resolve(base, &mut self.output_dir);
        resolve(base, &mut self.replay_script);
        resolve(base, &mut self.cache);
        resolve(base, &mut self.judge.judgments);
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.corpus {
            self.corpus = Some(v.clone());
        }
        if let Some(v) = &o.output_dir {
            self.output_dir = Some(v.clone());
        }
        if let Some(v) = o.workers {
            self.workers = Some(v);
        }
        if let Some(v) = o.replay {
            self.replay = v;
        }
        if let Some(v) = &o.replay_script {
            self.replay_script = Some(v.clone());
        }
        if let Some(v) = &o.cache {
            self.cache = Some(v.clone());
        }
        if let Some(v) = o.allow_network {
            self.allow_network = v;
        }
        if let Some(v) = o.judge_mode {
            self.judge.mode = v;
        }
        if let Some(v) = &o.judgments {
            self.judge.judgments = Some(v.clone());
        }
        if let Some(v) = &o.formats {
            self.report.formats = v.clone();
        }
        if let Some(w) = self.workers {
            if let Some(c) = &mut self.cascade {
                c.workers = w;
            }
            if let Some(m) = &mut self.matrix {
                m.workers = w;
            }
            if let Some(v) = &mut self.variant {
                v.workers = w;
            }
        }
    }

    fn referenced_endpoints(&self) -> Vec<(String, &str)> {
        let mut out = Vec::new();
        if let Some(c) = &self.cascade {
            out.push(("cascade.translator".to_string(), c.translator.as_str()));
            for s in &c.stages {
                if let Some(id) = &s.commenter {
                    out.push((format!("cascade stage `{}`", s.label), id.as_str()));
                }
            }
        }
        if let Some(m) = &self.matrix {
            for id in m.commenters.iter().filter(|c| *c != NO_COMMENTER) {
                out.push(("matrix.commenters".into(), id.as_str()));
            }
            for id in &m.translators {
                out.push(("matrix.translators".into(), id.as_str()));
            }
        }
        if let Some(v) = &self.variant {
            out.push(("variant.translator".into(), v.translator.as_str()));
            let optional = [
                ("variant.commenter", &v.commenter),
                ("variant.nl_translator", &v.nl_translator),
                ("variant.classifier", &v.classifier),
            ];
            for (what, id) in optional {
                if let Some(id) = id {
                    out.push((what.into(), id.as_str()));
                }
            }
            for id in &v.commenters {
                out.push(("variant.commenters".into(), id.as_str()));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        let mut ids = BTreeSet::new();
        for ep in &self.endpoints {
            if ep.id.is_empty() || ep.id == NO_COMMENTER {
                return bad(format!("`{}` is not a usable endpoint id", ep.id));
            }
            if !ids.insert(ep.id.as_str()) {
                return bad(format!("endpoint `{}` is defined twice", ep.id));
            }
            if self.replay && ep.kind == EndpointKind::Real {
                return bad(format!("replay mode forbids real endpoint `{}`", ep.id));
            }
            if ep.kind == EndpointKind::Real && ep.base_url.is_empty() {
                return bad(format!("real endpoint `{}` has no base_url", ep.id));
            }
        }
        if self.replay && self.replay_script.is_none() {
            return bad("replay mode needs replay_script".into());
        }
        for (what, id) in self.referenced_endpoints() {
            if !ids.contains(id) {
                return bad(format!("{what} refers to unknown endpoint `{id}`"));
            }
        }
        let mut pls = BTreeSet::new();
        for tc in &self.toolchains {
            if !pls.insert(tc.pl) {
                return bad(format!("toolchain for {} is defined twice", tc.pl));
            }
            tc.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        let mut tasks = BTreeSet::new();
        for p in &self.prompts {
            if !tasks.insert(p.task) {
                return bad(format!("prompt for {} is defined twice", p.task.key()));
            }
        }
        if self.judge.mode != JudgeMode::Process && self.judge.judgments.is_none() {
            return bad("judge modes replay and record need judge.judgments".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be positive".into());
        }
        if let Some(c) = &self.cascade {
            c.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        Ok(())
    }

    pub fn toolchains(&self) -> BTreeMap<Language, Toolchain> {
        let mut map: BTreeMap<Language, Toolchain> = Language::ALL
            .iter()
            .map(|&pl| (pl, Toolchain::default_for(pl)))
            .collect();
        for tc in &self.toolchains {
            map.insert(tc.pl, tc.clone());
        }
        map
    }

    pub fn prompt_set(&self) -> PromptSet {
        self.prompts
            .iter()
            .cloned()
            .fold(PromptSet::default(), PromptSet::with_override)
    }

    pub fn gateway(&self) -> Result<Gateway, GatewayError> {
        let gw = if self.replay {
            let path = self
                .replay_script
                .as_deref()
                .ok_or_else(|| GatewayError::Store("no replay script".into()))?;
            Gateway::replay_only(self.endpoints.clone(), ExchangeStore::open_read_only(path)?)
        } else {
            let cache = match &self.cache {
                Some(p) => ExchangeStore::open(p)?,
                None => ExchangeStore::in_memory(),
            };
            let script = match &self.replay_script {
                Some(p) => ExchangeStore::open_read_only(p)?,
                None => ExchangeStore::in_memory(),
            };
            Gateway::new(self.endpoints.clone(), cache, script).with_options(GatewayOptions {
                allow_network: self.allow_network,
                ..GatewayOptions::default()
            })
        };
        Ok(gw.with_prompts(self.prompt_set()))
    }

    pub fn process_judge(&self) -> Result<ProcessJudge, HarnessError> {
        let mut j = ProcessJudge::new(self.toolchains())?.isolate_network(self.judge.isolate_network);
        if let Some(n) = self.judge.max_processes {
            j = j.max_processes(n);
        }
        Ok(j)
    }

    pub fn judge(&self) -> Result<Arc<dyn Judge>, HarnessError> {
        let log = || {
            self.judge
                .judgments
                .clone()
                .ok_or_else(|| HarnessError::Io("no judgment log configured".into()))
        };
        Ok(match self.judge.mode {
            JudgeMode::Process => Arc::new(RecordedJudge::memo(Arc::new(self.process_judge()?))),
            JudgeMode::Replay => Arc::new(RecordedJudge::replay(&log()?)?),
            JudgeMode::Record => Arc::new(RecordedJudge::recording(Arc::new(self.process_judge()?), &log()?)?),
        })
    }

    pub fn to_toml(&self) -> Result<String, ConfigError> {
        toml::to_string_pretty(self).map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::Task;

    const SAMPLE: &str = r#"
corpus = "corpus"
output_dir = "out"
replay = true
replay_script = "replay.jsonl"

[[endpoints]]
id = "gpt"
model_name = "gpt-4o-mini"
kind = "replay"

[[endpoints]]
id = "ds"
model_name = "deepseek"
kind = "replay"

[cascade]
translator = "gpt"
pairs = [{ source = "Java", target = "Python" }]
stages = [{ label = "U" }, { label = "D", commenter = "ds" }]
"#;

    #[test]
    fn parses_and_resolves_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, SAMPLE).unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.corpus.as_deref(), Some(dir.path().join("corpus").as_path()));
        assert_eq!(cfg.cascade.as_ref().unwrap().stages.len(), 2);
        assert_eq!(cfg.report.formats, ReportFormat::ALL.to_vec());
        assert!(cfg.allow_network);
    }

    #[test]
    fn replay_forbids_real_endpoints() {
        let mut cfg = RunConfig::from_toml(SAMPLE).unwrap();
        cfg.endpoints[0].kind = EndpointKind::Real;
        cfg.endpoints[0].base_url = "http://localhost:1".into();
        assert!(cfg.validate().unwrap_err().to_string().contains("replay mode forbids"));
        cfg.replay = false;
        cfg.validate().unwrap();
    }

    #[test]
    fn unresolved_endpoint_is_rejected() {
        let mut cfg = RunConfig::from_toml(SAMPLE).unwrap();
        cfg.cascade.as_mut().unwrap().stages[1].commenter = Some("nope".into());
        assert!(cfg.validate().unwrap_err().to_string().contains("`nope`"));
    }

    #[test]
    fn overrides_are_overlays() {
        let base = RunConfig::from_toml(SAMPLE).unwrap();
        let mut cfg = base.clone();
        cfg.apply(&Overrides::default());
        assert_eq!(cfg, base);
        cfg.apply(&Overrides {
            workers: Some(9),
            output_dir: Some("/tmp/x".into()),
            ..Overrides::default()
        });
        assert_eq!(cfg.cascade.as_ref().unwrap().workers, 9);
        assert_eq!(cfg.output_dir.as_deref(), Some(Path::new("/tmp/x")));
        assert_eq!(cfg.endpoints, base.endpoints);
    }

    #[test]
    fn effective_config_round_trips() {
        let mut cfg = RunConfig::from_toml(SAMPLE).unwrap();
        cfg.prompts.push(PromptTemplate {
            user: "Translate {code}".into(),
            ..crate::gateway::default_template(Task::Translate)
        });
        cfg.toolchains.push(Toolchain::default_for(Language::Go));
        let text = cfg.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
        assert_eq!(cfg.prompt_set().get(Task::Translate).user, "Translate {code}");
    }

    #[test]
    fn judge_logs_are_required_outside_process_mode() {
        let mut cfg = RunConfig::from_toml(SAMPLE).unwrap();
        cfg.judge.mode = JudgeMode::Replay;
        assert!(cfg.validate().is_err());
        cfg.judge.judgments = Some("j.jsonl".into());
        cfg.validate().unwrap();
    }
}
