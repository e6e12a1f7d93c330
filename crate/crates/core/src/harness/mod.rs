//! Compile, run and test judging of programs in the subject languages.
//!
//! [`ProcessJudge`] drives real toolchains. [`RecordedJudge`] wraps any judge
//! with a JSONL judgment log keyed by a digest of (language, code,
//! testcases), and in replay mode serves only from that log, so pipelines
//! can be exercised without compilers installed.

mod compare;
mod process;
mod toolchain;

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::TestCase;
use crate::lang::Language;

pub use compare::{outputs_match, Comparison};
pub use process::ProcessSlots;
pub use toolchain::{
    java_public_class, probe, SourceNameRule, Toolchain, ToolchainError, ToolchainStatus, PLACEHOLDERS,
};

use process::{Exit, ProcessSpec};

const REPORT_STDOUT_LIMIT: usize = 4096;
const DIAGNOSTICS_LIMIT: usize = 16 * 1024;
const CAPTURE_LIMIT: usize = 16 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    Success,
    CompileFail,
    TestcaseFail,
    RuntimeError,
    Timeout,
    ExtractionFail,
}

/// Report grouping: runtime errors, timeouts and extraction failures fold
/// into `Other`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Bucket {
    Success,
    TestcaseFail,
    CompileFail,
    Other,
}

impl Bucket {
    pub const ALL: [Bucket; 4] = [
        Bucket::Success,
        Bucket::TestcaseFail,
        Bucket::CompileFail,
        Bucket::Other,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Bucket::Success => "Success",
            Bucket::TestcaseFail => "Testcase-Fail",
            Bucket::CompileFail => "Compile-Fail",
            Bucket::Other => "Other",
        }
    }
}

impl Verdict {
    pub fn bucket(self) -> Bucket {
        match self {
            Verdict::Success => Bucket::Success,
            Verdict::TestcaseFail => Bucket::TestcaseFail,
            Verdict::CompileFail => Bucket::CompileFail,
            Verdict::RuntimeError | Verdict::Timeout | Verdict::ExtractionFail => Bucket::Other,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestOutcome {
    Pass,
    WrongOutput,
    Runtime,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestcaseResult {
    pub index: usize,
    pub outcome: TestOutcome,
    /// First few KiB of what the program printed.
    pub actual_stdout: String,
    pub duration_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionReport {
    pub verdict: Verdict,
    pub per_testcase: Vec<TestcaseResult>,
    pub compile_diagnostics: String,
    pub total_duration_ms: u64,
}

impl ExecutionReport {
    pub fn compile_fail(diagnostics: String, duration_ms: u64) -> Self {
        ExecutionReport {
            verdict: Verdict::CompileFail,
            per_testcase: Vec::new(),
            compile_diagnostics: diagnostics,
            total_duration_ms: duration_ms,
        }
    }

    pub fn extraction_fail(detail: String) -> Self {
        ExecutionReport {
            verdict: Verdict::ExtractionFail,
            per_testcase: Vec::new(),
            compile_diagnostics: detail,
            total_duration_ms: 0,
        }
    }

    /// Builds a report from per-testcase outcomes using the fixed precedence
    /// runtime > timeout > wrong output > success.
    pub fn from_outcomes(
        per_testcase: Vec<TestcaseResult>,
        compile_diagnostics: String,
        total_duration_ms: u64,
    ) -> Self {
        let has = |o: TestOutcome| per_testcase.iter().any(|t| t.outcome == o);
        let verdict = if has(TestOutcome::Runtime) {
            Verdict::RuntimeError
        } else if has(TestOutcome::Timeout) {
            Verdict::Timeout
        } else if has(TestOutcome::WrongOutput) {
            Verdict::TestcaseFail
        } else {
            Verdict::Success
        };
        ExecutionReport {
            verdict,
            per_testcase,
            compile_diagnostics,
            total_duration_ms,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Success
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HarnessError {
    #[error("no toolchain configured for {0}")]
    NotConfigured(Language),
    #[error("{pl} toolchain program `{program}` is not installed")]
    Unavailable { pl: Language, program: String },
    #[error("cannot judge an empty program")]
    EmptyCode,
    #[error("cannot judge a program without testcases")]
    NoTestcases,
    #[error("no recorded judgment for key {0}")]
    ReplayMiss(String),
    #[error("judge i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Toolchain(#[from] ToolchainError),
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

pub trait Judge: Send + Sync {
    fn judge(&self, code: &str, pl: Language, testcases: &[TestCase]) -> Result<ExecutionReport, HarnessError>;
}

/// Source written to a fresh directory, ready to compile.
#[derive(Debug, Clone)]
pub struct Materialized {
    pub pl: Language,
    pub workdir: PathBuf,
    pub src: PathBuf,
    /// `<workdir>/<stem>` for most languages, the main class for Java.
    pub bin: String,
}

#[derive(Debug, Clone)]
pub enum CompileOutcome {
    Ok { artifact: Materialized, duration_ms: u64 },
    CompileFail { diagnostics: String, duration_ms: u64 },
}

fn lossy_prefix(bytes: &[u8], limit: usize) -> String {
    let cut = &bytes[..bytes.len().min(limit)];
    String::from_utf8_lossy(cut).into_owned()
}

fn millis(d: Duration) -> u64 {
    d.as_millis().min(u64::MAX as u128) as u64
}

/// Judges by compiling and running real processes.
#[derive(Debug, Clone)]
pub struct ProcessJudge {
    toolchains: BTreeMap<Language, Toolchain>,
    comparison: Comparison,
    isolate_network: bool,
    slots: Arc<ProcessSlots>,
    scratch: Option<PathBuf>,
}

impl ProcessJudge {
    pub fn new(toolchains: BTreeMap<Language, Toolchain>) -> Result<Self, HarnessError> {
        for tc in toolchains.values() {
            tc.validate()?;
        }
        let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(2);
        Ok(ProcessJudge {
            toolchains,
            comparison: Comparison::default(),
            isolate_network: true,
            slots: Arc::new(ProcessSlots::new(workers)),
            scratch: None,
        })
    }

    pub fn with_defaults() -> Self {
        let all = Language::ALL
            .iter()
            .map(|&pl| (pl, Toolchain::default_for(pl)))
            .collect();
        ProcessJudge::new(all).expect("default toolchains are valid")
    }

    pub fn comparison(mut self, mode: Comparison) -> Self {
        self.comparison = mode;
        self
    }

    pub fn isolate_network(mut self, on: bool) -> Self {
        self.isolate_network = on;
        self
    }

    pub fn max_processes(mut self, n: usize) -> Self {
        self.slots = Arc::new(ProcessSlots::new(n));
        self
    }

    /// Parent directory for per-judgment work directories.
    pub fn scratch_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.scratch = Some(dir.into());
        self
    }

    pub fn toolchain(&self, pl: Language) -> Result<&Toolchain, HarnessError> {
        self.toolchains.get(&pl).ok_or(HarnessError::NotConfigured(pl))
    }

    pub fn toolchains(&self) -> &BTreeMap<Language, Toolchain> {
        &self.toolchains
    }

    pub fn materialize(&self, code: &str, pl: Language, workdir: &Path) -> Result<Materialized, HarnessError> {
        let tc = self.toolchain(pl)?;
        let (file, launch) = toolchain::source_names(code, &tc.source_name_rule, pl);
        let src = workdir.join(&file);
        fs::write(&src, code)?;
        let bin = if pl == Language::Java {
            launch
        } else {
            workdir.join(&launch).to_string_lossy().into_owned()
        };
        Ok(Materialized {
            pl,
            workdir: workdir.to_path_buf(),
            src,
            bin,
        })
    }

    fn vars(m: &Materialized) -> BTreeMap<&'static str, String> {
        let mut vars = BTreeMap::new();
        vars.insert("src", m.src.to_string_lossy().into_owned());
        vars.insert("bin", m.bin.clone());
        vars.insert("workdir", m.workdir.to_string_lossy().into_owned());
        vars
    }

    fn spawn(&self, spec: &ProcessSpec<'_>, pl: Language) -> Result<process::ProcessOutput, HarnessError> {
        let _slot = self.slots.acquire();
        process::run(spec).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied => HarnessError::Unavailable {
                pl,
                program: spec.argv.first().cloned().unwrap_or_default(),
            },
            _ => HarnessError::Io(e.to_string()),
        })
    }

    pub fn compile(&self, m: Materialized) -> Result<CompileOutcome, HarnessError> {
        let tc = self.toolchain(m.pl)?;
        if tc.compile_cmd.trim().is_empty() {
            return Ok(CompileOutcome::Ok {
                artifact: m,
                duration_ms: 0,
            });
        }
        let argv = toolchain::render(&tc.compile_cmd, &Self::vars(&m));
        let out = self.spawn(
            &ProcessSpec {
                argv,
                cwd: &m.workdir,
                env: &tc.env,
                stdin: b"",
                timeout: Duration::from_secs_f64(tc.compile_timeout_s),
                memory_limit_mb: None,
                isolate_network: false,
                output_limit: DIAGNOSTICS_LIMIT,
            },
            m.pl,
        )?;
        let duration_ms = millis(out.duration);
        if out.success() {
            return Ok(CompileOutcome::Ok {
                artifact: m,
                duration_ms,
            });
        }
        let mut diagnostics = lossy_prefix(&out.stderr, DIAGNOSTICS_LIMIT);
        diagnostics.push_str(&lossy_prefix(&out.stdout, DIAGNOSTICS_LIMIT));
        if out.timed_out {
            diagnostics.push_str(&format!("\ncompilation timed out after {}s", tc.compile_timeout_s));
        }
        if diagnostics.trim().is_empty() {
            diagnostics = format!("compiler exited with {:?}", out.exit);
        }
        Ok(CompileOutcome::CompileFail {
            diagnostics,
            duration_ms,
        })
    }

    pub fn run_testcase(&self, artifact: &Materialized, tc: &TestCase) -> Result<TestcaseResult, HarnessError> {
        let chain = self.toolchain(artifact.pl)?;
        let argv = toolchain::render(&chain.run_cmd, &Self::vars(artifact));
        let out = self.spawn(
            &ProcessSpec {
                argv,
                cwd: &artifact.workdir,
                env: &chain.env,
                stdin: tc.stdin.as_bytes(),
                timeout: Duration::from_secs_f64(chain.run_timeout_s),
                memory_limit_mb: Some(chain.memory_limit_mb),
                isolate_network: self.isolate_network,
                output_limit: CAPTURE_LIMIT,
            },
            artifact.pl,
        )?;
        let actual = String::from_utf8_lossy(&out.stdout);
        let outcome = if out.timed_out {
            TestOutcome::Timeout
        } else if !matches!(out.exit, Exit::Code(0)) {
            TestOutcome::Runtime
        } else if !out.stdout_truncated && outputs_match(&tc.expected_stdout, &actual, self.comparison) {
            TestOutcome::Pass
        } else {
            TestOutcome::WrongOutput
        };
        Ok(TestcaseResult {
            index: tc.index,
            outcome,
            actual_stdout: lossy_prefix(&out.stdout, REPORT_STDOUT_LIMIT),
            duration_ms: millis(out.duration),
        })
    }

    fn workdir(&self) -> std::io::Result<tempfile::TempDir> {
        let mut b = tempfile::Builder::new();
        b.prefix("judge-");
        match &self.scratch {
            Some(d) => {
                fs::create_dir_all(d)?;
                b.tempdir_in(d)
            }
            None => b.tempdir(),
        }
    }
}

impl Judge for ProcessJudge {
    fn judge(&self, code: &str, pl: Language, testcases: &[TestCase]) -> Result<ExecutionReport, HarnessError> {
        if code.trim().is_empty() {
            return Err(HarnessError::EmptyCode);
        }
        if testcases.is_empty() {
            return Err(HarnessError::NoTestcases);
        }
        let start = Instant::now();
        let dir = self.workdir()?;
        let m = self.materialize(code, pl, dir.path())?;
        let artifact = match self.compile(m)? {
            CompileOutcome::Ok { artifact, .. } => artifact,
            CompileOutcome::CompileFail { diagnostics, .. } => {
                return Ok(ExecutionReport::compile_fail(diagnostics, millis(start.elapsed())));
            }
        };
        let mut results = Vec::with_capacity(testcases.len());
        for tc in testcases {
            results.push(self.run_testcase(&artifact, tc)?);
        }
        Ok(ExecutionReport::from_outcomes(
            results,
            String::new(),
            millis(start.elapsed()),
        ))
    }
}

/// Digest identifying one judgment request.
pub fn judgment_key(code: &str, pl: Language, testcases: &[TestCase]) -> String {
    let mut h = Sha256::new();
    h.update(pl.key().as_bytes());
    h.update([0]);
    h.update((code.len() as u64).to_le_bytes());
    h.update(code.as_bytes());
    for tc in testcases {
        h.update((tc.index as u64).to_le_bytes());
        h.update((tc.stdin.len() as u64).to_le_bytes());
        h.update(tc.stdin.as_bytes());
        h.update((tc.expected_stdout.len() as u64).to_le_bytes());
        h.update(tc.expected_stdout.as_bytes());
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct JudgmentRecord {
    key: String,
    pl: Language,
    report: ExecutionReport,
}

/// Judgment log in front of an optional real judge.
pub struct RecordedJudge {
    inner: Option<Arc<dyn Judge>>,
    entries: RwLock<HashMap<String, ExecutionReport>>,
    sink: Option<Mutex<File>>,
    delegated: AtomicUsize,
}

impl RecordedJudge {
    fn load(path: &Path) -> Result<HashMap<String, ExecutionReport>, HarnessError> {
        let mut entries = HashMap::new();
        if !path.exists() {
            return Ok(entries);
        }
        let reader = BufReader::new(File::open(path)?);
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: JudgmentRecord = serde_json::from_str(&line)
                .map_err(|e| HarnessError::Io(format!("{}:{}: {e}", path.display(), n + 1)))?;
            entries.insert(rec.key, rec.report);
        }
        Ok(entries)
    }

    /// Serves only recorded judgments; a miss is an error.
    pub fn replay(path: &Path) -> Result<Self, HarnessError> {
        Ok(RecordedJudge {
            inner: None,
            entries: RwLock::new(Self::load(path)?),
            sink: None,
            delegated: AtomicUsize::new(0),
        })
    }

    /// Serves recorded judgments and appends new ones produced by `inner`.
    pub fn recording(inner: Arc<dyn Judge>, path: &Path) -> Result<Self, HarnessError> {
        let entries = Self::load(path)?;
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(RecordedJudge {
            inner: Some(inner),
            entries: RwLock::new(entries),
            sink: Some(Mutex::new(file)),
            delegated: AtomicUsize::new(0),
        })
    }

    /// In-memory memo without persistence.
    pub fn memo(inner: Arc<dyn Judge>) -> Self {
        RecordedJudge {
            inner: Some(inner),
            entries: RwLock::new(HashMap::new()),
            sink: None,
            delegated: AtomicUsize::new(0),
        }
    }

    /// Number of judgments that reached the wrapped judge.
    pub fn delegated(&self) -> usize {
        self.delegated.load(Ordering::SeqCst)
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Judge for RecordedJudge {
    fn judge(&self, code: &str, pl: Language, testcases: &[TestCase]) -> Result<ExecutionReport, HarnessError> {
        let key = judgment_key(code, pl, testcases);
        if let Some(r) = self.entries.read().unwrap().get(&key) {
            return Ok(r.clone());
        }
        let Some(inner) = &self.inner else {
            return Err(HarnessError::ReplayMiss(key));
        };
        let report = inner.judge(code, pl, testcases)?;
        self.delegated.fetch_add(1, Ordering::SeqCst);
        let mut entries = self.entries.write().unwrap();
        if let Some(existing) = entries.get(&key) {
            return Ok(existing.clone());
        }
        if let Some(sink) = &self.sink {
            let rec = JudgmentRecord {
                key: key.clone(),
                pl,
                report: report.clone(),
            };
            let mut line = serde_json::to_string(&rec).map_err(|e| HarnessError::Io(e.to_string()))?;
            line.push('\n');
            let mut f = sink.lock().unwrap();
            f.write_all(line.as_bytes())?;
            f.flush()?;
        }
        entries.insert(key, report.clone());
        Ok(report)
    }
}
