//! Command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning                                                        |
//! |------|----------------------------------------------------------------|
//! | 0    | success                                                        |
//! | 1    | negative outcome: failing verdict, invalid corpus, missing data |
//! | 2    | usage error                                                    |
//! | 3    | invalid configuration                                          |
//! | 4    | environment: toolchain missing or unusable                     |
//! | 5    | model gateway failure                                          |
//! | 6    | run halted by a budget cap or an interrupt                     |
//! | 7    | file or report i/o                                             |

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{emit_report, load_run_dir, MetricsBundle, ReportError, ReportFormat};
use crate::config::{ConfigError, JudgeMode, Overrides, RunConfig};
use crate::corpus::{self, CodeSample, Origin, ValidationStatus};
use crate::gateway::{self, CommentOptions, Density, Gateway, NaturalLanguage, TaskError};
use crate::harness::{self, HarnessError};
use crate::lang::Language;
use crate::orchestrator::{
    self, files, logical_comments, run_cascade, run_matrix, run_variant_experiment, AttemptStatus, ClassifiedComment,
    OrchestratorError, RunDir, VariantKind,
};
use crate::surface::{self, DensityBase, ScanOptions};

/// Set from a Ctrl-C handler; cascades stop at the next stage boundary.
pub static STOP: AtomicBool = AtomicBool::new(false);

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_ENVIRONMENT: i32 = 4;
pub const EXIT_GATEWAY: i32 = 5;
pub const EXIT_HALTED: i32 = 6;
pub const EXIT_IO: i32 = 7;

/// Directory under a run's output directory that receives its report.
pub const REPORT_DIR: &str = "report";

#[derive(Debug, Parser)]
#[command(
    name = "codetrans",
    version,
    about = "Comment-aware LLM code translation experiments"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Run config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// Output (run) directory.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Serve every model request from the replay script.
    #[arg(long, global = true)]
    pub replay: bool,
    #[arg(long, global = true)]
    pub replay_script: Option<PathBuf>,
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    /// Fail on cache misses instead of calling real endpoints.
    #[arg(long, global = true)]
    pub no_network: bool,
    /// process, replay or record.
    #[arg(long, global = true, value_parser = parse_judge_mode)]
    pub judge_mode: Option<JudgeMode>,
    /// Judgment log for the replay and record judge modes.
    #[arg(long, global = true)]
    pub judgments: Option<PathBuf>,
    /// Report formats, comma separated: json, csv, txt.
    #[arg(long, global = true, value_delimiter = ',')]
    pub format: Option<Vec<ReportFormat>>,
}

fn parse_judge_mode(s: &str) -> Result<JudgeMode, String> {
    match s {
        "process" => Ok(JudgeMode::Process),
        "replay" => Ok(JudgeMode::Replay),
        "record" => Ok(JudgeMode::Record),
        _ => Err(format!("unknown judge mode `{s}` (process, replay, record)")),
    }
}

fn parse_density(s: &str) -> Result<Density, String> {
    Density::ALL
        .into_iter()
        .find(|d| d.key() == s.replace('-', "_"))
        .ok_or_else(|| format!("unknown density `{s}` (one_third, two_thirds, all)"))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check corpus statistics and that every sample passes its testcases.
    ValidateCorpus {
        /// Skip judging the samples.
        #[arg(long)]
        stats_only: bool,
    },
    /// Remove comments from a source file.
    StripComments {
        file: PathBuf,
        #[arg(long)]
        lang: Option<Language>,
        /// Write here instead of stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Print the comment density of source files.
    Density {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        lang: Option<Language>,
        /// Count blank lines in the denominator.
        #[arg(long)]
        all_lines: bool,
    },
    /// Comment a source file with a model.
    Comment {
        file: PathBuf,
        #[arg(long)]
        commenter: String,
        #[arg(long)]
        lang: Option<Language>,
        #[arg(long, value_parser = parse_density, default_value = "all")]
        density: Density,
        #[arg(long, default_value = "English")]
        natural_language: NaturalLanguage,
        /// Add the instruction to leave code untouched.
        #[arg(long)]
        strict: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Translate a source file with a model.
    Translate {
        file: PathBuf,
        #[arg(long)]
        to: Language,
        #[arg(long)]
        translator: String,
        #[arg(long)]
        lang: Option<Language>,
        /// Pseudocode file appended to the prompt.
        #[arg(long)]
        pseudocode: Option<PathBuf>,
        /// Print the raw response instead of the extracted code.
        #[arg(long)]
        raw: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Compile and run a program against in_k.txt/out_k.txt testcases.
    Judge {
        file: PathBuf,
        /// Directory holding the testcases; defaults to the file's directory.
        #[arg(long)]
        tests: Option<PathBuf>,
        #[arg(long)]
        lang: Option<Language>,
        /// Print the full execution report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run the comment-on-failure cascade from the config's [cascade].
    RunCascade,
    /// Run the translation matrix from the config's [matrix].
    RunMatrix,
    /// Run a variant study from the config's [variant].
    RunVariant {
        /// density, nl_language, placement or intent_corpus.
        #[arg(long)]
        kind: Option<VariantKind>,
    },
    /// Label the comments of source files with intents.
    ClassifyIntents {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        classifier: String,
        #[arg(long)]
        lang: Option<Language>,
    },
    /// Compute metrics over one or more run directories.
    Report {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        /// Report directory; defaults to <first run>/report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probe the configured toolchains.
    EnvCheck,
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::new(EXIT_CONFIG, e.to_string())
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        let code = match e {
            HarnessError::EmptyCode | HarnessError::NoTestcases | HarnessError::ReplayMiss(_) => EXIT_NEGATIVE,
            HarnessError::Io(_) => EXIT_IO,
            HarnessError::Toolchain(_) => EXIT_CONFIG,
            _ => EXIT_ENVIRONMENT,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<gateway::GatewayError> for Failure {
    fn from(e: gateway::GatewayError) -> Self {
        let code = match e {
            gateway::GatewayError::UnknownEndpoint(_) => EXIT_CONFIG,
            _ => EXIT_GATEWAY,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<TaskError> for Failure {
    fn from(e: TaskError) -> Self {
        match e {
            TaskError::Gateway(g) => g.into(),
            TaskError::Template(t) => Failure::new(EXIT_CONFIG, t.to_string()),
            other => Failure::new(EXIT_NEGATIVE, other.to_string()),
        }
    }
}

impl From<OrchestratorError> for Failure {
    fn from(e: OrchestratorError) -> Self {
        let code = match e {
            OrchestratorError::Environment(_) => EXIT_ENVIRONMENT,
            OrchestratorError::Io(_) => EXIT_IO,
            _ => EXIT_CONFIG,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        let code = match e {
            ReportError::EmptyRun(_) => EXIT_NEGATIVE,
            _ => EXIT_IO,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<corpus::CorpusError> for Failure {
    fn from(e: corpus::CorpusError) -> Self {
        Failure::new(EXIT_NEGATIVE, e.to_string())
    }
}

type Outcome = Result<i32, Failure>;

fn io(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::new(EXIT_IO, format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io(path, e))
}

fn language_of(path: &Path, explicit: Option<Language>) -> Result<Language, Failure> {
    if let Some(pl) = explicit {
        return Ok(pl);
    }
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    Language::from_fence_tag(ext).ok_or_else(|| {
        Failure::new(
            EXIT_USAGE,
            format!("{}: cannot tell the language, pass --lang", path.display()),
        )
    })
}

fn emit(out: &mut dyn Write, dest: Option<&Path>, text: &str) -> Result<(), Failure> {
    match dest {
        Some(p) => fs::write(p, text).map_err(|e| io(p, e)),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::new(EXIT_IO, e.to_string())),
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

struct Context {
    global: GlobalArgs,
}

impl Context {
    fn overrides(&self) -> Overrides {
        let g = &self.global;
        Overrides {
            corpus: g.corpus.clone(),
            output_dir: g.output.clone(),
            workers: g.workers,
            replay: g.replay.then_some(true),
            replay_script: g.replay_script.clone(),
            cache: g.cache.clone(),
            allow_network: g.no_network.then_some(false),
            judge_mode: g.judge_mode,
            judgments: g.judgments.clone(),
            formats: g.format.clone(),
        }
    }

    /// The config file (or defaults) with flag overlays, validated.
    fn config(&self, required: bool) -> Result<RunConfig, Failure> {
        let mut cfg = match &self.global.config {
            Some(p) => RunConfig::load(p)?,
            None if required => return Err(Failure::new(EXIT_USAGE, "this command needs --config")),
            None => RunConfig::default(),
        };
        cfg.apply(&self.overrides());
        cfg.validate()?;
        Ok(cfg)
    }

    fn scan(&self) -> Result<ScanOptions, Failure> {
        Ok(self.config(false)?.scan)
    }
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let ctx = Context { global: cli.global };
    match dispatch(&ctx, cli.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(ctx: &Context, cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match cmd {
        Command::ValidateCorpus { stats_only } => validate_corpus(ctx, stats_only, out),
        Command::StripComments { file, lang, out: dest } => {
            let pl = language_of(&file, lang)?;
            let code = read(&file)?;
            let stripped = surface::strip_comments_with(&code, pl, &ctx.scan()?)
                .map_err(|e| Failure::new(EXIT_NEGATIVE, format!("{}: {e}", file.display())))?;
            emit(out, dest.as_deref(), &stripped)?;
            Ok(EXIT_OK)
        }
        Command::Density { files, lang, all_lines } => {
            let mut opts = ctx.scan()?;
            if all_lines {
                opts.density_base = DensityBase::AllLines;
            }
            for f in &files {
                let pl = language_of(f, lang)?;
                let d = surface::comment_density_with(&read(f)?, pl, &opts)
                    .map_err(|e| Failure::new(EXIT_NEGATIVE, format!("{}: {e}", f.display())))?;
                emit(out, None, &format!("{}\t{d:.4}\n", f.display()))?;
            }
            Ok(EXIT_OK)
        }
        Command::Comment {
            file,
            commenter,
            lang,
            density,
            natural_language,
            strict,
            out: dest,
        } => {
            let cfg = ctx.config(true)?;
            let gw = cfg.gateway()?;
            let sample = file_sample(&file, lang)?;
            let opts = CommentOptions {
                density,
                natural_language,
            };
            let c = gateway::generate_comments(&gw, &commenter, &sample, &opts, strict)?;
            emit(out, dest.as_deref(), &with_newline(&c.code))?;
            if !c.fidelity.accepted() {
                let _ = writeln!(
                    err,
                    "warning: commented code changed more than comments: {:?}",
                    c.fidelity
                );
                return Ok(EXIT_NEGATIVE);
            }
            Ok(EXIT_OK)
        }
        Command::Translate {
            file,
            to,
            translator,
            lang,
            pseudocode,
            raw,
            out: dest,
        } => {
            let cfg = ctx.config(true)?;
            let gw = cfg.gateway()?;
            let pl = language_of(&file, lang)?;
            let pseudo = pseudocode.as_deref().map(read).transpose()?;
            let ex = gateway::translate_code(&gw, &translator, &read(&file)?, pl, to, pseudo.as_deref())?;
            if raw {
                emit(out, dest.as_deref(), &with_newline(&ex.response))?;
                return Ok(EXIT_OK);
            }
            match surface::extract_code_block(&ex.response, to) {
                Ok(x) => {
                    emit(out, dest.as_deref(), &with_newline(&x.code))?;
                    Ok(EXIT_OK)
                }
                Err(e) => Err(Failure::new(
                    EXIT_NEGATIVE,
                    format!("no {to} code in the response: {e}"),
                )),
            }
        }
        Command::Judge {
            file,
            tests,
            lang,
            json: as_json,
        } => {
            let cfg = ctx.config(false)?;
            let pl = language_of(&file, lang)?;
            let dir = tests.unwrap_or_else(|| file.parent().map(Path::to_path_buf).unwrap_or_default());
            let tcs = corpus::read_testcases(&dir).map_err(|e| io(&dir, e))?;
            if tcs.is_empty() {
                return Err(Failure::new(
                    EXIT_USAGE,
                    format!("{}: no in_0.txt/out_0.txt testcases", dir.display()),
                ));
            }
            let judge = cfg.judge()?;
            let report = judge.judge(&read(&file)?, pl, &tcs)?;
            if as_json {
                emit(out, None, &json(&report))?;
            } else {
                emit(out, None, &format!("{}\n", report.verdict))?;
            }
            Ok(if report.passed() { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::RunCascade => run_experiment(ctx, Experiment::Cascade, out, err),
        Command::RunMatrix => run_experiment(ctx, Experiment::Matrix, out, err),
        Command::RunVariant { kind } => run_experiment(ctx, Experiment::Variant(kind), out, err),
        Command::ClassifyIntents {
            files,
            classifier,
            lang,
        } => {
            let cfg = ctx.config(true)?;
            let gw = cfg.gateway()?;
            let mut rows = Vec::new();
            for f in &files {
                rows.extend(classify_file(&gw, &cfg.scan, &classifier, f, lang)?);
            }
            emit(out, None, &json(&rows))?;
            Ok(if rows.iter().any(|r| r.error.is_some()) {
                EXIT_NEGATIVE
            } else {
                EXIT_OK
            })
        }
        Command::Report { runs, out: dest } => {
            let cfg = ctx.config(false)?;
            let dest = dest.unwrap_or_else(|| runs[0].join(REPORT_DIR));
            let written = report(&runs, &dest, &cfg.report.formats)?;
            for p in written {
                emit(out, None, &format!("{}\n", p.display()))?;
            }
            Ok(EXIT_OK)
        }
        Command::EnvCheck => {
            let cfg = ctx.config(false)?;
            let mut missing = 0;
            for tc in cfg.toolchains().values() {
                let st = harness::probe(tc);
                let line = if st.available {
                    format!("{:<7} ok       {}\n", st.pl.name(), st.version.unwrap_or_default())
                } else {
                    missing += 1;
                    format!("{:<7} MISSING  {}\n", st.pl.name(), st.missing.join(", "))
                };
                emit(out, None, &line)?;
            }
            Ok(if missing == 0 { EXIT_OK } else { EXIT_ENVIRONMENT })
        }
    }
}

fn with_newline(s: &str) -> String {
    let mut s = s.to_string();
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn file_sample(file: &Path, lang: Option<Language>) -> Result<CodeSample, Failure> {
    let pl = language_of(file, lang)?;
    let id = file.file_stem().and_then(|s| s.to_str()).unwrap_or("input");
    Ok(CodeSample::new(id, Origin::Custom, pl, read(file)?, Vec::new()))
}

fn classify_file(
    gw: &Gateway,
    scan: &ScanOptions,
    classifier: &str,
    file: &Path,
    lang: Option<Language>,
) -> Result<Vec<ClassifiedComment>, Failure> {
    let pl = language_of(file, lang)?;
    let spans = surface::scan_comments_with(&read(file)?, pl, scan)
        .map_err(|e| Failure::new(EXIT_NEGATIVE, format!("{}: {e}", file.display())))?;
    let mut rows = Vec::new();
    for (start_line, text) in logical_comments(&spans) {
        let (labels, error) = match gateway::classify_intents(gw, classifier, &text) {
            Ok((c, _)) => (c.labels.into_iter().collect(), None),
            Err(TaskError::Gateway(g)) => return Err(g.into()),
            Err(e) => (Vec::new(), Some(e.to_string())),
        };
        rows.push(ClassifiedComment {
            sample_id: file.display().to_string(),
            source: orchestrator::AUTHOR.to_string(),
            start_line,
            words: orchestrator::comment_words(&text),
            text,
            labels,
            error,
        });
    }
    Ok(rows)
}

fn validate_corpus(ctx: &Context, stats_only: bool, out: &mut dyn Write) -> Outcome {
    let cfg = ctx.config(false)?;
    let root = cfg
        .corpus
        .clone()
        .ok_or_else(|| Failure::new(EXIT_USAGE, "no corpus given (--corpus or corpus in the config)"))?;
    let samples = corpus::load_corpus_dir(&root)?;
    let manifest = corpus::read_manifest(&root.join(corpus::MANIFEST_FILE))?;
    let stats = corpus::corpus_stats(&samples)?;
    let mut text = format!("{:<7} {:>7} {:>9} {:>14}\n", "lang", "samples", "loc", "avg testcases");
    for (pl, s) in &stats.per_pl {
        let loc = format!("{}-{}", s.min_loc, s.max_loc);
        text.push_str(&format!(
            "{:<7} {:>7} {:>9} {:>14}\n",
            pl.name(),
            s.sample_count,
            loc,
            format!("{} ({})", s.avg_testcases, s.avg_testcases_exact)
        ));
    }
    emit(out, None, &text)?;
    let mut ok = true;
    for m in corpus::declared_mismatches(&manifest, &stats) {
        ok = false;
        emit(out, None, &format!("mismatch: {m}\n"))?;
    }
    if !stats_only {
        let judge = cfg.judge()?;
        for s in &samples {
            let r = corpus::validate_sample(s, judge.as_ref())?;
            if let ValidationStatus::SelfTestFailure { detail } = r.status {
                ok = false;
                emit(out, None, &format!("invalid: {} {detail}\n", r.id))?;
            }
        }
        emit(out, None, &format!("judged {} sample(s)\n", samples.len()))?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_NEGATIVE })
}

/// Builds the metrics bundle over `runs` and writes it to `dest`.
pub fn report(runs: &[PathBuf], dest: &Path, formats: &[ReportFormat]) -> Result<Vec<PathBuf>, Failure> {
    let data = runs.iter().map(|r| load_run_dir(r)).collect::<Result<Vec<_>, _>>()?;
    let bundle = MetricsBundle::from_runs(&data);
    Ok(emit_report(&bundle, dest, formats)?)
}

enum Experiment {
    Cascade,
    Matrix,
    Variant(Option<VariantKind>),
}

#[derive(Serialize)]
struct ToolVersions {
    codetrans: &'static str,
    judge_mode: JudgeMode,
    toolchains: Vec<harness::ToolchainStatus>,
}

/// Writes `name`, or `<stem>.<k>.<ext>` when an earlier run of the same
/// directory left a different snapshot; earlier snapshots are never
/// rewritten.
fn snapshot(dir: &RunDir, name: &str, text: &str) -> Result<(), Failure> {
    let (stem, ext) = name.rsplit_once('.').unwrap_or((name, ""));
    let mut candidate = name.to_string();
    for k in 1.. {
        let p = dir.path(&candidate);
        match fs::read_to_string(&p) {
            Ok(existing) if existing == text => return Ok(()),
            Ok(_) => candidate = format!("{stem}.{k}.{ext}"),
            Err(_) => return Ok(dir.write_text(&candidate, text)?),
        }
    }
    unreachable!()
}

fn run_experiment(ctx: &Context, which: Experiment, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let mut cfg = ctx.config(true)?;
    if let Experiment::Variant(Some(kind)) = which {
        match &mut cfg.variant {
            Some(v) => v.kind = kind,
            None => return Err(Failure::new(EXIT_CONFIG, "the config has no [variant] section")),
        }
    }
    let section = match which {
        Experiment::Cascade => cfg.cascade.is_some().then_some(()).ok_or("[cascade]"),
        Experiment::Matrix => cfg.matrix.is_some().then_some(()).ok_or("[matrix]"),
        Experiment::Variant(_) => cfg.variant.is_some().then_some(()).ok_or("[variant]"),
    };
    if let Err(name) = section {
        return Err(Failure::new(EXIT_CONFIG, format!("the config has no {name} section")));
    }
    let corpus_dir = cfg
        .corpus
        .clone()
        .ok_or_else(|| Failure::new(EXIT_CONFIG, "no corpus given (--corpus or corpus in the config)"))?;
    let out_dir = cfg.output_dir.clone().ok_or_else(|| {
        Failure::new(
            EXIT_CONFIG,
            "no output directory given (--output or output_dir in the config)",
        )
    })?;
    let samples = corpus::load_corpus_dir(&corpus_dir)?;
    let run_dir = RunDir::create(&out_dir)?;
    snapshot(&run_dir, files::EFFECTIVE_CONFIG, &cfg.to_toml()?)?;
    let versions = ToolVersions {
        codetrans: env!("CARGO_PKG_VERSION"),
        judge_mode: cfg.judge.mode,
        toolchains: cfg.toolchains().values().map(harness::probe).collect(),
    };
    snapshot(&run_dir, files::TOOL_VERSIONS, &json(&versions))?;

    let gw = cfg.gateway()?;
    let judge = cfg.judge()?;
    if cfg.validate_sources {
        for s in &samples {
            let r = corpus::validate_sample(s, judge.as_ref())?;
            if let ValidationStatus::SelfTestFailure { detail } = r.status {
                return Err(Failure::new(
                    EXIT_NEGATIVE,
                    format!("sample {} fails its own testcases: {detail}", r.id),
                ));
            }
        }
    }

    let mut code = EXIT_OK;
    let gateway_failures;
    match which {
        Experiment::Cascade => {
            let c = cfg.cascade.as_ref().expect("checked above");
            let run = run_cascade(&samples, &gw, judge.as_ref(), c, Some(&run_dir), Some(&STOP))?;
            let r = &run.result;
            for s in &r.stages {
                emit(
                    out,
                    None,
                    &format!(
                        "stage {} {:<10} attempted {:>5}  new {:>5}  cumulative {:>5}/{}\n",
                        s.index, s.label, s.attempted, s.new_successes, s.cumulative_successes, r.total_pairs
                    ),
                )?;
            }
            gateway_failures = r.stages.iter().map(|s| s.gateway_failures).sum::<usize>();
            if let Some(h) = &r.halt {
                let _ = writeln!(err, "halted: {}", serde_json::to_string(h).unwrap_or_default());
                code = EXIT_HALTED;
            }
        }
        Experiment::Matrix => {
            let m = cfg.matrix.as_ref().expect("checked above");
            let run = run_matrix(&samples, &gw, judge.as_ref(), m, Some(&run_dir))?;
            emit(out, None, &format!("{} attempt(s)\n", run.attempts.len()))?;
            gateway_failures = count_gateway_failures(&run.attempts);
        }
        Experiment::Variant(_) => {
            let v = cfg.variant.as_ref().expect("checked above");
            let run = run_variant_experiment(&samples, &gw, judge.as_ref(), v, Some(&run_dir))?;
            emit(out, None, &format!("{} attempt(s)\n", run.attempts.len()))?;
            gateway_failures = count_gateway_failures(&run.attempts);
        }
    }
    let dest = out_dir.join(REPORT_DIR);
    match report(std::slice::from_ref(&out_dir), &dest, &cfg.report.formats) {
        Ok(_) => emit(out, None, &format!("report: {}\n", dest.display()))?,
        Err(f) if f.code == EXIT_NEGATIVE => {
            let _ = writeln!(err, "no report: {}", f.message);
        }
        Err(f) => return Err(f),
    }
    if gateway_failures > 0 {
        let _ = writeln!(
            err,
            "{gateway_failures} attempt(s) hit gateway failures; rerun to retry them"
        );
        if code == EXIT_OK {
            code = EXIT_GATEWAY;
        }
    }
    Ok(code)
}

fn count_gateway_failures(attempts: &[orchestrator::AttemptRecord]) -> usize {
    attempts
        .iter()
        .filter(|a| matches!(a.status, AttemptStatus::GatewayFailed { .. }))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("codetrans").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_have_their_own_code() {
        assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run(&["density"]).0, EXIT_USAGE);
        assert_eq!(run(&["run-cascade"]).0, EXIT_USAGE);
        assert_eq!(run(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn strip_and_density() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("a.py");
        fs::write(&f, "# hi\nx = 1  # set\nprint(x)\n").unwrap();
        let (code, out, _) = run(&["strip-comments", f.to_str().unwrap()]);
        assert_eq!(code, 0);
        assert!(!out.contains('#'));
        let (code, out, _) = run(&["density", f.to_str().unwrap()]);
        assert_eq!(code, 0);
        assert!(out.trim_end().ends_with("0.6667"), "{out}");
        let g = dir.path().join("a.txt");
        fs::write(&g, "x").unwrap();
        assert_eq!(run(&["density", g.to_str().unwrap()]).0, EXIT_USAGE);
    }

    #[test]
    fn missing_config_file_is_a_config_error() {
        let (code, _, err) = run(&["--config", "/nonexistent/run.toml", "run-cascade"]);
        assert_eq!(code, EXIT_CONFIG, "{err}");
    }

    #[test]
    fn replay_mode_with_real_endpoint_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.toml");
        fs::write(
            &p,
            "replay = true\nreplay_script = \"r.jsonl\"\n[[endpoints]]\nid = \"m\"\nmodel_name = \"x\"\nbase_url = \"http://localhost:9\"\n",
        )
        .unwrap();
        let (code, _, err) = run(&["--config", p.to_str().unwrap(), "run-matrix"]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("replay mode forbids"), "{err}");
    }

    #[test]
    fn snapshots_are_never_overwritten() {
        let dir = tempfile::tempdir().unwrap();
        let rd = RunDir::create(dir.path()).unwrap();
        snapshot(&rd, "config.effective.toml", "a").unwrap();
        snapshot(&rd, "config.effective.toml", "a").unwrap();
        snapshot(&rd, "config.effective.toml", "b").unwrap();
        assert_eq!(fs::read_to_string(rd.path("config.effective.toml")).unwrap(), "a");
        assert_eq!(fs::read_to_string(rd.path("config.effective.1.toml")).unwrap(), "b");
    }
}
