//! Benchmark corpora of standalone programs with stdin/stdout testcases.
//!
//! On disk a corpus is a directory holding `manifest.toml` and one
//! directory per sample:
//!
//! ```text
//! manifest.toml
//! py-001/main.py
//! py-001/in_0.txt   py-001/out_0.txt
//! py-001/in_1.txt   py-001/out_1.txt
//! ```
//!
//! ```toml
//! [[samples]]
//! id = "py-001"
//! path = "py-001"
//! lang = "Python"
//! origin = "custom"
//! testcases = 2
//! ```
//!
//! `lineage` is optional and defaults to `base`.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::harness::{ExecutionReport, HarnessError, Judge, TestOutcome};
use crate::lang::Language;
use crate::surface;

pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Avatar,
    Codenet,
    Cjbench,
    Codetransocean,
    Custom,
}

impl Origin {
    /// Benchmarks that ship their programs without comments.
    pub fn ships_uncommented(self) -> bool {
        matches!(self, Origin::Avatar | Origin::Codenet | Origin::Codetransocean)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Lineage {
    #[default]
    Base,
    Commented {
        commenter_id: String,
        options: String,
    },
    CommentStripped,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TestCase {
    pub index: usize,
    pub stdin: String,
    pub expected_stdout: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSample {
    pub id: String,
    pub origin: Origin,
    pub source_pl: Language,
    pub code: String,
    pub testcases: Vec<TestCase>,
    pub loc: usize,
    pub lineage: Lineage,
}

impl CodeSample {
    pub fn new(
        id: impl Into<String>,
        origin: Origin,
        pl: Language,
        code: impl Into<String>,
        testcases: Vec<TestCase>,
    ) -> Self {
        let code = code.into();
        CodeSample {
            id: id.into(),
            origin,
            source_pl: pl,
            loc: surface::line_count(&code),
            code,
            testcases,
            lineage: Lineage::Base,
        }
    }

    /// Same sample identity with different program text and lineage.
    pub fn variant(&self, code: String, lineage: Lineage) -> CodeSample {
        CodeSample {
            loc: surface::line_count(&code),
            code,
            lineage,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub path: String,
    pub lang: String,
    pub origin: Origin,
    pub testcases: usize,
    #[serde(default)]
    pub lineage: Lineage,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default)]
    pub samples: Vec<ManifestEntry>,
    /// Statistics the corpus is expected to have, keyed by language name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub declared: BTreeMap<String, DeclaredStats>,
}

/// Table-style statistics a manifest declares for one language.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeclaredStats {
    pub samples: usize,
    pub min_loc: usize,
    pub max_loc: usize,
    pub avg_testcases: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("sample {id}: cannot read {}: {reason}", .path.display())]
    Load { id: String, path: PathBuf, reason: String },
    #[error("manifest {}: {reason}", .path.display())]
    Manifest { path: PathBuf, reason: String },
    #[error("sample {id}: unknown language tag `{tag}`")]
    UnknownLanguage { id: String, tag: String },
    #[error("sample {id}: no testcases")]
    NoTestcases { id: String },
    #[error("duplicate sample id {0}")]
    DuplicateId(String),
    #[error("sample {id}: {origin:?} ships uncommented code but {count} comment(s) were found")]
    UnexpectedComments { id: String, origin: Origin, count: usize },
    #[error("sample {id}: {source}")]
    Lex { id: String, source: surface::LexError },
    #[error("corpus is empty")]
    Empty,
}

fn read_text(id: &str, path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|e| CorpusError::Load {
        id: id.to_string(),
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

pub fn read_manifest(path: &Path) -> Result<Manifest, CorpusError> {
    let text = fs::read_to_string(path).map_err(|e| CorpusError::Manifest {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    toml::from_str(&text).map_err(|e| CorpusError::Manifest {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Loads `root/manifest.toml`.
pub fn load_corpus_dir(root: &Path) -> Result<Vec<CodeSample>, CorpusError> {
    load_corpus(root, &root.join(MANIFEST_FILE))
}

pub fn load_corpus(root: &Path, manifest_path: &Path) -> Result<Vec<CodeSample>, CorpusError> {
    let manifest = read_manifest(manifest_path)?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(manifest.samples.len());
    for entry in &manifest.samples {
        if !seen.insert(entry.id.clone()) {
            return Err(CorpusError::DuplicateId(entry.id.clone()));
        }
        let pl: Language = entry.lang.parse().map_err(|_| CorpusError::UnknownLanguage {
            id: entry.id.clone(),
            tag: entry.lang.clone(),
        })?;
        if entry.testcases == 0 {
            return Err(CorpusError::NoTestcases { id: entry.id.clone() });
        }
        let dir = root.join(&entry.path);
        let code = read_text(&entry.id, &dir.join(format!("main.{}", pl.extension())))?;
        let mut testcases = Vec::with_capacity(entry.testcases);
        for k in 0..entry.testcases {
            testcases.push(TestCase {
                index: k,
                stdin: read_text(&entry.id, &dir.join(format!("in_{k}.txt")))?,
                expected_stdout: read_text(&entry.id, &dir.join(format!("out_{k}.txt")))?,
            });
        }
        let mut sample = CodeSample::new(entry.id.clone(), entry.origin, pl, code, testcases);
        sample.lineage = entry.lineage.clone();
        check_uncommented(&sample)?;
        out.push(sample);
    }
    Ok(out)
}

/// Reads `in_0.txt`/`out_0.txt`, `in_1.txt`/`out_1.txt`, ... from `dir`
/// up to the first missing pair.
pub fn read_testcases(dir: &Path) -> std::io::Result<Vec<TestCase>> {
    let mut out = Vec::new();
    loop {
        let k = out.len();
        let (i, o) = (dir.join(format!("in_{k}.txt")), dir.join(format!("out_{k}.txt")));
        if !i.exists() || !o.exists() {
            return Ok(out);
        }
        out.push(TestCase {
            index: k,
            stdin: fs::read_to_string(i)?,
            expected_stdout: fs::read_to_string(o)?,
        });
    }
}

fn check_uncommented(sample: &CodeSample) -> Result<(), CorpusError> {
    if sample.lineage != Lineage::Base || !sample.origin.ships_uncommented() {
        return Ok(());
    }
    let spans = surface::scan_comments(&sample.code, sample.source_pl).map_err(|source| CorpusError::Lex {
        id: sample.id.clone(),
        source,
    })?;
    if spans.is_empty() {
        Ok(())
    } else {
        Err(CorpusError::UnexpectedComments {
            id: sample.id.clone(),
            origin: sample.origin,
            count: spans.len(),
        })
    }
}

/// Writes samples in the on-disk layout, one directory per id.
pub fn write_corpus(root: &Path, samples: &[CodeSample]) -> std::io::Result<()> {
    fs::create_dir_all(root)?;
    let mut manifest = Manifest::default();
    for s in samples {
        let dir = root.join(&s.id);
        fs::create_dir_all(&dir)?;
        fs::write(dir.join(format!("main.{}", s.source_pl.extension())), &s.code)?;
        for tc in &s.testcases {
            fs::write(dir.join(format!("in_{}.txt", tc.index)), &tc.stdin)?;
            fs::write(dir.join(format!("out_{}.txt", tc.index)), &tc.expected_stdout)?;
        }
        manifest.samples.push(ManifestEntry {
            id: s.id.clone(),
            path: s.id.clone(),
            lang: s.source_pl.name().to_string(),
            origin: s.origin,
            testcases: s.testcases.len(),
            lineage: s.lineage.clone(),
        });
    }
    let text = toml::to_string(&manifest).map_err(std::io::Error::other)?;
    fs::write(root.join(MANIFEST_FILE), text)
}

/// Like [`write_corpus`], with declared statistics in the manifest.
pub fn write_corpus_declared(
    root: &Path,
    samples: &[CodeSample],
    declared: BTreeMap<String, DeclaredStats>,
) -> std::io::Result<()> {
    write_corpus(root, samples)?;
    let path = root.join(MANIFEST_FILE);
    let mut manifest = read_manifest(&path).map_err(std::io::Error::other)?;
    manifest.declared = declared;
    let text = toml::to_string(&manifest).map_err(std::io::Error::other)?;
    fs::write(path, text)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ValidationStatus {
    Ok,
    SelfTestFailure { detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub id: String,
    pub status: ValidationStatus,
    pub report: ExecutionReport,
}

/// Judges a sample against its own testcases in its own language.
pub fn validate_sample(sample: &CodeSample, judge: &dyn Judge) -> Result<ValidationReport, HarnessError> {
    let report = judge.judge(&sample.code, sample.source_pl, &sample.testcases)?;
    let status = if report.passed() {
        ValidationStatus::Ok
    } else {
        let failing: Vec<String> = report
            .per_testcase
            .iter()
            .filter(|t| t.outcome != TestOutcome::Pass)
            .map(|t| format!("testcase {} {:?}", t.index, t.outcome))
            .collect();
        let detail = if failing.is_empty() {
            format!(
                "{}: {}",
                report.verdict,
                report.compile_diagnostics.lines().next().unwrap_or("")
            )
        } else {
            format!("{}: {}", report.verdict, failing.join(", "))
        };
        ValidationStatus::SelfTestFailure { detail }
    };
    Ok(ValidationReport {
        id: sample.id.clone(),
        status,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageStats {
    pub sample_count: usize,
    pub min_loc: usize,
    pub max_loc: usize,
    /// Average testcases per sample rounded half up.
    pub avg_testcases: u64,
    pub total_testcases: u64,
    /// `total_testcases/sample_count` in lowest terms.
    pub avg_testcases_exact: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub per_pl: BTreeMap<Language, LanguageStats>,
}

impl CorpusStats {
    pub fn total_samples(&self) -> usize {
        self.per_pl.values().map(|s| s.sample_count).sum()
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn corpus_stats(corpus: &[CodeSample]) -> Result<CorpusStats, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::Empty);
    }
    let mut acc: BTreeMap<Language, (usize, usize, usize, u64)> = BTreeMap::new();
    for s in corpus {
        let e = acc.entry(s.source_pl).or_insert((0, usize::MAX, 0, 0));
        e.0 += 1;
        e.1 = e.1.min(s.loc);
        e.2 = e.2.max(s.loc);
        e.3 += s.testcases.len() as u64;
    }
    let per_pl = acc
        .into_iter()
        .map(|(pl, (count, min_loc, max_loc, total))| {
            let n = count as u64;
            let g = gcd(total, n).max(1);
            let stats = LanguageStats {
                sample_count: count,
                min_loc,
                max_loc,
                avg_testcases: (2 * total + n) / (2 * n),
                total_testcases: total,
                avg_testcases_exact: format!("{}/{}", total / g, n / g),
            };
            (pl, stats)
        })
        .collect();
    Ok(CorpusStats { per_pl })
}

/// Differences between declared and measured statistics, one line each.
pub fn declared_mismatches(manifest: &Manifest, stats: &CorpusStats) -> Vec<String> {
    let mut out = Vec::new();
    for (tag, want) in &manifest.declared {
        let Ok(pl) = tag.parse::<Language>() else {
            out.push(format!("declared statistics for unknown language `{tag}`"));
            continue;
        };
        let Some(got) = stats.per_pl.get(&pl) else {
            out.push(format!("{pl}: declared {} sample(s), found none", want.samples));
            continue;
        };
        let pairs = [
            ("samples", want.samples as u64, got.sample_count as u64),
            ("min_loc", want.min_loc as u64, got.min_loc as u64),
            ("max_loc", want.max_loc as u64, got.max_loc as u64),
            ("avg_testcases", want.avg_testcases, got.avg_testcases),
        ];
        for (field, w, g) in pairs {
            if w != g {
                out.push(format!("{pl}: {field} declared {w}, measured {g}"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tc(k: usize) -> TestCase {
        TestCase {
            index: k,
            stdin: format!("{k}\n"),
            expected_stdout: format!("{k}\n"),
        }
    }

    fn sample(id: &str, pl: Language, lines: usize, cases: usize) -> CodeSample {
        let code: String = (0..lines).map(|i| format!("x{i} = {i}\n")).collect();
        CodeSample::new(id, Origin::Custom, pl, code, (0..cases).map(tc).collect())
    }

    #[test]
    fn round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let samples = vec![
            sample("p1", Language::Python, 3, 2),
            CodeSample::new("j1", Origin::Avatar, Language::Java, "class A {}\n", vec![tc(0)]),
            CodeSample::new(
                "c1",
                Origin::Codenet,
                Language::C,
                "int main(){return 0;}\n",
                vec![tc(0), tc(1)],
            ),
        ];
        write_corpus(dir.path(), &samples).unwrap();
        let loaded = load_corpus_dir(dir.path()).unwrap();
        assert_eq!(loaded, samples);
        assert_eq!(load_corpus_dir(dir.path()).unwrap(), loaded);
    }

    #[test]
    fn missing_testcase_file_names_the_sample() {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(dir.path(), &[sample("p1", Language::Python, 1, 2)]).unwrap();
        fs::remove_file(dir.path().join("p1/out_1.txt")).unwrap();
        match load_corpus_dir(dir.path()) {
            Err(CorpusError::Load { id, path, .. }) => {
                assert_eq!(id, "p1");
                assert!(path.ends_with("out_1.txt"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn manifest_errors() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join(MANIFEST_FILE);
        fs::write(
            &m,
            "[[samples]]\nid='a'\npath='a'\nlang='Rust'\norigin='custom'\ntestcases=1\n",
        )
        .unwrap();
        assert!(matches!(
            load_corpus_dir(dir.path()),
            Err(CorpusError::UnknownLanguage { .. })
        ));
        fs::write(
            &m,
            "[[samples]]\nid='a'\npath='a'\nlang='Go'\norigin='custom'\ntestcases=0\n",
        )
        .unwrap();
        assert!(matches!(
            load_corpus_dir(dir.path()),
            Err(CorpusError::NoTestcases { .. })
        ));
    }

    #[test]
    fn uncommented_benchmarks_reject_comments() {
        let dir = tempfile::tempdir().unwrap();
        let s = CodeSample::new("g", Origin::Codenet, Language::Go, "package main // x\n", vec![tc(0)]);
        write_corpus(dir.path(), std::slice::from_ref(&s)).unwrap();
        assert!(matches!(
            load_corpus_dir(dir.path()),
            Err(CorpusError::UnexpectedComments { count: 1, .. })
        ));
        let custom = CodeSample {
            origin: Origin::Custom,
            ..s
        };
        write_corpus(dir.path(), &[custom]).unwrap();
        assert!(load_corpus_dir(dir.path()).is_ok());
    }

    #[test]
    fn stats_single_and_average() {
        let one = corpus_stats(&[sample("a", Language::C, 10, 3)]).unwrap();
        let c = &one.per_pl[&Language::C];
        assert_eq!((c.sample_count, c.min_loc, c.max_loc, c.avg_testcases), (1, 10, 10, 3));
        let four: Vec<_> = [1, 2, 3, 6]
            .iter()
            .enumerate()
            .map(|(i, &n)| sample(&format!("s{i}"), Language::Go, i + 1, n))
            .collect();
        let g = &corpus_stats(&four).unwrap().per_pl[&Language::Go];
        assert_eq!(g.avg_testcases, 3);
        assert_eq!(g.avg_testcases_exact, "3/1");
        assert_eq!((g.min_loc, g.max_loc), (1, 4));
        assert!(matches!(corpus_stats(&[]), Err(CorpusError::Empty)));
    }

    #[test]
    fn loc_counts_blank_lines() {
        let s = CodeSample::new("a", Origin::Custom, Language::Python, "a = 1\n\nb = 2\n", vec![tc(0)]);
        assert_eq!(s.loc, 3);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_sample() -> impl Strategy<Value = (Language, String, usize)> {
            (
                prop::sample::select(Language::ALL.to_vec()),
                prop::collection::vec(prop_oneof![Just(String::new()), "[a-z0-9 =;]{1,10}"], 0..15),
                any::<bool>(),
                1usize..5,
            )
                .prop_map(|(pl, lines, trailing_newline, cases)| {
                    let mut code = lines.join("\n");
                    if trailing_newline && !code.is_empty() {
                        code.push('\n');
                    }
                    (pl, code, cases)
                })
        }

        fn build(raw: &[(Language, String, usize)]) -> Vec<CodeSample> {
            raw.iter()
                .enumerate()
                .map(|(i, (pl, code, cases))| {
                    CodeSample::new(
                        format!("s{i}"),
                        Origin::Custom,
                        *pl,
                        code.clone(),
                        (0..*cases).map(tc).collect(),
                    )
                })
                .collect()
        }

        proptest! {
            #[test]
            fn loc_matches_newline_count((_, code, _) in arb_sample()) {
                let s = CodeSample::new("x", Origin::Custom, Language::C, code.clone(), vec![tc(0)]);
                let newlines = code.bytes().filter(|&b| b == b'\n').count();
                let unterminated = usize::from(!code.is_empty() && !code.ends_with('\n'));
                prop_assert_eq!(s.loc, newlines + unterminated);
            }

            #[test]
            fn stats_recombine_over_partitions(raw in prop::collection::vec(arb_sample(), 1..40), cut in any::<prop::sample::Index>()) {
                let samples = build(&raw);
                let whole = corpus_stats(&samples).unwrap();
                prop_assert_eq!(whole.total_samples(), samples.len());
                let k = cut.index(samples.len() + 1);
                let parts: Vec<CorpusStats> = [&samples[..k], &samples[k..]]
                    .iter()
                    .filter(|p| !p.is_empty())
                    .map(|p| corpus_stats(p).unwrap())
                    .collect();
                for (pl, w) in &whole.per_pl {
                    let mine: Vec<&LanguageStats> = parts.iter().filter_map(|p| p.per_pl.get(pl)).collect();
                    prop_assert!(w.min_loc <= w.max_loc);
                    prop_assert_eq!(w.sample_count, mine.iter().map(|s| s.sample_count).sum::<usize>());
                    prop_assert_eq!(w.total_testcases, mine.iter().map(|s| s.total_testcases).sum::<u64>());
                    prop_assert_eq!(w.min_loc, mine.iter().map(|s| s.min_loc).min().unwrap());
                    prop_assert_eq!(w.max_loc, mine.iter().map(|s| s.max_loc).max().unwrap());
                }
                let per_pl: Vec<CorpusStats> = whole.per_pl.keys().map(|pl| {
                    let only: Vec<CodeSample> = samples.iter().filter(|s| s.source_pl == *pl).cloned().collect();
                    corpus_stats(&only).unwrap()
                }).collect();
                prop_assert_eq!(per_pl.iter().map(|s| s.total_samples()).sum::<usize>(), samples.len());
            }
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            #[test]
            fn load_is_deterministic(raw in prop::collection::vec(arb_sample(), 1..8)) {
                let samples = build(&raw);
                let dir = tempfile::tempdir().unwrap();
                write_corpus(dir.path(), &samples).unwrap();
                let first = load_corpus_dir(dir.path()).unwrap();
                prop_assert_eq!(&first, &samples);
                prop_assert_eq!(load_corpus_dir(dir.path()).unwrap(), first);
            }
        }
    }
}
