//! Report assembly and rendering.
//!
//! A [`MetricsBundle`] is built from one or more run directories and written
//! as `report.json`, a set of CSV tables and a plain-text `report.txt`.
//! Every collection is ordered, so identical inputs give identical bytes.
//!
//! CSV column orders:
//!
//! * `success_matrix.csv`: source, target, group, translator, attempted,
//!   succeeded, rate, excluded, gateway_failed
//! * `table2.csv`: source, target, translator, group, succeeded, attempted,
//!   rate, gain_pct, gain_pct_rounded_rates (the baseline row has empty gains)
//! * `transitions.csv`: scope, baseline, variant, from, then one column per
//!   target bucket, row_total
//! * `overlaps.csv`: scope, kind (size, pair, triple, added, lost), sets,
//!   intersection, union
//! * `intents.csv`: source, comments, words, avg_words, multi_label, then
//!   one column per intent label
//! * `cascade.csv`: translator, source, target, column, succeeded,
//!   attempted, rate, gain_pct

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    compute_gain, compute_intent_stats, compute_overlaps, compute_transitions, cumulative_cascade_gain, success_sets,
    GainReport, IntentStats, OverlapReport, Rate, StageGain, SuccessMatrix, TransitionMatrix,
};
use crate::gateway::IntentLabel;
use crate::harness::Bucket;
use crate::lang::Language;
use crate::orchestrator::{files, AttemptRecord, CascadeResult, ClassifiedComment, VariantSummary, NO_COMMENTER};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{path}: {reason}")]
    Io { path: PathBuf, reason: String },
    #[error("{0} holds no attempt records")]
    EmptyRun(PathBuf),
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> ReportError {
    ReportError::Io {
        path: path.to_path_buf(),
        reason: e.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Csv,
    Text,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] = [ReportFormat::Json, ReportFormat::Csv, ReportFormat::Text];
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "txt" | "text" => Ok(ReportFormat::Text),
            _ => Err(format!("unknown report format `{s}` (json, csv, txt)")),
        }
    }
}

/// Contents of one run directory.
#[derive(Debug, Clone, Default)]
pub struct RunData {
    pub attempts: Vec<AttemptRecord>,
    pub cascade: Option<CascadeResult>,
    pub variant: Option<VariantSummary>,
}

pub fn load_run_dir(dir: &Path) -> Result<RunData, ReportError> {
    let read = |name: &str| -> Result<Option<String>, ReportError> {
        let p = dir.join(name);
        if !p.exists() {
            return Ok(None);
        }
        fs::read_to_string(&p).map(Some).map_err(|e| io_err(&p, e))
    };
    let mut data = RunData::default();
    if let Some(text) = read(files::ATTEMPTS)? {
        for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            data.attempts.push(
                serde_json::from_str(line)
                    .map_err(|e| io_err(&dir.join(files::ATTEMPTS), format!("line {}: {e}", n + 1)))?,
            );
        }
    }
    if let Some(text) = read(files::CASCADE_RESULT)? {
        data.cascade = Some(serde_json::from_str(&text).map_err(|e| io_err(&dir.join(files::CASCADE_RESULT), e))?);
    }
    if let Some(text) = read(files::VARIANT_RESULT)? {
        data.variant = Some(serde_json::from_str(&text).map_err(|e| io_err(&dir.join(files::VARIANT_RESULT), e))?);
    }
    if data.attempts.is_empty() && data.cascade.is_none() {
        return Err(ReportError::EmptyRun(dir.to_path_buf()));
    }
    Ok(data)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table2Cell {
    pub group: String,
    pub rate: Rate,
    pub gain: Option<GainReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table2Row {
    pub source_pl: Language,
    pub target_pl: Language,
    pub translator: String,
    pub baseline: Rate,
    /// One cell per non-baseline group, in [`Table2::groups`] order.
    pub variants: Vec<Table2Cell>,
}

/// Baseline rate and per-group gains for each (source, target, translator).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table2 {
    pub baseline_group: String,
    pub groups: Vec<String>,
    pub rows: Vec<Table2Row>,
}

/// Table 2 layout over a matrix whose baseline group is `baseline_group`.
/// Rows without a baseline cell are skipped.
pub fn table2(matrix: &SuccessMatrix, baseline_group: &str) -> Table2 {
    let groups: Vec<String> = matrix
        .iter()
        .map(|(k, _)| k.group.clone())
        .filter(|g| g != baseline_group)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut rows: BTreeMap<(Language, Language, String), Table2Row> = BTreeMap::new();
    for (k, c) in matrix.iter().filter(|(k, _)| k.group == baseline_group) {
        rows.insert(
            (k.source_pl, k.target_pl, k.translator.clone()),
            Table2Row {
                source_pl: k.source_pl,
                target_pl: k.target_pl,
                translator: k.translator.clone(),
                baseline: c.rate(),
                variants: Vec::new(),
            },
        );
    }
    for row in rows.values_mut() {
        for g in &groups {
            let key = super::CellKey {
                source_pl: row.source_pl,
                target_pl: row.target_pl,
                group: g.clone(),
                translator: row.translator.clone(),
            };
            if let Some(c) = matrix.get(&key) {
                row.variants.push(Table2Cell {
                    group: g.clone(),
                    rate: c.rate(),
                    gain: Some(compute_gain(row.baseline, c.rate())),
                });
            } else {
                row.variants.push(Table2Cell {
                    group: g.clone(),
                    rate: Rate::default(),
                    gain: None,
                });
            }
        }
    }
    Table2 {
        baseline_group: baseline_group.to_string(),
        groups,
        rows: rows.into_values().collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeColumn {
    /// Stage labels joined with `+`, e.g. `U+D`.
    pub label: String,
    pub rate: Rate,
    /// Relative to the first column.
    pub gain: GainReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeRow {
    pub translator: String,
    /// `None` on the pooled row.
    pub source_pl: Option<Language>,
    pub target_pl: Option<Language>,
    pub columns: Vec<CascadeColumn>,
}

/// Table 4 layout: one column per cumulative stage prefix over all given
/// cascades (`U`, `U+D`, `U+G`, `U+D+G`, ...). A prefix shared by several
/// cascades is taken from the first one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeTable {
    pub columns: Vec<String>,
    pub rows: Vec<CascadeRow>,
}

pub fn cascade_table(results: &[CascadeResult]) -> CascadeTable {
    // (translator, direction or pooled) -> column label -> rate
    type RowKey = (String, Option<(Language, Language)>);
    let mut cells: BTreeMap<RowKey, BTreeMap<String, Rate>> = BTreeMap::new();
    let mut columns: Vec<String> = Vec::new();
    for r in results {
        let mut prefix = String::new();
        for (k, stage) in r.stages.iter().enumerate() {
            if k > 0 {
                prefix.push('+');
            }
            prefix.push_str(&stage.label);
            if !columns.contains(&prefix) {
                columns.push(prefix.clone());
            }
            let mut per_dir: BTreeMap<(Language, Language), Rate> = BTreeMap::new();
            for p in &r.pairs {
                let e = per_dir.entry((p.source_pl, p.target_pl)).or_default();
                e.attempted += 1;
                e.succeeded += u64::from(p.success_stage.is_some_and(|s| s <= k));
            }
            let pooled = Rate::new(stage.cumulative_successes as u64, r.total_pairs as u64);
            let entries = per_dir
                .into_iter()
                .map(|(d, rate)| (Some(d), rate))
                .chain(std::iter::once((None, pooled)));
            for (dir, rate) in entries {
                cells
                    .entry((r.translator.clone(), dir))
                    .or_default()
                    .entry(prefix.clone())
                    .or_insert(rate);
            }
        }
    }
    let rows = cells
        .into_iter()
        .map(|((translator, dir), by_col)| {
            let base = columns.first().and_then(|c| by_col.get(c)).copied().unwrap_or_default();
            CascadeRow {
                translator,
                source_pl: dir.map(|d| d.0),
                target_pl: dir.map(|d| d.1),
                columns: columns
                    .iter()
                    .filter_map(|c| {
                        by_col.get(c).map(|&rate| CascadeColumn {
                            label: c.clone(),
                            rate,
                            gain: compute_gain(base, rate),
                        })
                    })
                    .collect(),
            }
        })
        .collect();
    CascadeTable { columns, rows }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScopedTransitions {
    pub scope: String,
    pub baseline: String,
    pub variant: String,
    pub matrix: TransitionMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScopedOverlap {
    pub scope: String,
    pub report: OverlapReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeSummary {
    pub translator: String,
    pub stages: Vec<String>,
    pub total_pairs: usize,
    pub complete: bool,
    pub cumulative_successes: Vec<usize>,
    pub commenting_calls: Vec<usize>,
    pub translation_calls: Vec<usize>,
    pub fidelity_exclusions: Vec<usize>,
    pub gains: Vec<StageGain>,
}

/// Every metric the reports show.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MetricsBundle {
    pub matrix: SuccessMatrix,
    pub partial: bool,
    pub table2: Option<Table2>,
    pub transitions: Vec<ScopedTransitions>,
    pub overlaps: Vec<ScopedOverlap>,
    pub intents: Option<IntentStats>,
    pub cascades: Vec<CascadeSummary>,
    pub cascade_table: Option<CascadeTable>,
}

fn scope_of(r: &AttemptRecord) -> String {
    format!("{} {}->{}", r.translator, r.source_pl.key(), r.target_pl.key())
}

impl MetricsBundle {
    pub fn from_runs(runs: &[RunData]) -> Self {
        let cascades: Vec<&CascadeResult> = runs.iter().filter_map(|r| r.cascade.as_ref()).collect();
        let flat: Vec<AttemptRecord> = runs
            .iter()
            .filter(|r| r.cascade.is_none())
            .flat_map(|r| r.attempts.iter().cloned())
            .collect();
        let cascade_attempts: Vec<AttemptRecord> = runs
            .iter()
            .filter(|r| r.cascade.is_some())
            .flat_map(|r| r.attempts.iter().cloned())
            .collect();
        let mut bundle = MetricsBundle {
            matrix: SuccessMatrix::from_attempts(if flat.is_empty() { &cascade_attempts } else { &flat }),
            ..MetricsBundle::default()
        };
        bundle.partial = bundle.matrix.partial();
        if !flat.is_empty() {
            bundle.add_comparisons(&flat);
        }
        let comments: Vec<ClassifiedComment> = runs
            .iter()
            .filter_map(|r| r.variant.as_ref())
            .flat_map(|v| v.comments.iter().cloned())
            .collect();
        if !comments.is_empty() {
            bundle.intents = Some(compute_intent_stats(&comments));
        }
        for c in &cascades {
            bundle.cascades.push(CascadeSummary {
                translator: c.translator.clone(),
                stages: c.stages.iter().map(|s| s.label.clone()).collect(),
                total_pairs: c.total_pairs,
                complete: c.complete,
                cumulative_successes: c.stages.iter().map(|s| s.cumulative_successes).collect(),
                commenting_calls: c.stages.iter().map(|s| s.commenting_calls).collect(),
                translation_calls: c.stages.iter().map(|s| s.translation_calls).collect(),
                fidelity_exclusions: c.stages.iter().map(|s| s.fidelity_exclusions).collect(),
                gains: cumulative_cascade_gain(c),
            });
            bundle.partial |= !c.complete;
        }
        if !cascades.is_empty() {
            let owned: Vec<CascadeResult> = cascades.into_iter().cloned().collect();
            bundle.cascade_table = Some(cascade_table(&owned));
        }
        bundle
    }

    fn add_comparisons(&mut self, records: &[AttemptRecord]) {
        let groups: BTreeSet<&str> = records.iter().map(|r| r.group.as_str()).collect();
        if !groups.contains(NO_COMMENTER) || groups.len() < 2 {
            return;
        }
        self.table2 = Some(table2(&self.matrix, NO_COMMENTER));
        let mut by_scope: BTreeMap<String, Vec<AttemptRecord>> = BTreeMap::new();
        for r in records {
            by_scope.entry(scope_of(r)).or_default().push(r.clone());
        }
        for (scope, recs) in by_scope {
            let of = |g: &str| -> Vec<AttemptRecord> { recs.iter().filter(|r| r.group == g).cloned().collect() };
            let base = of(NO_COMMENTER);
            for g in groups.iter().filter(|g| **g != NO_COMMENTER) {
                self.transitions.push(ScopedTransitions {
                    scope: scope.clone(),
                    baseline: NO_COMMENTER.into(),
                    variant: g.to_string(),
                    matrix: compute_transitions(&base, &of(g)),
                });
            }
            if let Ok(report) = compute_overlaps(&success_sets(&recs), NO_COMMENTER) {
                self.overlaps.push(ScopedOverlap { scope, report });
            }
        }
    }
}

fn text_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}", w = *w))
            .collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(headers.to_vec());
    out.push_str(&line(
        widths
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .iter()
            .map(String::as_str)
            .collect(),
    ));
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

fn gain_text(g: &Option<GainReport>) -> String {
    g.as_ref().map_or_else(|| "n/a".into(), GainReport::render)
}

fn gain_csv(g: Option<&GainReport>, rounded: bool) -> String {
    g.and_then(|g| if rounded { g.rounded_rate } else { g.exact })
        .map_or_else(String::new, |r| r.render(2))
}

fn dir_label(s: Option<Language>, t: Option<Language>) -> (String, String) {
    match (s, t) {
        (Some(s), Some(t)) => (s.name().to_string(), t.name().to_string()),
        _ => ("all".into(), "all".into()),
    }
}

fn render_text(b: &MetricsBundle) -> String {
    let mut out = String::new();
    if b.partial {
        out.push_str("NOTE: partial results (gateway failures or a halted cascade)\n\n");
    }
    if !b.matrix.is_empty() {
        out.push_str("Success matrix\n\n");
        let rows: Vec<Vec<String>> = b
            .matrix
            .iter()
            .map(|(k, c)| {
                vec![
                    k.source_pl.name().into(),
                    k.target_pl.name().into(),
                    k.group.clone(),
                    k.translator.clone(),
                    c.succeeded.to_string(),
                    c.attempted.to_string(),
                    c.rate().render(2),
                    c.excluded.to_string(),
                    c.gateway_failed.to_string(),
                ]
            })
            .collect();
        out.push_str(&text_table(
            &[
                "source",
                "target",
                "group",
                "translator",
                "ok",
                "attempted",
                "rate",
                "excluded",
                "failed",
            ],
            &rows,
        ));
        out.push('\n');
    }
    if let Some(t) = &b.table2 {
        out.push_str("Rate and gain per commenter\n\n");
        let mut headers = vec![
            "source".to_string(),
            "target".into(),
            "translator".into(),
            "UnCom".into(),
        ];
        for g in &t.groups {
            headers.push(format!("{g} rate"));
            headers.push(format!("{g} gain"));
        }
        let rows: Vec<Vec<String>> = t
            .rows
            .iter()
            .map(|r| {
                let mut row = vec![
                    r.source_pl.name().to_string(),
                    r.target_pl.name().to_string(),
                    r.translator.clone(),
                    r.baseline.render(2),
                ];
                for c in &r.variants {
                    row.push(if c.gain.is_some() { c.rate.render(2) } else { "-".into() });
                    row.push(gain_text(&c.gain));
                }
                row
            })
            .collect();
        let h: Vec<&str> = headers.iter().map(String::as_str).collect();
        out.push_str(&text_table(&h, &rows));
        out.push('\n');
    }
    for t in &b.transitions {
        out.push_str(&format!(
            "Verdict transitions, {}: {} -> {}\n\n",
            t.scope, t.baseline, t.variant
        ));
        let mut headers = vec!["from \\ to"];
        headers.extend(Bucket::ALL.iter().map(|b| b.label()));
        headers.push("total");
        let rows: Vec<Vec<String>> = Bucket::ALL
            .iter()
            .map(|&from| {
                let mut row = vec![from.label().to_string()];
                row.extend(Bucket::ALL.iter().map(|&to| t.matrix.count(from, to).to_string()));
                row.push(t.matrix.row_sum(from).to_string());
                row
            })
            .collect();
        out.push_str(&text_table(&headers, &rows));
        out.push_str(&format!("total attempted: {}", t.matrix.total()));
        if t.matrix.unpaired > 0 {
            out.push_str(&format!(", unpaired: {}", t.matrix.unpaired));
        }
        out.push_str("\n\n");
    }
    for o in &b.overlaps {
        out.push_str(&format!(
            "Success overlaps, {} (baseline {})\n\n",
            o.scope, o.report.baseline
        ));
        let mut rows: Vec<Vec<String>> = o
            .report
            .sizes
            .iter()
            .map(|(n, s)| {
                vec![
                    n.clone(),
                    s.to_string(),
                    o.report.added_value.get(n).map_or("-".into(), u64::to_string),
                    o.report.lost.get(n).map_or("-".into(), u64::to_string),
                ]
            })
            .collect();
        rows.sort();
        out.push_str(&text_table(&["set", "successes", "added", "lost"], &rows));
        let pairs: Vec<Vec<String>> = o
            .report
            .pairs
            .iter()
            .map(|p| {
                vec![
                    format!("{} & {}", p.a, p.b),
                    p.intersection.to_string(),
                    p.union.to_string(),
                ]
            })
            .chain(
                o.report
                    .triples
                    .iter()
                    .map(|t| vec![t.sets.join(" & "), t.intersection.to_string(), t.union.to_string()]),
            )
            .collect();
        out.push('\n');
        out.push_str(&text_table(&["sets", "intersection", "union"], &pairs));
        out.push('\n');
    }
    if let Some(i) = &b.intents {
        out.push_str("Comment intents\n\n");
        let mut headers = vec!["source", "comments", "words", "avg words", "multi-label"];
        headers.extend(IntentLabel::ALL.iter().map(|l| l.name()));
        let rows: Vec<Vec<String>> = i
            .per_source
            .iter()
            .map(|(src, s)| {
                let mut row = vec![
                    src.clone(),
                    s.comment_count.to_string(),
                    s.total_words.to_string(),
                    s.avg_words_rendered(),
                    s.multi_label.to_string(),
                ];
                row.extend(s.histogram.values().map(u64::to_string));
                row
            })
            .collect();
        out.push_str(&text_table(&headers, &rows));
        out.push('\n');
    }
    for c in &b.cascades {
        out.push_str(&format!(
            "Cascade, translator {} over {} pair(s){}\n\n",
            c.translator,
            c.total_pairs,
            if c.complete { "" } else { " (incomplete)" }
        ));
        let rows: Vec<Vec<String>> = c
            .stages
            .iter()
            .enumerate()
            .map(|(k, label)| {
                vec![
                    k.to_string(),
                    label.clone(),
                    c.cumulative_successes[k].to_string(),
                    c.commenting_calls[k].to_string(),
                    c.fidelity_exclusions[k].to_string(),
                    c.translation_calls[k].to_string(),
                    c.gains.get(k).map_or("n/a".into(), |g| g.gain.render()),
                ]
            })
            .collect();
        out.push_str(&text_table(
            &[
                "stage",
                "label",
                "cumulative",
                "commented",
                "excluded",
                "translated",
                "gain",
            ],
            &rows,
        ));
        out.push('\n');
    }
    if let Some(t) = &b.cascade_table {
        out.push_str("Cumulative rate and gain per stage combination\n\n");
        let mut headers = vec!["translator".to_string(), "source".into(), "target".into()];
        for c in &t.columns {
            headers.push(c.clone());
            headers.push(format!("{c} gain"));
        }
        let rows: Vec<Vec<String>> = t
            .rows
            .iter()
            .map(|r| {
                let (s, tg) = dir_label(r.source_pl, r.target_pl);
                let mut row = vec![r.translator.clone(), s, tg];
                for label in &t.columns {
                    match r.columns.iter().find(|c| &c.label == label) {
                        Some(c) => {
                            row.push(c.rate.render(2));
                            row.push(c.gain.render());
                        }
                        None => row.extend(["-".to_string(), "-".to_string()]),
                    }
                }
                row
            })
            .collect();
        let h: Vec<&str> = headers.iter().map(String::as_str).collect();
        out.push_str(&text_table(&h, &rows));
        out.push('\n');
    }
    out
}

fn csv_string(headers: &[String], rows: Vec<Vec<String>>) -> Result<String, csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(headers)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn render_csv(b: &MetricsBundle) -> Result<Vec<(&'static str, String)>, csv::Error> {
    let mut files = Vec::new();
    let rows = b
        .matrix
        .iter()
        .map(|(k, c)| {
            vec![
                k.source_pl.name().into(),
                k.target_pl.name().into(),
                k.group.clone(),
                k.translator.clone(),
                c.attempted.to_string(),
                c.succeeded.to_string(),
                c.rate().render(4),
                c.excluded.to_string(),
                c.gateway_failed.to_string(),
            ]
        })
        .collect();
    files.push((
        "success_matrix.csv",
        csv_string(
            &strings(&[
                "source",
                "target",
                "group",
                "translator",
                "attempted",
                "succeeded",
                "rate",
                "excluded",
                "gateway_failed",
            ]),
            rows,
        )?,
    ));
    if let Some(t) = &b.table2 {
        let mut rows = Vec::new();
        for r in &t.rows {
            let head = vec![
                r.source_pl.name().to_string(),
                r.target_pl.name().to_string(),
                r.translator.clone(),
            ];
            let mut base = head.clone();
            base.extend([
                t.baseline_group.clone(),
                r.baseline.succeeded.to_string(),
                r.baseline.attempted.to_string(),
                r.baseline.render(4),
                String::new(),
                String::new(),
            ]);
            rows.push(base);
            for c in &r.variants {
                let mut row = head.clone();
                row.extend([
                    c.group.clone(),
                    c.rate.succeeded.to_string(),
                    c.rate.attempted.to_string(),
                    c.rate.render(4),
                    gain_csv(c.gain.as_ref(), false),
                    gain_csv(c.gain.as_ref(), true),
                ]);
                rows.push(row);
            }
        }
        files.push((
            "table2.csv",
            csv_string(
                &strings(&[
                    "source",
                    "target",
                    "translator",
                    "group",
                    "succeeded",
                    "attempted",
                    "rate",
                    "gain_pct",
                    "gain_pct_rounded_rates",
                ]),
                rows,
            )?,
        ));
    }
    if !b.transitions.is_empty() {
        let mut headers = strings(&["scope", "baseline", "variant", "from"]);
        headers.extend(Bucket::ALL.iter().map(|b| b.label().to_string()));
        headers.push("row_total".into());
        let mut rows = Vec::new();
        for t in &b.transitions {
            for &from in &Bucket::ALL {
                let mut row = vec![
                    t.scope.clone(),
                    t.baseline.clone(),
                    t.variant.clone(),
                    from.label().to_string(),
                ];
                row.extend(Bucket::ALL.iter().map(|&to| t.matrix.count(from, to).to_string()));
                row.push(t.matrix.row_sum(from).to_string());
                rows.push(row);
            }
        }
        files.push(("transitions.csv", csv_string(&headers, rows)?));
    }
    if !b.overlaps.is_empty() {
        let mut rows = Vec::new();
        for o in &b.overlaps {
            let r = &o.report;
            for (n, s) in &r.sizes {
                rows.push(vec![
                    o.scope.clone(),
                    "size".into(),
                    n.clone(),
                    s.to_string(),
                    String::new(),
                ]);
            }
            for p in &r.pairs {
                rows.push(vec![
                    o.scope.clone(),
                    "pair".into(),
                    format!("{}&{}", p.a, p.b),
                    p.intersection.to_string(),
                    p.union.to_string(),
                ]);
            }
            for t in &r.triples {
                rows.push(vec![
                    o.scope.clone(),
                    "triple".into(),
                    t.sets.join("&"),
                    t.intersection.to_string(),
                    t.union.to_string(),
                ]);
            }
            for (kind, map) in [("added", &r.added_value), ("lost", &r.lost)] {
                for (n, v) in map {
                    rows.push(vec![
                        o.scope.clone(),
                        kind.into(),
                        n.clone(),
                        v.to_string(),
                        String::new(),
                    ]);
                }
            }
        }
        files.push((
            "overlaps.csv",
            csv_string(&strings(&["scope", "kind", "sets", "intersection", "union"]), rows)?,
        ));
    }
    if let Some(i) = &b.intents {
        let mut headers = strings(&["source", "comments", "words", "avg_words", "multi_label"]);
        headers.extend(IntentLabel::ALL.iter().map(|l| l.name().to_string()));
        let rows = i
            .per_source
            .iter()
            .map(|(src, s)| {
                let mut row = vec![
                    src.clone(),
                    s.comment_count.to_string(),
                    s.total_words.to_string(),
                    s.avg_words_rendered(),
                    s.multi_label.to_string(),
                ];
                row.extend(s.histogram.values().map(u64::to_string));
                row
            })
            .collect();
        files.push(("intents.csv", csv_string(&headers, rows)?));
    }
    if let Some(t) = &b.cascade_table {
        let mut rows = Vec::new();
        for r in &t.rows {
            let (s, tg) = dir_label(r.source_pl, r.target_pl);
            for c in &r.columns {
                rows.push(vec![
                    r.translator.clone(),
                    s.clone(),
                    tg.clone(),
                    c.label.clone(),
                    c.rate.succeeded.to_string(),
                    c.rate.attempted.to_string(),
                    c.rate.render(4),
                    gain_csv(Some(&c.gain), false),
                ]);
            }
        }
        files.push((
            "cascade.csv",
            csv_string(
                &strings(&[
                    "translator",
                    "source",
                    "target",
                    "column",
                    "succeeded",
                    "attempted",
                    "rate",
                    "gain_pct",
                ]),
                rows,
            )?,
        ));
    }
    Ok(files)
}

/// Writes the requested formats into `out_dir` and returns the file paths.
pub fn emit_report(b: &MetricsBundle, out_dir: &Path, formats: &[ReportFormat]) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let mut outputs: Vec<(String, String)> = Vec::new();
    let formats: BTreeSet<ReportFormat> = formats.iter().copied().collect();
    for f in formats {
        match f {
            ReportFormat::Json => {
                let mut text = serde_json::to_string_pretty(b).map_err(|e| io_err(out_dir, e))?;
                text.push('\n');
                outputs.push(("report.json".into(), text));
            }
            ReportFormat::Csv => {
                for (name, text) in render_csv(b).map_err(|e| io_err(out_dir, e))? {
                    outputs.push((name.into(), text));
                }
            }
            ReportFormat::Text => outputs.push(("report.txt".into(), render_text(b))),
        }
    }
    let mut written = Vec::new();
    for (name, text) in outputs {
        let path = out_dir.join(name);
        fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
