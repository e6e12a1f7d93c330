//! Metrics over attempt records: success matrices, relative gains, verdict
//! transitions, success-set overlaps, comment intent statistics and
//! cumulative cascade gains.
//!
//! Counts stay integral and ratios stay exact; rounding happens only when a
//! value is rendered, half away from zero.

mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::gateway::IntentLabel;
use crate::harness::Bucket;
use crate::lang::Language;
use crate::orchestrator::{AttemptRecord, AttemptStatus, CascadeResult, ClassifiedComment};

pub use report::{
    cascade_table, emit_report, load_run_dir, table2, CascadeColumn, CascadeRow, CascadeSummary, CascadeTable,
    MetricsBundle, ReportError, ReportFormat, RunData, ScopedOverlap, ScopedTransitions, Table2, Table2Cell, Table2Row,
};

/// Exact signed fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: i128,
    pub den: i128,
}

fn div_round_half_away(n: i128, d: i128) -> i128 {
    let (n, d) = if d < 0 { (-n, -d) } else { (n, d) };
    let q = n / d;
    let r = n % d;
    if 2 * r.abs() >= d {
        q + n.signum()
    } else {
        q
    }
}

impl Ratio {
    pub fn new(num: i128, den: i128) -> Option<Ratio> {
        (den != 0).then_some(Ratio { num, den })
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Value scaled by `10^decimals`, rounded half away from zero.
    pub fn scaled(self, decimals: u32) -> i128 {
        div_round_half_away(self.num * 10i128.pow(decimals), self.den)
    }

    /// Decimal text with exactly `decimals` places.
    pub fn render(self, decimals: u32) -> String {
        render_scaled(self.scaled(decimals), decimals, false)
    }

    /// Like [`Ratio::render`] with an explicit `+` on positive values.
    pub fn render_signed(self, decimals: u32) -> String {
        render_scaled(self.scaled(decimals), decimals, true)
    }

    /// The rendered value as a float, for machine-readable output.
    pub fn rounded(self, decimals: u32) -> f64 {
        self.scaled(decimals) as f64 / 10f64.powi(decimals as i32)
    }
}

fn render_scaled(v: i128, decimals: u32, plus: bool) -> String {
    let sign = if v < 0 {
        "-"
    } else if plus && v > 0 {
        "+"
    } else {
        ""
    };
    let p = 10i128.pow(decimals);
    let (int, frac) = (v.abs() / p, v.abs() % p);
    if decimals == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac:0width$}", width = decimals as usize)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Rate {
    pub succeeded: u64,
    pub attempted: u64,
}

impl Rate {
    pub fn new(succeeded: u64, attempted: u64) -> Self {
        Rate { succeeded, attempted }
    }

    pub fn ratio(self) -> Option<Ratio> {
        Ratio::new(self.succeeded as i128, self.attempted as i128)
    }

    /// Rate rendered with `decimals` places; `n/a` for an empty cell.
    pub fn render(self, decimals: u32) -> String {
        self.ratio().map_or_else(|| "n/a".into(), |r| r.render(decimals))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub source_pl: Language,
    pub target_pl: Language,
    /// Commenter id, `none`, a stage label or a variant arm.
    pub group: String,
    pub translator: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Cell {
    /// Attempts that produced a verdict.
    pub attempted: u64,
    pub succeeded: u64,
    /// Attempts skipped because the variant failed the fidelity gate.
    pub excluded: u64,
    /// Attempts with no verdict because a model call failed.
    pub gateway_failed: u64,
}

impl Cell {
    pub fn rate(&self) -> Rate {
        Rate::new(self.succeeded, self.attempted)
    }

    pub fn partial(&self) -> bool {
        self.gateway_failed > 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixEntry {
    #[serde(flatten)]
    pub key: CellKey,
    #[serde(flatten)]
    pub cell: Cell,
}

/// Success counts per (source, target, group, translator).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<MatrixEntry>", into = "Vec<MatrixEntry>")]
pub struct SuccessMatrix {
    cells: BTreeMap<CellKey, Cell>,
}

impl From<Vec<MatrixEntry>> for SuccessMatrix {
    fn from(v: Vec<MatrixEntry>) -> Self {
        SuccessMatrix {
            cells: v.into_iter().map(|e| (e.key, e.cell)).collect(),
        }
    }
}

impl From<SuccessMatrix> for Vec<MatrixEntry> {
    fn from(m: SuccessMatrix) -> Self {
        m.cells
            .into_iter()
            .map(|(key, cell)| MatrixEntry { key, cell })
            .collect()
    }
}

impl SuccessMatrix {
    pub fn from_attempts(records: &[AttemptRecord]) -> Self {
        let mut cells: BTreeMap<CellKey, Cell> = BTreeMap::new();
        for r in records {
            let cell = cells
                .entry(CellKey {
                    source_pl: r.source_pl,
                    target_pl: r.target_pl,
                    group: r.group.clone(),
                    translator: r.translator.clone(),
                })
                .or_default();
            match r.status {
                AttemptStatus::Judged => {
                    cell.attempted += 1;
                    cell.succeeded += u64::from(r.succeeded());
                }
                AttemptStatus::Excluded { .. } => cell.excluded += 1,
                AttemptStatus::GatewayFailed { .. } => cell.gateway_failed += 1,
            }
        }
        SuccessMatrix { cells }
    }

    pub fn insert(&mut self, key: CellKey, cell: Cell) {
        self.cells.insert(key, cell);
    }

    pub fn get(&self, key: &CellKey) -> Option<&Cell> {
        self.cells.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CellKey, &Cell)> {
        self.cells.iter()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// True when some cell lacks verdicts because of model call failures.
    pub fn partial(&self) -> bool {
        self.cells.values().any(Cell::partial)
    }

    /// Cells summed over language pairs, per (group, translator).
    pub fn pooled(&self) -> BTreeMap<(String, String), Cell> {
        let mut out: BTreeMap<(String, String), Cell> = BTreeMap::new();
        for (k, c) in &self.cells {
            let p = out.entry((k.group.clone(), k.translator.clone())).or_default();
            p.attempted += c.attempted;
            p.succeeded += c.succeeded;
            p.excluded += c.excluded;
            p.gateway_failed += c.gateway_failed;
        }
        out
    }
}

pub fn compute_success_matrix(records: &[AttemptRecord]) -> SuccessMatrix {
    SuccessMatrix::from_attempts(records)
}

/// Default rate precision of the rounded-rate gain mode.
pub const RATE_DECIMALS: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GainReport {
    pub baseline: Rate,
    pub variant: Rate,
    /// `100·(v − b)/b` from exact counts; `None` when the baseline rate is 0.
    pub exact: Option<Ratio>,
    /// The same formula over rates first rounded to `rate_decimals` places.
    pub rounded_rate: Option<Ratio>,
    pub rate_decimals: u32,
}

impl GainReport {
    pub fn applicable(&self) -> bool {
        self.exact.is_some()
    }

    /// Exact-count gain as a signed percentage with 2 decimals, or `n/a`.
    pub fn render(&self) -> String {
        self.exact
            .map_or_else(|| "n/a".into(), |g| format!("{}%", g.render_signed(2)))
    }

    pub fn render_rounded_rate(&self) -> String {
        self.rounded_rate
            .map_or_else(|| "n/a".into(), |g| format!("{}%", g.render_signed(2)))
    }
}

pub fn compute_gain(baseline: Rate, variant: Rate) -> GainReport {
    compute_gain_with(baseline, variant, RATE_DECIMALS)
}

pub fn compute_gain_with(baseline: Rate, variant: Rate, rate_decimals: u32) -> GainReport {
    let exact = match (baseline.ratio(), variant.ratio()) {
        (Some(b), Some(v)) if b.num != 0 => Ratio::new(100 * (v.num * b.den - b.num * v.den), b.num * v.den),
        _ => None,
    };
    let rounded_rate = match (baseline.ratio(), variant.ratio()) {
        (Some(b), Some(v)) => {
            let (rb, rv) = (b.scaled(rate_decimals), v.scaled(rate_decimals));
            (rb != 0).then(|| Ratio {
                num: 100 * (rv - rb),
                den: rb,
            })
        }
        _ => None,
    };
    GainReport {
        baseline,
        variant,
        exact,
        rounded_rate,
        rate_decimals,
    }
}

/// Counts of (baseline bucket, variant bucket) over the same
/// (sample, target) pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TransitionMatrix {
    /// `counts[from][to]`, indexed in [`Bucket::ALL`] order.
    pub counts: [[u64; 4]; 4],
    /// Pairs with a verdict on only one side, left out of `counts`.
    pub unpaired: u64,
}

fn bucket_index(b: Bucket) -> usize {
    Bucket::ALL.iter().position(|&x| x == b).unwrap()
}

impl TransitionMatrix {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Bucket, Bucket)>) -> Self {
        let mut m = TransitionMatrix::default();
        for (from, to) in pairs {
            m.counts[bucket_index(from)][bucket_index(to)] += 1;
        }
        m
    }

    pub fn count(&self, from: Bucket, to: Bucket) -> u64 {
        self.counts[bucket_index(from)][bucket_index(to)]
    }

    pub fn row_sum(&self, from: Bucket) -> u64 {
        self.counts[bucket_index(from)].iter().sum()
    }

    pub fn column_sum(&self, to: Bucket) -> u64 {
        let j = bucket_index(to);
        self.counts.iter().map(|r| r[j]).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Baseline bucket counts (row sums).
    pub fn baseline_counts(&self) -> [u64; 4] {
        Bucket::ALL.map(|b| self.row_sum(b))
    }

    /// Variant bucket counts (column sums).
    pub fn variant_counts(&self) -> [u64; 4] {
        Bucket::ALL.map(|b| self.column_sum(b))
    }
}

/// Pairs baseline and variant verdicts by (sample, target). Records
/// without a verdict are skipped and counted in `unpaired` if the other
/// side has one.
pub fn compute_transitions(baseline: &[AttemptRecord], variant: &[AttemptRecord]) -> TransitionMatrix {
    let index = |records: &[AttemptRecord]| -> BTreeMap<(String, Language), Bucket> {
        records
            .iter()
            .filter_map(|r| r.bucket().map(|b| ((r.sample_id.clone(), r.target_pl), b)))
            .collect()
    };
    let (b, v) = (index(baseline), index(variant));
    let mut m = TransitionMatrix::from_pairs(b.iter().filter_map(|(k, from)| v.get(k).map(|to| (*from, *to))));
    m.unpaired = b.keys().filter(|k| !v.contains_key(*k)).count() as u64
        + v.keys().filter(|k| !b.contains_key(*k)).count() as u64;
    m
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairOverlap {
    pub a: String,
    pub b: String,
    pub intersection: u64,
    pub union: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleOverlap {
    pub sets: [String; 3],
    pub intersection: u64,
    pub union: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub baseline: String,
    pub sizes: BTreeMap<String, u64>,
    pub pairs: Vec<PairOverlap>,
    pub triples: Vec<TripleOverlap>,
    /// `|success(variant) \ success(baseline)|` per non-baseline variant.
    pub added_value: BTreeMap<String, u64>,
    /// `|success(baseline) \ success(variant)|` per non-baseline variant.
    pub lost: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OverlapError {
    #[error("need at least two success sets, got {0}")]
    TooFew(usize),
    #[error("baseline `{0}` is not among the success sets")]
    NoBaseline(String),
}

/// Success sets keyed by variant name; `baseline` names one of them.
pub fn compute_overlaps(
    sets: &BTreeMap<String, BTreeSet<String>>,
    baseline: &str,
) -> Result<OverlapReport, OverlapError> {
    if sets.len() < 2 {
        return Err(OverlapError::TooFew(sets.len()));
    }
    let base = sets
        .get(baseline)
        .ok_or_else(|| OverlapError::NoBaseline(baseline.into()))?;
    let names: Vec<&String> = sets.keys().collect();
    let mut pairs = Vec::new();
    let mut triples = Vec::new();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            let (a, b) = (&sets[names[i]], &sets[names[j]]);
            pairs.push(PairOverlap {
                a: names[i].clone(),
                b: names[j].clone(),
                intersection: a.intersection(b).count() as u64,
                union: a.union(b).count() as u64,
            });
            for k in j + 1..names.len() {
                let c = &sets[names[k]];
                let union: BTreeSet<&String> = a.iter().chain(b).chain(c).collect();
                triples.push(TripleOverlap {
                    sets: [names[i].clone(), names[j].clone(), names[k].clone()],
                    intersection: a.iter().filter(|x| b.contains(*x) && c.contains(*x)).count() as u64,
                    union: union.len() as u64,
                });
            }
        }
    }
    let others = sets.iter().filter(|(n, _)| n.as_str() != baseline);
    Ok(OverlapReport {
        baseline: baseline.to_string(),
        sizes: sets.iter().map(|(n, s)| (n.clone(), s.len() as u64)).collect(),
        pairs,
        triples,
        added_value: others
            .clone()
            .map(|(n, s)| (n.clone(), s.difference(base).count() as u64))
            .collect(),
        lost: others
            .map(|(n, s)| (n.clone(), base.difference(s).count() as u64))
            .collect(),
    })
}

impl OverlapReport {
    pub fn pair(&self, a: &str, b: &str) -> Option<&PairOverlap> {
        self.pairs
            .iter()
            .find(|p| (p.a == a && p.b == b) || (p.a == b && p.b == a))
    }

    /// Checks `|A ∪ B| = |A| + |B| − |A ∩ B|` for every pair and the
    /// three-set form for every triple.
    pub fn inclusion_exclusion_holds(&self) -> bool {
        let size = |n: &str| self.sizes[n] as i128;
        let pairs_ok = self
            .pairs
            .iter()
            .all(|p| p.union as i128 == size(&p.a) + size(&p.b) - p.intersection as i128);
        let triples_ok = self.triples.iter().all(|t| {
            let [a, b, c] = &t.sets;
            let inter = |x: &str, y: &str| self.pair(x, y).map_or(0, |p| p.intersection as i128);
            t.union as i128
                == size(a) + size(b) + size(c) - inter(a, b) - inter(a, c) - inter(b, c) + t.intersection as i128
        });
        let added_ok = self.added_value.iter().all(|(n, &added)| {
            let shared = self.pair(n, &self.baseline).map_or(0, |p| p.intersection);
            added + shared == self.sizes[n]
        });
        pairs_ok && triples_ok && added_ok
    }
}

/// Success sets per group from attempt records, keyed `sample_id->target`.
pub fn success_sets(records: &[AttemptRecord]) -> BTreeMap<String, BTreeSet<String>> {
    let mut sets: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for r in records {
        let set = sets.entry(r.group.clone()).or_default();
        if r.succeeded() {
            set.insert(format!("{}->{}", r.sample_id, r.target_pl.key()));
        }
    }
    sets
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceIntentStats {
    pub comment_count: u64,
    pub total_words: u64,
    /// `total_words / comment_count`.
    pub avg_words: Ratio,
    pub histogram: BTreeMap<IntentLabel, u64>,
    /// Comments carrying two or more labels.
    pub multi_label: u64,
    /// Comments that could not be classified, left out of the histogram.
    pub unclassified: u64,
}

impl SourceIntentStats {
    pub fn avg_words_rendered(&self) -> String {
        self.avg_words.render(2)
    }

    pub fn histogram_total(&self) -> u64 {
        self.histogram.values().sum()
    }
}

/// Per comment source (`author` or a commenter id).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IntentStats {
    pub per_source: BTreeMap<String, SourceIntentStats>,
}

pub fn compute_intent_stats(comments: &[ClassifiedComment]) -> IntentStats {
    let mut grouped: BTreeMap<&str, Vec<&ClassifiedComment>> = BTreeMap::new();
    for c in comments {
        grouped.entry(&c.source).or_default().push(c);
    }
    let per_source = grouped
        .into_iter()
        .filter_map(|(source, cs)| {
            let count = cs.len() as u64;
            let words: u64 = cs.iter().map(|c| c.words as u64).sum();
            let mut histogram: BTreeMap<IntentLabel, u64> = IntentLabel::ALL.iter().map(|&l| (l, 0)).collect();
            for c in &cs {
                for l in c.labels.iter().collect::<BTreeSet<_>>() {
                    *histogram.get_mut(l).unwrap() += 1;
                }
            }
            Some((
                source.to_string(),
                SourceIntentStats {
                    comment_count: count,
                    total_words: words,
                    avg_words: Ratio::new(words as i128, count as i128)?,
                    histogram,
                    multi_label: cs.iter().filter(|c| c.labels.len() > 1).count() as u64,
                    unclassified: cs.iter().filter(|c| c.labels.is_empty()).count() as u64,
                },
            ))
        })
        .collect();
    IntentStats { per_source }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageGain {
    pub stage: usize,
    pub label: String,
    pub cumulative: Rate,
    pub gain: GainReport,
}

/// Gain of each stage's cumulative success count over stage 0. Empty for
/// single-stage results.
pub fn cumulative_cascade_gain(result: &CascadeResult) -> Vec<StageGain> {
    if result.stages.len() < 2 {
        return Vec::new();
    }
    let total = result.total_pairs as u64;
    let base = Rate::new(result.stages[0].cumulative_successes as u64, total);
    result
        .stages
        .iter()
        .map(|s| {
            let cumulative = Rate::new(s.cumulative_successes as u64, total);
            StageGain {
                stage: s.index,
                label: s.label.clone(),
                cumulative,
                gain: compute_gain(base, cumulative),
            }
        })
        .collect()
}
