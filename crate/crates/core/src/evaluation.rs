//! Word error, normalized correctness, aggregate statistics, the
//! correctness-against-prompt-length curve and the consolidation report.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::model::{Backend, ConsolidationRecord};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("cannot aggregate an empty list")]
    EmptyList,
    #[error("no records to report on")]
    NoRecords,
    #[error("no gold text for possible records {ids:?}")]
    MissingGold { ids: Vec<String> },
}

fn fold_pass(text: &str) -> String {
    let folded: String = text
        .nfkd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .nfkd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(|c| match c {
            'œ' => "oe".chars().collect::<Vec<_>>(),
            'æ' => "ae".chars().collect(),
            'ß' => "ss".chars().collect(),
            'ø' => "o".chars().collect(),
            'đ' => "d".chars().collect(),
            'ł' => "l".chars().collect(),
            c => vec![c],
        })
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect();
    folded.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Text form used for every comparison.
///
/// Accents and other combining marks are folded away (compatibility
/// decomposition), letters are lowercased, the ligatures œ, æ and ß are
/// spelled out, every character that is neither alphanumeric nor whitespace
/// is deleted, and whitespace runs (line breaks included) become a single
/// space with none at either end.
pub fn normalize(text: &str) -> String {
    let mut current = fold_pass(text);
    // A few characters only reach their final form on a second pass, for
    // instance when lowercasing produces a decomposable letter.
    loop {
        let next = fold_pass(&current);
        if next == current {
            return current;
        }
        current = next;
    }
}

pub fn is_correct(predicted: &str, gold: &str) -> bool {
    normalize(predicted) == normalize(gold)
}

/// Word-level edit counts of a prediction against its gold text.
///
/// An addition is a predicted word absent from the gold, a deletion a gold
/// word missing from the prediction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordErrorReport {
    pub additions: usize,
    pub deletions: usize,
    pub substitutions: usize,
    pub total: usize,
    pub pred_len_words: usize,
    pub gold_len_words: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    Keep,
    Substitute,
    Delete,
    Add,
}

/// One minimal alignment of `pred` against `gold`, in reading order.
/// Backtracking from the end prefers, among optimal moves, a match or
/// substitution, then a deletion, then an addition.
fn align<T: PartialEq>(pred: &[T], gold: &[T]) -> Vec<Step> {
    let (n, m) = (pred.len(), gold.len());
    let mut d = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = d[i - 1][j - 1] + usize::from(pred[i - 1] != gold[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    let mut steps = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 {
            let same = pred[i - 1] == gold[j - 1];
            if d[i][j] == d[i - 1][j - 1] + usize::from(!same) {
                steps.push(if same { Step::Keep } else { Step::Substitute });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if j > 0 && d[i][j] == d[i][j - 1] + 1 {
            steps.push(Step::Delete);
            j -= 1;
        } else {
            steps.push(Step::Add);
            i -= 1;
        }
    }
    steps.reverse();
    steps
}

/// Word-level Levenshtein distance between the normalized texts.
pub fn word_error(predicted: &str, gold: &str) -> WordErrorReport {
    let predicted = normalize(predicted);
    let gold = normalize(gold);
    let pred: Vec<&str> = predicted.split_whitespace().collect();
    let gold: Vec<&str> = gold.split_whitespace().collect();
    let mut report = WordErrorReport {
        pred_len_words: pred.len(),
        gold_len_words: gold.len(),
        ..WordErrorReport::default()
    };
    for step in align(&pred, &gold) {
        match step {
            Step::Keep => {}
            Step::Substitute => report.substitutions += 1,
            Step::Delete => report.deletions += 1,
            Step::Add => report.additions += 1,
        }
    }
    report.total = report.additions + report.deletions + report.substitutions;
    report
}

/// A run of the word alignment that turns a prediction into its gold text,
/// over the original (unnormalized) words. `Delete` runs exist only in the
/// prediction and `Insert` runs only in the gold, so equal and delete runs
/// reassemble the prediction and equal and insert runs the gold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "text", rename_all = "snake_case")]
pub enum DiffHunk {
    Equal(String),
    Insert(String),
    Delete(String),
}

impl DiffHunk {
    fn same_kind(&self, other: &DiffHunk) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }

    fn text_mut(&mut self) -> &mut String {
        match self {
            DiffHunk::Equal(t) | DiffHunk::Insert(t) | DiffHunk::Delete(t) => t,
        }
    }
}

pub fn word_diff(predicted: &str, gold: &str) -> Vec<DiffHunk> {
    let pred: Vec<&str> = predicted.split_whitespace().collect();
    let gold_words: Vec<&str> = gold.split_whitespace().collect();
    let (mut i, mut j) = (0, 0);
    let mut pieces = Vec::new();
    for step in align(&pred, &gold_words) {
        match step {
            Step::Keep => {
                pieces.push(DiffHunk::Equal(pred[i].to_owned()));
                i += 1;
                j += 1;
            }
            Step::Substitute => {
                pieces.push(DiffHunk::Delete(pred[i].to_owned()));
                pieces.push(DiffHunk::Insert(gold_words[j].to_owned()));
                i += 1;
                j += 1;
            }
            Step::Delete => {
                pieces.push(DiffHunk::Insert(gold_words[j].to_owned()));
                j += 1;
            }
            Step::Add => {
                pieces.push(DiffHunk::Delete(pred[i].to_owned()));
                i += 1;
            }
        }
    }
    // Group each changed stretch as one delete run followed by one insert
    // run, and merge neighbouring runs of the same kind.
    let mut hunks: Vec<DiffHunk> = Vec::new();
    let mut pending_insert: Option<DiffHunk> = None;
    for piece in pieces {
        if matches!(piece, DiffHunk::Equal(_)) {
            hunks.extend(pending_insert.take());
        }
        if let DiffHunk::Insert(text) = piece {
            match &mut pending_insert {
                Some(run) => {
                    run.text_mut().push(' ');
                    run.text_mut().push_str(&text);
                }
                None => pending_insert = Some(DiffHunk::Insert(text)),
            }
            continue;
        }
        match hunks.last_mut() {
            Some(last) if last.same_kind(&piece) => {
                let text = match &piece {
                    DiffHunk::Equal(t) | DiffHunk::Delete(t) | DiffHunk::Insert(t) => t,
                };
                last.text_mut().push(' ');
                last.text_mut().push_str(text);
            }
            _ => hunks.push(piece),
        }
    }
    hunks.extend(pending_insert);
    hunks
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub mean: f64,
    pub median: f64,
    /// 1.96 times the sample standard deviation over the square root of n;
    /// zero for a single value.
    pub ci95_halfwidth: f64,
    pub n: usize,
}

pub fn aggregate(errors: &[usize]) -> Result<AggregateStats, EvalError> {
    if errors.is_empty() {
        return Err(EvalError::EmptyList);
    }
    let n = errors.len();
    let values: Vec<f64> = errors.iter().map(|&e| e as f64).collect();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let ci95_halfwidth = if n < 2 {
        0.0
    } else {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        1.96 * var.sqrt() / (n as f64).sqrt()
    };
    Ok(AggregateStats {
        mean,
        median,
        ci95_halfwidth,
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveSample {
    pub prompt_tokens: usize,
    pub correct: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub length_threshold: usize,
    pub correctness_rate: f64,
    pub n_samples: usize,
}

/// For each threshold, the correctness rate among samples whose prompt is
/// strictly shorter. Thresholds no sample falls under are left out.
pub fn correctness_curve(samples: &[CurveSample], thresholds: &[usize]) -> Vec<CurvePoint> {
    thresholds
        .iter()
        .filter_map(|&threshold| {
            let (n, correct) = samples
                .iter()
                .filter(|s| s.prompt_tokens < threshold)
                .fold((0usize, 0usize), |(n, c), s| (n + 1, c + usize::from(s.correct)));
            (n > 0).then(|| CurvePoint {
                length_threshold: threshold,
                correctness_rate: correct as f64 / n as f64,
                n_samples: n,
            })
        })
        .collect()
}

/// Multiples of `step` up to the first one above every sample, so the last
/// point covers the whole population.
pub fn default_thresholds(samples: &[CurveSample], step: usize) -> Vec<usize> {
    let step = step.max(1);
    let max = samples.iter().map(|s| s.prompt_tokens).max().unwrap_or(0);
    (1..=max / step + 1).map(|k| k * step).collect()
}

pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("length_threshold,correctness_rate,n_samples\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", p.length_threshold, p.correctness_rate, p.n_samples);
    }
    out
}

/// Counts and rates for one backend, or for all records together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub records: usize,
    pub possible: usize,
    pub correct: usize,
    pub possible_rate: f64,
    /// Undefined when no record is possible.
    pub correctness_rate_among_possible: Option<f64>,
    pub word_error: Option<AggregateStats>,
}

impl RateSummary {
    fn from_counts(records: usize, possible: usize, correct: usize, errors: &[usize]) -> Self {
        Self {
            records,
            possible,
            correct,
            possible_rate: if records == 0 {
                0.0
            } else {
                possible as f64 / records as f64
            },
            correctness_rate_among_possible: (possible > 0)
                .then(|| correct as f64 / possible as f64),
            word_error: aggregate(errors).ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsolidationReport {
    pub overall: RateSummary,
    pub per_backend: BTreeMap<String, RateSummary>,
    /// Possible records, with their prompt length and correctness.
    pub samples: BTreeMap<String, Vec<CurveSample>>,
}

/// Picks the gold text of a record: its own review, then a reviewed record
/// of the same modification on another backend, then the supplied map by
/// record id, then by modification id.
pub fn gold_for<'a>(
    record: &'a ConsolidationRecord,
    reviewed_by_modification: &HashMap<&str, &'a str>,
    gold: &'a HashMap<String, String>,
) -> Option<&'a str> {
    record
        .reviewed_gold()
        .or_else(|| reviewed_by_modification.get(record.modification_id()).copied())
        .or_else(|| gold.get(record.id()).map(String::as_str))
        .or_else(|| gold.get(record.modification_id()).map(String::as_str))
}

pub fn consolidation_report(
    records: &[ConsolidationRecord],
    gold: &HashMap<String, String>,
) -> Result<ConsolidationReport, EvalError> {
    if records.is_empty() {
        return Err(EvalError::NoRecords);
    }
    let mut reviewed: HashMap<&str, &str> = HashMap::new();
    for r in records {
        if let Some(g) = r.reviewed_gold() {
            reviewed.entry(r.modification_id()).or_insert(g);
        }
    }

    #[derive(Default)]
    struct Tally {
        records: usize,
        possible: usize,
        correct: usize,
        errors: Vec<usize>,
        samples: Vec<CurveSample>,
    }
    let mut by_backend: BTreeMap<&Backend, Tally> = BTreeMap::new();
    let mut missing = Vec::new();
    for record in records {
        let tally = by_backend.entry(record.backend()).or_default();
        tally.records += 1;
        let Some(prediction) = record.prediction() else {
            continue;
        };
        tally.possible += 1;
        let Some(reference) = gold_for(record, &reviewed, gold) else {
            missing.push(record.id().to_owned());
            continue;
        };
        let correct = is_correct(prediction, reference);
        tally.correct += usize::from(correct);
        tally.errors.push(word_error(prediction, reference).total);
        tally.samples.push(CurveSample {
            prompt_tokens: record.prompt_tokens(),
            correct,
        });
    }
    if !missing.is_empty() {
        missing.sort();
        return Err(EvalError::MissingGold { ids: missing });
    }

    let mut all_errors = Vec::new();
    let (mut total, mut possible, mut correct) = (0, 0, 0);
    let mut per_backend = BTreeMap::new();
    let mut samples = BTreeMap::new();
    for (backend, tally) in by_backend {
        total += tally.records;
        possible += tally.possible;
        correct += tally.correct;
        all_errors.extend(&tally.errors);
        per_backend.insert(
            backend.to_string(),
            RateSummary::from_counts(tally.records, tally.possible, tally.correct, &tally.errors),
        );
        samples.insert(backend.to_string(), tally.samples);
    }
    Ok(ConsolidationReport {
        overall: RateSummary::from_counts(total, possible, correct, &all_errors),
        per_backend,
        samples,
    })
}

/// One row of the rate table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub model: String,
    pub possible_rate: f64,
    pub correctness_rate: Option<f64>,
}

pub const NOT_APPLICABLE: &str = "n/a";

fn percent(rate: Option<f64>) -> String {
    rate.map_or_else(|| NOT_APPLICABLE.to_owned(), |r| format!("{:.1}%", r * 100.0))
}

/// Plain-text table with the columns Model, Rate of possible
/// consolidations, and Correctness rate among possible consolidations.
/// Rates are percentages with one decimal.
pub fn render_table(rows: &[TableRow]) -> String {
    let header = [
        "Model".to_owned(),
        "Rate of possible consolidations".to_owned(),
        "Correctness rate among possible consolidations".to_owned(),
    ];
    let body: Vec<[String; 3]> = rows
        .iter()
        .map(|r| {
            [
                r.model.clone(),
                percent(Some(r.possible_rate)),
                percent(r.correctness_rate),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..3)
        .map(|c| {
            std::iter::once(&header)
                .chain(&body)
                .map(|row| row[c].chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |row: &[String; 3]| {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        format!("| {} |\n", cells.join(" | "))
    };
    let rule = format!(
        "|{}|\n",
        widths
            .iter()
            .map(|w| "-".repeat(w + 2))
            .collect::<Vec<_>>()
            .join("|")
    );
    let mut out = line(&header);
    out.push_str(&rule);
    for row in &body {
        out.push_str(&line(row));
    }
    out
}

impl ConsolidationReport {
    pub fn table_rows(&self) -> Vec<TableRow> {
        self.per_backend
            .iter()
            .map(|(name, s)| TableRow {
                model: name.clone(),
                possible_rate: s.possible_rate,
                correctness_rate: s.correctness_rate_among_possible,
            })
            .collect()
    }

    pub fn render_table(&self) -> String {
        render_table(&self.table_rows())
    }

    /// Curve over one backend's possible records.
    pub fn curve(&self, backend: &str, step: usize) -> Vec<CurvePoint> {
        let samples = self.samples.get(backend).map(Vec::as_slice).unwrap_or_default();
        correctness_curve(samples, &default_thresholds(samples, step))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConsolidationTriplet, GateOutcome, ReviewStatus};
    use proptest::prelude::*;

    #[test]
    fn normalization() {
        assert_eq!(normalize("Éléments,\nvoilà"), "elements voila");
        assert_eq!(normalize("elements voila"), "elements voila");
        assert_eq!(normalize("  « Œuvre » ; l'État  "), "oeuvre letat");
        assert_eq!(normalize("Straße"), "strasse");
        assert!(is_correct("Les élèves, demain.", "les eleves demain"));
        assert!(!is_correct("les eleves demain", "les maitres demain"));
    }

    #[test]
    fn word_error_breakdown() {
        let r = word_error("a b c d", "a x c");
        assert_eq!((r.substitutions, r.additions, r.deletions, r.total), (1, 1, 0, 2));
        assert_eq!((r.pred_len_words, r.gold_len_words), (4, 3));
        let r = word_error("a c", "a b c");
        assert_eq!((r.deletions, r.total), (1, 1));
        assert_eq!(word_error("Same text.", "same TEXT").total, 0);
        assert_eq!(word_error("", "").total, 0);
    }

    #[test]
    fn diff_hunks() {
        assert_eq!(
            word_diff("a b c d", "a x c"),
            [
                DiffHunk::Equal("a".into()),
                DiffHunk::Delete("b".into()),
                DiffHunk::Insert("x".into()),
                DiffHunk::Equal("c".into()),
                DiffHunk::Delete("d".into()),
            ]
        );
        assert_eq!(
            word_diff("a b c", "a y z c"),
            [
                DiffHunk::Equal("a".into()),
                DiffHunk::Delete("b".into()),
                DiffHunk::Insert("y z".into()),
                DiffHunk::Equal("c".into()),
            ]
        );
        assert_eq!(word_diff("a b", "a b"), [DiffHunk::Equal("a b".into())]);
        assert_eq!(
            serde_json::to_string(&DiffHunk::Insert("x".into())).unwrap(),
            r#"{"kind":"insert","text":"x"}"#
        );
    }

    #[test]
    fn aggregates() {
        let s = aggregate(&[5]).unwrap();
        assert_eq!((s.mean, s.median, s.ci95_halfwidth, s.n), (5.0, 5.0, 0.0, 1));
        let s = aggregate(&[0, 10]).unwrap();
        assert_eq!((s.mean, s.median), (5.0, 5.0));
        assert!((s.ci95_halfwidth - 1.96 * 50f64.sqrt() / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(aggregate(&[]), Err(EvalError::EmptyList));
    }

    #[test]
    fn curve() {
        let samples = [
            CurveSample { prompt_tokens: 500, correct: true },
            CurveSample { prompt_tokens: 800, correct: false },
            CurveSample { prompt_tokens: 1200, correct: true },
        ];
        let points = correctness_curve(&samples, &[100, 1000, 2000]);
        assert_eq!(points.len(), 2);
        assert_eq!((points[0].length_threshold, points[0].correctness_rate, points[0].n_samples), (1000, 0.5, 2));
        assert_eq!((points[1].correctness_rate, points[1].n_samples), (2.0 / 3.0, 3));
        assert_eq!(default_thresholds(&samples, 500), [500, 1000, 1500]);
        assert_eq!(
            curve_csv(&points[..1]),
            "length_threshold,correctness_rate,n_samples\n1000,0.5,2\n"
        );
    }

    fn record(id: &str, modification: &str, backend: Backend, prediction: Option<&str>) -> ConsolidationRecord {
        let triplet = ConsolidationTriplet::new("i", "x", None).unwrap();
        let gate = if prediction.is_some() {
            GateOutcome::Possible
        } else {
            GateOutcome::ExcludedTable
        };
        ConsolidationRecord::new(id, modification, triplet, backend, prediction.map(Into::into), gate, vec![], 10)
            .unwrap()
    }

    #[test]
    fn report_counts_and_gold_priority() {
        let records = vec![
            record("r1", "m1", Backend::RuleBased, Some("good")),
            record("r2", "m2", Backend::RuleBased, Some("bad")),
            record("r3", "m3", Backend::RuleBased, None),
            record("r4", "m4", Backend::RuleBased, None),
        ];
        let gold: HashMap<String, String> =
            [("m1", "good"), ("r2", "other")].map(|(k, v)| (k.into(), v.into())).into();
        let report = consolidation_report(&records, &gold).unwrap();
        assert_eq!(report.overall.possible_rate, 0.5);
        assert_eq!(report.overall.correctness_rate_among_possible, Some(0.5));

        let amended = records[1]
            .clone()
            .with_review(ReviewStatus::Amended { gold_text: "bad".into() })
            .unwrap();
        let report = consolidation_report(&[records[0].clone(), amended], &gold).unwrap();
        assert_eq!(report.overall.correct, 2);

        // A review on the rule-based record serves the llm record of the
        // same modification.
        let llm = record("r5", "m2", Backend::Llm("m".into()), Some("Bad!"));
        let reviewed = records[1].clone().with_review(ReviewStatus::Approved).unwrap();
        let report = consolidation_report(&[reviewed, llm], &HashMap::new()).unwrap();
        assert_eq!(report.per_backend["llm:m"].correct, 1);
    }

    #[test]
    fn report_errors_and_na() {
        let excluded = vec![record("r1", "m1", Backend::RuleBased, None)];
        let report = consolidation_report(&excluded, &HashMap::new()).unwrap();
        assert_eq!(report.overall.possible_rate, 0.0);
        assert_eq!(report.overall.correctness_rate_among_possible, None);
        assert!(report.render_table().contains("| 0.0%"));
        assert!(report.render_table().contains("n/a"));

        let possible = vec![
            record("r2", "m2", Backend::RuleBased, Some("x")),
            record("r1", "m1", Backend::RuleBased, Some("x")),
        ];
        assert_eq!(
            consolidation_report(&possible, &HashMap::new()),
            Err(EvalError::MissingGold { ids: vec!["r1".into(), "r2".into()] })
        );
        assert_eq!(consolidation_report(&[], &HashMap::new()), Err(EvalError::NoRecords));
    }

    #[test]
    fn table_layout() {
        let table = render_table(&[
            TableRow { model: "Our model".into(), possible_rate: 0.498, correctness_rate: Some(0.632) },
            TableRow { model: "GPT4-0613".into(), possible_rate: 0.913, correctness_rate: Some(0.614) },
        ]);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(
            lines[0],
            "| Model     | Rate of possible consolidations | Correctness rate among possible consolidations |"
        );
        assert!(lines[1].starts_with("|-----------|"));
        assert_eq!(
            lines[2],
            "| Our model | 49.8%                           | 63.2%                                          |"
        );
        assert!(lines[3].starts_with("| GPT4-0613 | 91.3%"));
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(s in "\\PC{0,40}") {
            let once = normalize(&s);
            prop_assert_eq!(normalize(&once), once);
        }

        #[test]
        fn word_error_properties(
            a in proptest::collection::vec("[a-c]", 0..7),
            b in proptest::collection::vec("[a-c]", 0..7),
            c in proptest::collection::vec("[a-c]", 0..7),
        ) {
            let (a, b, c) = (a.join(" "), b.join(" "), c.join(" "));
            let ab = word_error(&a, &b);
            let ba = word_error(&b, &a);
            prop_assert_eq!(word_error(&a, &a).total, 0);
            prop_assert_eq!(ab.total, ba.total);
            prop_assert_eq!(ab.pred_len_words + ab.deletions, ab.gold_len_words + ab.additions);
            prop_assert_eq!(ab.total, ab.additions + ab.deletions + ab.substitutions);
            prop_assert!(ab.total <= ab.pred_len_words + ab.gold_len_words);
            prop_assert!(word_error(&a, &c).total <= ab.total + word_error(&b, &c).total);
            if is_correct(&a, &b) {
                prop_assert_eq!(ab.total, 0);
            }
        }

        #[test]
        fn diff_reassembles_both_sides(
            a in proptest::collection::vec("[a-c]", 0..8),
            b in proptest::collection::vec("[a-c]", 0..8),
        ) {
            let (a, b) = (a.join(" "), b.join(" "));
            let hunks = word_diff(&a, &b);
            let side = |keep_insert: bool| {
                hunks
                    .iter()
                    .filter_map(|h| match h {
                        DiffHunk::Equal(t) => Some(t.as_str()),
                        DiffHunk::Insert(t) if keep_insert => Some(t.as_str()),
                        DiffHunk::Delete(t) if !keep_insert => Some(t.as_str()),
                        _ => None,
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            prop_assert_eq!(side(false), a);
            prop_assert_eq!(side(true), b);
        }

        #[test]
        fn curve_rates_bounded(samples in proptest::collection::vec((0usize..3000, any::<bool>()), 1..50)) {
            let samples: Vec<CurveSample> = samples
                .into_iter()
                .map(|(prompt_tokens, correct)| CurveSample { prompt_tokens, correct })
                .collect();
            let points = correctness_curve(&samples, &default_thresholds(&samples, 250));
            prop_assert!(points.iter().all(|p| (0.0..=1.0).contains(&p.correctness_rate)));
            let overall = samples.iter().filter(|s| s.correct).count() as f64 / samples.len() as f64;
            let last = points.last().unwrap();
            prop_assert_eq!(last.n_samples, samples.len());
            prop_assert_eq!(last.correctness_rate, overall);
        }
    }
}
