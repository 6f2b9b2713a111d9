//! Two-span edit representation of a consolidation.
//!
//! Texts are shown to a span model in an NL-marked form: `"[NL] "` before
//! every paragraph and `" [NL]"` at the end. A consolidation is then one
//! deletion span in the marked existing article and one addition span in
//! the marked modification section; overwriting the first with the content
//! of the second and removing the markers yields the consolidated text.
//!
//! Offsets in [`SpanLabels`] count Unicode scalar values (chars), not bytes.

use std::io::{BufRead, Write};
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::ConsolidationTriplet;
use crate::model::PARAGRAPH_SEPARATOR;

pub const NL: &str = "[NL]";

/// How far derive_labels widens the minimal difference while looking for
/// an addition text that occurs verbatim in the instruction.
const MAX_WIDENING: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpanError {
    #[error("[NL] markers are not where insert_nl puts them")]
    MalformedMarkers,
    #[error("triplet has no response")]
    MissingResponse,
    #[error("input and response differ in more than one region")]
    NotSingleEdit,
    #[error("replacement text {0:?} does not occur in the instruction")]
    AdditionNotFound(String),
    #[error("span {span:?} out of bounds for text of {len} chars")]
    OutOfRange { span: Range<usize>, len: usize },
}

/// Marks paragraphs and the end of text.
pub fn insert_nl(text: &str) -> String {
    if text.is_empty() {
        return NL.to_owned();
    }
    let mut out = String::with_capacity(text.len() + 16);
    for (i, paragraph) in text.split(PARAGRAPH_SEPARATOR).enumerate() {
        if i > 0 {
            out.push(PARAGRAPH_SEPARATOR);
        }
        out.push_str(NL);
        out.push(' ');
        out.push_str(paragraph);
    }
    out.push(' ');
    out.push_str(NL);
    out
}

/// Exact inverse of [`insert_nl`].
pub fn strip_nl(marked: &str) -> Result<String, SpanError> {
    if marked == NL {
        return Ok(String::new());
    }
    let body = marked
        .strip_suffix(&format!(" {NL}"))
        .ok_or(SpanError::MalformedMarkers)?;
    let prefix = format!("{NL} ");
    let paragraphs = body
        .split(PARAGRAPH_SEPARATOR)
        .map(|p| p.strip_prefix(&prefix).ok_or(SpanError::MalformedMarkers))
        .collect::<Result<Vec<_>, _>>()?;
    let text = paragraphs.join("\n");
    if insert_nl(&text) != marked {
        return Err(SpanError::MalformedMarkers);
    }
    Ok(text)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanLabels {
    /// Range in the NL-marked existing article.
    pub deletion: Range<usize>,
    /// Range in the NL-marked modification section.
    pub addition: Range<usize>,
    /// The addition text occurs more than once in the instruction; the
    /// first occurrence was taken.
    #[serde(default)]
    pub ambiguous: bool,
}

impl SpanLabels {
    pub fn identity() -> Self {
        Self {
            deletion: 0..0,
            addition: 0..0,
            ambiguous: false,
        }
    }
}

fn is_boundary(text: &[char], i: usize) -> bool {
    i == 0 || i == text.len() || text[i - 1].is_whitespace() || text[i].is_whitespace()
}

/// Derives the labels of a single-edit triplet.
///
/// The edit is the region left between the longest common prefix and
/// suffix of the marked input and response, moved outwards to whitespace
/// boundaries when possible. If the replacement text of that region is not
/// found in the marked instruction, slightly wider regions are tried before
/// giving up.
pub fn derive_labels(triplet: &ConsolidationTriplet) -> Result<SpanLabels, SpanError> {
    let response = triplet.response().ok_or(SpanError::MissingResponse)?;
    let input: Vec<char> = insert_nl(triplet.input()).chars().collect();
    let output: Vec<char> = insert_nl(response).chars().collect();
    let instruction = insert_nl(triplet.instruction());

    let min_len = input.len().min(output.len());
    let lcp = input.iter().zip(&output).take_while(|(a, b)| a == b).count();
    let lcs_full = input
        .iter()
        .rev()
        .zip(output.iter().rev())
        .take_while(|(a, b)| a == b)
        .count();
    let suffix_limit = |p: usize| lcs_full.min(min_len - p);

    if lcp == input.len() && lcp == output.len() {
        return Ok(SpanLabels {
            deletion: lcp..lcp,
            addition: 0..0,
            ambiguous: false,
        });
    }

    let try_split = |p: usize, s: usize| -> Option<SpanLabels> {
        let added: String = output[p..output.len() - s].iter().collect();
        let deletion = p..input.len() - s;
        if added.is_empty() {
            return Some(SpanLabels {
                deletion,
                addition: 0..0,
                ambiguous: false,
            });
        }
        let mut hits = instruction.match_indices(&added);
        let (byte_at, _) = hits.next()?;
        let start = instruction[..byte_at].chars().count();
        Some(SpanLabels {
            deletion,
            addition: start..start + added.chars().count(),
            ambiguous: hits.next().is_some(),
        })
    };

    let snapped_p = (0..=lcp)
        .rev()
        .find(|&p| is_boundary(&input, p) && is_boundary(&output, p))
        .unwrap_or(0);
    let snapped_s = (0..=suffix_limit(snapped_p))
        .rev()
        .find(|&s| is_boundary(&input, input.len() - s) && is_boundary(&output, output.len() - s))
        .unwrap_or(0);
    if let Some(labels) = try_split(snapped_p, snapped_s) {
        return Ok(labels);
    }
    for widen in 0..=MAX_WIDENING {
        for dp in 0..=widen.min(lcp) {
            let p = lcp - dp;
            let Some(s) = suffix_limit(p).checked_sub(widen - dp) else {
                continue;
            };
            if let Some(labels) = try_split(p, s) {
                return Ok(labels);
            }
        }
    }

    let s = suffix_limit(lcp);
    let removed = &input[lcp..input.len() - s];
    let added = &output[lcp..output.len() - s];
    if changed_regions(removed, added) > 1 {
        Err(SpanError::NotSingleEdit)
    } else {
        Err(SpanError::AdditionNotFound(added.iter().collect()))
    }
}

/// Number of maximal runs of non-matching words between two texts, after a
/// longest-common-subsequence alignment of their whitespace-separated words.
fn changed_regions(a: &[char], b: &[char]) -> usize {
    let a: String = a.iter().collect();
    let b: String = b.iter().collect();
    let a: Vec<&str> = a.split_whitespace().collect();
    let b: Vec<&str> = b.split_whitespace().collect();
    let (n, m) = (a.len(), b.len());
    let mut lcs = vec![vec![0usize; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            lcs[i][j] = if a[i] == b[j] {
                lcs[i + 1][j + 1] + 1
            } else {
                lcs[i + 1][j].max(lcs[i][j + 1])
            };
        }
    }
    let (mut i, mut j) = (0, 0);
    let mut regions = 0;
    let mut in_change = false;
    while i < n || j < m {
        if i < n && j < m && a[i] == b[j] {
            i += 1;
            j += 1;
            in_change = false;
            continue;
        }
        if !in_change {
            regions += 1;
            in_change = true;
        }
        if j == m || (i < n && lcs[i + 1][j] >= lcs[i][j + 1]) {
            i += 1;
        } else {
            j += 1;
        }
    }
    regions
}

fn char_slice(text: &str, span: &Range<usize>) -> Result<String, SpanError> {
    let len = text.chars().count();
    if span.start > span.end || span.end > len {
        return Err(SpanError::OutOfRange {
            span: span.clone(),
            len,
        });
    }
    Ok(text.chars().skip(span.start).take(span.len()).collect())
}

/// Overwrites the deletion span of the marked existing text with the
/// addition span of the marked modification, then removes the markers.
pub fn reconstruct(
    existing: &str,
    modification: &str,
    labels: &SpanLabels,
) -> Result<String, SpanError> {
    let marked: Vec<char> = insert_nl(existing).chars().collect();
    let deletion = &labels.deletion;
    if deletion.start > deletion.end || deletion.end > marked.len() {
        return Err(SpanError::OutOfRange {
            span: deletion.clone(),
            len: marked.len(),
        });
    }
    let addition = char_slice(&insert_nl(modification), &labels.addition)?;
    let mut out: String = marked[..deletion.start].iter().collect();
    out.push_str(&addition);
    out.extend(&marked[deletion.end..]);
    strip_nl(&out)
}

/// One line of a span-label dataset file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanLabelRecord {
    pub triplet_id: String,
    pub del_start: usize,
    pub del_end: usize,
    pub add_start: usize,
    pub add_end: usize,
}

impl SpanLabelRecord {
    pub fn new(triplet_id: impl Into<String>, labels: &SpanLabels) -> Self {
        Self {
            triplet_id: triplet_id.into(),
            del_start: labels.deletion.start,
            del_end: labels.deletion.end,
            add_start: labels.addition.start,
            add_end: labels.addition.end,
        }
    }

    pub fn labels(&self) -> SpanLabels {
        SpanLabels {
            deletion: self.del_start..self.del_end,
            addition: self.add_start..self.add_end,
            ambiguous: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SpanFileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line_no}: {source}")]
    Parse {
        line_no: usize,
        source: serde_json::Error,
    },
    #[error("line {line_no}: span start after end")]
    Inverted { line_no: usize },
}

pub fn read_span_labels(path: impl AsRef<Path>) -> Result<Vec<SpanLabelRecord>, SpanFileError> {
    let reader = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i + 1;
        let record: SpanLabelRecord = serde_json::from_str(&line)
            .map_err(|source| SpanFileError::Parse { line_no, source })?;
        if record.del_start > record.del_end || record.add_start > record.add_end {
            return Err(SpanFileError::Inverted { line_no });
        }
        out.push(record);
    }
    Ok(out)
}

pub fn write_span_labels(
    path: impl AsRef<Path>,
    records: &[SpanLabelRecord],
) -> Result<(), SpanFileError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for record in records {
        serde_json::to_writer(&mut out, record).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
