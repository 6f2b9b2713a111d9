//! Domain types shared by every stage of the consolidation pipeline.
//!
//! All types validate their invariants at construction time, including when
//! deserialized, so a value that exists is a value that is well formed.

use std::fmt;
use std::ops::Range;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

/// Canonical paragraph separator inside article texts.
pub const PARAGRAPH_SEPARATOR: char = '\n';

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("bill has no articles")]
    EmptyBill,
    #[error("duplicate article number {0:?} in bill")]
    DuplicateArticle(String),
    #[error("{0} must not be empty")]
    Empty(&'static str),
    #[error("paragraph {index} contains a paragraph separator")]
    EmbeddedSeparator { index: usize },
    #[error("reference span {start}..{end} is invalid")]
    BadSpan { start: usize, end: usize },
    #[error("a prediction must be present exactly when the gate verdict is possible")]
    PredictionGateMismatch,
}

/// A bill article: a number such as `"3"` or `"3 bis"` and its raw text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawBillArticle")]
pub struct BillArticle {
    number: String,
    text: String,
}

#[derive(Deserialize)]
struct RawBillArticle {
    number: String,
    text: String,
}

impl TryFrom<RawBillArticle> for BillArticle {
    type Error = ModelError;
    fn try_from(raw: RawBillArticle) -> Result<Self, Self::Error> {
        BillArticle::new(raw.number, raw.text)
    }
}

impl BillArticle {
    pub fn new(number: impl Into<String>, text: impl Into<String>) -> Result<Self, ModelError> {
        let number = number.into();
        let text = text.into();
        if number.trim().is_empty() {
            return Err(ModelError::Empty("article number"));
        }
        if text.trim().is_empty() {
            return Err(ModelError::Empty("article text"));
        }
        Ok(Self { number, text })
    }

    pub fn number(&self) -> &str {
        &self.number
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

/// A snapshot of a bill. Bills grow over successive readings, so the date the
/// snapshot was taken is carried along.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawBill")]
pub struct Bill {
    id: String,
    title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    snapshot_date: Option<NaiveDate>,
    articles: Vec<BillArticle>,
}

#[derive(Deserialize)]
struct RawBill {
    id: String,
    #[serde(default)]
    title: String,
    #[serde(default)]
    snapshot_date: Option<NaiveDate>,
    articles: Vec<BillArticle>,
}

impl TryFrom<RawBill> for Bill {
    type Error = ModelError;
    fn try_from(raw: RawBill) -> Result<Self, Self::Error> {
        Bill::new(raw.id, raw.title, raw.snapshot_date, raw.articles)
    }
}

impl Bill {
    pub fn new(
        id: impl Into<String>,
        title: impl Into<String>,
        snapshot_date: Option<NaiveDate>,
        articles: Vec<BillArticle>,
    ) -> Result<Self, ModelError> {
        if articles.is_empty() {
            return Err(ModelError::EmptyBill);
        }
        let mut seen = std::collections::HashSet::new();
        for article in &articles {
            if !seen.insert(article.number.as_str()) {
                return Err(ModelError::DuplicateArticle(article.number.clone()));
            }
        }
        Ok(Self {
            id: id.into(),
            title: title.into(),
            snapshot_date,
            articles,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn title(&self) -> &str {
        &self.title
    }

    pub fn snapshot_date(&self) -> Option<NaiveDate> {
        self.snapshot_date
    }

    pub fn articles(&self) -> &[BillArticle] {
        &self.articles
    }
}

/// A citation of a law article found in a modification section.
///
/// `act` is `None` when the text names no act at all; an anaphoric mention
/// that could not be resolved is kept verbatim. `raw_span` is a byte range
/// into the text the reference was extracted from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawLegalReference")]
pub struct LegalReference {
    article_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    act: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    act_date: Option<NaiveDate>,
    raw_span: Range<usize>,
}

#[derive(Deserialize)]
struct RawLegalReference {
    article_id: String,
    #[serde(default)]
    act: Option<String>,
    #[serde(default)]
    act_date: Option<NaiveDate>,
    raw_span: Range<usize>,
}

impl TryFrom<RawLegalReference> for LegalReference {
    type Error = ModelError;
    fn try_from(raw: RawLegalReference) -> Result<Self, Self::Error> {
        LegalReference::new(raw.article_id, raw.act, raw.act_date, raw.raw_span)
    }
}

impl LegalReference {
    pub fn new(
        article_id: impl Into<String>,
        act: Option<String>,
        act_date: Option<NaiveDate>,
        raw_span: Range<usize>,
    ) -> Result<Self, ModelError> {
        let article_id = article_id.into();
        if article_id.trim().is_empty() {
            return Err(ModelError::Empty("article id"));
        }
        if raw_span.start > raw_span.end {
            return Err(ModelError::BadSpan {
                start: raw_span.start,
                end: raw_span.end,
            });
        }
        Ok(Self {
            article_id,
            act,
            act_date,
            raw_span,
        })
    }

    /// Checks that the span lies inside a source text of `len` bytes.
    pub fn check_within(&self, len: usize) -> Result<(), ModelError> {
        if self.raw_span.end > len {
            return Err(ModelError::BadSpan {
                start: self.raw_span.start,
                end: self.raw_span.end,
            });
        }
        Ok(())
    }

    pub fn article_id(&self) -> &str {
        &self.article_id
    }

    pub fn act(&self) -> Option<&str> {
        self.act.as_deref()
    }

    pub fn act_date(&self) -> Option<NaiveDate> {
        self.act_date
    }

    pub fn raw_span(&self) -> Range<usize> {
        self.raw_span.clone()
    }
}

impl fmt::Display for LegalReference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.act {
            Some(act) => write!(f, "Article {} of {}", self.article_id, act),
            None => write!(f, "Article {}", self.article_id),
        }
    }
}

/// The current text of a law article, one entry per paragraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawLawArticle")]
pub struct LawArticle {
    reference: LegalReference,
    paragraphs: Vec<String>,
}

#[derive(Deserialize)]
struct RawLawArticle {
    reference: LegalReference,
    paragraphs: Vec<String>,
}

impl TryFrom<RawLawArticle> for LawArticle {
    type Error = ModelError;
    fn try_from(raw: RawLawArticle) -> Result<Self, Self::Error> {
        LawArticle::new(raw.reference, raw.paragraphs)
    }
}

impl LawArticle {
    pub fn new(reference: LegalReference, paragraphs: Vec<String>) -> Result<Self, ModelError> {
        if paragraphs.is_empty() {
            return Err(ModelError::Empty("paragraph list"));
        }
        if let Some(index) = paragraphs
            .iter()
            .position(|p| p.contains(PARAGRAPH_SEPARATOR))
        {
            return Err(ModelError::EmbeddedSeparator { index });
        }
        Ok(Self {
            reference,
            paragraphs,
        })
    }

    /// Builds an article from canonical text, one paragraph per line.
    pub fn from_text(reference: LegalReference, text: &str) -> Result<Self, ModelError> {
        Self::new(
            reference,
            text.split(PARAGRAPH_SEPARATOR).map(str::to_owned).collect(),
        )
    }

    pub fn reference(&self) -> &LegalReference {
        &self.reference
    }

    pub fn paragraphs(&self) -> &[String] {
        &self.paragraphs
    }

    /// Canonical text: paragraphs joined by the separator.
    pub fn text(&self) -> String {
        self.paragraphs.join("\n")
    }
}

/// The atomic unit of both datasets and predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTriplet")]
pub struct ConsolidationTriplet {
    instruction: String,
    input: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    response: Option<String>,
}

#[derive(Deserialize)]
struct RawTriplet {
    instruction: String,
    input: String,
    #[serde(default)]
    response: Option<String>,
}

impl TryFrom<RawTriplet> for ConsolidationTriplet {
    type Error = ModelError;
    fn try_from(raw: RawTriplet) -> Result<Self, Self::Error> {
        ConsolidationTriplet::new(raw.instruction, raw.input, raw.response)
    }
}

impl ConsolidationTriplet {
    pub fn new(
        instruction: impl Into<String>,
        input: impl Into<String>,
        response: Option<String>,
    ) -> Result<Self, ModelError> {
        let instruction = instruction.into();
        let input = input.into();
        if instruction.trim().is_empty() {
            return Err(ModelError::Empty("instruction"));
        }
        if input.trim().is_empty() {
            return Err(ModelError::Empty("input"));
        }
        Ok(Self {
            instruction,
            input,
            response,
        })
    }

    pub fn instruction(&self) -> &str {
        &self.instruction
    }

    pub fn input(&self) -> &str {
        &self.input
    }

    pub fn response(&self) -> Option<&str> {
        self.response.as_deref()
    }

    pub fn with_response(mut self, response: Option<String>) -> Self {
        self.response = response;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    RuleBased,
    SpanBaseline,
    Llm(String),
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::RuleBased => f.write_str("rule-based"),
            Backend::SpanBaseline => f.write_str("span-baseline"),
            Backend::Llm(name) => write!(f, "llm:{name}"),
        }
    }
}

/// Whether a record could be consolidated by its backend.
///
/// `Failed` covers backend-side failures (unparseable instruction, missing
/// anchor, remote error); like the exclusions it leaves no prediction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum GateOutcome {
    Possible,
    ExcludedTable,
    ExcludedLength { token_count: usize },
    Failed { reason: String },
}

impl GateOutcome {
    pub fn is_possible(&self) -> bool {
        matches!(self, GateOutcome::Possible)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ReviewStatus {
    Pending,
    Approved,
    Amended { gold_text: String },
}

impl ReviewStatus {
    pub fn is_final(&self) -> bool {
        !matches!(self, ReviewStatus::Pending)
    }
}

/// One pipeline result for one simple modification on one backend.
///
/// `modification_id` is shared by the records of every backend for the same
/// simple modification, so a gold text reviewed on one backend's record can
/// serve as reference for the others.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawRecord")]
pub struct ConsolidationRecord {
    id: String,
    modification_id: String,
    #[serde(flatten)]
    triplet: ConsolidationTriplet,
    backend: Backend,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prediction: Option<String>,
    gate: GateOutcome,
    review_status: ReviewStatus,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    references: Vec<LegalReference>,
    prompt_tokens: usize,
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    modification_id: String,
    #[serde(flatten)]
    triplet: ConsolidationTriplet,
    backend: Backend,
    #[serde(default)]
    prediction: Option<String>,
    gate: GateOutcome,
    review_status: ReviewStatus,
    #[serde(default)]
    references: Vec<LegalReference>,
    #[serde(default)]
    prompt_tokens: usize,
}

impl TryFrom<RawRecord> for ConsolidationRecord {
    type Error = ModelError;
    fn try_from(raw: RawRecord) -> Result<Self, Self::Error> {
        let record = ConsolidationRecord::new(
            raw.id,
            raw.modification_id,
            raw.triplet,
            raw.backend,
            raw.prediction,
            raw.gate,
            raw.references,
            raw.prompt_tokens,
        )?;
        record.with_review(raw.review_status)
    }
}

impl ConsolidationRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: impl Into<String>,
        modification_id: impl Into<String>,
        triplet: ConsolidationTriplet,
        backend: Backend,
        prediction: Option<String>,
        gate: GateOutcome,
        references: Vec<LegalReference>,
        prompt_tokens: usize,
    ) -> Result<Self, ModelError> {
        let id = id.into();
        if id.trim().is_empty() {
            return Err(ModelError::Empty("record id"));
        }
        if prediction.is_some() != gate.is_possible() {
            return Err(ModelError::PredictionGateMismatch);
        }
        Ok(Self {
            id,
            modification_id: modification_id.into(),
            triplet,
            backend,
            prediction,
            gate,
            review_status: ReviewStatus::Pending,
            references,
            prompt_tokens,
        })
    }

    /// Returns a copy carrying `status`, rejecting an empty amended text.
    pub fn with_review(mut self, status: ReviewStatus) -> Result<Self, ModelError> {
        if let ReviewStatus::Amended { gold_text } = &status {
            if gold_text.trim().is_empty() {
                return Err(ModelError::Empty("gold text"));
            }
        }
        self.review_status = status;
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn modification_id(&self) -> &str {
        &self.modification_id
    }

    pub fn triplet(&self) -> &ConsolidationTriplet {
        &self.triplet
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn prediction(&self) -> Option<&str> {
        self.prediction.as_deref()
    }

    pub fn gate(&self) -> &GateOutcome {
        &self.gate
    }

    pub fn review_status(&self) -> &ReviewStatus {
        &self.review_status
    }

    pub fn references(&self) -> &[LegalReference] {
        &self.references
    }

    pub fn prompt_tokens(&self) -> usize {
        self.prompt_tokens
    }

    /// Gold text established by review on this record, if any.
    pub fn reviewed_gold(&self) -> Option<&str> {
        match &self.review_status {
            ReviewStatus::Amended { gold_text } => Some(gold_text),
            ReviewStatus::Approved => self.prediction(),
            ReviewStatus::Pending => None,
        }
    }
}
