//! Deterministic consolidation: parse a modification section into typed
//! amendment operations, then apply them to the existing article.
//!
//! Operations apply strictly in order, each to the output of the previous
//! one. Any failure aborts the whole application; no partial text is ever
//! returned.
//!
//! `ReplaceWords`, `DeleteWords` and `InsertAfterWords` act on **every**
//! occurrence of their quoted text inside the scope. Drafting narrows a
//! replacement to a single place with an explicit paragraph or sentence
//! scope ("In the second paragraph, the words ..."), not by relying on a
//! first-occurrence rule.

mod apply;
mod ordinal;
mod render;
mod sentences;
mod templates;

use std::num::NonZeroUsize;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::model::ConsolidationTriplet;

pub use apply::apply;
pub use render::{render_clause, render_section};
pub use sentences::{paragraph_ranges, sentence_ranges};
pub use templates::{OpKind, Template, TemplateError, TemplateSpec, TemplateTable};

/// Part of an article an operation is confined to. Ordinals are 1-based;
/// `Sentence` counts sentences across the whole article.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    WholeArticle,
    Paragraph(NonZeroUsize),
    Sentence(NonZeroUsize),
    SentenceOfParagraph {
        paragraph: NonZeroUsize,
        sentence: NonZeroUsize,
    },
}

impl Scope {
    /// Narrows `self` by an enclosing scope: a sentence inside a paragraph
    /// becomes a sentence of that paragraph.
    pub fn within(self, outer: Scope) -> Scope {
        match (self, outer) {
            (Scope::WholeArticle, outer) => outer,
            (Scope::Sentence(sentence), Scope::Paragraph(paragraph)) => {
                Scope::SentenceOfParagraph {
                    paragraph,
                    sentence,
                }
            }
            (inner, _) => inner,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum AmendmentOp {
    ReplaceWords {
        old: String,
        new: String,
        scope: Scope,
    },
    DeleteWords {
        target: String,
        scope: Scope,
    },
    DeleteSentence {
        ordinal: NonZeroUsize,
        scope: Scope,
    },
    DeleteParagraph {
        ordinal: NonZeroUsize,
    },
    ReplaceParagraph {
        ordinal: NonZeroUsize,
        new_text: String,
    },
    ReplaceSentence {
        ordinal: NonZeroUsize,
        new_text: String,
        scope: Scope,
    },
    /// Adds text at the end of the scope: a new paragraph for the whole
    /// article, a trailing sentence for a paragraph, words before the final
    /// punctuation for a sentence.
    AppendText {
        new_text: String,
        scope: Scope,
    },
    InsertAfterWords {
        anchor: String,
        new_text: String,
        scope: Scope,
    },
    AbrogateArticle,
}

impl AmendmentOp {
    pub fn kind(&self) -> OpKind {
        match self {
            AmendmentOp::ReplaceWords { .. } => OpKind::ReplaceWords,
            AmendmentOp::DeleteWords { .. } => OpKind::DeleteWords,
            AmendmentOp::DeleteSentence { .. } => OpKind::DeleteSentence,
            AmendmentOp::DeleteParagraph { .. } => OpKind::DeleteParagraph,
            AmendmentOp::ReplaceParagraph { .. } => OpKind::ReplaceParagraph,
            AmendmentOp::ReplaceSentence { .. } => OpKind::ReplaceSentence,
            AmendmentOp::AppendText { .. } => OpKind::AppendText,
            AmendmentOp::InsertAfterWords { .. } => OpKind::InsertAfterWords,
            AmendmentOp::AbrogateArticle => OpKind::AbrogateArticle,
        }
    }

    /// Quoted material must be non-empty.
    pub fn validate(&self) -> Result<(), &'static str> {
        let quoted: &[&String] = match self {
            AmendmentOp::ReplaceWords { old, new, .. } => &[old, new],
            AmendmentOp::DeleteWords { target, .. } => &[target],
            AmendmentOp::ReplaceParagraph { new_text, .. }
            | AmendmentOp::ReplaceSentence { new_text, .. }
            | AmendmentOp::AppendText { new_text, .. } => &[new_text],
            AmendmentOp::InsertAfterWords {
                anchor, new_text, ..
            } => &[anchor, new_text],
            AmendmentOp::DeleteSentence { .. }
            | AmendmentOp::DeleteParagraph { .. }
            | AmendmentOp::AbrogateArticle => &[],
        };
        if quoted.iter().any(|s| s.trim().is_empty()) {
            return Err("quoted text must not be empty");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AmendmentError {
    #[error("no amendment template matches at byte {offset}: {snippet:?}")]
    UnrecognizedPattern { offset: usize, snippet: String },
    #[error("operation {op_index}: {anchor:?} not found in scope")]
    AnchorNotFound { op_index: usize, anchor: String },
    #[error("operation {op_index}: ordinal out of range")]
    OrdinalOutOfRange { op_index: usize },
    #[error("operation {op_index}: {reason}")]
    InvalidOp { op_index: usize, reason: String },
}

static DEFAULT_TABLE: LazyLock<TemplateTable> = LazyLock::new(TemplateTable::default);

/// Parses with the built-in template table.
pub fn parse_amendment(section_text: &str) -> Result<Vec<AmendmentOp>, AmendmentError> {
    DEFAULT_TABLE.parse(section_text)
}

/// Parses the triplet's instruction and applies it to its input.
pub fn consolidate(triplet: &ConsolidationTriplet) -> Result<String, AmendmentError> {
    DEFAULT_TABLE.consolidate(triplet)
}

impl TemplateTable {
    pub fn consolidate(&self, triplet: &ConsolidationTriplet) -> Result<String, AmendmentError> {
        let ops = self.parse(triplet.instruction())?;
        apply(triplet.input(), &ops)
    }
}
