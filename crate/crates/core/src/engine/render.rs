//! Canonical English drafting for amendment operations. Every rendering is
//! accepted by the default template table and parses back to the same op.

use super::ordinal::english;
use super::{AmendmentOp, Scope};

fn prefix(scope: Scope) -> String {
    match scope {
        Scope::WholeArticle => String::new(),
        Scope::Paragraph(p) => format!("In the {} paragraph, ", english(p)),
        Scope::Sentence(s) => format!("In the {} sentence, ", english(s)),
        Scope::SentenceOfParagraph {
            paragraph,
            sentence,
        } => format!(
            "In the {} sentence of the {} paragraph, ",
            english(sentence),
            english(paragraph)
        ),
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// One clause, capitalized, without terminal punctuation.
pub fn render_clause(op: &AmendmentOp) -> String {
    let (scope, body) = match op {
        AmendmentOp::ReplaceWords { old, new, scope } => (
            *scope,
            format!("the words « {old} » are replaced by the words « {new} »"),
        ),
        AmendmentOp::DeleteWords { target, scope } => {
            (*scope, format!("the words « {target} » are deleted"))
        }
        AmendmentOp::InsertAfterWords {
            anchor,
            new_text,
            scope,
        } => (
            *scope,
            format!("after the words « {anchor} », the words « {new_text} » are inserted"),
        ),
        AmendmentOp::DeleteSentence { ordinal, scope } => match scope {
            Scope::Paragraph(p) => (
                Scope::WholeArticle,
                format!(
                    "the {} sentence of the {} paragraph is deleted",
                    english(*ordinal),
                    english(*p)
                ),
            ),
            other => (
                *other,
                format!("the {} sentence is deleted", english(*ordinal)),
            ),
        },
        AmendmentOp::ReplaceSentence {
            ordinal,
            new_text,
            scope,
        } => match scope {
            Scope::Paragraph(p) => (
                Scope::WholeArticle,
                format!(
                    "the {} sentence of the {} paragraph is replaced by the following sentence: « {new_text} »",
                    english(*ordinal),
                    english(*p)
                ),
            ),
            other => (
                *other,
                format!(
                    "the {} sentence is replaced by the following sentence: « {new_text} »",
                    english(*ordinal)
                ),
            ),
        },
        AmendmentOp::DeleteParagraph { ordinal } => (
            Scope::WholeArticle,
            format!("the {} paragraph is deleted", english(*ordinal)),
        ),
        AmendmentOp::ReplaceParagraph { ordinal, new_text } => (
            Scope::WholeArticle,
            format!(
                "the {} paragraph is replaced by the following provisions: « {new_text} »",
                english(*ordinal)
            ),
        ),
        AmendmentOp::AppendText { new_text, scope } => (
            Scope::WholeArticle,
            match scope {
                Scope::WholeArticle => format!(
                    "the article is supplemented by a paragraph worded as follows: « {new_text} »"
                ),
                Scope::Paragraph(p) => format!(
                    "the {} paragraph is supplemented by a sentence worded as follows: « {new_text} »",
                    english(*p)
                ),
                Scope::Sentence(s) => format!(
                    "the {} sentence is supplemented by the words « {new_text} »",
                    english(*s)
                ),
                Scope::SentenceOfParagraph {
                    paragraph,
                    sentence,
                } => format!(
                    "the {} sentence of the {} paragraph is supplemented by the words « {new_text} »",
                    english(*sentence),
                    english(*paragraph)
                ),
            },
        ),
        AmendmentOp::AbrogateArticle => (Scope::WholeArticle, "the article is repealed".to_owned()),
    };
    capitalize(&format!("{}{body}", prefix(scope)))
}

/// A full modification section. A single op renders as one sentence,
/// several as an enumerated list under "Article `label` is amended as
/// follows:".
pub fn render_section(label: &str, ops: &[AmendmentOp]) -> String {
    match ops {
        [] => String::new(),
        [op] => format!("{}.", render_clause(op)),
        _ => {
            let mut out = format!("Article {label} is amended as follows:");
            for (i, op) in ops.iter().enumerate() {
                let end = if i + 1 == ops.len() { "." } else { ";" };
                out.push_str(&format!("\n{}° {}{end}", i + 1, render_clause(op)));
            }
            out
        }
    }
}
