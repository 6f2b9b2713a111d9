use std::ops::Range;

use super::sentences::{all_sentences, paragraph_ranges, sentence_ranges};
use super::{AmendmentError, AmendmentOp, Scope};
use crate::text::word_occurrences;

/// Applies `ops` in order to `article_text`.
///
/// Deletions leave no doubled spaces at the seam and no empty paragraph
/// behind. The first failing operation aborts the application.
pub fn apply(article_text: &str, ops: &[AmendmentOp]) -> Result<String, AmendmentError> {
    let mut text = article_text.to_owned();
    for (op_index, op) in ops.iter().enumerate() {
        op.validate().map_err(|reason| AmendmentError::InvalidOp {
            op_index,
            reason: reason.into(),
        })?;
        text = apply_one(&text, op, op_index)?;
    }
    Ok(text)
}

fn apply_one(text: &str, op: &AmendmentOp, op_index: usize) -> Result<String, AmendmentError> {
    let out_of_range = || AmendmentError::OrdinalOutOfRange { op_index };
    let mut s = text.to_owned();
    match op {
        AmendmentOp::ReplaceWords { old, new, scope } => {
            let region = resolve_scope(&s, *scope).ok_or_else(out_of_range)?;
            for start in occurrences(&s, &region, old, op_index)?.into_iter().rev() {
                s.replace_range(start..start + old.len(), new);
            }
        }
        AmendmentOp::DeleteWords { target, scope } => {
            let region = resolve_scope(&s, *scope).ok_or_else(out_of_range)?;
            for start in occurrences(&s, &region, target, op_index)?.into_iter().rev() {
                s.replace_range(start..start + target.len(), "");
                tidy_seam(&mut s, start);
            }
            s = drop_blank_paragraphs(&s, text);
        }
        AmendmentOp::InsertAfterWords {
            anchor,
            new_text,
            scope,
        } => {
            let region = resolve_scope(&s, *scope).ok_or_else(out_of_range)?;
            for start in occurrences(&s, &region, anchor, op_index)?.into_iter().rev() {
                let at = start + anchor.len();
                let insertion = joined(new_text);
                s.insert_str(at, &insertion);
                tidy_seam(&mut s, at + insertion.len());
            }
        }
        AmendmentOp::DeleteSentence { ordinal, scope } => {
            let region = resolve_scope(&s, *scope).ok_or_else(out_of_range)?;
            let sentence = nth_sentence_in(&s, &region, ordinal.get()).ok_or_else(out_of_range)?;
            s.replace_range(sentence.clone(), "");
            tidy_seam(&mut s, sentence.start);
            s = drop_blank_paragraphs(&s, text);
        }
        AmendmentOp::ReplaceSentence {
            ordinal,
            new_text,
            scope,
        } => {
            let region = resolve_scope(&s, *scope).ok_or_else(out_of_range)?;
            let sentence = nth_sentence_in(&s, &region, ordinal.get()).ok_or_else(out_of_range)?;
            s.replace_range(sentence, new_text);
        }
        AmendmentOp::DeleteParagraph { ordinal } => {
            let mut paragraphs = split_paragraphs(&s);
            if ordinal.get() > paragraphs.len() {
                return Err(out_of_range());
            }
            paragraphs.remove(ordinal.get() - 1);
            s = paragraphs.join("\n");
        }
        AmendmentOp::ReplaceParagraph { ordinal, new_text } => {
            let mut paragraphs = split_paragraphs(&s);
            let slot = paragraphs
                .get_mut(ordinal.get() - 1)
                .ok_or_else(out_of_range)?;
            *slot = new_text.as_str();
            s = paragraphs.join("\n");
        }
        AmendmentOp::AppendText { new_text, scope } => match scope {
            Scope::WholeArticle => {
                if !s.is_empty() {
                    s.push('\n');
                }
                s.push_str(new_text);
            }
            Scope::Paragraph(_) => {
                let region = resolve_scope(&s, *scope).ok_or_else(out_of_range)?;
                let at = region.start + s[region].trim_end().len();
                s.insert_str(at, &joined(new_text));
            }
            Scope::Sentence(_) | Scope::SentenceOfParagraph { .. } => {
                let region = resolve_scope(&s, *scope).ok_or_else(out_of_range)?;
                let body = s[region.clone()].trim_end_matches(['.', '!', '?', '»', ')', ' ']);
                let at = region.start + body.len();
                s.insert_str(at, &joined(new_text));
            }
        },
        AmendmentOp::AbrogateArticle => s.clear(),
    }
    Ok(s)
}

fn occurrences(
    s: &str,
    region: &Range<usize>,
    needle: &str,
    op_index: usize,
) -> Result<Vec<usize>, AmendmentError> {
    let found: Vec<usize> = word_occurrences(&s[region.clone()], needle)
        .into_iter()
        .map(|o| region.start + o)
        .collect();
    if found.is_empty() {
        return Err(AmendmentError::AnchorNotFound {
            op_index,
            anchor: needle.to_owned(),
        });
    }
    Ok(found)
}

/// Text to insert after existing words: a separating space unless the new
/// text starts with punctuation that attaches to the left.
fn joined(new_text: &str) -> String {
    if new_text.starts_with([',', '.', ';', ':', ')']) {
        new_text.to_owned()
    } else {
        format!(" {new_text}")
    }
}

fn split_paragraphs(s: &str) -> Vec<&str> {
    paragraph_ranges(s).into_iter().map(|r| &s[r]).collect()
}

fn resolve_scope(s: &str, scope: Scope) -> Option<Range<usize>> {
    match scope {
        Scope::WholeArticle => Some(0..s.len()),
        Scope::Paragraph(p) => paragraph_ranges(s).get(p.get() - 1).cloned(),
        Scope::Sentence(n) => all_sentences(s).get(n.get() - 1).cloned(),
        Scope::SentenceOfParagraph {
            paragraph,
            sentence,
        } => {
            let para = paragraph_ranges(s).get(paragraph.get() - 1).cloned()?;
            sentence_ranges(s, para).get(sentence.get() - 1).cloned()
        }
    }
}

fn nth_sentence_in(s: &str, region: &Range<usize>, n: usize) -> Option<Range<usize>> {
    all_sentences(s)
        .into_iter()
        .filter(|r| r.start >= region.start && r.end <= region.end)
        .nth(n - 1)
}

/// Normalizes the run of spaces around an edit point: removed at paragraph
/// edges and before `,` or `.`, otherwise collapsed to a single space.
fn tidy_seam(s: &mut String, at: usize) {
    let bytes = s.as_bytes();
    let mut start = at.min(bytes.len());
    while start > 0 && bytes[start - 1] == b' ' {
        start -= 1;
    }
    let mut end = at.min(bytes.len());
    while end < bytes.len() && bytes[end] == b' ' {
        end += 1;
    }
    let at_para_start = start == 0 || bytes[start - 1] == b'\n';
    let at_para_end = end == bytes.len() || bytes[end] == b'\n';
    let before_punct = end < bytes.len() && matches!(bytes[end], b',' | b'.');
    let replacement = if at_para_start || at_para_end || before_punct {
        ""
    } else if end > start {
        " "
    } else {
        return;
    };
    s.replace_range(start..end, replacement);
}

/// Removes paragraphs that became blank, keeping any that were already blank
/// in `before`.
fn drop_blank_paragraphs(s: &str, before: &str) -> String {
    let old = split_paragraphs(before);
    let new = split_paragraphs(s);
    if old.len() != new.len() {
        return new
            .into_iter()
            .filter(|p| !p.trim().is_empty())
            .collect::<Vec<_>>()
            .join("\n");
    }
    new.iter()
        .zip(&old)
        .filter(|(n, o)| !n.trim().is_empty() || o.trim().is_empty())
        .map(|(n, _)| *n)
        .collect::<Vec<_>>()
        .join("\n")
}
