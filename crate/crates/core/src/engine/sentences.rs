//! Paragraph and sentence segmentation over canonical article text.
//!
//! A sentence ends at `.`, `!` or `?` followed by whitespace or the end of
//! the paragraph, optionally after a closing `»` or `)`. A period closing a
//! word on the abbreviation list, or a single capital initial ("L."), never
//! ends a sentence, nor does anything inside guillemets.

use std::ops::Range;

use crate::text::quoted_ranges;

const ABBREVIATIONS: &[&str] = &["art.", "cf.", "etc.", "m.", "mme", "mme.", "mm.", "no.", "n°.", "al.", "p."];

/// Byte ranges of the paragraphs of `text`, separators excluded. Empty text
/// has no paragraphs.
pub fn paragraph_ranges(text: &str) -> Vec<Range<usize>> {
    if text.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in text.char_indices() {
        if c == '\n' {
            out.push(start..i);
            start = i + 1;
        }
    }
    out.push(start..text.len());
    out
}

/// Byte ranges of the sentences inside `range` of `text`, which must not
/// span a paragraph separator. Inter-sentence whitespace is excluded.
pub fn sentence_ranges(text: &str, range: Range<usize>) -> Vec<Range<usize>> {
    let para = &text[range.clone()];
    let quotes = quoted_ranges(para);
    let chars: Vec<(usize, char)> = para.char_indices().collect();
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if start.is_none() {
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            start = Some(pos);
        }
        if matches!(c, '.' | '!' | '?') && !quotes.iter().any(|q| q.contains(&pos)) {
            // Swallow closing quotes/parentheses, possibly after spaces.
            let mut j = i + 1;
            let mut end = pos + c.len_utf8();
            loop {
                let mut k = j;
                while k < chars.len() && chars[k].1 == ' ' {
                    k += 1;
                }
                if k < chars.len() && matches!(chars[k].1, '»' | ')') {
                    end = chars[k].0 + chars[k].1.len_utf8();
                    j = k + 1;
                } else {
                    break;
                }
            }
            let at_boundary = j >= chars.len() || chars[j].1.is_whitespace();
            if at_boundary && !(c == '.' && is_abbreviation(para, start.unwrap(), pos)) {
                out.push(range.start + start.unwrap()..range.start + end);
                start = None;
                i = j;
                continue;
            }
        }
        i += 1;
    }
    if let Some(s) = start {
        let tail = para[s..].trim_end();
        if !tail.is_empty() {
            out.push(range.start + s..range.start + s + tail.len());
        }
    }
    out
}

fn is_abbreviation(para: &str, sentence_start: usize, dot: usize) -> bool {
    let word_start = para[..dot]
        .rfind(char::is_whitespace)
        .map_or(0, |i| i + para[i..].chars().next().map_or(1, char::len_utf8))
        .max(sentence_start);
    let word = &para[word_start..dot];
    let with_dot = format!("{}.", word.to_lowercase());
    if ABBREVIATIONS.contains(&with_dot.as_str()) {
        return true;
    }
    let mut letters = word.chars();
    matches!((letters.next(), letters.next()), (Some(c), None) if c.is_uppercase())
}

/// All sentences of the article, in order, across paragraphs.
pub(crate) fn all_sentences(text: &str) -> Vec<Range<usize>> {
    paragraph_ranges(text)
        .into_iter()
        .flat_map(|p| sentence_ranges(text, p))
        .collect()
}
