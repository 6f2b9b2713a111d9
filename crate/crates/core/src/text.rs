//! Small text helpers shared by the parsers.

use std::ops::Range;

pub const OPEN_QUOTE: char = '«';
pub const CLOSE_QUOTE: char = '»';

/// Byte ranges of guillemet-quoted spans, quotes included. An unclosed quote
/// runs to the end of the text.
pub fn quoted_ranges(text: &str) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut open: Option<usize> = None;
    for (i, c) in text.char_indices() {
        match c {
            OPEN_QUOTE if open.is_none() => open = Some(i),
            CLOSE_QUOTE => {
                if let Some(start) = open.take() {
                    out.push(start..i + c.len_utf8());
                }
            }
            _ => {}
        }
    }
    if let Some(start) = open {
        out.push(start..text.len());
    }
    out
}

/// Rewrites straight or curly double quotes as guillemets when the text has
/// no guillemets of its own.
pub fn guillemets_fallback(text: &str) -> String {
    if text.contains(OPEN_QUOTE) {
        return text.to_owned();
    }
    let mut out = String::with_capacity(text.len() + 8);
    let mut opening = true;
    for c in text.chars() {
        match c {
            '"' => {
                out.push(if opening { OPEN_QUOTE } else { CLOSE_QUOTE });
                opening = !opening;
            }
            '“' => out.push(OPEN_QUOTE),
            '”' => out.push(CLOSE_QUOTE),
            _ => out.push(c),
        }
    }
    out
}

/// Start offsets of `needle` in `haystack` that do not cut through a word:
/// an alphanumeric edge of the needle must not touch an alphanumeric
/// neighbour.
pub fn word_occurrences(haystack: &str, needle: &str) -> Vec<usize> {
    if needle.is_empty() {
        return Vec::new();
    }
    let starts_alnum = needle.chars().next().is_some_and(char::is_alphanumeric);
    let ends_alnum = needle.chars().next_back().is_some_and(char::is_alphanumeric);
    let mut out = Vec::new();
    let mut from = 0;
    while let Some(pos) = haystack[from..].find(needle) {
        let start = from + pos;
        let end = start + needle.len();
        let before_ok =
            !starts_alnum || !haystack[..start].chars().next_back().is_some_and(char::is_alphanumeric);
        let after_ok = !ends_alnum || !haystack[end..].chars().next().is_some_and(char::is_alphanumeric);
        if before_ok && after_ok {
            out.push(start);
            from = end;
        } else {
            from = start + haystack[start..].chars().next().map_or(1, char::len_utf8);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotes() {
        let t = "a « b » c « d";
        let r = quoted_ranges(t);
        assert_eq!(&t[r[0].clone()], "« b »");
        assert_eq!(&t[r[1].clone()], "« d");
    }

    #[test]
    fn fallback() {
        assert_eq!(guillemets_fallback(r#"the words "a" and "b""#), "the words «a» and «b»");
        assert_eq!(guillemets_fallback("« a » \"b\""), "« a » \"b\"");
    }

    #[test]
    fn occurrences_respect_word_edges() {
        assert_eq!(word_occurrences("an and an", "an"), [0, 7]);
        assert_eq!(word_occurrences("x, y", ", "), [1]);
        assert!(word_occurrences("band", "and").is_empty());
    }
}
