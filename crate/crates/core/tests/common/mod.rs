//! Generators and reference implementations shared by the integration
//! tests. Everything here is written independently of the library code it
//! checks.

#![allow(dead_code)]

use std::collections::HashMap;
use std::num::NonZeroUsize;

use lexcons::engine::{AmendmentOp, Scope};
use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::Rng;

const STEMS: &[&str] = &[
    "board", "fee", "member", "notice", "office", "period", "register", "report", "session", "term",
];

fn nz(n: usize) -> NonZeroUsize {
    NonZeroUsize::new(n).expect("ordinals are 1-based")
}

/// An article held as paragraphs of sentences of words. Every word is
/// unique, so a quoted phrase always has exactly one occurrence.
#[derive(Debug, Clone)]
pub struct ToyArticle {
    pub paragraphs: Vec<Vec<Vec<String>>>,
    next_word: usize,
}

impl ToyArticle {
    pub fn random(rng: &mut StdRng) -> Self {
        let mut a = Self {
            paragraphs: Vec::new(),
            next_word: 0,
        };
        for _ in 0..rng.random_range(1..=3) {
            let p = (0..rng.random_range(1..=3))
                .map(|_| {
                    let n = rng.random_range(3..=7);
                    a.fresh(rng, n)
                })
                .collect();
            a.paragraphs.push(p);
        }
        a
    }

    fn fresh(&mut self, rng: &mut StdRng, n: usize) -> Vec<String> {
        (0..n)
            .map(|_| {
                self.next_word += 1;
                format!("{}{}", STEMS.choose(rng).expect("non-empty"), self.next_word)
            })
            .collect()
    }

    fn fresh_sentence(&mut self, rng: &mut StdRng) -> String {
        let n = rng.random_range(2..=5);
        format!("{}.", self.fresh(rng, n).join(" "))
    }

    pub fn render(&self) -> String {
        self.paragraphs
            .iter()
            .map(|p| {
                p.iter()
                    .map(|s| format!("{}.", s.join(" ")))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn sentence_count(&self) -> usize {
        self.paragraphs.iter().map(Vec::len).sum()
    }

    /// (paragraph, sentence) of the n-th sentence of the article, 0-based.
    fn locate(&self, n: usize) -> (usize, usize) {
        let mut n = n;
        for (p, para) in self.paragraphs.iter().enumerate() {
            if n < para.len() {
                return (p, n);
            }
            n -= para.len();
        }
        panic!("sentence index out of range")
    }

    fn global_index(&self, p: usize, s: usize) -> usize {
        self.paragraphs[..p].iter().map(Vec::len).sum::<usize>() + s
    }

    fn random_sentence(&self, rng: &mut StdRng) -> (usize, usize) {
        self.locate(rng.random_range(0..self.sentence_count()))
    }

    fn word_scope(rng: &mut StdRng, p: usize) -> Scope {
        if rng.random_bool(0.5) {
            Scope::WholeArticle
        } else {
            Scope::Paragraph(nz(p + 1))
        }
    }

    /// Picks an operation valid on the current article, applies it to the
    /// word model and returns it.
    pub fn random_op(&mut self, rng: &mut StdRng) -> AmendmentOp {
        loop {
            let kind = rng.random_range(0..9);
            if let Some(op) = self.try_op(rng, kind) {
                return op;
            }
        }
    }

    fn try_op(&mut self, rng: &mut StdRng, kind: usize) -> Option<AmendmentOp> {
        let sentences = self.sentence_count();
        match kind {
            0 => {
                let (p, s) = self.random_sentence(rng);
                let len = self.paragraphs[p][s].len();
                let i = rng.random_range(0..len);
                let j = rng.random_range(i + 1..=len.min(i + 3));
                let n = rng.random_range(1..=3);
                let new = self.fresh(rng, n);
                let old: Vec<String> = self.paragraphs[p][s].splice(i..j, new.clone()).collect();
                Some(AmendmentOp::ReplaceWords {
                    old: old.join(" "),
                    new: new.join(" "),
                    scope: Self::word_scope(rng, p),
                })
            }
            1 => {
                let (p, s) = self.random_sentence(rng);
                let len = self.paragraphs[p][s].len();
                if len < 2 {
                    return None;
                }
                let i = rng.random_range(0..len);
                let j = rng.random_range(i + 1..=len.min(i + 3));
                if j - i == len {
                    return None;
                }
                let target: Vec<String> = self.paragraphs[p][s].drain(i..j).collect();
                Some(AmendmentOp::DeleteWords {
                    target: target.join(" "),
                    scope: Self::word_scope(rng, p),
                })
            }
            2 => {
                let (p, s) = self.random_sentence(rng);
                let len = self.paragraphs[p][s].len();
                let i = rng.random_range(0..len);
                let j = rng.random_range(i + 1..=len.min(i + 2));
                let anchor = self.paragraphs[p][s][i..j].join(" ");
                let n = rng.random_range(1..=3);
                let new = self.fresh(rng, n);
                self.paragraphs[p][s].splice(j..j, new.clone());
                Some(AmendmentOp::InsertAfterWords {
                    anchor,
                    new_text: new.join(" "),
                    scope: Self::word_scope(rng, p),
                })
            }
            3 => {
                if sentences < 2 {
                    return None;
                }
                let (p, s) = self.random_sentence(rng);
                let op = if rng.random_bool(0.5) {
                    AmendmentOp::DeleteSentence {
                        ordinal: nz(self.global_index(p, s) + 1),
                        scope: Scope::WholeArticle,
                    }
                } else {
                    AmendmentOp::DeleteSentence {
                        ordinal: nz(s + 1),
                        scope: Scope::Paragraph(nz(p + 1)),
                    }
                };
                self.paragraphs[p].remove(s);
                if self.paragraphs[p].is_empty() {
                    self.paragraphs.remove(p);
                }
                Some(op)
            }
            4 => {
                let (p, s) = self.random_sentence(rng);
                let new_text = self.fresh_sentence(rng);
                let op = if rng.random_bool(0.5) {
                    AmendmentOp::ReplaceSentence {
                        ordinal: nz(self.global_index(p, s) + 1),
                        new_text: new_text.clone(),
                        scope: Scope::WholeArticle,
                    }
                } else {
                    AmendmentOp::ReplaceSentence {
                        ordinal: nz(s + 1),
                        new_text: new_text.clone(),
                        scope: Scope::Paragraph(nz(p + 1)),
                    }
                };
                self.paragraphs[p][s] = words_of(&new_text);
                Some(op)
            }
            5 => {
                if self.paragraphs.len() < 2 {
                    return None;
                }
                let p = rng.random_range(0..self.paragraphs.len());
                self.paragraphs.remove(p);
                Some(AmendmentOp::DeleteParagraph { ordinal: nz(p + 1) })
            }
            6 => {
                let p = rng.random_range(0..self.paragraphs.len());
                let new: Vec<String> = (0..rng.random_range(1..=2))
                    .map(|_| self.fresh_sentence(rng))
                    .collect();
                self.paragraphs[p] = new.iter().map(|s| words_of(s)).collect();
                Some(AmendmentOp::ReplaceParagraph {
                    ordinal: nz(p + 1),
                    new_text: new.join(" "),
                })
            }
            7 => {
                let new_text = self.fresh_sentence(rng);
                if rng.random_bool(0.5) {
                    self.paragraphs.push(vec![words_of(&new_text)]);
                    Some(AmendmentOp::AppendText {
                        new_text,
                        scope: Scope::WholeArticle,
                    })
                } else {
                    let p = rng.random_range(0..self.paragraphs.len());
                    self.paragraphs[p].push(words_of(&new_text));
                    Some(AmendmentOp::AppendText {
                        new_text,
                        scope: Scope::Paragraph(nz(p + 1)),
                    })
                }
            }
            _ => {
                let (p, s) = self.random_sentence(rng);
                let n = rng.random_range(1..=3);
                let new = self.fresh(rng, n);
                let scope = Scope::Sentence(nz(self.global_index(p, s) + 1));
                self.paragraphs[p][s].extend(new.iter().cloned());
                Some(AmendmentOp::AppendText {
                    new_text: new.join(" "),
                    scope,
                })
            }
        }
    }
}

fn words_of(sentence: &str) -> Vec<String> {
    sentence
        .trim_end_matches('.')
        .split(' ')
        .map(str::to_owned)
        .collect()
}

/// Word-level Levenshtein distance by plain recursion over suffixes,
/// memoized on the pair of positions.
pub fn brute_edit_distance(a: &[&str], b: &[&str]) -> usize {
    fn go(a: &[&str], b: &[&str], i: usize, j: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if i == a.len() {
            return b.len() - j;
        }
        if j == b.len() {
            return a.len() - i;
        }
        if let Some(&d) = memo.get(&(i, j)) {
            return d;
        }
        let d = if a[i] == b[j] {
            go(a, b, i + 1, j + 1, memo)
        } else {
            1 + go(a, b, i + 1, j, memo)
                .min(go(a, b, i, j + 1, memo))
                .min(go(a, b, i + 1, j + 1, memo))
        };
        memo.insert((i, j), d);
        d
    }
    go(a, b, 0, 0, &mut HashMap::new())
}

const ROMAN: &[&str] = &["I", "II", "III", "IV", "V", "VI"];

/// A random amending article with up to three levels of enumeration, and
/// its number of leaves.
pub fn random_hierarchy(rng: &mut StdRng) -> (String, usize) {
    fn sentence(rng: &mut StdRng) -> String {
        let n = rng.random_range(2..=6);
        (0..n)
            .map(|_| *STEMS.choose(rng).expect("non-empty"))
            .collect::<Vec<_>>()
            .join(" ")
    }
    fn marker(rank: usize, k: usize) -> String {
        match rank {
            0 => format!("{}. –", ROMAN[k]),
            1 => format!("{}°", k + 1),
            _ => format!("{})", (b'a' + k as u8) as char),
        }
    }
    /// Appends the enumerated children of a node, if it gets any, and
    /// returns their leaf count.
    fn children(rng: &mut StdRng, rank: usize, out: &mut String) -> Option<usize> {
        let child_rank = (rank..3).find(|_| rng.random_bool(0.5))?;
        out.push(':');
        let mut leaves = 0;
        for k in 0..rng.random_range(1..=3) {
            out.push('\n');
            out.push_str(&marker(child_rank, k));
            out.push(' ');
            out.push_str(&sentence(rng));
            leaves += children(rng, child_rank + 1, out).unwrap_or_else(|| {
                out.push(';');
                1
            });
        }
        Some(leaves)
    }
    let mut text = format!("Article {} is amended as follows", rng.random_range(1..200));
    let leaves = children(rng, 0, &mut text).unwrap_or_else(|| {
        text.push('.');
        1
    });
    (text, leaves)
}

/// A synthetic law corpus and a bill amending it: article `k` of the bill
/// amends article `k` of the code with one to three operations.
pub fn synthetic_bill(rng: &mut StdRng, articles: usize) -> (String, String) {
    let mut corpus = String::new();
    let mut bill_articles = Vec::new();
    for k in 1..=articles {
        let mut toy = ToyArticle::random(rng);
        let original = toy.render();
        corpus.push_str(
            &serde_json::json!({
                "act": "Synthetic Code",
                "article_id": k.to_string(),
                "paragraphs": original.split('\n').collect::<Vec<_>>(),
            })
            .to_string(),
        );
        corpus.push('\n');
        let ops: Vec<AmendmentOp> = (0..rng.random_range(1..=3)).map(|_| toy.random_op(rng)).collect();
        let mut text = format!("Article {k} of the Synthetic Code is amended as follows:");
        for (i, op) in ops.iter().enumerate() {
            let end = if i + 1 == ops.len() { "." } else { ";" };
            text.push_str(&format!("\n{}° {}{end}", i + 1, lexcons::engine::render_clause(op)));
        }
        bill_articles.push(serde_json::json!({ "number": k.to_string(), "text": text }));
    }
    let bill = serde_json::json!({
        "id": "synthetic",
        "title": "Synthetic bill",
        "articles": bill_articles,
    });
    (bill.to_string(), corpus)
}
