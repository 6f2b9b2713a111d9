//! Rule-based citation extraction and corpus lookup.
//!
//! Recognized forms, in English and French drafting:
//!
//! * `Article 10`, `Articles 3 and 4`, `l'article 1er`
//! * `Article L. 123-4 of the Commercial Code`, `l'article L. 123-4 du code de commerce`
//! * `Article 1 of the above-mentioned Order of 4 May 2007`
//! * `Article 8 of this Decree`, `Article 2 of the same code`
//!
//! A bare article number takes the act most recently named in the text, so
//! "The General Tax Code is amended as follows: 1° Article 10 ..." targets
//! Article 10 of the General Tax Code. Citations inside guillemets are new
//! wording, not targets, and are skipped.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader};
use std::ops::Range;
use std::path::Path;
use std::sync::LazyLock;

use chrono::NaiveDate;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::model::{LawArticle, LegalReference, ModelError};
use crate::text::quoted_ranges;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read corpus: {0}")]
    Io(#[from] std::io::Error),
    #[error("corpus line {line_no}: {message}")]
    Parse { line_no: usize, message: String },
    #[error("duplicate corpus entry for {act:?} article {article_id}")]
    DuplicateKey { act: String, article_id: String },
    #[error("alias {alias:?} points to unknown act {target:?}")]
    UnknownAliasTarget { alias: String, target: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResolveError {
    #[error("{0} is not in the corpus")]
    NotFound(String),
    #[error("{reference} matches {candidates} corpus articles; name the act")]
    Ambiguous { reference: String, candidates: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("gold reference list is empty")]
pub struct EmptyGold;

/// Case-folded, whitespace-collapsed key with leading articles removed.
pub fn normalize_act(act: &str) -> String {
    let collapsed = collapse(&act.to_lowercase());
    let mut s = collapsed.as_str();
    for prefix in ["the ", "le ", "la ", "les ", "l'", "l’"] {
        if let Some(rest) = s.strip_prefix(prefix) {
            s = rest;
            break;
        }
    }
    s.to_owned()
}

/// Normalizes an article number: case-folded, `L. 123` == `L.123`,
/// `1er` == `premier` == `1`.
pub fn normalize_article_id(id: &str) -> String {
    let lowered = collapse(&id.to_lowercase());
    if lowered == "1er" || lowered == "premier" {
        return "1".into();
    }
    lowered.replace(". ", ".").replace('‑', "-")
}

fn collapse(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Maps anaphoric act mentions to canonical act names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AliasTable {
    aliases: HashMap<String, String>,
}

impl AliasTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, alias: &str, canonical: impl Into<String>) {
        self.aliases.insert(normalize_act(alias), canonical.into());
    }

    pub fn get(&self, mention: &str) -> Option<&str> {
        self.aliases.get(&normalize_act(mention)).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.aliases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aliases.is_empty()
    }
}

impl<S: AsRef<str>, T: Into<String>> FromIterator<(S, T)> for AliasTable {
    fn from_iter<I: IntoIterator<Item = (S, T)>>(iter: I) -> Self {
        let mut table = AliasTable::new();
        for (alias, canonical) in iter {
            table.insert(alias.as_ref(), canonical);
        }
        table
    }
}

/// One line of the corpus file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub act: Option<String>,
    pub article_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<NaiveDate>,
    pub paragraphs: Vec<String>,
}

/// Read-only store of law articles keyed by normalized (act, article id).
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    articles: HashMap<(String, String), LawArticle>,
    acts: HashMap<String, String>,
    aliases: AliasTable,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, entry: CorpusEntry) -> Result<(), CorpusError> {
        let reference = LegalReference::new(
            entry.article_id.clone(),
            entry.act.clone(),
            entry.date,
            0..0,
        )?;
        let article = LawArticle::new(reference, entry.paragraphs)?;
        let act = entry.act.unwrap_or_default();
        let key = (normalize_act(&act), normalize_article_id(&entry.article_id));
        if self.articles.contains_key(&key) {
            return Err(CorpusError::DuplicateKey {
                act,
                article_id: entry.article_id,
            });
        }
        if !act.is_empty() {
            self.acts.insert(normalize_act(&act), act);
        }
        self.articles.insert(key, article);
        Ok(())
    }

    /// Registers an anaphora for an act already present in the store.
    pub fn add_alias(&mut self, alias: &str, canonical: &str) -> Result<(), CorpusError> {
        let Some(act) = self.acts.get(&normalize_act(canonical)) else {
            return Err(CorpusError::UnknownAliasTarget {
                alias: alias.into(),
                target: canonical.into(),
            });
        };
        self.aliases.insert(alias, act.clone());
        Ok(())
    }

    pub fn load_jsonl(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let reader = BufReader::new(fs::File::open(path)?);
        let mut corpus = Corpus::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: CorpusEntry =
                serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
                    line_no: i + 1,
                    message: e.to_string(),
                })?;
            corpus.insert(entry).map_err(|e| match e {
                CorpusError::Model(m) => CorpusError::Parse {
                    line_no: i + 1,
                    message: m.to_string(),
                },
                other => other,
            })?;
        }
        Ok(corpus)
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    /// Explicit aliases plus the implicit "above-mentioned <act>" forms of
    /// every act in the store.
    pub fn alias_table(&self) -> AliasTable {
        let mut table = self.aliases.clone();
        for act in self.acts.values() {
            for prefix in ["above-mentioned", "aforementioned", "aforesaid"] {
                table.insert(&format!("{prefix} {act}"), act.clone());
            }
            for suffix in ["susmentionné", "susmentionnée", "précité", "précitée"] {
                table.insert(&format!("{act} {suffix}"), act.clone());
            }
        }
        table
    }

    /// Looks up the article a reference points to.
    ///
    /// Without an act, the article number must be unique across the corpus.
    pub fn resolve(&self, reference: &LegalReference) -> Result<&LawArticle, ResolveError> {
        let article_key = normalize_article_id(reference.article_id());
        match reference.act() {
            Some(act) => {
                let act = self.aliases.get(act).unwrap_or(act);
                self.articles
                    .get(&(normalize_act(act), article_key))
                    .ok_or_else(|| ResolveError::NotFound(reference.to_string()))
            }
            None => {
                let mut found = self
                    .articles
                    .iter()
                    .filter(|((_, id), _)| *id == article_key)
                    .map(|(_, article)| article);
                match (found.next(), found.count()) {
                    (None, _) => Err(ResolveError::NotFound(reference.to_string())),
                    (Some(article), 0) => Ok(article),
                    (Some(_), rest) => Err(ResolveError::Ambiguous {
                        reference: reference.to_string(),
                        candidates: rest + 1,
                    }),
                }
            }
        }
    }
}

pub fn resolve<'c>(
    reference: &LegalReference,
    corpus: &'c Corpus,
) -> Result<&'c LawArticle, ResolveError> {
    corpus.resolve(reference)
}

const MONTHS: &str = "january|february|march|april|may|june|july|august|september|october|november|december|\
    janvier|février|fevrier|mars|avril|mai|juin|juillet|août|aout|septembre|octobre|novembre|décembre|decembre";

const ARTICLE_ID: &str = r"(?:premier|1er\b|[LRDA]\.?\s?\*?\s?\d+(?:[-‑]\d+)*|\d+(?:[-‑]\d+)*)(?:\s(?:bis|ter|quater|quinquies|sexies|septies|octies|nonies|decies)\b)?";

fn act_pattern() -> String {
    let date = format!(r"\d{{1,2}}(?:er|st|nd|rd|th)?\s+(?:{MONTHS})\s+\d{{4}}");
    let dated = format!(
        r"(?:(?:above-mentioned|aforementioned|aforesaid|said)\s+)?(?:order|decree|law|act|ordinance|regulation|arrêté|décret|loi|ordonnance)(?:\s+(?:no\.?|n°)\s*[\d-]+)?\s+(?:of|du)\s+{date}(?:\s+(?:susmentionnée?|précitée?))?"
    );
    let english_code = r"(?:(?:above-mentioned|aforementioned|said)\s+)?(?-i:(?:[A-Z][\w-]*\s+){1,5}Code)\b";
    let french_code = r"code(?:\s+(?:général|monétaire|civil|pénal|rural|minier|forestier|électoral))?(?:\s+et\s+financier)?(?:\s+(?:de\s+la|de\s+l['’]|des|du|de)\s*[\p{Ll}]+(?:\s+(?:sociale|territoriales|publique|maritime|intérieure|et\s+de\s+la\s+pêche\s+maritime))?)?";
    let deictic = r"(?:this|that|the\s+same|said)\s+(?:decree|order|law|act|code|ordinance)|(?:même|dudit|ledit)\s+code|présente?\s+(?:loi|décret|arrêté|code)";
    format!("{dated}|{deictic}|{french_code}|{english_code}")
}

static REFERENCE: LazyLock<Regex> = LazyLock::new(|| {
    let act = act_pattern();
    Regex::new(&format!(
        r"(?i)\b(?:l['’])?articles?\s+(?P<ids>{ARTICLE_ID}(?:(?:\s*,\s*|\s+(?:and|et)\s+){ARTICLE_ID})*)(?:\s*,?\s+(?:of|of\s+the|du|de\s+la|de\s+l['’]|de|des)\s+(?P<act>{act}))?"
    ))
    .expect("reference pattern")
});

static STANDALONE_ACT: LazyLock<Regex> = LazyLock::new(|| {
    let act = act_pattern();
    Regex::new(&format!(r"(?:^|\b)(?P<act>(?i:{}))", act)).expect("act pattern")
});

static ARTICLE_ID_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"(?i)\b{ARTICLE_ID}")).expect("id pattern"));

static DATE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"(?i)(?P<day>\d{{1,2}})(?:er|st|nd|rd|th)?\s+(?P<month>{MONTHS})\s+(?P<year>\d{{4}})"
    ))
    .expect("date pattern")
});

fn month_number(name: &str) -> Option<u32> {
    let n = match name.to_lowercase().as_str() {
        "january" | "janvier" => 1,
        "february" | "février" | "fevrier" => 2,
        "march" | "mars" => 3,
        "april" | "avril" => 4,
        "may" | "mai" => 5,
        "june" | "juin" => 6,
        "july" | "juillet" => 7,
        "august" | "août" | "aout" => 8,
        "september" | "septembre" => 9,
        "october" | "octobre" => 10,
        "november" | "novembre" => 11,
        "december" | "décembre" | "decembre" => 12,
        _ => return None,
    };
    Some(n)
}

/// Parses the first date such as "4 May 2007" or "1er janvier 2020".
pub fn parse_date(text: &str) -> Option<NaiveDate> {
    let caps = DATE.captures(text)?;
    let day = caps["day"].parse().ok()?;
    let month = month_number(&caps["month"])?;
    let year = caps["year"].parse().ok()?;
    NaiveDate::from_ymd_opt(year, month, day)
}

fn is_anaphora(act: &str) -> bool {
    let lowered = act.to_lowercase();
    let first = lowered.split_whitespace().next();
    ["same", "said", "même", "dudit", "ledit"]
        .iter()
        .any(|w| first == Some(w))
}

fn clean_act(act: &str) -> String {
    let act = collapse(act);
    let act = act.trim_end_matches([',', ';', ':', '.']);
    match act.get(..4) {
        Some(head) if head.eq_ignore_ascii_case("the ") => act[4..].to_owned(),
        _ => act.to_owned(),
    }
}

/// Finds the law articles cited in a modification section, in order.
pub fn extract_references(section_text: &str, aliases: &AliasTable) -> Vec<LegalReference> {
    enum Event {
        Citation { ids: Range<usize>, act: Option<String> },
        Mention(String),
    }

    let quoted = quoted_ranges(section_text);
    let in_quote = |pos: usize| quoted.iter().any(|r| r.contains(&pos));

    let mut events: Vec<(usize, Event)> = Vec::new();
    let mut covered: Vec<Range<usize>> = Vec::new();
    for caps in REFERENCE.captures_iter(section_text) {
        let whole = caps.get(0).expect("match");
        if in_quote(whole.start()) {
            continue;
        }
        covered.push(whole.range());
        let ids = caps.name("ids").expect("ids group").range();
        let act = caps.name("act").map(|m| clean_act(m.as_str()));
        events.push((whole.start(), Event::Citation { ids, act }));
    }
    for caps in STANDALONE_ACT.captures_iter(section_text) {
        let m = caps.name("act").expect("act group");
        if in_quote(m.start()) || covered.iter().any(|r| r.contains(&m.start())) {
            continue;
        }
        events.push((m.start(), Event::Mention(clean_act(m.as_str()))));
    }
    events.sort_by_key(|(pos, _)| *pos);

    let mut refs = Vec::new();
    let mut last_act: Option<String> = None;
    for (_, event) in events {
        match event {
            Event::Mention(raw) => {
                last_act = Some(resolve_mention(&raw, aliases, last_act.as_deref()));
            }
            Event::Citation { ids, act } => {
                let act = match act {
                    Some(raw) => {
                        let resolved = resolve_mention(&raw, aliases, last_act.as_deref());
                        last_act = Some(resolved.clone());
                        Some(resolved)
                    }
                    None => last_act.clone(),
                };
                let act_date = act.as_deref().and_then(parse_date);
                for id in ARTICLE_ID_RE.find_iter(&section_text[ids.clone()]) {
                    let span = ids.start + id.start()..ids.start + id.end();
                    let reference =
                        LegalReference::new(collapse(id.as_str()), act.clone(), act_date, span)
                            .expect("non-empty id and ordered span");
                    refs.push(reference);
                }
            }
        }
    }
    refs
}

fn resolve_mention(raw: &str, aliases: &AliasTable, prior: Option<&str>) -> String {
    if let Some(canonical) = aliases.get(raw) {
        return canonical.to_owned();
    }
    match prior {
        Some(prior) if is_anaphora(raw) => prior.to_owned(),
        _ => raw.to_owned(),
    }
}

/// Fraction of gold references matched by a distinct prediction with equal
/// normalized (act, article id).
pub fn extraction_success_rate(
    predicted: &[LegalReference],
    gold: &[LegalReference],
) -> Result<f64, EmptyGold> {
    if gold.is_empty() {
        return Err(EmptyGold);
    }
    let key = |r: &LegalReference| {
        (
            normalize_act(r.act().unwrap_or("")),
            normalize_article_id(r.article_id()),
        )
    };
    let mut available: HashMap<(String, String), usize> = HashMap::new();
    for p in predicted {
        *available.entry(key(p)).or_default() += 1;
    }
    let mut matched = 0usize;
    for g in gold {
        if let Some(n) = available.get_mut(&key(g)) {
            if *n > 0 {
                *n -= 1;
                matched += 1;
            }
        }
    }
    Ok(matched as f64 / gold.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(refs: &[LegalReference]) -> Vec<(&str, Option<&str>)> {
        refs.iter().map(|r| (r.article_id(), r.act())).collect()
    }

    #[test]
    fn bare_article() {
        let text = "Article 10 is amended as follows:\n1° The words « a » are deleted.";
        let refs = extract_references(text, &AliasTable::new());
        assert_eq!(ids(&refs), [("10", None)]);
        assert_eq!(&text[refs[0].raw_span()], "10");
    }

    #[test]
    fn anaphoric_order_resolved_through_aliases() {
        let text = "The second paragraph of Article 1 of the above-mentioned Order of 4 May 2007 \
                    is replaced by the following provisions: « Assistant. »";
        let aliases: AliasTable = [("above-mentioned Order of 4 May 2007", "Order of 4 May 2007")]
            .into_iter()
            .collect();
        let refs = extract_references(text, &aliases);
        assert_eq!(ids(&refs), [("1", Some("Order of 4 May 2007"))]);
        assert_eq!(refs[0].act_date(), NaiveDate::from_ymd_opt(2007, 5, 4));

        let unresolved = extract_references(text, &AliasTable::new());
        assert_eq!(
            unresolved[0].act(),
            Some("above-mentioned Order of 4 May 2007")
        );
        assert_eq!(unresolved[0].act_date(), NaiveDate::from_ymd_opt(2007, 5, 4));
    }

    #[test]
    fn no_citation() {
        assert!(extract_references("Lorem ipsum dolor sit amet.", &AliasTable::new()).is_empty());
    }

    #[test]
    fn code_articles_and_lists() {
        let refs = extract_references(
            "Articles L. 123-4 and L. 123-5 of the Commercial Code are repealed.",
            &AliasTable::new(),
        );
        assert_eq!(
            ids(&refs),
            [
                ("L. 123-4", Some("Commercial Code")),
                ("L. 123-5", Some("Commercial Code"))
            ]
        );
        let refs = extract_references(
            "L'article 1er du code général des impôts est ainsi modifié :",
            &AliasTable::new(),
        );
        assert_eq!(ids(&refs), [("1er", Some("code général des impôts"))]);
    }

    #[test]
    fn bare_articles_inherit_the_preceding_act() {
        let text = "I. – The General Tax Code is amended as follows:\n1° Article 10 is repealed;\n\
                    2° Article 12 of the same code is repealed.";
        let refs = extract_references(text, &AliasTable::new());
        assert_eq!(
            ids(&refs),
            [("10", Some("General Tax Code")), ("12", Some("General Tax Code"))]
        );
    }

    #[test]
    fn quoted_citations_are_not_targets() {
        let refs = extract_references(
            "In Article 3, the words « Article 5 » are replaced by the words « Article 6 ».",
            &AliasTable::new(),
        );
        assert_eq!(ids(&refs), [("3", None)]);
    }

    #[test]
    fn spans_are_ordered_and_disjoint() {
        let text = "Article 1, Article 2 and Articles 3, 4 and 5 of the Rural Code.";
        let refs = extract_references(text, &AliasTable::new());
        let found: Vec<&str> = refs.iter().map(|r| r.article_id()).collect();
        assert_eq!(found, ["1", "2", "3", "4", "5"]);
        for w in refs.windows(2) {
            assert!(w[0].raw_span().end <= w[1].raw_span().start);
        }
    }

    fn corpus() -> Corpus {
        let mut c = Corpus::new();
        for (act, id) in [(Some("Order of 4 May 2007"), "1"), (Some("Rural Code"), "10"), (None, "10")] {
            c.insert(CorpusEntry {
                act: act.map(str::to_owned),
                article_id: id.into(),
                date: None,
                paragraphs: vec![format!("{act:?} {id}")],
            })
            .unwrap();
        }
        c
    }

    #[test]
    fn resolve_by_act_and_alias() {
        let mut c = corpus();
        let r = LegalReference::new("1", Some("above-mentioned Order of 4 May 2007".into()), None, 0..1).unwrap();
        assert!(c.resolve(&r).is_err());
        c.add_alias("above-mentioned Order of 4 May 2007", "Order of 4 May 2007").unwrap();
        assert!(c.resolve(&r).is_ok());
        assert!(matches!(
            c.add_alias("x", "Unknown Act"),
            Err(CorpusError::UnknownAliasTarget { .. })
        ));
    }

    #[test]
    fn resolve_without_act() {
        let c = corpus();
        let one = LegalReference::new("1", None, None, 0..1).unwrap();
        assert!(c.resolve(&one).is_ok());
        let ten = LegalReference::new("10", None, None, 0..1).unwrap();
        assert!(matches!(c.resolve(&ten), Err(ResolveError::Ambiguous { candidates: 2, .. })));
        let missing = LegalReference::new("99", None, None, 0..1).unwrap();
        assert!(matches!(c.resolve(&missing), Err(ResolveError::NotFound(_))));
    }

    #[test]
    fn implicit_alias_table() {
        let table = corpus().alias_table();
        assert_eq!(
            table.get("the above-mentioned Order of 4 May 2007"),
            Some("Order of 4 May 2007")
        );
    }

    #[test]
    fn duplicate_corpus_keys() {
        let mut c = corpus();
        let dup = CorpusEntry {
            act: Some("rural  code".into()),
            article_id: "10".into(),
            date: None,
            paragraphs: vec!["x".into()],
        };
        assert!(matches!(c.insert(dup), Err(CorpusError::DuplicateKey { .. })));
    }

    #[test]
    fn success_rate_counts() {
        let r = |id: &str| LegalReference::new(id, Some("Code".into()), None, 0..0).unwrap();
        let gold = vec![r("1"), r("2")];
        assert_eq!(extraction_success_rate(&gold, &gold), Ok(1.0));
        assert_eq!(extraction_success_rate(&[r("2"), r("2")], &gold), Ok(0.5));
        assert_eq!(extraction_success_rate(&gold, &[]), Err(EmptyGold));
        let loose = LegalReference::new("l.1", Some(" the  CODE".into()), None, 0..0).unwrap();
        let strict = LegalReference::new("L. 1", Some("Code".into()), None, 0..0).unwrap();
        assert_eq!(extraction_success_rate(&[loose], &[strict]), Ok(1.0));
    }

    #[test]
    fn dates() {
        assert_eq!(parse_date("loi du 1er janvier 2020"), NaiveDate::from_ymd_opt(2020, 1, 1));
        assert_eq!(parse_date("31 February 2020"), None);
    }
}
