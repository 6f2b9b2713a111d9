//! Drafting templates recognized by the parser.
//!
//! The table is ordered, most specific first; the first template whose
//! pattern matches a whole clause wins. Patterns are regular expressions
//! with two placeholders:
//!
//! * `{Q:role}` a guillemet-quoted span, captured without its quotes and
//!   padding spaces;
//! * `{O:role}` an ordinal word ("second", "deuxième").
//!
//! Named captures carry the roles an operation needs: `old`, `new`,
//! `target`, `anchor`, `text`, `ordinal`, and the optional inline scopes
//! `scope_paragraph` and `scope_sentence`. Patterns are compiled
//! case-insensitively and anchored at both ends.

use std::path::Path;
use std::sync::LazyLock;

use regex::{Captures, Regex};
use serde::{Deserialize, Serialize};

use super::{ordinal, AmendmentError, AmendmentOp, Scope};
use crate::text::{guillemets_fallback, quoted_ranges};

#[derive(Debug, thiserror::Error)]
pub enum TemplateError {
    #[error("cannot read template file: {0}")]
    Io(#[from] std::io::Error),
    #[error("template file is malformed: {0}")]
    Format(#[from] toml::de::Error),
    #[error("template {id}: {message}")]
    Invalid { id: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    ReplaceWords,
    DeleteWords,
    DeleteSentence,
    DeleteParagraph,
    ReplaceParagraph,
    ReplaceSentence,
    AppendText,
    InsertAfterWords,
    AbrogateArticle,
}

impl OpKind {
    fn required_roles(self) -> &'static [&'static str] {
        match self {
            OpKind::ReplaceWords => &["old", "new"],
            OpKind::DeleteWords => &["target"],
            OpKind::DeleteSentence | OpKind::DeleteParagraph => &["ordinal"],
            OpKind::ReplaceParagraph | OpKind::ReplaceSentence => &["ordinal", "text"],
            OpKind::AppendText => &["text"],
            OpKind::InsertAfterWords => &["anchor", "new"],
            OpKind::AbrogateArticle => &[],
        }
    }
}

/// Serializable description of one template.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateSpec {
    pub id: String,
    pub op: OpKind,
    pub pattern: String,
}

#[derive(Debug, Clone)]
pub struct Template {
    spec: TemplateSpec,
    regex: Regex,
}

impl Template {
    pub fn compile(spec: TemplateSpec) -> Result<Self, TemplateError> {
        let expanded = expand_placeholders(&spec.pattern);
        let regex = Regex::new(&format!("(?is)^(?:{expanded})$")).map_err(|e| {
            TemplateError::Invalid {
                id: spec.id.clone(),
                message: e.to_string(),
            }
        })?;
        let names: Vec<&str> = regex.capture_names().flatten().collect();
        if let Some(missing) = spec
            .op
            .required_roles()
            .iter()
            .find(|role| !names.contains(role))
        {
            return Err(TemplateError::Invalid {
                id: spec.id.clone(),
                message: format!("missing capture role `{missing}`"),
            });
        }
        Ok(Self { spec, regex })
    }

    pub fn spec(&self) -> &TemplateSpec {
        &self.spec
    }

    fn build(&self, caps: &Captures<'_>, outer: Scope) -> Option<AmendmentOp> {
        let text = |role: &str| caps.name(role).map(|m| m.as_str().to_owned());
        let ord = |role: &str| caps.name(role).and_then(|m| ordinal::parse(m.as_str()));
        let inline = match (ord("scope_paragraph"), ord("scope_sentence")) {
            (Some(paragraph), Some(sentence)) => Scope::SentenceOfParagraph {
                paragraph,
                sentence,
            },
            (Some(p), None) => Scope::Paragraph(p),
            (None, Some(s)) => Scope::Sentence(s),
            (None, None) => Scope::WholeArticle,
        };
        let scope = inline.within(outer);
        let op = match self.spec.op {
            OpKind::ReplaceWords => AmendmentOp::ReplaceWords {
                old: text("old")?,
                new: text("new")?,
                scope,
            },
            OpKind::DeleteWords => AmendmentOp::DeleteWords {
                target: text("target")?,
                scope,
            },
            OpKind::DeleteSentence => AmendmentOp::DeleteSentence {
                ordinal: ord("ordinal")?,
                scope,
            },
            OpKind::DeleteParagraph => AmendmentOp::DeleteParagraph {
                ordinal: ord("ordinal")?,
            },
            OpKind::ReplaceParagraph => AmendmentOp::ReplaceParagraph {
                ordinal: ord("ordinal")?,
                new_text: text("text")?,
            },
            OpKind::ReplaceSentence => AmendmentOp::ReplaceSentence {
                ordinal: ord("ordinal")?,
                new_text: text("text")?,
                scope,
            },
            OpKind::AppendText => AmendmentOp::AppendText {
                new_text: text("text")?,
                scope,
            },
            OpKind::InsertAfterWords => AmendmentOp::InsertAfterWords {
                anchor: text("anchor")?,
                new_text: text("new")?,
                scope,
            },
            OpKind::AbrogateArticle => AmendmentOp::AbrogateArticle,
        };
        Some(op)
    }
}

fn expand_placeholders(pattern: &str) -> String {
    static PLACEHOLDER: LazyLock<Regex> =
        LazyLock::new(|| Regex::new(r"\{([QO]):([a-z_]+)\}").expect("placeholder pattern"));
    let ordinals = ordinal::pattern();
    PLACEHOLDER
        .replace_all(pattern, |caps: &Captures<'_>| match &caps[1] {
            "Q" => format!(r"«\s*(?P<{}>.+?)\s*»", &caps[2]),
            _ => format!(r"(?P<{}>{})", &caps[2], ordinals),
        })
        .into_owned()
}

#[derive(Deserialize)]
struct TemplateFile {
    template: Vec<TemplateSpec>,
}

/// Ordered list of templates plus the scope phrases that may prefix a
/// clause ("In the second paragraph, ...").
#[derive(Debug, Clone)]
pub struct TemplateTable {
    templates: Vec<Template>,
}

impl TemplateTable {
    pub fn new(specs: Vec<TemplateSpec>) -> Result<Self, TemplateError> {
        let templates = specs
            .into_iter()
            .map(Template::compile)
            .collect::<Result<_, _>>()?;
        Ok(Self { templates })
    }

    /// Reads `[[template]]` entries (`id`, `op`, `pattern`) from a TOML file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, TemplateError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, TemplateError> {
        let file: TemplateFile = toml::from_str(text)?;
        Self::new(file.template)
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    /// Parses a modification section into operations, in textual order.
    pub fn parse(&self, section_text: &str) -> Result<Vec<AmendmentOp>, AmendmentError> {
        let text = guillemets_fallback(section_text);
        let mut ops = Vec::new();
        let mut header_scope = Scope::WholeArticle;
        for (offset, clause) in split_clauses(&text) {
            let mut clause = trim_clause(clause);
            let mut offset = offset;
            if let Some(m) = HEADER.find(clause) {
                header_scope = scope_in_header(&clause[..m.end()]).unwrap_or(header_scope);
                offset += m.end();
                clause = &clause[m.end()..];
            } else if !clause.contains('«') && clause.ends_with(':') {
                header_scope = scope_in_header(clause).unwrap_or(header_scope);
                continue;
            }
            if clause.is_empty() {
                continue;
            }
            let op = self.parse_clause(clause, header_scope).ok_or_else(|| {
                AmendmentError::UnrecognizedPattern {
                    offset,
                    snippet: clause.chars().take(80).collect(),
                }
            })?;
            ops.push(op);
        }
        if ops.is_empty() {
            return Err(AmendmentError::UnrecognizedPattern {
                offset: 0,
                snippet: section_text.chars().take(80).collect(),
            });
        }
        Ok(ops)
    }

    fn parse_clause(&self, clause: &str, header_scope: Scope) -> Option<AmendmentOp> {
        let (prefix_scope, rest) = strip_scope_prefix(clause);
        let outer = prefix_scope.map_or(header_scope, |s| s.within(header_scope));
        self.templates.iter().find_map(|t| {
            let caps = t.regex.captures(rest)?;
            t.build(&caps, outer)
        })
    }
}

/// Splits at enumeration markers (`1°`, `a)`, `I. –`) found at a line start
/// or after `;`, `:` or `.`, ignoring quoted material. The first clause is
/// the preamble, possibly empty. Offsets are bytes into `text`.
fn split_clauses(text: &str) -> Vec<(usize, &str)> {
    static MARKER: LazyLock<Regex> = LazyLock::new(|| {
        Regex::new(r"(?m)(?:^[ \t]*|[;:.][ \t]+)(?:\d+°(?:\s(?:bis|ter|quater)\b)?|[a-z]{1,2}\)|[IVX]+\.\s*[–-])[ \t]+")
            .expect("marker pattern")
    });
    let quotes = quoted_ranges(text);
    let mut clauses = Vec::new();
    let mut start = 0;
    for m in MARKER.find_iter(text) {
        if quotes.iter().any(|q| q.contains(&m.start())) {
            continue;
        }
        clauses.push((start, &text[start..m.start()]));
        start = m.end();
    }
    clauses.push((start, &text[start..]));
    clauses
}

fn trim_clause(clause: &str) -> &str {
    let mut c = clause.trim();
    loop {
        let before = c.len();
        c = c.trim_end_matches([';', '.', ',']).trim_end();
        for tail in [" and", " et", " or", " ou"] {
            if c.ends_with(tail) {
                c = c[..c.len() - tail.len()].trim_end();
            }
        }
        if c.len() == before {
            return c;
        }
    }
}

static HEADER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^[^«]*?(?:(?:is|are)\s+amended\s+as\s+follows|(?:est|sont)\s+ainsi\s+modifiée?s?)\s*:\s*")
        .expect("header pattern")
});

static SCOPE_PREFIX: LazyLock<Vec<(Regex, bool, bool)>> = LazyLock::new(|| {
    let o = ordinal::pattern();
    let tail = r"(?:\s+(?:of|de|du)\s+[^,«]+?)?\s*,\s*";
    // (pattern, has paragraph, has sentence)
    [
        (format!(r"(?:in|at)\s+the\s+(?P<s>{o})\s+sentence\s+of\s+the\s+(?P<p>{o})\s+paragraph{tail}"), true, true),
        (format!(r"(?:à|a)\s+la\s+(?P<s>{o})\s+phrase\s+du\s+(?P<p>{o})\s+alinéa{tail}"), true, true),
        (format!(r"(?:in|at)\s+the\s+(?P<p>{o})\s+paragraph{tail}"), true, false),
        (format!(r"au\s+(?P<p>{o})\s+alinéa{tail}"), true, false),
        (format!(r"(?:in|at)\s+the\s+(?P<s>{o})\s+sentence{tail}"), false, true),
        (format!(r"(?:à|a)\s+la\s+(?P<s>{o})\s+phrase{tail}"), false, true),
        (r"(?:in|à|a)\s+(?:l['’])?article\s+[^,«]+,\s*".to_owned(), false, false),
    ]
    .into_iter()
    .map(|(p, has_p, has_s)| {
        (
            Regex::new(&format!("(?i)^{p}")).expect("scope prefix pattern"),
            has_p,
            has_s,
        )
    })
    .collect()
});

fn strip_scope_prefix(clause: &str) -> (Option<Scope>, &str) {
    for (re, has_p, has_s) in SCOPE_PREFIX.iter() {
        let Some(caps) = re.captures(clause) else {
            continue;
        };
        let ord = |name: &str| caps.name(name).and_then(|m| ordinal::parse(m.as_str()));
        let scope = match (has_p, has_s, ord("p"), ord("s")) {
            (true, true, Some(paragraph), Some(sentence)) => Scope::SentenceOfParagraph {
                paragraph,
                sentence,
            },
            (true, false, Some(p), _) => Scope::Paragraph(p),
            (false, true, _, Some(s)) => Scope::Sentence(s),
            (false, false, _, _) => Scope::WholeArticle,
            _ => continue,
        };
        let rest = &clause[caps.get(0).expect("whole match").end()..];
        return (Some(scope), rest);
    }
    (None, clause)
}

fn scope_in_header(header: &str) -> Option<Scope> {
    static PARAGRAPH: LazyLock<Regex> = LazyLock::new(|| {
        let o = ordinal::pattern();
        Regex::new(&format!(
            r"(?i)\b(?:the\s+(?P<p>{o})\s+paragraph|(?:le|au)\s+(?P<fp>{o})\s+alinéa)\b"
        ))
        .expect("header scope pattern")
    });
    let caps = PARAGRAPH.captures(header)?;
    let word = caps.name("p").or_else(|| caps.name("fp"))?;
    ordinal::parse(word.as_str()).map(Scope::Paragraph)
}

impl Default for TemplateTable {
    fn default() -> Self {
        let specs = DEFAULT_TEMPLATES
            .iter()
            .map(|(id, op, pattern)| TemplateSpec {
                id: (*id).to_owned(),
                op: *op,
                pattern: (*pattern).to_owned(),
            })
            .collect();
        TemplateTable::new(specs).expect("built-in templates compile")
    }
}

const DEFAULT_TEMPLATES: &[(&str, OpKind, &str)] = &[
    // English
    (
        "en.replace_words",
        OpKind::ReplaceWords,
        r"(?:the\s+(?:words?|references?|figures?|numbers?|dates?|amounts?|years?|rates?)\s+)?{Q:old}\s+(?:is|are)\s+replaced\s+by\s+(?:the\s+(?:words?|references?|figures?|numbers?|dates?|amounts?|years?|rates?)\s*:?\s+)?{Q:new}",
    ),
    (
        "en.delete_words",
        OpKind::DeleteWords,
        r"(?:the\s+(?:words?|references?)\s+)?{Q:target}\s+(?:is|are)\s+(?:deleted|removed)",
    ),
    (
        "en.insert_after_words",
        OpKind::InsertAfterWords,
        r"after\s+the\s+(?:words?|references?)\s+{Q:anchor}\s*,\s+(?:the\s+(?:words?|references?)\s+)?{Q:new}\s+(?:is|are)\s+inserted",
    ),
    (
        "en.delete_sentence",
        OpKind::DeleteSentence,
        r"the\s+{O:ordinal}\s+sentence(?:\s+of\s+the\s+{O:scope_paragraph}\s+paragraph)?\s+is\s+(?:deleted|removed)",
    ),
    (
        "en.replace_sentence",
        OpKind::ReplaceSentence,
        r"the\s+{O:ordinal}\s+sentence(?:\s+of\s+the\s+{O:scope_paragraph}\s+paragraph)?\s+is\s+replaced\s+by\s+(?:the\s+following\s+sentence|a\s+sentence\s+worded\s+as\s+follows)\s*:?\s*{Q:text}",
    ),
    (
        "en.delete_paragraph",
        OpKind::DeleteParagraph,
        r"the\s+{O:ordinal}\s+paragraph(?:\s+of\s+[^«]*?)?\s+is\s+(?:deleted|repealed|removed)",
    ),
    (
        "en.replace_paragraph",
        OpKind::ReplaceParagraph,
        r"the\s+{O:ordinal}\s+paragraph(?:\s+of\s+[^«]*?)?\s+is\s+replaced\s+by\s+(?:the\s+following\s+provisions?|a\s+paragraph\s+worded\s+as\s+follows)\s*:?\s*{Q:text}",
    ),
    (
        "en.append_words_to_sentence",
        OpKind::AppendText,
        r"the\s+{O:scope_sentence}\s+sentence(?:\s+of\s+the\s+{O:scope_paragraph}\s+paragraph)?\s+is\s+supplemented\s+by\s+the\s+words\s*:?\s*{Q:text}",
    ),
    (
        "en.append_sentence_to_paragraph",
        OpKind::AppendText,
        r"the\s+{O:scope_paragraph}\s+paragraph\s+is\s+supplemented\s+by\s+(?:a|the\s+following)\s+sentence(?:\s+worded\s+as\s+follows)?\s*:?\s*{Q:text}",
    ),
    (
        "en.append_paragraph",
        OpKind::AppendText,
        r"(?:(?:the\s+)?article(?:\s+[^«]*?)?|it)\s+is\s+supplemented\s+by\s+(?:a|the\s+following)\s+paragraph(?:\s+worded\s+as\s+follows)?\s*:?\s*{Q:text}",
    ),
    (
        "en.abrogate",
        OpKind::AbrogateArticle,
        r"(?:(?:the\s+)?article(?:\s+[^«]*?)?|it)\s+is\s+(?:repealed|abrogated)",
    ),
    // French
    (
        "fr.replace_words",
        OpKind::ReplaceWords,
        r"(?:(?:les|le)\s+(?:mots?|références?|chiffres?|nombres?|montants?|taux|dates?|millésimes?|années?)\s*:?\s+)?{Q:old}\s+(?:est|sont)\s+remplacée?s?\s+par\s+(?:(?:les|le|la)\s+(?:mots?|références?|chiffres?|nombres?|montants?|taux|dates?|millésimes?|années?)\s*:?\s+)?{Q:new}",
    ),
    (
        "fr.delete_words",
        OpKind::DeleteWords,
        r"(?:(?:les|le)\s+(?:mots?|références?)\s*:?\s+)?{Q:target}\s+(?:est|sont)\s+supprimée?s?",
    ),
    (
        "fr.insert_after_words",
        OpKind::InsertAfterWords,
        r"après\s+(?:les|le)\s+(?:mots?|références?)\s*:?\s*{Q:anchor}\s*,\s+(?:sont|est)\s+insérée?s?\s+(?:les|le)\s+mots?\s*:?\s*{Q:new}",
    ),
    (
        "fr.insert_after_words_passive",
        OpKind::InsertAfterWords,
        r"après\s+(?:les|le)\s+(?:mots?|références?)\s*:?\s*{Q:anchor}\s*,\s+(?:les|le)\s+mots?\s*:?\s*{Q:new}\s+(?:sont|est)\s+insérée?s?",
    ),
    (
        "fr.delete_sentence",
        OpKind::DeleteSentence,
        r"la\s+{O:ordinal}\s+phrase(?:\s+du\s+{O:scope_paragraph}\s+alinéa)?\s+est\s+supprimée",
    ),
    (
        "fr.replace_sentence",
        OpKind::ReplaceSentence,
        r"la\s+{O:ordinal}\s+phrase(?:\s+du\s+{O:scope_paragraph}\s+alinéa)?\s+est\s+remplacée\s+par\s+une\s+phrase\s+ainsi\s+rédigée\s*:?\s*{Q:text}",
    ),
    (
        "fr.delete_paragraph",
        OpKind::DeleteParagraph,
        r"le\s+{O:ordinal}\s+alinéa(?:\s+[^«]*?)?\s+est\s+(?:supprimé|abrogé)",
    ),
    (
        "fr.replace_paragraph",
        OpKind::ReplaceParagraph,
        r"le\s+{O:ordinal}\s+alinéa(?:\s+[^«]*?)?\s+est\s+remplacé\s+par\s+(?:les\s+dispositions\s+suivantes|un\s+alinéa\s+ainsi\s+rédigé)\s*:?\s*{Q:text}",
    ),
    (
        "fr.append_words_to_sentence",
        OpKind::AppendText,
        r"la\s+{O:scope_sentence}\s+phrase(?:\s+du\s+{O:scope_paragraph}\s+alinéa)?\s+est\s+complétée\s+par\s+les\s+mots\s*:?\s*{Q:text}",
    ),
    (
        "fr.append_sentence_to_paragraph",
        OpKind::AppendText,
        r"le\s+{O:scope_paragraph}\s+alinéa\s+est\s+complété\s+par\s+une\s+phrase\s+ainsi\s+rédigée\s*:?\s*{Q:text}",
    ),
    (
        "fr.append_paragraph",
        OpKind::AppendText,
        r"(?:(?:l['’])?article(?:\s+[^«]*?)?|il)\s+est\s+complété\s+par\s+un\s+alinéa\s+ainsi\s+rédigé\s*:?\s*{Q:text}",
    ),
    (
        "fr.abrogate",
        OpKind::AbrogateArticle,
        r"(?:l['’])?article(?:\s+[^«]*?)?\s+est\s+abrogé",
    ),
];
