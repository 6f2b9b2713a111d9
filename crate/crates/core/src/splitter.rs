//! Decomposes a bill article into its enumerated sections.
//!
//! French drafting nests enumerations (`I.`, `1°`, `a)`, `–`). Markers are
//! only recognized at the start of a line, so an inline citation such as
//! "1° of Article 5" never opens a section.
//!
//! A *simple modification* is a leaf section with non-blank body, prefixed
//! by the own text of each of its ancestors so that it reads on its own:
//! "Article 10 is amended as follows:" heads each numbered change.

use std::ops::Range;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::model::BillArticle;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SplitError {
    #[error("marker {marker:?} at byte {offset} cannot be placed in the hierarchy")]
    MalformedHierarchy { offset: usize, marker: String },
    #[error("invalid hierarchy configuration: {0}")]
    InvalidConfig(String),
}

/// One enumeration level: a regex matched at line start, and its rank.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelPattern {
    pub pattern: String,
    pub rank: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawHierarchyConfig", into = "RawHierarchyConfig")]
pub struct HierarchyConfig {
    levels: Vec<(LevelPattern, Regex)>,
}

#[derive(Serialize, Deserialize)]
struct RawHierarchyConfig {
    levels: Vec<LevelPattern>,
}

impl TryFrom<RawHierarchyConfig> for HierarchyConfig {
    type Error = SplitError;
    fn try_from(raw: RawHierarchyConfig) -> Result<Self, Self::Error> {
        HierarchyConfig::new(raw.levels)
    }
}

impl From<HierarchyConfig> for RawHierarchyConfig {
    fn from(config: HierarchyConfig) -> Self {
        RawHierarchyConfig {
            levels: config.levels.into_iter().map(|(p, _)| p).collect(),
        }
    }
}

impl HierarchyConfig {
    pub fn new(levels: Vec<LevelPattern>) -> Result<Self, SplitError> {
        if levels.is_empty() {
            return Err(SplitError::InvalidConfig("no level patterns".into()));
        }
        if levels.windows(2).any(|w| w[0].rank >= w[1].rank) {
            return Err(SplitError::InvalidConfig(
                "ranks must be strictly increasing".into(),
            ));
        }
        let levels = levels
            .into_iter()
            .map(|level| {
                let re = Regex::new(&format!("^(?:{})", level.pattern))
                    .map_err(|e| SplitError::InvalidConfig(e.to_string()))?;
                Ok((level, re))
            })
            .collect::<Result<_, SplitError>>()?;
        Ok(Self { levels })
    }

    pub fn levels(&self) -> impl Iterator<Item = &LevelPattern> {
        self.levels.iter().map(|(p, _)| p)
    }

    /// Matches a marker at the start of `line` (already stripped of leading
    /// whitespace). The marker must be followed by whitespace or end the line.
    fn match_marker<'a>(&self, line: &'a str) -> Option<(&'a str, u32)> {
        for (level, re) in &self.levels {
            if let Some(m) = re.find(line) {
                if m.end() == 0 {
                    continue;
                }
                let rest = &line[m.end()..];
                if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                    return Some((m.as_str(), level.rank));
                }
            }
        }
        None
    }
}

impl Default for HierarchyConfig {
    /// French legistic markers: `I.` / `II –`, `1°`, `a)`, `–`.
    fn default() -> Self {
        let levels = vec![
            LevelPattern {
                pattern: r"[IVXLC]+(?:\.(?:\s*[–-])?|\s+[–-])".into(),
                rank: 1,
            },
            LevelPattern {
                pattern: r"\d+°(?:\s(?:bis|ter|quater|quinquies|sexies)\b)?".into(),
                rank: 2,
            },
            LevelPattern {
                pattern: r"[a-z]{1,2}\)".into(),
                rank: 3,
            },
            LevelPattern {
                pattern: r"[–-]".into(),
                rank: 4,
            },
        ];
        HierarchyConfig::new(levels).expect("default hierarchy is valid")
    }
}

/// A node of the section tree.
///
/// `text` is the node's own slice of the source, marker included, up to its
/// first child. Concatenating `text` with the reassembled children yields
/// `source_range` of the original text exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionNode {
    pub marker: Option<String>,
    pub level: usize,
    pub text: String,
    pub children: Vec<SectionNode>,
    pub source_range: Range<usize>,
    #[serde(skip)]
    rank: u32,
}

impl SectionNode {
    /// Own text with the marker and surrounding whitespace removed.
    pub fn body(&self) -> &str {
        let trimmed = self.text.trim_start();
        match &self.marker {
            Some(marker) => trimmed
                .strip_prefix(marker.as_str())
                .unwrap_or(trimmed)
                .trim(),
            None => trimmed.trim_end(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn reassemble(&self) -> String {
        let mut out = String::new();
        self.reassemble_into(&mut out);
        out
    }

    fn reassemble_into(&self, out: &mut String) {
        out.push_str(&self.text);
        for child in &self.children {
            child.reassemble_into(out);
        }
    }

    pub fn leaf_count(&self) -> usize {
        if self.is_leaf() {
            1
        } else {
            self.children.iter().map(SectionNode::leaf_count).sum()
        }
    }
}

/// A self-contained simple modification extracted from a section tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimpleModification {
    /// Markers from the outermost section down to the leaf.
    pub path: Vec<String>,
    /// Ancestor preambles followed by the leaf text.
    pub text: String,
    /// Byte offset in `text` where the leaf's own text begins.
    pub leaf_offset: usize,
}

impl SimpleModification {
    pub fn path_label(&self) -> String {
        self.path.join("")
    }
}

pub fn split_article(
    article: &BillArticle,
    config: &HierarchyConfig,
) -> Result<SectionNode, SplitError> {
    split_text(article.text(), config)
}

/// Builds the section tree of `text`.
pub fn split_text(text: &str, config: &HierarchyConfig) -> Result<SectionNode, SplitError> {
    // (start offset, marker, rank) of every marker line, in order.
    let mut starts: Vec<(usize, String, u32)> = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let stripped = line.trim_start_matches([' ', '\t']);
        if let Some((marker, rank)) = config.match_marker(stripped) {
            starts.push((offset, marker.to_owned(), rank));
        }
        offset += line.len();
    }

    let root_end = starts.first().map_or(text.len(), |s| s.0);
    let mut root = SectionNode {
        marker: None,
        level: 0,
        text: text[..root_end].to_owned(),
        children: Vec::new(),
        source_range: 0..text.len(),
        rank: 0,
    };

    // Indices into the tree of the currently open sections, root excluded.
    let mut open: Vec<usize> = Vec::new();
    for (i, (start, marker, rank)) in starts.iter().enumerate() {
        let end = starts.get(i + 1).map_or(text.len(), |s| s.0);
        {
            let mut depth = open.len();
            while depth > 0 && node_at(&root, &open[..depth]).rank >= *rank {
                depth -= 1;
            }
            open.truncate(depth);
        }
        let parent = node_at_mut(&mut root, &open);
        if let Some(sibling) = parent.children.first() {
            if sibling.rank != *rank {
                return Err(SplitError::MalformedHierarchy {
                    offset: *start,
                    marker: marker.clone(),
                });
            }
        }
        let level = parent.level + 1;
        parent.children.push(SectionNode {
            marker: Some(marker.clone()),
            level,
            text: text[*start..end].to_owned(),
            children: Vec::new(),
            source_range: *start..end,
            rank: *rank,
        });
        open.push(parent.children.len() - 1);
    }
    fix_ranges(&mut root);
    Ok(root)
}

fn node_at<'a>(root: &'a SectionNode, path: &[usize]) -> &'a SectionNode {
    path.iter().fold(root, |node, &i| &node.children[i])
}

fn node_at_mut<'a>(root: &'a mut SectionNode, path: &[usize]) -> &'a mut SectionNode {
    path.iter().fold(root, |node, &i| &mut node.children[i])
}

// Each node was created spanning only its own lines; extend it to cover its
// descendants.
fn fix_ranges(node: &mut SectionNode) -> usize {
    let mut end = node.source_range.start + node.text.len();
    for child in &mut node.children {
        end = fix_ranges(child);
    }
    node.source_range.end = end;
    end
}

/// Lists the simple modifications of a section tree, in document order.
pub fn flatten_simple_modifications(root: &SectionNode) -> Vec<SimpleModification> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    let mut preamble = String::new();
    collect(root, &mut path, &mut preamble, &mut out);
    out
}

fn collect(
    node: &SectionNode,
    path: &mut Vec<String>,
    preamble: &mut String,
    out: &mut Vec<SimpleModification>,
) {
    if let Some(marker) = &node.marker {
        path.push(marker.clone());
    }
    if node.is_leaf() {
        if !node.body().is_empty() {
            let leaf_offset = preamble.len();
            let mut text = preamble.clone();
            text.push_str(&node.text);
            let trimmed = text.trim_end().len();
            text.truncate(trimmed);
            out.push(SimpleModification {
                path: path.clone(),
                text,
                leaf_offset,
            });
        }
    } else {
        let len = preamble.len();
        preamble.push_str(&node.text);
        for child in &node.children {
            collect(child, path, preamble, out);
        }
        preamble.truncate(len);
    }
    if node.marker.is_some() {
        path.pop();
    }
}
