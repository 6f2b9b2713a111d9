//! Triplet datasets and record files, both JSON Lines.
//!
//! A dataset file holds one `{id, instruction, input, response?}` object per
//! line. Provenance (source bill, snapshot date) lives next to it in
//! `<stem>.meta.json` so the JSONL stays a plain list of triplets.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::evaluation::normalize;
use crate::llm::contains_table;
use crate::model::{ConsolidationRecord, ConsolidationTriplet};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line_no}: {message}")]
    ParseError { line_no: usize, message: String },
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("triplets without response: {ids:?}")]
    MissingResponse { ids: Vec<String> },
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_owned(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub id: String,
    #[serde(flatten)]
    pub triplet: ConsolidationTriplet,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_bill: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_date: Option<NaiveDate>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    entries: Vec<DatasetEntry>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn new(entries: Vec<DatasetEntry>, provenance: Provenance) -> Result<Self, DatasetError> {
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.id.as_str()) {
                return Err(DatasetError::DuplicateId(e.id.clone()));
            }
        }
        Ok(Self {
            entries,
            provenance,
        })
    }

    pub fn entries(&self) -> &[DatasetEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, entry: DatasetEntry) -> Result<(), DatasetError> {
        if self.entries.iter().any(|e| e.id == entry.id) {
            return Err(DatasetError::DuplicateId(entry.id));
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        let path = path.as_ref();
        let entries = read_jsonl(path)?;
        let meta = meta_path(path);
        let provenance = if meta.exists() {
            let text = std::fs::read_to_string(&meta).map_err(io_error(&meta))?;
            serde_json::from_str(&text).map_err(|e| DatasetError::ParseError {
                line_no: e.line(),
                message: format!("{}: {e}", meta.display()),
            })?
        } else {
            Provenance::default()
        };
        Self::new(entries, provenance)
    }

    /// Writes the JSONL file, and the provenance sidecar when there is any
    /// provenance to record.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DatasetError> {
        let path = path.as_ref();
        write_jsonl(path, &self.entries)?;
        let meta = meta_path(path);
        if self.provenance != Provenance::default() {
            let json = serde_json::to_string_pretty(&self.provenance).expect("provenance serializes");
            std::fs::write(&meta, json + "\n").map_err(io_error(&meta))?;
        } else if meta.exists() {
            std::fs::remove_file(&meta).map_err(io_error(&meta))?;
        }
        Ok(())
    }
}

pub fn meta_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}.meta.json"))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurationReport {
    pub kept: usize,
    pub removed_no_modification: usize,
    pub removed_table: usize,
}

/// Removes triplets whose response equals the input after normalization,
/// then triplets whose instruction or input contains a table.
pub fn curate(dataset: &Dataset) -> Result<(Dataset, CurationReport), DatasetError> {
    let missing: Vec<String> = dataset
        .entries
        .iter()
        .filter(|e| e.triplet.response().is_none())
        .map(|e| e.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(DatasetError::MissingResponse { ids: missing });
    }
    let mut report = CurationReport::default();
    let mut kept = Vec::new();
    for entry in &dataset.entries {
        let t = &entry.triplet;
        if normalize(t.input()) == normalize(t.response().unwrap_or_default()) {
            report.removed_no_modification += 1;
        } else if contains_table(t.instruction()) || contains_table(t.input()) {
            report.removed_table += 1;
        } else {
            kept.push(entry.clone());
        }
    }
    report.kept = kept.len();
    Ok((
        Dataset {
            entries: kept,
            provenance: dataset.provenance.clone(),
        },
        report,
    ))
}

pub fn load_records(path: impl AsRef<Path>) -> Result<Vec<ConsolidationRecord>, DatasetError> {
    let records: Vec<ConsolidationRecord> = read_jsonl(path.as_ref())?;
    let mut seen = HashSet::new();
    for r in &records {
        if !seen.insert(r.id()) {
            return Err(DatasetError::DuplicateId(r.id().to_owned()));
        }
    }
    Ok(records)
}

pub fn save_records(
    path: impl AsRef<Path>,
    records: &[ConsolidationRecord],
) -> Result<(), DatasetError> {
    write_jsonl(path.as_ref(), records)
}

/// Reads one JSON value per non-blank line; line numbers are 1-based.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, DatasetError> {
    let file = File::open(path).map_err(io_error(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_error(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| DatasetError::ParseError {
            line_no: i + 1,
            message: e.to_string(),
        })?;
        out.push(value);
    }
    Ok(out)
}

/// Writes through a temporary sibling file renamed into place, so readers
/// never see a half-written file.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), DatasetError> {
    let tmp = path.with_extension("jsonl.tmp");
    {
        let file = File::create(&tmp).map_err(io_error(&tmp))?;
        let mut out = BufWriter::new(file);
        for item in items {
            serde_json::to_writer(&mut out, item).map_err(|e| io_error(&tmp)(e.into()))?;
            out.write_all(b"\n").map_err(io_error(&tmp))?;
        }
        out.flush().map_err(io_error(&tmp))?;
    }
    std::fs::rename(&tmp, path).map_err(io_error(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn entry(id: &str, input: &str, response: &str) -> DatasetEntry {
        DatasetEntry {
            id: id.into(),
            triplet: ConsolidationTriplet::new(
                "The words « a » are replaced by the words « b ».",
                input,
                Some(response.into()),
            )
            .unwrap(),
        }
    }

    #[test]
    fn round_trip_with_provenance() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("set.jsonl");
        let ds = Dataset::new(
            vec![
                entry("1", "a x", "b x"),
                entry("2", "« Élément » a", "« Élément » b"),
                entry("3", "a", "b"),
            ],
            Provenance {
                source_bill: Some("PLF 2024".into()),
                snapshot_date: NaiveDate::from_ymd_opt(2023, 9, 27),
            },
        )
        .unwrap();
        ds.save(&path).unwrap();
        assert!(dir.path().join("set.meta.json").exists());
        assert_eq!(Dataset::load(&path).unwrap(), ds);
        let first = std::fs::read_to_string(&path).unwrap();
        assert!(first.starts_with(r#"{"id":"1","instruction":"#));
    }

    #[test]
    fn parse_errors_and_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(
            &path,
            "{\"id\":\"1\",\"instruction\":\"i\",\"input\":\"x\"}\n{not json}\n",
        )
        .unwrap();
        assert!(matches!(
            Dataset::load(&path),
            Err(DatasetError::ParseError { line_no: 2, .. })
        ));
        std::fs::write(
            &path,
            "{\"id\":\"1\",\"instruction\":\"i\",\"input\":\"x\"}\n{\"id\":\"1\",\"instruction\":\"i\",\"input\":\"y\"}\n",
        )
        .unwrap();
        assert!(matches!(Dataset::load(&path), Err(DatasetError::DuplicateId(id)) if id == "1"));
    }

    #[test]
    fn curation() {
        let ds = Dataset::new(
            vec![
                entry("same", "a text.", "A text"),
                entry("table", "| a | b |\n| 1 | 2 |", "| b | b |\n| 1 | 2 |"),
                entry("plain", "a x", "b x"),
            ],
            Provenance::default(),
        )
        .unwrap();
        let (curated, report) = curate(&ds).unwrap();
        assert_eq!(
            report,
            CurationReport {
                kept: 1,
                removed_no_modification: 1,
                removed_table: 1
            }
        );
        assert_eq!(curated.entries()[0].id, "plain");
        let (again, report) = curate(&curated).unwrap();
        assert_eq!(again, curated);
        assert_eq!(report.kept, 1);

        let mut missing = curated.clone();
        missing
            .push(DatasetEntry {
                id: "none".into(),
                triplet: ConsolidationTriplet::new("i", "x", None).unwrap(),
            })
            .unwrap();
        assert!(matches!(curate(&missing), Err(DatasetError::MissingResponse { ids }) if ids == ["none"]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn unicode_round_trip(input in "[^\\x00-\\x1f]{1,30}", response in "\\PC{0,30}\n?\\PC{0,10}") {
            prop_assume!(!input.trim().is_empty());
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("u.jsonl");
            let ds = Dataset::new(vec![DatasetEntry {
                id: "u".into(),
                triplet: ConsolidationTriplet::new("« x »", input, Some(response)).unwrap(),
            }], Provenance::default()).unwrap();
            ds.save(&path).unwrap();
            prop_assert_eq!(Dataset::load(&path).unwrap(), ds);
        }
    }
}
