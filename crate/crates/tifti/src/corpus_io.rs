//! Corpus files: one JSON object per line.
//!
//! ```json
//! {"patient_id":"s0-p00001","drug":{"canonical_name":"sunitinib","synonyms":["sunitinib","Sutent"]},
//!  "documents":[{"timestamp":"2018-12-15","text":"..."}],
//!  "gold":{"taken":true,"start":"2018-12-08","end":null}}
//! ```
//!
//! `gold` may be omitted for unlabeled input.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use tifti_core::corpus::{PatientDrugExample, RawDocument, RegimenLabel};
use tifti_core::date::DateStamp;
use tifti_core::lexicon::DrugLexiconEntry;

use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DrugRecord {
    canonical_name: String,
    synonyms: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentRecord {
    timestamp: String,
    text: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GoldRecord {
    taken: bool,
    start: Option<String>,
    end: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExampleRecord {
    patient_id: String,
    drug: DrugRecord,
    documents: Vec<DocumentRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gold: Option<GoldRecord>,
}

fn date_string(d: Option<DateStamp>) -> Option<String> {
    d.map(|d| d.to_string())
}

impl From<&PatientDrugExample> for ExampleRecord {
    fn from(e: &PatientDrugExample) -> Self {
        ExampleRecord {
            patient_id: e.patient_id.clone(),
            drug: DrugRecord { canonical_name: e.drug.canonical_name.clone(), synonyms: e.drug.synonyms.clone() },
            documents: e
                .documents
                .iter()
                .map(|d| DocumentRecord { timestamp: d.timestamp.to_string(), text: d.text.clone() })
                .collect(),
            gold: e.gold.map(|g| GoldRecord { taken: g.taken, start: date_string(g.start), end: date_string(g.end) }),
        }
    }
}

fn parse_date(s: &str) -> std::result::Result<DateStamp, String> {
    s.parse().map_err(|e: tifti_core::Error| e.to_string())
}

impl TryFrom<ExampleRecord> for PatientDrugExample {
    type Error = String;

    fn try_from(r: ExampleRecord) -> std::result::Result<Self, String> {
        let drug = DrugLexiconEntry::new(r.drug.canonical_name, r.drug.synonyms).map_err(|e| e.to_string())?;
        let documents = r
            .documents
            .into_iter()
            .map(|d| Ok(RawDocument { timestamp: parse_date(&d.timestamp)?, text: d.text }))
            .collect::<std::result::Result<Vec<_>, String>>()?;
        let gold = match r.gold {
            None => None,
            Some(g) => {
                let label = RegimenLabel {
                    taken: g.taken,
                    start: g.start.as_deref().map(parse_date).transpose()?,
                    end: g.end.as_deref().map(parse_date).transpose()?,
                };
                if label.taken && label.start.is_none() {
                    return Err("gold taken=true requires a start date".into());
                }
                Some(label)
            }
        };
        PatientDrugExample::new(r.patient_id, drug, documents, gold).map_err(|e| e.to_string())
    }
}

pub fn example_to_json(example: &PatientDrugExample) -> String {
    serde_json::to_string(&ExampleRecord::from(example)).expect("record serializes")
}

pub fn example_from_json(line: &str) -> std::result::Result<PatientDrugExample, String> {
    let record: ExampleRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    PatientDrugExample::try_from(record)
}

pub fn write_corpus(path: &Path, examples: &[PatientDrugExample]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for ex in examples {
        writeln!(w, "{}", example_to_json(ex)).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads every non-blank line; errors carry the 1-based line number.
pub fn read_corpus(path: &Path) -> Result<Vec<PatientDrugExample>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let example = example_from_json(&line).map_err(|message| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        })?;
        out.push(example);
    }
    Ok(out)
}

/// Every example must carry a gold label.
pub fn require_gold(path: &Path, examples: &[PatientDrugExample]) -> Result<Vec<RegimenLabel>> {
    examples
        .iter()
        .enumerate()
        .map(|(i, e)| {
            e.gold.ok_or_else(|| Error::Format {
                path: path.to_path_buf(),
                message: format!("record {}: example {} has no gold label", i + 1, e.patient_id),
            })
        })
        .collect()
}
