//! Patient-drug examples and the preprocessing that condenses raw notes into a
//! document timeline.
//!
//! Preprocessing runs in a fixed order for each example:
//!
//! 1. split every note into sentences,
//! 2. substitute drug mentions (`DRUG` for the target, `OTHER-DRUG` for any
//!    other known drug),
//! 3. keep only sentences containing `DRUG`,
//! 4. drop any sentence whose substituted text already occurred earlier in the
//!    timeline (copy-forwarded text),
//! 5. drop documents left without sentences.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::date::DateStamp;
use crate::error::{Error, Result};
use crate::lexicon::{word_boundary_at, DrugLexiconEntry};
use crate::seqlabel::DocLabel;

pub const DRUG_TOKEN: &str = "DRUG";
pub const OTHER_DRUG_TOKEN: &str = "OTHER-DRUG";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub timestamp: DateStamp,
    pub text: String,
}

/// Gold regimen annotation. `end == None` with `taken` means ongoing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegimenLabel {
    pub taken: bool,
    pub start: Option<DateStamp>,
    pub end: Option<DateStamp>,
}

impl RegimenLabel {
    pub fn not_taken() -> Self {
        RegimenLabel { taken: false, start: None, end: None }
    }

    pub fn taken(start: DateStamp, end: Option<DateStamp>) -> Result<Self> {
        let label = RegimenLabel { taken: true, start: Some(start), end };
        label.validate()?;
        Ok(label)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.taken && (self.start.is_some() || self.end.is_some()) {
            return Err(Error::Invariant("gold taken=false must not carry dates".into()));
        }
        if let (Some(s), Some(e)) = (self.start, self.end) {
            if s > e {
                return Err(Error::Invariant(format!("gold start {s} after end {e}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatientDrugExample {
    pub patient_id: String,
    pub drug: DrugLexiconEntry,
    pub documents: Vec<RawDocument>,
    pub gold: Option<RegimenLabel>,
}

impl PatientDrugExample {
    /// Validates and sorts documents by timestamp (stable).
    pub fn new(
        patient_id: impl Into<String>,
        drug: DrugLexiconEntry,
        mut documents: Vec<RawDocument>,
        gold: Option<RegimenLabel>,
    ) -> Result<Self> {
        documents.sort_by_key(|d| d.timestamp);
        let example = PatientDrugExample {
            patient_id: patient_id.into(),
            drug,
            documents,
            gold,
        };
        example.validate()?;
        Ok(example)
    }

    pub fn validate(&self) -> Result<()> {
        if self.drug.synonyms.is_empty() {
            return Err(Error::Invariant("drug has no synonyms".into()));
        }
        for (i, doc) in self.documents.iter().enumerate() {
            if doc.text.trim().is_empty() {
                return Err(Error::Invariant(format!("document {i} has empty text")));
            }
        }
        if self.documents.windows(2).any(|w| w[0].timestamp > w[1].timestamp) {
            return Err(Error::Invariant("documents not sorted by timestamp".into()));
        }
        if !self.documents.iter().any(|d| self.drug.is_mentioned_in(&d.text)) {
            return Err(Error::Invariant(format!(
                "no document mentions {}",
                self.drug.canonical_name
            )));
        }
        if let Some(gold) = &self.gold {
            gold.validate()?;
        }
        Ok(())
    }
}

/// Where a timeline entry came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// Index into the example's raw documents.
    Document(usize),
    /// Index into the tagged time-expression list.
    Expression(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CondensedDocument {
    pub timestamp: DateStamp,
    pub sentences: Vec<String>,
    pub is_pseudo: bool,
    pub origin: Origin,
}

impl CondensedDocument {
    /// Text fed to featurization.
    pub fn text(&self) -> String {
        self.sentences.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DocumentTimeline {
    pub docs: Vec<CondensedDocument>,
}

impl DocumentTimeline {
    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn timestamps(&self) -> Vec<DateStamp> {
        self.docs.iter().map(|d| d.timestamp).collect()
    }

    /// Inserts keeping timestamp order; pseudo-documents go after real
    /// documents of equal timestamp, otherwise after existing equal entries.
    pub fn insert_sorted(&mut self, doc: CondensedDocument) {
        let pos = self
            .docs
            .partition_point(|d| sort_key(d) <= sort_key(&doc));
        self.docs.insert(pos, doc);
    }
}

fn sort_key(d: &CondensedDocument) -> (DateStamp, bool) {
    (d.timestamp, d.is_pseudo)
}

const ABBREVIATIONS: &[&str] = &[
    "dr", "mg", "mr", "mrs", "ms", "vs", "e.g", "i.e", "approx", "no", "pt", "st", "etc",
];

fn is_abbreviation(text_before: &str) -> bool {
    let word = text_before
        .rsplit(|c: char| c.is_whitespace() || c == '(')
        .next()
        .unwrap_or("");
    ABBREVIATIONS.iter().any(|a| word.eq_ignore_ascii_case(a))
}

/// Splits note text into trimmed, non-empty sentences.
///
/// Breaks on newlines, and after `.`, `!` or `?` when followed by whitespace
/// and then an uppercase letter or digit. A period closing a known
/// abbreviation ("Dr.", "mg.") never breaks.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut seg_start = 0;
    let mut push = |a: usize, b: usize| {
        let t = text[a..b].trim();
        if !t.is_empty() {
            out.push(t);
        }
    };
    for (i, c) in text.char_indices() {
        if c == '\n' {
            push(seg_start, i);
            seg_start = i + 1;
            continue;
        }
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let after = i + c.len_utf8();
        let rest = &text[after..];
        let trimmed = rest.trim_start_matches(|ch: char| ch.is_whitespace() && ch != '\n');
        if trimmed.len() == rest.len() {
            continue;
        }
        let next = trimmed.chars().next();
        if !next.is_some_and(|n| n.is_uppercase() || n.is_ascii_digit()) {
            continue;
        }
        if c == '.' && is_abbreviation(&text[seg_start..i]) {
            continue;
        }
        push(seg_start, after);
        seg_start = after;
    }
    push(seg_start, text.len());
    out
}

/// Replaces target and other drug mentions with placeholders. Longest surface
/// wins at a position; the target wins a tie with another entry.
pub fn substitute_mentions(
    sentence: &str,
    target: &DrugLexiconEntry,
    other_drugs: &[DrugLexiconEntry],
) -> String {
    let mut surfaces: Vec<(&str, &str)> = target
        .synonyms
        .iter()
        .map(|s| (s.as_str(), DRUG_TOKEN))
        .chain(
            other_drugs
                .iter()
                .flat_map(|e| e.synonyms.iter().map(|s| (s.as_str(), OTHER_DRUG_TOKEN))),
        )
        .collect();
    // Stable sort keeps target surfaces ahead of equal-length others.
    surfaces.sort_by_key(|s| core::cmp::Reverse(s.0.len()));

    let bytes = sentence.as_bytes();
    let mut out = String::with_capacity(sentence.len());
    let mut i = 0;
    let mut copied = 0;
    while i < bytes.len() {
        if !sentence.is_char_boundary(i) {
            i += 1;
            continue;
        }
        let hit = surfaces.iter().find(|(s, _)| {
            let end = i + s.len();
            end <= bytes.len()
                && sentence.is_char_boundary(end)
                && bytes[i..end].eq_ignore_ascii_case(s.as_bytes())
                && word_boundary_at(sentence, i, end)
        });
        match hit {
            Some((s, token)) => {
                out.push_str(&sentence[copied..i]);
                out.push_str(token);
                i += s.len();
                copied = i;
            }
            None => i += 1,
        }
    }
    out.push_str(&sentence[copied..]);
    out
}

/// True when `text` contains `token` delimited by anything other than word
/// characters or hyphens (so `OTHER-DRUG` does not count as `DRUG`).
pub fn contains_placeholder(text: &str, token: &str) -> bool {
    let is_tok = |c: char| c.is_alphanumeric() || c == '-';
    let mut from = 0;
    while let Some(off) = text[from..].find(token) {
        let start = from + off;
        let end = start + token.len();
        let before = text[..start].chars().next_back();
        let after = text[end..].chars().next();
        if !before.is_some_and(is_tok) && !after.is_some_and(is_tok) {
            return true;
        }
        from = end;
    }
    false
}

pub fn build_timeline(
    example: &PatientDrugExample,
    other_drugs: &[DrugLexiconEntry],
) -> DocumentTimeline {
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut docs = Vec::new();
    for (idx, raw) in example.documents.iter().enumerate() {
        let mut sentences = Vec::new();
        for sentence in split_sentences(&raw.text) {
            let replaced = substitute_mentions(sentence, &example.drug, other_drugs);
            if !contains_placeholder(&replaced, DRUG_TOKEN) {
                continue;
            }
            if seen.insert(replaced.clone()) {
                sentences.push(replaced);
            }
        }
        if !sentences.is_empty() {
            docs.push(CondensedDocument {
                timestamp: raw.timestamp,
                sentences,
                is_pseudo: false,
                origin: Origin::Document(idx),
            });
        }
    }
    DocumentTimeline { docs }
}

/// Per-document gold labels relative to the regimen interval.
pub fn label_documents(timeline: &DocumentTimeline, gold: &RegimenLabel) -> Vec<DocLabel> {
    timeline
        .docs
        .iter()
        .map(|d| label_for_date(d.timestamp, gold))
        .collect()
}

pub fn label_for_date(ts: DateStamp, gold: &RegimenLabel) -> DocLabel {
    let Some(start) = gold.start.filter(|_| gold.taken) else {
        return DocLabel::Pre;
    };
    if ts < start {
        DocLabel::Pre
    } else if gold.end.is_some_and(|end| ts >= end) {
        DocLabel::Post
    } else {
        DocLabel::Mid
    }
}
