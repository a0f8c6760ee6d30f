//! Drug lexicons and whole-word, case-insensitive surface matching.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

const RCC: &str = include_str!("../fixtures/lexicon_rcc.tsv");
const NSCLC: &str = include_str!("../fixtures/lexicon_nsclc.tsv");
const COMMON: &str = include_str!("../fixtures/lexicon_common.tsv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrugLexiconEntry {
    pub canonical_name: String,
    pub synonyms: Vec<String>,
}

impl DrugLexiconEntry {
    pub fn new(canonical_name: impl Into<String>, synonyms: Vec<String>) -> Result<Self> {
        let canonical_name = canonical_name.into();
        let synonyms: Vec<String> = synonyms
            .into_iter()
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        if synonyms.is_empty() {
            return Err(Error::Invariant(alloc::format!(
                "drug {canonical_name:?} has no synonyms"
            )));
        }
        Ok(DrugLexiconEntry { canonical_name, synonyms })
    }

    /// True when any synonym occurs in `text` as a whole word.
    pub fn is_mentioned_in(&self, text: &str) -> bool {
        self.synonyms.iter().any(|s| find_word(text, s, 0).is_some())
    }
}

/// Which built-in drug list to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LexiconKind {
    Rcc,
    Nsclc,
}

impl LexiconKind {
    pub fn name(self) -> &'static str {
        match self {
            LexiconKind::Rcc => "rcc",
            LexiconKind::Nsclc => "nsclc",
        }
    }

    pub fn entries(self) -> Vec<DrugLexiconEntry> {
        let src = match self {
            LexiconKind::Rcc => RCC,
            LexiconKind::Nsclc => NSCLC,
        };
        parse_lexicon(src).expect("built-in lexicon is well formed")
    }
}

/// Medications that are not targets of either built-in list.
pub fn common_drugs() -> Vec<DrugLexiconEntry> {
    parse_lexicon(COMMON).expect("built-in lexicon is well formed")
}

/// Every known drug except `target`, for OTHER-DRUG substitution.
pub fn other_drugs_for(target: &DrugLexiconEntry) -> Vec<DrugLexiconEntry> {
    let mut out: Vec<DrugLexiconEntry> = Vec::new();
    for entry in LexiconKind::Rcc
        .entries()
        .into_iter()
        .chain(LexiconKind::Nsclc.entries())
        .chain(common_drugs())
    {
        if entry.canonical_name.eq_ignore_ascii_case(&target.canonical_name)
            || out.iter().any(|e| e.canonical_name == entry.canonical_name)
        {
            continue;
        }
        out.push(entry);
    }
    out
}

/// Parses `canonical<TAB>syn,syn,...` lines; `#` starts a comment line.
pub fn parse_lexicon(src: &str) -> Result<Vec<DrugLexiconEntry>> {
    let mut out = Vec::new();
    for (lineno, line) in src.lines().enumerate() {
        let line = line.trim_end();
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, syns) = line.split_once('\t').ok_or_else(|| {
            Error::Invariant(alloc::format!("lexicon line {}: missing tab", lineno + 1))
        })?;
        let synonyms = syns.split(',').map(|s| s.to_string()).collect();
        out.push(DrugLexiconEntry::new(name.trim(), synonyms)?);
    }
    Ok(out)
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Leftmost whole-word, ASCII-case-insensitive occurrence of `needle` at or
/// after byte `from`.
pub fn find_word(haystack: &str, needle: &str, from: usize) -> Option<usize> {
    if needle.is_empty() {
        return None;
    }
    let hb = haystack.as_bytes();
    let nb = needle.as_bytes();
    let mut i = from;
    while i + nb.len() <= hb.len() {
        if haystack.is_char_boundary(i) && hb[i..i + nb.len()].eq_ignore_ascii_case(nb) {
            let end = i + nb.len();
            if haystack.is_char_boundary(end) && word_boundary_at(haystack, i, end) {
                return Some(i);
            }
        }
        i += 1;
    }
    None
}

pub(crate) fn word_boundary_at(text: &str, start: usize, end: usize) -> bool {
    let before = text[..start].chars().next_back();
    let after = text[end..].chars().next();
    !before.is_some_and(is_word_char) && !after.is_some_and(is_word_char)
}
