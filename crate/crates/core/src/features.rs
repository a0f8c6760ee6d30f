//! Hashed n-gram features.
//!
//! Index of an n-gram = FNV-1a-64 over the byte `n` followed by the n tokens
//! joined with single spaces, reduced modulo `dim`. Offset basis and prime are
//! [`FNV_OFFSET`] and [`FNV_PRIME`]; model files record both.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
pub const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Tokens kept verbatim (never split on `-`, never lowercased).
pub const PLACEHOLDERS: &[&str] = &[
    "DRUG",
    "OTHER-DRUG",
    "TIME",
    "EXPLICIT-DATE",
    "MONTH-YEAR",
    "RELATIVE-DAY",
    "DURATION-AGO",
    "DURATION-FOR",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureConfig {
    pub ngram_orders: Vec<usize>,
    pub dim: usize,
    pub lowercase: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig { ngram_orders: vec![1, 2], dim: 1 << 18, lowercase: true }
    }
}

impl FeatureConfig {
    pub fn with_dim(dim: usize) -> Self {
        FeatureConfig { dim, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ngram_orders.is_empty() || self.ngram_orders.iter().any(|&n| n == 0 || n > 255) {
            return Err(Error::Config("n-gram orders must be in 1..=255".into()));
        }
        if self.dim < 2 || !self.dim.is_power_of_two() || self.dim > u32::MAX as usize {
            return Err(Error::Config("feature dim must be a power of two >= 2".into()));
        }
        Ok(())
    }
}

/// Sparse vector with strictly increasing indices and no zero weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub dim: usize,
    pub entries: Vec<(u32, f64)>,
}

impl FeatureVector {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.entries.iter().map(|(_, w)| w * w).sum())
    }

    /// Scaled to unit Euclidean norm (empty stays empty).
    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            for (_, w) in &mut self.entries {
                *w /= n;
            }
        }
        self
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, w)| dense[i as usize] * w).sum()
    }
}

pub fn fnv1a(bytes: impl IntoIterator<Item = u8>) -> u64 {
    let mut h = FNV_OFFSET;
    for b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_with(text, true)
}

/// Words are runs of alphanumerics and hyphens; placeholders survive intact,
/// everything else splits further on hyphens.
pub fn tokenize_with(text: &str, lowercase: bool) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split(|c: char| !(c.is_alphanumeric() || c == '-')) {
        if word.is_empty() {
            continue;
        }
        if PLACEHOLDERS.contains(&word) {
            out.push(word.into());
            continue;
        }
        for part in word.split('-').filter(|p| !p.is_empty()) {
            if PLACEHOLDERS.contains(&part) || !lowercase {
                out.push(part.into());
            } else {
                out.push(part.to_lowercase());
            }
        }
    }
    out
}

pub fn ngram_index(order: usize, gram: &[String], dim: usize) -> u32 {
    let mut bytes = Vec::with_capacity(1 + gram.iter().map(|t| t.len() + 1).sum::<usize>());
    bytes.push(order as u8);
    for (k, t) in gram.iter().enumerate() {
        if k > 0 {
            bytes.push(b' ');
        }
        bytes.extend_from_slice(t.as_bytes());
    }
    (fnv1a(bytes) % dim as u64) as u32
}

pub fn featurize(text: &str, config: &FeatureConfig) -> FeatureVector {
    let tokens = tokenize_with(text, config.lowercase);
    let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
    for &n in &config.ngram_orders {
        if n == 0 || tokens.len() < n {
            continue;
        }
        for gram in tokens.windows(n) {
            *counts.entry(ngram_index(n, gram, config.dim)).or_insert(0.0) += 1.0;
        }
    }
    FeatureVector { dim: config.dim, entries: counts.into_iter().collect() }
}
