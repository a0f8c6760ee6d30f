//! Rule-based temporal tagger.
//!
//! Each pattern is a small anchored matcher over the sentence bytes (ASCII
//! case-insensitive, word-bounded). The table:
//!
//! | bucket          | forms                                                      |
//! |-----------------|------------------------------------------------------------|
//! | `EXPLICIT-DATE` | `M/D/YY`, `M/D/YYYY`, `M/D`, `MonthName D(,? YYYY)?`, `YYYY-MM-DD` |
//! | `MONTH-YEAR`    | `MonthName YYYY`, `in MonthName`                           |
//! | `RELATIVE-DAY`  | `today`, `yesterday`, `last <weekday>`                     |
//! | `DURATION-AGO`  | `<n> (day\|week\|month)s? ago`                             |
//! | `DURATION-FOR`  | `for (a\|<n>) (day\|week\|month)s?`                        |
//!
//! `<n>` is 1–3 digits or a spelled number from one to twelve. Overlapping
//! candidates are resolved longest first, then leftmost.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::DocumentTimeline;
use crate::date::{DateStamp, Weekday};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TimeBucket {
    ExplicitDate,
    MonthYear,
    RelativeDay,
    DurationAgo,
    DurationFor,
}

impl TimeBucket {
    pub const ALL: [TimeBucket; 5] = [
        TimeBucket::ExplicitDate,
        TimeBucket::MonthYear,
        TimeBucket::RelativeDay,
        TimeBucket::DurationAgo,
        TimeBucket::DurationFor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TimeBucket::ExplicitDate => "EXPLICIT-DATE",
            TimeBucket::MonthYear => "MONTH-YEAR",
            TimeBucket::RelativeDay => "RELATIVE-DAY",
            TimeBucket::DurationAgo => "DURATION-AGO",
            TimeBucket::DurationFor => "DURATION-FOR",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == name)
    }

    /// Mapped date is computed relative to the document timestamp.
    pub fn is_relative(self) -> bool {
        matches!(
            self,
            TimeBucket::RelativeDay | TimeBucket::DurationAgo | TimeBucket::DurationFor
        )
    }
}

impl fmt::Display for TimeBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeExpression {
    pub doc_index: usize,
    pub sentence_index: usize,
    /// Byte offsets `[start, end)` into the sentence.
    pub span: (usize, usize),
    pub surface: String,
    pub bucket: TimeBucket,
    pub mapped_date: DateStamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    Day,
    Week,
    Month,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Year {
    Two(u32),
    Four(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Parsed {
    Numeric { month: u32, day: u32, year: Option<Year> },
    Iso { year: u32, month: u32, day: u32 },
    MonthYear { month: u32, year: u32 },
    InMonth { month: u32 },
    Today,
    Yesterday,
    LastWeekday(Weekday),
    Ago { n: u32, unit: Unit },
    For { n: u32, unit: Unit },
}

const MONTHS: &[(&str, u32)] = &[
    ("january", 1),
    ("february", 2),
    ("march", 3),
    ("april", 4),
    ("may", 5),
    ("june", 6),
    ("july", 7),
    ("august", 8),
    ("september", 9),
    ("october", 10),
    ("november", 11),
    ("december", 12),
    ("sept", 9),
    ("jan", 1),
    ("feb", 2),
    ("mar", 3),
    ("apr", 4),
    ("jun", 6),
    ("jul", 7),
    ("aug", 8),
    ("sep", 9),
    ("oct", 10),
    ("nov", 11),
    ("dec", 12),
];

const SPELLED: &[(&str, u32)] = &[
    ("one", 1),
    ("two", 2),
    ("three", 3),
    ("four", 4),
    ("five", 5),
    ("six", 6),
    ("seven", 7),
    ("eight", 8),
    ("nine", 9),
    ("ten", 10),
    ("eleven", 11),
    ("twelve", 12),
];

const UNITS: &[(&str, Unit)] = &[
    ("days", Unit::Day),
    ("day", Unit::Day),
    ("weeks", Unit::Week),
    ("week", Unit::Week),
    ("months", Unit::Month),
    ("month", Unit::Month),
];

/// Cursor helpers over ASCII bytes; all return the end offset on success.
struct Scan<'a> {
    s: &'a [u8],
}

impl Scan<'_> {
    fn at(&self, i: usize) -> Option<u8> {
        self.s.get(i).copied()
    }

    fn is_word(&self, i: usize) -> bool {
        self.at(i).is_some_and(|c| c.is_ascii_alphanumeric() || c >= 0x80)
    }

    fn word_end(&self, i: usize) -> bool {
        !self.is_word(i)
    }

    fn ws(&self, mut i: usize) -> Option<usize> {
        let start = i;
        while matches!(self.at(i), Some(b' ' | b'\t')) {
            i += 1;
        }
        (i > start).then_some(i)
    }

    /// Maximal digit run whose length is within `[min, max]`.
    fn digits(&self, i: usize, min: usize, max: usize) -> Option<(u32, usize, usize)> {
        let mut j = i;
        while self.at(j).is_some_and(|c| c.is_ascii_digit()) {
            j += 1;
        }
        let len = j - i;
        if len < min || len > max {
            return None;
        }
        let mut v = 0u32;
        for &c in &self.s[i..j] {
            v = v * 10 + u32::from(c - b'0');
        }
        Some((v, j, len))
    }

    fn lit(&self, i: usize, word: &str) -> Option<usize> {
        let end = i + word.len();
        (end <= self.s.len() && self.s[i..end].eq_ignore_ascii_case(word.as_bytes()))
            .then_some(end)
    }

    /// Whole-word literal.
    fn word(&self, i: usize, word: &str) -> Option<usize> {
        self.lit(i, word).filter(|&e| self.word_end(e))
    }

    fn one_of<T: Copy>(&self, i: usize, table: &[(&str, T)]) -> Option<(T, usize)> {
        table
            .iter()
            .find_map(|&(w, v)| self.word(i, w).map(|e| (v, e)))
    }

    fn month(&self, i: usize) -> Option<(u32, usize)> {
        let (m, e) = self.one_of(i, MONTHS)?;
        // lowercase "may" is almost always the verb
        if m == 5 && e - i == 3 && !self.at(i).is_some_and(|c| c.is_ascii_uppercase()) {
            return None;
        }
        Some((m, e))
    }

    fn weekday(&self, i: usize) -> Option<(Weekday, usize)> {
        Weekday::ALL.iter().find_map(|&w| self.word(i, w.name()).map(|e| (w, e)))
    }

    fn count(&self, i: usize) -> Option<(u32, usize)> {
        if let Some((v, e, _)) = self.digits(i, 1, 3) {
            return self.word_end(e).then_some((v, e));
        }
        self.one_of(i, SPELLED)
    }

    fn unit(&self, i: usize) -> Option<(Unit, usize)> {
        self.one_of(i, UNITS)
    }

    fn numeric_end(&self, e: usize) -> bool {
        self.word_end(e) && self.at(e) != Some(b'/') && self.at(e) != Some(b'-')
    }
}

fn match_numeric(sc: &Scan, i: usize) -> Option<(Parsed, usize)> {
    let (month, e, _) = sc.digits(i, 1, 2)?;
    let e = sc.lit(e, "/")?;
    let (day, e, _) = sc.digits(e, 1, 2)?;
    if sc.at(e) == Some(b'/') {
        let (y, ye, len) = sc.digits(e + 1, 2, 4)?;
        let year = match len {
            2 => Year::Two(y),
            4 => Year::Four(y),
            _ => return None,
        };
        return sc
            .numeric_end(ye)
            .then_some((Parsed::Numeric { month, day, year: Some(year) }, ye));
    }
    sc.numeric_end(e).then_some((Parsed::Numeric { month, day, year: None }, e))
}

fn match_iso(sc: &Scan, i: usize) -> Option<(Parsed, usize)> {
    let (year, e, _) = sc.digits(i, 4, 4)?;
    let e = sc.lit(e, "-")?;
    let (month, e, _) = sc.digits(e, 2, 2)?;
    let e = sc.lit(e, "-")?;
    let (day, e, _) = sc.digits(e, 2, 2)?;
    sc.numeric_end(e).then_some((Parsed::Iso { year, month, day }, e))
}

fn match_month_day(sc: &Scan, i: usize) -> Option<(Parsed, usize)> {
    let (month, e) = sc.month(i)?;
    let e = sc.ws(e)?;
    let (day, mut e, _) = sc.digits(e, 1, 2)?;
    for suffix in ["st", "nd", "rd", "th"] {
        if let Some(se) = sc.lit(e, suffix) {
            e = se;
            break;
        }
    }
    if !sc.word_end(e) {
        return None;
    }
    let mut year = None;
    let mut ye = e;
    if sc.at(ye) == Some(b',') {
        ye += 1;
    }
    if let Some(ws) = sc.ws(ye) {
        if let Some((y, yend, _)) = sc.digits(ws, 4, 4) {
            if sc.numeric_end(yend) {
                year = Some(Year::Four(y));
                e = yend;
            }
        }
    }
    Some((Parsed::Numeric { month, day, year }, e))
}

fn match_month_year(sc: &Scan, i: usize) -> Option<(Parsed, usize)> {
    let (month, e) = sc.month(i)?;
    let e = sc.ws(e)?;
    let (year, e, _) = sc.digits(e, 4, 4)?;
    sc.numeric_end(e).then_some((Parsed::MonthYear { month, year }, e))
}

fn match_in_month(sc: &Scan, i: usize) -> Option<(Parsed, usize)> {
    let e = sc.word(i, "in")?;
    let e = sc.ws(e)?;
    let (month, e) = sc.month(e)?;
    // "in November 27" belongs to the day form
    if let Some(after) = sc.ws(e) {
        if sc.at(after).is_some_and(|c| c.is_ascii_digit()) {
            return None;
        }
    }
    Some((Parsed::InMonth { month }, e))
}

fn match_relative_day(sc: &Scan, i: usize) -> Option<(Parsed, usize)> {
    if let Some(e) = sc.word(i, "today") {
        return Some((Parsed::Today, e));
    }
    if let Some(e) = sc.word(i, "yesterday") {
        return Some((Parsed::Yesterday, e));
    }
    let e = sc.word(i, "last")?;
    let e = sc.ws(e)?;
    let (w, e) = sc.weekday(e)?;
    Some((Parsed::LastWeekday(w), e))
}

fn match_ago(sc: &Scan, i: usize) -> Option<(Parsed, usize)> {
    let (n, e) = sc.count(i)?;
    let e = sc.ws(e)?;
    let (unit, e) = sc.unit(e)?;
    let e = sc.ws(e)?;
    let e = sc.word(e, "ago")?;
    Some((Parsed::Ago { n, unit }, e))
}

fn match_for(sc: &Scan, i: usize) -> Option<(Parsed, usize)> {
    let e = sc.word(i, "for")?;
    let e = sc.ws(e)?;
    let (n, e) = match sc.word(e, "a") {
        Some(ae) => (1, ae),
        None => sc.count(e)?,
    };
    let e = sc.ws(e)?;
    let (unit, e) = sc.unit(e)?;
    Some((Parsed::For { n, unit }, e))
}

type Matcher = fn(&Scan, usize) -> Option<(Parsed, usize)>;

const PATTERNS: &[(TimeBucket, Matcher)] = &[
    (TimeBucket::ExplicitDate, match_numeric),
    (TimeBucket::ExplicitDate, match_iso),
    (TimeBucket::ExplicitDate, match_month_day),
    (TimeBucket::MonthYear, match_month_year),
    (TimeBucket::MonthYear, match_in_month),
    (TimeBucket::RelativeDay, match_relative_day),
    (TimeBucket::DurationAgo, match_ago),
    (TimeBucket::DurationFor, match_for),
];

fn expand_year(y: Year) -> i32 {
    match y {
        Year::Two(v) if v < 70 => 2000 + v as i32,
        Year::Two(v) => 1900 + v as i32,
        Year::Four(v) => v as i32,
    }
}

fn small(v: u32) -> Option<u8> {
    u8::try_from(v).ok()
}

fn resolve(parsed: Parsed, anchor: DateStamp) -> Result<DateStamp> {
    let invalid = |y: i32, m: u32, d: u32| Error::InvalidDate {
        year: y,
        month: small(m).unwrap_or(0),
        day: small(d).unwrap_or(0),
    };
    let date = |y: i32, m: u32, d: u32| match (small(m), small(d)) {
        (Some(m8), Some(d8)) => DateStamp::new(y, m8, d8),
        _ => Err(invalid(y, m, d)),
    };
    Ok(match parsed {
        Parsed::Numeric { month, day, year: Some(y) } => date(expand_year(y), month, day)?,
        Parsed::Numeric { month, day, year: None } => {
            // most recent occurrence on or before the anchor; eight years
            // back always reaches a leap year
            (0..=8)
                .filter_map(|back| date(anchor.year() - back, month, day).ok())
                .find(|d| *d <= anchor)
                .ok_or_else(|| invalid(anchor.year(), month, day))?
        }
        Parsed::Iso { year, month, day } => date(year as i32, month, day)?,
        Parsed::MonthYear { month, year } => date(year as i32, month, 1)?,
        Parsed::InMonth { month } => {
            let year = if month <= u32::from(anchor.month()) {
                anchor.year()
            } else {
                anchor.year() - 1
            };
            date(year, month, 1)?
        }
        Parsed::Today => anchor,
        Parsed::Yesterday => anchor.add_days(-1),
        Parsed::LastWeekday(w) => {
            let back = (anchor.weekday().index() + 7 - w.index()) % 7;
            anchor.add_days(-i64::from(if back == 0 { 7 } else { back }))
        }
        Parsed::Ago { n, unit } | Parsed::For { n, unit } => {
            let n = i64::from(n);
            match unit {
                Unit::Day => anchor.add_days(-n),
                Unit::Week => anchor.add_days(-7 * n),
                Unit::Month => anchor.add_months(-n),
            }
        }
    })
}

/// Resolves a surface string already known to belong to `bucket`.
pub fn resolve_mapped_date(surface: &str, bucket: TimeBucket, anchor: DateStamp) -> Result<DateStamp> {
    let sc = Scan { s: surface.as_bytes() };
    let parsed = PATTERNS
        .iter()
        .filter(|(b, _)| *b == bucket)
        .find_map(|(_, m)| m(&sc, 0).filter(|(_, e)| *e == surface.len()))
        .map(|(p, _)| p)
        .ok_or_else(|| Error::PatternMismatch { surface: surface.into(), bucket: bucket.name() })?;
    resolve(parsed, anchor)
}

/// A tagged span within one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SentenceMatch {
    pub start: usize,
    pub end: usize,
    pub bucket: TimeBucket,
    pub mapped_date: DateStamp,
}

/// Tags one sentence. Candidates that resolve to an impossible date are
/// discarded before overlap resolution.
pub fn tag_sentence(sentence: &str, anchor: DateStamp) -> Vec<SentenceMatch> {
    let sc = Scan { s: sentence.as_bytes() };
    let mut candidates = Vec::new();
    for i in 0..sentence.len() {
        if !sentence.is_char_boundary(i) || (i > 0 && sc.is_word(i - 1)) {
            continue;
        }
        let after_slash = i > 0 && sc.at(i - 1) == Some(b'/');
        for &(bucket, matcher) in PATTERNS {
            let Some((parsed, end)) = matcher(&sc, i) else { continue };
            if after_slash && sc.at(i).is_some_and(|c| c.is_ascii_digit()) {
                continue;
            }
            if let Ok(mapped_date) = resolve(parsed, anchor) {
                candidates.push(SentenceMatch { start: i, end, bucket, mapped_date });
            }
        }
    }
    candidates.sort_by(|a, b| (b.end - b.start).cmp(&(a.end - a.start)).then(a.start.cmp(&b.start)));
    let mut chosen: Vec<SentenceMatch> = Vec::new();
    for c in candidates {
        if chosen.iter().all(|k| c.end <= k.start || c.start >= k.end) {
            chosen.push(c);
        }
    }
    chosen.sort_by_key(|c| c.start);
    chosen
}

/// Tags every sentence of every document, in document then span order.
pub fn tag_time_expressions(timeline: &DocumentTimeline) -> Vec<TimeExpression> {
    let mut out = Vec::new();
    for (doc_index, doc) in timeline.docs.iter().enumerate() {
        for (sentence_index, sentence) in doc.sentences.iter().enumerate() {
            for m in tag_sentence(sentence, doc.timestamp) {
                out.push(TimeExpression {
                    doc_index,
                    sentence_index,
                    span: (m.start, m.end),
                    surface: sentence[m.start..m.end].into(),
                    bucket: m.bucket,
                    mapped_date: m.mapped_date,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn d(s: &str) -> DateStamp {
        s.parse().unwrap()
    }

    fn one(sentence: &str, anchor: &str) -> (String, TimeBucket, DateStamp) {
        let m = tag_sentence(sentence, d(anchor));
        assert_eq!(m.len(), 1, "{sentence:?} -> {m:?}");
        (sentence[m[0].start..m[0].end].into(), m[0].bucket, m[0].mapped_date)
    }

    #[test]
    fn motivating_sentences() {
        let (s, b, m) = one("Patient started DRUG on 12/8/18.", "2018-12-15");
        assert_eq!((s.as_str(), b, m), ("12/8/18", TimeBucket::ExplicitDate, d("2018-12-08")));
        assert!(tag_sentence("Patient tolerating DRUG well.", d("2018-12-15")).is_empty());
        let (s, b, m) = one("Patient discontinued DRUG two weeks ago.", "2019-01-28");
        assert_eq!((s.as_str(), b, m), ("two weeks ago", TimeBucket::DurationAgo, d("2019-01-14")));
        let (_, b, m) = one("Patient has been on DRUG for a week.", "2018-12-15");
        assert_eq!((b, m), (TimeBucket::DurationFor, d("2018-12-08")));
    }

    #[test]
    fn resolve_examples() {
        let r = |s, b, a| resolve_mapped_date(s, b, d(a)).unwrap();
        assert_eq!(r("for a week", TimeBucket::DurationFor, "2018-12-15"), d("2018-12-08"));
        assert_eq!(r("yesterday", TimeBucket::RelativeDay, "2019-01-28"), d("2019-01-27"));
        assert_eq!(r("November 2018", TimeBucket::MonthYear, "2019-01-05"), d("2018-11-01"));
        assert_eq!(r("in November", TimeBucket::MonthYear, "2019-01-05"), d("2018-11-01"));
        assert_eq!(r("12/8", TimeBucket::ExplicitDate, "2019-01-05"), d("2018-12-08"));
        assert_eq!(r("2/29", TimeBucket::ExplicitDate, "2019-01-05"), d("2016-02-29"));
        assert!(matches!(
            resolve_mapped_date("today", TimeBucket::ExplicitDate, d("2019-01-05")),
            Err(Error::PatternMismatch { .. })
        ));
        assert!(resolve_mapped_date("2/30/19", TimeBucket::ExplicitDate, d("2019-01-05")).is_err());
    }

    #[test]
    fn longest_then_leftmost() {
        let m = tag_sentence("Seen in November 2018 and on November 27, 2018.", d("2019-01-05"));
        let buckets: Vec<_> = m.iter().map(|x| x.bucket).collect();
        assert_eq!(buckets, vec![TimeBucket::MonthYear, TimeBucket::ExplicitDate]);
        assert_eq!(m[0].mapped_date, d("2018-11-01"));
        assert_eq!(m[1].mapped_date, d("2018-11-27"));
        let (s, _, _) = one("started in November 27", "2019-01-05");
        assert_eq!(s, "November 27");
    }

    #[test]
    fn non_matches() {
        for s in [
            "BP 120/80 stable",
            "Takes 50 mg daily.",
            "may start DRUG",
            "13/45/18",
            "ratio 1/2/3/4",
            "for weeks",
            "lastMonday",
            "",
            "ünïcødé 12/8/18x",
        ] {
            let m = tag_sentence(s, d("2019-01-05"));
            assert!(m.is_empty(), "{s:?} -> {m:?}");
        }
    }

    #[test]
    fn multibyte_text_is_safe() {
        let m = tag_sentence("Début – 12/8/18 – fin", d("2019-01-05"));
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].mapped_date, d("2018-12-08"));
    }
}
