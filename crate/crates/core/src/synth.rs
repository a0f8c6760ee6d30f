//! Seeded synthetic corpus generator.
//!
//! Each example is a grid of visit dates with one note per visit. Notes are
//! assembled from the template pools in `fixtures/templates.tsv`; the gold
//! regimen decides which pools a visit draws from. Style profiles change
//! template frequencies, date formats and number spelling.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{label_for_date, PatientDrugExample, RawDocument, RegimenLabel};
use crate::date::DateStamp;
use crate::error::{Error, Result};
use crate::features::fnv1a;
use crate::lexicon::{other_drugs_for, DrugLexiconEntry, LexiconKind};
use crate::seqlabel::DocLabel;
use crate::temporal::tag_sentence;

const TEMPLATES: &str = include_str!("../fixtures/templates.tsv");

const MONTH_NAMES: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September", "October",
    "November", "December",
];

const SPELLED: [&str; 13] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven", "twelve",
];

/// Distractor dates keep at least this many days from both gold endpoints.
const DISTRACTOR_MARGIN: u64 = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LexiconChoice {
    Builtin(LexiconKind),
    Custom(Vec<DrugLexiconEntry>),
}

impl LexiconChoice {
    pub fn entries(&self) -> Vec<DrugLexiconEntry> {
        match self {
            LexiconChoice::Builtin(k) => k.entries(),
            LexiconChoice::Custom(v) => v.clone(),
        }
    }

    fn stream(&self) -> u64 {
        match self {
            LexiconChoice::Builtin(LexiconKind::Rcc) => 0,
            LexiconChoice::Builtin(LexiconKind::Nsclc) => 1,
            LexiconChoice::Custom(_) => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub n_examples: usize,
    pub taken_fraction: f64,
    pub explicit_start_prob: f64,
    /// Marginal probability of an end cue among ended regimens.
    pub explicit_end_prob: f64,
    /// Probability of an end cue when the end falls between visits; the
    /// on-visit probability is derived so the marginal stays at
    /// `explicit_end_prob`.
    pub off_visit_explicit_end_prob: f64,
    pub start_on_visit_prob: f64,
    pub end_on_visit_prob: f64,
    pub ongoing_prob: f64,
    pub copy_forward_prob: f64,
    pub distractor_prob: f64,
    pub visits_min: usize,
    pub visits_max: usize,
    pub lexicon: LexiconChoice,
    pub style_profiles: usize,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n_examples: 2000,
            taken_fraction: 0.53,
            explicit_start_prob: 0.5,
            explicit_end_prob: 0.5,
            off_visit_explicit_end_prob: 0.1,
            start_on_visit_prob: 0.55,
            end_on_visit_prob: 0.77,
            ongoing_prob: 0.3,
            copy_forward_prob: 0.3,
            distractor_prob: 0.3,
            visits_min: 4,
            visits_max: 12,
            lexicon: LexiconChoice::Builtin(LexiconKind::Rcc),
            style_profiles: 5,
            seed: 7,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("taken_fraction", self.taken_fraction),
            ("explicit_start_prob", self.explicit_start_prob),
            ("explicit_end_prob", self.explicit_end_prob),
            ("off_visit_explicit_end_prob", self.off_visit_explicit_end_prob),
            ("start_on_visit_prob", self.start_on_visit_prob),
            ("end_on_visit_prob", self.end_on_visit_prob),
            ("ongoing_prob", self.ongoing_prob),
            ("copy_forward_prob", self.copy_forward_prob),
            ("distractor_prob", self.distractor_prob),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if self.n_examples == 0 {
            return Err(Error::Config("n_examples must be at least 1".into()));
        }
        if self.visits_min < 3 || self.visits_min > self.visits_max {
            return Err(Error::Config(format!(
                "visit range {}..={} invalid (minimum 3)",
                self.visits_min, self.visits_max
            )));
        }
        if self.style_profiles == 0 {
            return Err(Error::Config("style_profiles must be at least 1".into()));
        }
        if self.lexicon.entries().is_empty() {
            return Err(Error::Config("lexicon is empty".into()));
        }
        Ok(())
    }

    /// End-cue probability for regimens that end on a visit date.
    pub fn on_visit_explicit_end_prob(&self) -> f64 {
        if self.end_on_visit_prob == 0.0 {
            return self.explicit_end_prob;
        }
        let off = (1.0 - self.end_on_visit_prob) * self.off_visit_explicit_end_prob;
        ((self.explicit_end_prob - off) / self.end_on_visit_prob).clamp(0.0, 1.0)
    }

    fn off_visit_end_prob(&self) -> f64 {
        if self.end_on_visit_prob == 0.0 {
            self.explicit_end_prob
        } else {
            self.off_visit_explicit_end_prob
        }
    }
}

/// Template pools keyed by category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplatePools {
    pools: BTreeMap<String, Vec<String>>,
}

pub const TEMPLATE_CATEGORIES: &[&str] = &[
    "pre",
    "notaken",
    "start_implicit",
    "start_recent",
    "start_date",
    "start_relday",
    "start_ago",
    "start_for",
    "mid",
    "end_implicit",
    "end_recent",
    "end_date",
    "end_relday",
    "end_ago",
    "post",
    "distractor_future",
    "distractor_past",
    "other",
    "filler",
];

impl TemplatePools {
    /// Parses `category<TAB>template` lines. Every known category must be
    /// present and every template must start with an uppercase letter.
    pub fn parse(src: &str) -> Result<Self> {
        let mut pools: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (lineno, line) in src.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (cat, tpl) = line
                .split_once('\t')
                .ok_or_else(|| Error::Config(format!("template line {}: missing tab", lineno + 1)))?;
            if !TEMPLATE_CATEGORIES.contains(&cat) {
                return Err(Error::Config(format!("template line {}: unknown category {cat:?}", lineno + 1)));
            }
            if !tpl.starts_with(|c: char| c.is_ascii_uppercase()) {
                return Err(Error::Config(format!(
                    "template line {}: must start with an uppercase letter",
                    lineno + 1
                )));
            }
            let needs_time = cat.starts_with("distractor") || matches!(cat, "start_date" | "start_relday" | "start_ago" | "start_for" | "end_date" | "end_relday" | "end_ago");
            if needs_time != tpl.contains("{T}") {
                return Err(Error::Config(format!("template line {}: {{T}} placement", lineno + 1)));
            }
            if cat != "filler" && !tpl.contains("{DRUG}") {
                return Err(Error::Config(format!("template line {}: missing {{DRUG}}", lineno + 1)));
            }
            pools.entry(cat.to_string()).or_default().push(tpl.to_string());
        }
        for cat in TEMPLATE_CATEGORIES {
            if !pools.contains_key(*cat) {
                return Err(Error::Config(format!("no templates for category {cat}")));
            }
        }
        Ok(TemplatePools { pools })
    }

    pub fn builtin() -> Self {
        Self::parse(TEMPLATES).expect("built-in templates are well formed")
    }

    pub fn get(&self, category: &str) -> &[String] {
        self.pools.get(category).map(Vec::as_slice).unwrap_or(&[])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DateFormat {
    /// 12/8/18
    SlashShort,
    /// 12/8/2018
    SlashLong,
    /// December 8, 2018
    MonthDayYear,
    /// 2018-12-08
    Iso,
    /// December 8th (year inferred)
    MonthDay,
}

const FORMATS: [DateFormat; 5] = [
    DateFormat::SlashShort,
    DateFormat::MonthDayYear,
    DateFormat::Iso,
    DateFormat::MonthDay,
    DateFormat::SlashLong,
];

#[derive(Debug, Clone, Copy)]
struct Profile {
    id: usize,
    date_format: DateFormat,
    spell_numbers: bool,
}

impl Profile {
    fn new(id: usize) -> Self {
        Profile { id, date_format: FORMATS[id % FORMATS.len()], spell_numbers: id % 2 == 1 }
    }

    /// Deterministic per-profile template weight in 1..=4.
    fn weight(&self, category: &str, idx: usize) -> u64 {
        let key = format!("{}:{category}:{idx}", self.id);
        1 + fnv1a(key.bytes()) % 4
    }
}

fn ordinal(day: u8) -> String {
    let suffix = match (day % 10, day % 100) {
        (1, n) if n != 11 => "st",
        (2, n) if n != 12 => "nd",
        (3, n) if n != 13 => "rd",
        _ => "th",
    };
    format!("{day}{suffix}")
}

fn render_date(d: DateStamp, fmt: DateFormat) -> String {
    let month = MONTH_NAMES[usize::from(d.month()) - 1];
    match fmt {
        DateFormat::SlashShort => format!("{}/{}/{:02}", d.month(), d.day(), d.year().rem_euclid(100)),
        DateFormat::SlashLong => format!("{}/{}/{}", d.month(), d.day(), d.year()),
        DateFormat::MonthDayYear => format!("{month} {}, {}", d.day(), d.year()),
        DateFormat::Iso => d.to_string(),
        DateFormat::MonthDay => format!("{month} {}", ordinal(d.day())),
    }
}

fn count_word(n: u32, unit: &str, spell: bool) -> String {
    let plural = if n == 1 { "" } else { "s" };
    if spell && n <= 12 {
        format!("{} {unit}{plural}", SPELLED[n as usize])
    } else {
        format!("{n} {unit}{plural}")
    }
}

struct Gen<'a> {
    rng: ChaCha8Rng,
    templates: &'a TemplatePools,
    config: &'a GenConfig,
}

/// Regimen layout over a visit grid.
#[derive(Debug, Clone)]
struct Plan {
    visits: Vec<DateStamp>,
    gold: RegimenLabel,
    /// First visit on or after the start.
    start_visit: Option<usize>,
    /// First visit on or after the end.
    end_visit: Option<usize>,
    explicit_start: bool,
    explicit_end: bool,
}

impl Gen<'_> {
    fn pick_template(&mut self, category: &str, profile: &Profile) -> String {
        let pool = self.templates.get(category);
        let total: u64 = (0..pool.len()).map(|i| profile.weight(category, i)).sum();
        let mut ticket = self.rng.random_range(0..total);
        for (i, t) in pool.iter().enumerate() {
            let w = profile.weight(category, i);
            if ticket < w {
                return t.clone();
            }
            ticket -= w;
        }
        unreachable!("ticket below total weight")
    }

    fn surface(&mut self, drug: &DrugLexiconEntry) -> String {
        drug.synonyms.choose(&mut self.rng).expect("synonyms non-empty").clone()
    }

    fn fill(&mut self, template: &str, drug: &DrugLexiconEntry, others: &[DrugLexiconEntry], time: &str) -> String {
        let mut out = template.replace("{DRUG}", &self.surface(drug));
        if out.contains("{OTHER}") {
            let other = others.choose(&mut self.rng).expect("other drugs non-empty");
            let s = self.surface(other);
            out = out.replace("{OTHER}", &s);
        }
        out.replace("{T}", time)
    }

    fn plan(&mut self) -> Plan {
        let c = self.config;
        let k = self.rng.random_range(c.visits_min..=c.visits_max);
        let base = DateStamp::new(2012, 1, 1).expect("valid").add_days(self.rng.random_range(0..3000));
        let mut visits = vec![base];
        for _ in 1..k {
            let gap = self.rng.random_range(14..=42);
            visits.push(visits.last().expect("non-empty").add_days(gap));
        }
        if !self.rng.random_bool(c.taken_fraction) {
            return Plan {
                visits,
                gold: RegimenLabel::not_taken(),
                start_visit: None,
                end_visit: None,
                explicit_start: false,
                explicit_end: false,
            };
        }
        let between = |rng: &mut ChaCha8Rng, a: DateStamp, b: DateStamp| {
            a.add_days(rng.random_range(1..a.days_until(b)))
        };
        let (start, m) = if self.rng.random_bool(c.start_on_visit_prob) {
            let i = self.rng.random_range(1..=k - 2);
            (visits[i], i)
        } else {
            let i = self.rng.random_range(0..=k - 2);
            (between(&mut self.rng, visits[i], visits[i + 1]), i + 1)
        };
        let explicit_start = self.rng.random_bool(c.explicit_start_prob);
        let ongoing = m == k - 1 || self.rng.random_bool(c.ongoing_prob);
        let (end, end_visit, explicit_end) = if ongoing {
            (None, None, false)
        } else if self.rng.random_bool(c.end_on_visit_prob) {
            let j = self.rng.random_range(m + 1..=k - 1);
            (Some(visits[j]), Some(j), self.rng.random_bool(c.on_visit_explicit_end_prob()))
        } else {
            let j = self.rng.random_range(m..=k - 2);
            let e = between(&mut self.rng, visits[j], visits[j + 1]);
            (Some(e), Some(j + 1), self.rng.random_bool(c.off_visit_end_prob()))
        };
        Plan {
            visits,
            gold: RegimenLabel::taken(start, end).expect("start precedes end by construction"),
            start_visit: Some(m),
            end_visit,
            explicit_start,
            explicit_end,
        }
    }

    /// A surface that resolves to `target` from `anchor` under `bucket`'s
    /// category, or `None` when the offset has no such form.
    fn time_surface(&mut self, kind: &str, target: DateStamp, anchor: DateStamp, profile: &Profile) -> Option<String> {
        let back = target.days_until(anchor);
        let spell = profile.spell_numbers && self.rng.random_bool(0.5);
        match kind {
            "date" => Some(render_date(target, profile.date_format)),
            "relday" => match back {
                0 => Some("today".into()),
                1 if self.rng.random_bool(0.5) => Some("yesterday".into()),
                1..=7 => Some(format!("last {}", target.weekday().name())),
                _ => None,
            },
            "ago" if back > 0 => {
                if back % 7 == 0 && self.rng.random_bool(0.6) {
                    Some(format!("{} ago", count_word((back / 7) as u32, "week", spell)))
                } else {
                    Some(format!("{} ago", count_word(back as u32, "day", spell)))
                }
            }
            "for" if back > 0 => {
                if back == 7 {
                    Some("for a week".into())
                } else if back % 7 == 0 && self.rng.random_bool(0.6) {
                    Some(format!("for {}", count_word((back / 7) as u32, "week", spell)))
                } else {
                    Some(format!("for {}", count_word(back as u32, "day", spell)))
                }
            }
            _ => None,
        }
    }

    /// Sentence whose single tagged expression maps to `target`.
    #[allow(clippy::too_many_arguments)]
    fn cue(
        &mut self,
        prefix: &str,
        kinds: &[&str],
        target: DateStamp,
        anchor: DateStamp,
        drug: &DrugLexiconEntry,
        others: &[DrugLexiconEntry],
        profile: &Profile,
    ) -> String {
        let mut options: Vec<(&str, String)> = Vec::new();
        for &kind in kinds {
            if let Some(s) = self.time_surface(kind, target, anchor, profile) {
                options.push((kind, s));
            }
        }
        let (kind, surface) = options.choose(&mut self.rng).expect("date form always available").clone();
        let template = self.pick_template(&format!("{prefix}_{kind}"), profile);
        let sentence = self.fill(&template, drug, others, &surface);
        let tags = tag_sentence(&sentence, anchor);
        if tags.len() == 1 && tags[0].mapped_date == target {
            return sentence;
        }
        // year-less forms can resolve a year early near new year; fall back
        let template = self.pick_template(&format!("{prefix}_date"), profile);
        let sentence = self.fill(&template, drug, others, &render_date(target, DateFormat::SlashLong));
        debug_assert!(tag_sentence(&sentence, anchor).iter().any(|t| t.mapped_date == target));
        sentence
    }

    fn distractor(
        &mut self,
        anchor: DateStamp,
        gold: &RegimenLabel,
        drug: &DrugLexiconEntry,
        others: &[DrugLexiconEntry],
        profile: &Profile,
    ) -> Option<String> {
        let period = label_for_date(anchor, gold);
        for _ in 0..4 {
            let future = self.rng.random_bool(0.5);
            let date = if future {
                anchor.add_days(self.rng.random_range(10..=120))
            } else {
                anchor.add_days(-self.rng.random_range(10..=200))
            };
            let surface = if self.rng.random_bool(0.3) {
                format!("{} {}", MONTH_NAMES[usize::from(date.month()) - 1], date.year())
            } else if future && profile.date_format == DateFormat::MonthDay {
                render_date(date, DateFormat::SlashLong)
            } else {
                render_date(date, profile.date_format)
            };
            let category = if future { "distractor_future" } else { "distractor_past" };
            let template = self.pick_template(category, profile);
            let sentence = self.fill(&template, drug, others, &surface);
            let tags = tag_sentence(&sentence, anchor);
            let [tag] = tags.as_slice() else { continue };
            let mapped = tag.mapped_date;
            let far = [gold.start, gold.end]
                .into_iter()
                .flatten()
                .all(|e| mapped.abs_diff(e) >= DISTRACTOR_MARGIN);
            if !gold.taken || (far && label_for_date(mapped, gold) == period) {
                return Some(sentence);
            }
        }
        None
    }

    fn notes(
        &mut self,
        plan: &Plan,
        drug: &DrugLexiconEntry,
        others: &[DrugLexiconEntry],
        profile: &Profile,
    ) -> Vec<RawDocument> {
        let c = self.config;
        let gold = plan.gold;
        let mut notes: Vec<Vec<String>> = Vec::with_capacity(plan.visits.len());
        let mut mentioned = false;
        for (i, &ts) in plan.visits.iter().enumerate() {
            let period = label_for_date(ts, &gold);
            let mut s: Vec<String> = Vec::new();
            let add = |g: &mut Self, cat: &str| {
                let t = g.pick_template(cat, profile);
                g.fill(&t, drug, others, "")
            };
            if !gold.taken {
                if self.rng.random_bool(0.6) {
                    let cat = if self.rng.random_bool(0.5) { "pre" } else { "notaken" };
                    s.push(add(self, cat));
                }
            } else if Some(i) == plan.start_visit {
                let start = gold.start.expect("taken");
                let on_visit = start == ts;
                if plan.explicit_start {
                    let kinds: &[&str] = if on_visit { &["date", "relday"] } else { &["date", "relday", "ago", "for"] };
                    s.push(self.cue("start", kinds, start, ts, drug, others, profile));
                } else {
                    s.push(add(self, if on_visit { "start_implicit" } else { "start_recent" }));
                }
                if self.rng.random_bool(0.5) {
                    s.push(add(self, "mid"));
                }
            } else if Some(i) == plan.end_visit {
                let end = gold.end.expect("ended regimen");
                let on_visit = end == ts;
                if plan.explicit_end {
                    s.push(self.cue("end", &["date", "relday", "ago"], end, ts, drug, others, profile));
                } else {
                    s.push(add(self, if on_visit { "end_implicit" } else { "end_recent" }));
                }
            } else {
                match period {
                    DocLabel::Pre if self.rng.random_bool(0.5) => s.push(add(self, "pre")),
                    DocLabel::Mid if self.rng.random_bool(0.7) => {
                        let n = self.rng.random_range(1..=2);
                        for _ in 0..n {
                            s.push(add(self, "mid"));
                        }
                    }
                    DocLabel::Post if self.rng.random_bool(0.6) => s.push(add(self, "post")),
                    _ => {}
                }
            }
            if self.rng.random_bool(c.distractor_prob) {
                if let Some(d) = self.distractor(ts, &gold, drug, others, profile) {
                    s.push(d);
                }
            }
            if self.rng.random_bool(0.3) {
                s.push(add(self, "other"));
            }
            mentioned |= !s.is_empty();
            for _ in 0..self.rng.random_range(1..=2) {
                s.push(add(self, "filler"));
            }
            if i > 0 && label_for_date(plan.visits[i - 1], &gold) == period && self.rng.random_bool(c.copy_forward_prob) {
                let prev: &Vec<String> = &notes[i - 1];
                if let Some(line) = prev.choose(&mut self.rng) {
                    s.push(line.clone());
                }
            }
            s.shuffle(&mut self.rng);
            notes.push(s);
        }
        if !mentioned {
            let t = self.pick_template("pre", profile);
            let line = self.fill(&t, drug, others, "");
            notes[0].push(line);
        }
        plan.visits
            .iter()
            .zip(notes)
            .map(|(&timestamp, s)| RawDocument { timestamp, text: s.join(" ") })
            .collect()
    }
}

/// Generates `config.n_examples` labeled examples. Patients get one or two
/// drugs each; ids look like `s<profile>-p<index>`.
pub fn generate_corpus(config: &GenConfig) -> Result<Vec<PatientDrugExample>> {
    generate_with_templates(config, &TemplatePools::builtin())
}

pub fn generate_with_templates(config: &GenConfig, templates: &TemplatePools) -> Result<Vec<PatientDrugExample>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(config.lexicon.stream());
    let mut g = Gen { rng, templates, config };
    let lexicon = config.lexicon.entries();
    let mut out = Vec::with_capacity(config.n_examples);
    let mut patient = 0usize;
    while out.len() < config.n_examples {
        let profile = Profile::new(g.rng.random_range(0..config.style_profiles));
        let pid = format!("s{}-p{:05}", profile.id, patient);
        patient += 1;
        let want = if lexicon.len() > 1 && g.rng.random_bool(0.4) { 2 } else { 1 };
        let want = want.min(config.n_examples - out.len());
        let drugs: Vec<DrugLexiconEntry> = lexicon.choose_multiple(&mut g.rng, want).cloned().collect();
        for drug in drugs {
            let others = other_drugs_for(&drug);
            let plan = g.plan();
            let docs = g.notes(&plan, &drug, &others, &profile);
            out.push(PatientDrugExample::new(pid.clone(), drug, docs, Some(plan.gold))?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::split_sentences;

    fn small(n: usize, seed: u64) -> GenConfig {
        GenConfig { n_examples: n, seed, ..GenConfig::default() }
    }

    #[test]
    fn builtin_templates_parse() {
        let t = TemplatePools::builtin();
        for cat in TEMPLATE_CATEGORIES {
            assert!(!t.get(cat).is_empty(), "{cat}");
        }
        assert!(t.get("start_date").iter().any(|s| s == "Patient started {DRUG} on {T}."));
        assert!(TemplatePools::parse("pre\tlowercase {DRUG}").is_err());
        assert!(TemplatePools::parse("bogus\tX {DRUG}").is_err());
    }

    #[test]
    fn deterministic_and_sized() {
        let a = generate_corpus(&small(60, 3)).unwrap();
        let b = generate_corpus(&small(60, 3)).unwrap();
        assert_eq!(a.len(), 60);
        assert_eq!(a, b);
        let c = generate_corpus(&small(60, 4)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn lexicons_use_different_streams() {
        let rcc = generate_corpus(&small(20, 3)).unwrap();
        let nsclc = generate_corpus(&GenConfig {
            lexicon: LexiconChoice::Builtin(LexiconKind::Nsclc),
            ..small(20, 3)
        })
        .unwrap();
        let rcc_names = LexiconKind::Rcc.entries();
        assert!(rcc.iter().all(|e| rcc_names.contains(&e.drug)));
        assert!(nsclc.iter().all(|e| !rcc_names.contains(&e.drug)));
    }

    #[test]
    fn invalid_configs() {
        assert!(generate_corpus(&small(0, 1)).is_err());
        assert!(generate_corpus(&GenConfig { taken_fraction: 1.5, ..small(5, 1) }).is_err());
        assert!(generate_corpus(&GenConfig { visits_min: 2, ..small(5, 1) }).is_err());
        assert!(generate_corpus(&GenConfig { style_profiles: 0, ..small(5, 1) }).is_err());
    }

    #[test]
    fn marginal_end_cue_probability() {
        let c = GenConfig::default();
        let m = c.end_on_visit_prob * c.on_visit_explicit_end_prob()
            + (1.0 - c.end_on_visit_prob) * c.off_visit_explicit_end_prob;
        assert!((m - c.explicit_end_prob).abs() < 1e-12);
    }

    #[test]
    fn sentences_split_back_to_templates() {
        let corpus = generate_corpus(&small(30, 11)).unwrap();
        for ex in &corpus {
            for doc in &ex.documents {
                for s in split_sentences(&doc.text) {
                    assert!(s.ends_with('.'), "{s:?} in {:?}", doc.text);
                }
            }
        }
    }

    #[test]
    fn notes_agree_with_gold() {
        let corpus = generate_corpus(&small(300, 5)).unwrap();
        let pools = TemplatePools::builtin();
        let stems = |cat: &str| -> Vec<String> {
            pools.get(cat).iter().map(|t| t.split("{DRUG}").next().unwrap().to_string()).collect()
        };
        let mid = stems("mid");
        let ended = stems("end_recent");
        for ex in &corpus {
            let gold = ex.gold.unwrap();
            for doc in &ex.documents {
                let period = label_for_date(doc.timestamp, &gold);
                for s in split_sentences(&doc.text) {
                    let starts = |v: &[String]| v.iter().any(|p| s.starts_with(p.as_str()));
                    if period != DocLabel::Mid {
                        assert!(!starts(&mid), "{s} in {period}");
                    }
                    if period != DocLabel::Post {
                        assert!(!starts(&ended), "{s} before end");
                    }
                }
            }
        }
    }
}
