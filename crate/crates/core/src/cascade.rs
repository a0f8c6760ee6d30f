//! The integrated predictor: expression evidence gated by a confidence
//! threshold, with the sequence labeler deciding everything the gate leaves
//! open.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::corpus::{build_timeline, CondensedDocument, DocumentTimeline, Origin, PatientDrugExample};
use crate::date::DateStamp;
use crate::error::{Error, Result};
use crate::exprclass::{revise_all, score_expression, ExprModel, ExprScores, RevisedSentence};
use crate::lexicon::DrugLexiconEntry;
use crate::seqlabel::{
    constrained_decode, interval_from_labels, predict_doc_probs, DocLabel, SequenceLabelerModel,
    TimelineKind,
};
use crate::temporal::{tag_time_expressions, TimeExpression};

pub const DEFAULT_TAU: f64 = 0.9;

/// Which signal produced an endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Evidence {
    Expression,
    Timeline,
}

impl Evidence {
    pub fn name(self) -> &'static str {
        match self {
            Evidence::Expression => "EXPRESSION",
            Evidence::Timeline => "TIMELINE",
        }
    }
}

/// `taken` with `end == None` means ongoing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntervalPrediction {
    pub taken: bool,
    pub start: Option<DateStamp>,
    pub end: Option<DateStamp>,
    pub start_evidence: Option<Evidence>,
    pub end_evidence: Option<Evidence>,
}

impl IntervalPrediction {
    pub fn not_taken() -> Self {
        IntervalPrediction { taken: false, start: None, end: None, start_evidence: None, end_evidence: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.taken && (self.start.is_some() || self.end.is_some()) {
            return Err(Error::Invariant("prediction not taken but carries dates".into()));
        }
        if self.taken && self.start.is_none() {
            return Err(Error::Invariant("taken prediction without start".into()));
        }
        if let (Some(s), Some(e)) = (self.start, self.end) {
            if s > e {
                return Err(Error::Invariant(format!("predicted start {s} after end {e}")));
            }
        }
        Ok(())
    }
}

/// The four ablation rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Timeline,
    SimTimeline,
    ExprTimeline,
    FullTifti,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Timeline, Method::SimTimeline, Method::ExprTimeline, Method::FullTifti];

    pub fn name(self) -> &'static str {
        match self {
            Method::Timeline => "TIMELINE",
            Method::SimTimeline => "SIM-TIMELINE",
            Method::ExprTimeline => "EXPR+TIMELINE",
            Method::FullTifti => "FULL-TIFTI",
        }
    }

    /// Short flag spelling.
    pub fn flag(self) -> &'static str {
        match self {
            Method::Timeline => "timeline",
            Method::SimTimeline => "sim",
            Method::ExprTimeline => "expr-timeline",
            Method::FullTifti => "full",
        }
    }

    pub fn timeline_kind(self) -> TimelineKind {
        match self {
            Method::Timeline | Method::ExprTimeline => TimelineKind::Original,
            Method::SimTimeline | Method::FullTifti => TimelineKind::Simulated,
        }
    }

    pub fn uses_expression_gate(self) -> bool {
        matches!(self, Method::ExprTimeline | Method::FullTifti)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.flag() == s || m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeConfig {
    pub tau: f64,
    pub method: Method,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        CascadeConfig { tau: DEFAULT_TAU, method: Method::FullTifti }
    }
}

impl CascadeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::Config(format!("tau {} outside [0, 1]", self.tau)));
        }
        Ok(())
    }
}

/// Timeline plus its tagged expressions and revised sentences.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub timeline: DocumentTimeline,
    pub expressions: Vec<TimeExpression>,
    pub revised: Vec<RevisedSentence>,
}

impl Analysis {
    pub fn new(example: &PatientDrugExample, other_drugs: &[DrugLexiconEntry]) -> Self {
        let timeline = build_timeline(example, other_drugs);
        Self::from_timeline(timeline)
    }

    pub fn from_timeline(timeline: DocumentTimeline) -> Self {
        let expressions = tag_time_expressions(&timeline);
        let revised = revise_all(&timeline, &expressions).expect("tagger spans lie within their sentences");
        Analysis { timeline, expressions, revised }
    }

    pub fn simulated(&self) -> DocumentTimeline {
        let pairs: Vec<(TimeExpression, RevisedSentence)> = self
            .expressions
            .iter()
            .cloned()
            .zip(self.revised.iter().cloned())
            .collect();
        build_simulated_timeline(&self.timeline, &pairs)
    }

    pub fn timeline_for(&self, kind: TimelineKind) -> DocumentTimeline {
        match kind {
            TimelineKind::Original => self.timeline.clone(),
            TimelineKind::Simulated => self.simulated(),
        }
    }
}

/// Adds one pseudo-document per expression: content is the revised sentence,
/// timestamp is the mapped date. Dedup is not re-run.
pub fn build_simulated_timeline(
    timeline: &DocumentTimeline,
    scored: &[(TimeExpression, RevisedSentence)],
) -> DocumentTimeline {
    let mut out = timeline.clone();
    for (expr, rs) in scored {
        out.insert_sorted(CondensedDocument {
            timestamp: expr.mapped_date,
            sentences: vec![rs.text.clone()],
            is_pseudo: true,
            origin: Origin::Expression(rs.expression_id),
        });
    }
    out
}

/// One decoded timeline entry, kept for audit output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodedDoc {
    pub timestamp: DateStamp,
    pub label: DocLabel,
    pub is_pseudo: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionDetail {
    pub interval: IntervalPrediction,
    pub decoded: Vec<DecodedDoc>,
    pub expression_scores: Vec<ExprScores>,
}

fn best_by(scores: &[ExprScores], key: impl Fn(&ExprScores) -> f64) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.iter().enumerate() {
        let v = key(s);
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best
}

pub fn check_models(seq_model: &SequenceLabelerModel, expr_model: &ExprModel, method: Method) -> Result<()> {
    if seq_model.trained_on != method.timeline_kind() {
        return Err(Error::ModelMismatch(format!(
            "method {} needs a labeler trained on {} timelines, got {}",
            method,
            method.timeline_kind().name(),
            seq_model.trained_on.name()
        )));
    }
    seq_model.feature_config.validate()?;
    expr_model.feature_config.validate()?;
    let seq_dim = match &seq_model.params {
        crate::seqlabel::LabelerParams::Logistic(m) => m.dim,
        crate::seqlabel::LabelerParams::Birnn(b) => b.layout.dim,
    };
    if seq_dim != seq_model.feature_config.dim || expr_model.linear.dim != expr_model.feature_config.dim {
        return Err(Error::ModelMismatch("parameter shape disagrees with feature config".into()));
    }
    Ok(())
}

/// Predicts from a precomputed analysis.
pub fn predict_analysis(
    analysis: &Analysis,
    seq_model: &SequenceLabelerModel,
    expr_model: &ExprModel,
    config: &CascadeConfig,
) -> Result<PredictionDetail> {
    config.validate()?;
    check_models(seq_model, expr_model, config.method)?;
    let timeline = analysis.timeline_for(config.method.timeline_kind());
    if timeline.is_empty() {
        return Ok(PredictionDetail {
            interval: IntervalPrediction::not_taken(),
            decoded: Vec::new(),
            expression_scores: Vec::new(),
        });
    }
    let probs = predict_doc_probs(seq_model, &timeline)?;
    let labels = constrained_decode(&probs);
    let mut interval = interval_from_labels(&labels, &timeline.timestamps())?;
    let decoded = timeline
        .docs
        .iter()
        .zip(&labels)
        .map(|(d, &label)| DecodedDoc { timestamp: d.timestamp, label, is_pseudo: d.is_pseudo })
        .collect();

    let mut expression_scores = Vec::new();
    if config.method.uses_expression_gate() {
        expression_scores = analysis.revised.iter().map(|rs| score_expression(expr_model, rs)).collect();
        if interval.taken {
            apply_gate(&mut interval, &analysis.revised, &expression_scores, config.tau);
        }
    }
    interval.validate()?;
    Ok(PredictionDetail { interval, decoded, expression_scores })
}

/// Per-endpoint override by the most confident START / END expression when
/// its probability reaches `tau`.
fn apply_gate(interval: &mut IntervalPrediction, revised: &[RevisedSentence], scores: &[ExprScores], tau: f64) {
    let accepted = |key: fn(&ExprScores) -> f64| {
        best_by(scores, key)
            .filter(|&(_, p)| p >= tau)
            .map(|(i, _)| revised[i].mapped_date)
    };
    let start = accepted(|s| s.p_start);
    let end = accepted(|s| s.p_end);
    let end = match (start, end) {
        (Some(s), Some(e)) if s > e => None,
        _ => end,
    };
    if let Some(s) = start {
        // a start past a timeline-derived end is not trusted
        if interval.end.is_none_or(|e| s <= e) || end.is_some_and(|e| s <= e) {
            interval.start = Some(s);
            interval.start_evidence = Some(Evidence::Expression);
        }
    }
    if let Some(e) = end {
        if interval.start.is_none_or(|s| s <= e) {
            interval.end = Some(e);
            interval.end_evidence = Some(Evidence::Expression);
        }
    }
}

pub fn predict_tifti(
    example: &PatientDrugExample,
    other_drugs: &[DrugLexiconEntry],
    seq_model: &SequenceLabelerModel,
    expr_model: &ExprModel,
    config: &CascadeConfig,
) -> Result<PredictionDetail> {
    predict_analysis(&Analysis::new(example, other_drugs), seq_model, expr_model, config)
}
