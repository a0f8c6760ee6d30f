//! Time-expression classification: revised sentences, proxy labels, and a
//! class-weighted multinomial logistic model scoring START / END / NEITHER.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::{DocumentTimeline, RegimenLabel};
use crate::date::DateStamp;
use crate::error::{Error, Result};
use crate::features::{featurize, FeatureConfig};
use crate::linear::{LinearSoftmax, Sample};
use crate::seqlabel::TrainConfig;
use crate::temporal::{TimeBucket, TimeExpression};

pub const DEFAULT_DELTA_DAYS: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExprClass {
    Start,
    End,
    Neither,
}

impl ExprClass {
    pub const ALL: [ExprClass; 3] = [ExprClass::Start, ExprClass::End, ExprClass::Neither];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ExprClass::Start => "START",
            ExprClass::End => "END",
            ExprClass::Neither => "NEITHER",
        }
    }
}

impl fmt::Display for ExprClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevisedSentence {
    pub text: String,
    pub bucket: TimeBucket,
    pub mapped_date: DateStamp,
    pub doc_timestamp: DateStamp,
    pub expression_id: usize,
}

/// Replaces the expression span with `TIME <BUCKET>`.
pub fn make_revised_sentence(
    sentence: &str,
    expr: &TimeExpression,
    doc_timestamp: DateStamp,
    expression_id: usize,
) -> Result<RevisedSentence> {
    let (start, end) = expr.span;
    if start > end
        || end > sentence.len()
        || !sentence.is_char_boundary(start)
        || !sentence.is_char_boundary(end)
    {
        return Err(Error::SpanOutOfBounds { start, end, len: sentence.len() });
    }
    let text = format!("{}TIME {}{}", &sentence[..start], expr.bucket.name(), &sentence[end..]);
    Ok(RevisedSentence {
        text,
        bucket: expr.bucket,
        mapped_date: expr.mapped_date,
        doc_timestamp,
        expression_id,
    })
}

/// One revised sentence per tagged expression, ids in tagging order.
pub fn revise_all(timeline: &DocumentTimeline, exprs: &[TimeExpression]) -> Result<Vec<RevisedSentence>> {
    exprs
        .iter()
        .enumerate()
        .map(|(id, e)| {
            let doc = timeline.docs.get(e.doc_index).ok_or(Error::Invariant(format!(
                "expression {id} refers to missing document {}",
                e.doc_index
            )))?;
            let sentence = doc.sentences.get(e.sentence_index).ok_or(Error::Invariant(format!(
                "expression {id} refers to missing sentence {}",
                e.sentence_index
            )))?;
            make_revised_sentence(sentence, e, doc.timestamp, id)
        })
        .collect()
}

/// Noisy training label: START/END when the mapped date is within
/// `delta_days` of the gold endpoint; the closer endpoint wins, ties go to
/// START.
pub fn proxy_label(mapped_date: DateStamp, gold: &RegimenLabel, delta_days: u32) -> ExprClass {
    if !gold.taken {
        return ExprClass::Neither;
    }
    let within = |d: Option<DateStamp>| {
        d.map(|d| mapped_date.abs_diff(d)).filter(|&gap| gap <= u64::from(delta_days))
    };
    match (within(gold.start), within(gold.end)) {
        (Some(s), Some(e)) if e < s => ExprClass::End,
        (Some(_), _) => ExprClass::Start,
        (None, Some(_)) => ExprClass::End,
        (None, None) => ExprClass::Neither,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExprModel {
    pub linear: LinearSoftmax,
    pub feature_config: FeatureConfig,
    pub delta_days: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExprScores {
    pub p_start: f64,
    pub p_end: f64,
    pub p_neither: f64,
}

impl ExprScores {
    pub fn as_array(&self) -> [f64; 3] {
        [self.p_start, self.p_end, self.p_neither]
    }

    pub fn argmax(&self) -> ExprClass {
        ExprClass::ALL[crate::math::argmax3(&self.as_array())]
    }
}

impl ExprModel {
    pub fn zeros(feature_config: FeatureConfig, delta_days: u32) -> Self {
        ExprModel {
            linear: LinearSoftmax::zeros(feature_config.dim),
            feature_config,
            delta_days,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.linear.weights.iter().chain(&self.linear.bias).all(|v| v.is_finite())
    }
}

pub fn score_expression(model: &ExprModel, rs: &RevisedSentence) -> ExprScores {
    let x = featurize(&rs.text, &model.feature_config).normalized();
    let p = model.linear.probs(&x);
    ExprScores { p_start: p[0], p_end: p[1], p_neither: p[2] }
}

/// Inverse-frequency class weights `N / (K * N_c)` over the K classes present.
pub fn class_weights(labels: &[ExprClass]) -> [f64; 3] {
    let mut counts = [0usize; 3];
    for l in labels {
        counts[l.index()] += 1;
    }
    let present = counts.iter().filter(|&&c| c > 0).count().max(1);
    let n = labels.len() as f64;
    counts.map(|c| if c == 0 { 0.0 } else { n / (present as f64 * c as f64) })
}

pub fn expression_samples(data: &[(RevisedSentence, ExprClass)], feature_config: &FeatureConfig) -> Vec<Sample> {
    let labels: Vec<ExprClass> = data.iter().map(|(_, c)| *c).collect();
    let weights = class_weights(&labels);
    data.iter()
        .map(|(rs, c)| Sample {
            x: featurize(&rs.text, feature_config).normalized(),
            target: c.index(),
            weight: weights[c.index()],
        })
        .collect()
}

/// Trains from zero initialization (the objective is convex, so the seed
/// does not influence the result). Returns the model and the per-epoch
/// objective trace.
pub fn train_expression_classifier(
    data: &[(RevisedSentence, ExprClass)],
    config: &TrainConfig,
    feature_config: &FeatureConfig,
    delta_days: u32,
) -> Result<(ExprModel, Vec<f64>)> {
    config.validate()?;
    feature_config.validate()?;
    if data.is_empty() {
        return Err(Error::Empty("expression training data"));
    }
    let samples = expression_samples(data, feature_config);
    let mut model = ExprModel::zeros(feature_config.clone(), delta_days);
    let trace = model.linear.fit(&samples, config.learning_rate, config.epochs, config.l2);
    Ok((model, trace))
}
