//! Document-timeline sequence labeling: per-document PRE/MID/POST
//! distributions, monotone decoding, and interval extraction.

mod birnn;
mod decode;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use birnn::{Birnn, BirnnLayout};
pub use decode::{constrained_decode, interval_from_labels, is_monotone};

use crate::corpus::{label_documents, DocumentTimeline, RegimenLabel};
use crate::error::{Error, Result};
use crate::features::{featurize, FeatureConfig, FeatureVector};
use crate::linear::{LinearSoftmax, Sample};

/// Init scale for all trained parameters.
pub const INIT_SCALE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DocLabel {
    Pre,
    Mid,
    Post,
}

impl DocLabel {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        match i {
            0 => DocLabel::Pre,
            1 => DocLabel::Mid,
            _ => DocLabel::Post,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DocLabel::Pre => "PRE",
            DocLabel::Mid => "MID",
            DocLabel::Post => "POST",
        }
    }
}

impl fmt::Display for DocLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelDistribution {
    pub p_pre: f64,
    pub p_mid: f64,
    pub p_post: f64,
}

impl LabelDistribution {
    pub fn new(p: [f64; 3]) -> Result<Self> {
        let sum: f64 = p.iter().sum();
        if p.iter().any(|v| !(0.0..=1.0).contains(v)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Invariant(format!("not a distribution: {p:?}")));
        }
        Ok(LabelDistribution { p_pre: p[0], p_mid: p[1], p_post: p[2] })
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.p_pre, self.p_mid, self.p_post]
    }
}

/// Which timeline a labeler was trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimelineKind {
    Original,
    Simulated,
}

impl TimelineKind {
    pub fn name(self) -> &'static str {
        match self {
            TimelineKind::Original => "ORIGINAL",
            TimelineKind::Simulated => "SIMULATED",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabelerVariant {
    IndependentLogistic,
    Birnn { input: usize, hidden: usize },
}

impl LabelerVariant {
    pub const DEFAULT_BIRNN: LabelerVariant = LabelerVariant::Birnn { input: 64, hidden: 32 };

    pub fn name(self) -> &'static str {
        match self {
            LabelerVariant::IndependentLogistic => "INDEPENDENT-LOGISTIC",
            LabelerVariant::Birnn { .. } => "BIRNN",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LabelerParams {
    Logistic(LinearSoftmax),
    Birnn(Birnn),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceLabelerModel {
    pub feature_config: FeatureConfig,
    pub trained_on: TimelineKind,
    pub seed: u64,
    pub params: LabelerParams,
}

impl SequenceLabelerModel {
    pub fn variant(&self) -> LabelerVariant {
        match &self.params {
            LabelerParams::Logistic(_) => LabelerVariant::IndependentLogistic,
            LabelerParams::Birnn(b) => LabelerVariant::Birnn {
                input: b.layout.input,
                hidden: b.layout.hidden,
            },
        }
    }

    /// Untrained model with seeded uniform initialization.
    pub fn init(variant: LabelerVariant, feature_config: FeatureConfig, trained_on: TimelineKind, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = feature_config.dim;
        let params = match variant {
            LabelerVariant::IndependentLogistic => {
                LabelerParams::Logistic(LinearSoftmax::uniform(dim, INIT_SCALE, &mut rng))
            }
            LabelerVariant::Birnn { input, hidden } => {
                let layout = BirnnLayout { dim, input, hidden };
                LabelerParams::Birnn(Birnn::uniform(layout, INIT_SCALE, &mut rng))
            }
        };
        SequenceLabelerModel { feature_config, trained_on, seed, params }
    }

    /// Parameters in the layout used by [`objective`] and model files.
    pub fn to_flat(&self) -> Vec<f64> {
        match &self.params {
            LabelerParams::Logistic(m) => m.to_flat(),
            LabelerParams::Birnn(b) => b.params.clone(),
        }
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        let mismatch = || Error::ModelMismatch(format!("expected different parameter count, got {}", flat.len()));
        match &mut self.params {
            LabelerParams::Logistic(m) => *m = LinearSoftmax::from_flat(m.dim, flat).ok_or_else(mismatch)?,
            LabelerParams::Birnn(b) => *b = Birnn::from_flat(b.layout, flat.to_vec()).ok_or_else(mismatch)?,
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        match &self.params {
            LabelerParams::Logistic(m) => {
                m.weights.iter().chain(&m.bias).all(|v| v.is_finite())
            }
            LabelerParams::Birnn(b) => b.params.iter().all(|v| v.is_finite()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub seed: u64,
}

impl TrainConfig {
    pub fn logistic() -> Self {
        TrainConfig { learning_rate: 0.1, epochs: 30, l2: 1e-4, seed: 0 }
    }

    pub fn recurrent() -> Self {
        TrainConfig { learning_rate: 0.01, epochs: 30, l2: 1e-4, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        let valid = self.learning_rate > 0.0 && self.epochs > 0 && self.l2 >= 0.0;
        if !valid {
            return Err(Error::Config(format!("invalid training config {self:?}")));
        }
        Ok(())
    }
}

/// Unit-normalized document features, one per timeline entry.
pub fn timeline_features(timeline: &DocumentTimeline, config: &FeatureConfig) -> Vec<FeatureVector> {
    timeline
        .docs
        .iter()
        .map(|d| featurize(&d.text(), config).normalized())
        .collect()
}

pub fn predict_doc_probs(model: &SequenceLabelerModel, timeline: &DocumentTimeline) -> Result<Vec<LabelDistribution>> {
    if timeline.is_empty() {
        return Err(Error::Empty("timeline"));
    }
    let xs = timeline_features(timeline, &model.feature_config);
    let raw: Vec<[f64; 3]> = match &model.params {
        LabelerParams::Logistic(m) => xs.iter().map(|x| m.probs(x)).collect(),
        LabelerParams::Birnn(b) => b.predict(&xs),
    };
    raw.into_iter().map(LabelDistribution::new).collect()
}

/// Featurized training sequence.
#[derive(Debug, Clone)]
pub struct LabeledSequence {
    pub xs: Vec<FeatureVector>,
    pub targets: Vec<usize>,
}

impl LabeledSequence {
    pub fn from_timeline(timeline: &DocumentTimeline, gold: &RegimenLabel, config: &FeatureConfig) -> Self {
        LabeledSequence {
            xs: timeline_features(timeline, config),
            targets: label_documents(timeline, gold).iter().map(|l| l.index()).collect(),
        }
    }
}

/// Mean per-document cross-entropy plus `l2 * |weights|^2` and its gradient
/// in the model's flat parameter layout.
pub fn objective(model: &SequenceLabelerModel, data: &[LabeledSequence], l2: f64) -> (f64, Vec<f64>) {
    match &model.params {
        LabelerParams::Logistic(m) => {
            let samples = flatten_samples(data);
            m.objective(&samples, l2)
        }
        LabelerParams::Birnn(b) => birnn_objective(b, data, l2),
    }
}

fn flatten_samples(data: &[LabeledSequence]) -> Vec<Sample> {
    data.iter()
        .flat_map(|s| {
            s.xs.iter()
                .zip(&s.targets)
                .map(|(x, &t)| Sample { x: x.clone(), target: t, weight: 1.0 })
        })
        .collect()
}

fn birnn_objective(b: &Birnn, data: &[LabeledSequence], l2: f64) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; b.params.len()];
    let n_pos: usize = data.iter().map(|s| s.xs.len()).sum();
    let mut loss = 0.0;
    if n_pos > 0 {
        let scale = 1.0 / n_pos as f64;
        for s in data.iter().filter(|s| !s.xs.is_empty()) {
            loss += b.sequence_loss_grad(&s.xs, &s.targets, scale, &mut grad);
        }
    }
    if l2 > 0.0 {
        for r in b.layout.weight_ranges() {
            for i in r {
                let w = b.params[i];
                loss += l2 * w * w;
                grad[i] += 2.0 * l2 * w;
            }
        }
    }
    (loss, grad)
}

fn apply_step(model: &mut SequenceLabelerModel, grad: &[f64], lr: f64) {
    match &mut model.params {
        LabelerParams::Logistic(m) => m.step(grad, lr),
        LabelerParams::Birnn(b) => {
            for (p, g) in b.params.iter_mut().zip(grad) {
                *p -= lr * g;
            }
        }
    }
}

/// Training summary: objective before every epoch, then after the last.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    pub losses: Vec<f64>,
}

pub fn train_sequence_labeler(
    examples: &[(DocumentTimeline, RegimenLabel)],
    config: &TrainConfig,
    variant: LabelerVariant,
    feature_config: &FeatureConfig,
    trained_on: TimelineKind,
) -> Result<(SequenceLabelerModel, TrainTrace)> {
    config.validate()?;
    feature_config.validate()?;
    if examples.is_empty() {
        return Err(Error::Empty("training set"));
    }
    let data: Vec<LabeledSequence> = examples
        .iter()
        .filter(|(tl, _)| !tl.is_empty())
        .map(|(tl, gold)| LabeledSequence::from_timeline(tl, gold, feature_config))
        .collect();
    if data.is_empty() {
        return Err(Error::Empty("training timelines"));
    }
    let mut model = SequenceLabelerModel::init(variant, feature_config.clone(), trained_on, config.seed);
    let trace = fit(&mut model, &data, config);
    Ok((model, trace))
}

/// Full-batch gradient descent on prepared sequences.
pub fn fit(model: &mut SequenceLabelerModel, data: &[LabeledSequence], config: &TrainConfig) -> TrainTrace {
    if let LabelerParams::Logistic(m) = &mut model.params {
        let samples = flatten_samples(data);
        let losses = m.fit(&samples, config.learning_rate, config.epochs, config.l2);
        return TrainTrace { losses };
    }
    let mut losses = Vec::with_capacity(config.epochs + 1);
    for _ in 0..config.epochs {
        let (loss, grad) = objective(model, data, config.l2);
        losses.push(loss);
        apply_step(model, &grad, config.learning_rate);
    }
    losses.push(objective(model, data, config.l2).0);
    TrainTrace { losses }
}

#[cfg(test)]
mod tests;
