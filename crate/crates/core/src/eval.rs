//! Metrics, patient-disjoint splitting, and the ablation runner.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cascade::{predict_analysis, Analysis, CascadeConfig, IntervalPrediction, Method, PredictionDetail};
use crate::corpus::{PatientDrugExample, RegimenLabel};
use crate::error::{Error, Result};
use crate::exprclass::{proxy_label, train_expression_classifier, ExprClass, ExprModel, RevisedSentence};
use crate::features::FeatureConfig;
use crate::lexicon::{other_drugs_for, DrugLexiconEntry};
use crate::seqlabel::{train_sequence_labeler, LabelerVariant, SequenceLabelerModel, TimelineKind, TrainConfig};

/// Windows reported in the long-form agreement table.
pub const AGREEMENT_WINDOWS: &[u32] = &[0, 1, 2, 3, 5, 7, 14, 21, 30, 45, 60, 90];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgreementRow {
    pub t: u32,
    /// `None` when there are no true positives.
    pub start: Option<f64>,
    pub stop: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub n_true_positive: usize,
    pub agreement: Vec<AgreementRow>,
}

impl EvalReport {
    pub fn at(&self, t: u32) -> Option<&AgreementRow> {
        self.agreement.iter().find(|r| r.t == t)
    }

    pub fn start_at(&self, t: u32) -> Option<f64> {
        self.at(t).and_then(|r| r.start)
    }

    pub fn stop_at(&self, t: u32) -> Option<f64> {
        self.at(t).and_then(|r| r.stop)
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch { left: a, right: b });
    }
    Ok(())
}

/// F1 / precision / recall of the taken decision; undefined ratios are 0.
pub fn f1_taken(preds: &[IntervalPrediction], golds: &[RegimenLabel]) -> Result<(f64, f64, f64)> {
    check_lengths(preds.len(), golds.len())?;
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (p, g) in preds.iter().zip(golds) {
        match (p.taken, g.taken) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok((f1, precision, recall))
}

/// Per-example agreement for one true positive.
pub fn endpoint_agreement(pred: &IntervalPrediction, gold: &RegimenLabel, t: u32) -> (bool, bool) {
    let t = u64::from(t);
    let start = match (pred.start, gold.start) {
        (Some(p), Some(g)) => p.abs_diff(g) <= t,
        _ => false,
    };
    let stop = match (pred.end, gold.end) {
        (None, None) => true,
        (Some(p), Some(g)) => p.abs_diff(g) <= t,
        _ => false,
    };
    (start, stop)
}

/// Mean `Start_i(t)` and `Stop_i(t)` over true positives; `None` without any.
pub fn date_agreement(
    preds: &[IntervalPrediction],
    golds: &[RegimenLabel],
    t: u32,
) -> Result<Option<(f64, f64)>> {
    check_lengths(preds.len(), golds.len())?;
    let (mut n, mut s, mut e) = (0usize, 0usize, 0usize);
    for (p, g) in preds.iter().zip(golds) {
        if !(p.taken && g.taken) {
            continue;
        }
        assert!(p.start.is_some(), "taken prediction always has a start");
        let (a, b) = endpoint_agreement(p, g, t);
        n += 1;
        s += usize::from(a);
        e += usize::from(b);
    }
    Ok((n > 0).then(|| (s as f64 / n as f64, e as f64 / n as f64)))
}

pub fn evaluate(preds: &[IntervalPrediction], golds: &[RegimenLabel], windows: &[u32]) -> Result<EvalReport> {
    let (f1, precision, recall) = f1_taken(preds, golds)?;
    let n_true_positive = preds.iter().zip(golds).filter(|(p, g)| p.taken && g.taken).count();
    let mut agreement = Vec::with_capacity(windows.len());
    for &t in windows {
        let pair = date_agreement(preds, golds, t)?;
        agreement.push(AgreementRow { t, start: pair.map(|p| p.0), stop: pair.map(|p| p.1) });
    }
    Ok(EvalReport { f1, precision, recall, n_true_positive, agreement })
}

/// Seeded split by patient id; all examples of a patient land on one side.
/// `round(dev_fraction * patients)` patients go to dev (at least one per side).
pub fn split_patient_disjoint<T: Clone>(
    examples: &[T],
    patient_of: impl Fn(&T) -> &str,
    dev_fraction: f64,
    seed: u64,
) -> Result<(Vec<T>, Vec<T>)> {
    if !(dev_fraction > 0.0 && dev_fraction < 1.0) {
        return Err(Error::Config(alloc::format!("dev fraction {dev_fraction} outside (0, 1)")));
    }
    let patients: BTreeSet<&str> = examples.iter().map(&patient_of).collect();
    if patients.len() < 2 {
        return Err(Error::TooFewPatients(patients.len()));
    }
    let mut order: Vec<&str> = patients.into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let n_dev = (libm::round(dev_fraction * order.len() as f64) as usize).clamp(1, order.len() - 1);
    let dev_set: BTreeSet<&str> = order[..n_dev].iter().copied().collect();
    let (mut dev, mut test) = (Vec::new(), Vec::new());
    for ex in examples {
        if dev_set.contains(patient_of(ex)) {
            dev.push(ex.clone());
        } else {
            test.push(ex.clone());
        }
    }
    Ok((dev, test))
}

pub fn split_examples(
    examples: &[PatientDrugExample],
    dev_fraction: f64,
    seed: u64,
) -> Result<(Vec<PatientDrugExample>, Vec<PatientDrugExample>)> {
    split_patient_disjoint(examples, |e| e.patient_id.as_str(), dev_fraction, seed)
}

/// Everything needed to train and evaluate the four methods.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub seed: u64,
    pub dev_fraction: f64,
    pub tau: f64,
    pub delta_days: u32,
    pub seq_variant: LabelerVariant,
    pub seq_features: FeatureConfig,
    pub expr_features: FeatureConfig,
    pub seq_train: TrainConfig,
    pub expr_train: TrainConfig,
    pub windows: Vec<u32>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 7,
            dev_fraction: 0.8,
            tau: crate::cascade::DEFAULT_TAU,
            delta_days: crate::exprclass::DEFAULT_DELTA_DAYS,
            seq_variant: LabelerVariant::IndependentLogistic,
            seq_features: FeatureConfig::default(),
            expr_features: FeatureConfig::default(),
            seq_train: TrainConfig { learning_rate: 4.0, epochs: 1500, l2: 1e-5, seed: 7 },
            expr_train: TrainConfig { learning_rate: 2.0, epochs: 300, l2: 1e-5, seed: 7 },
            windows: AGREEMENT_WINDOWS.to_vec(),
        }
    }
}

impl PipelineConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.seq_train.seed = seed;
        self.expr_train.seed = seed;
        self
    }
}

/// Caches OTHER-DRUG lists per target drug.
#[derive(Debug, Default)]
pub struct OtherDrugCache {
    map: BTreeMap<String, Vec<DrugLexiconEntry>>,
}

impl OtherDrugCache {
    pub fn get(&mut self, drug: &DrugLexiconEntry) -> &[DrugLexiconEntry] {
        self.map
            .entry(drug.canonical_name.clone())
            .or_insert_with(|| other_drugs_for(drug))
    }
}

pub fn analyze_all(examples: &[PatientDrugExample]) -> Vec<Analysis> {
    let mut cache = OtherDrugCache::default();
    examples
        .iter()
        .map(|e| Analysis::new(e, cache.get(&e.drug)))
        .collect()
}

fn gold_of(e: &PatientDrugExample) -> Result<RegimenLabel> {
    e.gold.ok_or_else(|| Error::Invariant(alloc::format!("example {} has no gold label", e.patient_id)))
}

/// Proxy-labeled expression data for classifier training.
pub fn expression_training_data(
    analyses: &[Analysis],
    golds: &[RegimenLabel],
    delta_days: u32,
) -> Vec<(RevisedSentence, ExprClass)> {
    analyses
        .iter()
        .zip(golds)
        .flat_map(|(a, g)| a.revised.iter().map(move |rs| (rs.clone(), proxy_label(rs.mapped_date, g, delta_days))))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModels {
    pub expr: ExprModel,
    pub seq_original: SequenceLabelerModel,
    pub seq_simulated: SequenceLabelerModel,
}

impl TrainedModels {
    pub fn labeler_for(&self, method: Method) -> &SequenceLabelerModel {
        match method.timeline_kind() {
            TimelineKind::Original => &self.seq_original,
            TimelineKind::Simulated => &self.seq_simulated,
        }
    }
}

pub fn train_labeler(
    analyses: &[Analysis],
    golds: &[RegimenLabel],
    kind: TimelineKind,
    config: &PipelineConfig,
) -> Result<SequenceLabelerModel> {
    let data: Vec<_> = analyses
        .iter()
        .zip(golds)
        .map(|(a, g)| (a.timeline_for(kind), *g))
        .collect();
    let (model, _) = train_sequence_labeler(&data, &config.seq_train, config.seq_variant, &config.seq_features, kind)?;
    Ok(model)
}

/// A dev split without any time expression yields the all-zero model, whose
/// uniform scores never pass a gate above 1/3.
pub fn train_expr_model(analyses: &[Analysis], golds: &[RegimenLabel], config: &PipelineConfig) -> Result<ExprModel> {
    let data = expression_training_data(analyses, golds, config.delta_days);
    if data.is_empty() {
        config.expr_train.validate()?;
        config.expr_features.validate()?;
        return Ok(ExprModel::zeros(config.expr_features.clone(), config.delta_days));
    }
    let (model, _) = train_expression_classifier(&data, &config.expr_train, &config.expr_features, config.delta_days)?;
    Ok(model)
}

pub fn train_models(dev: &[PatientDrugExample], config: &PipelineConfig) -> Result<TrainedModels> {
    let golds: Vec<RegimenLabel> = dev.iter().map(gold_of).collect::<Result<_>>()?;
    let analyses = analyze_all(dev);
    Ok(TrainedModels {
        expr: train_expr_model(&analyses, &golds, config)?,
        seq_original: train_labeler(&analyses, &golds, TimelineKind::Original, config)?,
        seq_simulated: train_labeler(&analyses, &golds, TimelineKind::Simulated, config)?,
    })
}

/// Predictions and metrics for one method.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: Method,
    pub report: EvalReport,
    pub predictions: Vec<PredictionDetail>,
}

pub fn evaluate_method(
    analyses: &[Analysis],
    golds: &[RegimenLabel],
    models: &TrainedModels,
    method: Method,
    config: &PipelineConfig,
) -> Result<MethodResult> {
    let cascade = CascadeConfig { tau: config.tau, method };
    let predictions: Vec<PredictionDetail> = analyses
        .iter()
        .map(|a| predict_analysis(a, models.labeler_for(method), &models.expr, &cascade))
        .collect::<Result<_>>()?;
    let intervals: Vec<IntervalPrediction> = predictions.iter().map(|p| p.interval).collect();
    let report = evaluate(&intervals, golds, &config.windows)?;
    Ok(MethodResult { method, report, predictions })
}

pub fn evaluate_methods(
    test: &[PatientDrugExample],
    models: &TrainedModels,
    methods: &[Method],
    config: &PipelineConfig,
) -> Result<Vec<MethodResult>> {
    let golds: Vec<RegimenLabel> = test.iter().map(gold_of).collect::<Result<_>>()?;
    let analyses = analyze_all(test);
    methods
        .iter()
        .map(|&m| evaluate_method(&analyses, &golds, models, m, config))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationResult {
    pub models: TrainedModels,
    pub n_dev: usize,
    pub n_test: usize,
    pub rows: Vec<MethodResult>,
}

/// Splits, trains each model once, and evaluates all four methods on the
/// same test split.
pub fn run_ablation(corpus: &[PatientDrugExample], config: &PipelineConfig) -> Result<AblationResult> {
    let (dev, test) = split_examples(corpus, config.dev_fraction, config.seed)?;
    let models = train_models(&dev, config)?;
    let rows = evaluate_methods(&test, &models, &Method::ALL, config)?;
    Ok(AblationResult { models, n_dev: dev.len(), n_test: test.len(), rows })
}
