//! Run settings: defaults, overlaid by a flat TOML file, overlaid by flags.
//!
//! Every file key has a flag twin: `dev_fraction` in the file is
//! `--dev-fraction` on the command line.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use tifti_core::cascade::{CascadeConfig, Method};
use tifti_core::eval::PipelineConfig;
use tifti_core::features::FeatureConfig;
use tifti_core::lexicon::{parse_lexicon, LexiconKind};
use tifti_core::seqlabel::{LabelerVariant, TrainConfig};
use tifti_core::synth::{GenConfig, LexiconChoice};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Seed for generation, splitting and model initialization.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for predict and evaluate.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Share of patients used for development in `ablate`.
    #[arg(long, global = true)]
    pub dev_fraction: Option<f64>,
    /// Proxy-label window in days for the expression classifier.
    #[arg(long, global = true)]
    pub delta_days: Option<u32>,
    /// Expression confidence threshold in [0, 1].
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// timeline | sim | expr-timeline | full
    #[arg(long, global = true)]
    pub method: Option<String>,
    /// rcc | nsclc | path to a `name<TAB>syn,syn` file
    #[arg(long, global = true)]
    pub lexicon: Option<String>,
    /// Comma-separated n-gram orders.
    #[arg(long, global = true, value_delimiter = ',')]
    pub ngram_orders: Option<Vec<usize>>,
    /// Hashed feature dimension (power of two).
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    #[arg(long, global = true)]
    pub lowercase: Option<bool>,
    /// logistic | birnn
    #[arg(long, global = true)]
    pub labeler: Option<String>,
    #[arg(long, global = true)]
    pub birnn_input: Option<usize>,
    #[arg(long, global = true)]
    pub birnn_hidden: Option<usize>,
    #[arg(long, global = true)]
    pub seq_lr: Option<f64>,
    #[arg(long, global = true)]
    pub seq_epochs: Option<usize>,
    #[arg(long, global = true)]
    pub seq_l2: Option<f64>,
    #[arg(long, global = true)]
    pub expr_lr: Option<f64>,
    #[arg(long, global = true)]
    pub expr_epochs: Option<usize>,
    #[arg(long, global = true)]
    pub expr_l2: Option<f64>,
    /// Number of generated examples.
    #[arg(long, short = 'n', global = true)]
    pub n_examples: Option<usize>,
    #[arg(long, global = true)]
    pub taken_fraction: Option<f64>,
    #[arg(long, global = true)]
    pub explicit_start_prob: Option<f64>,
    #[arg(long, global = true)]
    pub explicit_end_prob: Option<f64>,
    #[arg(long, global = true)]
    pub off_visit_explicit_end_prob: Option<f64>,
    #[arg(long, global = true)]
    pub start_on_visit_prob: Option<f64>,
    #[arg(long, global = true)]
    pub end_on_visit_prob: Option<f64>,
    #[arg(long, global = true)]
    pub ongoing_prob: Option<f64>,
    #[arg(long, global = true)]
    pub copy_forward_prob: Option<f64>,
    #[arg(long, global = true)]
    pub distractor_prob: Option<f64>,
    #[arg(long, global = true)]
    pub visits_min: Option<usize>,
    #[arg(long, global = true)]
    pub visits_max: Option<usize>,
    #[arg(long, global = true)]
    pub style_profiles: Option<usize>,
}

impl Settings {
    /// Every key filled with the built-in default.
    pub fn defaults() -> Self {
        let p = PipelineConfig::default();
        let g = GenConfig::default();
        let c = CascadeConfig::default();
        Settings {
            seed: Some(p.seed),
            jobs: Some(1),
            dev_fraction: Some(p.dev_fraction),
            delta_days: Some(p.delta_days),
            tau: Some(c.tau),
            method: Some(c.method.flag().into()),
            lexicon: Some(LexiconKind::Rcc.name().into()),
            ngram_orders: Some(p.seq_features.ngram_orders.clone()),
            dim: Some(p.seq_features.dim),
            lowercase: Some(p.seq_features.lowercase),
            labeler: Some("logistic".into()),
            birnn_input: Some(64),
            birnn_hidden: Some(32),
            seq_lr: Some(p.seq_train.learning_rate),
            seq_epochs: Some(p.seq_train.epochs),
            seq_l2: Some(p.seq_train.l2),
            expr_lr: Some(p.expr_train.learning_rate),
            expr_epochs: Some(p.expr_train.epochs),
            expr_l2: Some(p.expr_train.l2),
            n_examples: Some(g.n_examples),
            taken_fraction: Some(g.taken_fraction),
            explicit_start_prob: Some(g.explicit_start_prob),
            explicit_end_prob: Some(g.explicit_end_prob),
            off_visit_explicit_end_prob: Some(g.off_visit_explicit_end_prob),
            start_on_visit_prob: Some(g.start_on_visit_prob),
            end_on_visit_prob: Some(g.end_on_visit_prob),
            ongoing_prob: Some(g.ongoing_prob),
            copy_forward_prob: Some(g.copy_forward_prob),
            distractor_prob: Some(g.distractor_prob),
            visits_min: Some(g.visits_min),
            visits_max: Some(g.visits_max),
            style_profiles: Some(g.style_profiles),
        }
    }

    pub fn from_toml(path: &Path, text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(path, &text)
    }

    /// Keys set in `top` replace those in `self`.
    pub fn overlay(self, top: &Settings) -> Self {
        let mut base = serde_json::to_value(self).expect("settings serialize");
        let top = serde_json::to_value(top).expect("settings serialize");
        if let (Some(base), Some(top)) = (base.as_object_mut(), top.as_object()) {
            for (k, v) in top {
                if !v.is_null() {
                    base.insert(k.clone(), v.clone());
                }
            }
        }
        serde_json::from_value(base).expect("overlay keeps the schema")
    }

    /// Defaults, then the optional file, then flags.
    pub fn merge(config_file: Option<&Path>, flags: &Settings) -> Result<Self> {
        let mut merged = Settings::defaults();
        if let Some(path) = config_file {
            merged = merged.overlay(&Settings::load(path)?);
        }
        Ok(merged.overlay(flags))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("settings serialize to TOML")
    }
}

/// Fully resolved and validated settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub settings: Settings,
    pub jobs: usize,
    pub pipeline: PipelineConfig,
    pub gen: GenConfig,
    pub cascade: CascadeConfig,
}

fn need<T: Clone>(v: &Option<T>, key: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::Usage(format!("setting {key} is missing")))
}

pub fn parse_lexicon_choice(choice: &str) -> Result<LexiconChoice> {
    match choice {
        "rcc" => Ok(LexiconChoice::Builtin(LexiconKind::Rcc)),
        "nsclc" => Ok(LexiconChoice::Builtin(LexiconKind::Nsclc)),
        path => {
            let path = PathBuf::from(path);
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let entries =
                parse_lexicon(&text).map_err(|e| Error::Format { path: path.clone(), message: e.to_string() })?;
            Ok(LexiconChoice::Custom(entries))
        }
    }
}

impl RunConfig {
    pub fn resolve(settings: Settings) -> Result<Self> {
        let s = &settings;
        let seed = need(&s.seed, "seed")?;
        let jobs = need(&s.jobs, "jobs")?;
        if jobs == 0 {
            return Err(Error::Usage("jobs must be at least 1".into()));
        }
        let features = FeatureConfig {
            ngram_orders: need(&s.ngram_orders, "ngram_orders")?,
            dim: need(&s.dim, "dim")?,
            lowercase: need(&s.lowercase, "lowercase")?,
        };
        features.validate()?;
        let seq_variant = match need(&s.labeler, "labeler")?.as_str() {
            "logistic" => LabelerVariant::IndependentLogistic,
            "birnn" => LabelerVariant::Birnn {
                input: need(&s.birnn_input, "birnn_input")?,
                hidden: need(&s.birnn_hidden, "birnn_hidden")?,
            },
            other => return Err(Error::Usage(format!("unknown labeler {other:?}, expected logistic or birnn"))),
        };
        let seq_train = TrainConfig {
            learning_rate: need(&s.seq_lr, "seq_lr")?,
            epochs: need(&s.seq_epochs, "seq_epochs")?,
            l2: need(&s.seq_l2, "seq_l2")?,
            seed,
        };
        let expr_train = TrainConfig {
            learning_rate: need(&s.expr_lr, "expr_lr")?,
            epochs: need(&s.expr_epochs, "expr_epochs")?,
            l2: need(&s.expr_l2, "expr_l2")?,
            seed,
        };
        seq_train.validate()?;
        expr_train.validate()?;
        let dev_fraction = need(&s.dev_fraction, "dev_fraction")?;
        if !(dev_fraction > 0.0 && dev_fraction < 1.0) {
            return Err(Error::Usage(format!("dev_fraction {dev_fraction} outside (0, 1)")));
        }
        let pipeline = PipelineConfig {
            seed,
            dev_fraction,
            tau: need(&s.tau, "tau")?,
            delta_days: need(&s.delta_days, "delta_days")?,
            seq_variant,
            seq_features: features.clone(),
            expr_features: features,
            seq_train,
            expr_train,
            ..PipelineConfig::default()
        };
        let method: Method = need(&s.method, "method")?.parse()?;
        let cascade = CascadeConfig { tau: pipeline.tau, method };
        cascade.validate()?;
        let gen = GenConfig {
            n_examples: need(&s.n_examples, "n_examples")?,
            taken_fraction: need(&s.taken_fraction, "taken_fraction")?,
            explicit_start_prob: need(&s.explicit_start_prob, "explicit_start_prob")?,
            explicit_end_prob: need(&s.explicit_end_prob, "explicit_end_prob")?,
            off_visit_explicit_end_prob: need(&s.off_visit_explicit_end_prob, "off_visit_explicit_end_prob")?,
            start_on_visit_prob: need(&s.start_on_visit_prob, "start_on_visit_prob")?,
            end_on_visit_prob: need(&s.end_on_visit_prob, "end_on_visit_prob")?,
            ongoing_prob: need(&s.ongoing_prob, "ongoing_prob")?,
            copy_forward_prob: need(&s.copy_forward_prob, "copy_forward_prob")?,
            distractor_prob: need(&s.distractor_prob, "distractor_prob")?,
            visits_min: need(&s.visits_min, "visits_min")?,
            visits_max: need(&s.visits_max, "visits_max")?,
            lexicon: parse_lexicon_choice(&need(&s.lexicon, "lexicon")?)?,
            style_profiles: need(&s.style_profiles, "style_profiles")?,
            seed,
        };
        gen.validate()?;
        Ok(RunConfig { settings, jobs, pipeline, gen, cascade })
    }
}
