//! Treatment interval extraction from timestamped clinic notes.
//!
//! Everything here is `no_std` with `alloc`; file formats and the command
//! line live in the `tifti` crate.

#![no_std]

extern crate alloc;

pub mod cascade;
pub mod corpus;
pub mod date;
pub mod error;
pub mod eval;
pub mod exprclass;
pub mod features;
pub mod lexicon;
pub mod linear;
pub mod math;
pub mod seqlabel;
pub mod synth;
pub mod temporal;

pub use cascade::{predict_tifti, CascadeConfig, Evidence, IntervalPrediction, Method};
pub use corpus::{build_timeline, DocumentTimeline, PatientDrugExample, RawDocument, RegimenLabel};
pub use date::DateStamp;
pub use error::{Error, Result};
pub use eval::{evaluate, run_ablation, EvalReport, PipelineConfig};
pub use exprclass::{train_expression_classifier, ExprClass, ExprModel};
pub use features::FeatureConfig;
pub use lexicon::{DrugLexiconEntry, LexiconKind};
pub use seqlabel::{train_sequence_labeler, DocLabel, LabelerVariant, SequenceLabelerModel, TimelineKind, TrainConfig};
pub use synth::{generate_corpus, GenConfig};
pub use temporal::{tag_time_expressions, TimeBucket, TimeExpression};
