//! Prediction over many examples, optionally on several threads.

use std::thread;

use tifti_core::cascade::{predict_analysis, Analysis, CascadeConfig, PredictionDetail};
use tifti_core::corpus::PatientDrugExample;
use tifti_core::eval::OtherDrugCache;
use tifti_core::exprclass::ExprModel;
use tifti_core::seqlabel::SequenceLabelerModel;

fn predict_chunk(
    examples: &[PatientDrugExample],
    seq: &SequenceLabelerModel,
    expr: &ExprModel,
    config: &CascadeConfig,
) -> tifti_core::Result<Vec<PredictionDetail>> {
    let mut cache = OtherDrugCache::default();
    examples
        .iter()
        .map(|e| predict_analysis(&Analysis::new(e, cache.get(&e.drug)), seq, expr, config))
        .collect()
}

/// Results follow input order for any `jobs`.
pub fn predict_all(
    examples: &[PatientDrugExample],
    seq: &SequenceLabelerModel,
    expr: &ExprModel,
    config: &CascadeConfig,
    jobs: usize,
) -> tifti_core::Result<Vec<PredictionDetail>> {
    let jobs = jobs.clamp(1, examples.len().max(1));
    if jobs == 1 {
        return predict_chunk(examples, seq, expr, config);
    }
    let chunk = examples.len().div_ceil(jobs);
    let parts: Vec<tifti_core::Result<Vec<PredictionDetail>>> = thread::scope(|scope| {
        let handles: Vec<_> = examples
            .chunks(chunk)
            .map(|part| scope.spawn(move || predict_chunk(part, seq, expr, config)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("prediction worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(examples.len());
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}
