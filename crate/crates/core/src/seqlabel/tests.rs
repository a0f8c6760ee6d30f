use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::features::FeatureVector;

fn random_vector<R: Rng>(rng: &mut R, dim: usize) -> FeatureVector {
    let mut entries: Vec<(u32, f64)> = Vec::new();
    for j in 0..dim {
        if rng.random_bool(0.4) {
            entries.push((j as u32, rng.random_range(-1.0..1.0)));
        }
    }
    FeatureVector { dim, entries }.normalized()
}

fn random_data(seed: u64, dim: usize, n_seqs: usize) -> Vec<LabeledSequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_seqs)
        .map(|_| {
            let len = rng.random_range(1..=5);
            LabeledSequence {
                xs: (0..len).map(|_| random_vector(&mut rng, dim)).collect(),
                targets: (0..len).map(|_| rng.random_range(0..3)).collect(),
            }
        })
        .collect()
}

fn max_relative_error(model: &SequenceLabelerModel, data: &[LabeledSequence], l2: f64) -> f64 {
    let (_, grad) = objective(model, data, l2);
    let base = model.to_flat();
    let eps = 1e-4;
    let mut worst: f64 = 0.0;
    let mut probe = model.clone();
    for i in 0..base.len() {
        let mut p = base.clone();
        p[i] = base[i] + eps;
        probe.set_flat(&p).unwrap();
        let up = objective(&probe, data, l2).0;
        p[i] = base[i] - eps;
        probe.set_flat(&p).unwrap();
        let down = objective(&probe, data, l2).0;
        let numeric = (up - down) / (2.0 * eps);
        let denom = grad[i].abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((grad[i] - numeric).abs() / denom);
    }
    worst
}

#[test]
fn zero_logistic_is_uniform() {
    let mut model = SequenceLabelerModel::init(
        LabelerVariant::IndependentLogistic,
        FeatureConfig::with_dim(64),
        TimelineKind::Original,
        0,
    );
    let zeros = vec![0.0; model.to_flat().len()];
    model.set_flat(&zeros).unwrap();
    let tl = crate::corpus::DocumentTimeline {
        docs: vec![crate::corpus::CondensedDocument {
            timestamp: "2019-01-01".parse().unwrap(),
            sentences: vec!["Tolerating DRUG well.".into()],
            is_pseudo: false,
            origin: crate::corpus::Origin::Document(0),
        }],
    };
    let p = predict_doc_probs(&model, &tl).unwrap();
    for v in p[0].as_array() {
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }
    assert!(predict_doc_probs(&model, &crate::corpus::DocumentTimeline { docs: vec![] }).is_err());
}

#[test]
fn logistic_gradient_matches_finite_differences() {
    for seed in 0..5 {
        let model = SequenceLabelerModel::init(
            LabelerVariant::IndependentLogistic,
            FeatureConfig::with_dim(16),
            TimelineKind::Original,
            seed,
        );
        let data = random_data(100 + seed, 16, 4);
        let err = max_relative_error(&model, &data, 1e-3);
        assert!(err <= 1e-5, "seed {seed}: {err}");
    }
}

#[test]
fn birnn_gradient_matches_finite_differences() {
    for seed in 0..5 {
        let mut model = SequenceLabelerModel::init(
            LabelerVariant::Birnn { input: 4, hidden: 3 },
            FeatureConfig::with_dim(16),
            TimelineKind::Simulated,
            seed,
        );
        // larger weights exercise the nonlinearities
        let scaled: Vec<f64> = model.to_flat().iter().map(|v| v * 5.0).collect();
        model.set_flat(&scaled).unwrap();
        let data = random_data(200 + seed, 16, 3);
        let err = max_relative_error(&model, &data, 1e-3);
        assert!(err <= 1e-4, "seed {seed}: {err}");
    }
}

fn toy_examples() -> Vec<(DocumentTimeline, RegimenLabel)> {
    use crate::corpus::{CondensedDocument, Origin};
    use crate::date::DateStamp;
    let d0: DateStamp = "2019-01-01".parse().unwrap();
    let mut out = Vec::new();
    for i in 0..12i64 {
        let n_pre = 1 + (i % 3) as usize;
        let n_mid = 1 + (i % 2) as usize;
        let ended = i % 4 != 0;
        let mut docs = Vec::new();
        let mut day = 0;
        let mut push = |text: &str, day: &mut i64| {
            docs.push(CondensedDocument {
                timestamp: d0.add_days(*day + 100 * i),
                sentences: vec![text.into()],
                is_pseudo: false,
                origin: Origin::Document(docs.len()),
            });
            *day += 20;
        };
        for _ in 0..n_pre {
            push("Discussed DRUG as an option.", &mut day);
        }
        let start = d0.add_days(day + 100 * i);
        for _ in 0..n_mid {
            push("Tolerating DRUG well.", &mut day);
        }
        let end = ended.then(|| d0.add_days(day + 100 * i));
        if ended {
            push("Patient no longer on DRUG.", &mut day);
        }
        out.push((DocumentTimeline { docs }, RegimenLabel::taken(start, end).unwrap()));
    }
    out
}

fn toy_accuracy(model: &SequenceLabelerModel, examples: &[(DocumentTimeline, RegimenLabel)]) -> f64 {
    let (mut ok, mut n) = (0, 0);
    for (tl, gold) in examples {
        let probs = predict_doc_probs(model, tl).unwrap();
        let labels = constrained_decode(&probs);
        for (l, g) in labels.iter().zip(crate::corpus::label_documents(tl, gold)) {
            ok += usize::from(*l == g);
            n += 1;
        }
    }
    ok as f64 / n as f64
}

#[test]
fn separable_toy_set_is_learned() {
    let ex = toy_examples();
    let config = TrainConfig { learning_rate: 0.5, epochs: 200, l2: 0.0, seed: 3 };
    for variant in [LabelerVariant::IndependentLogistic, LabelerVariant::Birnn { input: 8, hidden: 4 }] {
        let (model, trace) =
            train_sequence_labeler(&ex, &config, variant, &FeatureConfig::with_dim(256), TimelineKind::Original)
                .unwrap();
        assert_eq!(trace.losses.len(), config.epochs + 1);
        assert!(trace.losses.last().unwrap() < &trace.losses[0]);
        assert_eq!(toy_accuracy(&model, &ex), 1.0, "{}", variant.name());
    }
}

#[test]
fn training_is_deterministic() {
    let ex = toy_examples();
    let config = TrainConfig { learning_rate: 0.1, epochs: 5, l2: 1e-4, seed: 9 };
    let run = || {
        train_sequence_labeler(&ex, &config, LabelerVariant::Birnn { input: 4, hidden: 3 }, &FeatureConfig::with_dim(64), TimelineKind::Original)
            .unwrap()
    };
    let (a, ta) = run();
    let (b, tb) = run();
    assert_eq!(a.to_flat(), b.to_flat());
    assert_eq!(ta, tb);
    assert!(a.is_finite());
}

#[test]
fn logistic_loss_non_increasing_at_default_rate() {
    let ex = toy_examples();
    let config = TrainConfig { seed: 1, ..TrainConfig::logistic() };
    let (_, trace) = train_sequence_labeler(
        &ex,
        &config,
        LabelerVariant::IndependentLogistic,
        &FeatureConfig::with_dim(256),
        TimelineKind::Original,
    )
    .unwrap();
    for w in trace.losses.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{w:?}");
    }
}

#[test]
fn training_rejects_bad_input() {
    let fc = FeatureConfig::with_dim(64);
    let v = LabelerVariant::IndependentLogistic;
    let k = TimelineKind::Original;
    assert!(train_sequence_labeler(&[], &TrainConfig::logistic(), v, &fc, k).is_err());
    let bad = TrainConfig { learning_rate: 0.0, ..TrainConfig::logistic() };
    assert!(train_sequence_labeler(&toy_examples(), &bad, v, &fc, k).is_err());
    let empty = vec![(DocumentTimeline { docs: vec![] }, RegimenLabel::not_taken())];
    assert!(train_sequence_labeler(&empty, &TrainConfig::logistic(), v, &fc, k).is_err());
}

/// Every `PRE* MID* POST*` sequence of length `n`.
fn monotone_sequences(n: usize) -> Vec<Vec<DocLabel>> {
    let mut out = Vec::new();
    for a in 0..=n {
        for b in 0..=n - a {
            let mut s = vec![DocLabel::Pre; a];
            s.extend(core::iter::repeat_n(DocLabel::Mid, b));
            s.extend(core::iter::repeat_n(DocLabel::Post, n - a - b));
            out.push(s);
        }
    }
    out
}

fn path_logp(probs: &[LabelDistribution], labels: &[DocLabel]) -> f64 {
    probs.iter().zip(labels).map(|(p, l)| libm::log(p.as_array()[l.index()])).sum()
}

fn brute_force(probs: &[LabelDistribution]) -> Vec<DocLabel> {
    let count = |s: &[DocLabel], l: DocLabel| s.iter().filter(|&&x| x == l).count();
    monotone_sequences(probs.len())
        .into_iter()
        .max_by(|a, b| {
            path_logp(probs, a)
                .partial_cmp(&path_logp(probs, b))
                .unwrap()
                .then(count(a, DocLabel::Pre).cmp(&count(b, DocLabel::Pre)))
                .then(count(a, DocLabel::Mid).cmp(&count(b, DocLabel::Mid)))
        })
        .unwrap()
}

fn dist_strategy() -> impl Strategy<Value = LabelDistribution> {
    (0.01f64..1.0, 0.01f64..1.0, 0.01f64..1.0).prop_map(|(a, b, c)| {
        let s = a + b + c;
        LabelDistribution::new([a / s, b / s, 1.0 - a / s - b / s]).unwrap()
    })
}

proptest! {
    #[test]
    fn decode_matches_enumeration(probs in proptest::collection::vec(dist_strategy(), 1..=8)) {
        let fast = constrained_decode(&probs);
        let slow = brute_force(&probs);
        prop_assert!(is_monotone(&fast));
        prop_assert!((path_logp(&probs, &fast) - path_logp(&probs, &slow)).abs() < 1e-9);
    }

    #[test]
    fn decode_keeps_monotone_argmax(n_pre in 0usize..4, n_mid in 0usize..4, n_post in 0usize..4) {
        let mk = |i: usize| {
            let mut p = [0.1; 3];
            p[i] = 0.8;
            LabelDistribution::new(p).unwrap()
        };
        let probs: Vec<_> = core::iter::repeat_n(mk(0), n_pre)
            .chain(core::iter::repeat_n(mk(1), n_mid))
            .chain(core::iter::repeat_n(mk(2), n_post))
            .collect();
        let labels = constrained_decode(&probs);
        let want: Vec<_> = probs.iter().map(|p| DocLabel::from_index(crate::math::argmax3(&p.as_array()))).collect();
        prop_assert_eq!(labels, want);
    }
}
