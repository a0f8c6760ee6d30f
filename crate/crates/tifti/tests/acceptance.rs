//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tifti::cli::write_models;
use tifti::corpus_io::write_corpus;
use tifti::report::{write_agreement_csv, write_summary_csv};
use tifti_core::cascade::{Analysis, Evidence, IntervalPrediction, Method};
use tifti_core::corpus::{label_documents, CondensedDocument, DocumentTimeline, Origin, PatientDrugExample, RegimenLabel};
use tifti_core::date::DateStamp;
use tifti_core::eval::{evaluate, evaluate_methods, f1_taken, run_ablation, split_examples, AblationResult, MethodResult, PipelineConfig};
use tifti_core::features::{FeatureConfig, FeatureVector};
use tifti_core::lexicon::LexiconKind;
use tifti_core::linear::{LinearSoftmax, Sample};
use tifti_core::seqlabel::{
    constrained_decode, interval_from_labels, objective, LabelDistribution, LabeledSequence, LabelerVariant,
    SequenceLabelerModel, TimelineKind,
};
use tifti_core::synth::{generate_corpus, GenConfig, LexiconChoice};
use tifti_core::temporal::{tag_sentence, tag_time_expressions, TimeBucket};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn d(s: &str) -> DateStamp {
    s.parse().expect("valid date literal")
}

// 1. decoder vs brute force

fn path_score(probs: &[[f64; 3]], labels: &[usize]) -> f64 {
    probs.iter().zip(labels).map(|(p, &l)| p[l].ln()).sum()
}

/// Every `PRE^a MID^b POST^c` sequence; best score, ties to more PRE then more MID.
fn brute_force(probs: &[[f64; 3]]) -> (Vec<usize>, f64) {
    let n = probs.len();
    let mut best: Option<(Vec<usize>, f64, usize, usize)> = None;
    for a in 0..=n {
        for b in 0..=n - a {
            let labels: Vec<usize> = (0..n).map(|i| if i < a { 0 } else if i < a + b { 1 } else { 2 }).collect();
            let s = path_score(probs, &labels);
            let better = match &best {
                None => true,
                Some((_, bs, ba, bb)) => s > *bs || (s == *bs && (a, b) > (*ba, *bb)),
            };
            if better {
                best = Some((labels, s, a, b));
            }
        }
    }
    let (labels, s, _, _) = best.expect("at least one sequence");
    (labels, s)
}

fn random_row(rng: &mut ChaCha8Rng) -> [f64; 3] {
    if rng.random_bool(0.25) {
        // dyadic rows create exact ties
        const ROWS: [[f64; 3]; 4] = [[0.25, 0.25, 0.5], [0.5, 0.25, 0.25], [0.25, 0.5, 0.25], [0.5, 0.5, 0.0]];
        let r = ROWS[rng.random_range(0..3)];
        return r;
    }
    let raw = [rng.random_range(0.01..1.0), rng.random_range(0.01..1.0), rng.random_range(0.01..1.0)];
    let s: f64 = raw.iter().sum();
    [raw[0] / s, raw[1] / s, 1.0 - raw[0] / s - raw[1] / s]
}

fn criterion_1() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let n = rng.random_range(1..=8);
        let probs: Vec<[f64; 3]> = (0..n).map(|_| random_row(&mut rng)).collect();
        let dists: Vec<LabelDistribution> =
            probs.iter().map(|p| LabelDistribution::new(*p).map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
        let got: Vec<usize> = constrained_decode(&dists).iter().map(|l| l.index()).collect();
        let (want, want_score) = brute_force(&probs);
        let diff = (path_score(&probs, &got) - want_score).abs();
        worst = worst.max(diff);
        ensure(diff < 1e-9 && got == want, || format!("case {case}: decoded {got:?}, oracle {want:?}, score diff {diff:e}"))?;
    }
    Ok(format!("1000 matrices agree, max score diff {worst:e}"))
}

// 2. gradient checks

const FD_EPS: f64 = 1e-4;

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

fn random_features(rng: &mut ChaCha8Rng, dim: usize) -> FeatureVector {
    let mut entries = Vec::new();
    for j in 0..dim {
        if rng.random_bool(0.4) {
            entries.push((j as u32, rng.random_range(-1.0..1.0)));
        }
    }
    FeatureVector { dim, entries }.normalized()
}

fn seq_gradient_error(model: &SequenceLabelerModel, data: &[LabeledSequence], l2: f64) -> f64 {
    let (_, grad) = objective(model, data, l2);
    let base = model.to_flat();
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for i in 0..base.len() {
        let mut p = base.clone();
        p[i] = base[i] + FD_EPS;
        probe.set_flat(&p).expect("same shape");
        let up = objective(&probe, data, l2).0;
        p[i] = base[i] - FD_EPS;
        probe.set_flat(&p).expect("same shape");
        let down = objective(&probe, data, l2).0;
        worst = worst.max(relative_error(grad[i], (up - down) / (2.0 * FD_EPS)));
    }
    worst
}

fn linear_gradient_error(model: &LinearSoftmax, data: &[Sample], l2: f64) -> f64 {
    let (_, grad) = model.objective(data, l2);
    let base = model.to_flat();
    let mut worst: f64 = 0.0;
    for i in 0..base.len() {
        let mut p = base.clone();
        p[i] = base[i] + FD_EPS;
        let up = LinearSoftmax::from_flat(model.dim, &p).expect("same shape").objective(data, l2).0;
        p[i] = base[i] - FD_EPS;
        let down = LinearSoftmax::from_flat(model.dim, &p).expect("same shape").objective(data, l2).0;
        worst = worst.max(relative_error(grad[i], (up - down) / (2.0 * FD_EPS)));
    }
    worst
}

fn five_doc_sequence(rng: &mut ChaCha8Rng, dim: usize) -> LabeledSequence {
    let a = rng.random_range(0..=5);
    let b = rng.random_range(0..=5 - a);
    LabeledSequence {
        xs: (0..5).map(|_| random_features(rng, dim)).collect(),
        targets: (0..5).map(|i| if i < a { 0 } else if i < a + b { 1 } else { 2 }).collect(),
    }
}

fn criterion_2() -> Check {
    let dim = 16;
    let (mut worst_log, mut worst_rnn): (f64, f64) = (0.0, 0.0);
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(200 + seed);
        let data = vec![five_doc_sequence(&mut rng, dim)];

        let logistic =
            SequenceLabelerModel::init(LabelerVariant::IndependentLogistic, FeatureConfig::with_dim(dim), TimelineKind::Original, seed);
        worst_log = worst_log.max(seq_gradient_error(&logistic, &data, 1e-3));

        let samples: Vec<Sample> = (0..8)
            .map(|_| Sample { x: random_features(&mut rng, dim), target: rng.random_range(0..3), weight: rng.random_range(0.5..2.0) })
            .collect();
        let linear = LinearSoftmax::uniform(dim, 0.5, &mut rng);
        worst_log = worst_log.max(linear_gradient_error(&linear, &samples, 1e-3));

        let mut rnn = SequenceLabelerModel::init(
            LabelerVariant::Birnn { input: 6, hidden: 4 },
            FeatureConfig::with_dim(dim),
            TimelineKind::Simulated,
            seed,
        );
        let scaled: Vec<f64> = rnn.to_flat().iter().map(|v| v * 5.0).collect();
        rnn.set_flat(&scaled).map_err(|e| e.to_string())?;
        worst_rnn = worst_rnn.max(seq_gradient_error(&rnn, &data, 1e-3));
    }
    ensure(worst_log <= 1e-5 && worst_rnn <= 1e-4, || {
        format!("max relative error logistic {worst_log:e} (limit 1e-5), recurrent {worst_rnn:e} (limit 1e-4)")
    })?;
    Ok(format!("max relative error logistic {worst_log:.1e}, recurrent {worst_rnn:.1e}"))
}

// 3. temporal fixtures

fn fixture_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/temporal_cases.tsv")
}

fn criterion_3() -> Check {
    let text = fs::read_to_string(fixture_path()).map_err(|e| e.to_string())?;
    let mut cases = 0;
    let mut buckets = BTreeMap::new();
    let mut failures = Vec::new();
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let cols: Vec<&str> = line.split('\t').collect();
        ensure(cols.len() == 5, || format!("malformed fixture line {line:?}"))?;
        cases += 1;
        let found = tag_sentence(cols[0], d(cols[1]));
        let got: Vec<(String, String, String)> = found
            .iter()
            .map(|m| (cols[0][m.start..m.end].to_string(), m.bucket.name().to_string(), m.mapped_date.to_string()))
            .collect();
        let want = if cols[2] == "NONE" {
            vec![]
        } else {
            *buckets.entry(cols[3].to_string()).or_insert(0) += 1;
            vec![(cols[2].to_string(), cols[3].to_string(), cols[4].to_string())]
        };
        if got != want {
            failures.push(format!("{:?}: got {got:?}, want {want:?}", cols[0]));
        }
    }
    ensure(cases >= 60, || format!("only {cases} fixture cases"))?;
    ensure(TimeBucket::ALL.iter().all(|b| buckets.contains_key(b.name())), || format!("buckets covered: {buckets:?}"))?;
    ensure(failures.is_empty(), || format!("{} of {cases} mismatched; first: {}", failures.len(), failures[0]))?;
    Ok(format!("{cases} cases exact, per bucket {buckets:?}"))
}

// 4. label round trip

fn criterion_4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let base = d("2015-01-01");
    for case in 0..500 {
        let n = rng.random_range(1..=12);
        let mut days: Vec<i64> = (0..n).map(|_| rng.random_range(0..400)).collect();
        days.sort_unstable();
        let timeline = DocumentTimeline {
            docs: days
                .iter()
                .enumerate()
                .map(|(i, &k)| CondensedDocument {
                    timestamp: base.add_days(k),
                    sentences: vec!["DRUG noted.".into()],
                    is_pseudo: false,
                    origin: Origin::Document(i),
                })
                .collect(),
        };
        let start = base.add_days(rng.random_range(-30..430));
        let end = rng.random_bool(0.6).then(|| start.add_days(rng.random_range(0..200)));
        let gold = RegimenLabel::taken(start, end).map_err(|e| e.to_string())?;
        let ts = timeline.timestamps();
        let got = interval_from_labels(&label_documents(&timeline, &gold), &ts).map_err(|e| e.to_string())?;
        let first_at_or_after = |x: DateStamp| ts.iter().copied().find(|&t| t >= x);
        let want_start = first_at_or_after(start);
        let want_end = end.and_then(first_at_or_after);
        ensure(got.taken == want_start.is_some() && got.start == want_start && got.end == want_end, || {
            format!("case {case}: gold {gold:?} over {ts:?} gave {got:?}")
        })?;
    }
    Ok("500 random timelines round-trip".into())
}

// 5. metrics

fn taken(start: &str, end: Option<&str>) -> IntervalPrediction {
    IntervalPrediction {
        taken: true,
        start: Some(d(start)),
        end: end.map(d),
        start_evidence: Some(Evidence::Timeline),
        end_evidence: end.map(|_| Evidence::Timeline),
    }
}

fn criterion_5() -> Check {
    let g = |s: &str, e: Option<&str>| RegimenLabel::taken(d(s), e.map(d)).expect("valid gold");
    let preds = [taken("2019-01-01", None), taken("2019-01-01", None), taken("2019-01-01", None), IntervalPrediction::not_taken()];
    let golds = [g("2019-01-01", None), g("2019-01-01", None), RegimenLabel::not_taken(), g("2019-01-01", None)];
    let (f1, p, r) = f1_taken(&preds, &golds).map_err(|e| e.to_string())?;
    let third = 2.0 / 3.0;
    ensure((f1 - third).abs() < 1e-12 && (p - third).abs() < 1e-12 && (r - third).abs() < 1e-12, || {
        format!("2TP/1FP/1FN gave f1 {f1} p {p} r {r}")
    })?;

    // ongoing handling: both ongoing matches at every t; one ongoing never does
    let windows = [0, 1, 30, 1000];
    let stop_at = |pred: IntervalPrediction, gold: RegimenLabel| -> Result<Vec<f64>, String> {
        let rep = evaluate(&[pred], &[gold], &windows).map_err(|e| e.to_string())?;
        Ok(windows.iter().map(|&t| rep.stop_at(t).expect("one true positive")).collect())
    };
    let both = stop_at(taken("2019-01-01", None), g("2019-03-01", None))?;
    let pred_only = stop_at(taken("2019-01-01", None), g("2019-01-01", Some("2019-02-01")))?;
    let gold_only = stop_at(taken("2019-01-01", Some("2019-02-01")), g("2019-01-01", None))?;
    ensure(both == [1.0; 4] && pred_only == [0.0; 4] && gold_only == [0.0; 4], || {
        format!("ongoing stop values {both:?} {pred_only:?} {gold_only:?}")
    })?;
    let no_tp = evaluate(&[IntervalPrediction::not_taken()], &[g("2019-01-01", None)], &windows).map_err(|e| e.to_string())?;
    ensure(no_tp.start_at(0).is_none() && no_tp.stop_at(0).is_none(), || "empty TP set reported as a number".into())?;

    // monotone in t on random predictions
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let base = d("2018-01-01");
    let windows: Vec<u32> = (0..=120).collect();
    for round in 0..50 {
        let n = rng.random_range(1..40);
        let mut preds = Vec::new();
        let mut golds = Vec::new();
        for _ in 0..n {
            let mk = |rng: &mut ChaCha8Rng| {
                if rng.random_bool(0.2) {
                    return (false, None, None);
                }
                let s = base.add_days(rng.random_range(0..300));
                let e = rng.random_bool(0.6).then(|| s.add_days(rng.random_range(0..100)));
                (true, Some(s), e)
            };
            let (pt, ps, pe) = mk(&mut rng);
            let (gt, gs, ge) = mk(&mut rng);
            preds.push(IntervalPrediction { taken: pt, start: ps, end: pe, start_evidence: None, end_evidence: None });
            golds.push(RegimenLabel { taken: gt, start: gs, end: ge });
        }
        let rep = evaluate(&preds, &golds, &windows).map_err(|e| e.to_string())?;
        for w in rep.agreement.windows(2) {
            let ok = |a: Option<f64>, b: Option<f64>| match (a, b) {
                (Some(a), Some(b)) => a <= b,
                (None, None) => true,
                _ => false,
            };
            ensure(ok(w[0].start, w[1].start) && ok(w[0].stop, w[1].stop), || {
                format!("round {round}: agreement decreases between t={} and t={}", w[0].t, w[1].t)
            })?;
        }
    }
    Ok("F1 2/3 example, ongoing Stop rule, empty-TP n/a, monotone in t over 50 random sets".into())
}

// 6-8. synthetic protocol

struct Protocol {
    rcc: AblationResult,
    nsclc: AblationResult,
    /// RCC-trained models evaluated on the NSCLC test split.
    transfer: Vec<MethodResult>,
    seconds_rcc: f64,
}

fn gen_config(lexicon: LexiconKind) -> GenConfig {
    GenConfig { lexicon: LexiconChoice::Builtin(lexicon), seed: 7, ..GenConfig::default() }
}

/// Runs criteria 6 and 7 and writes every artifact into `dir`.
fn run_protocol(dir: &Path) -> Result<Protocol, String> {
    let err = |e: &dyn std::fmt::Display| e.to_string();
    let config = PipelineConfig::default().with_seed(7);

    let t0 = Instant::now();
    let rcc_corpus = generate_corpus(&gen_config(LexiconKind::Rcc)).map_err(|e| err(&e))?;
    let rcc = run_ablation(&rcc_corpus, &config).map_err(|e| err(&e))?;
    let seconds_rcc = t0.elapsed().as_secs_f64();

    let nsclc_corpus = generate_corpus(&gen_config(LexiconKind::Nsclc)).map_err(|e| err(&e))?;
    let nsclc = run_ablation(&nsclc_corpus, &config).map_err(|e| err(&e))?;
    let (_, nsclc_test) = split_examples(&nsclc_corpus, config.dev_fraction, config.seed).map_err(|e| err(&e))?;
    let transfer = evaluate_methods(&nsclc_test, &rcc.models, &Method::ALL, &config).map_err(|e| err(&e))?;

    let write = |name: &str, corpus: &[PatientDrugExample], result: &[MethodResult], models: Option<&AblationResult>| {
        let sub = dir.join(name);
        fs::create_dir_all(&sub).map_err(|e| err(&e))?;
        if !corpus.is_empty() {
            write_corpus(&sub.join("corpus.jsonl"), corpus).map_err(|e| err(&e))?;
        }
        if let Some(a) = models {
            write_models(&sub.join("models"), &a.models).map_err(|e| err(&e))?;
        }
        write_summary_csv(&sub.join("summary.csv"), result).map_err(|e| err(&e))?;
        write_agreement_csv(&sub.join("agreement.csv"), result).map_err(|e| err(&e))
    };
    write("rcc", &rcc_corpus, &rcc.rows, Some(&rcc))?;
    write("nsclc", &nsclc_corpus, &nsclc.rows, Some(&nsclc))?;
    write("transfer", &[], &transfer, None)?;
    Ok(Protocol { rcc, nsclc, transfer, seconds_rcc })
}

fn row(rows: &[MethodResult], m: Method) -> &MethodResult {
    rows.iter().find(|r| r.method == m).expect("all four methods evaluated")
}

fn start0(r: &MethodResult) -> f64 {
    r.report.start_at(0).unwrap_or(f64::NAN)
}

fn criterion_6(p: &Protocol) -> Check {
    let rows = &p.rcc.rows;
    let full = row(rows, Method::FullTifti);
    let timeline = row(rows, Method::Timeline);
    let sim = row(rows, Method::SimTimeline);
    let stops: Vec<f64> = rows.iter().map(|r| r.report.stop_at(0).unwrap_or(f64::NAN)).collect();
    let spread = stops.iter().cloned().fold(f64::MIN, f64::max) - stops.iter().cloned().fold(f64::MAX, f64::min);
    let gain = start0(full) - start0(timeline);
    let summary = format!(
        "F1 {:.3}, Start(0) FULL {:.1}% vs TIMELINE {:.1}% vs SIM {:.1}%, Stop(0) spread {:.1} pts, {:.0}s",
        full.report.f1,
        100.0 * start0(full),
        100.0 * start0(timeline),
        100.0 * start0(sim),
        100.0 * spread,
        p.seconds_rcc
    );
    ensure(rows.len() == 4, || format!("{} rows", rows.len()))?;
    ensure(full.report.f1 >= 0.90, || format!("(a) failed: {summary}"))?;
    ensure(gain >= 0.10, || format!("(b) failed: {summary}"))?;
    ensure(start0(sim) >= start0(timeline), || format!("(c) failed: {summary}"))?;
    ensure(spread < 0.05, || format!("(d) failed: {summary}"))?;
    ensure(p.seconds_rcc < 600.0, || format!("runtime over 10 min: {summary}"))?;
    Ok(summary)
}

fn criterion_7(p: &Protocol) -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for m in [Method::FullTifti, Method::Timeline] {
        let native = row(&p.nsclc.rows, m);
        let transfer = row(&p.transfer, m);
        let df1 = (native.report.f1 - transfer.report.f1).abs();
        let ds = (start0(native) - start0(transfer)).abs();
        parts.push(format!(
            "{}: F1 {:.3} vs {:.3}, Start(0) {:.1}% vs {:.1}%",
            m.name(),
            transfer.report.f1,
            native.report.f1,
            100.0 * start0(transfer),
            100.0 * start0(native)
        ));
        ok &= df1 <= 0.03 && ds <= 0.05;
    }
    let summary = format!("RCC-trained vs NSCLC-trained on NSCLC test; {}", parts.join("; "));
    ensure(ok, || summary.clone())?;
    Ok(summary)
}

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).expect("readable dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path.strip_prefix(dir).expect("under root").to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn criterion_8(first: &Path, second: &Path) -> Check {
    let a = files_under(first);
    let b = files_under(second);
    ensure(a == b, || format!("file sets differ: {a:?} vs {b:?}"))?;
    let mut bytes = 0;
    for rel in &a {
        let x = fs::read(first.join(rel)).map_err(|e| e.to_string())?;
        let y = fs::read(second.join(rel)).map_err(|e| e.to_string())?;
        ensure(x == y, || format!("{} differs between runs", rel.display()))?;
        bytes += x.len();
    }
    Ok(format!("{} files ({} MB) byte-identical across two runs", a.len(), bytes / 1_000_000))
}

// 9. cascade degeneracy

fn criterion_9() -> Check {
    let err = |e: tifti_core::Error| e.to_string();
    let gen = GenConfig {
        n_examples: 600,
        explicit_start_prob: 0.0,
        explicit_end_prob: 0.0,
        off_visit_explicit_end_prob: 0.0,
        distractor_prob: 0.0,
        seed: 9,
        ..GenConfig::default()
    };
    let corpus = generate_corpus(&gen).map_err(err)?;
    let mut cache = tifti_core::eval::OtherDrugCache::default();
    let slice: Vec<PatientDrugExample> = corpus
        .iter()
        .filter(|e| {
            let a = Analysis::new(e, cache.get(&e.drug));
            tag_time_expressions(&a.timeline).is_empty()
        })
        .cloned()
        .collect();
    ensure(slice.len() >= 100, || format!("only {} expression-free examples", slice.len()))?;
    let mut config = PipelineConfig::default().with_seed(9);
    config.tau = 1.0;
    config.seq_features = FeatureConfig::with_dim(1 << 14);
    config.expr_features = FeatureConfig::with_dim(1 << 14);
    let result = run_ablation(&slice, &config).map_err(err)?;
    let reference: Vec<IntervalPrediction> = result.rows[0].predictions.iter().map(|p| p.interval).collect();
    for r in &result.rows {
        ensure(r.predictions.iter().all(|p| p.expression_scores.is_empty()), || {
            format!("{} scored an expression", r.method.name())
        })?;
        let intervals: Vec<IntervalPrediction> = r.predictions.iter().map(|p| p.interval).collect();
        ensure(intervals == reference, || format!("{} differs from {}", r.method.name(), result.rows[0].method.name()))?;
    }
    Ok(format!(
        "{} expression-free examples ({} test), tau = 1.0: all four methods identical",
        slice.len(),
        result.n_test
    ))
}

type Outcome = (u8, &'static str, Check, f64);

fn timed(results: &mut Vec<Outcome>, n: u8, name: &'static str, f: impl FnOnce() -> Check) {
    let t = Instant::now();
    let r = f();
    results.push((n, name, r, t.elapsed().as_secs_f64()));
}

fn main() -> ExitCode {
    let mut results: Vec<Outcome> = Vec::new();
    timed(&mut results, 1, "decoder oracle equivalence", criterion_1);
    timed(&mut results, 2, "gradient checks", criterion_2);
    timed(&mut results, 3, "temporal tagger fixtures", criterion_3);
    timed(&mut results, 4, "label round trip", criterion_4);
    timed(&mut results, 5, "metric unit tests", criterion_5);

    let first = tempfile::tempdir().expect("temp dir");
    let second = tempfile::tempdir().expect("temp dir");
    let t = Instant::now();
    let protocol = run_protocol(first.path());
    let protocol_secs = t.elapsed().as_secs_f64();
    match &protocol {
        Ok(p) => {
            timed(&mut results, 6, "end-to-end synthetic run", || criterion_6(p));
            timed(&mut results, 7, "RCC to NSCLC generalization", || criterion_7(p));
        }
        Err(e) => {
            results.push((6, "end-to-end synthetic run", Err(e.clone()), protocol_secs));
            results.push((7, "RCC to NSCLC generalization", Err(e.clone()), protocol_secs));
        }
    }
    timed(&mut results, 8, "determinism", || {
        run_protocol(second.path())?;
        criterion_8(first.path(), second.path())
    });
    timed(&mut results, 9, "cascade degeneracy", criterion_9);

    let mut failed = 0;
    for (n, name, r, secs) in &results {
        match r {
            Ok(detail) => println!("criterion {n} ({name}): PASS [{secs:.1}s] {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL [{secs:.1}s] {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
