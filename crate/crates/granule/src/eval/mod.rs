//! Classifier evaluation: accuracy and G-mean metrics, and repeated
//! stratified k-fold cross-validation with optional training-fold
//! subsampling.
//!
//! Samplers only ever see the training folds. Every fold re-checks that the
//! ids given to the classifier are disjoint from the test fold, and the
//! report carries the outcome of that audit. Per-fold randomness is derived
//! as a pure function of `(master seed, repeat, fold)`, so any single fold
//! can be replayed in isolation.

pub mod knn;
pub mod tree;

use std::time::Instant;

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::data::{ClassId, Dataset, DatasetSummary, SampleId};
use crate::error::{Error, Result};
use crate::gbabs;
use crate::harness;
use crate::rdgbg;
use crate::rng::RngStream;

pub const DEFAULT_FOLDS: usize = 5;
pub const DEFAULT_REPEATS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Knn,
    Cart,
}

impl ClassifierKind {
    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::Cart => "cart",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    /// Train on the full training fold.
    None,
    /// Granulate the training fold and keep the borderline sample.
    Gbabs,
    /// Simple random sample, size-matched to what Gbabs selects on the same
    /// fold under the same seed.
    Srs,
}

impl SamplerKind {
    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::None => "none",
            SamplerKind::Gbabs => "gbabs",
            SamplerKind::Srs => "srs",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalConfig {
    pub classifier: ClassifierKind,
    pub sampler: SamplerKind,
    pub k: usize,
    pub rho: usize,
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub normalize: bool,
    /// Label-noise ratio injected upstream, echoed for the record; 0 when
    /// the dataset was not altered.
    pub noise_ratio: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            classifier: ClassifierKind::Knn,
            sampler: SamplerKind::None,
            k: knn::DEFAULT_K,
            rho: rdgbg::DEFAULT_RHO,
            folds: DEFAULT_FOLDS,
            repeats: DEFAULT_REPEATS,
            seed: 0,
            normalize: true,
            noise_ratio: 0.0,
        }
    }
}

/// Deterministic per-fold quality numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldMetrics {
    pub accuracy: f64,
    pub g_mean: f64,
    /// Fraction of the training fold the classifier was fitted on.
    pub sampling_ratio: f64,
}

/// Wall-clock timings for one fold. Not serialized: reports must be
/// byte-identical across runs of the same configuration.
#[derive(Debug, Clone, Copy, Default)]
pub struct FoldTimings {
    pub granulation_ms: f64,
    pub sampling_ms: f64,
    pub train_ms: f64,
    pub predict_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FoldRecord {
    pub repeat: usize,
    pub fold: usize,
    /// Seed of the fold's derived random stream.
    pub seed: u64,
    pub train_n: usize,
    pub selected_n: usize,
    pub test_n: usize,
    /// `None` when the fold failed (see `failure`); failed folds are
    /// excluded from the aggregates but still counted.
    pub metrics: Option<FoldMetrics>,
    pub failure: Option<String>,
    pub audit_ok: bool,
    #[serde(skip)]
    pub timings: FoldTimings,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub dataset: DatasetSummary,
    /// False when some class was too small for stratification and plain
    /// shuffled folds were used instead.
    pub stratified: bool,
    pub folds: Vec<FoldRecord>,
    pub failed_folds: usize,
    /// Mean over successful folds; `None` if every fold failed.
    pub mean: Option<FoldMetrics>,
    /// Population standard deviation over successful folds.
    pub stddev: Option<FoldMetrics>,
    pub leakage_audit_passed: bool,
}

/// Fraction of predictions matching the truth.
pub fn accuracy(preds: &[ClassId], truths: &[ClassId]) -> f64 {
    assert_eq!(preds.len(), truths.len());
    assert!(!truths.is_empty());
    let hits = preds.iter().zip(truths).filter(|(p, t)| p == t).count();
    hits as f64 / truths.len() as f64
}

/// Geometric mean of per-class recalls over the classes present in
/// `truths`. Any class with zero recall pulls the whole score to 0.
pub fn g_mean(preds: &[ClassId], truths: &[ClassId]) -> f64 {
    assert_eq!(preds.len(), truths.len());
    assert!(!truths.is_empty());
    let q = truths.iter().copied().max().unwrap() + 1;
    let mut total = vec![0usize; q];
    let mut correct = vec![0usize; q];
    for (&p, &t) in preds.iter().zip(truths) {
        total[t] += 1;
        if p == t {
            correct[t] += 1;
        }
    }
    let mut product = 1.0f64;
    let mut present = 0usize;
    for c in 0..q {
        if total[c] == 0 {
            continue;
        }
        if correct[c] == 0 {
            return 0.0;
        }
        product *= correct[c] as f64 / total[c] as f64;
        present += 1;
    }
    product.powf(1.0 / present as f64)
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Fold index per sample id for one repeat.
fn assign_folds(
    dataset: &Dataset,
    folds: usize,
    stratified: bool,
    rng: &mut RngStream,
) -> Vec<usize> {
    let n = dataset.n_samples();
    let mut assign = vec![0usize; n];
    if stratified {
        for class in 0..dataset.n_classes() {
            let mut ids: Vec<SampleId> = (0..n).filter(|&i| dataset.label(i) == class).collect();
            ids.shuffle(rng);
            for (i, &id) in ids.iter().enumerate() {
                assign[id] = i % folds;
            }
        }
    } else {
        let mut ids: Vec<SampleId> = (0..n).collect();
        ids.shuffle(rng);
        for (i, &id) in ids.iter().enumerate() {
            assign[id] = i % folds;
        }
    }
    assign
}

/// True when train/test partition the ids exactly and everything the
/// classifier saw came from the training fold.
fn audit_fold(
    n: usize,
    train_ids: &[SampleId],
    test_ids: &[SampleId],
    selected: &[SampleId],
) -> bool {
    let mut mask = vec![0u8; n];
    for &t in train_ids {
        if mask[t] != 0 {
            return false;
        }
        mask[t] = 1;
    }
    for &t in test_ids {
        if mask[t] != 0 {
            return false;
        }
        mask[t] = 2;
    }
    mask.iter().all(|&m| m != 0) && selected.iter().all(|&s| mask[s] == 1)
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

fn run_fold(
    working: &Dataset,
    config: &EvalConfig,
    assign: &[usize],
    repeat: usize,
    fold: usize,
    master: &RngStream,
) -> Result<FoldRecord> {
    let n = working.n_samples();
    let test_ids: Vec<SampleId> = (0..n).filter(|&i| assign[i] == fold).collect();
    let train_ids: Vec<SampleId> = (0..n).filter(|&i| assign[i] != fold).collect();
    let fold_stream = master.derive(&[2, repeat as u64, fold as u64]);
    let mut timings = FoldTimings::default();

    let train = working.subset(&train_ids)?;
    let (selected_local, sampling_ratio) = match config.sampler {
        SamplerKind::None => ((0..train_ids.len()).collect::<Vec<_>>(), 1.0),
        SamplerKind::Gbabs => {
            let t0 = Instant::now();
            let result = rdgbg::run_rdgbg(&train, config.rho, fold_stream.derive(&[0]))?;
            timings.granulation_ms = ms(t0);
            let t1 = Instant::now();
            let sampled = gbabs::sample_borderline(&train, &result);
            timings.sampling_ms = ms(t1);
            (sampled.sample_ids, sampled.ratio)
        }
        SamplerKind::Srs => {
            // Run the granular sampler first purely to find out how many
            // samples it would keep, then draw that many uniformly.
            let t0 = Instant::now();
            let result = rdgbg::run_rdgbg(&train, config.rho, fold_stream.derive(&[0]))?;
            timings.granulation_ms = ms(t0);
            let t1 = Instant::now();
            let sampled = gbabs::sample_borderline(&train, &result);
            let mut srng = fold_stream.derive(&[1]);
            let ids = harness::srs_sample_count(&train, sampled.sample_ids.len(), &mut srng)?;
            timings.sampling_ms = ms(t1);
            let ratio = ids.len() as f64 / train.n_samples() as f64;
            (ids, ratio)
        }
    };
    let selected_parent: Vec<SampleId> = selected_local.iter().map(|&i| train_ids[i]).collect();
    let audit_ok = audit_fold(n, &train_ids, &test_ids, &selected_parent);

    let mut record = FoldRecord {
        repeat,
        fold,
        seed: fold_stream.seed(),
        train_n: train_ids.len(),
        selected_n: selected_parent.len(),
        test_n: test_ids.len(),
        metrics: None,
        failure: None,
        audit_ok,
        timings,
    };
    if !audit_ok {
        record.failure = Some("leakage audit failed".into());
        return Ok(record);
    }
    if selected_parent.is_empty() {
        record.failure = Some("sampler selected no training samples".into());
        return Ok(record);
    }

    let fit_set = working.subset(&selected_parent)?;
    let test_set = working.subset(&test_ids)?;
    let truths: Vec<ClassId> = test_ids.iter().map(|&i| working.label(i)).collect();
    let preds = match config.classifier {
        ClassifierKind::Knn => {
            let t0 = Instant::now();
            let preds = knn::predict_batch(&fit_set, &test_set, config.k);
            record.timings.predict_ms = ms(t0);
            preds
        }
        ClassifierKind::Cart => {
            let t0 = Instant::now();
            let model = tree::DecisionTree::fit(&fit_set);
            record.timings.train_ms = ms(t0);
            let t1 = Instant::now();
            let preds = model.predict_batch(&test_set);
            record.timings.predict_ms = ms(t1);
            preds
        }
    };
    record.metrics = Some(FoldMetrics {
        accuracy: accuracy(&preds, &truths),
        g_mean: g_mean(&preds, &truths),
        sampling_ratio,
    });
    Ok(record)
}

/// Repeated stratified k-fold cross-validation of the configured
/// classifier, with the configured sampler applied to each training fold.
pub fn cross_validate(dataset: &Dataset, config: &EvalConfig) -> Result<EvalReport> {
    if config.folds < 2 {
        return Err(Error::usage("cross-validation needs at least 2 folds"));
    }
    if config.folds > dataset.n_samples() {
        return Err(Error::usage(format!(
            "{} folds but only {} samples",
            config.folds,
            dataset.n_samples()
        )));
    }
    if config.repeats < 1 {
        return Err(Error::usage("cross-validation needs at least 1 repeat"));
    }
    if config.classifier == ClassifierKind::Knn && config.k < 1 {
        return Err(Error::usage("k must be at least 1"));
    }
    if config.sampler != SamplerKind::None && config.rho < rdgbg::MIN_RHO {
        return Err(Error::usage(format!(
            "rho must be at least {}, got {}",
            rdgbg::MIN_RHO,
            config.rho
        )));
    }

    let working = if config.normalize {
        dataset.normalize_min_max()
    } else {
        dataset.clone()
    };
    let stratified = working
        .class_counts()
        .iter()
        .all(|&c| c == 0 || c >= config.folds);
    let master = RngStream::new(config.seed);

    let mut folds = Vec::with_capacity(config.repeats * config.folds);
    for repeat in 0..config.repeats {
        let mut arng = master.derive(&[1, repeat as u64]);
        let assign = assign_folds(&working, config.folds, stratified, &mut arng);
        for fold in 0..config.folds {
            folds.push(run_fold(&working, config, &assign, repeat, fold, &master)?);
        }
    }

    let ok: Vec<FoldMetrics> = folds.iter().filter_map(|f| f.metrics).collect();
    let failed_folds = folds.len() - ok.len();
    let (mean, stddev) = if ok.is_empty() {
        (None, None)
    } else {
        let (acc_m, acc_s) = mean_sd(&ok.iter().map(|m| m.accuracy).collect::<Vec<_>>());
        let (gm_m, gm_s) = mean_sd(&ok.iter().map(|m| m.g_mean).collect::<Vec<_>>());
        let (sr_m, sr_s) = mean_sd(&ok.iter().map(|m| m.sampling_ratio).collect::<Vec<_>>());
        (
            Some(FoldMetrics {
                accuracy: acc_m,
                g_mean: gm_m,
                sampling_ratio: sr_m,
            }),
            Some(FoldMetrics {
                accuracy: acc_s,
                g_mean: gm_s,
                sampling_ratio: sr_s,
            }),
        )
    };
    let leakage_audit_passed = folds.iter().all(|f| f.audit_ok);
    Ok(EvalReport {
        config: config.clone(),
        dataset: dataset.summarize(),
        stratified,
        folds,
        failed_folds,
        mean,
        stddev,
        leakage_audit_passed,
    })
}
