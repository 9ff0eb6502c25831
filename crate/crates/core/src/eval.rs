//! Experiment harness: stratified k-fold cross-validation, learning
//! curves, noise-robustness sweeps, confusion matrices, and report
//! rendering.
//!
//! Every randomized step derives its RNG from the run seed, and all
//! parallel work is reassembled in index order, so a report is a pure
//! function of (dataset bytes, configuration, seed) regardless of the
//! worker count.

use std::collections::HashMap;
use std::time::Instant;

use crate::audio::{add_awgn, load_clip, AudioClip, AudioError, DatasetIndex};
use crate::classifier::{
    build_dictionary, classify, ClassifierConfig, ClassifierError, Dictionary,
};
use crate::features::{
    extract_features, extract_stage2_mean, FeatureConfig, FeatureError, FeatureVector,
};
use crate::util::{
    cosine_similarity, derive_seed, fnv1a64, fmt_f64, hash_f64s, parallel_map_indexed,
};

// Salt constants so unrelated random streams never collide.
const SALT_FOLDS: u64 = 0x01;
const SALT_PHI: u64 = 0x02;
const SALT_HOLDOUT: u64 = 0x03;
const SALT_TRIAL: u64 = 0x04;
const SALT_NOISE: u64 = 0x05;

/// Which feature the harness feeds the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMode {
    /// The full pipeline (default).
    SecondFft,
    /// Mean normalized frame spectrum only; the short-term baseline.
    Stage2Only,
}

impl FeatureMode {
    pub fn name(&self) -> &'static str {
        match self {
            FeatureMode::SecondFft => "second_fft",
            FeatureMode::Stage2Only => "stage2_only",
        }
    }
}

fn extract_with_mode(
    clip: &AudioClip,
    cfg: &FeatureConfig,
    mode: FeatureMode,
) -> Result<FeatureVector, FeatureError> {
    match mode {
        FeatureMode::SecondFft => extract_features(clip, cfg),
        FeatureMode::Stage2Only => extract_stage2_mean(clip, cfg),
    }
}

/// Per-clip fold assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    /// Fold index of each dataset entry, aligned with `index.entries`.
    pub assignments: Vec<usize>,
    pub seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("class {class:?} has {count} clips; need at least {k} for {k}-fold splits")]
    TooFewSamples {
        class: String,
        count: usize,
        k: usize,
    },
    #[error("mixed sample rates in dataset: {details}")]
    MixedSampleRates { details: String },
    #[error("bad sizes: {0}")]
    BadSizes(String),
    #[error("unknown label {label:?}")]
    UnknownLabel { label: String },
    #[error("{clip_id}: {source}")]
    Clip {
        clip_id: String,
        #[source]
        source: FeatureError,
    },
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}

/// Stratified fold assignment: shuffle each class with its own derived
/// RNG, then deal positions round-robin over the folds. Within every
/// class, fold sizes differ by at most one.
pub fn kfold_split(index: &DatasetIndex, k: usize, seed: u64) -> Result<FoldPlan, EvalError> {
    if k == 0 {
        return Err(EvalError::BadSizes("fold count must be positive".into()));
    }
    let counts = index.class_counts();
    for (class, &count) in index.classes.iter().zip(&counts) {
        if count < k {
            return Err(EvalError::TooFewSamples {
                class: class.clone(),
                count,
                k,
            });
        }
    }
    let mut assignments = vec![0usize; index.entries.len()];
    for (class_idx, class) in index.classes.iter().enumerate() {
        let mut members: Vec<usize> = index
            .entries
            .iter()
            .enumerate()
            .filter(|(_, e)| &e.label == class)
            .map(|(i, _)| i)
            .collect();
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng =
            rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(seed, &[class_idx as u64]));
        members.shuffle(&mut rng);
        for (pos, &entry_idx) in members.iter().enumerate() {
            assignments[entry_idx] = pos % k;
        }
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed,
    })
}

/// Count matrix: entry `(i, j)` counts truth `classes[i]` predicted as
/// `classes[j]`.
pub fn confusion_matrix(
    truths: &[String],
    preds: &[String],
    classes: &[String],
) -> Result<Vec<Vec<usize>>, EvalError> {
    assert_eq!(truths.len(), preds.len(), "truths/preds length mismatch");
    let lookup: HashMap<&str, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let mut m = vec![vec![0usize; classes.len()]; classes.len()];
    for (t, p) in truths.iter().zip(preds) {
        let ti = *lookup.get(t.as_str()).ok_or_else(|| EvalError::UnknownLabel {
            label: t.clone(),
        })?;
        let pi = *lookup.get(p.as_str()).ok_or_else(|| EvalError::UnknownLabel {
            label: p.clone(),
        })?;
        m[ti][pi] += 1;
    }
    Ok(m)
}

/// trace/sum of a confusion matrix; `None` when it is empty.
pub fn confusion_accuracy(confusion: &[Vec<usize>]) -> Option<f64> {
    let total: usize = confusion.iter().flatten().sum();
    if total == 0 {
        return None;
    }
    let correct: usize = confusion.iter().enumerate().map(|(i, row)| row[i]).sum();
    Some(correct as f64 / total as f64)
}

/// In-memory feature cache keyed by (clip content hash, feature config
/// fingerprint, feature mode). Cross-validation varies only dictionary
/// membership, so each clip's feature is computed once and reused.
pub struct FeatureCache {
    fingerprint: String,
    mode: FeatureMode,
    map: HashMap<u64, FeatureVector>,
}

impl FeatureCache {
    pub fn new(cfg: &FeatureConfig, mode: FeatureMode) -> FeatureCache {
        FeatureCache {
            fingerprint: cfg.fingerprint(),
            mode,
            map: HashMap::new(),
        }
    }

    /// Content hash of a clip: sample bits plus rate.
    pub fn content_key(clip: &AudioClip) -> u64 {
        hash_f64s(&clip.samples) ^ fnv1a64(&clip.sample_rate.to_le_bytes())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Features for every clip, in order; missing entries are computed
    /// (in parallel) and cached.
    pub fn features_for(
        &mut self,
        clips: &[AudioClip],
        cfg: &FeatureConfig,
        jobs: usize,
    ) -> Result<Vec<FeatureVector>, EvalError> {
        assert_eq!(
            self.fingerprint,
            cfg.fingerprint(),
            "feature cache used with a different config"
        );
        let keys: Vec<u64> = clips.iter().map(Self::content_key).collect();
        let mut missing: Vec<usize> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (i, key) in keys.iter().enumerate() {
            if !self.map.contains_key(key) && seen.insert(*key) {
                missing.push(i);
            }
        }
        let mode = self.mode;
        let computed = parallel_map_indexed(missing.len(), jobs, |mi| {
            extract_with_mode(&clips[missing[mi]], cfg, mode)
        });
        for (mi, result) in missing.iter().zip(computed) {
            let feature = result.map_err(|e| EvalError::Clip {
                clip_id: clips[*mi].source_id.clone(),
                source: e,
            })?;
            self.map.insert(keys[*mi], feature);
        }
        Ok(keys
            .iter()
            .map(|k| self.map.get(k).expect("cache filled above").clone())
            .collect())
    }
}

fn load_clips(index: &DatasetIndex, jobs: usize) -> Result<Vec<AudioClip>, EvalError> {
    let loaded = parallel_map_indexed(index.entries.len(), jobs, |i| {
        load_clip(&index.entries[i].path)
    });
    let mut clips = Vec::with_capacity(loaded.len());
    for c in loaded {
        clips.push(c?);
    }
    Ok(clips)
}

fn check_uniform_rate(clips: &[AudioClip]) -> Result<u32, EvalError> {
    let mut rates: Vec<(u32, &str)> = Vec::new();
    for c in clips {
        if !rates.iter().any(|(r, _)| *r == c.sample_rate) {
            rates.push((c.sample_rate, &c.source_id));
        }
    }
    match rates.as_slice() {
        [] => Err(EvalError::BadSizes("no clips to evaluate".into())),
        [(rate, _)] => Ok(*rate),
        many => {
            let details = many
                .iter()
                .map(|(r, id)| format!("{r} Hz (e.g. {id})"))
                .collect::<Vec<_>>()
                .join(", ");
            Err(EvalError::MixedSampleRates { details })
        }
    }
}

/// Cross-validation outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub classes: Vec<String>,
    /// Rows = truth, cols = predicted.
    pub confusion: Vec<Vec<usize>>,
    pub accuracy: f64,
    pub per_fold_accuracy: Vec<f64>,
    /// Canonical parameter rendering (excludes execution details such as
    /// the worker count, so reports are comparable across job settings).
    pub config_snapshot: String,
    pub config_hash: String,
    pub wall_time_s: f64,
}

impl EvalReport {
    pub fn total(&self) -> usize {
        self.confusion.iter().flatten().sum()
    }

    /// Human-readable summary (includes timing; see `to_csv` for the
    /// stable artifact).
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "accuracy {:.4} over {} classifications ({} classes, {} folds)\n",
            self.accuracy,
            self.total(),
            self.classes.len(),
            self.per_fold_accuracy.len()
        ));
        for (f, acc) in self.per_fold_accuracy.iter().enumerate() {
            out.push_str(&format!("  fold {f}: {acc:.4}\n"));
        }
        out.push_str("confusion (rows = truth, cols = predicted):\n");
        out.push_str(&format!("  {:>12}", ""));
        for c in &self.classes {
            out.push_str(&format!(" {c:>10}"));
        }
        out.push('\n');
        for (i, row) in self.confusion.iter().enumerate() {
            out.push_str(&format!("  {:>12}", self.classes[i]));
            for v in row {
                out.push_str(&format!(" {v:>10}"));
            }
            out.push('\n');
        }
        out.push_str(&format!("wall time: {:.2} s\n", self.wall_time_s));
        out.push_str(&format!("config {} {}\n", self.config_hash, self.config_snapshot));
        out
    }

    /// Deterministic CSV: confusion block plus metrics block. Carries no
    /// timing, so identical runs produce identical bytes.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# config {} {}\n", self.config_hash, self.config_snapshot));
        out.push_str("# reference: this method's published result on GTZAN is 95.7% accuracy at 35 dimensions\n");
        out.push_str("# confusion matrix: rows = truth, cols = predicted\n");
        out.push_str("class");
        for c in &self.classes {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
        for (i, row) in self.confusion.iter().enumerate() {
            out.push_str(&self.classes[i]);
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out.push_str("# metrics\nmetric,value\n");
        out.push_str(&format!("accuracy,{}\n", fmt_f64(self.accuracy)));
        for (f, acc) in self.per_fold_accuracy.iter().enumerate() {
            out.push_str(&format!("fold_{f}_accuracy,{}\n", fmt_f64(*acc)));
        }
        out.push_str(&format!("total_classifications,{}\n", self.total()));
        out
    }
}

fn snapshot(
    feature_cfg: &FeatureConfig,
    classifier_cfg: &ClassifierConfig,
    extras: &[(&str, String)],
) -> (String, String) {
    let mut s = format!(
        "{};{}",
        feature_cfg.snapshot(),
        classifier_cfg.snapshot()
    );
    for (k, v) in extras {
        s.push_str(&format!(";{k}={v}"));
    }
    let hash = format!("{:016x}", fnv1a64(s.as_bytes()));
    (s, hash)
}

/// Stratified k-fold cross-validation over an on-disk dataset.
///
/// For each fold, a dictionary is built from every clip outside the
/// fold and the fold's clips are classified against it. Features are
/// computed once per clip and shared across folds.
pub fn cross_validate(
    index: &DatasetIndex,
    feature_cfg: &FeatureConfig,
    classifier_cfg: &ClassifierConfig,
    k: usize,
    seed: u64,
    jobs: usize,
) -> Result<EvalReport, EvalError> {
    let t0 = Instant::now();
    if k < 2 {
        return Err(EvalError::BadSizes(format!(
            "cross-validation needs at least 2 folds, got {k}"
        )));
    }
    let plan = kfold_split(index, k, derive_seed(seed, &[SALT_FOLDS]))?;
    let clips = load_clips(index, jobs)?;
    let rate = check_uniform_rate(&clips)?;
    let mut cache = FeatureCache::new(feature_cfg, FeatureMode::SecondFft);
    let features = cache.features_for(&clips, feature_cfg, jobs)?;
    let fingerprint = feature_cfg.fingerprint();

    let n_classes = index.classes.len();
    let mut confusion = vec![vec![0usize; n_classes]; n_classes];
    let mut per_fold_accuracy = Vec::with_capacity(k);
    for fold in 0..k {
        let train_idx: Vec<usize> = (0..clips.len())
            .filter(|&i| plan.assignments[i] != fold)
            .collect();
        let test_idx: Vec<usize> = (0..clips.len())
            .filter(|&i| plan.assignments[i] == fold)
            .collect();
        let train_features: Vec<FeatureVector> =
            train_idx.iter().map(|&i| features[i].clone()).collect();
        let train_labels: Vec<String> = train_idx
            .iter()
            .map(|&i| index.entries[i].label.clone())
            .collect();
        let dict = build_dictionary(
            &train_features,
            &train_labels,
            &index.classes,
            classifier_cfg,
            derive_seed(seed, &[SALT_PHI, fold as u64]),
            &fingerprint,
        )?;
        let results = parallel_map_indexed(test_idx.len(), jobs, |t| {
            classify(&dict, &features[test_idx[t]], classifier_cfg)
        });
        let mut correct = 0usize;
        for (t, result) in test_idx.iter().zip(results) {
            let result = result?;
            let truth = index
                .class_index(&index.entries[*t].label)
                .expect("entry label is in classes");
            confusion[truth][result.predicted_index] += 1;
            if truth == result.predicted_index {
                correct += 1;
            }
        }
        per_fold_accuracy.push(correct as f64 / test_idx.len().max(1) as f64);
    }

    let accuracy = confusion_accuracy(&confusion).unwrap_or(0.0);
    let (config_snapshot, config_hash) = snapshot(
        feature_cfg,
        classifier_cfg,
        &[
            ("folds", k.to_string()),
            ("seed", seed.to_string()),
            ("sample_rate", rate.to_string()),
            ("clips", clips.len().to_string()),
            ("classes", index.classes.len().to_string()),
        ],
    );
    Ok(EvalReport {
        classes: index.classes.clone(),
        confusion,
        accuracy,
        per_fold_accuracy,
        config_snapshot,
        config_hash,
        wall_time_s: t0.elapsed().as_secs_f64(),
    })
}

/// One learning-curve row: classification error (percent) at a given
/// per-class training-set size, aggregated over trials.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub train_per_class: usize,
    pub mean_error_pct: f64,
    pub stddev_error_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub mode: FeatureMode,
    pub points: Vec<CurvePoint>,
    pub config_snapshot: String,
    pub config_hash: String,
}

fn mean_and_stddev(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Error vs. training-set size.
///
/// A stratified fifth of the dataset is held out once as the fixed test
/// set; for each size and trial, that many training clips per class are
/// sampled from the remainder and the held-out set is classified.
pub fn learning_curve(
    index: &DatasetIndex,
    sizes: &[usize],
    mode: FeatureMode,
    trials: usize,
    feature_cfg: &FeatureConfig,
    classifier_cfg: &ClassifierConfig,
    seed: u64,
    jobs: usize,
) -> Result<LearningCurve, EvalError> {
    if sizes.is_empty() {
        return Err(EvalError::BadSizes("no training sizes given".into()));
    }
    if trials == 0 {
        return Err(EvalError::BadSizes("trials must be positive".into()));
    }
    let holdout = kfold_split(index, 5, derive_seed(seed, &[SALT_HOLDOUT]))?;
    let test_idx: Vec<usize> = (0..index.entries.len())
        .filter(|&i| holdout.assignments[i] == 0)
        .collect();
    // Per-class training pools (everything outside the held-out fold).
    let pools: Vec<Vec<usize>> = index
        .classes
        .iter()
        .map(|class| {
            (0..index.entries.len())
                .filter(|&i| holdout.assignments[i] != 0 && &index.entries[i].label == class)
                .collect()
        })
        .collect();
    let min_pool = pools.iter().map(Vec::len).min().unwrap_or(0);
    if let Some(&bad) = sizes.iter().find(|&&s| s == 0 || s > min_pool) {
        return Err(EvalError::BadSizes(format!(
            "training size {bad} outside 1..={min_pool} (per-class pool after holdout)"
        )));
    }

    let clips = load_clips(index, jobs)?;
    let rate = check_uniform_rate(&clips)?;
    let mut cache = FeatureCache::new(feature_cfg, mode);
    let features = cache.features_for(&clips, feature_cfg, jobs)?;
    let fingerprint = format!("{}:{}", feature_cfg.fingerprint(), mode.name());

    let mut points = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let mut errors = Vec::with_capacity(trials);
        for trial in 0..trials {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut train_idx = Vec::with_capacity(size * pools.len());
            for (class_idx, pool) in pools.iter().enumerate() {
                let mut shuffled = pool.clone();
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(
                    seed,
                    &[SALT_TRIAL, size as u64, trial as u64, class_idx as u64],
                ));
                shuffled.shuffle(&mut rng);
                train_idx.extend(shuffled.into_iter().take(size));
            }
            let train_features: Vec<FeatureVector> =
                train_idx.iter().map(|&i| features[i].clone()).collect();
            let train_labels: Vec<String> = train_idx
                .iter()
                .map(|&i| index.entries[i].label.clone())
                .collect();
            let dict = build_dictionary(
                &train_features,
                &train_labels,
                &index.classes,
                classifier_cfg,
                derive_seed(seed, &[SALT_PHI, size as u64, trial as u64]),
                &fingerprint,
            )?;
            let results = parallel_map_indexed(test_idx.len(), jobs, |t| {
                classify(&dict, &features[test_idx[t]], classifier_cfg)
            });
            let mut correct = 0usize;
            for (t, result) in test_idx.iter().zip(results) {
                if result?.predicted == index.entries[*t].label {
                    correct += 1;
                }
            }
            errors.push(100.0 * (1.0 - correct as f64 / test_idx.len() as f64));
        }
        let (mean, stddev) = mean_and_stddev(&errors);
        points.push(CurvePoint {
            train_per_class: size,
            mean_error_pct: mean,
            stddev_error_pct: stddev,
        });
    }

    let (config_snapshot, config_hash) = snapshot(
        feature_cfg,
        classifier_cfg,
        &[
            ("mode", mode.name().to_string()),
            ("trials", trials.to_string()),
            ("seed", seed.to_string()),
            ("sample_rate", rate.to_string()),
            ("test_clips", test_idx.len().to_string()),
        ],
    );
    Ok(LearningCurve {
        mode,
        points,
        config_snapshot,
        config_hash,
    })
}

/// `x,mean,stddev` blocks, one per curve. The published GTZAN error
/// curves for both feature modes are carried along as reference
/// comments for comparison; they are not assertions.
pub fn curves_to_csv(curves: &[LearningCurve]) -> String {
    let mut out = String::new();
    if let Some(first) = curves.first() {
        out.push_str(&format!(
            "# config {} {}\n",
            first.config_hash, first.config_snapshot
        ));
    }
    out.push_str("# x = training clips per class; mean/stddev of error percent over trials\n");
    out.push_str(
        "# reference (published, GTZAN) second_fft: 1:19.4 10:10.5 20:8.5 30:6.9 40:4.9 50:2.7 70:1.4 80:1.0 100:0.8\n",
    );
    out.push_str(
        "# reference (published, GTZAN) stage2_only: 1:95 10:45.3 20:23.6 30:18.1 40:14.8 50:12.3 70:10.4 80:9.2 100:8.5\n",
    );
    for curve in curves {
        out.push_str(&format!("# mode {}\n", curve.mode.name()));
        out.push_str("x,mean,stddev\n");
        for p in &curve.points {
            out.push_str(&format!(
                "{},{},{}\n",
                p.train_per_class,
                fmt_f64(p.mean_error_pct),
                fmt_f64(p.stddev_error_pct)
            ));
        }
    }
    out
}

pub fn curves_render_text(curves: &[LearningCurve]) -> String {
    let mut out = String::new();
    for curve in curves {
        out.push_str(&format!("mode {}:\n", curve.mode.name()));
        for p in &curve.points {
            out.push_str(&format!(
                "  {:>4} train/class: error {:6.2}% +- {:5.2}\n",
                p.train_per_class, p.mean_error_pct, p.stddev_error_pct
            ));
        }
    }
    out
}

/// One noise-sweep row. Statistics are over the held-out test clips.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePoint {
    pub snr_db: f64,
    pub accuracy: f64,
    pub accuracy_stddev: f64,
    /// Mean cosine similarity between each test clip's clean and noisy
    /// feature vectors.
    pub mean_feature_cosine: f64,
    pub cosine_stddev: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseReport {
    /// Accuracy of the same dictionary on the clean test set.
    pub clean_accuracy: f64,
    pub points: Vec<NoisePoint>,
    pub config_snapshot: String,
    pub config_hash: String,
}

/// Train on clean clips, then classify noise-corrupted test clips at
/// each SNR with the clean-trained dictionary.
pub fn noise_sweep(
    index: &DatasetIndex,
    snr_list: &[f64],
    feature_cfg: &FeatureConfig,
    classifier_cfg: &ClassifierConfig,
    seed: u64,
    jobs: usize,
) -> Result<NoiseReport, EvalError> {
    let holdout = kfold_split(index, 5, derive_seed(seed, &[SALT_HOLDOUT]))?;
    let test_idx: Vec<usize> = (0..index.entries.len())
        .filter(|&i| holdout.assignments[i] == 0)
        .collect();
    let train_idx: Vec<usize> = (0..index.entries.len())
        .filter(|&i| holdout.assignments[i] != 0)
        .collect();

    let clips = load_clips(index, jobs)?;
    let rate = check_uniform_rate(&clips)?;
    let mut cache = FeatureCache::new(feature_cfg, FeatureMode::SecondFft);
    let features = cache.features_for(&clips, feature_cfg, jobs)?;
    let fingerprint = feature_cfg.fingerprint();

    let train_features: Vec<FeatureVector> =
        train_idx.iter().map(|&i| features[i].clone()).collect();
    let train_labels: Vec<String> = train_idx
        .iter()
        .map(|&i| index.entries[i].label.clone())
        .collect();
    let dict = build_dictionary(
        &train_features,
        &train_labels,
        &index.classes,
        classifier_cfg,
        derive_seed(seed, &[SALT_PHI]),
        &fingerprint,
    )?;

    let classify_set = |feats: &[FeatureVector],
                        dict: &Dictionary|
     -> Result<Vec<f64>, EvalError> {
        let results = parallel_map_indexed(feats.len(), jobs, |t| {
            classify(dict, &feats[t], classifier_cfg)
        });
        let mut hits = Vec::with_capacity(feats.len());
        for (t, result) in test_idx.iter().zip(results) {
            let correct = result?.predicted == index.entries[*t].label;
            hits.push(if correct { 1.0 } else { 0.0 });
        }
        Ok(hits)
    };

    let clean_test: Vec<FeatureVector> =
        test_idx.iter().map(|&i| features[i].clone()).collect();
    let clean_hits = classify_set(&clean_test, &dict)?;
    let (clean_accuracy, _) = mean_and_stddev(&clean_hits);

    let mut points = Vec::with_capacity(snr_list.len());
    for (snr_pos, &snr_db) in snr_list.iter().enumerate() {
        let noisy_clips = {
            let made = parallel_map_indexed(test_idx.len(), jobs, |t| {
                add_awgn(
                    &clips[test_idx[t]],
                    snr_db,
                    derive_seed(seed, &[SALT_NOISE, snr_pos as u64, test_idx[t] as u64]),
                )
            });
            let mut out = Vec::with_capacity(made.len());
            for c in made {
                out.push(c?);
            }
            out
        };
        let noisy_features = {
            let made = parallel_map_indexed(noisy_clips.len(), jobs, |t| {
                extract_features(&noisy_clips[t], feature_cfg)
            });
            let mut out = Vec::with_capacity(made.len());
            for (t, f) in made.into_iter().enumerate() {
                out.push(f.map_err(|e| EvalError::Clip {
                    clip_id: noisy_clips[t].source_id.clone(),
                    source: e,
                })?);
            }
            out
        };
        let hits = classify_set(&noisy_features, &dict)?;
        let (accuracy, accuracy_stddev) = mean_and_stddev(&hits);
        let cosines: Vec<f64> = clean_test
            .iter()
            .zip(&noisy_features)
            .map(|(c, n)| cosine_similarity(&c.values, &n.values))
            .collect();
        let (mean_feature_cosine, cosine_stddev) = mean_and_stddev(&cosines);
        points.push(NoisePoint {
            snr_db,
            accuracy,
            accuracy_stddev,
            mean_feature_cosine,
            cosine_stddev,
        });
    }

    let (config_snapshot, config_hash) = snapshot(
        feature_cfg,
        classifier_cfg,
        &[
            ("snr_list", snr_list.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("|")),
            ("seed", seed.to_string()),
            ("sample_rate", rate.to_string()),
            ("test_clips", test_idx.len().to_string()),
        ],
    );
    Ok(NoiseReport {
        clean_accuracy,
        points,
        config_snapshot,
        config_hash,
    })
}

/// Two `x,mean,stddev` blocks (accuracy, feature cosine), x = SNR dB.
pub fn noise_to_csv(report: &NoiseReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# config {} {}\n",
        report.config_hash, report.config_snapshot
    ));
    out.push_str(&format!("# clean_accuracy {}\n", fmt_f64(report.clean_accuracy)));
    out.push_str("# metric accuracy\nx,mean,stddev\n");
    for p in &report.points {
        out.push_str(&format!(
            "{},{},{}\n",
            p.snr_db,
            fmt_f64(p.accuracy),
            fmt_f64(p.accuracy_stddev)
        ));
    }
    out.push_str("# metric feature_cosine\nx,mean,stddev\n");
    for p in &report.points {
        out.push_str(&format!(
            "{},{},{}\n",
            p.snr_db,
            fmt_f64(p.mean_feature_cosine),
            fmt_f64(p.cosine_stddev)
        ));
    }
    out
}

pub fn noise_render_text(report: &NoiseReport) -> String {
    let mut out = format!("clean accuracy: {:.4}\n", report.clean_accuracy);
    for p in &report.points {
        out.push_str(&format!(
            "  {:>6.1} dB: accuracy {:.4}, feature cosine {:.4}\n",
            p.snr_db, p.accuracy, p.mean_feature_cosine
        ));
    }
    out
}
