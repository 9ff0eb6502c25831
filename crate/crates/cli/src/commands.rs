//! Subcommand implementations.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use secondfft::audio::{
    build_synth_corpus, load_clip, scan_dataset, DatasetIndex, SynthCorpusSpec,
};
use secondfft::classifier::{
    build_dictionary, classify as classify_feature, load_model, save_model, Model,
};
use secondfft::eval::{
    cross_validate, curves_render_text, curves_to_csv, learning_curve as run_curve,
    noise_render_text, noise_sweep as run_sweep, noise_to_csv, FeatureMode,
};
use secondfft::features::{extract_features, features_from_csv, features_to_csv, FeatureVector};
use secondfft::util::{fmt_f64, parallel_map_indexed};

use crate::config::RunConfig;

fn is_audio_path(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()),
        Some(ref e) if e == "wav" || e == "au"
    )
}

/// Audio files under `input`: the file itself, or a sorted recursive
/// walk of a directory.
fn collect_clips(input: &Path) -> Result<Vec<PathBuf>> {
    if input.is_file() {
        return Ok(vec![input.to_path_buf()]);
    }
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
        let mut items: Vec<PathBuf> = std::fs::read_dir(dir)
            .with_context(|| format!("reading {}", dir.display()))?
            .collect::<std::io::Result<Vec<_>>>()?
            .into_iter()
            .map(|d| d.path())
            .collect();
        items.sort();
        for item in items {
            if item.is_dir() {
                walk(&item, out)?;
            } else if is_audio_path(&item) {
                out.push(item);
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(input, &mut out)?;
    if out.is_empty() {
        bail!("{}: no .wav or .au files found", input.display());
    }
    Ok(out)
}

fn extract_all(
    paths: &[PathBuf],
    labels: &[String],
    cfg: &RunConfig,
) -> Result<Vec<FeatureVector>> {
    let fcfg = cfg.feature_config();
    let results = parallel_map_indexed(paths.len(), cfg.jobs, |i| {
        let clip = load_clip(&paths[i])?;
        extract_features(&clip, &fcfg)
            .map_err(|e| anyhow::anyhow!("{}: {e}", paths[i].display()))
    });
    let mut features = Vec::with_capacity(paths.len());
    for r in results {
        features.push(r?);
    }
    debug_assert_eq!(features.len(), labels.len());
    Ok(features)
}

pub fn extract(input: &Path, out: &Path, cfg: &RunConfig) -> Result<()> {
    let fcfg = cfg.feature_config();
    fcfg.validate()?;
    let (paths, labels): (Vec<PathBuf>, Vec<String>) = if input.is_dir() {
        let index = scan_dataset(input)?;
        index
            .entries
            .into_iter()
            .map(|e| (e.path, e.label))
            .unzip()
    } else {
        (vec![input.to_path_buf()], vec!["unlabeled".to_string()])
    };
    let features = extract_all(&paths, &labels, cfg)?;
    let csv = features_to_csv(&features, &labels, &fcfg)?;
    std::fs::write(out, csv).with_context(|| format!("writing {}", out.display()))?;
    println!(
        "extracted {} feature vectors (dim {}) -> {}",
        features.len(),
        features.first().map_or(0, |f| f.dim()),
        out.display()
    );
    Ok(())
}

pub fn train(features_csv: &Path, out: &Path, cfg: &RunConfig) -> Result<()> {
    let text = std::fs::read_to_string(features_csv)
        .with_context(|| format!("reading {}", features_csv.display()))?;
    let (features, labels, fingerprint) = features_from_csv(&text)?;
    if features.is_empty() {
        bail!("{}: no feature rows", features_csv.display());
    }
    let mut classes: Vec<String> = labels.clone();
    classes.sort();
    classes.dedup();
    let ccfg = cfg.classifier_config();
    let fingerprint = fingerprint.unwrap_or_else(|| cfg.feature_config().fingerprint());
    let dict = build_dictionary(&features, &labels, &classes, &ccfg, cfg.seed, &fingerprint)?;
    let model = Model {
        dict,
        k_max: ccfg.k_max,
        tol: ccfg.tol,
    };
    save_model(&model, out)?;
    println!(
        "trained {}x{} dictionary over {} classes (seed {}) -> {}",
        cfg.measurement_dim,
        features.len(),
        classes.len(),
        cfg.seed,
        out.display()
    );
    Ok(())
}

pub fn classify(model_path: &Path, input: &Path, out: Option<&Path>, cfg: &RunConfig) -> Result<()> {
    let model = load_model(model_path)?;
    let fcfg = cfg.feature_config();
    if fcfg.fingerprint() != model.dict.config_fingerprint {
        bail!(
            "feature config fingerprint {} does not match the model's {}; \
             pass the extraction settings the model was trained with",
            fcfg.fingerprint(),
            model.dict.config_fingerprint
        );
    }
    let mut ccfg = cfg.classifier_config();
    ccfg.measured_dim = model.dict.atoms.rows();
    ccfg.k_max = model.k_max;
    ccfg.tol = model.tol;

    let paths = collect_clips(input)?;
    let results = parallel_map_indexed(paths.len(), cfg.jobs, |i| -> Result<_> {
        let clip = load_clip(&paths[i])?;
        let feature = extract_features(&clip, &fcfg)
            .map_err(|e| anyhow::anyhow!("{}: {e}", paths[i].display()))?;
        Ok(classify_feature(&model.dict, &feature, &ccfg)?)
    });

    let mut csv = String::from("clip_id,predicted,margin");
    for class in &model.dict.classes {
        csv.push_str(&format!(",residual_{class}"));
    }
    csv.push('\n');
    for (path, result) in paths.iter().zip(results) {
        let result = result?;
        let residuals: Vec<String> = model
            .dict
            .classes
            .iter()
            .zip(&result.residuals)
            .map(|(c, r)| format!("{c}={r:.6}"))
            .collect();
        println!(
            "{}: {} (margin {:.6}) residuals: {}",
            path.display(),
            result.predicted,
            result.margin,
            residuals.join(" ")
        );
        csv.push_str(&format!("{},{},{}", path.display(), result.predicted, fmt_f64(result.margin)));
        for r in &result.residuals {
            csv.push_str(&format!(",{}", fmt_f64(*r)));
        }
        csv.push('\n');
    }
    if let Some(out) = out {
        std::fs::write(out, csv).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(())
}

fn scan_checked(dataset: &Path, cfg: &RunConfig) -> Result<DatasetIndex> {
    let index = scan_dataset(dataset)?;
    println!("dataset: {index}");
    print!("config:\n{}", indent(&cfg.emit()));
    Ok(index)
}

fn indent(text: &str) -> String {
    text.lines().map(|l| format!("  {l}\n")).collect()
}

pub fn evaluate(dataset: &Path, out: &Path, cfg: &RunConfig) -> Result<()> {
    let index = scan_checked(dataset, cfg)?;
    let report = cross_validate(
        &index,
        &cfg.feature_config(),
        &cfg.classifier_config(),
        cfg.folds,
        cfg.seed,
        cfg.jobs,
    )?;
    print!("{}", report.render_text());
    std::fs::write(out, report.to_csv()).with_context(|| format!("writing {}", out.display()))?;
    println!("report -> {}", out.display());
    Ok(())
}

pub fn learning_curve(
    dataset: &Path,
    sizes: &[usize],
    mode: &str,
    out: &Path,
    cfg: &RunConfig,
) -> Result<()> {
    if sizes.is_empty() {
        bail!("--sizes must list at least one training size");
    }
    let modes: Vec<FeatureMode> = match mode {
        "both" => vec![FeatureMode::SecondFft, FeatureMode::Stage2Only],
        "second-fft" => vec![FeatureMode::SecondFft],
        "stage2-only" => vec![FeatureMode::Stage2Only],
        other => bail!("--mode must be second-fft, stage2-only, or both, got {other:?}"),
    };
    let index = scan_checked(dataset, cfg)?;
    let mut curves = Vec::new();
    for m in modes {
        curves.push(run_curve(
            &index,
            sizes,
            m,
            cfg.trials,
            &cfg.feature_config(),
            &cfg.classifier_config(),
            cfg.seed,
            cfg.jobs,
        )?);
    }
    print!("{}", curves_render_text(&curves));
    std::fs::write(out, curves_to_csv(&curves))
        .with_context(|| format!("writing {}", out.display()))?;
    println!("curve -> {}", out.display());
    Ok(())
}

pub fn noise_sweep(dataset: &Path, out: &Path, cfg: &RunConfig) -> Result<()> {
    let index = scan_checked(dataset, cfg)?;
    let report = run_sweep(
        &index,
        &cfg.snr_list,
        &cfg.feature_config(),
        &cfg.classifier_config(),
        cfg.seed,
        cfg.jobs,
    )?;
    print!("{}", noise_render_text(&report));
    std::fs::write(out, noise_to_csv(&report))
        .with_context(|| format!("writing {}", out.display()))?;
    println!("noise report -> {}", out.display());
    Ok(())
}

pub fn synth_corpus(
    out: &Path,
    classes: usize,
    clips: usize,
    seed: u64,
    sample_rate: u32,
    duration_s: f64,
) -> Result<()> {
    let spec = SynthCorpusSpec {
        classes,
        clips_per_class: clips,
        seed,
        sample_rate,
        duration_s,
    };
    build_synth_corpus(out, &spec)?;
    println!(
        "wrote {} classes x {} clips ({duration_s} s @ {sample_rate} Hz, seed {seed}) -> {}",
        classes,
        clips,
        out.display()
    );
    Ok(())
}
