//! Flat `key = value` run configuration.
//!
//! Defaults < config file < command-line flags, in that precedence
//! order. The format is a plain text file: one `key = value` per line,
//! `#` comments, comma lists for the SNR sweep.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use secondfft::classifier::{ClassifierConfig, MeasurementMode, SolverBackend};
use secondfft::dsp::{FftLenPolicy, FrameConfig};
use secondfft::features::FeatureConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub window_len_s: f64,
    pub hop_fraction: f64,
    pub second_fft_len: usize,
    pub keep_k: usize,
    pub drop_dc: bool,
    pub concat_short_term: bool,
    pub measurement_dim: usize,
    pub measurement_mode: String,
    pub k_max: usize,
    pub tol: f64,
    pub solver: String,
    pub ista_lambda: f64,
    pub ista_max_iter: usize,
    pub seed: u64,
    pub folds: usize,
    pub trials: usize,
    pub snr_list: Vec<f64>,
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            window_len_s: 0.1,
            hop_fraction: 0.5,
            second_fft_len: 1024,
            keep_k: 64,
            drop_dc: true,
            concat_short_term: false,
            measurement_dim: 35,
            measurement_mode: "gaussian".into(),
            k_max: 10,
            tol: 1e-6,
            solver: "omp".into(),
            ista_lambda: 0.01,
            ista_max_iter: 1000,
            seed: 42,
            folds: 5,
            trials: 10,
            snr_list: vec![40.0, 20.0, 10.0, 0.0, -10.0],
            jobs: 1,
        }
    }
}

impl RunConfig {
    /// Canonical text form; `parse(emit(cfg))` reproduces `cfg` exactly.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let snr = self
            .snr_list
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(out, "window_len_s = {}", self.window_len_s);
        let _ = writeln!(out, "hop_fraction = {}", self.hop_fraction);
        let _ = writeln!(out, "second_fft_len = {}", self.second_fft_len);
        let _ = writeln!(out, "keep_k = {}", self.keep_k);
        let _ = writeln!(out, "drop_dc = {}", self.drop_dc);
        let _ = writeln!(out, "concat_short_term = {}", self.concat_short_term);
        let _ = writeln!(out, "measurement_dim = {}", self.measurement_dim);
        let _ = writeln!(out, "measurement_mode = {}", self.measurement_mode);
        let _ = writeln!(out, "k_max = {}", self.k_max);
        let _ = writeln!(out, "tol = {}", self.tol);
        let _ = writeln!(out, "solver = {}", self.solver);
        let _ = writeln!(out, "ista_lambda = {}", self.ista_lambda);
        let _ = writeln!(out, "ista_max_iter = {}", self.ista_max_iter);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "folds = {}", self.folds);
        let _ = writeln!(out, "trials = {}", self.trials);
        let _ = writeln!(out, "snr_list = {snr}");
        let _ = writeln!(out, "jobs = {}", self.jobs);
        out
    }

    /// Parse the `key = value` text over the defaults.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("line {}: expected `key = value`", lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let ctx = || format!("line {}: bad value for {key}", lineno + 1);
            match key {
                "window_len_s" => cfg.window_len_s = value.parse().with_context(ctx)?,
                "hop_fraction" => cfg.hop_fraction = value.parse().with_context(ctx)?,
                "second_fft_len" => cfg.second_fft_len = value.parse().with_context(ctx)?,
                "keep_k" => cfg.keep_k = value.parse().with_context(ctx)?,
                "drop_dc" => cfg.drop_dc = value.parse().with_context(ctx)?,
                "concat_short_term" => cfg.concat_short_term = value.parse().with_context(ctx)?,
                "measurement_dim" => cfg.measurement_dim = value.parse().with_context(ctx)?,
                "measurement_mode" => cfg.measurement_mode = value.to_string(),
                "k_max" => cfg.k_max = value.parse().with_context(ctx)?,
                "tol" => cfg.tol = value.parse().with_context(ctx)?,
                "solver" => cfg.solver = value.to_string(),
                "ista_lambda" => cfg.ista_lambda = value.parse().with_context(ctx)?,
                "ista_max_iter" => cfg.ista_max_iter = value.parse().with_context(ctx)?,
                "seed" => cfg.seed = value.parse().with_context(ctx)?,
                "folds" => cfg.folds = value.parse().with_context(ctx)?,
                "trials" => cfg.trials = value.parse().with_context(ctx)?,
                "snr_list" => {
                    cfg.snr_list = value
                        .split(',')
                        .map(|v| v.trim().parse::<f64>())
                        .collect::<Result<_, _>>()
                        .with_context(ctx)?;
                }
                "jobs" => cfg.jobs = value.parse().with_context(ctx)?,
                other => bail!("line {}: unknown key {other:?}", lineno + 1),
            }
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        RunConfig::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    fn check(&self) -> Result<()> {
        if self.solver != "omp" && self.solver != "ista" {
            bail!("solver must be `omp` or `ista`, got {:?}", self.solver);
        }
        if self.measurement_mode != "gaussian" && self.measurement_mode != "coordinate_subsample" {
            bail!(
                "measurement_mode must be `gaussian` or `coordinate_subsample`, got {:?}",
                self.measurement_mode
            );
        }
        Ok(())
    }

    pub fn feature_config(&self) -> FeatureConfig {
        FeatureConfig {
            second_fft_len: self.second_fft_len,
            keep_k: self.keep_k,
            drop_dc: self.drop_dc,
            concat_short_term: self.concat_short_term,
            frame: FrameConfig {
                window_len_s: self.window_len_s,
                hop_fraction: self.hop_fraction,
                fft_policy: FftLenPolicy::NextPowerOfTwo,
            },
        }
    }

    pub fn classifier_config(&self) -> ClassifierConfig {
        ClassifierConfig {
            measured_dim: self.measurement_dim,
            k_max: self.k_max,
            tol: self.tol,
            backend: if self.solver == "ista" {
                SolverBackend::Ista {
                    lambda: self.ista_lambda,
                    max_iter: self.ista_max_iter,
                }
            } else {
                SolverBackend::Omp
            },
            measurement: if self.measurement_mode == "coordinate_subsample" {
                MeasurementMode::CoordinateSubsample
            } else {
                MeasurementMode::Gaussian
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn emit_parse_round_trip_is_identity() {
        let mut cfg = RunConfig::default();
        assert_eq!(RunConfig::parse(&cfg.emit()).unwrap(), cfg);

        cfg.keep_k = 32;
        cfg.tol = 3.5e-8;
        cfg.snr_list = vec![12.5, -3.25];
        cfg.solver = "ista".into();
        cfg.jobs = 8;
        assert_eq!(RunConfig::parse(&cfg.emit()).unwrap(), cfg);
    }

    #[test]
    fn partial_files_override_defaults_only() {
        let cfg = RunConfig::parse("keep_k = 16\n# comment\n\nseed = 7\n").unwrap();
        assert_eq!(cfg.keep_k, 16);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.folds, RunConfig::default().folds);
    }

    #[test]
    fn unknown_keys_and_bad_values_fail() {
        assert!(RunConfig::parse("banana = 1\n").is_err());
        assert!(RunConfig::parse("keep_k = many\n").is_err());
        assert!(RunConfig::parse("solver = magic\n").is_err());
        assert!(RunConfig::parse("no_equals_sign\n").is_err());
    }
}
