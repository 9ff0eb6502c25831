//! `secondfft`: sparse second-FFT audio features and a
//! compressive-sampling genre classifier.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "secondfft",
    version,
    about = "Sparse second-FFT audio features and a compressive-sampling genre classifier"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Parameters every subcommand can override. Precedence: built-in
/// defaults, then `--config` file, then these flags.
#[derive(Args, Debug, Clone, Default)]
struct Overrides {
    /// Path to a `key = value` config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Analysis window length in seconds [default: 0.1]
    #[arg(long)]
    window_len_s: Option<f64>,
    /// Hop as a fraction of the window [default: 0.5]
    #[arg(long)]
    hop_fraction: Option<f64>,
    /// Length of the second transform, a power of two [default: 1024]
    #[arg(long)]
    second_fft_len: Option<usize>,
    /// Bins kept by the amplitude filter [default: 64]
    #[arg(long)]
    keep_k: Option<usize>,
    /// Zero the DC bin of the second transform [default: true]
    #[arg(long)]
    drop_dc: Option<bool>,
    /// Append the mean short-term spectrum to the feature [default: false]
    #[arg(long)]
    concat_short_term: Option<bool>,
    /// Measured dimension of the random projection [default: 35]
    #[arg(long)]
    measurement_dim: Option<usize>,
    /// Projection kind: gaussian | coordinate_subsample [default: gaussian]
    #[arg(long)]
    measurement_mode: Option<String>,
    /// Sparsity budget of the solver [default: 10]
    #[arg(long)]
    k_max: Option<usize>,
    /// Relative residual tolerance of the solver [default: 1e-6]
    #[arg(long)]
    tol: Option<f64>,
    /// Sparse solver: omp | ista [default: omp]
    #[arg(long)]
    solver: Option<String>,
    /// l1 weight for the ista solver [default: 0.01]
    #[arg(long)]
    ista_lambda: Option<f64>,
    /// Iteration cap for the ista solver [default: 1000]
    #[arg(long)]
    ista_max_iter: Option<usize>,
    /// Seed for every random choice in the run [default: 42]
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; any value produces identical outputs [default: 1]
    #[arg(long)]
    jobs: Option<usize>,
}

impl Overrides {
    fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { cfg.$field = v.clone(); })*
            };
        }
        apply!(
            window_len_s,
            hop_fraction,
            second_fft_len,
            keep_k,
            drop_dc,
            concat_short_term,
            measurement_dim,
            measurement_mode,
            k_max,
            tol,
            solver,
            ista_lambda,
            ista_max_iter,
            seed,
            jobs
        );
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Extract feature vectors from a dataset tree or a single clip
    Extract {
        /// Dataset root (`<root>/<class>/<clip>`) or one audio file
        #[arg(long)]
        input: PathBuf,
        /// Output features CSV
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Build a classifier model from a features CSV
    Train {
        /// Features CSV produced by `extract`
        #[arg(long)]
        features: PathBuf,
        /// Output model file
        #[arg(long)]
        out: PathBuf,
        /// Measured dimension (overrides --measurement-dim) [default: 35]
        #[arg(long)]
        dim: Option<usize>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Classify clips with a trained model
    Classify {
        /// Model file from `train`
        #[arg(long)]
        model: PathBuf,
        /// One audio file or a directory of clips
        #[arg(long)]
        input: PathBuf,
        /// Optional predictions CSV
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Stratified k-fold cross-validation over a dataset tree
    Evaluate {
        /// Dataset root
        #[arg(long)]
        dataset: PathBuf,
        /// Fold count [default: 5]
        #[arg(long)]
        folds: Option<usize>,
        /// Output report CSV
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Classification error vs. training-set size
    LearningCurve {
        /// Dataset root
        #[arg(long)]
        dataset: PathBuf,
        /// Comma list of per-class training sizes, e.g. 1,10,20
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        /// Feature mode: second-fft | stage2-only | both [default: both]
        #[arg(long, default_value = "both")]
        mode: String,
        /// Trials per size [default: 10]
        #[arg(long)]
        trials: Option<usize>,
        /// Output curve CSV
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Accuracy and feature stability against additive noise
    NoiseSweep {
        /// Dataset root
        #[arg(long)]
        dataset: PathBuf,
        /// Comma list of SNRs in dB [default: 40,20,10,0,-10]
        #[arg(long, value_delimiter = ',')]
        snr: Option<Vec<f64>>,
        /// Output noise CSV
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Build the synthetic AM-modulated evaluation corpus
    SynthCorpus {
        /// Output dataset root
        #[arg(long)]
        out: PathBuf,
        /// Number of classes (envelope rates 2,4,6,8 Hz) [default: 4]
        #[arg(long, default_value_t = 4)]
        classes: usize,
        /// Clips per class [default: 50]
        #[arg(long, default_value_t = 50)]
        clips: usize,
        /// Corpus seed [default: 42]
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Sample rate in Hz [default: 8000]
        #[arg(long, default_value_t = 8000)]
        sample_rate: u32,
        /// Clip duration in seconds [default: 10]
        #[arg(long, default_value_t = 10.0)]
        duration_s: f64,
    },
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Extract {
            input,
            out,
            overrides,
        } => overrides
            .resolve()
            .and_then(|cfg| commands::extract(&input, &out, &cfg)),
        Command::Train {
            features,
            out,
            dim,
            overrides,
        } => overrides.resolve().and_then(|mut cfg| {
            if let Some(dim) = dim {
                cfg.measurement_dim = dim;
            }
            commands::train(&features, &out, &cfg)
        }),
        Command::Classify {
            model,
            input,
            out,
            overrides,
        } => overrides
            .resolve()
            .and_then(|cfg| commands::classify(&model, &input, out.as_deref(), &cfg)),
        Command::Evaluate {
            dataset,
            folds,
            out,
            overrides,
        } => overrides.resolve().and_then(|mut cfg| {
            if let Some(folds) = folds {
                cfg.folds = folds;
            }
            commands::evaluate(&dataset, &out, &cfg)
        }),
        Command::LearningCurve {
            dataset,
            sizes,
            mode,
            trials,
            out,
            overrides,
        } => overrides.resolve().and_then(|mut cfg| {
            if let Some(trials) = trials {
                cfg.trials = trials;
            }
            commands::learning_curve(&dataset, &sizes, &mode, &out, &cfg)
        }),
        Command::NoiseSweep {
            dataset,
            snr,
            out,
            overrides,
        } => overrides.resolve().and_then(|mut cfg| {
            if let Some(snr) = snr {
                cfg.snr_list = snr;
            }
            commands::noise_sweep(&dataset, &out, &cfg)
        }),
        Command::SynthCorpus {
            out,
            classes,
            clips,
            seed,
            sample_rate,
            duration_s,
        } => commands::synth_corpus(&out, classes, clips, seed, sample_rate, duration_s),
    };
    if let Err(err) = result {
        // One line, machine-parsable: `error: cause: cause: ...`
        let chain: Vec<String> = err.chain().map(|c| c.to_string()).collect();
        eprintln!("error: {}", chain.join(": "));
        std::process::exit(1);
    }
}
