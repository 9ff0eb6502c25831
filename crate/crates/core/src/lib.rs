//! Sparse second-FFT audio features and a compressive-sampling genre
//! classifier.
//!
//! The pipeline turns an audio clip into a sparse long-term feature
//! vector (windowed spectra, per-frame max normalization, frame sums,
//! a second FFT over the frame-sum sequence, and a top-K amplitude
//! filter), projects it through a seeded Gaussian measurement matrix,
//! and classifies it by sparse-coding against measured training
//! features and picking the class with the smallest reconstruction
//! residual. An evaluation harness runs stratified cross-validation,
//! learning curves, and noise-robustness sweeps over on-disk datasets.

pub mod audio;
pub mod classifier;
pub mod dsp;
pub mod eval;
pub mod features;
pub mod solver;
pub mod util;

pub use audio::{load_clip, scan_dataset, AudioClip, DatasetIndex};
pub use classifier::{classify, ClassificationResult, ClassifierConfig, Dictionary};
pub use features::{extract_features, FeatureConfig, FeatureVector};
pub use solver::{gaussian_matrix, omp, MeasurementMatrix, SparseSolution};
