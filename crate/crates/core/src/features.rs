//! The feature pipeline: per-frame spectrum normalization, frame-sum
//! vector, a second FFT over the frame sums, and a top-K amplitude
//! filter producing a sparse long-term feature vector.
//!
//! Per-frame max normalization makes the whole pipeline invariant to
//! positive gain on the input, and magnitudes make it blind to phase.

use crate::audio::AudioClip;
use crate::dsp::{self, DspError, FrameConfig, Spectrogram};
use crate::util::{fmt_f64, fnv1a64};

/// Pipeline parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureConfig {
    /// Padded length of the second transform (power of two).
    pub second_fft_len: usize,
    /// Number of largest-magnitude bins the amplitude filter keeps.
    pub keep_k: usize,
    /// Zero bin 0 of the second transform before filtering. The DC bin
    /// is the sum of all frame sums, a loudness/duration proxy, so it is
    /// dropped by default.
    pub drop_dc: bool,
    /// Append the amplitude-filtered mean normalized frame spectrum to
    /// the feature vector (experimental; off by default).
    pub concat_short_term: bool,
    pub frame: FrameConfig,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            second_fft_len: 1024,
            keep_k: 64,
            drop_dc: true,
            concat_short_term: false,
            frame: FrameConfig::default(),
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<(), FeatureError> {
        if !self.second_fft_len.is_power_of_two() {
            return Err(FeatureError::BadConfig(format!(
                "second_fft_len must be a power of two, got {}",
                self.second_fft_len
            )));
        }
        if self.keep_k < 1 || self.keep_k > self.second_fft_len / 2 {
            return Err(FeatureError::BadConfig(format!(
                "keep_k must be in 1..={}, got {}",
                self.second_fft_len / 2,
                self.keep_k
            )));
        }
        Ok(())
    }

    /// Canonical `key=value` rendering used for fingerprinting.
    pub fn snapshot(&self) -> String {
        let policy = match self.frame.fft_policy {
            dsp::FftLenPolicy::NextPowerOfTwo => "next_pow2".to_string(),
            dsp::FftLenPolicy::Fixed(n) => format!("fixed:{n}"),
        };
        format!(
            "window_len_s={};hop_fraction={};fft_policy={};second_fft_len={};keep_k={};drop_dc={};concat_short_term={}",
            self.frame.window_len_s,
            self.frame.hop_fraction,
            policy,
            self.second_fft_len,
            self.keep_k,
            self.drop_dc,
            self.concat_short_term,
        )
    }

    /// Stable hash of the configuration; stored in models so train and
    /// test features can be checked for comparability.
    pub fn fingerprint(&self) -> String {
        format!("{:016x}", fnv1a64(self.snapshot().as_bytes()))
    }
}

/// A sparse non-negative feature vector with explicit support.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    /// Dense values; zero outside `support`.
    pub values: Vec<f64>,
    /// Sorted indices of nonzero entries.
    pub support: Vec<usize>,
    /// Provenance string (clip path or synthesis spec).
    pub clip_id: String,
}

impl FeatureVector {
    pub fn from_values(values: Vec<f64>, clip_id: String) -> FeatureVector {
        let support = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect();
        FeatureVector {
            values,
            support,
            clip_id,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("clip yields {frames} analysis frames; need at least {min}")]
    ClipTooShort { frames: usize, min: usize },
    #[error("{frames} frame sums exceed the second transform length {max}")]
    TooManyFrames { frames: usize, max: usize },
    #[error("bad feature config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Dsp(#[from] DspError),
}

/// Minimum frame count for the second transform to carry any shape.
pub const MIN_FRAMES: usize = 8;

/// Divide a magnitude row by its maximum; all-zero rows stay zero.
pub fn normalize_frame_spectrum(mags: &[f64]) -> Vec<f64> {
    let max = mags.iter().cloned().fold(0.0f64, f64::max);
    if max > 0.0 {
        mags.iter().map(|m| m / max).collect()
    } else {
        vec![0.0; mags.len()]
    }
}

/// Apply [`normalize_frame_spectrum`] to every frame.
pub fn normalize_spectrogram(spec: &Spectrogram) -> Spectrogram {
    spec.map_rows(normalize_frame_spectrum)
}

/// Row sums of a normalized spectrogram: one value per frame.
pub fn frame_sum_vector(spec: &Spectrogram) -> Vec<f64> {
    spec.rows().map(|row| row.iter().sum()).collect()
}

/// Zero-pad the frame sums to `second_fft_len` and take half-spectrum
/// DFT magnitudes.
///
/// With `drop_dc`, the mean of the frame sums is subtracted before
/// padding and bin 0 is zeroed. Zeroing bin 0 alone is not enough: the
/// mean is large (a loudness/duration proxy), and against the
/// zero-padding rectangle it smears into every low bin, burying the
/// modulation content the long-term feature is after.
pub fn second_fft(frame_sums: &[f64], cfg: &FeatureConfig) -> Result<Vec<f64>, FeatureError> {
    cfg.validate()?;
    if frame_sums.len() > cfg.second_fft_len {
        return Err(FeatureError::TooManyFrames {
            frames: frame_sums.len(),
            max: cfg.second_fft_len,
        });
    }
    let mut mags = if cfg.drop_dc {
        let mean = frame_sums.iter().sum::<f64>() / frame_sums.len().max(1) as f64;
        let centered: Vec<f64> = frame_sums.iter().map(|s| s - mean).collect();
        dsp::dft_magnitude(&centered, cfg.second_fft_len)?
    } else {
        dsp::dft_magnitude(frame_sums, cfg.second_fft_len)?
    };
    if cfg.drop_dc {
        mags[0] = 0.0;
    }
    Ok(mags)
}

/// Keep the `keep_k` largest-magnitude entries in place, zeroing the
/// rest. Ties break toward the lower index; if fewer than `keep_k`
/// nonzeros exist, all of them survive.
pub fn amplitude_filter(mags: &[f64], keep_k: usize) -> Vec<f64> {
    let mut order: Vec<usize> = (0..mags.len()).collect();
    // Sort by descending magnitude, then ascending index.
    order.sort_by(|&a, &b| {
        mags[b]
            .partial_cmp(&mags[a])
            .expect("magnitudes must not be NaN")
            .then(a.cmp(&b))
    });
    let mut out = vec![0.0; mags.len()];
    for &i in order.iter().take(keep_k) {
        if mags[i] > 0.0 {
            out[i] = mags[i];
        }
    }
    out
}

/// Mean of the normalized frame spectra, amplitude-filtered: the
/// short-term-only feature used as the baseline in learning curves.
pub fn extract_stage2_mean(
    clip: &AudioClip,
    cfg: &FeatureConfig,
) -> Result<FeatureVector, FeatureError> {
    cfg.validate()?;
    let spec = normalized_spectrogram_checked(clip, cfg)?;
    let mut mean = vec![0.0; spec.n_bins];
    for row in spec.rows() {
        for (acc, v) in mean.iter_mut().zip(row) {
            *acc += v;
        }
    }
    for v in &mut mean {
        *v /= spec.n_frames as f64;
    }
    let filtered = amplitude_filter(&mean, cfg.keep_k);
    Ok(FeatureVector::from_values(filtered, clip.source_id.clone()))
}

fn normalized_spectrogram_checked(
    clip: &AudioClip,
    cfg: &FeatureConfig,
) -> Result<Spectrogram, FeatureError> {
    let spec = dsp::spectrogram(clip, &cfg.frame).map_err(|e| match e {
        DspError::ClipTooShort { .. } => FeatureError::ClipTooShort {
            frames: 0,
            min: MIN_FRAMES,
        },
        other => FeatureError::Dsp(other),
    })?;
    if spec.n_frames < MIN_FRAMES {
        return Err(FeatureError::ClipTooShort {
            frames: spec.n_frames,
            min: MIN_FRAMES,
        });
    }
    Ok(normalize_spectrogram(&spec))
}

/// Run the full pipeline on one clip.
pub fn extract_features(
    clip: &AudioClip,
    cfg: &FeatureConfig,
) -> Result<FeatureVector, FeatureError> {
    cfg.validate()?;
    let spec = normalized_spectrogram_checked(clip, cfg)?;
    let sums = frame_sum_vector(&spec);
    let mags = second_fft(&sums, cfg)?;
    let mut values = amplitude_filter(&mags, cfg.keep_k);
    if cfg.concat_short_term {
        let mut mean = vec![0.0; spec.n_bins];
        for row in spec.rows() {
            for (acc, v) in mean.iter_mut().zip(row) {
                *acc += v;
            }
        }
        for v in &mut mean {
            *v /= spec.n_frames as f64;
        }
        values.extend(amplitude_filter(&mean, cfg.keep_k));
    }
    Ok(FeatureVector::from_values(values, clip.source_id.clone()))
}

/// Write features with labels as CSV. A `# feature_config` comment line
/// carries the fingerprint so downstream consumers can check that train
/// and test features were extracted the same way.
pub fn features_to_csv(
    features: &[FeatureVector],
    labels: &[String],
    cfg: &FeatureConfig,
) -> Result<String, FeatureError> {
    assert_eq!(features.len(), labels.len(), "features/labels length mismatch");
    let dim = features.first().map_or(0, |f| f.dim());
    for f in features {
        if f.dim() != dim {
            return Err(FeatureError::BadConfig(format!(
                "feature dimensions differ: {} vs {} ({})",
                dim,
                f.dim(),
                f.clip_id
            )));
        }
        if f.clip_id.contains(',') || f.clip_id.contains('\n') {
            return Err(FeatureError::BadConfig(format!(
                "clip id contains a separator: {}",
                f.clip_id
            )));
        }
    }
    let mut out = String::new();
    out.push_str(&format!(
        "# feature_config {} {}\n",
        cfg.fingerprint(),
        cfg.snapshot()
    ));
    out.push_str("clip_id,label");
    for i in 0..dim {
        out.push_str(&format!(",v_{i}"));
    }
    out.push('\n');
    for (f, label) in features.iter().zip(labels) {
        out.push_str(&f.clip_id);
        out.push(',');
        out.push_str(label);
        for v in &f.values {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Parse the CSV written by [`features_to_csv`]. Returns the features,
/// their labels, and the embedded config fingerprint, if present.
pub fn features_from_csv(
    text: &str,
) -> Result<(Vec<FeatureVector>, Vec<String>, Option<String>), FeatureError> {
    let mut fingerprint = None;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut dim: Option<usize> = None;
    let mut saw_header = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut parts = rest.trim().split_whitespace();
            if parts.next() == Some("feature_config") {
                fingerprint = parts.next().map(str::to_string);
            }
            continue;
        }
        if !saw_header {
            if !line.starts_with("clip_id,label") {
                return Err(FeatureError::BadConfig(format!(
                    "line {}: missing clip_id,label header",
                    lineno + 1
                )));
            }
            dim = Some(line.split(',').count() - 2);
            saw_header = true;
            continue;
        }
        let mut fields = line.split(',');
        let clip_id = fields.next().unwrap_or_default().to_string();
        let label = fields.next().unwrap_or_default().to_string();
        let values: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>().map_err(|_| {
                    FeatureError::BadConfig(format!("line {}: bad float {f:?}", lineno + 1))
                })
            })
            .collect::<Result<_, _>>()?;
        if Some(values.len()) != dim {
            return Err(FeatureError::BadConfig(format!(
                "line {}: expected {} values, got {}",
                lineno + 1,
                dim.unwrap_or(0),
                values.len()
            )));
        }
        features.push(FeatureVector::from_values(values, clip_id));
        labels.push(label);
    }
    if !saw_header {
        return Err(FeatureError::BadConfig("empty feature CSV".into()));
    }
    Ok((features, labels, fingerprint))
}
