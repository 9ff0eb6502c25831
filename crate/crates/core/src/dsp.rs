//! Short-time analysis primitives: Hamming windowing, framing, and DFT
//! magnitude spectra.

use rustfft::{num_complex::Complex, FftPlanner};

use crate::audio::AudioClip;

/// How the transform length is chosen from the window length in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FftLenPolicy {
    /// Smallest power of two >= the window length (default).
    NextPowerOfTwo,
    /// A fixed power of two; must be >= the window length.
    Fixed(usize),
}

/// Analysis window configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameConfig {
    /// Window length in seconds.
    pub window_len_s: f64,
    /// Hop as a fraction of the window (0.5 = 50% overlap).
    pub hop_fraction: f64,
    pub fft_policy: FftLenPolicy,
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig {
            window_len_s: 0.1,
            hop_fraction: 0.5,
            fft_policy: FftLenPolicy::NextPowerOfTwo,
        }
    }
}

impl FrameConfig {
    /// Window length in samples at the given rate.
    pub fn window_len_samples(&self, sample_rate: u32) -> usize {
        (self.window_len_s * sample_rate as f64).round() as usize
    }

    /// Hop length in samples at the given rate.
    pub fn hop_len_samples(&self, sample_rate: u32) -> usize {
        let w = self.window_len_samples(sample_rate);
        ((w as f64) * self.hop_fraction).round() as usize
    }

    /// Transform length for the given rate, per the policy.
    pub fn fft_len(&self, sample_rate: u32) -> Result<usize, DspError> {
        let w = self.window_len_samples(sample_rate);
        match self.fft_policy {
            FftLenPolicy::NextPowerOfTwo => Ok(w.next_power_of_two()),
            FftLenPolicy::Fixed(n) => {
                if !n.is_power_of_two() || n < w {
                    Err(DspError::BadLength {
                        fft_len: n,
                        frame_len: w,
                    })
                } else {
                    Ok(n)
                }
            }
        }
    }

    fn validate(&self, sample_rate: u32) -> Result<(), DspError> {
        if !(self.hop_fraction > 0.0 && self.hop_fraction <= 1.0) {
            return Err(DspError::BadConfig(format!(
                "hop_fraction must be in (0, 1], got {}",
                self.hop_fraction
            )));
        }
        if !(self.window_len_s > 0.0) {
            return Err(DspError::BadConfig(format!(
                "window_len_s must be positive, got {}",
                self.window_len_s
            )));
        }
        let w = self.window_len_samples(sample_rate);
        if w < 2 {
            return Err(DspError::TooShort { n: w });
        }
        Ok(())
    }
}

/// Per-frame magnitude spectra: one row per frame, one column per
/// retained frequency bin (half spectrum, `fft_len/2 + 1` bins).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    data: Vec<f64>,
    pub n_frames: usize,
    pub n_bins: usize,
}

impl Spectrogram {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Spectrogram {
        let n_frames = rows.len();
        let n_bins = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(n_frames * n_bins);
        for r in rows {
            assert_eq!(r.len(), n_bins, "ragged spectrogram rows");
            data.extend(r);
        }
        Spectrogram {
            data,
            n_frames,
            n_bins,
        }
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.n_bins..(t + 1) * self.n_bins]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_bins)
    }

    pub fn map_rows(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Spectrogram {
        Spectrogram::from_rows(self.rows().map(f).collect())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DspError {
    #[error("window of {n} samples is too short (need >= 2)")]
    TooShort { n: usize },
    #[error("clip of {len} samples is shorter than one {window}-sample window")]
    ClipTooShort { len: usize, window: usize },
    #[error("fft length {fft_len} invalid for frame of {frame_len} (need a power of two >= frame)")]
    BadLength { fft_len: usize, frame_len: usize },
    #[error("bad frame config: {0}")]
    BadConfig(String),
}

/// Hamming window: `w[k] = 0.54 - 0.46*cos(2*pi*k/(n-1))`.
pub fn hamming_window(n: usize) -> Result<Vec<f64>, DspError> {
    if n < 2 {
        return Err(DspError::TooShort { n });
    }
    Ok((0..n)
        .map(|k| 0.54 - 0.46 * (std::f64::consts::TAU * k as f64 / (n as f64 - 1.0)).cos())
        .collect())
}

/// Slice the clip into Hamming-windowed frames.
///
/// Produces `floor((L - W)/H) + 1` frames; trailing samples that do not
/// fill a whole window are dropped.
pub fn frame_signal(clip: &AudioClip, cfg: &FrameConfig) -> Result<Vec<Vec<f64>>, DspError> {
    cfg.validate(clip.sample_rate)?;
    let w = cfg.window_len_samples(clip.sample_rate);
    let h = cfg.hop_len_samples(clip.sample_rate).max(1);
    let len = clip.samples.len();
    if len < w {
        return Err(DspError::ClipTooShort { len, window: w });
    }
    let window = hamming_window(w)?;
    let n_frames = (len - w) / h + 1;
    let mut frames = Vec::with_capacity(n_frames);
    for t in 0..n_frames {
        let start = t * h;
        let frame: Vec<f64> = clip.samples[start..start + w]
            .iter()
            .zip(&window)
            .map(|(s, w)| s * w)
            .collect();
        frames.push(frame);
    }
    Ok(frames)
}

fn check_fft_len(fft_len: usize, frame_len: usize) -> Result<(), DspError> {
    if !fft_len.is_power_of_two() || fft_len < frame_len {
        return Err(DspError::BadLength { fft_len, frame_len });
    }
    Ok(())
}

fn magnitudes_into(
    frame: &[f64],
    fft_len: usize,
    fft: &dyn rustfft::Fft<f64>,
    scratch: &mut Vec<Complex<f64>>,
) -> Vec<f64> {
    scratch.clear();
    scratch.extend(frame.iter().map(|&s| Complex::new(s, 0.0)));
    scratch.resize(fft_len, Complex::new(0.0, 0.0));
    fft.process(scratch);
    scratch[..fft_len / 2 + 1].iter().map(|c| c.norm()).collect()
}

/// Magnitudes of the zero-padded DFT, bins `0..=fft_len/2`.
pub fn dft_magnitude(frame: &[f64], fft_len: usize) -> Result<Vec<f64>, DspError> {
    check_fft_len(fft_len, frame.len())?;
    let fft = FftPlanner::new().plan_fft_forward(fft_len);
    let mut scratch = Vec::with_capacity(fft_len);
    Ok(magnitudes_into(frame, fft_len, fft.as_ref(), &mut scratch))
}

/// Frame the clip and transform every frame, planning the FFT once.
pub fn spectrogram(clip: &AudioClip, cfg: &FrameConfig) -> Result<Spectrogram, DspError> {
    let frames = frame_signal(clip, cfg)?;
    let fft_len = cfg.fft_len(clip.sample_rate)?;
    let w = cfg.window_len_samples(clip.sample_rate);
    check_fft_len(fft_len, w)?;
    let fft = FftPlanner::new().plan_fft_forward(fft_len);
    let mut scratch = Vec::with_capacity(fft_len);
    let rows: Vec<Vec<f64>> = frames
        .iter()
        .map(|f| magnitudes_into(f, fft_len, fft.as_ref(), &mut scratch))
        .collect();
    Ok(Spectrogram::from_rows(rows))
}
