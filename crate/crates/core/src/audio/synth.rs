//! Deterministic clip synthesis and additive noise.

use std::f64::consts::TAU;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{write_wav, AudioClip, AudioError};
use crate::util::derive_seed;

/// What to synthesize.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SynthKind {
    PureTone {
        freq_hz: f64,
    },
    /// `(1 + depth*sin(2*pi*envelope_hz*t)) * sin(2*pi*carrier_hz*t)`,
    /// scaled to peak 0.9.
    AmTone {
        carrier_hz: f64,
        envelope_hz: f64,
        depth: f64,
    },
    WhiteNoise,
}

/// Synthesize a clip. Deterministic for a fixed `(kind, seed)`.
pub fn synth_clip(
    kind: SynthKind,
    duration_s: f64,
    sample_rate: u32,
    seed: u64,
) -> Result<AudioClip, AudioError> {
    if !(duration_s > 0.0) {
        return Err(AudioError::InvalidSpec(format!(
            "duration must be positive, got {duration_s}"
        )));
    }
    if sample_rate == 0 {
        return Err(AudioError::InvalidSpec("sample rate must be positive".into()));
    }
    let n = (duration_s * sample_rate as f64).round() as usize;
    if n == 0 {
        return Err(AudioError::InvalidSpec(
            "duration too short for one sample".into(),
        ));
    }
    let dt = 1.0 / sample_rate as f64;

    let (samples, source_id) = match kind {
        SynthKind::PureTone { freq_hz } => {
            if !(freq_hz > 0.0) {
                return Err(AudioError::InvalidSpec(format!(
                    "tone frequency must be positive, got {freq_hz}"
                )));
            }
            let s: Vec<f64> = (0..n)
                .map(|i| 0.9 * (TAU * freq_hz * i as f64 * dt).sin())
                .collect();
            (s, format!("synth:tone(f={freq_hz})@{sample_rate}x{duration_s}s"))
        }
        SynthKind::AmTone {
            carrier_hz,
            envelope_hz,
            depth,
        } => {
            if !(carrier_hz > 0.0) || !(envelope_hz > 0.0) {
                return Err(AudioError::InvalidSpec(format!(
                    "carrier/envelope rates must be positive, got {carrier_hz}/{envelope_hz}"
                )));
            }
            if !(0.0..=1.0).contains(&depth) {
                return Err(AudioError::InvalidSpec(format!(
                    "AM depth must be in [0, 1], got {depth}"
                )));
            }
            let raw: Vec<f64> = (0..n)
                .map(|i| {
                    let t = i as f64 * dt;
                    (1.0 + depth * (TAU * envelope_hz * t).sin()) * (TAU * carrier_hz * t).sin()
                })
                .collect();
            let peak = raw.iter().fold(0.0f64, |m, s| m.max(s.abs()));
            let gain = if peak > 0.0 { 0.9 / peak } else { 0.0 };
            let s = raw.into_iter().map(|v| v * gain).collect();
            (
                s,
                format!(
                    "synth:am(c={carrier_hz},r={envelope_hz},d={depth})@{sample_rate}x{duration_s}s"
                ),
            )
        }
        SynthKind::WhiteNoise => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let normal = Normal::new(0.0, 0.2).expect("valid stddev");
            let s: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
            (s, format!("synth:noise#{seed}@{sample_rate}x{duration_s}s"))
        }
    };

    Ok(AudioClip {
        samples,
        sample_rate,
        source_id,
    })
}

/// Add zero-mean white Gaussian noise at the requested SNR.
///
/// Noise power is `P_signal / 10^(snr_db/10)`. No re-normalization or
/// clipping is applied, so samples may leave [-1, 1].
pub fn add_awgn(clip: &AudioClip, snr_db: f64, seed: u64) -> Result<AudioClip, AudioError> {
    let p_signal = clip.power();
    if p_signal == 0.0 {
        return Err(AudioError::ZeroPowerSignal);
    }
    let sigma = (p_signal / 10f64.powf(snr_db / 10.0)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("valid stddev");
    let samples = clip
        .samples
        .iter()
        .map(|s| s + normal.sample(&mut rng))
        .collect();
    Ok(AudioClip {
        samples,
        sample_rate: clip.sample_rate,
        source_id: format!("{}+awgn({snr_db}dB#{seed})", clip.source_id),
    })
}

/// Amplitude of the fixed anchor tone in [`am_bank_clip`]. It must stay
/// above every modulated tone's peak `1 + depth` so the anchor always
/// owns the frame's spectral maximum.
const AM_BANK_ANCHOR: f64 = 1.8;

/// A bank of AM tones sharing one envelope, next to a fixed, louder
/// anchor tone:
///
/// `(1 + d*sin(2*pi*r*t)) * sum_i sin(2*pi*f_i*t) + 1.8 * sin(2*pi*f_b*t)`
///
/// scaled to peak 0.9. Per-frame max normalization divides by the anchor
/// peak, so the normalized spectrum's balance between the bank and the
/// anchor follows the envelope *linearly*: the frame-sum sequence
/// carries a first-order line at the envelope rate, one envelope-swing
/// unit per bank tone. (A plain AM tone only moves the frame sums
/// through second-order sideband effects, and a symmetric balance swing
/// between two tones is rectified by the max into a line at twice the
/// rate.)
pub fn am_bank_clip(
    carriers_hz: &[f64],
    anchor_hz: f64,
    envelope_hz: f64,
    depth: f64,
    duration_s: f64,
    sample_rate: u32,
) -> Result<AudioClip, AudioError> {
    if carriers_hz.is_empty() {
        return Err(AudioError::InvalidSpec("need at least one modulated carrier".into()));
    }
    if carriers_hz.iter().any(|f| !(*f > 0.0)) || !(anchor_hz > 0.0) || !(envelope_hz > 0.0) {
        return Err(AudioError::InvalidSpec(
            "carrier/anchor/envelope rates must be positive".into(),
        ));
    }
    if !(0.0..=0.75).contains(&depth) {
        return Err(AudioError::InvalidSpec(format!(
            "bank depth must be in [0, 0.75] so the anchor stays dominant, got {depth}"
        )));
    }
    if !(duration_s > 0.0) || sample_rate == 0 {
        return Err(AudioError::InvalidSpec("bad duration or sample rate".into()));
    }
    let n = (duration_s * sample_rate as f64).round() as usize;
    let dt = 1.0 / sample_rate as f64;
    let raw: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 * dt;
            let env = 1.0 + depth * (TAU * envelope_hz * t).sin();
            let bank: f64 = carriers_hz.iter().map(|f| (TAU * f * t).sin()).sum();
            env * bank + AM_BANK_ANCHOR * (TAU * anchor_hz * t).sin()
        })
        .collect();
    let peak = raw.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let gain = if peak > 0.0 { 0.9 / peak } else { 0.0 };
    let carriers = carriers_hz
        .iter()
        .map(|f| format!("{f:.1}"))
        .collect::<Vec<_>>()
        .join("+");
    Ok(AudioClip {
        samples: raw.into_iter().map(|v| v * gain).collect(),
        sample_rate,
        source_id: format!(
            "synth:ambank({carriers};b={anchor_hz:.1},r={envelope_hz},d={depth})@{sample_rate}x{duration_s}s"
        ),
    })
}

/// Parameters for the synthetic AM corpus used by the evaluation tests.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpusSpec {
    /// Class count; class `c` gets envelope rate `2*(c+1)` Hz.
    pub classes: usize,
    pub clips_per_class: usize,
    pub seed: u64,
    pub sample_rate: u32,
    pub duration_s: f64,
}

impl Default for SynthCorpusSpec {
    fn default() -> Self {
        SynthCorpusSpec {
            classes: 4,
            clips_per_class: 50,
            seed: 42,
            sample_rate: 8000,
            duration_s: 10.0,
        }
    }
}

impl SynthCorpusSpec {
    pub fn class_label(&self, class: usize) -> String {
        format!("am{}hz", 2 * (class + 1))
    }
}

/// Write a `<root>/<class>/<clip>.wav` tree of AM-modulated tone pairs.
///
/// Classes differ by envelope rate (2, 4, 6, 8 Hz); clips within a class
/// differ by carrier pair and modulation depth, drawn from a per-clip
/// seeded RNG. With the default 100 ms / 50% analysis window the frame
/// rate is 20 Hz, so rates above 8 Hz (more than 4 classes) would alias
/// and are rejected.
pub fn build_synth_corpus(root: &Path, spec: &SynthCorpusSpec) -> Result<(), AudioError> {
    if spec.classes == 0 || spec.classes > 4 {
        return Err(AudioError::InvalidSpec(format!(
            "classes must be in 1..=4, got {}",
            spec.classes
        )));
    }
    if spec.clips_per_class == 0 {
        return Err(AudioError::InvalidSpec("clips_per_class must be > 0".into()));
    }
    if spec.sample_rate < 8000 {
        return Err(AudioError::InvalidSpec(
            "corpus sample rate must be at least 8000 Hz (carriers reach 2.7 kHz)".into(),
        ));
    }
    std::fs::create_dir_all(root).map_err(|e| AudioError::io(root, e))?;
    for class in 0..spec.classes {
        let envelope_hz = 2.0 * (class as f64 + 1.0);
        let dir = root.join(spec.class_label(class));
        std::fs::create_dir_all(&dir).map_err(|e| AudioError::io(&dir, e))?;
        for clip_idx in 0..spec.clips_per_class {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                spec.seed,
                &[class as u64, clip_idx as u64],
            ));
            // Three modulated carriers spread over distinct ranges so they
            // never collide with each other or the anchor.
            let carriers = [
                rng.random_range(200.0..450.0),
                rng.random_range(500.0..800.0),
                rng.random_range(850.0..1200.0),
            ];
            let anchor = rng.random_range(1500.0..2600.0);
            let depth = rng.random_range(0.4..0.7);
            let clip = am_bank_clip(
                &carriers,
                anchor,
                envelope_hz,
                depth,
                spec.duration_s,
                spec.sample_rate,
            )?;
            write_wav(&clip, &dir.join(format!("clip{clip_idx:03}.wav")))?;
        }
    }
    Ok(())
}
