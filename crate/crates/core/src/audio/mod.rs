//! Audio ingestion: WAV/AU decoding, clip synthesis, additive noise, and
//! on-disk dataset indexing.
//!
//! Clips are mono `f64` buffers scaled so 16-bit PCM full scale maps to
//! ±1.0. Multi-channel inputs are downmixed by per-sample channel mean.

mod codec;
mod synth;

pub use synth::{
    add_awgn, am_bank_clip, build_synth_corpus, synth_clip, SynthCorpusSpec, SynthKind,
};

use std::fmt;
use std::path::{Path, PathBuf};

/// A decoded or synthesized mono audio clip.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    /// Amplitudes, nominally in [-1, 1].
    pub samples: Vec<f64>,
    /// Samples per second.
    pub sample_rate: u32,
    /// Where the clip came from (path or synthesis spec).
    pub source_id: String,
}

impl AudioClip {
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Mean squared amplitude.
    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64
    }

    /// Return a copy with every sample multiplied by `gain`.
    pub fn scaled(&self, gain: f64) -> AudioClip {
        AudioClip {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate: self.sample_rate,
            source_id: format!("{}*{}", self.source_id, gain),
        }
    }
}

/// One audio file with its class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetEntry {
    pub path: PathBuf,
    pub label: String,
}

/// Index of a `<root>/<class>/<file>` dataset tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetIndex {
    /// Every audio file, sorted by (label, file name).
    pub entries: Vec<DatasetEntry>,
    /// Distinct labels, sorted lexicographically.
    pub classes: Vec<String>,
}

impl DatasetIndex {
    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == label)
    }

    /// Number of entries per class, in class order.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.classes.len()];
        for e in &self.entries {
            if let Some(i) = self.class_index(&e.label) {
                counts[i] += 1;
            }
        }
        counts
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AudioError {
    #[error("{path}: unsupported format: {detail}")]
    UnsupportedFormat { path: String, detail: String },
    #[error("{path}: corrupt file: {detail}")]
    CorruptFile { path: String, detail: String },
    #[error("{path}: no audio samples")]
    EmptyAudio { path: String },
    #[error("{root}: no class directories containing audio files")]
    EmptyDataset { root: String },
    #[error("invalid synthesis spec: {0}")]
    InvalidSpec(String),
    #[error("cannot target an SNR on an all-zero signal")]
    ZeroPowerSignal,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl AudioError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> AudioError {
        AudioError::Io {
            path: display_path(path),
            source,
        }
    }
}

pub(crate) fn display_path(path: &Path) -> String {
    path.display().to_string()
}

/// Load a WAV (RIFF, 16-bit PCM, little-endian) or AU (.snd, encoding 3,
/// big-endian) file as a mono clip. The container is detected from the
/// magic bytes, not the extension.
pub fn load_clip(path: &Path) -> Result<AudioClip, AudioError> {
    let bytes = std::fs::read(path).map_err(|e| AudioError::io(path, e))?;
    let (samples, sample_rate) = if bytes.starts_with(b"RIFF") {
        codec::decode_wav(&bytes, path)?
    } else if bytes.starts_with(codec::AU_MAGIC) {
        codec::decode_au(&bytes, path)?
    } else {
        return Err(AudioError::UnsupportedFormat {
            path: display_path(path),
            detail: "not a RIFF/WAVE or .snd file".into(),
        });
    };
    if samples.is_empty() {
        return Err(AudioError::EmptyAudio {
            path: display_path(path),
        });
    }
    Ok(AudioClip {
        samples,
        sample_rate,
        source_id: display_path(path),
    })
}

/// Write a clip as mono 16-bit PCM WAV. Samples are clamped to full scale.
pub fn write_wav(clip: &AudioClip, path: &Path) -> Result<(), AudioError> {
    let bytes = codec::encode_wav_mono(&clip.samples, clip.sample_rate);
    std::fs::write(path, bytes).map_err(|e| AudioError::io(path, e))
}

fn is_audio_file(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()),
        Some(ref e) if e == "wav" || e == "au"
    )
}

/// Index a `<root>/<class>/<file>.{wav,au}` tree.
///
/// Classes are the subdirectory names that contain at least one audio
/// file; entries and classes come back sorted, so two scans of the same
/// tree are identical.
pub fn scan_dataset(root: &Path) -> Result<DatasetIndex, AudioError> {
    let read_dir = |p: &Path| -> Result<Vec<PathBuf>, AudioError> {
        let mut items: Vec<PathBuf> = std::fs::read_dir(p)
            .map_err(|e| AudioError::io(p, e))?
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| AudioError::io(p, e))?
            .into_iter()
            .map(|d| d.path())
            .collect();
        items.sort();
        Ok(items)
    };

    let mut entries = Vec::new();
    let mut classes = Vec::new();
    for dir in read_dir(root)? {
        if !dir.is_dir() {
            continue;
        }
        let label = match dir.file_name().and_then(|n| n.to_str()) {
            Some(n) => n.to_string(),
            None => continue,
        };
        let files: Vec<PathBuf> = read_dir(&dir)?
            .into_iter()
            .filter(|p| p.is_file() && is_audio_file(p))
            .collect();
        if files.is_empty() {
            continue;
        }
        classes.push(label.clone());
        for path in files {
            entries.push(DatasetEntry {
                path,
                label: label.clone(),
            });
        }
    }
    if entries.is_empty() {
        return Err(AudioError::EmptyDataset {
            root: display_path(root),
        });
    }
    Ok(DatasetIndex { entries, classes })
}

impl fmt::Display for DatasetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} clips in {} classes [{}]",
            self.entries.len(),
            self.classes.len(),
            self.classes.join(", ")
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_dir() -> tempfile::TempDir {
        tempfile::tempdir().expect("tempdir")
    }

    #[test]
    fn stereo_wav_downmixes_by_channel_mean() {
        // Channels [0.5, -0.5] at every sample cancel to zero.
        let dir = temp_dir();
        let path = dir.path().join("stereo.wav");
        let half = (0.5f64 * 32768.0) as i16;
        let frames: Vec<[i16; 2]> = vec![[half, -half]; 100];
        std::fs::write(&path, codec::encode_wav_test(&frames, 8000)).unwrap();

        let clip = load_clip(&path).unwrap();
        assert_eq!(clip.samples.len(), 100);
        assert_eq!(clip.sample_rate, 8000);
        assert!(clip.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn au_header_arithmetic_gives_expected_length() {
        // 1 second of 22050 Hz mono silence.
        let dir = temp_dir();
        let path = dir.path().join("tone.au");
        std::fs::write(&path, codec::encode_au_test(&vec![0i16; 22050], 22050, 1)).unwrap();

        let clip = load_clip(&path).unwrap();
        assert_eq!(clip.samples.len(), 22050);
        assert_eq!(clip.sample_rate, 22050);
    }

    #[test]
    fn pcm_full_scale_maps_to_just_under_one() {
        let dir = temp_dir();
        let path = dir.path().join("fs.wav");
        let frames: Vec<[i16; 1]> = vec![[32767]];
        std::fs::write(&path, codec::encode_wav_test(&frames, 8000)).unwrap();

        let clip = load_clip(&path).unwrap();
        assert_eq!(clip.samples[0], 32767.0 / 32768.0);
    }

    #[test]
    fn truncated_wav_is_reported_corrupt() {
        let dir = temp_dir();
        let path = dir.path().join("bad.wav");
        let frames: Vec<[i16; 1]> = vec![[0]; 50];
        let mut bytes = codec::encode_wav_test(&frames, 8000);
        bytes.truncate(bytes.len() - 20);
        std::fs::write(&path, bytes).unwrap();

        match load_clip(&path) {
            Err(AudioError::CorruptFile { .. }) => {}
            other => panic!("expected CorruptFile, got {other:?}"),
        }
    }

    #[test]
    fn wrong_bit_depth_is_unsupported() {
        let dir = temp_dir();
        let path = dir.path().join("w8.wav");
        let frames: Vec<[i16; 1]> = vec![[0]; 4];
        let mut bytes = codec::encode_wav_test(&frames, 8000);
        bytes[34] = 8; // bits-per-sample field
        std::fs::write(&path, bytes).unwrap();

        match load_clip(&path) {
            Err(AudioError::UnsupportedFormat { .. }) => {}
            other => panic!("expected UnsupportedFormat, got {other:?}"),
        }
    }

    #[test]
    fn zero_sample_file_is_empty_audio() {
        let dir = temp_dir();
        let path = dir.path().join("empty.wav");
        let frames: Vec<[i16; 1]> = vec![];
        std::fs::write(&path, codec::encode_wav_test(&frames, 8000)).unwrap();

        match load_clip(&path) {
            Err(AudioError::EmptyAudio { .. }) => {}
            other => panic!("expected EmptyAudio, got {other:?}"),
        }
    }

    #[test]
    fn wav_round_trip_is_within_one_quantization_step() {
        let clip = synth_clip(
            SynthKind::AmTone {
                carrier_hz: 300.0,
                envelope_hz: 3.0,
                depth: 0.5,
            },
            0.5,
            8000,
            1,
        )
        .unwrap();
        let dir = temp_dir();
        let path = dir.path().join("rt.wav");
        write_wav(&clip, &path).unwrap();
        let back = load_clip(&path).unwrap();

        assert_eq!(back.samples.len(), clip.samples.len());
        assert_eq!(back.sample_rate, clip.sample_rate);
        for (a, b) in clip.samples.iter().zip(&back.samples) {
            assert!((a - b).abs() <= 1.0 / 32768.0, "{a} vs {b}");
        }
    }

    fn touch_wav(path: &Path) {
        let frames: Vec<[i16; 1]> = vec![[0]; 4];
        std::fs::write(path, codec::encode_wav_test(&frames, 8000)).unwrap();
    }

    #[test]
    fn scan_indexes_gtzan_shaped_tree() {
        let dir = temp_dir();
        let genres = [
            "blues", "classical", "country", "disco", "hiphop", "jazz", "metal", "pop", "reggae",
            "rock",
        ];
        for g in genres {
            let d = dir.path().join(g);
            std::fs::create_dir(&d).unwrap();
            for i in 0..100 {
                touch_wav(&d.join(format!("{g}.{i:05}.wav")));
            }
        }
        let index = scan_dataset(dir.path()).unwrap();
        assert_eq!(index.entries.len(), 1000);
        assert_eq!(index.classes.len(), 10);
        assert_eq!(index.class_counts(), vec![100; 10]);
    }

    #[test]
    fn scan_single_class() {
        let dir = temp_dir();
        let d = dir.path().join("only");
        std::fs::create_dir(&d).unwrap();
        for i in 0..3 {
            touch_wav(&d.join(format!("c{i}.wav")));
        }
        let index = scan_dataset(dir.path()).unwrap();
        assert_eq!(index.entries.len(), 3);
        assert_eq!(index.classes, vec!["only".to_string()]);
    }

    #[test]
    fn scan_empty_root_errors() {
        let dir = temp_dir();
        match scan_dataset(dir.path()) {
            Err(AudioError::EmptyDataset { .. }) => {}
            other => panic!("expected EmptyDataset, got {other:?}"),
        }
    }

    #[test]
    fn scan_is_deterministic() {
        let dir = temp_dir();
        for c in ["b", "a"] {
            let d = dir.path().join(c);
            std::fs::create_dir(&d).unwrap();
            touch_wav(&d.join("z.wav"));
            touch_wav(&d.join("a.wav"));
        }
        let i1 = scan_dataset(dir.path()).unwrap();
        let i2 = scan_dataset(dir.path()).unwrap();
        assert_eq!(i1, i2);
        assert_eq!(i1.classes, vec!["a".to_string(), "b".to_string()]);
        assert!(i1.entries[0].path.ends_with("a/a.wav"));
    }
}
