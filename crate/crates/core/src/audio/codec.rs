//! Byte-level WAV and AU parsing/encoding.
//!
//! Only the encodings actually found in the datasets are handled:
//! RIFF/WAVE 16-bit PCM little-endian (any channel count) and Sun AU
//! (".snd") 16-bit linear PCM big-endian.

use std::path::Path;

use super::{display_path, AudioError};

pub(super) const AU_MAGIC: &[u8; 4] = b".snd";
const AU_ENCODING_PCM16: u32 = 3;

fn corrupt(path: &Path, detail: &str) -> AudioError {
    AudioError::CorruptFile {
        path: display_path(path),
        detail: detail.to_string(),
    }
}

fn unsupported(path: &Path, detail: String) -> AudioError {
    AudioError::UnsupportedFormat {
        path: display_path(path),
        detail,
    }
}

fn read_u32_le(b: &[u8], at: usize) -> Option<u32> {
    Some(u32::from_le_bytes(b.get(at..at + 4)?.try_into().ok()?))
}

fn read_u16_le(b: &[u8], at: usize) -> Option<u16> {
    Some(u16::from_le_bytes(b.get(at..at + 2)?.try_into().ok()?))
}

fn read_u32_be(b: &[u8], at: usize) -> Option<u32> {
    Some(u32::from_be_bytes(b.get(at..at + 4)?.try_into().ok()?))
}

/// Average interleaved i16 frames down to mono f64 in [-1, 1].
fn downmix(pcm: &[i16], channels: usize) -> Vec<f64> {
    let frames = pcm.len() / channels;
    let mut out = Vec::with_capacity(frames);
    for f in 0..frames {
        let mut acc = 0.0;
        for c in 0..channels {
            acc += pcm[f * channels + c] as f64;
        }
        out.push(acc / (channels as f64 * 32768.0));
    }
    out
}

pub(super) fn decode_wav(bytes: &[u8], path: &Path) -> Result<(Vec<f64>, u32), AudioError> {
    if bytes.len() < 12 || &bytes[8..12] != b"WAVE" {
        return Err(corrupt(path, "missing RIFF/WAVE header"));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None; // (format, channels, rate, bits)
    let mut data: Option<&[u8]> = None;
    let mut pos = 12usize;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = read_u32_le(bytes, pos + 4).ok_or_else(|| corrupt(path, "chunk header"))? as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| corrupt(path, "chunk length exceeds file size"))?;
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(corrupt(path, "fmt chunk too short"));
                }
                let format = read_u16_le(body, 0).unwrap();
                let channels = read_u16_le(body, 2).unwrap();
                let rate = read_u32_le(body, 4).unwrap();
                let bits = read_u16_le(body, 14).unwrap();
                fmt = Some((format, channels, rate, bits));
            }
            b"data" => data = Some(body),
            _ => {}
        }
        // Chunks are word-aligned; odd sizes carry a pad byte.
        pos = body_end + (size & 1);
    }

    let (format, channels, rate, bits) =
        fmt.ok_or_else(|| corrupt(path, "missing fmt chunk"))?;
    if format != 1 {
        return Err(unsupported(path, format!("WAV format tag {format}, want PCM (1)")));
    }
    if bits != 16 {
        return Err(unsupported(path, format!("{bits}-bit WAV, want 16-bit")));
    }
    if channels == 0 {
        return Err(corrupt(path, "zero channels"));
    }
    if rate == 0 {
        return Err(corrupt(path, "zero sample rate"));
    }
    let data = data.ok_or_else(|| corrupt(path, "missing data chunk"))?;
    if data.len() % (2 * channels as usize) != 0 {
        return Err(corrupt(path, "data size is not a whole number of frames"));
    }
    let pcm: Vec<i16> = data
        .chunks_exact(2)
        .map(|c| i16::from_le_bytes([c[0], c[1]]))
        .collect();
    Ok((downmix(&pcm, channels as usize), rate))
}

pub(super) fn decode_au(bytes: &[u8], path: &Path) -> Result<(Vec<f64>, u32), AudioError> {
    if bytes.len() < 24 {
        return Err(corrupt(path, "AU header truncated"));
    }
    let data_offset = read_u32_be(bytes, 4).unwrap() as usize;
    let data_size = read_u32_be(bytes, 8).unwrap();
    let encoding = read_u32_be(bytes, 12).unwrap();
    let rate = read_u32_be(bytes, 16).unwrap();
    let channels = read_u32_be(bytes, 20).unwrap();

    if encoding != AU_ENCODING_PCM16 {
        return Err(unsupported(
            path,
            format!("AU encoding {encoding}, want 16-bit linear PCM (3)"),
        ));
    }
    if data_offset < 24 || data_offset > bytes.len() {
        return Err(corrupt(path, "AU data offset out of range"));
    }
    if channels == 0 {
        return Err(corrupt(path, "zero channels"));
    }
    if rate == 0 {
        return Err(corrupt(path, "zero sample rate"));
    }
    let body = &bytes[data_offset..];
    // 0xffffffff marks "unknown length": read to end of file.
    let body = if data_size != u32::MAX {
        body.get(..data_size as usize)
            .ok_or_else(|| corrupt(path, "AU data size exceeds file size"))?
    } else {
        body
    };
    if body.len() % (2 * channels as usize) != 0 {
        return Err(corrupt(path, "AU data is not a whole number of frames"));
    }
    let pcm: Vec<i16> = body
        .chunks_exact(2)
        .map(|c| i16::from_be_bytes([c[0], c[1]]))
        .collect();
    Ok((downmix(&pcm, channels as usize), rate))
}

fn quantize(sample: f64) -> i16 {
    (sample * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

pub(super) fn encode_wav_mono(samples: &[f64], sample_rate: u32) -> Vec<u8> {
    let data_size = (samples.len() * 2) as u32;
    let mut out = Vec::with_capacity(44 + data_size as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_size).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_size.to_le_bytes());
    for &s in samples {
        out.extend_from_slice(&quantize(s).to_le_bytes());
    }
    out
}

#[cfg(test)]
pub(super) fn encode_wav_test<const C: usize>(frames: &[[i16; C]], sample_rate: u32) -> Vec<u8> {
    let channels = C as u16;
    let data_size = (frames.len() * C * 2) as u32;
    let block = channels * 2;
    let mut out = Vec::new();
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_size).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&channels.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * block as u32).to_le_bytes());
    out.extend_from_slice(&block.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_size.to_le_bytes());
    for frame in frames {
        for s in frame {
            out.extend_from_slice(&s.to_le_bytes());
        }
    }
    out
}

#[cfg(test)]
pub(super) fn encode_au_test(pcm: &[i16], sample_rate: u32, channels: u32) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(AU_MAGIC);
    out.extend_from_slice(&24u32.to_be_bytes());
    out.extend_from_slice(&((pcm.len() * 2) as u32).to_be_bytes());
    out.extend_from_slice(&AU_ENCODING_PCM16.to_be_bytes());
    out.extend_from_slice(&sample_rate.to_be_bytes());
    out.extend_from_slice(&channels.to_be_bytes());
    for s in pcm {
        out.extend_from_slice(&s.to_be_bytes());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    #[test]
    fn au_with_unknown_length_reads_to_eof() {
        let mut bytes = encode_au_test(&[100, -100, 200, -200], 8000, 1);
        bytes[8..12].copy_from_slice(&u32::MAX.to_be_bytes());
        let (samples, rate) = decode_au(&bytes, &PathBuf::from("x.au")).unwrap();
        assert_eq!(rate, 8000);
        assert_eq!(samples.len(), 4);
        assert_eq!(samples[0], 100.0 / 32768.0);
    }

    #[test]
    fn wav_skips_unknown_chunks() {
        let frames: Vec<[i16; 1]> = vec![[1000]; 8];
        let wav = encode_wav_test(&frames, 8000);
        // Splice a LIST chunk between fmt and data.
        let mut spliced = wav[..36].to_vec();
        spliced.extend_from_slice(b"LIST");
        spliced.extend_from_slice(&4u32.to_le_bytes());
        spliced.extend_from_slice(b"INFO");
        spliced.extend_from_slice(&wav[36..]);
        let riff_size = (spliced.len() - 8) as u32;
        spliced[4..8].copy_from_slice(&riff_size.to_le_bytes());

        let (samples, rate) = decode_wav(&spliced, &PathBuf::from("x.wav")).unwrap();
        assert_eq!(rate, 8000);
        assert_eq!(samples.len(), 8);
    }

    #[test]
    fn quantize_clamps_and_rounds() {
        assert_eq!(quantize(0.0), 0);
        assert_eq!(quantize(1.0), 32767);
        assert_eq!(quantize(-1.0), -32768);
        assert_eq!(quantize(2.0), 32767);
        assert_eq!(quantize(0.5), 16384);
    }
}
