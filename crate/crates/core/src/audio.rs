//! 16 kHz / 16-bit mono PCM WAV input and output.
//!
//! Every processing module in this crate consumes [`AudioClip`] values
//! produced here. Only plain RIFF/WAVE with format tag 1 (integer PCM),
//! 16 bits per sample, at 16000 Hz is accepted; multichannel input is
//! downmixed to mono by the arithmetic mean of the channels.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Sample rate required of all clips entering the DSP and NN modules.
pub const REQUIRED_SAMPLE_RATE: u32 = 16_000;

/// Quantization scale for 16-bit PCM.
const PCM_SCALE: f64 = 32_768.0;

/// A mono sampled waveform.
///
/// Samples are dimensionless amplitudes, nominally in `[-1.0, 1.0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate_hz: u32,
    pub label: Option<String>,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Self {
        AudioClip {
            samples,
            sample_rate_hz,
            label: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration in seconds.
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    /// Root mean square amplitude; 0.0 for an empty clip.
    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        (self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    /// Checks the invariants required of clips entering processing
    /// operations: non-empty and all samples finite.
    pub fn validate(&self, context: &str) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::LengthZero);
        }
        if !self.samples.iter().all(|s| s.is_finite()) {
            return Err(Error::NonFiniteValue(format!("samples ({context})")));
        }
        Ok(())
    }
}

/// Reads a RIFF/WAVE file into a mono [`AudioClip`].
///
/// Multichannel input is downmixed by the arithmetic mean of the channels.
/// 16-bit samples are scaled by 1/32768. Extra chunks before `data` are
/// skipped.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::IoFailure {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = BufReader::new(file);
    let mut bytes = Vec::new();
    reader
        .read_to_end(&mut bytes)
        .map_err(|source| Error::IoFailure {
            path: path.to_path_buf(),
            source,
        })?;
    let clip = parse_wav(&bytes, path)?;
    Ok(clip.with_label(path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()))
}

fn malformed(path: &Path, detail: impl Into<String>) -> Error {
    Error::MalformedWav {
        path: path.to_path_buf(),
        detail: detail.into(),
    }
}

fn parse_wav(bytes: &[u8], path: &Path) -> Result<AudioClip> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(malformed(path, "missing RIFF/WAVE header"));
    }

    let mut pos = 12usize;
    let mut fmt: Option<(u16, u16, u32, u16)> = None; // (tag, channels, rate, bits)
    let mut data: Option<&[u8]> = None;

    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        let body_end = body_start.checked_add(size).ok_or_else(|| {
            malformed(path, "chunk size overflows")
        })?;
        if body_end > bytes.len() {
            return Err(malformed(
                path,
                format!("chunk '{}' truncated", String::from_utf8_lossy(id)),
            ));
        }
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(malformed(path, "fmt chunk shorter than 16 bytes"));
                }
                let tag = u16::from_le_bytes(body[0..2].try_into().unwrap());
                let channels = u16::from_le_bytes(body[2..4].try_into().unwrap());
                let rate = u32::from_le_bytes(body[4..8].try_into().unwrap());
                let bits = u16::from_le_bytes(body[14..16].try_into().unwrap());
                fmt = Some((tag, channels, rate, bits));
            }
            b"data" => {
                data = Some(body);
                break;
            }
            _ => {}
        }
        // Chunks are word-aligned; odd sizes carry a pad byte.
        pos = body_end + (size & 1);
    }

    let (tag, channels, rate, bits) = fmt.ok_or_else(|| malformed(path, "no fmt chunk before data"))?;
    let data = data.ok_or_else(|| malformed(path, "no data chunk"))?;

    if tag != 1 {
        return Err(Error::UnsupportedEncoding {
            path: path.to_path_buf(),
            detail: format!("format tag {tag}, only PCM (1) is supported"),
        });
    }
    if bits != 16 {
        return Err(Error::UnsupportedEncoding {
            path: path.to_path_buf(),
            detail: format!("{bits} bits per sample, only 16 is supported"),
        });
    }
    if channels == 0 {
        return Err(malformed(path, "zero channels"));
    }
    if rate != REQUIRED_SAMPLE_RATE {
        return Err(Error::UnsupportedSampleRate {
            path: path.to_path_buf(),
            rate_hz: rate,
        });
    }

    let ch = channels as usize;
    let frames = data.len() / (2 * ch);
    let mut samples = Vec::with_capacity(frames);
    for f in 0..frames {
        let mut acc = 0.0f64;
        for c in 0..ch {
            let off = (f * ch + c) * 2;
            let v = i16::from_le_bytes(data[off..off + 2].try_into().unwrap());
            acc += v as f64 / PCM_SCALE;
        }
        samples.push(acc / ch as f64);
    }

    Ok(AudioClip::new(samples, rate))
}

/// Quantizes one sample to 16-bit PCM: hard clip to `[-1, 1)`, then round
/// to the nearest integer step.
fn quantize(sample: f64) -> i16 {
    let scaled = (sample * PCM_SCALE).round();
    scaled.clamp(-32_768.0, 32_767.0) as i16
}

/// Writes a mono 16-bit PCM WAV at `clip.sample_rate_hz`.
///
/// Samples outside `[-1, 1)` are hard-clipped before quantization.
pub fn write_wav(clip: &AudioClip, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if !clip.samples.iter().all(|s| s.is_finite()) {
        return Err(Error::NonFiniteValue("samples (write_wav)".into()));
    }
    let io_err = |source| Error::IoFailure {
        path: path.to_path_buf(),
        source,
    };

    let file = File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);

    let data_len = (clip.samples.len() * 2) as u32;
    w.write_all(b"RIFF").map_err(io_err)?;
    w.write_all(&(36 + data_len).to_le_bytes()).map_err(io_err)?;
    w.write_all(b"WAVE").map_err(io_err)?;
    w.write_all(b"fmt ").map_err(io_err)?;
    w.write_all(&16u32.to_le_bytes()).map_err(io_err)?;
    w.write_all(&1u16.to_le_bytes()).map_err(io_err)?; // PCM
    w.write_all(&1u16.to_le_bytes()).map_err(io_err)?; // mono
    w.write_all(&clip.sample_rate_hz.to_le_bytes()).map_err(io_err)?;
    let byte_rate = clip.sample_rate_hz * 2;
    w.write_all(&byte_rate.to_le_bytes()).map_err(io_err)?;
    w.write_all(&2u16.to_le_bytes()).map_err(io_err)?; // block align
    w.write_all(&16u16.to_le_bytes()).map_err(io_err)?; // bits
    w.write_all(b"data").map_err(io_err)?;
    w.write_all(&data_len.to_le_bytes()).map_err(io_err)?;
    for &s in &clip.samples {
        w.write_all(&quantize(s).to_le_bytes()).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}
