//! Minimal RIFF/WAV reader and writer.
//!
//! Reads 16-bit PCM and 32-bit IEEE float files, mono or multichannel
//! (first channel kept). Writes 16-bit PCM mono, optionally with an
//! INFO/ICMT comment chunk carrying provenance metadata.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::AudioBuffer;

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::WavFormat {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn u16_at(bytes: &[u8], off: usize) -> Option<u16> {
    Some(u16::from_le_bytes(bytes.get(off..off + 2)?.try_into().ok()?))
}

fn u32_at(bytes: &[u8], off: usize) -> Option<u32> {
    Some(u32::from_le_bytes(bytes.get(off..off + 4)?.try_into().ok()?))
}

struct FmtChunk {
    format: u16,
    channels: u16,
    sample_rate: u32,
    bits_per_sample: u16,
}

/// Loads a PCM WAV file as a mono buffer normalized to [-1, 1].
///
/// Multichannel files keep the first channel, with a warning. 16-bit
/// samples are scaled by 1/32768; float samples are taken as-is.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    parse_wav(&bytes, path)
}

fn parse_wav(bytes: &[u8], path: &Path) -> Result<AudioBuffer> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(format_err(path, "missing RIFF/WAVE header"));
    }

    let mut fmt: Option<FmtChunk> = None;
    let mut data: Option<&[u8]> = None;
    let mut off = 12;
    while off + 8 <= bytes.len() {
        let id = &bytes[off..off + 4];
        let size = u32_at(bytes, off + 4).unwrap() as usize;
        let body_start = off + 8;
        if body_start + size > bytes.len() {
            return Err(format_err(path, "truncated chunk"));
        }
        let body = &bytes[body_start..body_start + size];
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(format_err(path, "fmt chunk too small"));
                }
                fmt = Some(FmtChunk {
                    format: u16_at(body, 0).unwrap(),
                    channels: u16_at(body, 2).unwrap(),
                    sample_rate: u32_at(body, 4).unwrap(),
                    bits_per_sample: u16_at(body, 14).unwrap(),
                });
            }
            b"data" => data = Some(body),
            _ => {}
        }
        // Chunks are word-aligned.
        off = body_start + size + (size & 1);
    }

    let fmt = fmt.ok_or_else(|| format_err(path, "no fmt chunk"))?;
    let data = data.ok_or_else(|| format_err(path, "no data chunk"))?;

    if fmt.channels == 0 {
        return Err(format_err(path, "zero channels"));
    }
    if fmt.sample_rate == 0 {
        return Err(format_err(path, "zero sample rate"));
    }
    if fmt.channels > 1 {
        log::warn!(
            "{}: {} channels, keeping channel 0 only",
            path.display(),
            fmt.channels
        );
    }

    let channels = fmt.channels as usize;
    let samples = match (fmt.format, fmt.bits_per_sample) {
        (FORMAT_PCM, 16) => {
            let frame_bytes = 2 * channels;
            data.chunks_exact(frame_bytes)
                .map(|frame| i16::from_le_bytes([frame[0], frame[1]]) as f64 / 32768.0)
                .collect::<Vec<f64>>()
        }
        (FORMAT_IEEE_FLOAT, 32) => {
            let frame_bytes = 4 * channels;
            data.chunks_exact(frame_bytes)
                .map(|frame| {
                    f32::from_le_bytes([frame[0], frame[1], frame[2], frame[3]]) as f64
                })
                .collect::<Vec<f64>>()
        }
        (format, bits) => {
            return Err(Error::UnsupportedWav {
                path: path.to_path_buf(),
                reason: format!("format tag {format} with {bits} bits per sample"),
            })
        }
    };

    if samples.is_empty() {
        return Err(Error::EmptyAudio);
    }
    if let Some(idx) = samples.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFiniteSample(idx));
    }
    AudioBuffer::new(samples, fmt.sample_rate)
}

/// Writes a mono 16-bit PCM WAV file. Samples are clamped to [-1, 1] and
/// scaled by 32768. An optional comment lands in a LIST/INFO/ICMT chunk.
pub fn write_wav(
    path: impl AsRef<Path>,
    samples: &[f64],
    sample_rate: u32,
    comment: Option<&str>,
) -> Result<()> {
    let path = path.as_ref();
    if samples.is_empty() {
        return Err(Error::EmptyAudio);
    }

    let data_size = samples.len() * 2;
    let info_chunk = comment.map(|c| {
        let mut text = c.as_bytes().to_vec();
        text.push(0);
        if text.len() % 2 == 1 {
            text.push(0);
        }
        let mut chunk = Vec::with_capacity(12 + 8 + text.len());
        chunk.extend_from_slice(b"LIST");
        chunk.extend_from_slice(&(4 + 8 + text.len() as u32).to_le_bytes());
        chunk.extend_from_slice(b"INFO");
        chunk.extend_from_slice(b"ICMT");
        chunk.extend_from_slice(&(text.len() as u32).to_le_bytes());
        chunk.extend_from_slice(&text);
        chunk
    });

    let riff_size = 4 + (8 + 16) + (8 + data_size) + info_chunk.as_ref().map_or(0, |c| c.len());
    let mut out = Vec::with_capacity(8 + riff_size);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(riff_size as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * 2).to_le_bytes()); // byte rate
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_size as u32).to_le_bytes());
    for &s in samples {
        let scaled = (s.clamp(-1.0, 1.0) * 32768.0).round();
        let v = scaled.clamp(i16::MIN as f64, i16::MAX as f64) as i16;
        out.extend_from_slice(&v.to_le_bytes());
    }
    if let Some(chunk) = info_chunk {
        out.extend_from_slice(&chunk);
    }

    fs::write(path, out).map_err(|e| io_err(path, e))
}
