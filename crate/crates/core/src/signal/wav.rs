//! WAV audio I/O, restricted to what the trainers consume: 16-bit PCM,
//! mono, little-endian. Multichannel or non-PCM files are rejected rather
//! than silently downmixed.

use super::{Audio, SignalError};
use std::path::Path;

fn u16_at(bytes: &[u8], pos: usize) -> Result<u16, SignalError> {
    bytes
        .get(pos..pos + 2)
        .map(|b| u16::from_le_bytes([b[0], b[1]]))
        .ok_or(SignalError::Parse { offset: pos, what: "truncated".into() })
}

fn u32_at(bytes: &[u8], pos: usize) -> Result<u32, SignalError> {
    bytes
        .get(pos..pos + 4)
        .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(SignalError::Parse { offset: pos, what: "truncated".into() })
}

/// Parse a mono 16-bit PCM WAV file.
pub fn parse_wav(bytes: &[u8]) -> Result<Audio, SignalError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(SignalError::Parse { offset: 0, what: "not a RIFF/WAVE file".into() });
    }
    let mut pos = 12;
    let mut fmt: Option<(u16, u16, u32, u16)> = None;
    let mut data: Option<&[u8]> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4)? as usize;
        let body_start = pos + 8;
        if body_start + size > bytes.len() {
            return Err(SignalError::Parse {
                offset: pos,
                what: format!("chunk '{}' overruns file", String::from_utf8_lossy(id)),
            });
        }
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(SignalError::Parse {
                        offset: body_start,
                        what: "fmt chunk too short".into(),
                    });
                }
                fmt = Some((
                    u16_at(bytes, body_start)?,     // audio format
                    u16_at(bytes, body_start + 2)?, // channels
                    u32_at(bytes, body_start + 4)?, // sample rate
                    u16_at(bytes, body_start + 14)?, // bits per sample
                ));
            }
            b"data" => data = Some(&bytes[body_start..body_start + size]),
            _ => {}
        }
        // Chunks are word-aligned.
        pos = body_start + size + (size & 1);
    }
    let (format, channels, rate, bits) =
        fmt.ok_or(SignalError::Parse { offset: bytes.len(), what: "missing fmt chunk".into() })?;
    let data = data
        .ok_or(SignalError::Parse { offset: bytes.len(), what: "missing data chunk".into() })?;
    if format != 1 {
        return Err(SignalError::Unsupported(format!("WAV format {format}, need PCM (1)")));
    }
    if bits != 16 {
        return Err(SignalError::Unsupported(format!("{bits}-bit WAV, need 16")));
    }
    if channels != 1 {
        return Err(SignalError::Unsupported(format!(
            "{channels}-channel WAV, need mono"
        )));
    }
    let samples = data
        .chunks_exact(2)
        .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0)
        .collect();
    Ok(Audio { sample_rate: rate, samples })
}

/// Encode mono 16-bit PCM; values clamp to the representable range.
pub fn encode_wav(audio: &Audio) -> Vec<u8> {
    let n = audio.samples.len();
    let data_size = (n * 2) as u32;
    let mut out = Vec::with_capacity(44 + n * 2);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_size).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&audio.sample_rate.to_le_bytes());
    out.extend_from_slice(&(audio.sample_rate * 2).to_le_bytes()); // byte rate
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_size.to_le_bytes());
    for &s in &audio.samples {
        let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    out
}

pub fn read_wav(path: &Path) -> Result<Audio, SignalError> {
    parse_wav(&std::fs::read(path)?)
}

pub fn write_wav(path: &Path, audio: &Audio) -> Result<(), SignalError> {
    Ok(std::fs::write(path, encode_wav(audio))?)
}
