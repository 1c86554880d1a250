//! Binary PNM image I/O: P5 (grayscale) and P6 (RGB), 8-bit.
//!
//! Reading accepts any maxval in [1, 255] and normalizes by it; 16-bit
//! files are rejected. Writing always emits maxval 255. Parse failures
//! report the byte offset where the problem sits.

use super::{Image, SignalError};
use std::path::Path;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, what: impl Into<String>) -> SignalError {
        SignalError::Parse { offset: self.pos, what: what.into() }
    }

    /// Skip whitespace and `#` comments (which run to end of line).
    fn skip_separators(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn read_number(&mut self) -> Result<usize, SignalError> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected a decimal number"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse::<usize>()
            .map_err(|_| SignalError::Parse { offset: start, what: "number out of range".into() })
    }
}

/// Parse a binary PGM (P5) or PPM (P6) image.
pub fn parse_pnm(bytes: &[u8]) -> Result<Image, SignalError> {
    let mut cur = Cursor { bytes, pos: 0 };
    if bytes.len() < 2 {
        return Err(cur.err("truncated header"));
    }
    let channels = match &bytes[0..2] {
        b"P5" => 1,
        b"P6" => 3,
        _ => return Err(cur.err("not a binary PGM/PPM (magic must be P5 or P6)")),
    };
    cur.pos = 2;
    let width = cur.read_number()?;
    let height = cur.read_number()?;
    let maxval = cur.read_number()?;
    if width == 0 || height == 0 {
        return Err(cur.err("zero image dimension"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(cur.err(format!("maxval {maxval} unsupported (need 1..=255)")));
    }
    // Exactly one whitespace byte separates the header from the payload.
    if cur.pos >= bytes.len() || !matches!(bytes[cur.pos], b' ' | b'\t' | b'\r' | b'\n') {
        return Err(cur.err("expected single whitespace before pixel data"));
    }
    cur.pos += 1;
    let need = width * height * channels;
    let payload = &bytes[cur.pos..];
    if payload.len() < need {
        return Err(SignalError::Parse {
            offset: bytes.len(),
            what: format!("pixel data truncated: need {need} bytes, have {}", payload.len()),
        });
    }
    let maxval = maxval as f64;
    let data = payload[..need].iter().map(|&b| b as f64 / maxval).collect();
    Ok(Image { width, height, channels, data })
}

/// Encode as binary PGM/PPM with maxval 255; values clamp to [0, 1].
pub fn encode_pnm(img: &Image) -> Vec<u8> {
    assert!(
        img.channels == 1 || img.channels == 3,
        "PNM supports 1 or 3 channels, got {}",
        img.channels
    );
    let magic = if img.channels == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(img.data.iter().map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
    out
}

pub fn read_pnm(path: &Path) -> Result<Image, SignalError> {
    parse_pnm(&std::fs::read(path)?)
}

pub fn write_pnm(path: &Path, img: &Image) -> Result<(), SignalError> {
    Ok(std::fs::write(path, encode_pnm(img))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_exact_on_quantized_values() {
        let img = Image::from_fn(5, 4, 1, |x, y, _| ((x * 7 + y * 3) % 256) as f64 / 255.0);
        let bytes = encode_pnm(&img);
        let back = parse_pnm(&bytes).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn rgb_roundtrip() {
        let img = Image::from_fn(3, 2, 3, |x, y, c| ((x + 2 * y + 5 * c) % 256) as f64 / 255.0);
        let bytes = encode_pnm(&img);
        assert!(bytes.starts_with(b"P6"));
        assert_eq!(parse_pnm(&bytes).unwrap(), img);
    }

    #[test]
    fn comments_and_odd_whitespace_parse() {
        let mut bytes = b"P5 # magic\n# a comment line\n 2\t2 # dims\n255\n".to_vec();
        bytes.extend([0u8, 64, 128, 255]);
        let img = parse_pnm(&bytes).unwrap();
        assert_eq!((img.width, img.height), (2, 2));
        assert_eq!(img.data[3], 1.0);
        assert_eq!(img.data[1], 64.0 / 255.0);
    }

    #[test]
    fn errors_carry_byte_offsets() {
        let err = parse_pnm(b"P4\n2 2\n255\n").unwrap_err();
        let SignalError::Parse { offset, .. } = err else { panic!("wrong variant") };
        assert_eq!(offset, 0);

        let mut bytes = b"P5\n3 3\n255\n".to_vec();
        bytes.extend([0u8; 4]); // needs 9
        let err = parse_pnm(&bytes).unwrap_err();
        let SignalError::Parse { offset, what } = err else { panic!("wrong variant") };
        assert_eq!(offset, bytes.len());
        assert!(what.contains("truncated"));
    }

    #[test]
    fn rejects_wide_maxval() {
        let err = parse_pnm(b"P5\n2 2\n65535\n").unwrap_err();
        assert!(matches!(err, SignalError::Parse { .. }));
    }

    #[test]
    fn encode_clamps_out_of_range_values() {
        let mut img = Image::new(1, 1, 1);
        img.data[0] = 1.7;
        assert_eq!(*encode_pnm(&img).last().unwrap(), 255);
        img.data[0] = -0.3;
        assert_eq!(*encode_pnm(&img).last().unwrap(), 0);
    }
}
