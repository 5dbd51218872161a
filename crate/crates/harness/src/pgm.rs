//! Binary (P5) 8-bit greymaps. Pixels are mapped linearly to `[0, 1]`.

use std::fs;
use std::path::Path;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GreyImage {
    pub height: usize,
    pub width: usize,
    /// Row-major, values in `[0, 1]`.
    pub pixels: Vec<f64>,
}

fn malformed(offset: usize, msg: impl Into<String>) -> HarnessError {
    HarnessError::Pgm { offset, msg: msg.into() }
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&c) = self.bytes.get(self.pos) {
            if c == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(malformed(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed(start, format!("{what} out of range")))
    }
}

pub fn decode_pgm(bytes: &[u8]) -> Result<GreyImage> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(malformed(0, "missing P5 magic number"));
    }
    let mut hdr = Header { bytes, pos: 2 };
    let width = hdr.number("width")?;
    let height = hdr.number("height")?;
    hdr.skip_space_and_comments();
    let maxval_at = hdr.pos;
    let maxval = hdr.number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(malformed(maxval_at, format!("maxval {maxval} is not an 8-bit value")));
    }
    match bytes.get(hdr.pos) {
        Some(c) if c.is_ascii_whitespace() => hdr.pos += 1,
        _ => return Err(malformed(hdr.pos, "expected a single whitespace before the raster")),
    }
    let len = width
        .checked_mul(height)
        .ok_or_else(|| malformed(0, "image dimensions overflow"))?;
    if len == 0 {
        return Err(malformed(0, "empty image"));
    }
    let raster = &bytes[hdr.pos..];
    if raster.len() < len {
        return Err(malformed(
            bytes.len(),
            format!("truncated raster: expected {len} bytes, found {}", raster.len()),
        ));
    }
    let scale = maxval as f64;
    let pixels = raster[..len]
        .iter()
        .enumerate()
        .map(|(k, &b)| {
            if b as usize > maxval {
                Err(malformed(hdr.pos + k, format!("pixel {b} exceeds maxval {maxval}")))
            } else {
                Ok(b as f64 / scale)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GreyImage { height, width, pixels })
}

pub fn encode_pgm(img: &GreyImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(img.pixels.iter().map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
    out
}

pub fn read_pgm(path: &Path) -> Result<GreyImage> {
    let bytes = fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    decode_pgm(&bytes)
}

pub fn write_pgm(path: &Path, img: &GreyImage) -> Result<()> {
    fs::write(path, encode_pgm(img)).map_err(|e| HarnessError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_round_trip_is_byte_identical() {
        let bytes = b"P5\n2 2\n255\n\x00\x7f\x80\xff".to_vec();
        let img = decode_pgm(&bytes).unwrap();
        assert_eq!((img.height, img.width), (2, 2));
        assert_eq!(img.pixels[3], 1.0);
        assert_eq!(encode_pgm(&img), bytes);
    }

    #[test]
    fn header_comments_and_small_maxval() {
        let img = decode_pgm(b"P5 # made by hand\n3 1 # dims\n15\n\x00\x0f\x05").unwrap();
        assert_eq!(img.pixels, vec![0.0, 1.0, 5.0 / 15.0]);
    }

    #[test]
    fn write_clamps_and_rounds() {
        let img = GreyImage { height: 1, width: 3, pixels: vec![-0.5, 0.5, 2.0] };
        assert_eq!(&encode_pgm(&img)[11..], &[0, 128, 255]);
    }

    #[test]
    fn errors_carry_offsets() {
        let bad = |b: &[u8]| match decode_pgm(b).unwrap_err() {
            HarnessError::Pgm { offset, .. } => offset,
            e => panic!("{e}"),
        };
        assert_eq!(bad(b"P2\n1 1\n255\n\x00"), 0);
        assert_eq!(bad(b"P5\nx 1\n255\n\x00"), 3);
        assert_eq!(bad(b"P5\n1 1\n999\n\x00"), 7);
        assert_eq!(bad(b"P5\n2 2\n255\n\x00"), 12);
        assert_eq!(bad(b"P5\n1 1\n15\n\x10"), 10);
    }
}
