//! Binary netpbm: P5 (8-bit grey) for masks, P6 (8-bit RGB) for renders.

use std::fs;
use std::path::Path;

use lesionuq_core::render::RgbImage;
use lesionuq_core::BinaryMask;

use crate::error::{Error, Result};

/// Grey level at or above which a mask pixel is lesion.
pub const MASK_THRESHOLD: u8 = 128;

struct Header {
    width: usize,
    height: usize,
    maxval: usize,
    data_offset: usize,
}

fn parse_header(bytes: &[u8], magic: &[u8; 2], path: &Path) -> Result<Header> {
    let unsupported = |reason: &str| Error::UnsupportedFormat { path: path.to_path_buf(), reason: reason.into() };
    if bytes.len() < 2 || &bytes[..2] != magic {
        return Err(unsupported(&format!("expected binary netpbm magic {}", String::from_utf8_lossy(magic))));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        // Whitespace and `#` comments may separate header fields.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| unsupported("malformed header"))?;
    }
    // Exactly one whitespace byte precedes the raster.
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(unsupported("malformed header"));
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(unsupported("zero dimension"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(unsupported("only 8-bit samples (maxval <= 255) are supported"));
    }
    Ok(Header { width, height, maxval, data_offset: pos + 1 })
}

/// Decodes a P5 image and binarizes it at [`MASK_THRESHOLD`].
pub fn decode_mask(bytes: &[u8], path: &Path) -> Result<BinaryMask> {
    let h = parse_header(bytes, b"P5", path)?;
    let _ = h.maxval;
    let n = h.width * h.height;
    let raster = &bytes[h.data_offset..];
    if raster.len() < n {
        return Err(Error::TruncatedFile {
            path: path.to_path_buf(),
            expected: (h.data_offset + n) as u64,
            found: bytes.len() as u64,
        });
    }
    let bits = raster[..n].iter().map(|&v| v >= MASK_THRESHOLD).collect();
    BinaryMask::new(h.width, h.height, bits).map_err(Error::analysis(path.display().to_string()))
}

pub fn encode_mask(mask: &BinaryMask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(mask.bits().iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

pub fn read_mask(path: &Path) -> Result<BinaryMask> {
    let bytes = fs::read(path).map_err(Error::io(path))?;
    decode_mask(&bytes, path)
}

pub fn write_mask(mask: &BinaryMask, path: &Path) -> Result<()> {
    super::write_file(path, &encode_mask(mask))
}

pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

/// Reads back a P6 file written by [`write_ppm`].
pub fn decode_ppm(bytes: &[u8], path: &Path) -> Result<RgbImage> {
    let h = parse_header(bytes, b"P6", path)?;
    let n = h.width * h.height * 3;
    let raster = &bytes[h.data_offset..];
    if raster.len() < n {
        return Err(Error::TruncatedFile {
            path: path.to_path_buf(),
            expected: (h.data_offset + n) as u64,
            found: bytes.len() as u64,
        });
    }
    Ok(RgbImage { width: h.width, height: h.height, data: raster[..n].to_vec() })
}

pub fn write_ppm(img: &RgbImage, path: &Path) -> Result<()> {
    super::write_file(path, &encode_ppm(img))
}
