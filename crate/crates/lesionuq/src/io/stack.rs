//! UQS1 stack container.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "UQS1"
//! 4       4     width, u32 little-endian
//! 8       4     height, u32 LE
//! 12      4     alpha (iterations), u32 LE
//! 16      4*N   N = width*height*alpha IEEE-754 f32 LE, iteration-major
//! ```

use std::fs;
use std::path::Path;

use lesionuq_core::{ProbStack, UncertaintyMap};

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"UQS1";
pub const HEADER_LEN: usize = 16;

pub fn encode_stack(stack: &ProbStack) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * stack.values().len());
    out.extend_from_slice(&MAGIC);
    for dim in [stack.width(), stack.height(), stack.alpha()] {
        let dim = u32::try_from(dim).expect("stack dimensions fit in u32");
        out.extend_from_slice(&dim.to_le_bytes());
    }
    for v in stack.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Parses and validates a UQS1 buffer; `origin` only labels errors.
pub fn decode_stack(bytes: &[u8], origin: &Path) -> Result<ProbStack> {
    let path = || origin.to_path_buf();
    if bytes.len() < HEADER_LEN {
        let found: [u8; 4] = std::array::from_fn(|i| bytes.get(i).copied().unwrap_or(0));
        if bytes.len() >= 4 && found != MAGIC {
            return Err(Error::BadMagic { path: path(), found });
        }
        return Err(Error::TruncatedFile {
            path: path(),
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(Error::BadMagic { path: path(), found: magic });
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap());
    let (width, height, alpha) = (word(0), word(1), word(2));
    let expected = HEADER_LEN as u64 + 4 * u64::from(width) * u64::from(height) * u64::from(alpha);
    let found = bytes.len() as u64;
    if found < expected {
        return Err(Error::TruncatedFile { path: path(), expected, found });
    }
    if found > expected {
        return Err(Error::TrailingData { path: path(), expected, found });
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    ProbStack::new(width as usize, height as usize, alpha as usize, values)
        .map_err(Error::analysis(origin.display().to_string()))
}

pub fn read_stack(path: &Path) -> Result<ProbStack> {
    let bytes = fs::read(path).map_err(Error::io(path))?;
    decode_stack(&bytes, path)
}

pub fn write_stack(stack: &ProbStack, path: &Path) -> Result<()> {
    super::write_file(path, &encode_stack(stack))
}

/// Stores an uncertainty map as a single-plane stack.
pub fn write_map(map: &UncertaintyMap, path: &Path) -> Result<()> {
    let values = map.values().iter().map(|&v| v as f32).collect();
    let stack = ProbStack::new(map.width(), map.height(), 1, values)
        .map_err(Error::analysis(path.display().to_string()))?;
    write_stack(&stack, path)
}
