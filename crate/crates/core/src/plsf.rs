//! PLSF: little-endian binary container for externally computed dense
//! feature maps.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "PLSF"
//! 4       4     u32 version (1)
//! 8       4     u32 height
//! 12      4     u32 width
//! 16      4     u32 dim
//! 20      4*HWD f32 values, row-major, feature index innermost
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::features::FeatureMap;

pub const MAGIC: [u8; 4] = *b"PLSF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 20;

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4-byte slice"))
}

/// Decodes a PLSF buffer. If `expected` is given as `(height, width)`, the
/// header must agree with it.
pub fn decode_features(bytes: &[u8], expected: Option<(usize, usize)>) -> Result<FeatureMap> {
    if bytes.len() < 4 {
        return Err(Error::TruncatedFile {
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let magic: [u8; 4] = bytes[..4].try_into().expect("4-byte slice");
    if magic != MAGIC {
        return Err(Error::BadMagic(magic));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedFile {
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let version = read_u32(bytes, 4);
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let height = read_u32(bytes, 8) as usize;
    let width = read_u32(bytes, 12) as usize;
    let dim = read_u32(bytes, 16) as usize;
    let count = height as u64 * width as u64 * dim as u64;
    let total = HEADER_LEN as u64 + 4 * count;
    if (bytes.len() as u64) < total {
        return Err(Error::TruncatedFile {
            expected: total,
            found: bytes.len() as u64,
        });
    }
    if (bytes.len() as u64) > total {
        return Err(Error::DimensionMismatch(format!(
            "feature file has {} trailing bytes",
            bytes.len() as u64 - total
        )));
    }
    if let Some((h, w)) = expected {
        if (h, w) != (height, width) {
            return Err(Error::DimensionMismatch(format!(
                "feature file is {height}x{width}, image is {h}x{w}"
            )));
        }
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")) as f64)
        .collect();
    FeatureMap::new(height, width, dim, values)
}

pub fn encode_features(fm: &FeatureMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * fm.features().len());
    out.extend_from_slice(&MAGIC);
    for v in [
        VERSION,
        fm.height() as u32,
        fm.width() as u32,
        fm.dim() as u32,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for &x in fm.features() {
        out.extend_from_slice(&(x as f32).to_le_bytes());
    }
    out
}

pub fn load_feature_file(
    path: impl AsRef<Path>,
    expected: Option<(usize, usize)>,
) -> Result<FeatureMap> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    decode_features(&std::fs::read(path)?, expected)
}

pub fn save_feature_file(fm: &FeatureMap, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode_features(fm))?;
    Ok(())
}
