//! Flat word encoding: `[kind, dim, s, lineage, payload...]`.

use crate::error::{Error, Result};

pub const HEADER_WORDS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum SketchKind {
    L0 = 1,
    SparseRecovery = 2,
    Subset = 3,
}

pub(crate) fn header(kind: SketchKind, dim: u64, s: u64, lineage: u64) -> Vec<u64> {
    vec![kind as u64, dim, s, lineage]
}

/// Checks the header and returns `(dim, s, payload)`.
pub(crate) fn split(words: &[u64], kind: SketchKind, lineage: u64) -> Result<(u64, u64, &[u64])> {
    if words.len() < HEADER_WORDS {
        return Err(Error::Decode("shorter than the header".into()));
    }
    if words[0] != kind as u64 {
        return Err(Error::Decode(format!("kind {} where {:?} was expected", words[0], kind)));
    }
    if words[3] != lineage {
        return Err(Error::IncompatibleSketch("lineage of the encoding differs from the seed".into()));
    }
    Ok((words[1], words[2], &words[HEADER_WORDS..]))
}

/// Little-endian byte image of a word array.
pub fn to_bytes(words: &[u64]) -> Vec<u8> {
    words.iter().flat_map(|w| w.to_le_bytes()).collect()
}

pub fn from_bytes(bytes: &[u8]) -> Result<Vec<u64>> {
    if bytes.len() % 8 != 0 {
        return Err(Error::Decode("byte length is not a multiple of 8".into()));
    }
    Ok(bytes.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect())
}
