//! Linear sketches over the field of integers modulo 2^61 - 1.
//!
//! Every sketch here is a fixed linear map of the underlying integer vector,
//! determined by a [`SketchSeed`]. Sketches with the same lineage can be added
//! and subtracted cell by cell; the result is bit-identical to sketching the
//! summed vector directly.

mod edge_probe;
pub mod field;
mod incidence;
mod l0;
mod sparse;
mod subset;
mod wire;

pub use edge_probe::{pair_from_index, pair_index, EdgeProbe, EdgeProbeMode, EdgeProbeSketch};
pub use incidence::{incidence_sign, neighborhood_sketch};
pub use l0::{L0Outcome, L0Sketch, L0_REPETITIONS};
pub use sparse::{SparseDecode, SparseRecoverySketch, SR_ROWS};
pub use subset::{PartitionMap, SubsetOutcome, SubsetSketch, SUBSET_INNER_REPETITIONS};
pub use wire::{from_bytes, to_bytes, SketchKind, HEADER_WORDS};

use crate::error::Result;
use crate::rng::derive;

/// Shared randomness for a family of mergeable sketches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SketchSeed {
    pub seed: u64,
    pub lineage: u64,
}

impl SketchSeed {
    pub fn new(seed: u64) -> Self {
        SketchSeed { seed, lineage: field::lineage_of(seed) }
    }

    /// Independent seed for a sub-purpose.
    pub fn child(&self, tag: u64) -> Self {
        SketchSeed::new(derive(self.seed, tag))
    }
}

/// Operations shared by all sketch types.
pub trait LinearSketch: Clone {
    fn dim(&self) -> u64;
    fn seed(&self) -> SketchSeed;
    /// Adds `delta * e_coord` to the sketched vector.
    fn update(&mut self, coord: u64, delta: i64) -> Result<()>;
    /// Cellwise sum with a sketch of the same lineage and shape.
    fn merge(&mut self, other: &Self) -> Result<()>;
    /// Cellwise difference with a sketch of the same lineage and shape.
    fn subtract(&mut self, other: &Self) -> Result<()>;
    /// Serialized size in 64-bit words, header included.
    fn words(&self) -> u64;
    /// Flat little-endian word encoding with the 4-word header.
    fn to_words(&self) -> Vec<u64>;
    fn bits(&self) -> u64 {
        64 * self.words()
    }
}

pub(crate) fn ceil_log2(x: u64) -> usize {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros() as usize
    }
}
