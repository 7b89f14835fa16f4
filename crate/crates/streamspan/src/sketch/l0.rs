use super::field::{self, Cell, PairwiseHash};
use super::wire::{self, SketchKind};
use super::{ceil_log2, LinearSketch, SketchSeed};
use crate::error::{Error, Result};
use crate::rng::derive;

/// Independent repetitions inside one sampler. Six repetitions fail about
/// once in 1500 samples; twelve bring that under one in a million, which
/// multi-pass runs drawing hundreds of samples need.
pub const L0_REPETITIONS: usize = 12;

/// Result of [`L0Sketch::sample`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum L0Outcome {
    Sample { index: u64, value: i64 },
    Empty,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Rep {
    hash: PairwiseHash,
    z: u64,
}

/// ℓ0-sampler: per repetition, `⌈log2 dim⌉ + 1` nested subsampling levels,
/// each a `(count, index-sum, fingerprint)` cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct L0Sketch {
    dim: u64,
    levels: usize,
    seed: SketchSeed,
    reps: Vec<Rep>,
    cells: Vec<Cell>,
}

impl L0Sketch {
    pub fn new(dim: u64, seed: SketchSeed) -> Self {
        assert!(dim >= 1 && dim < field::P, "dimension must lie in [1, 2^61 - 1)");
        let levels = ceil_log2(dim) + 1;
        let reps = (0..L0_REPETITIONS as u64)
            .map(|r| {
                let s = derive(seed.seed, r);
                Rep { hash: PairwiseHash::from_seed(s), z: field::fingerprint_base(s) }
            })
            .collect();
        L0Sketch { dim, levels, seed, reps, cells: vec![Cell::default(); L0_REPETITIONS * levels] }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn is_zero(&self) -> bool {
        self.cells.iter().all(Cell::is_zero)
    }

    /// Adds a field element (rather than a small integer) at `coord`.
    pub(crate) fn update_field(&mut self, coord: u64, d: u64) {
        for (r, rep) in self.reps.iter().enumerate() {
            let h = rep.hash.hash(coord);
            let zp = field::pow(rep.z, coord);
            let base = r * self.levels;
            for l in 0..self.levels {
                if !field::survives(h, l) {
                    break;
                }
                self.cells[base + l].apply(coord, d, zp);
            }
        }
    }

    /// All coordinates certified by some 1-sparse cell, ascending, with their
    /// field values.
    fn certified(&self) -> Vec<(u64, u64)> {
        let mut found: Vec<(u64, u64)> = Vec::new();
        for (r, rep) in self.reps.iter().enumerate() {
            for l in 0..self.levels {
                let cell = &self.cells[r * self.levels + l];
                if let Some((idx, val)) = cell.singleton(self.dim, rep.z) {
                    // The recovered index must itself hash into this level.
                    if field::survives(rep.hash.hash(idx), l) {
                        found.push((idx, val));
                    }
                }
            }
        }
        found.sort_unstable();
        found.dedup();
        found
    }

    /// Returns the smallest certified nonzero coordinate, `Empty` for the
    /// zero vector, or `Fail` when no level isolates a coordinate.
    pub fn sample(&self) -> L0Outcome {
        if self.is_zero() {
            return L0Outcome::Empty;
        }
        match self.certified().first() {
            Some(&(index, v)) => L0Outcome::Sample { index, value: field::to_i64(v) },
            None => L0Outcome::Fail,
        }
    }

    pub fn from_words(words: &[u64], seed: SketchSeed) -> Result<Self> {
        let (dim, _, payload) = wire::split(words, SketchKind::L0, seed.lineage)?;
        let mut sk = L0Sketch::new(dim, seed);
        if payload.len() != 3 * sk.cells.len() {
            return Err(Error::Decode("L0 payload length does not match its shape".into()));
        }
        for (cell, w) in sk.cells.iter_mut().zip(payload.chunks_exact(3)) {
            *cell = Cell { count: w[0], isum: w[1], fp: w[2] };
        }
        Ok(sk)
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.seed != other.seed || self.dim != other.dim {
            return Err(Error::IncompatibleSketch(format!(
                "L0 lineage/dim {:#x}/{} vs {:#x}/{}",
                self.seed.lineage, self.dim, other.seed.lineage, other.dim
            )));
        }
        Ok(())
    }
}

impl LinearSketch for L0Sketch {
    fn dim(&self) -> u64 {
        self.dim
    }

    fn seed(&self) -> SketchSeed {
        self.seed
    }

    fn update(&mut self, coord: u64, delta: i64) -> Result<()> {
        if coord >= self.dim {
            return Err(Error::CoordOutOfRange { coord, dim: self.dim });
        }
        self.update_field(coord, field::from_i64(delta));
        Ok(())
    }

    fn merge(&mut self, other: &Self) -> Result<()> {
        self.compatible(other)?;
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            a.add_cell(b);
        }
        Ok(())
    }

    fn subtract(&mut self, other: &Self) -> Result<()> {
        self.compatible(other)?;
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            a.sub_cell(b);
        }
        Ok(())
    }

    fn words(&self) -> u64 {
        (wire::HEADER_WORDS + 3 * self.cells.len()) as u64
    }

    fn to_words(&self) -> Vec<u64> {
        let mut out = wire::header(SketchKind::L0, self.dim, 1, self.seed.lineage);
        for c in &self.cells {
            out.extend([c.count, c.isum, c.fp]);
        }
        out
    }
}
