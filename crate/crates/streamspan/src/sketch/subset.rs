use super::field::{self, Cell, PairwiseHash};
use super::sparse::SparseRecoverySketch;
use super::wire::{self, SketchKind};
use super::{ceil_log2, LinearSketch, SketchSeed};
use crate::error::{Error, Result};
use crate::rng::derive;
use std::collections::BTreeMap;

/// Repetitions of each per-part ℓ0-sampler.
pub const SUBSET_INNER_REPETITIONS: usize = 12;

/// Result of [`SubsetSketch::recover`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubsetOutcome {
    /// One `(part, local index, value)` per part with a nonzero coordinate,
    /// ascending by part.
    Recovered(Vec<(u64, u64, i64)>),
    /// More nonzero parts than the budget allows.
    Overflow,
    /// The sampler of `part` isolated no coordinate.
    Fail { part: u64 },
}

/// Explicit partition `A_1..A_r` of coordinates, mapping each coordinate to
/// `(part, position inside the part)`.
#[derive(Clone, Debug)]
pub struct PartitionMap {
    parts: Vec<Vec<u64>>,
    index: BTreeMap<u64, (u64, u64)>,
}

impl PartitionMap {
    pub fn new(parts: Vec<Vec<u64>>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (p, part) in parts.iter().enumerate() {
            for (i, &c) in part.iter().enumerate() {
                if index.insert(c, (p as u64, i as u64)).is_some() {
                    return Err(Error::Parameter(format!("coordinate {c} appears in two parts")));
                }
            }
        }
        Ok(PartitionMap { parts, index })
    }

    pub fn part_count(&self) -> u64 {
        self.parts.len() as u64
    }

    pub fn max_part_size(&self) -> u64 {
        self.parts.iter().map(|p| p.len() as u64).max().unwrap_or(1).max(1)
    }

    pub fn locate(&self, coord: u64) -> Option<(u64, u64)> {
        self.index.get(&coord).copied()
    }

    pub fn coord(&self, part: u64, local: u64) -> u64 {
        self.parts[part as usize][local as usize]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Rep {
    hash: PairwiseHash,
    z: u64,
}

/// Subset sampler: every part carries an ℓ0-sampler over its local
/// coordinates; the concatenation of all those sampler cells is itself
/// sketched by a sparse-recovery table. With at most `s` nonzero parts the
/// concatenated vector has at most `s · reps · levels · 3` nonzero entries,
/// which is the recovery budget.
///
/// As a [`LinearSketch`], coordinate `part * part_dim + local` addresses
/// position `local` of part `part`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetSketch {
    parts: u64,
    part_dim: u64,
    s: u64,
    levels: usize,
    seed: SketchSeed,
    reps: Vec<Rep>,
    inner: SparseRecoverySketch,
}

impl SubsetSketch {
    pub fn new(parts: u64, part_dim: u64, s: u64, seed: SketchSeed) -> Self {
        assert!(parts >= 1 && part_dim >= 1 && s >= 1, "parts, part size and budget must be positive");
        let levels = ceil_log2(part_dim) + 1;
        let reps = (0..SUBSET_INNER_REPETITIONS as u64)
            .map(|r| {
                let sd = derive(seed.seed, 500 + r);
                Rep { hash: PairwiseHash::from_seed(sd), z: field::fingerprint_base(sd) }
            })
            .collect();
        let per_part = (SUBSET_INNER_REPETITIONS * levels * 3) as u64;
        let budget = s.min(parts) * per_part;
        let inner = SparseRecoverySketch::new(parts * per_part, budget, seed.child(0x5b5e7));
        SubsetSketch { parts, part_dim, s, levels, seed, reps, inner }
    }

    pub fn for_partition(map: &PartitionMap, s: u64, seed: SketchSeed) -> Self {
        Self::new(map.part_count(), map.max_part_size(), s, seed)
    }

    pub fn budget(&self) -> u64 {
        self.s
    }

    pub fn part_dim(&self) -> u64 {
        self.part_dim
    }

    fn per_part(&self) -> u64 {
        (SUBSET_INNER_REPETITIONS * self.levels * 3) as u64
    }

    /// Adds `delta` at position `local` of `part`.
    pub fn update_local(&mut self, part: u64, local: u64, delta: i64) -> Result<()> {
        if part >= self.parts || local >= self.part_dim {
            return Err(Error::CoordOutOfRange { coord: part * self.part_dim + local, dim: self.dim() });
        }
        let d = field::from_i64(delta);
        let per_part = self.per_part();
        for (r, rep) in self.reps.iter().enumerate() {
            let h = rep.hash.hash(local);
            let zp = field::pow(rep.z, local);
            for l in 0..self.levels {
                if !field::survives(h, l) {
                    break;
                }
                let base = part * per_part + ((r * self.levels + l) * 3) as u64;
                self.inner.update_field(base, d);
                self.inner.update_field(base + 1, field::mul(d, local % field::P));
                self.inner.update_field(base + 2, field::mul(d, zp));
            }
        }
        Ok(())
    }

    /// Updates through an explicit partition.
    pub fn update_coord(&mut self, map: &PartitionMap, coord: u64, delta: i64) -> Result<()> {
        let (p, l) = map
            .locate(coord)
            .ok_or(Error::CoordOutOfRange { coord, dim: u64::MAX })?;
        self.update_local(p, l, delta)
    }

    pub fn recover(&self) -> SubsetOutcome {
        let Some(entries) = self.inner.decode_field() else {
            return SubsetOutcome::Overflow;
        };
        let per_part = self.per_part();
        let mut by_part: BTreeMap<u64, Vec<Cell>> = BTreeMap::new();
        for (j, val) in entries {
            let part = j / per_part;
            let rem = (j % per_part) as usize;
            let (cell, comp) = (rem / 3, rem % 3);
            let cells = by_part
                .entry(part)
                .or_insert_with(|| vec![Cell::default(); SUBSET_INNER_REPETITIONS * self.levels]);
            match comp {
                0 => cells[cell].count = val,
                1 => cells[cell].isum = val,
                _ => cells[cell].fp = val,
            }
        }
        let mut out = Vec::with_capacity(by_part.len());
        for (part, cells) in by_part {
            let mut best: Option<(u64, u64)> = None;
            for (r, rep) in self.reps.iter().enumerate() {
                for l in 0..self.levels {
                    if let Some((idx, v)) = cells[r * self.levels + l].singleton(self.part_dim, rep.z) {
                        if field::survives(rep.hash.hash(idx), l) && best.map_or(true, |b| idx < b.0) {
                            best = Some((idx, v));
                        }
                    }
                }
            }
            match best {
                Some((idx, v)) => out.push((part, idx, field::to_i64(v))),
                None => return SubsetOutcome::Fail { part },
            }
        }
        SubsetOutcome::Recovered(out)
    }

    pub fn from_words(words: &[u64], seed: SketchSeed, parts: u64) -> Result<Self> {
        let (dim, s, payload) = wire::split(words, SketchKind::Subset, seed.lineage)?;
        if parts == 0 || dim % parts != 0 {
            return Err(Error::Decode("dimension is not a multiple of the part count".into()));
        }
        let mut sk = SubsetSketch::new(parts, dim / parts, s, seed);
        sk.inner = SparseRecoverySketch::from_words(payload, sk.inner.seed())?;
        Ok(sk)
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.seed != other.seed || self.parts != other.parts || self.part_dim != other.part_dim || self.s != other.s {
            return Err(Error::IncompatibleSketch("subset sketches differ in lineage or shape".into()));
        }
        Ok(())
    }
}

impl LinearSketch for SubsetSketch {
    fn dim(&self) -> u64 {
        self.parts * self.part_dim
    }

    fn seed(&self) -> SketchSeed {
        self.seed
    }

    fn update(&mut self, coord: u64, delta: i64) -> Result<()> {
        if coord >= self.dim() {
            return Err(Error::CoordOutOfRange { coord, dim: self.dim() });
        }
        self.update_local(coord / self.part_dim, coord % self.part_dim, delta)
    }

    fn merge(&mut self, other: &Self) -> Result<()> {
        self.compatible(other)?;
        self.inner.merge(&other.inner)
    }

    fn subtract(&mut self, other: &Self) -> Result<()> {
        self.compatible(other)?;
        self.inner.subtract(&other.inner)
    }

    fn words(&self) -> u64 {
        wire::HEADER_WORDS as u64 + self.inner.words()
    }

    fn to_words(&self) -> Vec<u64> {
        let mut out = wire::header(SketchKind::Subset, self.dim(), self.s, self.seed.lineage);
        out.extend(self.inner.to_words());
        out
    }
}
