use super::field::{self, Cell, PairwiseHash};
use super::wire::{self, SketchKind};
use super::{LinearSketch, SketchSeed};
use crate::error::{Error, Result};
use crate::rng::derive;
use std::collections::BTreeMap;

/// Hash rows in the recovery table.
pub const SR_ROWS: usize = 6;

/// Tables with more cells than this keep only their nonzero cells.
const DENSE_CELL_LIMIT: usize = 1 << 10;

/// Result of [`SparseRecoverySketch::decode`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SparseDecode {
    /// Every nonzero `(index, value)`, ascending by index.
    Exact(Vec<(u64, i64)>),
    /// The support exceeds the budget, or peeling could not certify it.
    Overflow,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Store {
    Dense(Vec<Cell>),
    Sparse(BTreeMap<u32, Cell>),
}

/// s-sparse recovery: `SR_ROWS` rows of `max(2s, 4)` buckets, each bucket a
/// `(count, index-sum, fingerprint)` cell. Decoding peels 1-sparse buckets
/// and reports overflow unless the table empties with at most `s` entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseRecoverySketch {
    dim: u64,
    s: u64,
    width: usize,
    seed: SketchSeed,
    rows: Vec<PairwiseHash>,
    z: u64,
    store: Store,
}

impl SparseRecoverySketch {
    pub fn new(dim: u64, s: u64, seed: SketchSeed) -> Self {
        assert!(dim >= 1 && dim < field::P, "dimension must lie in [1, 2^61 - 1)");
        assert!(s >= 1, "sparsity budget must be positive");
        let width = (2 * s as usize).max(4);
        let rows = (0..SR_ROWS as u64).map(|r| PairwiseHash::from_seed(derive(seed.seed, 100 + r))).collect();
        let cells = SR_ROWS * width;
        let store = if cells <= DENSE_CELL_LIMIT {
            Store::Dense(vec![Cell::default(); cells])
        } else {
            Store::Sparse(BTreeMap::new())
        };
        SparseRecoverySketch { dim, s, width, seed, rows, z: field::fingerprint_base(seed.seed), store }
    }

    pub fn budget(&self) -> u64 {
        self.s
    }

    fn table_cells(&self) -> usize {
        SR_ROWS * self.width
    }

    #[inline]
    fn slot(&self, row: usize, idx: u64) -> u32 {
        (row * self.width + (self.rows[row].hash(idx) % self.width as u64) as usize) as u32
    }

    fn apply_at(store: &mut Store, slot: u32, idx: u64, d: u64, zp: u64) {
        match store {
            Store::Dense(v) => v[slot as usize].apply(idx, d, zp),
            Store::Sparse(m) => {
                let c = m.entry(slot).or_default();
                c.apply(idx, d, zp);
                if c.is_zero() {
                    m.remove(&slot);
                }
            }
        }
    }

    pub(crate) fn update_field(&mut self, coord: u64, d: u64) {
        if d == 0 {
            return;
        }
        let zp = field::pow(self.z, coord);
        for r in 0..SR_ROWS {
            let slot = self.slot(r, coord);
            Self::apply_at(&mut self.store, slot, coord, d, zp);
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.store {
            Store::Dense(v) => v.iter().all(Cell::is_zero),
            Store::Sparse(m) => m.is_empty(),
        }
    }

    fn nonzero_cells(&self) -> BTreeMap<u32, Cell> {
        match &self.store {
            Store::Dense(v) => {
                v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i as u32, *c)).collect()
            }
            Store::Sparse(m) => m.clone(),
        }
    }

    /// Peeling decoder over field values; `None` signals overflow.
    pub(crate) fn decode_field(&self) -> Option<Vec<(u64, u64)>> {
        let mut cells = self.nonzero_cells();
        let mut queue: Vec<u32> = cells.keys().rev().copied().collect();
        let mut recovered: BTreeMap<u64, u64> = BTreeMap::new();
        let mut peels = 0u64;
        let peel_cap = 4 * (self.s + 1) + 16;
        while let Some(slot) = queue.pop() {
            let Some(cell) = cells.get(&slot) else { continue };
            let Some((idx, val)) = cell.singleton(self.dim, self.z) else { continue };
            let row = slot as usize / self.width;
            if self.slot(row, idx) != slot {
                continue;
            }
            peels += 1;
            if peels > peel_cap {
                return None;
            }
            let zp = field::pow(self.z, idx);
            let neg = field::sub(0, val);
            for r in 0..SR_ROWS {
                let k = self.slot(r, idx);
                let c = cells.entry(k).or_default();
                c.apply(idx, neg, zp);
                if c.is_zero() {
                    cells.remove(&k);
                } else {
                    queue.push(k);
                }
            }
            let e = recovered.entry(idx).or_insert(0);
            *e = field::add(*e, val);
            if *e == 0 {
                recovered.remove(&idx);
            }
            if recovered.len() as u64 > self.s {
                return None;
            }
        }
        if !cells.is_empty() {
            return None;
        }
        Some(recovered.into_iter().collect())
    }

    pub fn decode(&self) -> SparseDecode {
        match self.decode_field() {
            Some(v) => SparseDecode::Exact(v.into_iter().map(|(i, x)| (i, field::to_i64(x))).collect()),
            None => SparseDecode::Overflow,
        }
    }

    pub fn from_words(words: &[u64], seed: SketchSeed) -> Result<Self> {
        let (dim, s, payload) = wire::split(words, SketchKind::SparseRecovery, seed.lineage)?;
        if s == 0 || dim == 0 {
            return Err(Error::Decode("zero budget or dimension".into()));
        }
        let mut sk = SparseRecoverySketch::new(dim, s, seed);
        if payload.len() != 3 * sk.table_cells() {
            return Err(Error::Decode("sparse-recovery payload length does not match its shape".into()));
        }
        for (i, w) in payload.chunks_exact(3).enumerate() {
            let c = Cell { count: w[0], isum: w[1], fp: w[2] };
            match &mut sk.store {
                Store::Dense(v) => v[i] = c,
                Store::Sparse(m) => {
                    if !c.is_zero() {
                        m.insert(i as u32, c);
                    }
                }
            }
        }
        Ok(sk)
    }

    fn combine(&mut self, other: &Self, negate: bool) -> Result<()> {
        if self.seed != other.seed || self.dim != other.dim || self.s != other.s {
            return Err(Error::IncompatibleSketch(format!(
                "sparse-recovery lineage/dim/s {:#x}/{}/{} vs {:#x}/{}/{}",
                self.seed.lineage, self.dim, self.s, other.seed.lineage, other.dim, other.s
            )));
        }
        for (slot, c) in other.nonzero_cells() {
            match &mut self.store {
                Store::Dense(v) => {
                    if negate {
                        v[slot as usize].sub_cell(&c)
                    } else {
                        v[slot as usize].add_cell(&c)
                    }
                }
                Store::Sparse(m) => {
                    let e = m.entry(slot).or_default();
                    if negate {
                        e.sub_cell(&c)
                    } else {
                        e.add_cell(&c)
                    }
                    if e.is_zero() {
                        m.remove(&slot);
                    }
                }
            }
        }
        Ok(())
    }
}

impl LinearSketch for SparseRecoverySketch {
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
        self.combine(other, false)
    }

    fn subtract(&mut self, other: &Self) -> Result<()> {
        self.combine(other, true)
    }

    fn words(&self) -> u64 {
        (wire::HEADER_WORDS + 3 * self.table_cells()) as u64
    }

    fn to_words(&self) -> Vec<u64> {
        let mut out = wire::header(SketchKind::SparseRecovery, self.dim, self.s, self.seed.lineage);
        out.reserve(3 * self.table_cells());
        match &self.store {
            Store::Dense(v) => {
                for c in v {
                    out.extend([c.count, c.isum, c.fp]);
                }
            }
            Store::Sparse(m) => {
                let mut it = m.iter().peekable();
                for i in 0..self.table_cells() as u32 {
                    match it.peek() {
                        Some((&k, c)) if k == i => {
                            out.extend([c.count, c.isum, c.fp]);
                            it.next();
                        }
                        _ => out.extend([0, 0, 0]),
                    }
                }
            }
        }
        out
    }
}
