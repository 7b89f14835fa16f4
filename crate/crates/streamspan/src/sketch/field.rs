//! Arithmetic modulo the Mersenne prime 2^61 - 1 and the hash families
//! built on it.

use crate::rng::{derive, mix64, rng};
use rand::Rng as _;

pub const P: u64 = (1u64 << 61) - 1;

#[inline]
pub fn reduce(x: u128) -> u64 {
    let lo = (x as u64) & P;
    let hi = (x >> 61) as u64;
    let s = lo + (hi & P) + ((x >> 122) as u64);
    let s = (s & P) + (s >> 61);
    if s >= P {
        s - P
    } else {
        s
    }
}

#[inline]
pub fn add(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= P {
        s - P
    } else {
        s
    }
}

#[inline]
pub fn sub(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + P - b
    }
}

#[inline]
pub fn mul(a: u64, b: u64) -> u64 {
    reduce(a as u128 * b as u128)
}

pub fn pow(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul(acc, base);
        }
        base = mul(base, base);
        exp >>= 1;
    }
    acc
}

pub fn inv(a: u64) -> u64 {
    pow(a, P - 2)
}

/// Field image of a signed integer.
#[inline]
pub fn from_i64(v: i64) -> u64 {
    if v >= 0 {
        (v as u64) % P
    } else {
        sub(0, v.unsigned_abs() % P)
    }
}

/// Signed representative in `(-P/2, P/2]`.
#[inline]
pub fn to_i64(x: u64) -> i64 {
    if x > P / 2 {
        -((P - x) as i64)
    } else {
        x as i64
    }
}

/// Pairwise-independent hash `x -> (a x + b) mod P`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairwiseHash {
    a: u64,
    b: u64,
}

impl PairwiseHash {
    pub fn from_seed(seed: u64) -> Self {
        let mut r = rng(seed);
        PairwiseHash { a: r.gen_range(1..P), b: r.gen_range(0..P) }
    }

    #[inline]
    pub fn hash(&self, x: u64) -> u64 {
        add(mul(self.a, x % P), self.b)
    }
}

/// Random evaluation point for polynomial fingerprints `sum_i v_i z^i`.
pub fn fingerprint_base(seed: u64) -> u64 {
    let mut r = rng(derive(seed, 0xf1f1));
    r.gen_range(2..P)
}

/// Nested subsampling: a hash value survives level `l` iff it lies below
/// `P >> l`, so each level keeps about half of the previous one.
#[inline]
pub fn survives(h: u64, level: usize) -> bool {
    level == 0 || h < (P >> level)
}

/// Deterministic lineage id for a seed.
pub fn lineage_of(seed: u64) -> u64 {
    mix64(seed ^ 0x6c69_6e65_6167_65)
}

/// One `(count, index-sum, fingerprint)` cell over the field.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Cell {
    pub count: u64,
    pub isum: u64,
    pub fp: u64,
}

impl Cell {
    #[inline]
    pub fn is_zero(&self) -> bool {
        self.count == 0 && self.isum == 0 && self.fp == 0
    }

    /// Adds `d * e_idx`, given `zpow = z^idx`.
    #[inline]
    pub fn apply(&mut self, idx: u64, d: u64, zpow: u64) {
        self.count = add(self.count, d);
        self.isum = add(self.isum, mul(d, idx % P));
        self.fp = add(self.fp, mul(d, zpow));
    }

    #[inline]
    pub fn add_cell(&mut self, o: &Cell) {
        self.count = add(self.count, o.count);
        self.isum = add(self.isum, o.isum);
        self.fp = add(self.fp, o.fp);
    }

    #[inline]
    pub fn sub_cell(&mut self, o: &Cell) {
        self.count = sub(self.count, o.count);
        self.isum = sub(self.isum, o.isum);
        self.fp = sub(self.fp, o.fp);
    }

    /// If the cell holds exactly one nonzero coordinate, returns
    /// `(index, field value)`. A multi-entry cell passes the fingerprint
    /// test with probability at most `dim / P`.
    pub fn singleton(&self, dim: u64, z: u64) -> Option<(u64, u64)> {
        if self.count == 0 {
            return None;
        }
        let idx = mul(self.isum, inv(self.count));
        if idx >= dim {
            return None;
        }
        if mul(self.count, pow(z, idx)) != self.fp {
            return None;
        }
        Some((idx, self.count))
    }
}
