//! Run reports and the frozen regression bounds used as declared bounds for
//! algorithms whose guarantees carry unspecified polylog factors.

use crate::error::{Error, Result};
use crate::graph::{spanner_stretch, Edge, UnweightedGraph};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::OnceLock;

/// Parameters echoed in a report; absent ones are omitted from the JSON.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub g: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub s: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scheme: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub regime: Option<String>,
    pub seed: u64,
}

/// How a resource figure was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metering {
    /// Serialized sketch sizes, counted exactly.
    Metered,
    /// A black-box component charged its stated budget.
    Charged,
    /// Metered sketches plus charged black boxes.
    Mixed,
}

/// Metered outcome of one algorithm run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algo: String,
    pub params: RunParams,
    pub n: usize,
    pub m: usize,
    pub passes: u64,
    pub rounds: u64,
    pub spanner_edges: usize,
    pub max_stretch: Option<u32>,
    pub witness_edge: Option<Edge>,
    pub declared_bound: Option<f64>,
    pub peak_words: u64,
    pub max_bits_per_player_per_round: u64,
    pub total_bits: u64,
    pub metering: Metering,
    pub attempts: u32,
    pub wall_ms: u64,
    pub verified: bool,
    #[serde(default)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl RunReport {
    pub fn new(algo: &str, params: RunParams, g: &UnweightedGraph) -> Self {
        RunReport {
            algo: algo.to_string(),
            params,
            n: g.n(),
            m: g.m(),
            passes: 0,
            rounds: 0,
            spanner_edges: 0,
            max_stretch: None,
            witness_edge: None,
            declared_bound: None,
            peak_words: 0,
            max_bits_per_player_per_round: 0,
            total_bits: 0,
            metering: Metering::Metered,
            attempts: 1,
            wall_ms: 0,
            verified: false,
            extra: BTreeMap::new(),
        }
    }

    pub fn note<V: Serialize>(&mut self, key: &str, value: V) {
        self.extra.insert(key.to_string(), serde_json::to_value(value).expect("serializable"));
    }

    /// Runs the stretch oracle of `h` against `g` and sets `verified` iff the
    /// stretch is finite and within `declared_bound`.
    pub fn certify(&mut self, g: &UnweightedGraph, h: &UnweightedGraph, declared_bound: Option<f64>) -> Result<()> {
        let rep = spanner_stretch(g, h)?;
        self.spanner_edges = h.m();
        self.max_stretch = rep.max_stretch;
        self.witness_edge = rep.witness_edge;
        self.declared_bound = declared_bound;
        self.verified = match (rep.max_stretch, declared_bound) {
            (Some(s), Some(b)) => s as f64 <= b + 1e-9,
            _ => false,
        };
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Decode(format!("run report: {e}")))
    }

    /// JSON with `wall_ms` zeroed, for reproducibility comparisons.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.wall_ms = 0;
        c.to_json()
    }
}

/// Growth shapes multiplied by a frozen constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundForm {
    /// `n^{2/3} log2² n`
    N23Log2,
    /// `√m log2 n`
    SqrtMLog,
    /// `(n^{1-α})^{2/3} log2² n`
    ScaledN23Log2,
    /// `√m n^{-α} log2² n`
    SqrtMNAlphaLog2,
    /// `n^{1+α} log2² n`
    N1AlphaLog2,
    /// `ε⁻² n log2 n`
    EpsNLog,
    /// `n^{1+1/k} log2³ n`
    N1KLog3,
    /// `n^α log2² n`
    NAlphaLog2,
    /// `s log2² n`
    SLog2,
    /// `s³ / (n² log2² n)`
    S3OverN2Log2,
    /// `s² / (m log2 n)`
    S2OverMLog,
    /// `n^{(g+1)/(2g+1)} log2² n`
    FilterT,
}

/// Arguments for evaluating a [`BoundForm`].
#[derive(Clone, Copy, Debug, Default)]
pub struct Shape {
    pub n: f64,
    pub m: f64,
    pub alpha: f64,
    pub eps: f64,
    pub k: f64,
    pub s: f64,
    pub g: f64,
}

impl BoundForm {
    pub fn eval(self, x: &Shape) -> f64 {
        let lg = x.n.max(2.0).log2();
        match self {
            BoundForm::N23Log2 => x.n.powf(2.0 / 3.0) * lg * lg,
            BoundForm::SqrtMLog => x.m.sqrt() * lg,
            BoundForm::ScaledN23Log2 => x.n.powf(1.0 - x.alpha).powf(2.0 / 3.0) * lg * lg,
            BoundForm::SqrtMNAlphaLog2 => x.m.sqrt() * x.n.powf(-x.alpha) * lg * lg,
            BoundForm::N1AlphaLog2 => x.n.powf(1.0 + x.alpha) * lg * lg,
            BoundForm::EpsNLog => x.n * lg / (x.eps * x.eps),
            BoundForm::N1KLog3 => x.n.powf(1.0 + 1.0 / x.k) * lg * lg * lg,
            BoundForm::NAlphaLog2 => x.n.powf(x.alpha) * lg * lg,
            BoundForm::SLog2 => x.s * lg * lg,
            BoundForm::S3OverN2Log2 => x.s.powi(3) / (x.n * x.n * lg * lg),
            BoundForm::S2OverMLog => x.s * x.s / (x.m * lg),
            BoundForm::FilterT => x.n.powf((x.g + 1.0) / (2.0 * x.g + 1.0)) * lg * lg,
        }
    }
}

/// One frozen constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionEntry {
    pub family: String,
    pub algo: String,
    pub metric: String,
    pub form: BoundForm,
    pub constant: f64,
    /// Upper bound (`C · form`) or lower bound (`c · form`).
    pub kind: BoundKind,
    pub provenance: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Upper,
    Lower,
}

impl RegressionEntry {
    pub fn bound(&self, x: &Shape) -> f64 {
        self.constant * self.form.eval(x)
    }

    pub fn holds(&self, measured: f64, x: &Shape) -> bool {
        match self.kind {
            BoundKind::Upper => measured <= self.bound(x) * (1.0 + 1e-12),
            BoundKind::Lower => measured >= self.bound(x) * (1.0 - 1e-12),
        }
    }
}

/// `(family, algo, metric)` → frozen constant.
#[derive(Clone, Debug, Default)]
pub struct RegressionStore {
    entries: BTreeMap<(String, String, String), RegressionEntry>,
}

#[derive(Deserialize)]
struct StoreFile {
    entries: Vec<RegressionEntry>,
}

static BUILTIN: &str = include_str!("regression.json");

impl RegressionStore {
    pub fn parse(text: &str) -> Result<Self> {
        let file: StoreFile = serde_json::from_str(text).map_err(|e| Error::Decode(format!("regression store: {e}")))?;
        let mut entries = BTreeMap::new();
        for e in file.entries {
            let key = (e.family.clone(), e.algo.clone(), e.metric.clone());
            if entries.insert(key, e).is_some() {
                return Err(Error::Decode("duplicate regression entry".into()));
            }
        }
        Ok(RegressionStore { entries })
    }

    /// The store shipped with the crate.
    pub fn builtin() -> &'static RegressionStore {
        static STORE: OnceLock<RegressionStore> = OnceLock::new();
        STORE.get_or_init(|| RegressionStore::parse(BUILTIN).expect("builtin regression store parses"))
    }

    /// Exact lookup, falling back to the `any` family.
    pub fn get(&self, family: &str, algo: &str, metric: &str) -> Option<&RegressionEntry> {
        self.entries
            .get(&(family.into(), algo.into(), metric.into()))
            .or_else(|| self.entries.get(&("any".into(), algo.into(), metric.into())))
    }

    /// Lookup that panics on a missing key; for callers with fixed keys.
    pub fn expect(&self, family: &str, algo: &str, metric: &str) -> &RegressionEntry {
        self.get(family, algo, metric)
            .unwrap_or_else(|| panic!("no regression entry for {family}/{algo}/{metric}"))
    }

    pub fn entries(&self) -> impl Iterator<Item = &RegressionEntry> {
        self.entries.values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_store_parses_and_has_stretch_entries() {
        let s = RegressionStore::builtin();
        for algo in ["sparsifier", "tradeoff", "sparse_tradeoff"] {
            assert!(s.get("any", algo, "stretch").is_some(), "{algo}");
        }
    }

    #[test]
    fn report_roundtrips_through_json() {
        let g = UnweightedGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let mut r = RunReport::new("bs", RunParams { k: Some(2.0), seed: 9, ..Default::default() }, &g);
        r.certify(&g, &g, Some(3.0)).unwrap();
        r.note("clusters", 2);
        let back = RunReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(back.verified);
    }
}
