//! Spectral sparsification by effective-resistance sampling, with
//! quadratic-form and exact verification.

use crate::error::{Error, Result};
use crate::graph::linalg::DenseMatrix;
use crate::graph::{laplacian_quadratic_form, ResistanceOracle, UnweightedGraph, WeightedGraph};
use crate::rng::rng;
use crate::scalar::Scalar;
use rand::Rng;
use serde::Serialize;

/// Largest admissible accuracy parameter.
pub const MAX_EPS: f64 = 1.0 / 18.0;

/// Default oversampling constant.
pub const DEFAULT_OVERSAMPLE: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SparsifierParams {
    pub eps: f64,
    /// Oversampling constant `C` in `p_e = min(C ε⁻² R_e log n, 1)`.
    pub oversample: f64,
    pub seed: u64,
}

impl Default for SparsifierParams {
    fn default() -> Self {
        SparsifierParams { eps: MAX_EPS, oversample: DEFAULT_OVERSAMPLE, seed: 0 }
    }
}

impl SparsifierParams {
    pub fn new(eps: f64, seed: u64) -> Result<Self> {
        if !(eps > 0.0 && eps <= MAX_EPS + 1e-15) {
            return Err(Error::Parameter(format!("eps must lie in (0, 1/18], got {eps}")));
        }
        Ok(SparsifierParams { eps, seed, ..Default::default() })
    }

    pub fn with_seed(seed: u64) -> Self {
        SparsifierParams { seed, ..Default::default() }
    }

    pub fn with_oversample(mut self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Parameter(format!("oversampling constant must be positive, got {c}")));
        }
        self.oversample = c;
        Ok(self)
    }

    /// `C ε⁻² log2 n`, the factor multiplying `R_e`.
    pub fn rate(&self, n: usize) -> f64 {
        self.oversample / (self.eps * self.eps) * (n.max(1) as f64).log2()
    }

    /// Words charged for running the sparsifier inside a stream:
    /// `⌈C ε⁻² n log2 n⌉`.
    pub fn charged_words(&self, n: usize) -> u64 {
        (self.rate(n) * n as f64).ceil() as u64
    }
}

/// Sampling probabilities `p_e` for every edge of `g`, in canonical order.
///
/// `R_uv ≥ 1 / min(deg u, deg v)` on unit-weight graphs, so edges whose
/// degree bound already forces `p_e = 1` skip the linear solve; the oracle
/// is only built when some edge needs it.
pub fn sampling_probabilities<T: Scalar>(g: &UnweightedGraph, params: &SparsifierParams) -> Vec<f64> {
    let rate = params.rate(g.n());
    let forced = |u, v| rate / (g.degree(u).min(g.degree(v)) as f64) >= 1.0;
    let oracle = if g.edges().all(|(u, v)| forced(u, v)) {
        None
    } else {
        Some(ResistanceOracle::<T>::new(&g.to_weighted::<T>()))
    };
    g.edges()
        .map(|(u, v)| {
            if forced(u, v) {
                return 1.0;
            }
            let r = oracle.as_ref().expect("built when needed").resistance(u, v).to_f64().unwrap_or(1.0);
            (rate * r).min(1.0)
        })
        .collect()
}

/// Keeps each edge independently with probability `p_e` and weight `1/p_e`.
pub fn spectral_sparsify<T: Scalar>(g: &UnweightedGraph, params: &SparsifierParams) -> WeightedGraph<T> {
    let probs = sampling_probabilities::<T>(g, params);
    let mut r = rng(params.seed);
    let kept: Vec<_> = g
        .edges()
        .zip(probs)
        .filter_map(|((u, v), p)| {
            let draw: f64 = r.gen();
            (draw < p).then(|| (u, v, T::lit(1.0 / p)))
        })
        .collect();
    WeightedGraph::from_edges(g.n(), kept).expect("subset of a valid graph with weights >= 1")
}

/// Same edge set with unit weights.
pub fn unweight<T: Scalar>(h: &WeightedGraph<T>) -> UnweightedGraph {
    h.unweighted()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralReport {
    pub pass: bool,
    /// `xᵀL_h x / xᵀL_g x` extremes over the tested vectors.
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// The extreme ratio farthest from 1.
    pub worst_ratio: f64,
    pub margin: f64,
}

impl SpectralReport {
    fn from_extremes(min_ratio: f64, max_ratio: f64, margin: f64) -> Self {
        let worst_ratio = if (1.0 - min_ratio) > (max_ratio - 1.0) { min_ratio } else { max_ratio };
        let pass = min_ratio >= 1.0 - margin && max_ratio <= 1.0 + margin;
        SpectralReport { pass, min_ratio, max_ratio, worst_ratio, margin }
    }
}

/// Slack applied to `eps` by the verifiers.
pub const VERIFY_SLACK: f64 = 1.2;

/// Quadratic-form check over `trials` random vectors plus `b_uv` for every
/// edge of `g`; the margin is `1.2 eps`.
pub fn verify_spectral<T: Scalar>(
    g: &WeightedGraph<T>,
    h: &WeightedGraph<T>,
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<SpectralReport> {
    if g.n() != h.n() {
        return Err(Error::SizeMismatch(g.n(), h.n()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut note = |qh: f64, qg: f64| {
        if qg > 1e-12 {
            let ratio = qh / qg;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        } else if qh > 1e-12 {
            lo = lo.min(f64::INFINITY);
            hi = f64::INFINITY;
        }
    };
    for ((u, v), wg) in g.edges() {
        let qg = (g.weighted_degree(u) + g.weighted_degree(v) + wg + wg).to_f64().unwrap();
        let wh = h.weight(u, v).unwrap_or(T::zero());
        let qh = (h.weighted_degree(u) + h.weighted_degree(v) + wh + wh).to_f64().unwrap();
        note(qh, qg);
    }
    let mut r = rng(seed);
    for _ in 0..trials {
        let x: Vec<T> = (0..g.n()).map(|_| T::lit(r.gen_range(-1.0..1.0))).collect();
        let qg = laplacian_quadratic_form(g, &x).to_f64().unwrap();
        let qh = laplacian_quadratic_form(h, &x).to_f64().unwrap();
        note(qh, qg);
    }
    if lo > hi {
        lo = 1.0;
        hi = 1.0;
    }
    Ok(SpectralReport::from_extremes(lo, hi, VERIFY_SLACK * eps))
}

/// Largest `n` accepted by [`verify_spectral_exact`].
pub const EXACT_VERIFY_LIMIT: usize = 300;

/// Exact check through the spectrum of `L_g^{+/2} L_h L_g^{+/2}` on the
/// range of `L_g`. Edges of `h` outside `g`'s components give an infinite
/// ratio.
pub fn verify_spectral_exact<T: Scalar>(g: &WeightedGraph<T>, h: &WeightedGraph<T>, eps: f64) -> Result<SpectralReport> {
    let n = g.n();
    if n != h.n() {
        return Err(Error::SizeMismatch(n, h.n()));
    }
    if n > EXACT_VERIFY_LIMIT {
        return Err(Error::Parameter(format!("exact verification is limited to n <= {EXACT_VERIFY_LIMIT}")));
    }
    let (_, comp) = g.unweighted().components();
    if h.edges().any(|((u, v), _)| comp[u as usize] != comp[v as usize]) {
        return Ok(SpectralReport::from_extremes(1.0, f64::INFINITY, VERIFY_SLACK * eps));
    }
    let lap = |w: &WeightedGraph<T>| {
        let mut m = DenseMatrix::<f64>::zeros(n);
        for ((u, v), x) in w.edges() {
            let x = x.to_f64().unwrap();
            let (u, v) = (u as usize, v as usize);
            *m.at_mut(u, u) += x;
            *m.at_mut(v, v) += x;
            *m.at_mut(u, v) -= x;
            *m.at_mut(v, u) -= x;
        }
        m
    };
    let (lg, lh) = (lap(g), lap(h));
    let (vals, vecs) = lg.symmetric_eigen(true);
    let vecs = vecs.expect("requested eigenvectors");
    let scale = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1.0);
    let range: Vec<usize> = (0..n).filter(|&i| vals[i] > 1e-9 * scale).collect();
    if range.is_empty() {
        let pass_val = if h.m() == 0 { 1.0 } else { f64::INFINITY };
        return Ok(SpectralReport::from_extremes(1.0, pass_val, VERIFY_SLACK * eps));
    }
    // Columns q_j = v_j / sqrt(λ_j); M = Qᵀ L_h Q.
    let q: Vec<Vec<f64>> =
        range.iter().map(|&j| (0..n).map(|i| vecs.at(i, j) / vals[j].sqrt()).collect()).collect();
    let lq: Vec<Vec<f64>> = q
        .iter()
        .map(|col| (0..n).map(|i| (0..n).map(|k| lh.at(i, k) * col[k]).sum()).collect())
        .collect();
    let r = range.len();
    let mut m = DenseMatrix::<f64>::zeros(r);
    for a in 0..r {
        for b in a..r {
            let x: f64 = q[a].iter().zip(&lq[b]).map(|(p, s)| p * s).sum();
            *m.at_mut(a, b) = x;
            *m.at_mut(b, a) = x;
        }
    }
    let ev = m.symmetric_eigenvalues();
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SpectralReport::from_extremes(lo, hi, VERIFY_SLACK * eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{complete, path};

    #[test]
    fn tree_is_kept_with_unit_weights() {
        let g = path(30);
        let h: WeightedGraph<f64> = spectral_sparsify(&g, &SparsifierParams::with_seed(3));
        assert_eq!(h.unweighted(), g);
        assert!(h.edges().all(|(_, w)| w == 1.0));
    }

    #[test]
    fn eps_range_is_enforced() {
        assert!(SparsifierParams::new(0.1, 0).is_err());
        assert!(SparsifierParams::new(0.0, 0).is_err());
        assert!(SparsifierParams::new(MAX_EPS, 0).is_ok());
    }

    #[test]
    fn doubled_weights_fail_both_verifiers() {
        let g = complete(12).to_weighted::<f64>();
        let h = g.scaled(2.0);
        let q = verify_spectral(&g, &h, 0.1, 20, 1).unwrap();
        assert!(!q.pass);
        assert!((q.worst_ratio - 2.0).abs() < 1e-9);
        let e = verify_spectral_exact(&g, &h, 0.1).unwrap();
        assert!(!e.pass);
        assert!((e.max_ratio - 2.0).abs() < 1e-8 && (e.min_ratio - 2.0).abs() < 1e-8);
    }

    #[test]
    fn identity_has_ratio_one() {
        let g = complete(10).to_weighted::<f64>();
        let q = verify_spectral(&g, &g, MAX_EPS, 10, 2).unwrap();
        assert!(q.pass && q.worst_ratio == 1.0);
        let e = verify_spectral_exact(&g, &g, MAX_EPS).unwrap();
        assert!((e.min_ratio - 1.0).abs() < 1e-8 && (e.max_ratio - 1.0).abs() < 1e-8);
    }

    #[test]
    fn charged_words_formula() {
        let p = SparsifierParams::default();
        assert_eq!(p.charged_words(1024), (4.0 * 324.0 * 10.0 * 1024.0f64).ceil() as u64);
    }
}
