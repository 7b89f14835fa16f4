use proptest::prelude::*;
use std::collections::{BTreeSet, VecDeque};
use streamspan::graph::{cut_weight, spanner_stretch};
use streamspan::instances::{gnp, to_stream};
use streamspan::multipass::{baswana_sen, pass_bound, stretch_bound, Scheme};
use streamspan::simcomm::{filtering_spanner, ldd, low_degree_peeling, peel_oracle, FilterParams};
use streamspan::spanner::build_subset_cover;
use streamspan::sparsify::{spectral_sparsify, verify_spectral, SparsifierParams, MAX_EPS};
use streamspan::{UnweightedGraph, VertexId, WeightedGraph};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn arb_graph(max_n: usize) -> impl Strategy<Value = UnweightedGraph> {
    (2..=max_n, 0.0..0.6f64, any::<u64>()).prop_map(|(n, p, seed)| gnp(n, p, seed))
}

fn bfs(g: &UnweightedGraph, s: VertexId) -> Vec<Option<u32>> {
    let mut d = vec![None; g.n()];
    d[s as usize] = Some(0);
    let mut q = VecDeque::from([s]);
    while let Some(x) = q.pop_front() {
        for &y in g.neighbors(x) {
            if d[y as usize].is_none() {
                d[y as usize] = Some(d[x as usize].unwrap() + 1);
                q.push_back(y);
            }
        }
    }
    d
}

/// Max over all connected pairs of `⌈d_h / d_g⌉`; `None` if `h` disconnects one.
fn all_pairs_stretch(g: &UnweightedGraph, h: &UnweightedGraph) -> Option<u32> {
    let mut worst = 1;
    for u in 0..g.n() as VertexId {
        let (dg, dh) = (bfs(g, u), bfs(h, u));
        for v in 0..g.n() {
            if let Some(a) = dg[v].filter(|&a| a > 0) {
                worst = worst.max(dh[v]?.div_ceil(a));
            }
        }
    }
    Some(worst)
}

/// `R_uv` by Gaussian elimination on the Laplacian grounded at `v`.
fn resistance(g: &WeightedGraph, u: VertexId, v: VertexId) -> f64 {
    let n = g.n();
    let mut a = vec![vec![0.0; n]; n];
    for ((x, y), w) in g.edges() {
        let (x, y) = (x as usize, y as usize);
        a[x][x] += w;
        a[y][y] += w;
        a[x][y] -= w;
        a[y][x] -= w;
    }
    let keep: Vec<usize> = (0..n).filter(|&i| i != v as usize).collect();
    let m = keep.len();
    let mut mat: Vec<Vec<f64>> = keep.iter().map(|&i| keep.iter().map(|&j| a[i][j]).collect()).collect();
    let mut b: Vec<f64> = keep.iter().map(|&i| if i == u as usize { 1.0 } else { 0.0 }).collect();
    for c in 0..m {
        let piv = (c..m).max_by(|&i, &j| mat[i][c].abs().total_cmp(&mat[j][c].abs())).unwrap();
        mat.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..m {
            let f = mat[r][c] / mat[c][c];
            for k in c..m {
                mat[r][k] -= f * mat[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; m];
    for c in (0..m).rev() {
        let s: f64 = (c + 1..m).map(|k| mat[c][k] * x[k]).sum();
        x[c] = (b[c] - s) / mat[c][c];
    }
    x[keep.iter().position(|&i| i == u as usize).unwrap()]
}

/// Smallest integer `c` with `2 c^g ≥ k + 1`.
fn radix(k: u32, g: u32) -> u128 {
    (1u128..).find(|c| 2 * c.pow(g) >= k as u128 + 1).unwrap()
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn streams_materialize_to_their_graph(g in arb_graph(40), ratio in 0.0..1.0f64, seed in any::<u64>()) {
        let src = to_stream(&g, ratio, seed).unwrap();
        prop_assert_eq!(src.materialize(), g);
    }

    #[test]
    fn edge_stretch_equals_all_pairs_stretch(g in arb_graph(30), keep in 0.3..1.0f64, seed in any::<u64>()) {
        let h = UnweightedGraph::from_edges(
            g.n(),
            g.edges().filter(|&(u, v)| streamspan::rng::derive(seed, (u as u64) << 32 | v as u64) as f64 / u64::MAX as f64 <= keep),
        ).unwrap();
        prop_assert_eq!(spanner_stretch(&g, &h).unwrap().max_stretch, all_pairs_stretch(&g, &h));
    }

    #[test]
    fn filtering_survivors_only_shrink(g in arb_graph(40), t in 1.0..6.0f64, rounds in 1u32..5, seed in any::<u64>()) {
        let params = FilterParams::new(t, rounds, seed).unwrap().with_oversample(0.002).unwrap();
        let out = filtering_spanner(&g, &params).unwrap();
        let mut sets: Vec<&BTreeSet<_>> = out.history.iter().map(|s| &s.surviving).collect();
        sets.push(&out.residual);
        prop_assert!(sets.windows(2).all(|w| w[1].is_subset(w[0])));
        prop_assert!(out.spanner.is_subgraph_of(&g));
        if out.emptied {
            let s = spanner_stretch(&g, &out.spanner).unwrap().max_stretch;
            prop_assert!(s.is_some_and(|s| s as f64 <= t));
        }
    }

    #[test]
    fn peeling_matches_the_oracle(g in arb_graph(40), s in 1u64..6, seed in any::<u64>()) {
        let out = low_degree_peeling(&g, s, seed).unwrap();
        prop_assert!(out.replicas_agree);
        prop_assert_eq!(&out.result, &peel_oracle(&g, s));
        prop_assert!(out.result.min_degree_v2(&g).map_or(true, |d| d as u64 > s));
    }

    #[test]
    fn ldd_certificate_holds(g in arb_graph(40), phi in 0.05..0.9f64, w in 1.0..4.0f64) {
        let h = WeightedGraph::from_edges(g.n(), g.edges().map(|(u, v)| (u, v, w))).unwrap();
        prop_assert!(ldd(&h, phi).unwrap().certify(&h).holds());
    }

    #[test]
    fn recursion_closed_forms(k in 2u32..200, g_pick in 0u32..8) {
        let max_g = (k as f64).log2().ceil() as u32;
        let g = 1 + g_pick % max_g;
        let c = radix(k, g);
        let bs = 2 * (2 * c - 1).pow(g) - 1;
        let kw = ((1u128 << c) - 1).checked_pow(g).map(|x| 2 * x - 1);
        prop_assert_eq!(stretch_bound(k as f64, g, Scheme::Bs).unwrap(), bs);
        if let Some(kw) = kw {
            prop_assert_eq!(stretch_bound(k as f64, g, Scheme::Kw).unwrap(), kw);
        }
        prop_assert_eq!(pass_bound(k as f64, g, Scheme::Bs).unwrap() as u128, g as u128 * (c - 1) + 1);
        prop_assert_eq!(pass_bound(k as f64, g, Scheme::Kw).unwrap(), g as u64 + 1);
    }

    #[test]
    fn subset_covers_reach_every_pair(n in 2usize..80, alpha in 0.0..0.9f64, seed in any::<u64>()) {
        let cover = build_subset_cover(n, alpha, seed).unwrap();
        let membership = cover.membership();
        for u in 0..n {
            for v in u + 1..n {
                let shared = membership[u].iter().any(|s| membership[v].binary_search(s).is_ok());
                prop_assert!(shared, "pair ({}, {}) uncovered", u, v);
            }
        }
    }
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn baswana_sen_is_a_deterministic_spanner(g in arb_graph(60), k in 2u32..5, seed in any::<u64>()) {
        let src = to_stream(&g, 0.3, seed).unwrap();
        let a = baswana_sen(&src, k, seed).unwrap();
        let b = baswana_sen(&src, k, seed).unwrap();
        prop_assert_eq!(a.report.canonical_json(), b.report.canonical_json());
        prop_assert_eq!(&a.spanner, &b.spanner);
        prop_assert!(a.spanner.is_subgraph_of(&g));
        prop_assert!(all_pairs_stretch(&g, &a.spanner).is_some_and(|s| s <= 2 * k - 1));
    }
}

#[test]
fn sparsifier_size_tracks_the_sampling_rate() {
    let params = SparsifierParams::with_seed(0);
    let (n, seeds) = (100, 50);
    let mut total = 0;
    for seed in 0..seeds {
        let g = gnp(n, 0.3, seed);
        total += spectral_sparsify::<f64>(&g, &SparsifierParams::with_seed(seed)).m();
    }
    let mean = total as f64 / seeds as f64;
    assert!(mean <= 2.0 * params.charged_words(n) as f64, "mean size {mean}");

    // Undersampled so that p_e < 1: the mean size matches Σ p_e from an
    // independent resistance solve.
    let g = gnp(60, 0.3, 7);
    let thin = SparsifierParams::with_seed(0).with_oversample(0.002).unwrap();
    let rate = thin.rate(g.n());
    let w: WeightedGraph = g.to_weighted();
    let probs: Vec<f64> = g.edges().map(|(u, v)| (rate * resistance(&w, u, v)).min(1.0)).collect();
    let expect: f64 = probs.iter().sum();
    let var: f64 = probs.iter().map(|p| p * (1.0 - p)).sum();
    let trials = 200;
    let got = (0..trials).map(|s| spectral_sparsify::<f64>(&g, &SparsifierParams { seed: s, ..thin }).m()).sum::<usize>() as f64 / trials as f64;
    let sigma = (var / trials as f64).sqrt();
    assert!((got - expect).abs() <= 4.0 * sigma, "mean {got} vs {expect} (sigma {sigma})");
}

#[test]
fn sparsifier_preserves_cuts_and_resistances() {
    let margin = 1.2 * MAX_EPS;
    for seed in 0..5 {
        let g = gnp(60, 0.3, seed);
        let w: WeightedGraph = g.to_weighted();
        let h = spectral_sparsify::<f64>(&g, &SparsifierParams::with_seed(seed));
        for cut in 0..40u64 {
            let side: Vec<VertexId> =
                (0..g.n() as VertexId).filter(|&v| streamspan::rng::derive(cut, v as u64) & 1 == 1).collect();
            let (a, b) = (cut_weight(&w, &side), cut_weight(&h, &side));
            assert!((b - a).abs() <= margin * a + 1e-9, "cut {cut}: {b} vs {a}");
        }
        for (u, v) in [(0, 1), (2, 40), (10, 59)] {
            let (a, b) = (resistance(&w, u, v), resistance(&h, u, v));
            assert!((b / a - 1.0).abs() <= margin, "R({u},{v}): {b} vs {a}");
        }
    }
}

#[test]
fn spectral_verification_passes_on_dense_random_graphs() {
    let passed = (0..20u64)
        .filter(|&seed| {
            let g = gnp(100, 0.3, seed);
            let h = spectral_sparsify::<f64>(&g, &SparsifierParams::with_seed(seed));
            verify_spectral(&g.to_weighted(), &h, MAX_EPS, 50, seed).unwrap().pass
        })
        .count();
    assert!(passed >= 18, "{passed}/20");
}
