//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned
//! below. Runs under a custom harness so the lines are always printed.
//!
//! Criteria in [`EXPECTED_FAIL`] are known to be unattainable at this scale;
//! the target fails if one of them starts passing (so the list gets pruned)
//! or if any other criterion fails.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::time::{Duration, Instant};
use streamspan::graph::{bfs_distances, effective_resistance, layer_cut_check, spanner_stretch};
use streamspan::instances::{
    complete, conjectured_hard, cycle, gnp, layered_custom, layered_instance, star, to_stream,
};
use streamspan::multipass::{
    baswana_sen, bs_clustering, cluster_diameter, kapralov_woodruff, kw_clustering, pass_bound, recursive_spanner,
    stretch_bound, Scheme,
};
use streamspan::report::{RegressionStore, RunReport, Shape};
use streamspan::simcomm::{
    filtering_spanner, low_degree_peeling, peel_oracle, scm_tradeoff, FilterOutput, FilterParams, Regime,
};
use streamspan::sketch::{L0Outcome, L0Sketch, LinearSketch, SketchSeed, SparseDecode, SparseRecoverySketch};
use streamspan::spanner::{sparse_tradeoff_spanner, sparsifier_spanner, tradeoff_spanner};
use streamspan::sparsify::{spectral_sparsify, unweight, SparsifierParams, MAX_EPS};
use streamspan::stream::StreamSource;
use streamspan::UnweightedGraph;

/// Criteria that report FAIL by design; see the README.
const EXPECTED_FAIL: &[u32] = &[5];

const SKETCH_SEQUENCES: usize = 10_000;
const SKETCH_MAX_DIM: u64 = 10_000;
const SKETCH_TIME_LIMIT: Duration = Duration::from_secs(60);
const SR_TRIALS: usize = 1_000;
const SR_MIN_SUCCESS: f64 = 0.999;
const L0_TRIALS: usize = 100_000;
const STRETCH_SWEEP: [usize; 3] = [200, 500, 1000];
const GROWTH_TOLERANCE: f64 = 0.5;
const SPARSIFIER_TIME_LIMIT: Duration = Duration::from_secs(300);
const LAYERED_RESISTANCE: f64 = 12.0 / 28.0;
const RESISTANCE_TOL: f64 = 1e-9;
const TIGHTNESS_SEEDS: u64 = 50;
const TIGHTNESS_MIN_EXCLUDED: f64 = 0.8;
const LAYER_CUT_SEEDS: u64 = 20;
const LAYER_CUT_MIN_CLEAN: usize = 18;
const MATRIX_SEEDS: u64 = 20;
const MATRIX_TIME_LIMIT: Duration = Duration::from_secs(600);
const CLUSTER_SEEDS: u64 = 200;
const CLUSTER_SIGMAS: f64 = 3.0;
const FILTER_SEEDS: u64 = 20;
const LDD_MIN_SHRINKING: f64 = 0.9;
const EMPTY_MIN_SEEDS: usize = 18;
/// Seeds for the regression-bounded checks; disjoint from calibration.
const CHECK_SEEDS: std::ops::Range<u64> = 1..6;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

fn regression(algo: &str, metric: &str) -> &'static streamspan::report::RegressionEntry {
    RegressionStore::builtin().expect("regression", algo, metric)
}

fn shape(g: &UnweightedGraph) -> Shape {
    Shape { n: g.n() as f64, m: g.m() as f64, eps: MAX_EPS, ..Default::default() }
}

fn random_updates(r: &mut ChaCha8Rng, dim: u64, len: usize) -> Vec<(u64, i64)> {
    (0..len)
        .map(|_| {
            let v = r.gen_range(1..=5i64);
            (r.gen_range(0..dim), if r.gen() { v } else { -v })
        })
        .collect()
}

fn apply<S: LinearSketch>(sk: &mut S, updates: &[(u64, i64)]) {
    for &(i, d) in updates {
        sk.update(i, d).unwrap();
    }
}

/// Net vector of an update list, zeros dropped.
fn net(updates: &[(u64, i64)]) -> BTreeMap<u64, i64> {
    let mut v = BTreeMap::new();
    for &(i, d) in updates {
        *v.entry(i).or_insert(0) += d;
    }
    v.retain(|_, x| *x != 0);
    v
}

fn linearity_violations<S: LinearSketch>(fresh: impl Fn() -> S, x: &[(u64, i64)], y: &[(u64, i64)]) -> usize {
    let mut bad = 0;
    let (mut sx, mut sy, mut sxy) = (fresh(), fresh(), fresh());
    apply(&mut sx, x);
    apply(&mut sy, y);
    let sum: Vec<(u64, i64)> = net(&[x, y].concat()).into_iter().collect();
    apply(&mut sxy, &sum);
    let mut merged = sx.clone();
    merged.merge(&sy).unwrap();
    bad += (merged.to_words() != sxy.to_words()) as usize;
    let mut diff = sxy.clone();
    diff.subtract(&sy).unwrap();
    bad += (diff.to_words() != sx.to_words()) as usize;
    let mut cancel = sx.clone();
    let reversed: Vec<(u64, i64)> = x.iter().rev().map(|&(i, d)| (i, -d)).collect();
    apply(&mut cancel, &reversed);
    bad += (cancel.to_words() != fresh().to_words()) as usize;
    bad
}

fn c1_sketch_algebra() -> Outcome {
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(0xa1);
    let mut violations = 0;
    for trial in 0..SKETCH_SEQUENCES {
        let dim = r.gen_range(1..=SKETCH_MAX_DIM);
        let seed = SketchSeed::new(r.gen());
        let (lx, ly) = (r.gen_range(0..24), r.gen_range(0..24));
        let x = random_updates(&mut r, dim, lx);
        let y = random_updates(&mut r, dim, ly);
        violations += if trial % 2 == 0 {
            linearity_violations(|| L0Sketch::new(dim, seed), &x, &y)
        } else {
            let s = r.gen_range(1..=16);
            linearity_violations(|| SparseRecoverySketch::new(dim, s, seed), &x, &y)
        };
    }
    let elapsed = start.elapsed();
    Outcome::new(
        violations == 0 && elapsed < SKETCH_TIME_LIMIT,
        format!("{SKETCH_SEQUENCES} sequences, {violations} violations, {:.1}s", elapsed.as_secs_f64()),
    )
}

fn c2_recovery() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(0xa2);
    let (mut exact, mut overflow, mut wrong) = (0usize, 0usize, 0usize);
    for _ in 0..SR_TRIALS {
        let dim = r.gen_range(1_000..=1_000_000u64);
        let s = r.gen_range(1..=32u64);
        let mut sk = SparseRecoverySketch::new(dim, s, SketchSeed::new(r.gen()));
        let support = r.gen_range(0..=s) as usize;
        let mut truth = BTreeMap::new();
        while truth.len() < support {
            let v = r.gen_range(1..=1000i64);
            truth.insert(r.gen_range(0..dim), if r.gen() { v } else { -v });
        }
        // Transient mass that cancels before decoding.
        let noise = random_updates(&mut r, dim, 3 * s as usize);
        apply(&mut sk, &noise);
        for (&i, &v) in &truth {
            sk.update(i, v).unwrap();
        }
        let undo: Vec<(u64, i64)> = noise.iter().map(|&(i, d)| (i, -d)).collect();
        apply(&mut sk, &undo);
        match sk.decode() {
            SparseDecode::Exact(got) if got == truth.iter().map(|(&i, &v)| (i, v)).collect::<Vec<_>>() => exact += 1,
            SparseDecode::Exact(_) => wrong += 1,
            SparseDecode::Overflow => overflow += 1,
        }
    }
    let (mut samples, mut fails, mut zero_coords) = (0usize, 0usize, 0usize);
    for _ in 0..L0_TRIALS {
        let dim = r.gen_range(1..=SKETCH_MAX_DIM);
        let mut sk = L0Sketch::new(dim, SketchSeed::new(r.gen()));
        let len = r.gen_range(1..=40);
        let updates = random_updates(&mut r, dim, len);
        apply(&mut sk, &updates);
        let truth = net(&updates);
        match sk.sample() {
            L0Outcome::Sample { index, value } => {
                samples += 1;
                if truth.get(&index) != Some(&value) {
                    zero_coords += 1;
                }
            }
            L0Outcome::Empty => zero_coords += (!truth.is_empty()) as usize,
            L0Outcome::Fail => fails += 1,
        }
    }
    let rate = exact as f64 / SR_TRIALS as f64;
    Outcome::new(
        rate >= SR_MIN_SUCCESS && wrong == 0 && zero_coords == 0,
        format!(
            "sparse recovery exact {exact}/{SR_TRIALS} (overflow {overflow}, wrong {wrong}); \
             l0 {samples} samples, {fails} FAIL, {zero_coords} bad coordinates"
        ),
    )
}

fn sparsifier_stretch(g: &UnweightedGraph, seed: u64) -> u32 {
    let out = sparsifier_spanner(&StreamSource::from_graph(g), &SparsifierParams::with_seed(seed)).unwrap();
    out.report.max_stretch.expect("the sparsifier keeps components connected")
}

fn c3_sparsifier_stretch() -> Outcome {
    let start = Instant::now();
    let entry = regression("sparsifier", "stretch");
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, p) in [("gnp(n,8/n)", None), ("gnp(n,0.2)", Some(0.2))] {
        let mut normalized = Vec::new();
        for n in STRETCH_SWEEP {
            let p = p.unwrap_or(8.0 / n as f64);
            let mut worst = 0;
            for seed in CHECK_SEEDS.take(2) {
                let g = gnp(n, p, seed);
                let s = sparsifier_stretch(&g, seed);
                ok &= entry.holds(s as f64, &shape(&g));
                worst = worst.max(s);
            }
            normalized.push(worst as f64 / (n as f64).powf(2.0 / 3.0));
            parts.push(format!("{name} n={n} stretch {worst}"));
        }
        let growth = normalized.iter().map(|x| x / normalized[0] - 1.0).fold(f64::NEG_INFINITY, f64::max);
        ok &= growth <= GROWTH_TOLERANCE;
        parts.push(format!("{name} normalized growth {:+.0}%", 100.0 * growth));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < SPARSIFIER_TIME_LIMIT;
    Outcome::new(ok, format!("{}; {:.1}s", parts.join(", "), elapsed.as_secs_f64()))
}

fn c4_sqrt_m() -> Outcome {
    let entry = regression("sparsifier", "stretch_sqrt_m");
    let mut ok = true;
    let mut parts = Vec::new();
    for n in STRETCH_SWEEP {
        for seed in CHECK_SEEDS.take(2) {
            for (name, g) in [("gnp", gnp(n, 8.0 / n as f64, seed)), ("hard", conjectured_hard(n, 4, seed).unwrap().graph)] {
                let s = sparsifier_stretch(&g, seed);
                let holds = entry.holds(s as f64, &shape(&g));
                ok &= holds;
                if !holds || seed == CHECK_SEEDS.start {
                    parts.push(format!("{name} n={n} m={} stretch {s} bound {:.2}", g.m(), entry.bound(&shape(&g))));
                }
            }
        }
    }
    Outcome::new(ok, parts.join(", "))
}

fn c5_tightness() -> Outcome {
    let small = layered_custom(4, 5).unwrap();
    let r = effective_resistance(&small.graph.to_weighted::<f64>(), small.u, small.v).unwrap();
    let numeric_ok = (r - LAYERED_RESISTANCE).abs() < RESISTANCE_TOL
        && (small.resistance_closed_form() - LAYERED_RESISTANCE).abs() < RESISTANCE_TOL;
    assert!(numeric_ok, "layered resistance {r} disagrees with 12/28");

    let inst = layered_instance(1000).unwrap();
    let (u, v) = inst.e();
    let mut excluded = 0;
    let mut distance_ok = true;
    for seed in 0..TIGHTNESS_SEEDS {
        let h = unweight(&spectral_sparsify::<f64>(&inst.graph, &SparsifierParams::with_seed(seed)));
        if !h.has_edge(u, v) {
            excluded += 1;
            distance_ok &= bfs_distances(&h, u).unwrap().get(v) == Some(inst.layers as u32 + 1);
        }
    }
    let frac = excluded as f64 / TIGHTNESS_SEEDS as f64;
    Outcome::new(
        numeric_ok && frac >= TIGHTNESS_MIN_EXCLUDED && distance_ok,
        format!(
            "R = {r:.12} (closed form {:.12}); a = {}, N = {}: e excluded on {excluded}/{TIGHTNESS_SEEDS} seeds, \
             distance N+1 on every exclusion: {distance_ok}",
            small.resistance_closed_form(),
            inst.a,
            inst.layers
        ),
    )
}

/// Not a criterion: the same instance with the sampling constant lowered so
/// that `p_e < 1`, showing the exclusion mechanism itself.
fn c5_undersampled_diagnostic() -> String {
    let inst = layered_instance(1000).unwrap();
    let (u, v) = inst.e();
    let seeds = 5;
    let mut excluded = 0;
    let mut distance_ok = true;
    for seed in 0..seeds {
        let params = SparsifierParams::with_seed(seed).with_oversample(0.002).unwrap();
        let h = unweight(&spectral_sparsify::<f64>(&inst.graph, &params));
        if !h.has_edge(u, v) {
            excluded += 1;
            distance_ok &= bfs_distances(&h, u).unwrap().get(v) == Some(inst.layers as u32 + 1);
        }
    }
    format!("oversample 0.002: e excluded on {excluded}/{seeds} seeds, distance N+1 on every exclusion: {distance_ok}")
}

fn c6_layer_cuts() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let families: [(&str, &dyn Fn(u64) -> UnweightedGraph); 3] = [
        ("gnp(150,0.1)", &|s| gnp(150, 0.1, s)),
        ("layered(4,6)", &|_| layered_custom(4, 6).unwrap().graph),
        ("hard(150,5)", &|s| conjectured_hard(150, 5, s).unwrap().graph),
    ];
    for (name, make) in families {
        let mut clean = 0;
        for seed in 0..LAYER_CUT_SEEDS {
            let g = make(seed);
            let h = spectral_sparsify::<f64>(&g, &SparsifierParams::with_seed(seed));
            let src = (seed as usize % g.n()) as u32;
            clean += layer_cut_check(&g, &h, src, MAX_EPS).unwrap().is_clean() as usize;
        }
        ok &= clean >= LAYER_CUT_MIN_CLEAN;
        parts.push(format!("{name} {clean}/{LAYER_CUT_SEEDS} clean"));
    }
    Outcome::new(ok, parts.join(", "))
}

fn matrix_families(seed: u64) -> [(&'static str, UnweightedGraph); 3] {
    [
        ("gnp(200,0.1)", gnp(200, 0.1, seed)),
        ("gnp(200,0.02)", gnp(200, 0.02, seed)),
        ("hard(200,10)", conjectured_hard(200, 10, seed).unwrap().graph),
    ]
}

fn oracle_stretch(g: &UnweightedGraph, out: &streamspan::spanner::SpannerOutput) -> Option<u32> {
    spanner_stretch(g, &out.spanner).ok()?.max_stretch
}

fn c7_multipass_matrix() -> Outcome {
    let start = Instant::now();
    let (mut runs, mut violations) = (0, Vec::new());
    for seed in 0..MATRIX_SEEDS {
        for (name, g) in matrix_families(seed) {
            let src = to_stream(&g, 0.2, seed).unwrap();
            for k in [2u32, 3, 4] {
                let bs = baswana_sen(&src, k, seed).unwrap();
                let kw = kapralov_woodruff(&src, k, seed).unwrap();
                runs += 2;
                if !(oracle_stretch(&g, &bs).is_some_and(|s| s <= 2 * k - 1) && bs.report.passes == k as u64) {
                    violations.push(format!("bs {name} k={k} seed={seed}"));
                }
                if !(oracle_stretch(&g, &kw).is_some_and(|s| s <= (1 << k) - 1) && kw.report.passes == 2) {
                    violations.push(format!("kw {name} k={k} seed={seed}"));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        violations.is_empty() && elapsed < MATRIX_TIME_LIMIT,
        format!("{runs} runs, {} violations {violations:?}, {:.1}s", violations.len(), elapsed.as_secs_f64()),
    )
}

fn c8_closed_forms() -> Outcome {
    let table: [(f64, u32, Scheme, u128, Option<u64>); 6] = [
        (7.0, 1, Scheme::Kw, 29, Some(2)),
        (7.0, 1, Scheme::Bs, 13, Some(4)),
        (31.0, 2, Scheme::Bs, 97, None),
        (31.0, 2, Scheme::Kw, 449, None),
        (31.0, 1, Scheme::Kw, (1 << 17) - 3, None),
        (3.0, 1, Scheme::Kw, 5, None),
    ];
    let mut ok = true;
    let mut mismatches = Vec::new();
    for (k, g, scheme, stretch, passes) in table {
        let got = stretch_bound(k, g, scheme).unwrap();
        let got_passes = pass_bound(k, g, scheme).unwrap();
        if got != stretch || passes.is_some_and(|p| p != got_passes) {
            ok = false;
            mismatches.push(format!("({k},{g},{}) -> {got}/{got_passes}", scheme.name()));
        }
    }
    let mut live = 0;
    for seed in 0..2u64 {
        for g_graph in [gnp(512, 0.02, seed), gnp(512, 0.1, seed)] {
            let src = to_stream(&g_graph, 0.2, seed).unwrap();
            for k in [3.0, 7.0] {
                for gg in [1u32, 2] {
                    for scheme in [Scheme::Bs, Scheme::Kw] {
                        let out = recursive_spanner(&src, k, gg, scheme, seed).unwrap();
                        live += 1;
                        let bound = stretch_bound(k, gg, scheme).unwrap();
                        let good = out.report.passes == pass_bound(k, gg, scheme).unwrap()
                            && oracle_stretch(&g_graph, &out).is_some_and(|s| s as u128 <= bound);
                        if !good {
                            ok = false;
                            mismatches.push(format!("live k={k} g={gg} {} seed={seed}", scheme.name()));
                        }
                    }
                }
            }
        }
    }
    Outcome::new(ok, format!("6 table rows, {live} live runs at n=512, mismatches {mismatches:?}"))
}

fn c9_cluster_lemmas() -> Outcome {
    let n = 256usize;
    let p = (n as f64).powf(-1.0 / 3.0);
    let i = 2usize;
    let mean = n as f64 * p.powi(i as i32);
    let sigma = (n as f64 * p.powi(i as i32) * (1.0 - p.powi(i as i32)) / CLUSTER_SEEDS as f64).sqrt();
    let mut ok = true;
    let mut parts = Vec::new();
    for scheme in [Scheme::Bs, Scheme::Kw] {
        let (mut clusters, mut certified, mut total) = (0usize, 0usize, 0usize);
        for seed in 0..CLUSTER_SEEDS {
            let src = StreamSource::from_graph(&gnp(n, 0.1, seed));
            let out = match scheme {
                Scheme::Bs => bs_clustering(&src, p, i, seed),
                Scheme::Kw => kw_clustering(&src, p, i, seed),
            }
            .unwrap();
            let bound = match scheme {
                Scheme::Bs => 2 * i as u32,
                Scheme::Kw => (1 << (i + 1)) - 2,
            };
            clusters += out.partition.len();
            for c in &out.partition.clusters {
                total += 1;
                certified += cluster_diameter(&out.h, &c.members).is_some_and(|d| d <= bound) as usize;
            }
        }
        let observed = clusters as f64 / CLUSTER_SEEDS as f64;
        let z = (observed - mean) / sigma;
        ok &= certified == total && z.abs() <= CLUSTER_SIGMAS;
        parts.push(format!(
            "{} diameter certified {certified}/{total}, mean |P| {observed:.3} vs {mean:.3} (z = {z:+.2})",
            scheme.name()
        ));
    }
    Outcome::new(ok, parts.join("; "))
}

/// Monotone survivors, and an exact t-spanner whenever the run empties.
fn filtering_invariants(g: &UnweightedGraph, out: &FilterOutput, t: f64) -> bool {
    let mut sets: Vec<_> = out.history.iter().map(|s| &s.surviving).collect();
    sets.push(&out.residual);
    let monotone = sets.windows(2).all(|w| w[1].is_subset(w[0]));
    let exact = !out.emptied
        || spanner_stretch(g, &out.spanner).unwrap().max_stretch.is_some_and(|s| s as f64 <= t);
    monotone && exact && out.violations == 0
}

fn c10_filtering() -> Outcome {
    let n = 400;
    let mut invariants = 0;
    let mut runs = 0;
    let mut shrinking = 0;
    let mut emptied = 0;
    let mut undersampled_rounds = 0;
    let rounds_log = (n as f64).log2().ceil() as u32;
    for seed in 0..FILTER_SEEDS {
        let g = gnp(n, 0.05, seed);

        let ldd = FilterParams::for_regime(n, 4, Regime::Ldd, seed).unwrap();
        let out = filtering_spanner(&g, &ldd).unwrap();
        runs += 1;
        invariants += filtering_invariants(&g, &out, ldd.t) as usize;
        let phi = ldd.phi.unwrap();
        let mut sizes: Vec<usize> = out.history.iter().map(|s| s.surviving.len()).collect();
        sizes.push(out.residual.len());
        shrinking += sizes.windows(2).all(|w| w[1] as f64 <= 3.0 * phi * w[0] as f64) as usize;

        let t = 12.0 * 4.0 * (n as f64).ln();
        let logn = FilterParams::new(t, rounds_log, seed).unwrap();
        let out = filtering_spanner(&g, &logn).unwrap();
        runs += 1;
        invariants += filtering_invariants(&g, &out, t) as usize;
        emptied += out.emptied as usize;

        // Undersampled sparsifiers leave real work for later rounds.
        let thin = FilterParams::new(3.0, 6, seed).unwrap().with_oversample(0.002).unwrap();
        let out = filtering_spanner(&g, &thin).unwrap();
        runs += 1;
        invariants += filtering_invariants(&g, &out, 3.0) as usize;
        undersampled_rounds += out.history.len();
    }
    let ok = invariants == runs
        && shrinking as f64 >= LDD_MIN_SHRINKING * FILTER_SEEDS as f64
        && emptied >= EMPTY_MIN_SEEDS;
    Outcome::new(
        ok,
        format!(
            "invariants {invariants}/{runs}; ldd shrinkage {shrinking}/{FILTER_SEEDS}; \
             g={rounds_log}, t=48 ln n emptied {emptied}/{FILTER_SEEDS}; undersampled runs used {undersampled_rounds} rounds"
        ),
    )
}

fn c11_peeling() -> Outcome {
    let entry = regression("peeling", "bits");
    let cases: Vec<(&str, UnweightedGraph, u64)> = vec![
        ("star(40)", star(40), 2),
        ("cycle(64)", cycle(64), 1),
        ("complete(30)", complete(30), 3),
    ];
    let mut ok = true;
    let (mut runs, mut failures) = (0, Vec::new());
    let mut worst_ratio: f64 = 0.0;
    let mut check = |name: &str, g: &UnweightedGraph, s: u64, seed: u64| {
        let out = low_degree_peeling(g, s, seed).unwrap();
        runs += 1;
        let oracle = peel_oracle(g, s);
        let min_deg_ok = out.result.min_degree_v2(g).map_or(true, |d| d as u64 > s);
        let exact_meter = out.transcript.board.round(0).iter().all(|m| m.charged_bits.is_none())
            && out.meter.max_bits_per_player_per_round
                == out.transcript.board.round(0).iter().map(|m| 8 * m.payload.len() as u64).max().unwrap_or(0);
        let x = Shape { s: s as f64, ..shape(g) };
        let bits = out.meter.max_bits_per_player_per_round as f64;
        worst_ratio = worst_ratio.max(bits / entry.bound(&x));
        let good = out.replicas_agree && out.result == oracle && min_deg_ok && exact_meter && entry.holds(bits, &x);
        if !good {
            failures.push(format!("{name} s={s} seed={seed}"));
        }
        good
    };
    for seed in 0..10u64 {
        for (n, p, s) in [(200usize, 0.02, 4u64), (300, 0.03, 8), (256, 0.1, 16)] {
            ok &= check(&format!("gnp({n},{p})"), &gnp(n, p, seed + 100), s, seed);
        }
        for (name, g, s) in &cases {
            ok &= check(name, g, *s, seed);
        }
    }
    Outcome::new(
        ok,
        format!("{runs} runs, failures {failures:?}, worst bits / bound {worst_ratio:.3}"),
    )
}

fn c12_scm() -> Outcome {
    let stretch = regression("scm", "stretch");
    let bits = regression("scm", "bits");
    let mut ok = true;
    let mut parts = Vec::new();
    for rounds in [1u32, 3] {
        let (mut worst_bits, mut worst_stretch) = (0u64, 0u32);
        for seed in CHECK_SEEDS {
            let g = gnp(256, 0.1, seed);
            let out = scm_tradeoff(&g, 0.5, rounds, seed).unwrap();
            let x = Shape { alpha: 0.5, ..shape(&g) };
            let s = out.report.max_stretch.unwrap_or(u32::MAX);
            let b = out.meter.max_bits_per_player_per_round;
            ok &= out.report.verified && out.violations == 0;
            ok &= bits.holds(b as f64, &x) && stretch.holds(s as f64, &x);
            worst_bits = worst_bits.max(b);
            worst_stretch = worst_stretch.max(s);
            if seed == CHECK_SEEDS.start {
                parts.push(format!(
                    "rounds={rounds}: bits bound {:.0}, stretch bound {:.2}",
                    bits.bound(&x),
                    stretch.bound(&x)
                ));
            }
        }
        parts.push(format!("rounds={rounds}: max bits {worst_bits}, max stretch {worst_stretch}"));
    }
    Outcome::new(ok, parts.join(", "))
}

fn c13_determinism() -> Outcome {
    let g = gnp(120, 0.08, 5);
    let text = to_stream(&g, 0.3, 5).unwrap().format();
    let run = |seed: u64| -> Vec<RunReport> {
        let src = StreamSource::parse(&text).unwrap();
        let g = src.materialize();
        let sp = SparsifierParams::with_seed(seed);
        vec![
            sparsifier_spanner(&src, &sp).unwrap().report,
            tradeoff_spanner(&src, 0.5, &sp).unwrap().report,
            sparse_tradeoff_spanner(&src, 0.5, &sp).unwrap().report,
            baswana_sen(&src, 3, seed).unwrap().report,
            kapralov_woodruff(&src, 3, seed).unwrap().report,
            recursive_spanner(&src, 3.0, 2, Scheme::Kw, seed).unwrap().report,
            filtering_spanner(&g, &FilterParams::for_regime(g.n(), 2, Regime::Ldd, seed).unwrap()).unwrap().report,
            low_degree_peeling(&g, 3, seed).unwrap().report,
            scm_tradeoff(&g, 0.5, 1, seed).unwrap().report,
            scm_tradeoff(&g, 0.5, 2, seed).unwrap().report,
        ]
    };
    let mut identical = 0;
    let mut differing = Vec::new();
    let mut total = 0;
    for seed in [0u64, 17] {
        let (a, b) = (run(seed), run(seed));
        for (x, y) in a.iter().zip(&b) {
            total += 1;
            if x.canonical_json() == y.canonical_json() {
                identical += 1;
            } else {
                differing.push(format!("{} seed={seed}", x.algo));
            }
        }
    }
    Outcome::new(identical == total, format!("{identical}/{total} reports byte-identical {differing:?}"))
}

fn main() {
    // `cargo test -- --list` and name filters from the default harness.
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let filter = args.iter().find(|a| !a.starts_with('-'));
    if filter.is_some_and(|f| !"acceptance".contains(f.as_str())) {
        return;
    }

    type Criterion = (u32, &'static str, fn() -> Outcome);
    let criteria: [Criterion; 13] = [
        (1, "sketch algebra", c1_sketch_algebra),
        (2, "recovery correctness", c2_recovery),
        (3, "sparsifier stretch sweep", c3_sparsifier_stretch),
        (4, "sparse-graph stretch", c4_sqrt_m),
        (5, "layered tightness", c5_tightness),
        (6, "layer-cut diagnostic", c6_layer_cuts),
        (7, "multipass matrix", c7_multipass_matrix),
        (8, "recursion closed forms", c8_closed_forms),
        (9, "cluster lemmas", c9_cluster_lemmas),
        (10, "filtering", c10_filtering),
        (11, "low-degree peeling", c11_peeling),
        (12, "simultaneous tradeoffs", c12_scm),
        (13, "determinism", c13_determinism),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        let start = Instant::now();
        let out = run();
        let expected_fail = EXPECTED_FAIL.contains(&id);
        let tag = match (out.pass, expected_fail) {
            (true, _) => "PASS",
            (false, true) => "FAIL (expected)",
            (false, false) => "FAIL",
        };
        println!("criterion {id:>2} {tag:<15} {name} [{:.1}s]: {}", start.elapsed().as_secs_f64(), out.detail);
        if id == 5 {
            println!("             diagnostic: {}", c5_undersampled_diagnostic());
        }
        if out.pass == expected_fail {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("criteria with unexpected outcomes: {unexpected:?}");
        std::process::exit(1);
    }
}
