//! Acceptance suite. Runs every criterion in sequence, prints one PASS/FAIL
//! line per criterion and exits non-zero if any failed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use threshold_tree::embed::{build_kmeans_tree_full, EmbeddedBuilder, TerminalEmbedding, TerminalEmbedding1D};
use threshold_tree::instances::{
    gen_lb_kmeans, gen_mixture, min_separation_brute, min_separation_sweep, verify_lb, LbOptions,
};
use threshold_tree::l1::{build_l1, build_l1_fast, build_l1_traced, BuildOptions};
use threshold_tree::l2::{build_l2_traced, L2Options};
use threshold_tree::seed::{derive_seed, rng_from_seed};
use threshold_tree::tree::Node;
use threshold_tree::{
    build_tree, tree_cost, Algorithm, CenterMode, CenterSet, IntervalUnion, Objective, ThresholdCut,
    ThresholdTree,
};

// Tolerances and sizes.
const A1_MAX_TIME: Duration = Duration::from_millis(1);
const A2_SETS: usize = 100;
const A2_MAX_TERMINALS: usize = 50;
const A2_MAX_DIM: usize = 10;
const A2_POINTS: usize = 10_000;
const A2_REL_SLACK: f64 = 1e-9;
const A3_PAIRS: usize = 10_000;
const A3_DIM: usize = 5;
const A3_TOL: f64 = 1e-9;
const A3_MAX_TIME: Duration = Duration::from_secs(1);
const A4_INSTANCES: usize = 200;
const A4_MAX_K: usize = 64;
const A4_MAX_DIM: usize = 16;
const A7_TRIALS: usize = 100;
const A7_K: usize = 20;
const A7_D: usize = 10;
const A7_N: usize = 2000;
const A7_SPREAD: f64 = 0.05;
const A7_MAX_MEAN_RATIO: f64 = 5.0;
const A7_MIN_RATIO: f64 = 1.0 - 1e-9;
const A7_MAX_TIME: Duration = Duration::from_secs(60);
const A8_ROUTE_POINTS: usize = 10_000;
const A8_MAX_MEAN_RATIO: f64 = 50.0;
const A8_MAX_TIME: Duration = Duration::from_secs(60);
const A9_K: usize = 6000;
const A9_EXPECTED_D: usize = 2610;
const A9_PAIR_SAMPLES: usize = 100_000;
const A9_MIN_KNOWN_OPT_RATIO: f64 = 10.0;
const A10_DIM: usize = 16;
const A10_K: usize = 100_000;
const A10_MAX_GROWTH: f64 = 3.0;
const A10_MAX_TIME: Duration = Duration::from_secs(60);
const A11_DRAWS: usize = 100_000;
const A11_BUILDS: usize = 10_000;
const A11_MIN_P: f64 = 0.001;
const A12_UNIONS: usize = 500;
const A12_MAX_SEP_K: usize = 50;

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_centers(rng: &mut ChaCha8Rng, k: usize, d: usize, lattice: Option<u32>) -> CenterSet {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(k);
    while rows.len() < k {
        let row: Vec<f64> = match lattice {
            Some(g) => (0..d).map(|_| rng.random_range(0..g) as f64 / g as f64).collect(),
            None => (0..d).map(|_| rng.random::<f64>()).collect(),
        };
        if !rows.contains(&row) {
            rows.push(row);
        }
    }
    CenterSet::new(rows).unwrap()
}

/// Random small instances; every other one has coordinates on a coarse
/// lattice so that ties between centers are common.
fn corpus() -> Vec<CenterSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED, 4));
    (0..A4_INSTANCES)
        .map(|i| {
            let k = rng.random_range(1..=A4_MAX_K);
            let d = rng.random_range(1..=A4_MAX_DIM);
            let lattice = (i % 2 == 1).then(|| {
                // Enough lattice points for k distinct centers.
                let mut g = 2u32;
                while (g as f64).powi(d as i32) < 2.0 * k as f64 {
                    g += 1;
                }
                g
            });
            random_centers(&mut rng, k, d, lattice)
        })
        .collect()
}

fn a1() -> Outcome {
    let start = Instant::now();
    let e = TerminalEmbedding1D::fit(&[1.0, 3.0, 5.0]).unwrap();
    let values = [e.apply(1.0), e.apply(3.0), e.apply(5.0)];
    let elapsed = start.elapsed();
    let pass = values == [0.0, 2.0, 4.0] && elapsed < A1_MAX_TIME;
    outcome(
        pass,
        format!("psi(1,3,5) = {values:?} in {:.1} us", elapsed.as_secs_f64() * 1e6),
    )
}

fn a2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED, 2));
    let mut worst_upper = 0.0f64;
    let mut worst_lower = 0.0f64;
    let mut violations = 0usize;
    let start = Instant::now();
    for _ in 0..A2_SETS {
        let m = rng.random_range(1..=A2_MAX_TERMINALS);
        let d = rng.random_range(1..=A2_MAX_DIM);
        let terminals = random_centers(&mut rng, m, d, None);
        let emb = TerminalEmbedding::fit(&terminals).unwrap();
        let bound = 8.0 * m as f64;
        for p in 0..A2_POINTS {
            // Half the points near a terminal, half anywhere around the set.
            let x: Vec<f64> = if p % 2 == 0 {
                let y = terminals.center(rng.random_range(0..m));
                y.iter().map(|v| v + rng.random_range(-0.05..0.05)).collect()
            } else {
                (0..d).map(|_| rng.random_range(-0.5..1.5)).collect()
            };
            for y in terminals.iter() {
                let emb_dist = emb.distance_to_terminal(&x, y).unwrap();
                let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                if sq == 0.0 {
                    if emb_dist != 0.0 {
                        violations += 1;
                    }
                    continue;
                }
                worst_upper = worst_upper.max(emb_dist / sq);
                worst_lower = worst_lower.max(sq / (bound * emb_dist));
                if emb_dist > sq * (1.0 + A2_REL_SLACK) || sq > bound * emb_dist * (1.0 + A2_REL_SLACK) {
                    violations += 1;
                }
            }
        }
    }
    outcome(
        violations == 0,
        format!(
            "max |psi(x)-psi(y)|/|x-y|^2 = {worst_upper:.6}, max |x-y|^2/(8|K| |psi(x)-psi(y)|) = {worst_lower:.6}, {violations} violations, {:.1} s",
            start.elapsed().as_secs_f64()
        ),
    )
}

fn a3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED, 3));
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..A3_PAIRS {
        let x: Vec<f64> = (0..A3_DIM).map(|_| rng.random_range(-100.0..100.0)).collect();
        let y: Vec<f64> = (0..A3_DIM).map(|_| rng.random_range(-100.0..100.0)).collect();
        let l1: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        let m = IntervalUnion::separating_set(&x, &y).unwrap().measure();
        worst = worst.max((m - l1).abs());
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= A3_TOL && elapsed < A3_MAX_TIME,
        format!("max |measure - l1| = {worst:e} in {:.1} ms", elapsed.as_secs_f64() * 1e3),
    )
}

fn leaf_labels(tree: &ThresholdTree) -> Vec<usize> {
    let mut labels: Vec<usize> = tree
        .nodes()
        .iter()
        .filter_map(|n| match n {
            Node::Leaf { center } => Some(*center),
            Node::Split { .. } => None,
        })
        .collect();
    labels.sort_unstable();
    labels
}

/// Checks structure without relying on the tree's own validation: the leaves
/// carry each label once and every center reaches its own leaf.
fn tree_is_valid(tree: &ThresholdTree, centers: &CenterSet) -> bool {
    let k = centers.len();
    tree.num_leaves() == k
        && leaf_labels(tree) == (0..k).collect::<Vec<_>>()
        && (0..k).all(|i| tree.route(centers.center(i)) == i)
}

fn a4(corpus: &[CenterSet]) -> Outcome {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    for alg in [Algorithm::L1, Algorithm::L1Fast, Algorithm::L2, Algorithm::KmeansEmbed] {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED, 40 + alg as u64));
        let bad = corpus
            .iter()
            .filter(|c| match build_tree(alg, c, &mut rng) {
                Ok((t, _)) => !tree_is_valid(&t, c),
                Err(_) => true,
            })
            .count();
        pass &= bad == 0;
        details.push(format!("{alg}: {bad}/{} invalid", corpus.len()));
    }
    outcome(
        pass,
        format!("{} in {:.1} s", details.join(", "), start.elapsed().as_secs_f64()),
    )
}

fn a5(corpus: &[CenterSet]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED, 5));
    let mut rounds_total = 0;
    let mut failures = Vec::new();
    for (idx, c) in corpus.iter().enumerate() {
        let (_, trace) = match build_l1_traced(c, &mut rng, &BuildOptions::default()) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("#{idx}: {e}"));
                continue;
            }
        };
        rounds_total += trace.len();
        let monotone = trace.windows(2).all(|w| w[1].max_distance <= w[0].max_distance);
        let few_cuts = trace.len() <= c.len().saturating_sub(1);
        let covering = trace.iter().all(|r| r.separating_measure >= r.max_distance);
        if !(monotone && few_cuts && covering) {
            failures.push(format!(
                "#{idx}: monotone {monotone}, cuts {} for k = {}, measure(A_t) >= D_t {covering}",
                trace.len(),
                c.len()
            ));
        }
    }
    let detail = if failures.is_empty() {
        format!("{} instances, {rounds_total} rounds checked", corpus.len())
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

fn ceil_log2(k: usize) -> usize {
    if k <= 1 {
        0
    } else {
        (usize::BITS - (k - 1).leading_zeros()) as usize
    }
}

fn a6(corpus: &[CenterSet]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED, 6));
    let mut calls = 0;
    let mut failures = Vec::new();
    for (idx, c) in corpus.iter().enumerate() {
        let (_, records) = match build_l2_traced(c, &mut rng, &L2Options::default()) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("#{idx}: {e}"));
                continue;
            }
        };
        calls += records.len();
        let halving = records
            .iter()
            .all(|r| r.part_sizes.iter().all(|&s| 2 * s <= r.input_size));
        let levels = records.iter().map(|r| r.level + 1).max().unwrap_or(0);
        if !halving || levels > ceil_log2(c.len()) {
            failures.push(format!(
                "#{idx}: halving {halving}, depth {levels} for k = {}",
                c.len()
            ));
        }
    }
    let detail = if failures.is_empty() {
        format!("{} instances, {calls} partition calls checked", corpus.len())
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn a7() -> Outcome {
    let start = Instant::now();
    let mut ratios = Vec::with_capacity(A7_TRIALS);
    for trial in 0..A7_TRIALS {
        let seed = derive_seed(SEED, trial as u64);
        let inst = gen_mixture(A7_K, A7_D, A7_N, A7_SPREAD, Objective::L1, &mut rng_from_seed(derive_seed(seed, 0)))
            .unwrap();
        let tree = build_l1_fast(&inst.centers, &mut rng_from_seed(derive_seed(seed, 1))).unwrap();
        let r = tree_cost(&inst.data, &inst.centers, &tree, Objective::L1, CenterMode::Optimal).unwrap();
        ratios.push(r.ratio.unwrap());
    }
    let elapsed = start.elapsed();
    let m = mean(&ratios);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    let below = ratios.iter().filter(|&&r| r < A7_MIN_RATIO).count();
    outcome(
        m <= A7_MAX_MEAN_RATIO && below == 0 && elapsed < A7_MAX_TIME,
        format!(
            "mean ratio {m:.4}, min {lo:.4}, max {hi:.4}, {below} below 1, {:.1} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn a8() -> Outcome {
    let start = Instant::now();
    let mut ratios = Vec::with_capacity(A7_TRIALS);
    let mut mismatches = 0usize;
    let mut routed = 0usize;
    for trial in 0..A7_TRIALS {
        let seed = derive_seed(SEED, trial as u64);
        let inst = gen_mixture(
            A7_K,
            A7_D,
            A7_N,
            A7_SPREAD,
            Objective::L2Squared,
            &mut rng_from_seed(derive_seed(seed, 0)),
        )
        .unwrap();
        let build = build_kmeans_tree_full(
            &inst.centers,
            &mut rng_from_seed(derive_seed(seed, 1)),
            EmbeddedBuilder::Fast,
            &BuildOptions::default(),
        )
        .unwrap();
        // All data points, topped up with uniform points around the cube.
        let mut rng = rng_from_seed(derive_seed(seed, 2));
        let extra = A8_ROUTE_POINTS.saturating_sub(inst.data.len());
        let uniform: Vec<Vec<f64>> = (0..extra)
            .map(|_| (0..A7_D).map(|_| rng.random_range(-0.25..1.25)).collect())
            .collect();
        for x in inst.data.iter().map(|(x, _)| x).chain(uniform.iter().map(Vec::as_slice)) {
            let embedded = build.embedding.apply(x).unwrap();
            if build.tree.route(x) != build.embedded_tree.route(&embedded) {
                mismatches += 1;
            }
            routed += 1;
        }
        let r = tree_cost(&inst.data, &inst.centers, &build.tree, Objective::L2Squared, CenterMode::Optimal).unwrap();
        ratios.push(r.ratio.unwrap());
    }
    let elapsed = start.elapsed();
    let m = mean(&ratios);
    outcome(
        mismatches == 0 && m <= A8_MAX_MEAN_RATIO && elapsed < A8_MAX_TIME,
        format!(
            "{mismatches}/{routed} routing mismatches, mean ratio {m:.4}, {:.1} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn a9() -> Outcome {
    let start = Instant::now();
    let opts = LbOptions::default();
    let mut attempt = 0u64;
    let (inst, report) = loop {
        let inst = gen_lb_kmeans(A9_K, &mut rng_from_seed(derive_seed(SEED, 900 + attempt)), &opts).unwrap();
        let report = verify_lb(&inst, A9_PAIR_SAMPLES, &mut rng_from_seed(derive_seed(SEED, 950 + attempt))).unwrap();
        if (report.pairwise_ok && report.separation_ok) || attempt == 1 {
            break (inst, report);
        }
        attempt += 1;
    };
    let known_opt = inst.known_opt.unwrap();
    let (tree, _) = build_tree(Algorithm::KmeansEmbed, &inst.centers, &mut rng_from_seed(derive_seed(SEED, 999))).unwrap();
    let r = tree_cost(&inst.data, &inst.centers, &tree, Objective::L2Squared, CenterMode::Optimal).unwrap();
    let ratio = r.tree_cost / known_opt;
    let pass = report.d == A9_EXPECTED_D
        && report.pairwise_ok
        && report.separation_ok
        && ratio >= A9_MIN_KNOWN_OPT_RATIO;
    outcome(
        pass,
        format!(
            "d = {}, eps = {:.5}, attempts {}, min cut separation {} (need >= {:.2}), min sampled sq dist {:.2} (need >= {:.2}), ratio_vs_known_opt {:.4} (need >= {A9_MIN_KNOWN_OPT_RATIO}), {:.1} s",
            report.d,
            report.eps,
            attempt + 1,
            report.min_cut_separation,
            report.separation_threshold,
            report.min_pairwise_sq_dist,
            report.pairwise_threshold,
            ratio,
            start.elapsed().as_secs_f64()
        ),
    )
}

fn time_fast_build(k: usize, seed: u64) -> Duration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = random_centers_fast(&mut rng, k, A10_DIM);
    // Best of two runs to damp scheduler noise.
    (0..2)
        .map(|_| {
            let start = Instant::now();
            let tree = build_l1_fast(&centers, &mut rng).unwrap();
            let elapsed = start.elapsed();
            assert_eq!(tree.num_leaves(), k);
            elapsed
        })
        .min()
        .unwrap()
}

/// Continuous random centers; distinct with probability one, so no
/// duplicate scan is needed at this size.
fn random_centers_fast(rng: &mut ChaCha8Rng, k: usize, d: usize) -> CenterSet {
    CenterSet::new((0..k).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect()).unwrap()
}

fn a10() -> Outcome {
    let small = time_fast_build(A10_K, derive_seed(SEED, 10));
    let large = time_fast_build(2 * A10_K, derive_seed(SEED, 11));
    let growth = large.as_secs_f64() / small.as_secs_f64();
    outcome(
        growth <= A10_MAX_GROWTH && small < A10_MAX_TIME,
        format!(
            "k = {A10_K}: {:.3} s, k = {}: {:.3} s, growth {growth:.3}",
            small.as_secs_f64(),
            2 * A10_K,
            large.as_secs_f64()
        ),
    )
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> (f64, f64) {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = n * m / (n + m);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = 2.0 * (-1.0f64).powi(k - 1) * (-2.0 * kf * kf * lambda * lambda).exp();
        p += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    (d, p.clamp(0.0, 1.0))
}

/// Position of a cut in the cut space laid out coordinate after coordinate.
fn unroll(cut: &ThresholdCut, offsets: &[f64]) -> f64 {
    offsets[cut.coord] + cut.threshold
}

fn a11() -> Outcome {
    // Chi-square: four unit cells, coord0 [0,1) and coord1 [0,1), [1,2), [2,3).
    let r = IntervalUnion::from_intervals(2, [(0, 0.0, 1.0), (1, 0.0, 3.0)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED, 11));
    let mut counts = [0usize; 4];
    for _ in 0..A11_DRAWS {
        let cut = r.sample_cut(&mut rng).unwrap();
        let cell = if cut.coord == 0 { 0 } else { 1 + cut.threshold.floor() as usize };
        counts[cell] += 1;
    }
    let expected = A11_DRAWS as f64 / 4.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let chi_p = 1.0 - ChiSquared::new(3.0).unwrap().cdf(chi2);
    let coord1 = (counts[1] + counts[2] + counts[3]) as f64 / A11_DRAWS as f64;

    // KS: both builders on two centers draw from the same box.
    let centers = CenterSet::new(vec![vec![0.0, 0.0], vec![1.0, 3.0]]).unwrap();
    let offsets = [0.0, 1.0];
    let mut global = Vec::with_capacity(A11_BUILDS);
    let mut fast = Vec::with_capacity(A11_BUILDS);
    for _ in 0..A11_BUILDS {
        let t = build_l1(&centers, &mut rng, &BuildOptions::default()).unwrap();
        global.push(unroll(t.cuts().next().unwrap(), &offsets));
        let t = build_l1_fast(&centers, &mut rng).unwrap();
        fast.push(unroll(t.cuts().next().unwrap(), &offsets));
    }
    let (ks_d, ks_p) = ks_two_sample(&mut global, &mut fast);
    outcome(
        chi_p > A11_MIN_P && ks_p > A11_MIN_P,
        format!(
            "chi-square {chi2:.3} (p = {chi_p:.4}), P(coord1) = {coord1:.4}; KS D = {ks_d:.4} (p = {ks_p:.4})"
        ),
    )
}

const CELL: f64 = 1.0 / 64.0;
const SPAN: i32 = 256;

/// Dyadic endpoints keep every measure exact in floating point.
fn random_intervals(rng: &mut ChaCha8Rng, dim: usize) -> Vec<(usize, f64, f64)> {
    let n = rng.random_range(0..8);
    (0..n)
        .map(|_| {
            let a = rng.random_range(-SPAN..SPAN);
            let len = rng.random_range(0..64);
            (rng.random_range(0..dim), a as f64 * CELL, (a + len) as f64 * CELL)
        })
        .collect()
}

fn member(ivs: &[(usize, f64, f64)], c: usize, t: f64) -> bool {
    ivs.iter().any(|&(j, a, b)| j == c && a <= t && t < b)
}

fn grid_measure(dim: usize, pred: impl Fn(usize, f64) -> bool) -> f64 {
    let mut total = 0.0;
    for c in 0..dim {
        for i in -SPAN - 64..SPAN + 64 {
            if pred(c, (i as f64 + 0.5) * CELL) {
                total += CELL;
            }
        }
    }
    total
}

fn a12() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED, 12));
    let mut set_failures = 0usize;
    for _ in 0..A12_UNIONS {
        let dim = rng.random_range(1..4);
        let a = random_intervals(&mut rng, dim);
        let b = random_intervals(&mut rng, dim);
        let ua = IntervalUnion::from_intervals(dim, a.clone()).unwrap();
        let ub = IntervalUnion::from_intervals(dim, b.clone()).unwrap();
        let ops: [(IntervalUnion, Box<dyn Fn(usize, f64) -> bool>); 4] = [
            (ua.clone(), Box::new(|c, t| member(&a, c, t))),
            (ua.union(&ub).unwrap(), Box::new(|c, t| member(&a, c, t) || member(&b, c, t))),
            (ua.intersect(&ub).unwrap(), Box::new(|c, t| member(&a, c, t) && member(&b, c, t))),
            (ua.subtract(&ub).unwrap(), Box::new(|c, t| member(&a, c, t) && !member(&b, c, t))),
        ];
        for (set, pred) in &ops {
            let mut ok = set.measure() == grid_measure(dim, pred);
            for c in 0..dim {
                for i in -SPAN - 64..SPAN + 64 {
                    for t in [i as f64 * CELL, (i as f64 + 0.5) * CELL] {
                        ok &= set.contains(&ThresholdCut::new(c, t)) == pred(c, t);
                    }
                }
            }
            if !ok {
                set_failures += 1;
            }
        }
    }

    let mut sep_failures = 0usize;
    let mut sep_checked = 0usize;
    let lb = LbOptions {
        d_const: 1.5,
        force: true,
        ..LbOptions::default()
    };
    for k in 2..=A12_MAX_SEP_K {
        for rep in 0..2u64 {
            let inst = gen_lb_kmeans(k, &mut rng_from_seed(derive_seed(SEED, 1200 + 2 * k as u64 + rep)), &lb).unwrap();
            // Shrink the offsets so cuts inside [0, 1) see a mix of counts.
            let mut inst = inst;
            let eps = 0.5 / k as f64;
            let mut rows = Vec::with_capacity(inst.data.len());
            for (i, &a) in inst.assignment.iter().enumerate() {
                let c = inst.centers.center(a);
                rows.push(match i % 3 {
                    0 => c.iter().map(|v| v + eps).collect(),
                    1 => c.iter().map(|v| v - eps).collect(),
                    _ => c.to_vec(),
                });
            }
            inst.data = threshold_tree::Dataset::new(rows, Some(inst.data.weights().to_vec())).unwrap();
            inst.eps = Some(eps);
            let sweep = min_separation_sweep(&inst);
            let brute = min_separation_brute(&inst);
            sep_checked += 1;
            if sweep.count != brute.count {
                sep_failures += 1;
            }
        }
    }
    outcome(
        set_failures == 0 && sep_failures == 0,
        format!(
            "{set_failures}/{} set operations differ from the grid; {sep_failures}/{sep_checked} separation counts differ",
            4 * A12_UNIONS
        ),
    )
}

fn main() -> ExitCode {
    let corpus = corpus();
    let criteria: Vec<(&str, &str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("A1", "embedding values on {1,3,5}", Box::new(a1)),
        ("A2", "distortion sandwich", Box::new(a2)),
        ("A3", "separating-set isometry", Box::new(a3)),
        ("A4", "tree validity, all builders", Box::new(|| a4(&corpus))),
        ("A5", "global-cut builder internals", Box::new(|| a5(&corpus))),
        ("A6", "l2 partition halving", Box::new(|| a6(&corpus))),
        ("A7", "l1-fast ratio on mixtures", Box::new(a7)),
        ("A8", "k-means pipeline", Box::new(a8)),
        ("A9", "lower-bound instance", Box::new(a9)),
        ("A10", "fast builder scaling", Box::new(a10)),
        ("A11", "sampling law", Box::new(a11)),
        ("A12", "oracle equivalence", Box::new(a12)),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| a.starts_with('A')).collect();
    let mut failed = Vec::new();
    for (id, name, run) in &criteria {
        if !only.is_empty() && !only.iter().any(|o| o == id) {
            continue;
        }
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("{id:<4} {status}  {name}: {}", o.detail);
        if !o.pass {
            failed.push(*id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
