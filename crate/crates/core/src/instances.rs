//! Instance generators: Gaussian mixtures, k-means++-style seeding, and the
//! hard instances for explainable k-means and l2 k-medians, with empirical
//! checks of the properties those constructions rely on.

use std::collections::HashSet;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::points::{assignment_cost, dist_unchecked, sq_dist, CenterSet, Dataset, Objective};

/// Data, reference centers and the generating assignment.
#[derive(Debug, Clone)]
pub struct Instance {
    pub data: Dataset,
    pub centers: CenterSet,
    pub assignment: Vec<usize>,
    /// Optimal cost when known in closed form.
    pub known_opt: Option<f64>,
    pub objective: Objective,
    /// Offset length of lower-bound constructions.
    pub eps: Option<f64>,
}

impl Instance {
    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn dim(&self) -> usize {
        self.centers.dim()
    }

    pub fn assignment_cost(&self) -> Result<f64> {
        assignment_cost(&self.data, &self.centers, &self.assignment, self.objective)
    }
}

fn uniform_cube<R: Rng + ?Sized>(k: usize, d: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..k)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect()
}

/// `k` centers uniform in `[0,1]^d`; `n` points, each a uniformly chosen
/// center plus per-coordinate Gaussian noise of scale `spread`.
pub fn gen_mixture<R: Rng + ?Sized>(
    k: usize,
    d: usize,
    n: usize,
    spread: f64,
    obj: Objective,
    rng: &mut R,
) -> Result<Instance> {
    if k == 0 || d == 0 || n < k {
        return Err(Error::InvalidParameter(format!(
            "mixture needs k >= 1, d >= 1 and n >= k (got k = {k}, d = {d}, n = {n})"
        )));
    }
    if !(spread.is_finite() && spread >= 0.0) {
        return Err(Error::InvalidParameter(format!("spread must be >= 0, got {spread}")));
    }
    let centers = CenterSet::new(uniform_cube(k, d, rng))?;
    let mut assignment = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let a = rng.random_range(0..k);
        let c = centers.center(a);
        rows.push(
            c.iter()
                .map(|&v| v + spread * rng.sample::<f64, _>(StandardNormal))
                .collect(),
        );
        assignment.push(a);
    }
    Ok(Instance {
        data: Dataset::new(rows, None)?,
        centers,
        assignment,
        known_opt: None,
        objective: obj,
        eps: None,
    })
}

/// D^p seeding: the first center is drawn proportionally to weight, every
/// further one proportionally to `w(x) · D(x)^p` where `D` is the distance to
/// the nearest chosen center (`p = 2` for k-means, `p = 1` otherwise).
pub fn kmeanspp_seed<R: Rng + ?Sized>(
    data: &Dataset,
    k: usize,
    obj: Objective,
    rng: &mut R,
) -> Result<CenterSet> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let distinct: HashSet<Vec<u64>> = data
        .iter()
        .map(|(x, _)| x.iter().map(|&v| (v + 0.0).to_bits()).collect())
        .collect();
    if distinct.len() < k {
        return Err(Error::InvalidParameter(format!(
            "dataset has {} distinct points, fewer than k = {k}",
            distinct.len()
        )));
    }
    let pick = |scores: &[f64], rng: &mut R| -> usize {
        let total: f64 = scores.iter().sum();
        let mut s = rng.random::<f64>() * total;
        for (i, &w) in scores.iter().enumerate() {
            if w > 0.0 {
                if s < w {
                    return i;
                }
                s -= w;
            }
        }
        scores.iter().rposition(|&w| w > 0.0).expect("positive total")
    };
    let mut chosen = vec![pick(data.weights(), rng)];
    // Distance to the nearest chosen center (l2² for k-means, the objective's
    // own distance otherwise).
    let mut nearest: Vec<f64> = data
        .iter()
        .map(|(x, _)| dist_unchecked(x, data.point(chosen[0]), obj))
        .collect();
    while chosen.len() < k {
        let scores: Vec<f64> = nearest
            .iter()
            .zip(data.weights())
            .map(|(&d, &w)| w * d)
            .collect();
        let next = pick(&scores, rng);
        chosen.push(next);
        for (i, (x, _)) in data.iter().enumerate() {
            let d = dist_unchecked(x, data.point(next), obj);
            if d < nearest[i] {
                nearest[i] = d;
            }
        }
    }
    CenterSet::new(chosen.into_iter().map(|i| data.point(i).to_vec()).collect())
}

/// Constants of the lower-bound constructions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbOptions {
    /// `d = ⌈d_const · ln k⌉`.
    pub d_const: f64,
    /// `ε = eps_const · ln k / k` for the k-means construction.
    pub eps_const: f64,
    /// Weight of the point placed on each center; `None` means `k²`.
    pub colocated_weight: Option<f64>,
    /// Skip the `ε < 1` feasibility check.
    pub force: bool,
}

impl Default for LbOptions {
    fn default() -> Self {
        LbOptions {
            d_const: 300.0,
            eps_const: 300.0,
            colocated_weight: None,
            force: false,
        }
    }
}

/// Smallest `k >= 2` with `eps_const · ln k / k < 1`.
pub fn min_feasible_k(eps_const: f64) -> Option<usize> {
    // eps_const · ln k / k is decreasing for k >= 3.
    (2..100_000_000usize).find(|&k| eps_const * (k as f64).ln() / (k as f64) < 1.0)
}

/// Offset points `c ± ε·1` (weight 1) and a heavy point on every center.
fn offset_dataset(centers: &CenterSet, eps: f64, heavy: f64) -> Result<(Dataset, Vec<usize>)> {
    let mut data = Dataset::empty(centers.dim())?;
    let mut assignment = Vec::with_capacity(3 * centers.len());
    for (i, c) in centers.iter().enumerate() {
        let plus: Vec<f64> = c.iter().map(|v| v + eps).collect();
        let minus: Vec<f64> = c.iter().map(|v| v - eps).collect();
        data.push(&plus, 1.0)?;
        data.push(&minus, 1.0)?;
        data.push(c, heavy)?;
        assignment.extend([i, i, i]);
    }
    Ok((data, assignment))
}

fn lb_dimension(k: usize, d_const: f64) -> usize {
    ((d_const * (k as f64).ln()).ceil() as usize).max(1)
}

/// `(d, ε)` of the hard k-means instance for `k` centers, checking `ε < 1`
/// unless forced.
pub fn lb_kmeans_params(k: usize, opts: &LbOptions) -> Result<(usize, f64)> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    let eps = opts.eps_const * (k as f64).ln() / k as f64;
    if !opts.force && !(eps < 1.0) {
        let hint = min_feasible_k(opts.eps_const)
            .map(|m| format!("; the smallest feasible k is {m}"))
            .unwrap_or_default();
        return Err(Error::InvalidParameter(format!(
            "eps = {eps} is not below 1 for k = {k}{hint} (use force to override)"
        )));
    }
    Ok((lb_dimension(k, opts.d_const), eps))
}

/// Hard k-means instance: `k` uniform centers in `[0,1]^d` with
/// `d = ⌈d_const ln k⌉`, each with offset points at `±ε` on every coordinate,
/// `ε = eps_const ln k / k`, and a heavy point on the center.
/// `known_opt = 2kε²d`.
pub fn gen_lb_kmeans<R: Rng + ?Sized>(k: usize, rng: &mut R, opts: &LbOptions) -> Result<Instance> {
    let (d, eps) = lb_kmeans_params(k, opts)?;
    let heavy = opts.colocated_weight.unwrap_or((k * k) as f64);
    let centers = CenterSet::new(uniform_cube(k, d, rng))?;
    let (data, assignment) = offset_dataset(&centers, eps, heavy)?;
    Ok(Instance {
        data,
        centers,
        assignment,
        known_opt: Some(2.0 * k as f64 * eps * eps * d as f64),
        objective: Objective::L2Squared,
        eps: Some(eps),
    })
}

/// Hard l2 k-medians instance: centers drawn uniformly from the grid
/// `{0, ε, …, 1}^d` with `ε = 1/⌈ln k⌉`, `d = ⌈d_const ln k⌉`, and the same
/// offset and heavy points. `known_opt = 2kε√d` (the assignment cost).
pub fn gen_lb_l2medians<R: Rng + ?Sized>(
    k: usize,
    rng: &mut R,
    opts: &LbOptions,
) -> Result<Instance> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    let steps = (k as f64).ln().ceil().max(1.0) as usize;
    let eps = 1.0 / steps as f64;
    let d = lb_dimension(k, opts.d_const);
    let cells = (steps + 1) as f64;
    if d as f64 * cells.ln() < (k as f64).ln() {
        return Err(Error::InvalidParameter(format!(
            "grid with {} points per axis in {d} dimensions cannot hold {k} distinct centers",
            steps + 1
        )));
    }
    let mut seen = HashSet::with_capacity(k);
    let mut rows = Vec::with_capacity(k);
    while rows.len() < k {
        let cell: Vec<usize> = (0..d).map(|_| rng.random_range(0..=steps)).collect();
        if seen.insert(cell.clone()) {
            rows.push(cell.into_iter().map(|j| j as f64 * eps).collect());
        }
    }
    let centers = CenterSet::new(rows)?;
    let heavy = opts.colocated_weight.unwrap_or((k * k) as f64);
    let (data, assignment) = offset_dataset(&centers, eps, heavy)?;
    Ok(Instance {
        data,
        centers,
        assignment,
        known_opt: Some(2.0 * k as f64 * eps * (d as f64).sqrt()),
        objective: Objective::L2,
        eps: Some(eps),
    })
}

/// Worst cut found by a separation counter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationMin {
    pub count: usize,
    pub coord: usize,
    pub threshold: f64,
}

/// Per coordinate, the threshold intervals `[lo, hi)` on which a cut separates
/// a data point from its assigned center.
fn separation_intervals(inst: &Instance, coord: usize) -> Vec<(f64, f64)> {
    inst.data
        .iter()
        .zip(&inst.assignment)
        .filter_map(|((x, _), &a)| {
            let (p, c) = (x[coord], inst.centers.center(a)[coord]);
            (p != c).then(|| (p.min(c), p.max(c)))
        })
        .collect()
}

/// Candidate thresholds in `[0, 1)`: 0 and every interval endpoint there.
/// The separation count is constant between consecutive candidates.
fn candidates(intervals: &[(f64, f64)]) -> Vec<f64> {
    let mut c: Vec<f64> = std::iter::once(0.0)
        .chain(intervals.iter().flat_map(|&(a, b)| [a, b]))
        .filter(|&t| (0.0..1.0).contains(&t))
        .collect();
    c.sort_by(f64::total_cmp);
    c.dedup();
    c
}

fn sweep_coordinate(intervals: &[(f64, f64)]) -> (usize, f64) {
    let mut starts: Vec<f64> = intervals.iter().map(|iv| iv.0).collect();
    let mut ends: Vec<f64> = intervals.iter().map(|iv| iv.1).collect();
    starts.sort_by(f64::total_cmp);
    ends.sort_by(f64::total_cmp);
    let (mut s, mut e) = (0, 0);
    let mut best = (usize::MAX, 0.0);
    for t in candidates(intervals) {
        while s < starts.len() && starts[s] <= t {
            s += 1;
        }
        while e < ends.len() && ends[e] <= t {
            e += 1;
        }
        let count = s - e;
        if count < best.0 {
            best = (count, t);
        }
    }
    best
}

fn fold_min(per_coord: impl Iterator<Item = (usize, (usize, f64))>) -> SeparationMin {
    per_coord.fold(
        SeparationMin {
            count: usize::MAX,
            coord: 0,
            threshold: 0.0,
        },
        |best, (coord, (count, threshold))| {
            if count < best.count {
                SeparationMin {
                    count,
                    coord,
                    threshold,
                }
            } else {
                best
            }
        },
    )
}

/// Minimum over cuts `(i, θ)`, `θ ∈ [0,1)`, of the number of data points the
/// cut separates from their assigned centers, by a sweep over sorted
/// interval endpoints (`O(n log n)` per coordinate).
pub fn min_separation_sweep(inst: &Instance) -> SeparationMin {
    let per: Vec<(usize, (usize, f64))> = (0..inst.dim())
        .into_par_iter()
        .map(|i| (i, sweep_coordinate(&separation_intervals(inst, i))))
        .collect();
    fold_min(per.into_iter())
}

/// Same minimum by direct counting at every candidate threshold (`O(n²)`
/// per coordinate).
pub fn min_separation_brute(inst: &Instance) -> SeparationMin {
    fold_min((0..inst.dim()).map(|i| {
        let iv = separation_intervals(inst, i);
        let best = candidates(&iv)
            .into_iter()
            .map(|t| (iv.iter().filter(|&&(a, b)| a <= t && t < b).count(), t))
            .min_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)))
            .unwrap_or((usize::MAX, 0.0));
        (i, best)
    }))
}

/// Separation count at `θ = 0, step, 2·step, …` below 1, directly from the
/// cut indicator of every point and its center.
pub fn min_separation_grid(inst: &Instance, step: f64) -> SeparationMin {
    let steps = (1.0 / step).ceil() as usize;
    fold_min((0..inst.dim()).map(|i| {
        let best = (0..steps)
            .map(|s| s as f64 * step)
            .filter(|&t| t < 1.0)
            .map(|t| {
                let count = inst
                    .data
                    .iter()
                    .zip(&inst.assignment)
                    .filter(|((x, _), &a)| (x[i] > t) != (inst.centers.center(a)[i] > t))
                    .count();
                (count, t)
            })
            .min_by(|x, y| x.0.cmp(&y.0))
            .unwrap_or((usize::MAX, 0.0));
        (i, best)
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LbVerifyReport {
    pub k: usize,
    pub d: usize,
    pub eps: f64,
    pub pair_samples: usize,
    /// Smallest squared l2 distance among the sampled center pairs.
    pub min_pairwise_sq_dist: f64,
    /// `d / 12`.
    pub pairwise_threshold: f64,
    pub pairwise_ok: bool,
    pub min_cut_separation: usize,
    pub worst_cut: SeparationMin,
    /// `εk / 4`.
    pub separation_threshold: f64,
    pub separation_ok: bool,
}

/// Checks the two properties the lower-bound argument rests on: sampled
/// center pairs are at squared distance at least `d/12`, and every cut with
/// threshold in `[0,1)` separates at least `εk/4` points from their centers.
pub fn verify_lb<R: Rng + ?Sized>(
    inst: &Instance,
    pair_samples: usize,
    rng: &mut R,
) -> Result<LbVerifyReport> {
    let eps = inst
        .eps
        .ok_or_else(|| Error::InvalidParameter("instance has no offset length".into()))?;
    let k = inst.k();
    let d = inst.dim();
    let mut min_sq = f64::INFINITY;
    if k >= 2 {
        for _ in 0..pair_samples {
            let i = rng.random_range(0..k);
            let mut j = rng.random_range(0..k - 1);
            if j >= i {
                j += 1;
            }
            min_sq = min_sq.min(sq_dist(inst.centers.center(i), inst.centers.center(j)));
        }
    }
    let worst = min_separation_sweep(inst);
    let pairwise_threshold = d as f64 / 12.0;
    let separation_threshold = eps * k as f64 / 4.0;
    Ok(LbVerifyReport {
        k,
        d,
        eps,
        pair_samples,
        min_pairwise_sq_dist: min_sq,
        pairwise_threshold,
        pairwise_ok: min_sq >= pairwise_threshold,
        min_cut_separation: worst.count,
        worst_cut: worst,
        separation_threshold,
        separation_ok: worst.count as f64 >= separation_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lb_parameters() {
        let (d, eps) = lb_kmeans_params(10_000, &LbOptions::default()).unwrap();
        assert_eq!(d, 2764);
        assert!((eps - 0.276310).abs() < 5e-7);
        let (d, eps) = lb_kmeans_params(6000, &LbOptions::default()).unwrap();
        assert_eq!(d, 2610);
        assert!((eps - 0.43497).abs() < 1e-5);
        assert!(lb_kmeans_params(100, &LbOptions::default()).is_err());
        let forced = LbOptions { force: true, ..LbOptions::default() };
        assert!(lb_kmeans_params(100, &forced).unwrap().1 > 13.8);
    }

    #[test]
    fn mixture_shape_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let inst = gen_mixture(3, 2, 30, 0.1, Objective::L1, &mut rng).unwrap();
        assert_eq!(inst.data.len(), 30);
        assert_eq!(inst.k(), 3);
        assert!(inst.assignment.iter().all(|&a| a < 3));

        let a = gen_mixture(4, 3, 50, 0.2, Objective::L1, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = gen_mixture(4, 3, 50, 0.2, Objective::L1, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a.data, b.data);
        assert_eq!(a.centers, b.centers);

        let z = gen_mixture(3, 2, 20, 0.0, Objective::L2Squared, &mut rng).unwrap();
        assert_eq!(
            crate::points::clustering_cost(&z.data, &z.centers, Objective::L2Squared).unwrap(),
            0.0
        );
        assert!(gen_mixture(5, 2, 4, 0.1, Objective::L1, &mut rng).is_err());
    }

    #[test]
    fn seeding_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data = Dataset::new(
            vec![vec![0.0], vec![1.0], vec![1.0], vec![3.0]],
            None,
        )
        .unwrap();
        let c = kmeanspp_seed(&data, 3, Objective::L2Squared, &mut rng).unwrap();
        let mut got: Vec<f64> = c.iter().map(|p| p[0]).collect();
        got.sort_by(f64::total_cmp);
        assert_eq!(got, vec![0.0, 1.0, 3.0]);
        assert_eq!(kmeanspp_seed(&data, 1, Objective::L1, &mut rng).unwrap().len(), 1);
        assert!(kmeanspp_seed(&data, 4, Objective::L1, &mut rng).is_err());
    }

    #[test]
    fn lb_kmeans_parameters() {
        // ⌈300 ln 10⁴⌉ and 300 ln 10⁴ / 10⁴, evaluated independently.
        let k = 10_000usize;
        let ln = 9.210_340_371_976_184_f64;
        assert_eq!(lb_dimension(k, 300.0), 2764);
        assert!((300.0 * ln / 1e4 - 0.276_310).abs() < 1e-6);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let opts = LbOptions {
            d_const: 3.0,
            eps_const: 0.5,
            ..LbOptions::default()
        };
        let inst = gen_lb_kmeans(40, &mut rng, &opts).unwrap();
        assert_eq!(inst.data.len(), 120);
        assert_eq!(inst.data.weights().iter().filter(|&&w| w == 1.0).count(), 80);
        assert_eq!(inst.data.weights().iter().filter(|&&w| w == 1600.0).count(), 40);
        let opt = inst.known_opt.unwrap();
        assert!((inst.assignment_cost().unwrap() - opt).abs() <= 1e-9 * opt);

        let err = gen_lb_kmeans(100, &mut rng, &LbOptions::default()).unwrap_err();
        assert!(err.to_string().contains("smallest feasible k"), "{err}");
    }

    #[test]
    fn min_feasible_k_is_a_boundary() {
        let m = min_feasible_k(300.0).unwrap();
        let f = |k: usize| 300.0 * (k as f64).ln() / k as f64;
        assert!(f(m) < 1.0 && f(m - 1) >= 1.0);
    }

    #[test]
    fn lb_l2_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let opts = LbOptions {
            d_const: 2.0,
            ..LbOptions::default()
        };
        let inst = gen_lb_l2medians(100, &mut rng, &opts).unwrap();
        let eps = inst.eps.unwrap();
        assert_eq!(eps, 0.2);
        for c in inst.centers.iter() {
            for &v in c {
                let q = v / eps;
                assert!((q - q.round()).abs() < 1e-9 && (0.0..=1.0).contains(&v));
            }
        }
        let opt = inst.known_opt.unwrap();
        assert!((inst.assignment_cost().unwrap() - opt).abs() <= 1e-9 * opt);
    }

    #[test]
    fn sweep_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let k = rng.random_range(2..=50);
            let opts = LbOptions {
                d_const: 1.0,
                eps_const: 0.2 * k as f64 / (k as f64).ln(),
                force: true,
                colocated_weight: None,
            };
            let inst = gen_lb_kmeans(k, &mut rng, &opts).unwrap();
            assert_eq!(
                min_separation_sweep(&inst).count,
                min_separation_brute(&inst).count
            );
        }
    }
}
