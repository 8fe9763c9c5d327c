//! Optimal single-cluster centers: weighted median, mean and geometric median.

use crate::error::{Error, Result};
use crate::points::{sq_dist, Dataset, Objective, Point};

const WEISZFELD_TOL: f64 = 1e-9;
const WEISZFELD_MAX_ITER: usize = 1000;
const WEISZFELD_NUDGE: f64 = 1e-12;

/// Lower weighted median: the smallest value whose cumulative weight reaches
/// half of the total.
pub fn lower_weighted_median(values: &mut [(f64, f64)]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = values.iter().map(|v| v.1).sum();
    let mut cum = 0.0;
    for &(v, w) in values.iter() {
        cum += w;
        if 2.0 * cum >= total {
            return Some(v);
        }
    }
    values.last().map(|v| v.0)
}

/// Center minimizing the weighted cost of the rows `members` of `data`.
///
/// `L1` gives the coordinate-wise lower weighted median, `L2Squared` the
/// weighted mean and `L2` the geometric median (Weiszfeld).
pub fn leaf_center(data: &Dataset, members: &[usize], obj: Objective) -> Result<Point> {
    if members.is_empty() {
        return Err(Error::Empty("cluster"));
    }
    let coords = match obj {
        Objective::L1 => coordinate_median(data, members),
        Objective::L2Squared => weighted_mean(data, members),
        Objective::L2 => geometric_median(data, members),
    };
    Point::new(coords)
}

/// [`leaf_center`] over every row of `data`.
pub fn dataset_center(data: &Dataset, obj: Objective) -> Result<Point> {
    let all: Vec<usize> = (0..data.len()).collect();
    leaf_center(data, &all, obj)
}

fn coordinate_median(data: &Dataset, members: &[usize]) -> Vec<f64> {
    let mut buf = Vec::with_capacity(members.len());
    (0..data.dim())
        .map(|j| {
            buf.clear();
            buf.extend(members.iter().map(|&i| (data.point(i)[j], data.weight(i))));
            lower_weighted_median(&mut buf).expect("nonempty")
        })
        .collect()
}

fn weighted_mean(data: &Dataset, members: &[usize]) -> Vec<f64> {
    let mut acc = vec![0.0; data.dim()];
    let mut total = 0.0;
    for &i in members {
        let w = data.weight(i);
        total += w;
        for (a, x) in acc.iter_mut().zip(data.point(i)) {
            *a += w * x;
        }
    }
    acc.iter_mut().for_each(|a| *a /= total);
    acc
}

fn l2_objective(data: &Dataset, members: &[usize], y: &[f64]) -> f64 {
    members
        .iter()
        .map(|&i| data.weight(i) * sq_dist(data.point(i), y).sqrt())
        .sum()
}

/// Kuhn's optimality test for an input point: `x_j` is a geometric median iff
/// the weighted unit pull of the other points has norm at most `w_j`.
fn input_point_is_optimal(data: &Dataset, members: &[usize], j: usize) -> bool {
    let xj = data.point(j);
    let mut pull = vec![0.0; data.dim()];
    let mut own = 0.0;
    for &i in members {
        let xi = data.point(i);
        let d = sq_dist(xi, xj).sqrt();
        if d == 0.0 {
            own += data.weight(i);
            continue;
        }
        let s = data.weight(i) / d;
        for (p, (a, b)) in pull.iter_mut().zip(xi.iter().zip(xj)) {
            *p += s * (a - b);
        }
    }
    sq_dist(&pull, &vec![0.0; pull.len()]).sqrt() <= own
}

fn geometric_median(data: &Dataset, members: &[usize]) -> Vec<f64> {
    let dim = data.dim();
    let mut y = weighted_mean(data, members);
    let mut next = vec![0.0; dim];
    for _ in 0..WEISZFELD_MAX_ITER {
        next.iter_mut().for_each(|v| *v = 0.0);
        let mut denom = 0.0;
        let mut landed = false;
        for &i in members {
            let x = data.point(i);
            let d = sq_dist(x, &y).sqrt();
            if d == 0.0 {
                landed = true;
                break;
            }
            let s = data.weight(i) / d;
            denom += s;
            for (n, xv) in next.iter_mut().zip(x) {
                *n += s * xv;
            }
        }
        if landed {
            y[0] += WEISZFELD_NUDGE;
            continue;
        }
        next.iter_mut().for_each(|v| *v /= denom);
        let step = sq_dist(&next, &y).sqrt();
        std::mem::swap(&mut y, &mut next);
        let scale = 1.0 + sq_dist(&y, &vec![0.0; dim]).sqrt();
        if step <= WEISZFELD_TOL * scale {
            break;
        }
    }

    // Weiszfeld approaches an optimum sitting on an input point only
    // sublinearly; test the nearest input point directly.
    let nearest = members
        .iter()
        .copied()
        .min_by(|&a, &b| sq_dist(data.point(a), &y).total_cmp(&sq_dist(data.point(b), &y)))
        .expect("nonempty");
    if input_point_is_optimal(data, members, nearest)
        || l2_objective(data, members, data.point(nearest)) < l2_objective(data, members, &y)
    {
        return data.point(nearest).to_vec();
    }
    y
}
