//! Points, weighted datasets, center sets and the three clustering objectives.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite point in `R^d`, `d >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::ZeroDimension);
        }
        if let Some(column) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { row: 0, column });
        }
        Ok(Point(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Clustering objective: k-medians in l1, k-medians in l2, or k-means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Objective {
    #[serde(rename = "l1")]
    L1,
    #[serde(rename = "l2")]
    L2,
    #[serde(rename = "l2sq")]
    L2Squared,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::L1 => "l1",
            Objective::L2 => "l2",
            Objective::L2Squared => "l2sq",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Objective::L1),
            "l2" => Ok(Objective::L2),
            "l2sq" | "l2squared" | "kmeans" => Ok(Objective::L2Squared),
            other => Err(Error::InvalidParameter(format!("unknown objective `{other}`"))),
        }
    }
}

/// Distance between two points under `obj`, without a dimension check.
#[inline]
pub(crate) fn dist_unchecked(x: &[f64], y: &[f64], obj: Objective) -> f64 {
    match obj {
        Objective::L1 => l1_dist(x, y),
        Objective::L2 => sq_dist(x, y).sqrt(),
        Objective::L2Squared => sq_dist(x, y),
    }
}

const LANES: usize = 8;

/// Sum of `f(a, b)` over paired coordinates with independent accumulators,
/// which lets the compiler vectorize the loop.
#[inline]
fn lane_sum(x: &[f64], y: &[f64], f: impl Fn(f64, f64) -> f64) -> f64 {
    let mut acc = [0.0; LANES];
    let xs = x.chunks_exact(LANES);
    let ys = y.chunks_exact(LANES);
    let (xr, yr) = (xs.remainder(), ys.remainder());
    for (cx, cy) in xs.zip(ys) {
        for l in 0..LANES {
            acc[l] += f(cx[l], cy[l]);
        }
    }
    let mut tail = 0.0;
    for (a, b) in xr.iter().zip(yr) {
        tail += f(*a, *b);
    }
    acc.iter().sum::<f64>() + tail
}

#[inline]
pub(crate) fn l1_dist(x: &[f64], y: &[f64]) -> f64 {
    lane_sum(x, y, |a, b| (a - b).abs())
}

#[inline]
pub(crate) fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    lane_sum(x, y, |a, b| (a - b) * (a - b))
}

/// Coordinates summed between early-exit checks in [`CenterSet::nearest`].
const BLOCK: usize = 256;

/// `l1` or squared `l2` distance, or `None` once a partial sum exceeds
/// `bound`. Agrees with the unbounded kernels up to rounding.
#[inline]
fn bounded_dist(x: &[f64], y: &[f64], squared: bool, bound: f64) -> Option<f64> {
    let mut total = 0.0;
    for (bx, by) in x.chunks(BLOCK).zip(y.chunks(BLOCK)) {
        total += if squared { sq_dist(bx, by) } else { l1_dist(bx, by) };
        if total > bound {
            return None;
        }
    }
    Some(total)
}

/// `‖x−y‖₁`, `‖x−y‖₂` or `‖x−y‖₂²` depending on `obj`.
pub fn distance(x: &[f64], y: &[f64], obj: Objective) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(dist_unchecked(x, y, obj))
}

fn check_rows(rows: &[Vec<f64>]) -> Result<usize> {
    let dim = rows.first().map(Vec::len).unwrap_or(0);
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    for (r, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: row.len(),
            });
        }
        if let Some(column) = row.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { row: r, column });
        }
    }
    Ok(dim)
}

/// Weighted points stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset; `weights` defaults to all ones.
    ///
    /// An empty `rows` is allowed only through [`Dataset::empty`], since the
    /// dimension cannot be inferred.
    pub fn new(rows: Vec<Vec<f64>>, weights: Option<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("dataset"));
        }
        let dim = check_rows(&rows)?;
        let n = rows.len();
        let weights = weights.unwrap_or_else(|| vec![1.0; n]);
        if weights.len() != n {
            return Err(Error::InvalidParameter(format!(
                "{} weights for {} points",
                weights.len(),
                n
            )));
        }
        for (row, &w) in weights.iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidWeight { row, value: w });
            }
        }
        Ok(Dataset {
            dim,
            coords: rows.into_iter().flatten().collect(),
            weights,
        })
    }

    pub fn empty(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Dataset {
            dim,
            coords: Vec::new(),
            weights: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&[f64], f64)> + '_ {
        self.coords
            .chunks_exact(self.dim)
            .zip(self.weights.iter().copied())
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.coords.chunks_exact(self.dim).map(<[f64]>::to_vec).collect()
    }

    /// Appends one weighted point.
    pub fn push(&mut self, point: &[f64], weight: f64) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: point.len(),
            });
        }
        if let Some(column) = point.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                row: self.len(),
                column,
            });
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::InvalidWeight {
                row: self.len(),
                value: weight,
            });
        }
        self.coords.extend_from_slice(point);
        self.weights.push(weight);
        Ok(())
    }
}

impl From<&CenterSet> for Dataset {
    fn from(c: &CenterSet) -> Self {
        Dataset {
            dim: c.dim,
            coords: c.coords.clone(),
            weights: vec![1.0; c.len()],
        }
    }
}

/// The reference centers `c^1, …, c^k`: nonempty and pairwise distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterSet {
    dim: usize,
    coords: Vec<f64>,
}

impl CenterSet {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("center set"));
        }
        let dim = check_rows(&rows)?;
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            // +0.0 and -0.0 name the same location.
            let key = row.iter().map(|&c| (c + 0.0).to_bits()).collect();
            if let Some(first) = seen.insert(key, i) {
                return Err(Error::CoincidentCenters { first, second: i });
            }
        }
        Ok(CenterSet {
            dim,
            coords: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of centers `k`.
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn center(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }

    /// Index and distance of the nearest center to `x`; ties go to the lowest index.
    pub fn nearest(&self, x: &[f64], obj: Objective) -> (usize, f64) {
        self.nearest_many(&[x], obj)[0]
    }

    /// [`nearest`](Self::nearest) for several points at once. Points are
    /// processed in tiles against each center row, so a row is read from
    /// memory once per tile rather than once per point.
    pub fn nearest_many(&self, points: &[&[f64]], obj: Objective) -> Vec<(usize, f64)> {
        let mut best = vec![(0, f64::INFINITY); points.len()];
        if self.dim <= BLOCK {
            for (x, b) in points.iter().zip(best.iter_mut()) {
                for (i, c) in self.iter().enumerate() {
                    let d = dist_unchecked(x, c, obj);
                    if d < b.1 {
                        *b = (i, d);
                    }
                }
            }
            return best;
        }
        // High dimension: abandon a center once its partial sum is already
        // worse, then recompute the winner with the plain kernel.
        let squared = obj != Objective::L1;
        for (tile, tile_best) in points.chunks(TILE).zip(best.chunks_mut(TILE)) {
            for (i, c) in self.iter().enumerate() {
                for (x, b) in tile.iter().zip(tile_best.iter_mut()) {
                    if let Some(d) = bounded_dist(x, c, squared, b.1) {
                        if d < b.1 {
                            *b = (i, d);
                        }
                    }
                }
            }
        }
        for (x, b) in points.iter().zip(best.iter_mut()) {
            b.1 = dist_unchecked(x, self.center(b.0), obj);
        }
        best
    }
}

/// Points per tile in [`CenterSet::nearest_many`].
const TILE: usize = 32;

/// `Σ_x w(x) · min_{c∈C} dist(x, c)`. An empty dataset costs 0.
pub fn clustering_cost(data: &Dataset, centers: &CenterSet, obj: Objective) -> Result<f64> {
    if data.dim() != centers.dim() {
        return Err(Error::DimensionMismatch {
            expected: centers.dim(),
            found: data.dim(),
        });
    }
    let points: Vec<&[f64]> = data.iter().map(|(x, _)| x).collect();
    Ok(centers
        .nearest_many(&points, obj)
        .iter()
        .zip(data.weights())
        .map(|(&(_, d), w)| w * d)
        .sum())
}

/// Cost of a fixed assignment of data rows to centers.
pub fn assignment_cost(
    data: &Dataset,
    centers: &CenterSet,
    assignment: &[usize],
    obj: Objective,
) -> Result<f64> {
    if data.dim() != centers.dim() {
        return Err(Error::DimensionMismatch {
            expected: centers.dim(),
            found: data.dim(),
        });
    }
    if assignment.len() != data.len() {
        return Err(Error::InvalidParameter(format!(
            "assignment has {} entries for {} points",
            assignment.len(),
            data.len()
        )));
    }
    let mut total = 0.0;
    for ((x, w), &a) in data.iter().zip(assignment) {
        if a >= centers.len() {
            return Err(Error::InvalidParameter(format!(
                "assignment index {a} out of range for k = {}",
                centers.len()
            )));
        }
        total += w * dist_unchecked(x, centers.center(a), obj);
    }
    Ok(total)
}
