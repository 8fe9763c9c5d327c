//! The cut space `{0..d} × R`: threshold cuts, per-coordinate unions of
//! half-open intervals with their Lebesgue measure, and uniform cut sampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An axis-aligned cut: points with `x[coord] <= threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCut {
    pub coord: usize,
    pub threshold: f64,
}

impl ThresholdCut {
    pub fn new(coord: usize, threshold: f64) -> Self {
        ThresholdCut { coord, threshold }
    }

    /// 1 iff `x[coord] > threshold`.
    #[inline]
    pub fn delta(&self, x: &[f64]) -> u8 {
        u8::from(x[self.coord] > self.threshold)
    }

    #[inline]
    pub fn goes_left(&self, x: &[f64]) -> bool {
        x[self.coord] <= self.threshold
    }
}

/// Indicator of `x[cut.coord] > cut.threshold`.
pub fn delta(x: &[f64], cut: &ThresholdCut) -> Result<u8> {
    if cut.coord >= x.len() {
        return Err(Error::DimensionMismatch {
            expected: cut.coord + 1,
            found: x.len(),
        });
    }
    Ok(cut.delta(x))
}

/// A measurable subset of the cut space: for every coordinate, sorted
/// disjoint non-adjacent half-open intervals `[a, b)` with `a < b`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalUnion {
    coords: Vec<Vec<(f64, f64)>>,
    measure: f64,
}

fn normalize(mut iv: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    iv.retain(|&(a, b)| a < b);
    iv.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
    for (a, b) in iv {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

fn length(iv: &[(f64, f64)]) -> f64 {
    iv.iter().map(|(a, b)| b - a).sum()
}

fn intersect_1d(x: &[(f64, f64)], y: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < x.len() && j < y.len() {
        let a = x[i].0.max(y[j].0);
        let b = x[i].1.min(y[j].1);
        if a < b {
            out.push((a, b));
        }
        if x[i].1 < y[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

fn subtract_1d(x: &[(f64, f64)], y: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut j = 0;
    for &(a, b) in x {
        let mut start = a;
        while j < y.len() && y[j].1 <= start {
            j += 1;
        }
        let mut k = j;
        while k < y.len() && y[k].0 < b {
            if y[k].0 > start {
                out.push((start, y[k].0));
            }
            start = start.max(y[k].1);
            if start >= b {
                break;
            }
            k += 1;
        }
        if start < b {
            out.push((start, b));
        }
    }
    out
}

impl IntervalUnion {
    pub fn empty(dim: usize) -> Self {
        IntervalUnion {
            coords: vec![Vec::new(); dim],
            measure: 0.0,
        }
    }

    /// Builds a union from arbitrary `(coord, a, b)` triples; empty and
    /// inverted intervals are dropped, overlapping and adjacent ones merged.
    pub fn from_intervals(
        dim: usize,
        intervals: impl IntoIterator<Item = (usize, f64, f64)>,
    ) -> Result<Self> {
        let mut coords = vec![Vec::new(); dim];
        for (c, a, b) in intervals {
            if c >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c + 1,
                });
            }
            if !(a.is_finite() && b.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "unbounded interval [{a}, {b}) on coordinate {c}"
                )));
            }
            coords[c].push((a, b));
        }
        Ok(Self::from_coords(coords.into_iter().map(normalize).collect()))
    }

    fn from_coords(coords: Vec<Vec<(f64, f64)>>) -> Self {
        let measure = coords.iter().map(|iv| length(iv)).sum();
        IntervalUnion { coords, measure }
    }

    /// `{ω : δ_a(ω) ≠ δ_b(ω)}`; one interval `[min, max)` per coordinate where
    /// the two points differ.
    pub fn separating_set(a: &[f64], b: &[f64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        let coords = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| {
                if x == y {
                    Vec::new()
                } else {
                    vec![(x.min(y), x.max(y))]
                }
            })
            .collect();
        Ok(Self::from_coords(coords))
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn is_empty(&self) -> bool {
        self.coords.iter().all(Vec::is_empty)
    }

    pub fn intervals(&self, coord: usize) -> &[(f64, f64)] {
        &self.coords[coord]
    }

    pub fn coord_measure(&self, coord: usize) -> f64 {
        length(&self.coords[coord])
    }

    pub fn contains(&self, cut: &ThresholdCut) -> bool {
        let iv = &self.coords[cut.coord];
        let idx = iv.partition_point(|&(a, _)| a <= cut.threshold);
        idx > 0 && cut.threshold < iv[idx - 1].1
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self::from_coords(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(x, y)| normalize(x.iter().chain(y).copied().collect()))
                .collect(),
        ))
    }

    /// In-place union; used when accumulating many separating sets.
    pub fn union_with(&mut self, other: &Self) -> Result<()> {
        *self = self.union(other)?;
        Ok(())
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self::from_coords(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(x, y)| intersect_1d(x, y))
                .collect(),
        ))
    }

    /// `self \ other`.
    pub fn subtract(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self::from_coords(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(x, y)| subtract_1d(x, y))
                .collect(),
        ))
    }

    /// Draws a cut uniformly with respect to the measure restricted to `self`.
    pub fn sample_cut<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ThresholdCut> {
        if !(self.measure > 0.0) {
            return Err(Error::EmptyCutSet);
        }
        let weights: Vec<f64> = (0..self.dim()).map(|c| self.coord_measure(c)).collect();
        loop {
            let coord = pick_proportional(&weights, rng);
            let iv = &self.coords[coord];
            let mut s = rng.random::<f64>() * weights[coord];
            for &(a, b) in iv {
                let len = b - a;
                if s < len {
                    let t = a + s;
                    // Rounding can land exactly on the open end; redraw.
                    if t < b {
                        return Ok(ThresholdCut::new(coord, t));
                    }
                    break;
                }
                s -= len;
            }
        }
    }
}

/// Index `i` with probability `weights[i] / Σ weights`. Weights must have a
/// positive sum.
pub(crate) fn pick_proportional<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    loop {
        let mut s = rng.random::<f64>() * total;
        for (i, &w) in weights.iter().enumerate() {
            if s < w {
                return i;
            }
            s -= w;
        }
        // Only reachable through rounding in the running subtraction.
    }
}

/// Uniform cut from the box `⋃_i {i} × [lo_i, hi_i)`; `None` if every side is empty.
pub fn sample_in_box<R: Rng + ?Sized>(lo: &[f64], hi: &[f64], rng: &mut R) -> Option<ThresholdCut> {
    let lengths: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| (b - a).max(0.0)).collect();
    if !(lengths.iter().sum::<f64>() > 0.0) {
        return None;
    }
    loop {
        let coord = pick_proportional(&lengths, rng);
        let t = lo[coord] + rng.random::<f64>() * lengths[coord];
        if t < hi[coord] {
            return Some(ThresholdCut::new(coord, t));
        }
    }
}
