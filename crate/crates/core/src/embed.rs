//! Coordinate-cut-preserving terminal embedding of squared l2 into l1, and
//! the k-means tree pipeline built on it.
//!
//! On one coordinate with sorted terminals `y_1 < … < y_m`, terminal `y_i` is
//! sent to `z_i = ½ Σ_{j<i} (y_{j+1} − y_j)²` and any other `x` to
//! `z_i + sign(x − y_i)(x − y_i)²` with `y_i` the closest terminal. The map is
//! continuous and strictly increasing, and for every terminal `y`
//!
//! ```text
//! |ψ(x) − ψ(y)| ≤ |x − y|² ≤ 8m · |ψ(x) − ψ(y)|.
//! ```
//!
//! Being monotone per coordinate, it maps threshold cuts to threshold cuts,
//! so a tree built on the embedded centers pulls back exactly.

use rand::Rng;

use crate::cutspace::ThresholdCut;
use crate::error::{Error, Result};
use crate::l1::{build_l1, build_l1_fast, BuildOptions};
use crate::ordered::{key, unkey};
use crate::points::CenterSet;
use crate::tree::ThresholdTree;

/// One-dimensional embedding with breakpoints `y` and images `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalEmbedding1D {
    y: Vec<f64>,
    z: Vec<f64>,
}

impl TerminalEmbedding1D {
    /// Fits the embedding to a nonempty terminal set; duplicates collapse.
    pub fn fit(terminals: &[f64]) -> Result<Self> {
        if terminals.is_empty() {
            return Err(Error::Empty("terminal set"));
        }
        if terminals.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("non-finite terminal".into()));
        }
        let mut y = terminals.to_vec();
        y.sort_by(f64::total_cmp);
        y.dedup_by(|a, b| a == b);
        let mut z = Vec::with_capacity(y.len());
        let mut acc = 0.0;
        z.push(acc);
        for w in y.windows(2) {
            acc += 0.5 * (w[1] - w[0]) * (w[1] - w[0]);
            z.push(acc);
        }
        Ok(TerminalEmbedding1D { y, z })
    }

    pub fn terminals(&self) -> &[f64] {
        &self.y
    }

    pub fn images(&self) -> &[f64] {
        &self.z
    }

    /// Index of the closest terminal; midpoint ties go left.
    fn closest(&self, x: f64) -> usize {
        let idx = self.y.partition_point(|&t| t <= x);
        if idx == 0 {
            return 0;
        }
        if idx == self.y.len() {
            return idx - 1;
        }
        let (l, r) = (idx - 1, idx);
        if x - self.y[l] <= self.y[r] - x {
            l
        } else {
            r
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        let i = self.closest(x);
        let d = x - self.y[i];
        self.z[i] + d.signum() * d * d
    }

    /// `ψ(x) − ψ(y_j)` for the `j`-th terminal, evaluated as
    /// `(z_i − z_j) ± (x − y_i)²` so that points next to their own terminal
    /// do not lose precision to cancellation.
    pub fn offset_from_terminal(&self, x: f64, j: usize) -> f64 {
        let i = self.closest(x);
        let d = x - self.y[i];
        let square = d.signum() * d * d;
        if i == j {
            square
        } else {
            (self.z[i] - self.z[j]) + square
        }
    }

    /// Position of `t` among the terminals, if it is one.
    pub fn terminal_index(&self, t: f64) -> Option<usize> {
        self.y.binary_search_by(|v| v.total_cmp(&(t + 0.0))).ok()
    }

    /// Closed-form inverse of [`apply`](Self::apply).
    pub fn invert(&self, theta: f64) -> f64 {
        let m = self.y.len();
        let j = self.z.partition_point(|&v| v <= theta);
        if j == 0 {
            return self.y[0] - (self.z[0] - theta).sqrt();
        }
        if j == m {
            return self.y[m - 1] + (theta - self.z[m - 1]).sqrt();
        }
        let (lo, hi) = (self.z[j - 1], self.z[j]);
        if theta - lo <= hi - theta {
            self.y[j - 1] + (theta - lo).sqrt()
        } else {
            self.y[j] - (hi - theta).sqrt()
        }
    }

    /// Threshold `t'` with `{x ≤ t'} = {x : ψ(x) ≤ t}` under the
    /// floating-point evaluation of `ψ`: the largest `t'` with `ψ(t') ≤ t`,
    /// found by bisection on the bit pattern around the closed-form inverse.
    pub fn pull_back(&self, theta: f64) -> f64 {
        let guess = self.invert(theta);
        let below = |x: f64| self.apply(x) <= theta;
        // Bracket: below(lo) && !below(hi), widening geometrically in ulps.
        let (mut lo, mut hi) = (key(guess), key(guess));
        let mut step = 1u64;
        while !below(unkey(lo)) {
            hi = lo;
            lo = lo.saturating_sub(step);
            step = step.saturating_mul(2);
        }
        step = 1;
        while below(unkey(hi)) {
            lo = hi;
            hi = hi.saturating_add(step).min(key(f64::MAX));
            step = step.saturating_mul(2);
            if lo == hi {
                return f64::MAX;
            }
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if below(unkey(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        unkey(lo)
    }
}

/// Per-coordinate embedding whose terminals are the centers' coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalEmbedding {
    coords: Vec<TerminalEmbedding1D>,
}

impl TerminalEmbedding {
    pub fn fit(centers: &CenterSet) -> Result<Self> {
        let coords = (0..centers.dim())
            .map(|j| {
                let values: Vec<f64> = centers.iter().map(|c| c[j]).collect();
                TerminalEmbedding1D::fit(&values)
            })
            .collect::<Result<_>>()?;
        Ok(TerminalEmbedding { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coordinate(&self, j: usize) -> &TerminalEmbedding1D {
        &self.coords[j]
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(x.iter().zip(&self.coords).map(|(&v, e)| e.apply(v)).collect())
    }

    pub fn apply_centers(&self, centers: &CenterSet) -> Result<CenterSet> {
        let rows = centers
            .iter()
            .map(|c| self.apply(c))
            .collect::<Result<Vec<_>>>()?;
        CenterSet::new(rows)
    }

    /// `‖ψ(x) − ψ(y)‖₁` for a point `y` whose every coordinate is a terminal.
    pub fn distance_to_terminal(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        for v in [x, y] {
            if v.len() != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    found: v.len(),
                });
            }
        }
        let mut total = 0.0;
        for (c, e) in self.coords.iter().enumerate() {
            let j = e.terminal_index(y[c]).ok_or_else(|| {
                Error::InvalidParameter(format!("{} is not a terminal on coordinate {c}", y[c]))
            })?;
            total += e.offset_from_terminal(x[c], j).abs();
        }
        Ok(total)
    }

    /// Cut in the original space equivalent to `cut` in the embedded space.
    pub fn invert_threshold(&self, cut: &ThresholdCut) -> Result<ThresholdCut> {
        let e = self.coords.get(cut.coord).ok_or(Error::DimensionMismatch {
            expected: self.dim(),
            found: cut.coord + 1,
        })?;
        Ok(ThresholdCut::new(cut.coord, e.pull_back(cut.threshold)))
    }
}

/// Which l1 builder runs on the embedded centers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmbeddedBuilder {
    #[default]
    Fast,
    Global,
}

#[derive(Debug, Clone)]
pub struct KmeansBuild {
    pub tree: ThresholdTree,
    pub embedded_tree: ThresholdTree,
    pub embedding: TerminalEmbedding,
}

/// Embeds the centers, builds an l1 tree on the images and pulls every cut
/// back to the original space. Leaf labels are unchanged.
pub fn build_kmeans_tree_full<R: Rng + ?Sized>(
    centers: &CenterSet,
    rng: &mut R,
    builder: EmbeddedBuilder,
    opts: &BuildOptions,
) -> Result<KmeansBuild> {
    let embedding = TerminalEmbedding::fit(centers)?;
    let embedded = embedding.apply_centers(centers)?;
    let embedded_tree = match builder {
        EmbeddedBuilder::Fast => build_l1_fast(&embedded, rng)?,
        EmbeddedBuilder::Global => build_l1(&embedded, rng, opts)?,
    };
    let tree = embedded_tree.map_cuts(|c| {
        embedding
            .invert_threshold(c)
            .expect("tree cuts are within dimension")
    })?;
    Ok(KmeansBuild {
        tree,
        embedded_tree,
        embedding,
    })
}

pub fn build_kmeans_tree<R: Rng + ?Sized>(
    centers: &CenterSet,
    rng: &mut R,
    builder: EmbeddedBuilder,
    opts: &BuildOptions,
) -> Result<ThresholdTree> {
    build_kmeans_tree_full(centers, rng, builder, opts).map(|b| b.tree)
}
