//! Randomized threshold trees for k-medians in l1.
//!
//! [`build_l1`] samples one global cut per round from `R_t = A_t \ B_t`, where
//! `A_t` holds every cut separating some pair of centers still sharing a leaf
//! and `B_t` the cuts separating such a pair at l1 distance at most
//! `D_t / k³`. The cut is applied to every leaf at once.
//!
//! [`build_l1_fast`] samples an independent cut per leaf from the cuts that
//! separate two of that leaf's centers, and splits leaves by moving the
//! smaller side into fresh ordered sets, for `O(k d log² k)` total work.

use rand::Rng;

use crate::cutspace::{sample_in_box, IntervalUnion, ThresholdCut};
use crate::error::{Error, Result};
use crate::ordered::{CoordinateSets, Side};
use crate::points::CenterSet;
use crate::tree::{Node, NodeId, ThresholdTree};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BuildOptions {
    /// Safety cap on sampling rounds; `None` means `10 · k`.
    pub max_rounds: Option<usize>,
}

impl BuildOptions {
    fn cap(&self, k: usize) -> usize {
        self.max_rounds.unwrap_or(10 * k.max(1))
    }
}

/// The cut law of one round.
#[derive(Debug, Clone)]
pub struct CutDistribution {
    /// Largest l1 distance between two centers sharing a leaf.
    pub max_distance: f64,
    pub separating: IntervalUnion,
    pub short_pairs: IntervalUnion,
    /// `separating \ short_pairs`, the set cuts are drawn from.
    pub admissible: IntervalUnion,
}

/// Partial tree during [`build_l1`]: an arena plus the centers held by each
/// leaf that still contains two or more of them.
#[derive(Debug, Clone)]
pub struct BuildState<'a> {
    centers: &'a CenterSet,
    nodes: Vec<Node>,
    open: Vec<(NodeId, Vec<usize>)>,
    round: usize,
}

impl<'a> BuildState<'a> {
    pub fn new(centers: &'a CenterSet) -> Self {
        let mut state = BuildState {
            centers,
            nodes: vec![Node::Leaf { center: 0 }],
            open: Vec::new(),
            round: 0,
        };
        state.place(0, (0..centers.len()).collect());
        state
    }

    fn place(&mut self, node: NodeId, members: Vec<usize>) {
        if members.len() == 1 {
            self.nodes[node] = Node::Leaf { center: members[0] };
        } else {
            self.open.push((node, members));
        }
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn is_complete(&self) -> bool {
        self.open.is_empty()
    }

    /// Center groups of the leaves that still hold two or more centers.
    pub fn open_leaves(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.open.iter().map(|(_, m)| m.as_slice())
    }

    /// All pairs `(i, j)`, `i < j`, of centers sharing a leaf.
    pub fn unseparated_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for (_, m) in &self.open {
            for (a, &i) in m.iter().enumerate() {
                for &j in &m[a + 1..] {
                    pairs.push((i.min(j), i.max(j)));
                }
            }
        }
        pairs.sort_unstable();
        pairs
    }

    pub fn max_distance(&self) -> f64 {
        self.unseparated_pairs()
            .into_iter()
            .map(|(i, j)| self.pair_distance(i, j))
            .fold(0.0, f64::max)
    }

    // Summed in coordinate order, like `IntervalUnion::measure`, so a pair
    // spanning a leaf's bounding box gives exactly the separating measure.
    fn pair_distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.centers.center(i), self.centers.center(j));
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
    }

    pub fn cut_distribution(&self) -> Result<CutDistribution> {
        if self.is_complete() {
            return Err(Error::BuildComplete);
        }
        let k = self.centers.len() as f64;
        let dim = self.centers.dim();
        let pairs = self.unseparated_pairs();
        let max_distance = pairs
            .iter()
            .map(|&(i, j)| self.pair_distance(i, j))
            .fold(0.0, f64::max);
        let short_limit = max_distance / (k * k * k);

        // Within one leaf the union of the pairwise separating sets on a
        // coordinate is the span [min, max) of that leaf's centers.
        let mut spans = Vec::with_capacity(self.open.len() * dim);
        for (_, members) in &self.open {
            for j in 0..dim {
                let (lo, hi) = members.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| {
                    let v = self.centers.center(c)[j];
                    (lo.min(v), hi.max(v))
                });
                spans.push((j, lo, hi));
            }
        }
        let separating = IntervalUnion::from_intervals(dim, spans)?;

        let mut short = Vec::new();
        for &(i, j) in &pairs {
            if self.pair_distance(i, j) <= short_limit {
                let (a, b) = (self.centers.center(i), self.centers.center(j));
                short.extend(
                    a.iter()
                        .zip(b)
                        .enumerate()
                        .map(|(c, (&x, &y))| (c, x.min(y), x.max(y))),
                );
            }
        }
        let short_pairs = IntervalUnion::from_intervals(dim, short)?;
        let admissible = separating.subtract(&short_pairs)?;
        Ok(CutDistribution {
            max_distance,
            separating,
            short_pairs,
            admissible,
        })
    }

    /// Applies `cut` to every open leaf; a leaf splits only when both sides
    /// receive a center. Returns the number of leaves split.
    pub fn apply(&mut self, cut: &ThresholdCut) -> usize {
        let open = std::mem::take(&mut self.open);
        let mut splits = 0;
        for (node, members) in open {
            let (left, right): (Vec<usize>, Vec<usize>) = members
                .iter()
                .partition(|&&c| cut.goes_left(self.centers.center(c)));
            if left.is_empty() || right.is_empty() {
                self.open.push((node, members));
                continue;
            }
            let l = self.nodes.len();
            self.nodes.push(Node::Leaf { center: 0 });
            self.nodes.push(Node::Leaf { center: 0 });
            self.nodes[node] = Node::Split {
                cut: *cut,
                left: l,
                right: l + 1,
            };
            self.place(l, left);
            self.place(l + 1, right);
            splits += 1;
        }
        self.round += 1;
        splits
    }

    pub fn into_tree(self) -> Result<ThresholdTree> {
        if !self.is_complete() {
            return Err(Error::InvalidTree("build not complete".into()));
        }
        ThresholdTree::from_nodes(self.centers.dim(), self.centers.len(), self.nodes, 0)
    }
}

/// Per-round record of a [`build_l1`] run.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrace {
    pub max_distance: f64,
    pub separating_measure: f64,
    pub admissible_measure: f64,
    pub cut: ThresholdCut,
    pub splits: usize,
}

pub fn build_l1<R: Rng + ?Sized>(
    centers: &CenterSet,
    rng: &mut R,
    opts: &BuildOptions,
) -> Result<ThresholdTree> {
    build_l1_traced(centers, rng, opts).map(|(t, _)| t)
}

/// [`build_l1`] that also returns one [`RoundTrace`] per sampled cut.
pub fn build_l1_traced<R: Rng + ?Sized>(
    centers: &CenterSet,
    rng: &mut R,
    opts: &BuildOptions,
) -> Result<(ThresholdTree, Vec<RoundTrace>)> {
    let cap = opts.cap(centers.len());
    let mut state = BuildState::new(centers);
    let mut trace = Vec::new();
    let mut last_max = f64::INFINITY;
    while !state.is_complete() {
        if state.round() >= cap {
            return Err(Error::IterationCap(cap));
        }
        let dist = state.cut_distribution()?;
        if dist.max_distance > last_max {
            return Err(Error::InvalidTree(format!(
                "max co-resident distance increased from {last_max} to {}",
                dist.max_distance
            )));
        }
        last_max = dist.max_distance;
        let cut = dist.admissible.sample_cut(rng)?;
        let splits = state.apply(&cut);
        trace.push(RoundTrace {
            max_distance: dist.max_distance,
            separating_measure: dist.separating.measure(),
            admissible_measure: dist.admissible.measure(),
            cut,
            splits,
        });
    }
    Ok((state.into_tree()?, trace))
}

/// Per-leaf variant: each leaf draws its own cut uniformly from
/// `⋃_i {i} × [min_i, max_i)` over its centers and is split once.
pub fn build_l1_fast<R: Rng + ?Sized>(centers: &CenterSet, rng: &mut R) -> Result<ThresholdTree> {
    let k = centers.len();
    let dim = centers.dim();
    if k > u32::MAX as usize {
        return Err(Error::InvalidParameter(format!("k = {k} is too large")));
    }
    let mut nodes = vec![Node::Leaf { center: 0 }];
    let all: Vec<u32> = (0..k as u32).collect();
    let mut stack = vec![(0usize, CoordinateSets::new(centers, &all))];
    let mut lo = vec![0.0; dim];
    let mut hi = vec![0.0; dim];
    while let Some((node, mut sets)) = stack.pop() {
        if sets.len() == 1 {
            let c = sets.first_member().expect("one member") as usize;
            nodes[node] = Node::Leaf { center: c };
            continue;
        }
        for j in 0..dim {
            lo[j] = sets.min(j).expect("nonempty");
            hi[j] = sets.max(j).expect("nonempty");
        }
        // Distinct centers differ somewhere, so the box has positive measure.
        let cut = sample_in_box(&lo, &hi, rng).ok_or(Error::EmptyCutSet)?;
        let (side, moved) = sets.smaller_side(cut.coord, cut.threshold);
        let fresh = sets.split_off(centers, &moved);
        let l = nodes.len();
        nodes.push(Node::Leaf { center: 0 });
        nodes.push(Node::Leaf { center: 0 });
        nodes[node] = Node::Split {
            cut,
            left: l,
            right: l + 1,
        };
        let (left_sets, right_sets) = match side {
            Side::Left => (fresh, sets),
            Side::Right => (sets, fresh),
        };
        stack.push((l + 1, right_sets));
        stack.push((l, left_sets));
    }
    ThresholdTree::from_nodes(dim, k, nodes, 0)
}
