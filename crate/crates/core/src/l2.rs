//! Threshold trees for k-medians in l2.
//!
//! Each node fixes the coordinate-wise median `m` of its centers and then
//! repeatedly cuts the part containing `m` (the main part) with
//! `(i, m_i + σ√θ)`, `i` uniform, `θ` uniform in `[0, R²]`, `σ = ±1`, where `R`
//! is the largest l2 distance from `m` to a main-part center. Cuts that do
//! not split the main part are discarded. Once the main part holds at most
//! half of the node's centers, every piece is handled recursively.

use rand::Rng;

use crate::center::lower_weighted_median;
use crate::cutspace::ThresholdCut;
use crate::error::{Error, Result};
use crate::ordered::Side;
use crate::points::{sq_dist, CenterSet};
use crate::seed::{derive_seed, rng_from_seed};
use crate::tree::{Node, NodeId, ThresholdTree};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Options {
    /// Cap on candidate cuts drawn in one partition call.
    pub max_draws: usize,
}

impl Default for L2Options {
    fn default() -> Self {
        L2Options {
            max_draws: 1_000_000,
        }
    }
}

/// One accepted cut of a partition call.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionStep {
    pub cut: ThresholdCut,
    /// Side of `cut` that contains the median and stays the main part.
    pub main_side: Side,
    /// Main-part radius the cut was drawn with.
    pub radius: f64,
    /// Centers cut away from the main part.
    pub split_off: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub median: Vec<f64>,
    pub steps: Vec<PartitionStep>,
    /// Main part when the loop stops.
    pub main: Vec<usize>,
    /// Candidate cuts drawn, accepted or not.
    pub draws: usize,
}

impl Partition {
    /// Split-off pieces in order, then the final main part.
    pub fn parts(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.steps
            .iter()
            .map(|s| s.split_off.as_slice())
            .chain(std::iter::once(self.main.as_slice()))
    }
}

/// Coordinate-wise lower median of `members`.
pub fn coordinate_median(centers: &CenterSet, members: &[usize]) -> Vec<f64> {
    let mut buf = Vec::with_capacity(members.len());
    (0..centers.dim())
        .map(|j| {
            buf.clear();
            buf.extend(members.iter().map(|&i| (centers.center(i)[j], 1.0)));
            lower_weighted_median(&mut buf).expect("nonempty")
        })
        .collect()
}

/// Splits `members` into pieces of at most half their number by cutting
/// around their median.
pub fn partition_leaf<R: Rng + ?Sized>(
    centers: &CenterSet,
    members: &[usize],
    rng: &mut R,
    opts: &L2Options,
) -> Result<Partition> {
    let n = members.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "partition needs at least 2 centers, got {n}"
        )));
    }
    let dim = centers.dim();
    let median = coordinate_median(centers, members);
    let mut main = members.to_vec();
    let mut steps = Vec::new();
    let mut draws = 0;
    while 2 * main.len() > n {
        let radius = main
            .iter()
            .map(|&c| sq_dist(centers.center(c), &median))
            .fold(0.0, f64::max)
            .sqrt();
        loop {
            if draws >= opts.max_draws {
                return Err(Error::SamplerStalled(draws));
            }
            draws += 1;
            let coord = rng.random_range(0..dim);
            let theta = rng.random::<f64>() * radius * radius;
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let cut = ThresholdCut::new(coord, median[coord] + sign * theta.sqrt());
            let (left, right): (Vec<usize>, Vec<usize>) = main
                .iter()
                .partition(|&&c| cut.goes_left(centers.center(c)));
            if left.is_empty() || right.is_empty() {
                continue;
            }
            let (main_side, kept, split_off) = if cut.goes_left(&median) {
                (Side::Left, left, right)
            } else {
                (Side::Right, right, left)
            };
            main = kept;
            steps.push(PartitionStep {
                cut,
                main_side,
                radius,
                split_off,
            });
            break;
        }
    }
    Ok(Partition {
        median,
        steps,
        main,
        draws,
    })
}

/// Summary of one partition call inside [`build_l2_traced`].
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionRecord {
    /// Recursion level, root = 0.
    pub level: usize,
    pub input_size: usize,
    pub part_sizes: Vec<usize>,
    pub radii: Vec<f64>,
    pub draws: usize,
}

pub fn build_l2<R: Rng + ?Sized>(
    centers: &CenterSet,
    rng: &mut R,
    opts: &L2Options,
) -> Result<ThresholdTree> {
    build_l2_traced(centers, rng, opts).map(|(t, _)| t)
}

/// [`build_l2`] plus one [`PartitionRecord`] per partition call. Every call
/// runs on its own generator seeded by `derive_seed(parent, child index)`,
/// starting from one seed drawn from `rng`.
pub fn build_l2_traced<R: Rng + ?Sized>(
    centers: &CenterSet,
    rng: &mut R,
    opts: &L2Options,
) -> Result<(ThresholdTree, Vec<PartitionRecord>)> {
    let k = centers.len();
    let mut nodes = vec![Node::Leaf { center: 0 }];
    let mut records = Vec::new();
    let mut stack: Vec<(NodeId, Vec<usize>, u64, usize)> =
        vec![(0, (0..k).collect(), rng.next_u64(), 0)];
    while let Some((node, members, seed, level)) = stack.pop() {
        if members.len() == 1 {
            nodes[node] = Node::Leaf { center: members[0] };
            continue;
        }
        let mut local = rng_from_seed(seed);
        let part = partition_leaf(centers, &members, &mut local, opts)?;

        let mut current = node;
        let mut pieces: Vec<(NodeId, Vec<usize>)> = Vec::with_capacity(part.steps.len() + 1);
        for step in &part.steps {
            let l = nodes.len();
            nodes.push(Node::Leaf { center: 0 });
            nodes.push(Node::Leaf { center: 0 });
            nodes[current] = Node::Split {
                cut: step.cut,
                left: l,
                right: l + 1,
            };
            let (main_node, off_node) = match step.main_side {
                Side::Left => (l, l + 1),
                Side::Right => (l + 1, l),
            };
            pieces.push((off_node, step.split_off.clone()));
            current = main_node;
        }
        pieces.push((current, part.main.clone()));

        records.push(PartitionRecord {
            level,
            input_size: members.len(),
            part_sizes: pieces.iter().map(|(_, p)| p.len()).collect(),
            radii: part.steps.iter().map(|s| s.radius).collect(),
            draws: part.draws,
        });
        for (idx, (child, piece)) in pieces.into_iter().enumerate().rev() {
            stack.push((child, piece, derive_seed(seed, idx as u64), level + 1));
        }
    }
    let tree = ThresholdTree::from_nodes(centers.dim(), k, nodes, 0)?;
    Ok((tree, records))
}
