//! Per-coordinate ordered sets of centers used by the fast l1 builder.

use std::collections::BTreeSet;
use std::ops::Bound;

use crate::points::CenterSet;

/// Order-preserving map from `f64` to `u64` (after folding `-0.0` into `0.0`).
#[inline]
pub(crate) fn key(x: f64) -> u64 {
    let b = (x + 0.0).to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

#[inline]
pub(crate) fn unkey(k: u64) -> f64 {
    if k >> 63 == 1 {
        f64::from_bits(k & !(1 << 63))
    } else {
        f64::from_bits(!k)
    }
}

/// `d` ordered multisets over the centers of one leaf; the `i`-th is keyed by
/// coordinate `i` with the center index as tie-break.
#[derive(Debug, Clone)]
pub struct CoordinateSets {
    sets: Vec<BTreeSet<(u64, u32)>>,
    len: usize,
}

/// Which side of a cut a group of centers lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl CoordinateSets {
    pub fn new(centers: &CenterSet, members: &[u32]) -> Self {
        let sets = (0..centers.dim())
            .map(|j| {
                members
                    .iter()
                    .map(|&i| (key(centers.center(i as usize)[j]), i))
                    .collect()
            })
            .collect();
        CoordinateSets {
            sets,
            len: members.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.sets.len()
    }

    pub fn min(&self, coord: usize) -> Option<f64> {
        self.sets[coord].first().map(|&(k, _)| unkey(k))
    }

    pub fn max(&self, coord: usize) -> Option<f64> {
        self.sets[coord].last().map(|&(k, _)| unkey(k))
    }

    /// Any one member.
    pub fn first_member(&self) -> Option<u32> {
        self.sets.first().and_then(|s| s.first()).map(|&(_, i)| i)
    }

    /// Finds the side of `x[coord] <= threshold` holding fewer centers and
    /// returns it with its members. Both sides are walked in lockstep, so the
    /// cost is proportional to the smaller side. Ties go to the right side.
    pub fn smaller_side(&self, coord: usize, threshold: f64) -> (Side, Vec<u32>) {
        let set = &self.sets[coord];
        let pivot = (key(threshold), u32::MAX);
        let mut left = set.range(..=pivot).rev();
        let mut right = set.range((Bound::Excluded(pivot), Bound::Unbounded));
        let mut l_items = Vec::new();
        let mut r_items = Vec::new();
        loop {
            match right.next() {
                None => return (Side::Right, r_items),
                Some(&(_, i)) => r_items.push(i),
            }
            match left.next() {
                None => return (Side::Left, l_items),
                Some(&(_, i)) => l_items.push(i),
            }
        }
    }

    /// Removes `members` from every coordinate set.
    pub fn remove(&mut self, centers: &CenterSet, members: &[u32]) {
        self.split_off(centers, members);
    }

    /// Moves `members` out into new sets of their own. Keys are removed in
    /// sorted order, so consecutive removals touch neighbouring nodes, and the
    /// same sorted run bulk-loads the new sets.
    pub fn split_off(&mut self, centers: &CenterSet, members: &[u32]) -> CoordinateSets {
        let dim = self.sets.len();
        let mut keys: Vec<(u64, u32)> = Vec::with_capacity(members.len());
        let mut sets = Vec::with_capacity(dim);
        for (j, set) in self.sets.iter_mut().enumerate() {
            keys.clear();
            keys.extend(members.iter().map(|&i| (key(centers.center(i as usize)[j]), i)));
            keys.sort_unstable();
            for k in &keys {
                let removed = set.remove(k);
                debug_assert!(removed, "center {} missing from coordinate set", k.1);
            }
            sets.push(keys.iter().copied().collect::<BTreeSet<_>>());
        }
        self.len -= members.len();
        CoordinateSets {
            sets,
            len: members.len(),
        }
    }
}
