//! Explainable k-medians and k-means clustering with threshold decision trees.
//!
//! Given reference centers, the builders produce a binary tree of axis-aligned
//! cuts with one center per leaf:
//!
//! - [`l1::build_l1`] and [`l1::build_l1_fast`] for k-medians in l1,
//! - [`l2::build_l2`] for k-medians in l2,
//! - [`embed::build_kmeans_tree`] for k-means, through a cut-preserving
//!   terminal embedding of squared l2 into l1.
//!
//! [`tree::tree_cost`] measures the cost of the resulting clustering against
//! the unconstrained one, and [`instances`] generates workloads, including
//! hard instances for explainable k-means and l2 k-medians.

pub mod algorithm;
pub mod center;
pub mod cli;
pub mod cutspace;
pub mod embed;
mod error;
pub mod instances;
pub mod io;
pub mod l1;
pub mod l2;
pub mod ordered;
pub mod points;
pub mod seed;
pub mod tree;

pub use algorithm::{build_tree, Algorithm, BuildStats};
pub use center::{dataset_center, leaf_center};
pub use cutspace::{delta, IntervalUnion, ThresholdCut};
pub use error::{Error, Result};
pub use points::{clustering_cost, distance, CenterSet, Dataset, Objective, Point};
pub use tree::{tree_cost, CenterMode, ThresholdTree, TreeCostReport};
