//! Builder selection shared by the command-line tools.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::embed::{build_kmeans_tree, EmbeddedBuilder};
use crate::error::{Error, Result};
use crate::l1::{build_l1_fast, build_l1_traced, BuildOptions};
use crate::l2::{build_l2_traced, L2Options};
use crate::points::{CenterSet, Objective};
use crate::tree::ThresholdTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    L1,
    L1Fast,
    L2,
    KmeansEmbed,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::L1 => "l1",
            Algorithm::L1Fast => "l1-fast",
            Algorithm::L2 => "l2",
            Algorithm::KmeansEmbed => "kmeans-embed",
        }
    }

    /// The objective each algorithm is designed for.
    pub fn objective(self) -> Objective {
        match self {
            Algorithm::L1 | Algorithm::L1Fast => Objective::L1,
            Algorithm::L2 => Objective::L2,
            Algorithm::KmeansEmbed => Objective::L2Squared,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(Algorithm::L1),
            "l1-fast" => Ok(Algorithm::L1Fast),
            "l2" => Ok(Algorithm::L2),
            "kmeans-embed" => Ok(Algorithm::KmeansEmbed),
            other => Err(Error::InvalidParameter(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Build statistics. `iterations` counts sampling rounds for `l1`, cuts for
/// `l1-fast` and `kmeans-embed`, and candidate draws for `l2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildStats {
    pub iterations: usize,
    pub depth: usize,
}

/// Builds a tree with `alg` and checks it against `centers` before returning.
pub fn build_tree<R: Rng + ?Sized>(
    alg: Algorithm,
    centers: &CenterSet,
    rng: &mut R,
) -> Result<(ThresholdTree, BuildStats)> {
    let (tree, iterations) = match alg {
        Algorithm::L1 => {
            let (t, trace) = build_l1_traced(centers, rng, &BuildOptions::default())?;
            (t, trace.len())
        }
        Algorithm::L1Fast => {
            let t = build_l1_fast(centers, rng)?;
            (t, centers.len() - 1)
        }
        Algorithm::L2 => {
            let (t, records) = build_l2_traced(centers, rng, &L2Options::default())?;
            (t, records.iter().map(|r| r.draws).sum())
        }
        Algorithm::KmeansEmbed => {
            let t = build_kmeans_tree(centers, rng, EmbeddedBuilder::Fast, &BuildOptions::default())?;
            (t, centers.len() - 1)
        }
    };
    tree.validate(centers)?;
    let depth = tree.depth();
    Ok((tree, BuildStats { iterations, depth }))
}
