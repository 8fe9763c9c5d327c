//! Threshold trees: routing, cost evaluation and JSON serialization.
//!
//! A tree over `k` reference centers has exactly `k` leaves, each labelled
//! with a distinct center index, and every center routes to its own leaf.

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::center::leaf_center;
use crate::cutspace::ThresholdCut;
use crate::error::{Error, Result};
use crate::points::{clustering_cost, dist_unchecked, CenterSet, Dataset, Objective};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Leaf { center: usize },
    Split {
        cut: ThresholdCut,
        left: NodeId,
        right: NodeId,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTree {
    dim: usize,
    k: usize,
    nodes: Vec<Node>,
    root: NodeId,
}

/// Which center a leaf charges its points to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterMode {
    /// The leaf's own reference center.
    Reference,
    /// The optimal center of the points that reach the leaf.
    Optimal,
}

impl std::str::FromStr for CenterMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reference" => Ok(CenterMode::Reference),
            "optimal" => Ok(CenterMode::Optimal),
            other => Err(Error::InvalidParameter(format!("unknown center mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeCostReport {
    pub tree_cost: f64,
    pub reference_cost: f64,
    pub baseline_cost: f64,
    /// `tree_cost / baseline_cost`; `None` when the baseline is zero.
    pub ratio: Option<f64>,
    /// Number of data points reaching each leaf, indexed by center label.
    pub leaf_sizes: Vec<usize>,
}

impl ThresholdTree {
    /// Single-leaf tree for `k = 1`.
    pub fn single_leaf(dim: usize) -> Self {
        ThresholdTree {
            dim,
            k: 1,
            nodes: vec![Node::Leaf { center: 0 }],
            root: 0,
        }
    }

    /// Assembles a tree from an arena, checking the structural invariants:
    /// every node reachable exactly once from `root`, `k` leaves labelled by a
    /// permutation of `0..k`, cut coordinates below `dim`, finite thresholds.
    pub fn from_nodes(dim: usize, k: usize, nodes: Vec<Node>, root: NodeId) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if root >= nodes.len() {
            return Err(Error::InvalidTree(format!("root {root} out of range")));
        }
        let mut visited = vec![false; nodes.len()];
        let mut labels = vec![false; k];
        let mut leaves = 0;
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if id >= nodes.len() || visited[id] {
                return Err(Error::InvalidTree(format!("node {id} is shared or missing")));
            }
            visited[id] = true;
            match nodes[id] {
                Node::Leaf { center } => {
                    if center >= k || labels[center] {
                        return Err(Error::InvalidTree(format!(
                            "leaf label {center} repeated or out of range for k = {k}"
                        )));
                    }
                    labels[center] = true;
                    leaves += 1;
                }
                Node::Split { cut, left, right } => {
                    if cut.coord >= dim || !cut.threshold.is_finite() {
                        return Err(Error::InvalidTree(format!(
                            "node {id}: bad cut ({}, {})",
                            cut.coord, cut.threshold
                        )));
                    }
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        if leaves != k {
            return Err(Error::InvalidTree(format!("{leaves} leaves for k = {k}")));
        }
        if visited.iter().any(|v| !v) {
            return Err(Error::InvalidTree("unreachable nodes in arena".into()));
        }
        Ok(ThresholdTree { dim, k, nodes, root })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Cuts of all internal nodes, in arena order.
    pub fn cuts(&self) -> impl Iterator<Item = &ThresholdCut> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Split { cut, .. } => Some(cut),
            Node::Leaf { .. } => None,
        })
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(self.root, 0)];
        while let Some((id, d)) = stack.pop() {
            match self.nodes[id] {
                Node::Leaf { .. } => best = best.max(d),
                Node::Split { left, right, .. } => {
                    stack.push((left, d + 1));
                    stack.push((right, d + 1));
                }
            }
        }
        best
    }

    /// Leaf node reached by `x`: left iff `x[coord] <= threshold`.
    pub fn route_node(&self, x: &[f64]) -> NodeId {
        let mut id = self.root;
        loop {
            match self.nodes[id] {
                Node::Leaf { .. } => return id,
                Node::Split { cut, left, right } => {
                    id = if cut.goes_left(x) { left } else { right };
                }
            }
        }
    }

    /// Center label of the leaf reached by `x`.
    pub fn route(&self, x: &[f64]) -> usize {
        match self.nodes[self.route_node(x)] {
            Node::Leaf { center } => center,
            Node::Split { .. } => unreachable!("route_node stops at leaves"),
        }
    }

    pub fn try_route(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(self.route(x))
    }

    /// Same shape with every cut replaced by `f(cut)`.
    pub fn map_cuts(&self, mut f: impl FnMut(&ThresholdCut) -> ThresholdCut) -> Result<Self> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| match n {
                Node::Split { cut, left, right } => Node::Split {
                    cut: f(cut),
                    left: *left,
                    right: *right,
                },
                leaf => *leaf,
            })
            .collect();
        ThresholdTree::from_nodes(self.dim, self.k, nodes, self.root)
    }

    /// Checks that the tree was built over `centers`: matching `k` and `d`, and
    /// every center routing to the leaf carrying its own label.
    pub fn validate(&self, centers: &CenterSet) -> Result<()> {
        if centers.len() != self.k || centers.dim() != self.dim {
            return Err(Error::InvalidTree(format!(
                "tree is over k = {}, d = {} but centers have k = {}, d = {}",
                self.k,
                self.dim,
                centers.len(),
                centers.dim()
            )));
        }
        for (i, c) in centers.iter().enumerate() {
            let got = self.route(c);
            if got != i {
                return Err(Error::InvalidTree(format!(
                    "center {i} routes to leaf {got}"
                )));
            }
        }
        Ok(())
    }

    /// Data point indices reaching each leaf, indexed by center label.
    pub fn partition(&self, data: &Dataset) -> Vec<Vec<usize>> {
        let mut parts = vec![Vec::new(); self.k];
        for (i, (x, _)) in data.iter().enumerate() {
            parts[self.route(x)].push(i);
        }
        parts
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "dimension": self.dim,
            "k": self.k,
            "root": self.node_json(self.root),
        })
    }

    fn node_json(&self, id: NodeId) -> Value {
        match self.nodes[id] {
            Node::Leaf { center } => json!({ "leaf": { "center": center } }),
            Node::Split { cut, left, right } => json!({
                "cut": { "coord": cut.coord, "threshold": cut.threshold },
                "left": self.node_json(left),
                "right": self.node_json(right),
            }),
        }
    }

    /// Compact JSON; floats use the shortest round-trip representation.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("tree values are finite")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        de.disable_recursion_limit();
        let value = <Value as serde::Deserialize>::deserialize(&mut de).map_err(|e| {
            Error::parse(format!("line {}, column {}", e.line(), e.column()), e.to_string())
        })?;
        de.end().map_err(|e| {
            Error::parse(format!("line {}, column {}", e.line(), e.column()), e.to_string())
        })?;
        let top = value
            .as_object()
            .ok_or_else(|| Error::parse("$", "expected an object"))?;
        let dim = get_usize(top, "dimension", "$")?;
        let k = get_usize(top, "k", "$")?;
        let root_value = top
            .get("root")
            .ok_or_else(|| Error::parse("$", "missing field `root`"))?;
        let mut nodes = Vec::new();
        let root = parse_node(root_value, "$.root".to_string(), &mut nodes)?;
        ThresholdTree::from_nodes(dim, k, nodes, root)
            .map_err(|e| Error::parse("$", e.to_string()))
    }
}

fn get_usize(obj: &Map<String, Value>, key: &str, at: &str) -> Result<usize> {
    let v = obj
        .get(key)
        .ok_or_else(|| Error::parse(at, format!("missing field `{key}`")))?;
    v.as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| Error::parse(format!("{at}.{key}"), "expected a nonnegative integer"))
}

fn parse_node(v: &Value, at: String, nodes: &mut Vec<Node>) -> Result<NodeId> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::parse(at.as_str(), "expected an object"))?;
    if let Some(leaf) = obj.get("leaf") {
        let leaf_at = format!("{at}.leaf");
        let leaf = leaf
            .as_object()
            .ok_or_else(|| Error::parse(leaf_at.as_str(), "expected an object"))?;
        let center = get_usize(leaf, "center", &leaf_at)?;
        nodes.push(Node::Leaf { center });
        return Ok(nodes.len() - 1);
    }
    let cut_at = format!("{at}.cut");
    let cut = obj
        .get("cut")
        .ok_or_else(|| Error::parse(at.as_str(), "expected `leaf` or `cut`"))?
        .as_object()
        .ok_or_else(|| Error::parse(cut_at.as_str(), "expected an object"))?;
    let coord = get_usize(cut, "coord", &cut_at)?;
    let threshold = cut
        .get("threshold")
        .ok_or_else(|| Error::parse(cut_at.as_str(), "missing field `threshold`"))?
        .as_f64()
        .ok_or_else(|| Error::parse(format!("{cut_at}.threshold"), "expected a number"))?;
    let id = nodes.len();
    nodes.push(Node::Leaf { center: usize::MAX });
    let left_v = obj
        .get("left")
        .ok_or_else(|| Error::parse(at.as_str(), "missing field `left`"))?;
    let right_v = obj
        .get("right")
        .ok_or_else(|| Error::parse(at.as_str(), "missing field `right`"))?;
    let left = parse_node(left_v, format!("{at}.left"), nodes)?;
    let right = parse_node(right_v, format!("{at}.right"), nodes)?;
    nodes[id] = Node::Split {
        cut: ThresholdCut::new(coord, threshold),
        left,
        right,
    };
    Ok(id)
}

/// Cost of the clustering induced by `tree` on `data`.
///
/// `reference_cost` always charges each point to its leaf's reference
/// center; `tree_cost` does the same in [`CenterMode::Reference`] and uses the
/// per-leaf optimal center in [`CenterMode::Optimal`]. Empty leaves cost 0.
pub fn tree_cost(
    data: &Dataset,
    centers: &CenterSet,
    tree: &ThresholdTree,
    obj: Objective,
    mode: CenterMode,
) -> Result<TreeCostReport> {
    if data.dim() != centers.dim() || tree.dim() != centers.dim() {
        return Err(Error::DimensionMismatch {
            expected: centers.dim(),
            found: if data.dim() != centers.dim() {
                data.dim()
            } else {
                tree.dim()
            },
        });
    }
    if tree.k() != centers.len() {
        return Err(Error::InvalidParameter(format!(
            "tree has {} leaves but there are {} centers",
            tree.k(),
            centers.len()
        )));
    }
    let parts = tree.partition(data);
    let mut reference_cost = 0.0;
    let mut optimal_cost = 0.0;
    for (label, members) in parts.iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let c = centers.center(label);
        reference_cost += members
            .iter()
            .map(|&i| data.weight(i) * dist_unchecked(data.point(i), c, obj))
            .sum::<f64>();
        if mode == CenterMode::Optimal {
            let opt = leaf_center(data, members, obj)?;
            optimal_cost += members
                .iter()
                .map(|&i| data.weight(i) * dist_unchecked(data.point(i), opt.coords(), obj))
                .sum::<f64>();
        }
    }
    let tree_cost = match mode {
        CenterMode::Reference => reference_cost,
        CenterMode::Optimal => optimal_cost,
    };
    let baseline_cost = clustering_cost(data, centers, obj)?;
    Ok(TreeCostReport {
        tree_cost,
        reference_cost,
        baseline_cost,
        ratio: (baseline_cost > 0.0).then(|| tree_cost / baseline_cost),
        leaf_sizes: parts.iter().map(Vec::len).collect(),
    })
}
