//! Rooted ultrametric trees: UPGMA construction, clade sets and restriction.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chrono::TimeMatrix;
use crate::metric::DistanceMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhyloError {
    #[error("entry `{0}`/`{1}` is undefined or not finite; resolve it before building a tree")]
    UnusableEntry(String, String),
    #[error("need at least {needed} leaves, found {found}")]
    TooFewLeaves { needed: usize, found: usize },
    #[error("duplicate leaf label `{0}`")]
    DuplicateLabel(String),
    #[error("invalid tree: {0}")]
    Invalid(String),
    #[error("Newick parse error at byte {pos}: {msg}")]
    Newick { pos: usize, msg: String },
}

/// Anything UPGMA can cluster: labeled symmetric dissimilarities where an
/// entry may be unusable (`None`).
pub trait Dissimilarity {
    fn labels(&self) -> &[String];
    fn dissimilarity(&self, i: usize, j: usize) -> Option<f64>;
}

impl Dissimilarity for DistanceMatrix {
    fn labels(&self) -> &[String] {
        self.languages()
    }

    fn dissimilarity(&self, i: usize, j: usize) -> Option<f64> {
        self.get(i, j)
    }
}

/// Saturated entries are usable: they carry the finite ceiling value.
impl Dissimilarity for TimeMatrix {
    fn labels(&self) -> &[String] {
        self.languages()
    }

    fn dissimilarity(&self, i: usize, j: usize) -> Option<f64> {
        Some(self.get(i, j))
    }
}

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub label: Option<String>,
    pub height: f64,
    pub children: Vec<NodeId>,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Rooted binary tree stored as an arena. Leaves have height 0 and carry
/// labels; internal nodes have exactly two children.
#[derive(Debug, Clone, PartialEq)]
pub struct PhyloTree {
    nodes: Vec<Node>,
    root: NodeId,
}

impl PhyloTree {
    /// Validates and wraps an arena.
    pub fn from_nodes(nodes: Vec<Node>, root: NodeId) -> Result<Self, PhyloError> {
        let t = PhyloTree { nodes, root };
        t.validate()?;
        Ok(t)
    }

    /// A tree with a single leaf.
    pub fn leaf(label: impl Into<String>) -> Self {
        PhyloTree {
            nodes: vec![Node {
                label: Some(label.into()),
                height: 0.0,
                children: Vec::new(),
            }],
            root: 0,
        }
    }

    /// Joins two trees under a new root at `height`.
    pub fn join(left: PhyloTree, right: PhyloTree, height: f64) -> Result<Self, PhyloError> {
        let mut nodes = left.nodes;
        let offset = nodes.len();
        let left_root = left.root;
        nodes.extend(right.nodes.into_iter().map(|mut n| {
            for c in &mut n.children {
                *c += offset;
            }
            n
        }));
        nodes.push(Node {
            label: None,
            height,
            children: vec![left_root, right.root + offset],
        });
        let root = nodes.len() - 1;
        PhyloTree::from_nodes(nodes, root)
    }

    fn validate(&self) -> Result<(), PhyloError> {
        let invalid = |m: String| Err(PhyloError::Invalid(m));
        if self.root >= self.nodes.len() {
            return invalid("root index out of range".into());
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut labels = HashSet::new();
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut seen[id], true) {
                return invalid(format!("node {id} reached twice"));
            }
            let node = &self.nodes[id];
            if !(node.height.is_finite() && node.height >= 0.0) {
                return invalid(format!("node {id} has height {}", node.height));
            }
            match node.children.len() {
                0 => {
                    let Some(label) = &node.label else {
                        return invalid(format!("leaf {id} has no label"));
                    };
                    if node.height != 0.0 {
                        return invalid(format!("leaf `{label}` has height {}", node.height));
                    }
                    if !labels.insert(label.clone()) {
                        return Err(PhyloError::DuplicateLabel(label.clone()));
                    }
                }
                2 => {
                    for &c in &node.children {
                        if c >= self.nodes.len() {
                            return invalid(format!("child index {c} out of range"));
                        }
                        if self.nodes[c].height > node.height {
                            return invalid(format!(
                                "node {id} at height {} is below its child at {}",
                                node.height, self.nodes[c].height
                            ));
                        }
                        stack.push(c);
                    }
                }
                k => return invalid(format!("node {id} has {k} children; trees are binary")),
            }
        }
        if seen.iter().any(|s| !s) {
            return invalid("unreachable nodes in arena".into());
        }
        Ok(())
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

    pub fn height(&self) -> f64 {
        self.nodes[self.root].height
    }

    /// Leaf labels in arena order.
    pub fn leaf_labels(&self) -> Vec<String> {
        self.nodes.iter().filter_map(|n| if n.is_leaf() { n.label.clone() } else { None }).collect()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    /// Every internal node's height is at least each child's height.
    pub fn is_ultrametric(&self) -> bool {
        self.nodes
            .iter()
            .all(|n| n.children.iter().all(|&c| self.nodes[c].height <= n.height))
    }

    /// Sorted leaf labels under `id`.
    pub fn leaves_under(&self, id: NodeId) -> Vec<String> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if node.is_leaf() {
                out.push(node.label.clone().expect("validated leaf"));
            } else {
                stack.extend(&node.children);
            }
        }
        out.sort();
        out
    }

    /// All nodes in post-order (children before parents).
    fn postorder(&self) -> Vec<NodeId> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                order.push(id);
            } else {
                stack.push((id, true));
                for &c in self.nodes[id].children.iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        order
    }

    /// Map from clade (sorted leaf labels) to the height of its node.
    pub fn clade_heights(&self) -> BTreeMap<Vec<String>, f64> {
        let mut below: Vec<Vec<String>> = vec![Vec::new(); self.nodes.len()];
        let mut out = BTreeMap::new();
        for id in self.postorder() {
            let node = &self.nodes[id];
            if node.is_leaf() {
                below[id] = vec![node.label.clone().expect("validated leaf")];
            } else {
                let mut all: Vec<String> = node.children.iter().flat_map(|&c| below[c].clone()).collect();
                all.sort();
                out.insert(all.clone(), node.height);
                below[id] = all;
            }
        }
        out
    }

    /// Cophenetic distances `2 * height(lca)` between leaves, indexed by
    /// `labels` order.
    pub fn cophenetic(&self, labels: &[String]) -> Result<Vec<Vec<f64>>, PhyloError> {
        let index: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let n = labels.len();
        if n != self.leaf_count() {
            return Err(PhyloError::Invalid("label list does not match tree leaves".into()));
        }
        let mut out = vec![vec![0.0; n]; n];
        let mut below: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for id in self.postorder() {
            let node = &self.nodes[id];
            if node.is_leaf() {
                let label = node.label.as_deref().expect("validated leaf");
                let &i = index
                    .get(label)
                    .ok_or_else(|| PhyloError::Invalid(format!("leaf `{label}` missing from label list")))?;
                below[id] = vec![i];
            } else {
                let (l, r) = (node.children[0], node.children[1]);
                for &a in &below[l] {
                    for &b in &below[r] {
                        out[a][b] = 2.0 * node.height;
                        out[b][a] = 2.0 * node.height;
                    }
                }
                let mut merged = std::mem::take(&mut below[l]);
                merged.append(&mut below[r]);
                below[id] = merged;
            }
        }
        Ok(out)
    }

    /// Prunes leaves not in `keep` and suppresses the resulting unary nodes.
    /// Heights of surviving nodes are unchanged.
    pub fn restrict(&self, keep: &BTreeSet<String>) -> Result<PhyloTree, PhyloError> {
        let mut kept: Vec<Option<PhyloTree>> = vec![None; self.nodes.len()];
        for id in self.postorder() {
            let node = &self.nodes[id];
            kept[id] = if node.is_leaf() {
                let label = node.label.as_ref().expect("validated leaf");
                keep.contains(label).then(|| PhyloTree::leaf(label.clone()))
            } else {
                let l = kept[node.children[0]].take();
                let r = kept[node.children[1]].take();
                match (l, r) {
                    (Some(l), Some(r)) => Some(PhyloTree::join(l, r, node.height)?),
                    (Some(x), None) | (None, Some(x)) => Some(x),
                    (None, None) => None,
                }
            };
        }
        kept[self.root]
            .take()
            .ok_or(PhyloError::TooFewLeaves { needed: 1, found: 0 })
    }

    /// Nested JSON form `{label?, height, children}`.
    pub fn to_json_node(&self) -> JsonNode {
        fn build(t: &PhyloTree, id: NodeId) -> JsonNode {
            let node = &t.nodes[id];
            let mut children: Vec<JsonNode> = node.children.iter().map(|&c| build(t, c)).collect();
            children.sort_by(|a, b| a.min_label().cmp(&b.min_label()));
            JsonNode {
                label: node.label.clone(),
                height: node.height,
                children,
            }
        }
        build(self, self.root)
    }

    pub fn from_json_node(root: &JsonNode) -> Result<PhyloTree, PhyloError> {
        if root.children.is_empty() {
            let label = root
                .label
                .clone()
                .ok_or_else(|| PhyloError::Invalid("leaf without label".into()))?;
            if root.height != 0.0 {
                return Err(PhyloError::Invalid(format!("leaf `{label}` has height {}", root.height)));
            }
            return Ok(PhyloTree::leaf(label));
        }
        if root.children.len() != 2 {
            return Err(PhyloError::Invalid(format!(
                "node with {} children; trees are binary",
                root.children.len()
            )));
        }
        let l = PhyloTree::from_json_node(&root.children[0])?;
        let r = PhyloTree::from_json_node(&root.children[1])?;
        PhyloTree::join(l, r, root.height)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonNode {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub height: f64,
    #[serde(default)]
    pub children: Vec<JsonNode>,
}

impl JsonNode {
    fn min_label(&self) -> Option<&str> {
        match &self.label {
            Some(l) if self.children.is_empty() => Some(l),
            _ => self.children.iter().filter_map(JsonNode::min_label).min(),
        }
    }
}

/// Average-linkage agglomerative clustering.
///
/// The closest pair of clusters is merged at height `d / 2`; the distance
/// from the merged cluster to every other cluster is the size-weighted mean
/// of the two parts. Exact ties go to the pair whose smallest original leaf
/// indices are lexicographically least.
pub fn upgma<M: Dissimilarity + ?Sized>(m: &M) -> Result<PhyloTree, PhyloError> {
    let labels = m.labels();
    let n = labels.len();
    if n < 2 {
        return Err(PhyloError::TooFewLeaves { needed: 2, found: n });
    }
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(PhyloError::DuplicateLabel(l.clone()));
        }
    }
    let mut dist = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = m
                .dissimilarity(i, j)
                .filter(|v| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| PhyloError::UnusableEntry(labels[i].clone(), labels[j].clone()))?;
            dist[i][j] = v;
            dist[j][i] = v;
        }
    }

    let mut nodes: Vec<Node> = labels
        .iter()
        .map(|l| Node {
            label: Some(l.clone()),
            height: 0.0,
            children: Vec::new(),
        })
        .collect();
    // slot s holds a live cluster while `active[s]`; its key is the smallest
    // original leaf index it contains, which equals s since the merged cluster
    // always takes the lower slot.
    let mut active = vec![true; n];
    let mut node_of: Vec<NodeId> = (0..n).collect();
    let mut size = vec![1usize; n];

    for _ in 1..n {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in i + 1..n {
                if !active[j] {
                    continue;
                }
                let d = dist[i][j];
                // strict comparison keeps the first (lexicographically least) pair on ties
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, i, j));
                }
            }
        }
        let (d, i, j) = best.expect("at least two active clusters");
        let (ni, nj) = (size[i], size[j]);
        let children = vec![node_of[i], node_of[j]];
        let floor = children.iter().map(|&c| nodes[c].height).fold(0.0, f64::max);
        nodes.push(Node {
            label: None,
            height: (d / 2.0).max(floor),
            children,
        });
        for k in 0..n {
            if active[k] && k != i && k != j {
                let (a, b) = (dist[i][k], dist[j][k]);
                let merged = if a == b {
                    a
                } else {
                    (ni as f64 * a + nj as f64 * b) / (ni + nj) as f64
                };
                dist[i][k] = merged;
                dist[k][i] = merged;
            }
        }
        active[j] = false;
        size[i] = ni + nj;
        node_of[i] = nodes.len() - 1;
    }
    let root = nodes.len() - 1;
    let tree = PhyloTree::from_nodes(nodes, root)?;
    debug_assert!(tree.is_ultrametric());
    Ok(tree)
}

/// One leaf-label set per internal node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CladeSet {
    clades: BTreeSet<Vec<String>>,
}

impl CladeSet {
    pub fn contains(&self, clade: &[String]) -> bool {
        self.clades.contains(clade)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<String>> {
        self.clades.iter()
    }

    pub fn len(&self) -> usize {
        self.clades.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clades.is_empty()
    }

    pub fn into_set(self) -> BTreeSet<Vec<String>> {
        self.clades
    }
}

pub fn clades(t: &PhyloTree) -> CladeSet {
    CladeSet {
        clades: t.clade_heights().into_keys().collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CladeOverlap {
    pub shared: usize,
    pub only_first: usize,
    pub only_second: usize,
    pub jaccard: f64,
}

/// Compares clade sets after restricting both trees to their common leaves.
pub fn clade_overlap(t1: &PhyloTree, t2: &PhyloTree) -> Result<CladeOverlap, PhyloError> {
    let l1: BTreeSet<String> = t1.leaf_labels().into_iter().collect();
    let l2: BTreeSet<String> = t2.leaf_labels().into_iter().collect();
    let common: BTreeSet<String> = l1.intersection(&l2).cloned().collect();
    if common.len() < 3 {
        return Err(PhyloError::TooFewLeaves {
            needed: 3,
            found: common.len(),
        });
    }
    let c1 = clades(&t1.restrict(&common)?).into_set();
    let c2 = clades(&t2.restrict(&common)?).into_set();
    let shared = c1.intersection(&c2).count();
    let only_first = c1.len() - shared;
    let only_second = c2.len() - shared;
    Ok(CladeOverlap {
        shared,
        only_first,
        only_second,
        jaccard: shared as f64 / (shared + only_first + only_second) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Square;

    fn matrix(labels: &[&str], rows: Vec<Vec<f64>>) -> TimeMatrix {
        TimeMatrix::from_values(
            labels.iter().map(|s| s.to_string()).collect(),
            Square::from_rows(rows).unwrap(),
        )
        .unwrap()
    }

    fn set(items: &[&[&str]]) -> BTreeSet<Vec<String>> {
        items
            .iter()
            .map(|c| c.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    fn leaf(l: &str) -> PhyloTree {
        PhyloTree::leaf(l)
    }

    fn join(a: PhyloTree, b: PhyloTree, h: f64) -> PhyloTree {
        PhyloTree::join(a, b, h).unwrap()
    }

    #[test]
    fn two_taxa() {
        // values are plain numbers here; UPGMA does not care about units
        let m = DistanceMatrix::from_values(
            vec!["A".into(), "B".into()],
            Square::from_rows(vec![vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap(),
        )
        .unwrap();
        let t = upgma(&m).unwrap();
        assert_eq!(t.height(), 0.25);
        assert_eq!(t.leaf_count(), 2);
        assert_eq!(clades(&t).into_set(), set(&[&["A", "B"]]));
    }

    #[test]
    fn three_taxa_oracle() {
        let m = matrix(
            &["A", "B", "C"],
            vec![vec![0.0, 2.0, 8.0], vec![2.0, 0.0, 8.0], vec![8.0, 8.0, 0.0]],
        );
        let t = upgma(&m).unwrap();
        let h = t.clade_heights();
        assert_eq!(h[&vec!["A".to_string(), "B".to_string()]], 1.0);
        assert_eq!(h[&vec!["A".to_string(), "B".to_string(), "C".to_string()]], 4.0);
        assert!(t.is_ultrametric());
    }

    #[test]
    fn four_taxa_clades() {
        let m = matrix(
            &["A", "B", "C", "D"],
            vec![
                vec![0.0, 2.0, 10.0, 10.0],
                vec![2.0, 0.0, 10.0, 10.0],
                vec![10.0, 10.0, 0.0, 4.0],
                vec![10.0, 10.0, 4.0, 0.0],
            ],
        );
        let t = upgma(&m).unwrap();
        assert_eq!(clades(&t).into_set(), set(&[&["A", "B"], &["C", "D"], &["A", "B", "C", "D"]]));
        let h = t.clade_heights();
        assert_eq!(h[&vec!["A".to_string(), "B".to_string()]], 1.0);
        assert_eq!(h[&vec!["C".to_string(), "D".to_string()]], 2.0);
        assert_eq!(t.height(), 5.0);
    }

    #[test]
    fn tie_break_prefers_lowest_indices() {
        // every pair at the same distance: (A,B) merges first, then C joins
        let m = matrix(
            &["A", "B", "C"],
            vec![vec![0.0, 0.4, 0.4], vec![0.4, 0.0, 0.4], vec![0.4, 0.4, 0.0]],
        );
        let t = upgma(&m).unwrap();
        assert_eq!(clades(&t).into_set(), set(&[&["A", "B"], &["A", "B", "C"]]));
        // binary even when merge heights coincide
        assert_eq!(t.nodes().iter().filter(|n| !n.is_leaf()).count(), 2);
    }

    #[test]
    fn weighted_linkage_update() {
        // after (A,B) merge at 1: d(AB,C) = (4+6)/2 = 5, d(AB,D) = (10+10)/2 = 10, d(C,D) = 12
        // (AB,C) merges at 2.5; d(ABC,D) = (2*10 + 12)/3 = 32/3
        let m = matrix(
            &["A", "B", "C", "D"],
            vec![
                vec![0.0, 2.0, 4.0, 10.0],
                vec![2.0, 0.0, 6.0, 10.0],
                vec![4.0, 6.0, 0.0, 12.0],
                vec![10.0, 10.0, 12.0, 0.0],
            ],
        );
        let t = upgma(&m).unwrap();
        let h = t.clade_heights();
        let abc: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        assert_eq!(h[&abc], 2.5);
        assert_eq!(t.height(), 32.0 / 3.0 / 2.0);
    }

    #[test]
    fn rejects_undefined_entries() {
        let m = DistanceMatrix::from_values(
            vec!["A".into(), "B".into()],
            Square::from_rows(vec![vec![0.0, f64::NAN], vec![f64::NAN, 0.0]]).unwrap(),
        )
        .unwrap();
        assert_eq!(upgma(&m), Err(PhyloError::UnusableEntry("A".into(), "B".into())));
    }

    #[test]
    fn cophenetic_of_ultrametric_input_is_exact() {
        let rows = vec![
            vec![0.0, 0.2, 0.6, 0.6, 0.9],
            vec![0.2, 0.0, 0.6, 0.6, 0.9],
            vec![0.6, 0.6, 0.0, 0.3, 0.9],
            vec![0.6, 0.6, 0.3, 0.0, 0.9],
            vec![0.9, 0.9, 0.9, 0.9, 0.0],
        ];
        let labels = ["A", "B", "C", "D", "E"];
        let t = upgma(&matrix(&labels, rows.clone())).unwrap();
        let names: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        assert_eq!(t.cophenetic(&names).unwrap(), rows);
    }

    #[test]
    fn clade_examples() {
        let abc = join(join(leaf("A"), leaf("B"), 1.0), leaf("C"), 4.0);
        assert_eq!(clades(&abc).into_set(), set(&[&["A", "B"], &["A", "B", "C"]]));
        let ab = join(leaf("A"), leaf("B"), 550.0);
        assert_eq!(clades(&ab).into_set(), set(&[&["A", "B"]]));
    }

    #[test]
    fn overlap_examples() {
        let t1 = join(join(leaf("A"), leaf("B"), 1.0), join(leaf("C"), leaf("D"), 1.0), 2.0);
        let t2 = join(join(leaf("A"), leaf("C"), 1.0), join(leaf("B"), leaf("D"), 1.0), 2.0);
        let o = clade_overlap(&t1, &t2).unwrap();
        assert_eq!((o.shared, o.only_first, o.only_second), (1, 2, 2));
        assert_eq!(o.jaccard, 0.2);
        assert_eq!(clade_overlap(&t1, &t1).unwrap().jaccard, 1.0);

        let keep: BTreeSet<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        let smaller = t1.restrict(&keep).unwrap();
        assert_eq!(clade_overlap(&t1, &smaller).unwrap().jaccard, 1.0);

        let pair = join(leaf("A"), leaf("B"), 1.0);
        assert!(matches!(clade_overlap(&t1, &pair), Err(PhyloError::TooFewLeaves { .. })));
    }

    #[test]
    fn restriction_keeps_heights() {
        let t = join(join(join(leaf("A"), leaf("B"), 1.0), leaf("C"), 3.0), leaf("D"), 7.0);
        let keep: BTreeSet<String> = ["A", "C", "D"].iter().map(|s| s.to_string()).collect();
        let r = t.restrict(&keep).unwrap();
        let h = r.clade_heights();
        assert_eq!(h.len(), 2);
        assert_eq!(h[&vec!["A".to_string(), "C".to_string()]], 3.0);
        assert_eq!(r.height(), 7.0);
        assert!(r.is_ultrametric());
    }

    #[test]
    fn invalid_trees_rejected() {
        assert!(PhyloTree::join(join(leaf("A"), leaf("B"), 5.0), leaf("C"), 1.0).is_err());
        assert!(matches!(
            PhyloTree::join(leaf("A"), leaf("A"), 1.0),
            Err(PhyloError::DuplicateLabel(_))
        ));
    }

    #[test]
    fn json_roundtrip() {
        let t = join(join(leaf("B"), leaf("A"), 1.0), leaf("C"), 4.0);
        let j = t.to_json_node();
        assert_eq!(j.children[0].children[0].label.as_deref(), Some("A"));
        let text = serde_json::to_string(&j).unwrap();
        let back = PhyloTree::from_json_node(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(clades(&back), clades(&t));
        assert_eq!(back.clade_heights(), t.clade_heights());
    }
}
