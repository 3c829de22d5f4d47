//! Tree data model: nodes, structural mutation primitives, statistics,
//! and invariant validation.
//!
//! The tree is anchored by a content-free root sentinel at depth 0. Every
//! other node carries both text content and an embedding. Structure is
//! single-writer: mutations take `&mut self`, readers may share the tree
//! freely between mutations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::embed::Embedding;
use crate::error::{Error, Result};
use crate::token::Tokenizer;

/// Node address, ordered by creation sequence and never reused.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(u64);

impl NodeId {
    pub fn as_u64(self) -> u64 {
        self.0
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One tree node: content, embedding, parent link, ordered children, depth.
///
/// The root sentinel has neither content nor embedding; every other node
/// has both.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryNode {
    id: NodeId,
    content: Option<String>,
    embedding: Option<Embedding>,
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    depth: usize,
    /// Set while an expanded leaf still holds its pre-expansion content,
    /// pending re-aggregation.
    pending_aggregation: bool,
}

impl MemoryNode {
    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn content(&self) -> Option<&str> {
        self.content.as_deref()
    }

    pub fn embedding(&self) -> Option<&Embedding> {
        self.embedding.as_ref()
    }

    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }

    pub fn children(&self) -> &[NodeId] {
        &self.children
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_root(&self) -> bool {
        self.parent.is_none()
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn pending_aggregation(&self) -> bool {
        self.pending_aggregation
    }
}

/// A broken invariant, naming the offending node and the rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub node: NodeId,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// Root must have neither content nor embedding.
    RootSentinel,
    /// Non-root node is missing content or embedding.
    MissingPayload,
    /// depth != parent.depth + 1.
    DepthRule,
    /// Parent and child links disagree, or point at unknown nodes.
    LinkConsistency,
    /// Node is not reachable from the root.
    Unreachable,
    /// Embedding length differs from the tree's dimension.
    DimensionMismatch,
    /// Stale parent content: node was expanded but never re-aggregated.
    StaleContent,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let rule = match self.kind {
            ViolationKind::RootSentinel => "root sentinel must not carry content or embedding",
            ViolationKind::MissingPayload => "non-root node must have content and embedding",
            ViolationKind::DepthRule => "depth must equal parent depth + 1",
            ViolationKind::LinkConsistency => "parent/child links are inconsistent",
            ViolationKind::Unreachable => "node is not reachable from the root",
            ViolationKind::DimensionMismatch => "embedding dimension differs from the tree",
            ViolationKind::StaleContent => "stale parent content pending aggregation",
        };
        write!(f, "node {}: {}", self.node, rule)
    }
}

/// Per-depth token statistics over node contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthTokenStats {
    pub depth: usize,
    pub n_nodes: usize,
    pub median_tokens: f64,
    pub q1_tokens: f64,
    pub q3_tokens: f64,
}

/// Aggregate structure statistics.
///
/// The root counts toward node and branching totals (a childless root is a
/// leaf). `branching_factor` is `(n_nodes - 1) / n_branching`, and
/// `height_to_width` is `max_depth / branching_factor`; both are 0 when the
/// tree has no branching node. The raw inputs are reported alongside the
/// ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeStats {
    pub n_nodes: usize,
    pub n_leaves: usize,
    pub n_branching: usize,
    pub max_depth: usize,
    pub avg_depth: f64,
    pub branching_factor: f64,
    pub height_to_width: f64,
    pub tokens_per_depth: Vec<DepthTokenStats>,
}

/// The full hierarchy: root sentinel plus a registry of nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryTree {
    root: NodeId,
    nodes: BTreeMap<NodeId, MemoryNode>,
    embedding_dimension: usize,
    creation_counter: u64,
}

impl MemoryTree {
    /// Fresh tree holding only the root sentinel.
    pub fn new(embedding_dimension: usize) -> Result<Self> {
        if embedding_dimension == 0 {
            return Err(Error::InvalidArgument(
                "embedding dimension must be positive".into(),
            ));
        }
        let root = NodeId(0);
        let mut nodes = BTreeMap::new();
        nodes.insert(
            root,
            MemoryNode {
                id: root,
                content: None,
                embedding: None,
                parent: None,
                children: Vec::new(),
                depth: 0,
                pending_aggregation: false,
            },
        );
        Ok(MemoryTree {
            root,
            nodes,
            embedding_dimension,
            creation_counter: 1,
        })
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn embedding_dimension(&self) -> usize {
        self.embedding_dimension
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() == 1
    }

    pub fn creation_counter(&self) -> u64 {
        self.creation_counter
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn node(&self, id: NodeId) -> Result<&MemoryNode> {
        self.nodes
            .get(&id)
            .ok_or_else(|| Error::NotFound(format!("node {id}")))
    }

    /// All nodes in id (creation) order.
    pub fn nodes(&self) -> impl Iterator<Item = &MemoryNode> {
        self.nodes.values()
    }

    fn next_id(&mut self) -> NodeId {
        let id = NodeId(self.creation_counter);
        self.creation_counter += 1;
        id
    }

    /// Appends a new child under `parent`, one level deeper.
    pub fn attach_child(
        &mut self,
        parent: NodeId,
        content: impl Into<String>,
        embedding: Embedding,
    ) -> Result<NodeId> {
        let content = content.into();
        if content.is_empty() {
            return Err(Error::InvalidArgument("content must be non-empty".into()));
        }
        if embedding.dimension() != self.embedding_dimension {
            return Err(Error::InvalidArgument(format!(
                "embedding has dimension {}, tree expects {}",
                embedding.dimension(),
                self.embedding_dimension
            )));
        }
        let parent_depth = self.node(parent)?.depth;
        let id = self.next_id();
        self.nodes.insert(
            id,
            MemoryNode {
                id,
                content: Some(content),
                embedding: Some(embedding),
                parent: Some(parent),
                children: Vec::new(),
                depth: parent_depth + 1,
                pending_aggregation: false,
            },
        );
        self.nodes
            .get_mut(&parent)
            .expect("parent existence checked above")
            .children
            .push(id);
        Ok(id)
    }

    /// Converts a childless non-root node into a parent by demoting its
    /// content and embedding into a fresh child one level deeper.
    ///
    /// The expanded node keeps its id and position; its payload is marked
    /// stale until the caller re-aggregates via [`set_aggregated`].
    /// Returns the demoted child's id.
    ///
    /// [`set_aggregated`]: MemoryTree::set_aggregated
    pub fn expand_leaf(&mut self, leaf: NodeId) -> Result<NodeId> {
        let node = self.node(leaf)?;
        if node.is_root() {
            return Err(Error::InvalidState("cannot expand the root".into()));
        }
        if !node.is_leaf() {
            return Err(Error::InvalidState(format!(
                "node {leaf} has {} children, expected none",
                node.children.len()
            )));
        }
        let content = node.content.clone();
        let embedding = node.embedding.clone();
        let depth = node.depth;
        let id = self.next_id();
        self.nodes.insert(
            id,
            MemoryNode {
                id,
                content,
                embedding,
                parent: Some(leaf),
                children: Vec::new(),
                depth: depth + 1,
                pending_aggregation: false,
            },
        );
        let expanded = self.nodes.get_mut(&leaf).expect("checked above");
        expanded.children.push(id);
        expanded.pending_aggregation = true;
        Ok(id)
    }

    /// Replaces a non-root node's content and embedding after aggregation,
    /// clearing any pending-aggregation mark.
    pub fn set_aggregated(
        &mut self,
        id: NodeId,
        content: String,
        embedding: Embedding,
    ) -> Result<()> {
        if content.is_empty() {
            return Err(Error::InvalidArgument("content must be non-empty".into()));
        }
        if embedding.dimension() != self.embedding_dimension {
            return Err(Error::InvalidArgument(format!(
                "embedding has dimension {}, tree expects {}",
                embedding.dimension(),
                self.embedding_dimension
            )));
        }
        let node = self
            .nodes
            .get_mut(&id)
            .ok_or_else(|| Error::NotFound(format!("node {id}")))?;
        if node.parent.is_none() {
            return Err(Error::InvalidState("root never aggregates".into()));
        }
        node.content = Some(content);
        node.embedding = Some(embedding);
        node.pending_aggregation = false;
        Ok(())
    }

    /// Deepest node's depth; 0 for a fresh tree.
    pub fn max_depth(&self) -> usize {
        self.nodes.values().map(|n| n.depth).max().unwrap_or(0)
    }

    /// Leaves under `id` in id order; a childless node is its own leaf set.
    pub fn leaf_descendants(&self, id: NodeId) -> Result<Vec<NodeId>> {
        let node = self.node(id)?;
        let mut leaves = Vec::new();
        let mut stack = vec![node.id];
        while let Some(current) = stack.pop() {
            let n = &self.nodes[&current];
            if n.children.is_empty() {
                leaves.push(current);
            } else {
                // Reverse keeps traversal order; final sort settles it anyway.
                stack.extend(n.children.iter().rev());
            }
        }
        leaves.sort();
        Ok(leaves)
    }

    /// Structure statistics; token counts use `tokenizer` over node contents.
    pub fn stats(&self, tokenizer: &dyn Tokenizer) -> TreeStats {
        let n_nodes = self.nodes.len();
        let n_leaves = self.nodes.values().filter(|n| n.is_leaf()).count();
        let n_branching = n_nodes - n_leaves;
        let max_depth = self.max_depth();
        let avg_depth =
            self.nodes.values().map(|n| n.depth as f64).sum::<f64>() / n_nodes as f64;
        let branching_factor = if n_branching > 0 {
            (n_nodes - 1) as f64 / n_branching as f64
        } else {
            0.0
        };
        let height_to_width = if branching_factor > 0.0 {
            max_depth as f64 / branching_factor
        } else {
            0.0
        };

        let mut by_depth: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for node in self.nodes.values() {
            if let Some(content) = &node.content {
                by_depth
                    .entry(node.depth)
                    .or_default()
                    .push(tokenizer.count(content));
            }
        }
        let tokens_per_depth = by_depth
            .into_iter()
            .map(|(depth, mut counts)| {
                counts.sort_unstable();
                let (q1, median, q3) = quartiles(&counts);
                DepthTokenStats {
                    depth,
                    n_nodes: counts.len(),
                    median_tokens: median,
                    q1_tokens: q1,
                    q3_tokens: q3,
                }
            })
            .collect();

        TreeStats {
            n_nodes,
            n_leaves,
            n_branching,
            max_depth,
            avg_depth,
            branching_factor,
            height_to_width,
            tokens_per_depth,
        }
    }

    /// Checks every structural invariant; empty means well-formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        for node in self.nodes.values() {
            if node.id == self.root {
                if node.content.is_some() || node.embedding.is_some() {
                    violations.push(Violation {
                        node: node.id,
                        kind: ViolationKind::RootSentinel,
                    });
                }
                if node.parent.is_some() || node.depth != 0 {
                    violations.push(Violation {
                        node: node.id,
                        kind: ViolationKind::DepthRule,
                    });
                }
            } else {
                if node.content.is_none() || node.embedding.is_none() {
                    violations.push(Violation {
                        node: node.id,
                        kind: ViolationKind::MissingPayload,
                    });
                }
                match node.parent.and_then(|p| self.nodes.get(&p)) {
                    None => violations.push(Violation {
                        node: node.id,
                        kind: ViolationKind::LinkConsistency,
                    }),
                    Some(parent) => {
                        if !parent.children.contains(&node.id) {
                            violations.push(Violation {
                                node: node.id,
                                kind: ViolationKind::LinkConsistency,
                            });
                        }
                        if node.depth != parent.depth + 1 {
                            violations.push(Violation {
                                node: node.id,
                                kind: ViolationKind::DepthRule,
                            });
                        }
                    }
                }
            }
            for child in &node.children {
                let consistent = self
                    .nodes
                    .get(child)
                    .is_some_and(|c| c.parent == Some(node.id));
                if !consistent {
                    violations.push(Violation {
                        node: node.id,
                        kind: ViolationKind::LinkConsistency,
                    });
                }
            }
            if let Some(embedding) = &node.embedding {
                if embedding.dimension() != self.embedding_dimension {
                    violations.push(Violation {
                        node: node.id,
                        kind: ViolationKind::DimensionMismatch,
                    });
                }
            }
            if node.pending_aggregation {
                violations.push(Violation {
                    node: node.id,
                    kind: ViolationKind::StaleContent,
                });
            }
        }

        // Reachability from the root; cycles leave nodes unvisited.
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            if let Some(node) = self.nodes.get(&id) {
                stack.extend(node.children.iter().copied());
            }
        }
        for id in self.nodes.keys() {
            if !seen.contains(id) {
                violations.push(Violation {
                    node: *id,
                    kind: ViolationKind::Unreachable,
                });
            }
        }
        violations
    }

    /// Rebuilds a tree from raw parts. Snapshot loading only; the caller
    /// must run [`validate`](MemoryTree::validate) afterwards.
    pub(crate) fn from_raw_parts(
        embedding_dimension: usize,
        creation_counter: u64,
        nodes: Vec<RawNode>,
    ) -> Result<Self> {
        if embedding_dimension == 0 {
            return Err(Error::InvalidArgument(
                "embedding dimension must be positive".into(),
            ));
        }
        let mut map = BTreeMap::new();
        let mut root = None;
        for raw in nodes {
            if raw.parent.is_none() && root.replace(raw.id).is_some() {
                return Err(Error::CorruptSnapshot(
                    "multiple parentless nodes".into(),
                ));
            }
            let id = raw.id;
            let previous = map.insert(
                id,
                MemoryNode {
                    id: raw.id,
                    content: raw.content,
                    embedding: raw.embedding,
                    parent: raw.parent,
                    children: raw.children,
                    depth: raw.depth,
                    pending_aggregation: false,
                },
            );
            if previous.is_some() {
                return Err(Error::CorruptSnapshot(format!("duplicate node id {id}")));
            }
        }
        let root = root.ok_or_else(|| Error::CorruptSnapshot("no root node".into()))?;
        Ok(MemoryTree {
            root,
            nodes: map,
            embedding_dimension,
            creation_counter,
        })
    }
}

/// Node fields as stored in a snapshot.
pub(crate) struct RawNode {
    pub id: NodeId,
    pub content: Option<String>,
    pub embedding: Option<Embedding>,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub depth: usize,
}

/// Tukey hinges over sorted counts: (q1, median, q3).
fn quartiles(sorted: &[usize]) -> (f64, f64, f64) {
    fn median_of(slice: &[usize]) -> f64 {
        let n = slice.len();
        if n == 0 {
            return 0.0;
        }
        if n % 2 == 1 {
            slice[n / 2] as f64
        } else {
            (slice[n / 2 - 1] + slice[n / 2]) as f64 / 2.0
        }
    }
    let n = sorted.len();
    if n == 0 {
        return (0.0, 0.0, 0.0);
    }
    let median = median_of(sorted);
    let half = n / 2;
    let lower = &sorted[..half + n % 2];
    let upper = &sorted[half..];
    (median_of(lower), median, median_of(upper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::mock_embed;
    use crate::token::WhitespaceTokenizer;

    fn unit(dim: usize, axis: usize) -> Embedding {
        let mut v = vec![0.0; dim];
        v[axis] = 1.0;
        Embedding::new(v).unwrap()
    }

    #[test]
    fn new_tree_is_root_only() {
        let tree = MemoryTree::new(8).unwrap();
        assert_eq!(tree.len(), 1);
        let root = tree.node(tree.root()).unwrap();
        assert!(root.content().is_none());
        assert!(root.embedding().is_none());
        assert_eq!(root.depth(), 0);
        let stats = tree.stats(&WhitespaceTokenizer);
        assert_eq!(stats.max_depth, 0);
        assert_eq!(stats.n_leaves, 1);
        assert!(tree.validate().is_empty());
    }

    #[test]
    fn new_tree_rejects_zero_dimension() {
        assert!(matches!(
            MemoryTree::new(0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn attach_child_depth_and_order() {
        let mut tree = MemoryTree::new(8).unwrap();
        let root = tree.root();
        let a = tree.attach_child(root, "first", unit(8, 0)).unwrap();
        assert_eq!(tree.node(a).unwrap().depth(), 1);
        assert_eq!(tree.node(root).unwrap().children(), &[a]);

        let b = tree.attach_child(root, "second", unit(8, 1)).unwrap();
        assert_eq!(tree.node(root).unwrap().children(), &[a, b]);
        assert!(a < b, "ids follow creation order");
        assert!(tree.validate().is_empty());
    }

    #[test]
    fn attach_child_rejects_bad_input() {
        let mut tree = MemoryTree::new(8).unwrap();
        let root = tree.root();
        let seven = Embedding::new(vec![1.0; 7]).unwrap();
        assert!(matches!(
            tree.attach_child(root, "x", seven),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            tree.attach_child(NodeId(99), "x", unit(8, 0)),
            Err(Error::NotFound(_))
        ));
        assert!(matches!(
            tree.attach_child(root, "", unit(8, 0)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn expand_leaf_demotes_content() {
        let mut tree = MemoryTree::new(8).unwrap();
        let root = tree.root();
        let leaf = tree.attach_child(root, "payload", unit(8, 0)).unwrap();
        let demoted = tree.expand_leaf(leaf).unwrap();

        let expanded = tree.node(leaf).unwrap();
        assert_eq!(expanded.children(), &[demoted]);
        assert!(expanded.pending_aggregation());
        let copy = tree.node(demoted).unwrap();
        assert_eq!(copy.depth(), 2);
        assert_eq!(copy.content(), Some("payload"));
        assert_eq!(copy.embedding(), Some(&unit(8, 0)));
    }

    #[test]
    fn expand_leaf_rejects_root_and_internal() {
        let mut tree = MemoryTree::new(8).unwrap();
        let root = tree.root();
        assert!(matches!(
            tree.expand_leaf(root),
            Err(Error::InvalidState(_))
        ));
        let leaf = tree.attach_child(root, "a", unit(8, 0)).unwrap();
        tree.attach_child(leaf, "b", unit(8, 1)).unwrap();
        tree.attach_child(leaf, "c", unit(8, 2)).unwrap();
        assert!(matches!(
            tree.expand_leaf(leaf),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn expand_marks_stale_until_aggregated() {
        let mut tree = MemoryTree::new(8).unwrap();
        let leaf = tree
            .attach_child(tree.root(), "payload", unit(8, 0))
            .unwrap();
        tree.expand_leaf(leaf).unwrap();

        let violations = tree.validate();
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].node, leaf);
        assert_eq!(violations[0].kind, ViolationKind::StaleContent);

        tree.set_aggregated(leaf, "merged".into(), unit(8, 3)).unwrap();
        assert!(tree.validate().is_empty());
    }

    #[test]
    fn stats_root_plus_two_leaves() {
        let mut tree = MemoryTree::new(8).unwrap();
        let root = tree.root();
        tree.attach_child(root, "one two", unit(8, 0)).unwrap();
        tree.attach_child(root, "three", unit(8, 1)).unwrap();
        let stats = tree.stats(&WhitespaceTokenizer);
        assert_eq!(stats.n_nodes, 3);
        assert_eq!(stats.n_leaves, 2);
        assert_eq!(stats.n_branching, 1);
        assert_eq!(stats.branching_factor, 2.0);
        assert_eq!(stats.max_depth, 1);
        assert_eq!(stats.n_nodes, stats.n_leaves + stats.n_branching);
    }

    // Shape drawn from a production run: 3164 nodes of which 1458 branch
    // (root included) and 1706 are leaves.
    #[test]
    fn stats_large_reference_shape() {
        let mut tree = MemoryTree::new(8).unwrap();
        let root = tree.root();
        let e = || mock_embed("node", 8).unwrap();
        let mut internals = Vec::new();
        for i in 0..1457 {
            internals.push(tree.attach_child(root, format!("i{i}"), e()).unwrap());
        }
        for (i, id) in internals.iter().enumerate() {
            tree.attach_child(*id, format!("l{i}"), e()).unwrap();
        }
        for i in 0..249 {
            tree.attach_child(root, format!("r{i}"), e()).unwrap();
        }
        let stats = tree.stats(&WhitespaceTokenizer);
        assert_eq!(stats.n_nodes, 3164);
        assert_eq!(stats.n_branching, 1458);
        assert_eq!(stats.n_leaves, 1706);
        let expected = 3163.0 / 1458.0;
        assert!((stats.branching_factor - expected).abs() < 1e-12);
        // Rounds to 2.2 at one decimal.
        assert_eq!((stats.branching_factor * 10.0).round() / 10.0, 2.2);
    }

    #[test]
    fn validate_detects_constructed_faults() {
        let mut tree = MemoryTree::new(8).unwrap();
        let leaf = tree.attach_child(tree.root(), "x", unit(8, 0)).unwrap();

        // Depth fault.
        let mut broken = tree.clone();
        broken.nodes.get_mut(&leaf).unwrap().depth = 5;
        let violations = broken.validate();
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].kind, ViolationKind::DepthRule);
        assert_eq!(violations[0].node, leaf);

        // Root given content.
        let mut broken = tree.clone();
        let root = broken.root();
        broken.nodes.get_mut(&root).unwrap().content = Some("oops".into());
        let violations = broken.validate();
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].kind, ViolationKind::RootSentinel);
    }

    #[test]
    fn leaf_descendants_cover_subtree() {
        let mut tree = MemoryTree::new(8).unwrap();
        let root = tree.root();
        let a = tree.attach_child(root, "a", unit(8, 0)).unwrap();
        let b = tree.attach_child(a, "b", unit(8, 1)).unwrap();
        let c = tree.attach_child(a, "c", unit(8, 2)).unwrap();
        let d = tree.attach_child(root, "d", unit(8, 3)).unwrap();
        assert_eq!(tree.leaf_descendants(a).unwrap(), vec![b, c]);
        assert_eq!(tree.leaf_descendants(root).unwrap(), vec![b, c, d]);
        assert_eq!(tree.leaf_descendants(d).unwrap(), vec![d]);
    }

    #[test]
    fn quartiles_handle_small_inputs() {
        assert_eq!(quartiles(&[5]), (5.0, 5.0, 5.0));
        assert_eq!(quartiles(&[1, 3]), (1.0, 2.0, 3.0));
        assert_eq!(quartiles(&[1, 2, 3, 4]), (1.5, 2.5, 3.5));
        assert_eq!(quartiles(&[1, 2, 3, 4, 5]), (2.0, 3.0, 4.0));
    }
}
