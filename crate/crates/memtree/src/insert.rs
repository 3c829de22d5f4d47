//! Top-down insertion: depth-adaptive threshold, similarity-guided
//! traversal, leaf expansion, ancestor updates, and per-insertion
//! accounting.
//!
//! Traversal starts at the root and repeatedly descends into the most
//! similar child while that similarity clears the depth-adaptive
//! threshold; otherwise the new node attaches where traversal stopped.
//! Descending into a childless node is terminal: the leaf expands into a
//! parent holding its demoted copy and the new node side by side.

use serde::{Deserialize, Serialize};

use crate::aggregate::{mean_embedding_marker, mean_embedding_merge, Summarizer};
use crate::embed::{cosine_similarity, Embedding, EmbeddingProvider};
use crate::error::{Error, Result};
use crate::tree::{MemoryTree, NodeId};

/// How depth feeds the similarity threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    /// θ(d) = θ₀·e^{λd}; unbounded, so deep levels stop admitting anything.
    MainText,
    /// θ(d) = θ₀·e^{λd/max_depth}, rescaled to the tree's current height.
    #[default]
    Normalized,
}

/// Similarity-threshold schedule for traversal decisions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPolicy {
    pub theta0: f64,
    pub lambda: f64,
    pub mode: ThresholdMode,
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        ThresholdPolicy {
            theta0: 0.4,
            lambda: 0.5,
            mode: ThresholdMode::Normalized,
        }
    }
}

impl ThresholdPolicy {
    pub fn new(theta0: f64, lambda: f64, mode: ThresholdMode) -> Result<Self> {
        let policy = ThresholdPolicy {
            theta0,
            lambda,
            mode,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta0 > 0.0 && self.theta0 <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "theta0 must be in (0, 1], got {}",
                self.theta0
            )));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be a nonnegative real, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    /// Threshold at `depth`. `max_depth` is the tree's current maximum,
    /// floored at 1; it only matters in normalized mode.
    pub fn threshold(&self, depth: usize, max_depth: usize) -> f64 {
        match self.mode {
            ThresholdMode::MainText => self.theta0 * (self.lambda * depth as f64).exp(),
            ThresholdMode::Normalized => {
                let max_depth = max_depth.max(1) as f64;
                self.theta0 * (self.lambda * depth as f64 / max_depth).exp()
            }
        }
    }
}

/// What traversal decided at one visited node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraversalAction {
    /// Best child cleared the threshold; move into it.
    Descend,
    /// No child cleared the threshold; new node attaches here.
    Attach,
    /// Arrived at a childless node; it expands and adopts the new node.
    ExpandAttach,
}

/// One visited node's decision record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub node: NodeId,
    pub best_child: Option<NodeId>,
    pub best_similarity: Option<f64>,
    pub threshold: f64,
    pub action: TraversalAction,
}

/// Where the new node will go: the attachment parent, whether that parent
/// is a leaf that must expand first, and the per-node decision record.
#[derive(Debug, Clone, PartialEq)]
pub struct InsertionPoint {
    pub parent: NodeId,
    pub expanded: bool,
    pub trace: Vec<TraceStep>,
}

/// Read-only traversal: locates the attachment parent for `new_embedding`.
pub fn find_insertion_point(
    tree: &MemoryTree,
    new_embedding: &Embedding,
    policy: &ThresholdPolicy,
) -> Result<InsertionPoint> {
    if new_embedding.dimension() != tree.embedding_dimension() {
        return Err(Error::InvalidArgument(format!(
            "embedding has dimension {}, tree expects {}",
            new_embedding.dimension(),
            tree.embedding_dimension()
        )));
    }
    policy.validate()?;
    // The divisor is fixed per insertion, before the tree can deepen.
    let max_depth = tree.max_depth();
    let mut trace = Vec::new();
    let mut current = tree.root();
    loop {
        let node = tree.node(current)?;
        let threshold = policy.threshold(node.depth(), max_depth);
        if node.children().is_empty() {
            let expanded = !node.is_root();
            trace.push(TraceStep {
                node: current,
                best_child: None,
                best_similarity: None,
                threshold,
                action: if expanded {
                    TraversalAction::ExpandAttach
                } else {
                    TraversalAction::Attach
                },
            });
            return Ok(InsertionPoint {
                parent: current,
                expanded,
                trace,
            });
        }
        let mut best_child = None;
        let mut best_similarity = f64::NEG_INFINITY;
        for &child in node.children() {
            let embedding = tree
                .node(child)?
                .embedding()
                .ok_or_else(|| Error::InvalidState(format!("node {child} has no embedding")))?;
            let similarity = cosine_similarity(new_embedding, embedding)?;
            // Strict comparison keeps the earliest (smallest) id on ties;
            // child lists are in creation order.
            if similarity > best_similarity {
                best_similarity = similarity;
                best_child = Some(child);
            }
        }
        let best_child = best_child.expect("non-empty child list");
        if best_similarity >= threshold {
            trace.push(TraceStep {
                node: current,
                best_child: Some(best_child),
                best_similarity: Some(best_similarity),
                threshold,
                action: TraversalAction::Descend,
            });
            current = best_child;
        } else {
            trace.push(TraceStep {
                node: current,
                best_child: Some(best_child),
                best_similarity: Some(best_similarity),
                threshold,
                action: TraversalAction::Attach,
            });
            return Ok(InsertionPoint {
                parent: current,
                expanded: false,
                trace,
            });
        }
    }
}

/// Text or vector-space backend for ancestor updates.
pub enum AggregationBackend<'a> {
    /// Merge summaries with a [`Summarizer`], then re-embed the new text.
    Summarize(&'a dyn Summarizer),
    /// Maintain parents as normalized means of leaf-descendant embeddings;
    /// content becomes a coverage marker.
    MeanEmbedding,
}

/// Outcome of one insertion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InsertReport {
    /// The leaf created for the raw input text.
    pub new_node: NodeId,
    /// Root-to-attachment-parent path (the nodes traversal visited).
    pub path: Vec<NodeId>,
    pub decision_trace: Vec<TraceStep>,
    pub embed_calls: usize,
    pub aggregate_calls: usize,
}

/// Precomputed payload for one ancestor, applied at commit.
struct AncestorUpdate {
    node: NodeId,
    content: String,
    embedding: Embedding,
}

/// Inserts `content` as a new leaf, updating every content-bearing
/// ancestor on the traversal path.
///
/// All provider calls happen before any mutation: on error the tree is
/// untouched.
pub fn insert(
    tree: &mut MemoryTree,
    content: &str,
    embedder: &dyn EmbeddingProvider,
    aggregation: &AggregationBackend<'_>,
    policy: &ThresholdPolicy,
) -> Result<InsertReport> {
    if content.is_empty() {
        return Err(Error::InvalidArgument("content must be non-empty".into()));
    }
    let new_embedding = embed_checked(tree, embedder, content)?;
    let point = find_insertion_point(tree, &new_embedding, policy)?;
    let path: Vec<NodeId> = point.trace.iter().map(|step| step.node).collect();

    // Every non-root node on the path aggregates against the raw new text
    // (not cascaded summaries), conditioned on its post-attachment child
    // count. Precompute all payloads so the commit below cannot fail.
    let mut updates = Vec::with_capacity(path.len().saturating_sub(1));
    for &ancestor in &path[1..] {
        let node = tree.node(ancestor)?;
        let n_children = if ancestor == point.parent {
            // The attachment site gains the new node; an expanding leaf
            // also gains its demoted copy.
            if point.expanded {
                2
            } else {
                node.children().len() + 1
            }
        } else {
            node.children().len()
        };
        let existing = node
            .content()
            .ok_or_else(|| Error::InvalidState(format!("node {ancestor} has no content")))?;
        let (merged, embedding) = match aggregation {
            AggregationBackend::Summarize(summarizer) => {
                let merged = summarizer.aggregate(existing, content, n_children)?;
                if merged.is_empty() {
                    return Err(Error::ProtocolError(
                        "summarizer returned empty text".into(),
                    ));
                }
                let embedding = embed_checked(tree, embedder, &merged)?;
                (merged, embedding)
            }
            AggregationBackend::MeanEmbedding => {
                // Attachment only ever adds the new vector to each path
                // ancestor's leaf set (an expanding leaf is replaced by its
                // identically-embedded demoted copy), so the post-commit
                // mean is computable up front.
                let mut leaf_embeddings = Vec::new();
                for leaf in tree.leaf_descendants(ancestor)? {
                    let embedding = tree.node(leaf)?.embedding().ok_or_else(|| {
                        Error::InvalidState(format!("node {leaf} has no embedding"))
                    })?;
                    leaf_embeddings.push(embedding.clone());
                }
                leaf_embeddings.push(new_embedding.clone());
                let merged = mean_embedding_marker(leaf_embeddings.len());
                let embedding = mean_embedding_merge(&leaf_embeddings)?;
                (merged, embedding)
            }
        };
        updates.push(AncestorUpdate {
            node: ancestor,
            content: merged,
            embedding,
        });
    }

    // Commit: structural changes plus precomputed payload swaps.
    if point.expanded {
        tree.expand_leaf(point.parent)
            .expect("traversal returned a childless non-root node");
    }
    let new_node = tree
        .attach_child(point.parent, content, new_embedding)
        .expect("parent exists and payload was validated");
    for update in &updates {
        tree.set_aggregated(update.node, update.content.clone(), update.embedding.clone())
            .expect("ancestor exists and payload was validated");
    }

    let aggregate_calls = updates.len();
    Ok(InsertReport {
        new_node,
        path,
        decision_trace: point.trace,
        embed_calls: aggregate_calls + 1,
        aggregate_calls,
    })
}

fn embed_checked(
    tree: &MemoryTree,
    embedder: &dyn EmbeddingProvider,
    text: &str,
) -> Result<Embedding> {
    let embedding = embedder.embed(text)?;
    if embedding.dimension() != tree.embedding_dimension() {
        return Err(Error::ProtocolError(format!(
            "provider returned dimension {}, tree expects {}",
            embedding.dimension(),
            tree.embedding_dimension()
        )));
    }
    Ok(embedding)
}

/// Reports for the items inserted before a failure, plus the failure.
#[derive(Debug)]
pub struct BatchOutcome {
    pub reports: Vec<InsertReport>,
    /// Index of the first failing item and its error, if any.
    pub failure: Option<(usize, Error)>,
}

impl BatchOutcome {
    pub fn is_ok(&self) -> bool {
        self.failure.is_none()
    }

    /// Reports on full success, first error otherwise.
    pub fn into_result(self) -> Result<Vec<InsertReport>> {
        match self.failure {
            None => Ok(self.reports),
            Some((_, error)) => Err(error),
        }
    }
}

/// Folds [`insert`] over `contents` in order, stopping at the first error.
pub fn batch_insert<S: AsRef<str>>(
    tree: &mut MemoryTree,
    contents: &[S],
    embedder: &dyn EmbeddingProvider,
    aggregation: &AggregationBackend<'_>,
    policy: &ThresholdPolicy,
) -> BatchOutcome {
    let mut reports = Vec::with_capacity(contents.len());
    for (index, content) in contents.iter().enumerate() {
        match insert(tree, content.as_ref(), embedder, aggregation, policy) {
            Ok(report) => reports.push(report),
            Err(error) => {
                return BatchOutcome {
                    reports,
                    failure: Some((index, error)),
                }
            }
        }
    }
    BatchOutcome {
        reports,
        failure: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::MockSummarizer;
    use crate::embed::{FixtureEmbedder, MockEmbedder};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn axis(dim: usize, i: usize) -> Embedding {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Embedding::new(v).unwrap()
    }

    #[test]
    fn threshold_reference_values() {
        let normalized = ThresholdPolicy::default();
        assert_abs_diff_eq!(normalized.threshold(0, 10), 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(normalized.threshold(10, 10), 0.65949, epsilon = 1e-5);
        let main_text = ThresholdPolicy::new(0.4, 0.5, ThresholdMode::MainText).unwrap();
        assert_abs_diff_eq!(main_text.threshold(2, 2), 1.08731, epsilon = 1e-5);
        // In main-text mode the depth scaling ignores max_depth entirely.
        assert_eq!(main_text.threshold(2, 2), main_text.threshold(2, 50));
    }

    #[test]
    fn threshold_floors_max_depth() {
        let policy = ThresholdPolicy::default();
        // Empty tree: max_depth 0 is treated as 1.
        assert_eq!(policy.threshold(0, 0), 0.4);
        assert_eq!(policy.threshold(1, 0), policy.threshold(1, 1));
    }

    #[test]
    fn policy_rejects_bad_parameters() {
        assert!(ThresholdPolicy::new(0.0, 0.5, ThresholdMode::Normalized).is_err());
        assert!(ThresholdPolicy::new(1.5, 0.5, ThresholdMode::Normalized).is_err());
        assert!(ThresholdPolicy::new(0.4, -0.1, ThresholdMode::Normalized).is_err());
        assert!(ThresholdPolicy::new(0.4, f64::NAN, ThresholdMode::Normalized).is_err());
        assert!(ThresholdPolicy::new(1.0, 0.0, ThresholdMode::MainText).is_ok());
    }

    #[test]
    fn find_point_empty_tree() {
        let tree = MemoryTree::new(4).unwrap();
        let point =
            find_insertion_point(&tree, &axis(4, 0), &ThresholdPolicy::default()).unwrap();
        assert_eq!(point.parent, tree.root());
        assert!(!point.expanded);
        assert_eq!(point.trace.len(), 1);
        assert_eq!(point.trace[0].action, TraversalAction::Attach);
        assert_eq!(point.trace[0].best_child, None);
    }

    #[test]
    fn find_point_descends_into_similar_leaf() {
        let mut tree = MemoryTree::new(4).unwrap();
        let leaf = tree.attach_child(tree.root(), "a", axis(4, 0)).unwrap();
        // cosine(query, leaf) = 0.9.
        let query = Embedding::new(vec![0.9, (1.0f64 - 0.81).sqrt(), 0.0, 0.0]).unwrap();
        let point = find_insertion_point(&tree, &query, &ThresholdPolicy::default()).unwrap();
        assert!(point.expanded);
        assert_eq!(point.parent, leaf);
        assert_eq!(point.trace.len(), 2);
        assert_eq!(point.trace[0].action, TraversalAction::Descend);
        assert_abs_diff_eq!(
            point.trace[0].best_similarity.unwrap(),
            0.9,
            epsilon = 1e-12
        );
        assert_eq!(point.trace[1].action, TraversalAction::ExpandAttach);
    }

    #[test]
    fn find_point_attaches_below_threshold() {
        let mut tree = MemoryTree::new(4).unwrap();
        let a = tree.attach_child(tree.root(), "a", axis(4, 0)).unwrap();
        tree.attach_child(tree.root(), "b", axis(4, 1)).unwrap();
        // cosines 0.35 and 0.2, both under θ(0) = 0.4.
        let query = Embedding::new(vec![
            0.35,
            0.2,
            (1.0f64 - 0.35 * 0.35 - 0.2 * 0.2).sqrt(),
            0.0,
        ])
        .unwrap();
        let point = find_insertion_point(&tree, &query, &ThresholdPolicy::default()).unwrap();
        assert_eq!(point.parent, tree.root());
        assert!(!point.expanded);
        assert_eq!(point.trace.len(), 1);
        assert_eq!(point.trace[0].action, TraversalAction::Attach);
        assert_eq!(point.trace[0].best_child, Some(a));
        assert_abs_diff_eq!(
            point.trace[0].best_similarity.unwrap(),
            0.35,
            epsilon = 1e-12
        );
    }

    #[test]
    fn find_point_breaks_ties_toward_earliest() {
        let mut tree = MemoryTree::new(4).unwrap();
        let first = tree.attach_child(tree.root(), "a", axis(4, 0)).unwrap();
        tree.attach_child(tree.root(), "b", axis(4, 0)).unwrap();
        let point =
            find_insertion_point(&tree, &axis(4, 0), &ThresholdPolicy::default()).unwrap();
        assert_eq!(point.trace[0].best_child, Some(first));
    }

    #[test]
    fn find_point_rejects_dimension_mismatch() {
        let tree = MemoryTree::new(4).unwrap();
        let result = find_insertion_point(&tree, &axis(8, 0), &ThresholdPolicy::default());
        assert!(matches!(result, Err(Error::InvalidArgument(_))));
    }

    fn mock_setup() -> (MockEmbedder, MockSummarizer, ThresholdPolicy) {
        (
            MockEmbedder::new(64).unwrap(),
            MockSummarizer::new(200).unwrap(),
            ThresholdPolicy::default(),
        )
    }

    #[test]
    fn insert_into_empty_tree() {
        let (embedder, summarizer, policy) = mock_setup();
        let mut tree = MemoryTree::new(64).unwrap();
        let report = insert(
            &mut tree,
            "hello world",
            &embedder,
            &AggregationBackend::Summarize(&summarizer),
            &policy,
        )
        .unwrap();
        assert_eq!(report.aggregate_calls, 0);
        assert_eq!(report.embed_calls, 1);
        assert_eq!(report.path, vec![tree.root()]);
        let node = tree.node(report.new_node).unwrap();
        assert_eq!(node.depth(), 1);
        assert_eq!(node.content(), Some("hello world"));
        assert!(tree.validate().is_empty());
    }

    #[test]
    fn orthogonal_inserts_become_siblings() {
        let mut fixtures = FixtureEmbedder::new(4);
        fixtures.pin("alpha", axis(4, 0)).unwrap();
        fixtures.pin("beta", axis(4, 1)).unwrap();
        let summarizer = MockSummarizer::new(200).unwrap();
        let policy = ThresholdPolicy::default();
        let mut tree = MemoryTree::new(4).unwrap();
        let backend = AggregationBackend::Summarize(&summarizer);
        insert(&mut tree, "alpha", &fixtures, &backend, &policy).unwrap();
        insert(&mut tree, "beta", &fixtures, &backend, &policy).unwrap();
        let root = tree.node(tree.root()).unwrap();
        assert_eq!(root.children().len(), 2);
        assert!(tree
            .nodes()
            .filter(|n| !n.is_root())
            .all(|n| n.depth() == 1));
    }

    #[test]
    fn duplicate_insert_expands_leaf() {
        let (embedder, summarizer, policy) = mock_setup();
        let mut tree = MemoryTree::new(64).unwrap();
        let backend = AggregationBackend::Summarize(&summarizer);
        let first = insert(&mut tree, "same text", &embedder, &backend, &policy).unwrap();
        let second = insert(&mut tree, "same text", &embedder, &backend, &policy).unwrap();

        assert_eq!(second.aggregate_calls, 1);
        assert_eq!(second.embed_calls, 2);
        let parent = tree.node(first.new_node).unwrap();
        assert_eq!(parent.depth(), 1);
        assert_eq!(parent.children().len(), 2);
        assert_eq!(
            parent.content(),
            Some("[AGG n=2] same text || same text"),
            "expanded leaf holds the aggregated summary"
        );
        let copy = tree.node(parent.children()[0]).unwrap();
        assert_eq!(copy.content(), Some("same text"));
        assert_eq!(copy.depth(), 2);
        let new_node = tree.node(second.new_node).unwrap();
        assert_eq!(new_node.depth(), 2);
        assert!(tree.validate().is_empty());
        // The report's path ends at the expanded leaf.
        assert_eq!(second.path, vec![tree.root(), first.new_node]);
    }

    #[test]
    fn ancestor_embeddings_track_content() {
        let (embedder, summarizer, policy) = mock_setup();
        let mut tree = MemoryTree::new(64).unwrap();
        let backend = AggregationBackend::Summarize(&summarizer);
        for text in ["the quick brown fox", "the quick brown fox jumps", "the quick fox"] {
            insert(&mut tree, text, &embedder, &backend, &policy).unwrap();
        }
        for node in tree.nodes().filter(|n| !n.is_root()) {
            let expected = embedder.embed(node.content().unwrap()).unwrap();
            assert_eq!(node.embedding(), Some(&expected), "embedding never stale");
        }
    }

    #[test]
    fn failed_insert_leaves_tree_unchanged() {
        let mut fixtures = FixtureEmbedder::new(4);
        fixtures.pin("alpha", axis(4, 0)).unwrap();
        fixtures.pin("alpha twin", axis(4, 0)).unwrap();
        // The aggregated summary's embedding is deliberately not pinned, so
        // the re-embed in the precompute phase fails.
        let summarizer = MockSummarizer::new(200).unwrap();
        let policy = ThresholdPolicy::default();
        let mut tree = MemoryTree::new(4).unwrap();
        let backend = AggregationBackend::Summarize(&summarizer);
        insert(&mut tree, "alpha", &fixtures, &backend, &policy).unwrap();
        let before = tree.clone();
        let result = insert(&mut tree, "alpha twin", &fixtures, &backend, &policy);
        assert!(matches!(result, Err(Error::NotFound(_))));
        assert_eq!(tree, before, "all-or-nothing commit");
    }

    #[test]
    fn mean_embedding_mode_keeps_parent_means() {
        let mut fixtures = FixtureEmbedder::new(2);
        fixtures.pin("a", axis(2, 0)).unwrap();
        fixtures
            .pin(
                "b",
                Embedding::new(vec![0.8, (1.0f64 - 0.64).sqrt()]).unwrap(),
            )
            .unwrap();
        let policy = ThresholdPolicy::default();
        let mut tree = MemoryTree::new(2).unwrap();
        let backend = AggregationBackend::MeanEmbedding;
        insert(&mut tree, "a", &fixtures, &backend, &policy).unwrap();
        let report = insert(&mut tree, "b", &fixtures, &backend, &policy).unwrap();
        assert_eq!(report.aggregate_calls, 1);
        assert_eq!(report.embed_calls, 2);

        // cosine(a, b) = 0.8 ≥ 0.4, so the first leaf expanded; its vector
        // is now the normalized mean of its two leaves.
        let parent = tree.node(report.path[1]).unwrap();
        assert_eq!(parent.content(), Some("[MEAN over 2 leaves]"));
        let expected = mean_embedding_merge(&[
            fixtures.embed("a").unwrap(),
            fixtures.embed("b").unwrap(),
        ])
        .unwrap();
        let parent_embedding = parent.embedding().unwrap();
        for (got, want) in parent_embedding.values().iter().zip(expected.values()) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        }
        assert!(tree.validate().is_empty());
    }

    #[test]
    fn batch_insert_orthogonal_items() {
        let mut fixtures = FixtureEmbedder::new(8);
        let contents: Vec<String> = (0..5).map(|i| format!("item {i}")).collect();
        for (i, content) in contents.iter().enumerate() {
            fixtures.pin(content, axis(8, i)).unwrap();
        }
        let summarizer = MockSummarizer::new(200).unwrap();
        let policy = ThresholdPolicy::default();
        let mut tree = MemoryTree::new(8).unwrap();
        let outcome = batch_insert(
            &mut tree,
            &contents,
            &fixtures,
            &AggregationBackend::Summarize(&summarizer),
            &policy,
        );
        assert!(outcome.is_ok());
        assert_eq!(outcome.reports.len(), 5);
        let stats = tree.stats(&crate::token::WhitespaceTokenizer);
        assert_eq!(stats.n_leaves, 5);
        assert_eq!(stats.max_depth, 1);
    }

    #[test]
    fn batch_insert_empty_and_fail_fast() {
        let (embedder, summarizer, policy) = mock_setup();
        let mut tree = MemoryTree::new(64).unwrap();
        let backend = AggregationBackend::Summarize(&summarizer);
        let outcome = batch_insert::<&str>(&mut tree, &[], &embedder, &backend, &policy);
        assert!(outcome.is_ok() && outcome.reports.is_empty());
        assert_eq!(tree.len(), 1);

        let outcome = batch_insert(
            &mut tree,
            &["good", "", "never reached"],
            &embedder,
            &backend,
            &policy,
        );
        assert_eq!(outcome.reports.len(), 1);
        let (index, error) = outcome.failure.as_ref().unwrap();
        assert_eq!(*index, 1);
        assert!(matches!(error, Error::InvalidArgument(_)));
        // The failing item inserted nothing: root plus the one good leaf.
        assert_eq!(tree.len(), 2);
    }

    #[test]
    fn replay_reproduces_identical_trees() {
        let (embedder, summarizer, policy) = mock_setup();
        let contents = [
            "memory systems for conversational agents",
            "hierarchical clustering of embeddings",
            "memory systems that cluster embeddings",
            "a note about gardening",
        ];
        let backend = AggregationBackend::Summarize(&summarizer);
        let mut first = MemoryTree::new(64).unwrap();
        let mut second = MemoryTree::new(64).unwrap();
        batch_insert(&mut first, &contents, &embedder, &backend, &policy)
            .into_result()
            .unwrap();
        batch_insert(&mut second, &contents, &embedder, &backend, &policy)
            .into_result()
            .unwrap();
        assert_eq!(first, second);
    }

    proptest! {
        #[test]
        fn threshold_monotone_in_depth(
            theta0 in 0.05f64..=1.0,
            lambda in 0.01f64..4.0,
            depth in 0usize..30,
            max_depth in 1usize..40,
        ) {
            let max_depth = max_depth.max(depth + 1);
            for mode in [ThresholdMode::MainText, ThresholdMode::Normalized] {
                let policy = ThresholdPolicy::new(theta0, lambda, mode).unwrap();
                prop_assert!(
                    policy.threshold(depth + 1, max_depth) > policy.threshold(depth, max_depth)
                );
            }
        }

        #[test]
        fn every_insert_adds_one_leaf(texts in proptest::collection::vec("[a-z ]{1,40}", 1..12)) {
            let embedder = MockEmbedder::new(16).unwrap();
            let summarizer = MockSummarizer::new(64).unwrap();
            let policy = ThresholdPolicy::default();
            let backend = AggregationBackend::Summarize(&summarizer);
            let mut tree = MemoryTree::new(16).unwrap();
            for (i, text) in texts.iter().enumerate() {
                insert(&mut tree, text, &embedder, &backend, &policy).unwrap();
                let stats = tree.stats(&crate::token::WhitespaceTokenizer);
                prop_assert_eq!(stats.n_leaves, i + 1);
            }
            prop_assert!(tree.validate().is_empty());
        }
    }
}
