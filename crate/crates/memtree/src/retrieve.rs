//! Query-time retrieval over the tree, plus answer-prompt rendering.
//!
//! Collapsed mode scores every content node as one flat set. Traversal
//! mode walks level by level, keeping the k most similar frontier nodes
//! and pooling everything it visited; it trades recall for fewer
//! comparisons and can miss nodes hidden under a weak ancestor.

use serde::{Deserialize, Serialize};

use crate::embed::{cosine_similarity, Embedding, EmbeddingProvider};
use crate::error::{Error, Result};
use crate::token::Tokenizer;
use crate::tree::{MemoryTree, NodeId};

/// Answer-prompt template; `{query}` and `{retrieved_content}` are
/// substituted at render time.
const ANSWER_TEMPLATE: &str = "Write a high-quality short answer for the given question using only the provided search results (some of which might be irrelevant).\n\n[ Question ]\n{query}\n\n[ Search Results ]\n{retrieved_content}\n\n[ Output ]";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RetrievalMode {
    #[default]
    Collapsed,
    Traversal,
}

/// One retrieval request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalQuery {
    pub text: String,
    pub k: usize,
    pub theta_retrieve: f64,
    pub mode: RetrievalMode,
}

impl RetrievalQuery {
    pub fn new(
        text: impl Into<String>,
        k: usize,
        theta_retrieve: f64,
        mode: RetrievalMode,
    ) -> Result<Self> {
        let query = RetrievalQuery {
            text: text.into(),
            k,
            theta_retrieve,
            mode,
        };
        query.validate()?;
        Ok(query)
    }

    pub fn validate(&self) -> Result<()> {
        if self.text.is_empty() {
            return Err(Error::InvalidArgument("query text must be non-empty".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if !(-1.0..=1.0).contains(&self.theta_retrieve) {
            return Err(Error::InvalidArgument(format!(
                "theta_retrieve must be in [-1, 1], got {}",
                self.theta_retrieve
            )));
        }
        Ok(())
    }
}

/// One scored node in rank order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedNode {
    pub node: NodeId,
    pub similarity: f64,
    pub depth: usize,
    pub content: String,
}

/// Ranked nodes (similarity non-increasing, ties toward smaller id, all at
/// or above the query's threshold) plus the embedded query.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalResult {
    pub ranked: Vec<RankedNode>,
    pub query_embedding: Embedding,
}

/// Scores a set of nodes against the query embedding.
fn score_nodes<'a>(
    tree: &MemoryTree,
    ids: impl Iterator<Item = &'a NodeId>,
    query_embedding: &Embedding,
) -> Result<Vec<(NodeId, f64)>> {
    let mut scored = Vec::new();
    for &id in ids {
        let node = tree.node(id)?;
        let embedding = node
            .embedding()
            .ok_or_else(|| Error::InvalidState(format!("node {id} has no embedding")))?;
        scored.push((id, cosine_similarity(query_embedding, embedding)?));
    }
    Ok(scored)
}

/// Similarity descending, then id ascending.
fn rank_order(scored: &mut [(NodeId, f64)]) {
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("similarities are finite")
            .then(a.0.cmp(&b.0))
    });
}

fn finish(
    tree: &MemoryTree,
    mut scored: Vec<(NodeId, f64)>,
    query: &RetrievalQuery,
    query_embedding: Embedding,
) -> Result<RetrievalResult> {
    scored.retain(|(_, similarity)| *similarity >= query.theta_retrieve);
    rank_order(&mut scored);
    scored.truncate(query.k);
    let mut ranked = Vec::with_capacity(scored.len());
    for (id, similarity) in scored {
        let node = tree.node(id)?;
        ranked.push(RankedNode {
            node: id,
            similarity,
            depth: node.depth(),
            content: node
                .content()
                .ok_or_else(|| Error::InvalidState(format!("node {id} has no content")))?
                .to_string(),
        });
    }
    Ok(RetrievalResult {
        ranked,
        query_embedding,
    })
}

/// Scores every content node (root excluded) as a single flat set, then
/// filters by threshold and keeps the top k.
pub fn collapsed_retrieve(
    tree: &MemoryTree,
    query: &RetrievalQuery,
    embedder: &dyn EmbeddingProvider,
) -> Result<RetrievalResult> {
    query.validate()?;
    let query_embedding = embedder.embed(&query.text)?;
    let ids: Vec<NodeId> = tree
        .nodes()
        .filter(|n| !n.is_root())
        .map(|n| n.id())
        .collect();
    let scored = score_nodes(tree, ids.iter(), &query_embedding)?;
    finish(tree, scored, query, query_embedding)
}

/// Level-by-level greedy retrieval: keep the k most similar frontier
/// nodes, pool them, and expand their children as the next frontier; the
/// final ranking is the top k of the pool.
pub fn traversal_retrieve(
    tree: &MemoryTree,
    query: &RetrievalQuery,
    embedder: &dyn EmbeddingProvider,
) -> Result<RetrievalResult> {
    query.validate()?;
    let query_embedding = embedder.embed(&query.text)?;
    let mut frontier: Vec<NodeId> = tree.node(tree.root())?.children().to_vec();
    let mut pool: Vec<(NodeId, f64)> = Vec::new();
    while !frontier.is_empty() {
        let mut scored = score_nodes(tree, frontier.iter(), &query_embedding)?;
        rank_order(&mut scored);
        scored.truncate(query.k);
        frontier = Vec::new();
        for &(id, _) in &scored {
            frontier.extend_from_slice(tree.node(id)?.children());
        }
        pool.extend(scored);
    }
    finish(tree, pool, query, query_embedding)
}

/// Rendered answer prompt plus how much of the ranking made it in.
#[derive(Debug, Clone, PartialEq)]
pub struct AnswerPrompt {
    pub text: String,
    /// Number of retrieved nodes included.
    pub included: usize,
    /// True when at least one retrieved node was dropped for budget.
    pub truncated: bool,
}

/// Renders the answer prompt, packing retrieved contents in rank order.
/// Nodes are included whole; the first node that would push the running
/// token total past `token_budget` stops the packing.
pub fn render_answer_prompt(
    query_text: &str,
    results: &RetrievalResult,
    token_budget: usize,
    tokenizer: &dyn Tokenizer,
) -> AnswerPrompt {
    let mut blocks: Vec<&str> = Vec::new();
    let mut used = 0usize;
    let mut truncated = false;
    for node in &results.ranked {
        let cost = tokenizer.count(&node.content);
        if used + cost > token_budget {
            truncated = true;
            break;
        }
        used += cost;
        blocks.push(&node.content);
    }
    let text = ANSWER_TEMPLATE
        .replace("{query}", query_text)
        .replace("{retrieved_content}", &blocks.join("\n\n"));
    AnswerPrompt {
        text,
        included: blocks.len(),
        truncated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::MockSummarizer;
    use crate::embed::{FixtureEmbedder, MockEmbedder};
    use crate::insert::{insert, AggregationBackend, ThresholdPolicy};
    use crate::token::WhitespaceTokenizer;
    use proptest::prelude::*;

    /// Root with three leaves whose cosines against "query" are 0.9, 0.5,
    /// and 0.1.
    fn graded_tree() -> (MemoryTree, FixtureEmbedder, [NodeId; 3]) {
        let mut fixtures = FixtureEmbedder::new(4);
        let cos = |c: f64| {
            Embedding::new(vec![c, (1.0 - c * c).sqrt(), 0.0, 0.0]).unwrap()
        };
        fixtures
            .pin("query", Embedding::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap())
            .unwrap();
        let mut tree = MemoryTree::new(4).unwrap();
        let a = tree.attach_child(tree.root(), "high", cos(0.9)).unwrap();
        let b = tree.attach_child(tree.root(), "mid", cos(0.5)).unwrap();
        let c = tree.attach_child(tree.root(), "low", cos(0.1)).unwrap();
        (tree, fixtures, [a, b, c])
    }

    #[test]
    fn collapsed_filters_and_ranks() {
        let (tree, fixtures, [a, b, _]) = graded_tree();
        let query = RetrievalQuery::new("query", 2, 0.3, RetrievalMode::Collapsed).unwrap();
        let result = collapsed_retrieve(&tree, &query, &fixtures).unwrap();
        let ids: Vec<NodeId> = result.ranked.iter().map(|r| r.node).collect();
        assert_eq!(ids, vec![a, b]);
        assert!(result.ranked[0].similarity > result.ranked[1].similarity);
        assert_eq!(result.ranked[0].content, "high");
    }

    #[test]
    fn collapsed_threshold_can_empty_result() {
        let (tree, fixtures, _) = graded_tree();
        let query = RetrievalQuery::new("query", 2, 0.95, RetrievalMode::Collapsed).unwrap();
        let result = collapsed_retrieve(&tree, &query, &fixtures).unwrap();
        assert!(result.ranked.is_empty());
    }

    #[test]
    fn collapsed_saturates_to_all_nodes() {
        let (tree, fixtures, [a, b, c]) = graded_tree();
        let query = RetrievalQuery::new("query", 50, -1.0, RetrievalMode::Collapsed).unwrap();
        let result = collapsed_retrieve(&tree, &query, &fixtures).unwrap();
        let ids: Vec<NodeId> = result.ranked.iter().map(|r| r.node).collect();
        assert_eq!(ids, vec![a, b, c]);
    }

    #[test]
    fn empty_tree_retrieves_nothing() {
        let tree = MemoryTree::new(64).unwrap();
        let embedder = MockEmbedder::new(64).unwrap();
        let query = RetrievalQuery::new("anything", 3, 0.0, RetrievalMode::Collapsed).unwrap();
        assert!(collapsed_retrieve(&tree, &query, &embedder)
            .unwrap()
            .ranked
            .is_empty());
        assert!(traversal_retrieve(&tree, &query, &embedder)
            .unwrap()
            .ranked
            .is_empty());
    }

    #[test]
    fn ties_break_toward_smaller_id() {
        let mut fixtures = FixtureEmbedder::new(4);
        let e = Embedding::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        fixtures.pin("query", e.clone()).unwrap();
        let mut tree = MemoryTree::new(4).unwrap();
        let first = tree.attach_child(tree.root(), "one", e.clone()).unwrap();
        let second = tree.attach_child(tree.root(), "two", e).unwrap();
        let query = RetrievalQuery::new("query", 1, 0.0, RetrievalMode::Collapsed).unwrap();
        let result = collapsed_retrieve(&tree, &query, &fixtures).unwrap();
        assert_eq!(result.ranked[0].node, first);
        assert!(first < second);
    }

    #[test]
    fn query_validation() {
        assert!(RetrievalQuery::new("", 3, 0.0, RetrievalMode::Collapsed).is_err());
        assert!(RetrievalQuery::new("q", 0, 0.0, RetrievalMode::Collapsed).is_err());
        assert!(RetrievalQuery::new("q", 3, 1.5, RetrievalMode::Collapsed).is_err());
        assert!(RetrievalQuery::new("q", 3, -1.0, RetrievalMode::Traversal).is_ok());
    }

    #[test]
    fn traversal_covers_whole_chain() {
        let mut fixtures = FixtureEmbedder::new(4);
        fixtures
            .pin("query", Embedding::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap())
            .unwrap();
        let mut tree = MemoryTree::new(4).unwrap();
        let e = |c: f64| Embedding::new(vec![c, (1.0 - c * c).sqrt(), 0.0, 0.0]).unwrap();
        let a = tree.attach_child(tree.root(), "a", e(0.2)).unwrap();
        let b = tree.attach_child(a, "b", e(0.8)).unwrap();
        tree.attach_child(b, "c", e(0.5)).unwrap();
        let query = RetrievalQuery::new("query", 1, -1.0, RetrievalMode::Traversal).unwrap();
        let result = traversal_retrieve(&tree, &query, &fixtures).unwrap();
        // Frontier never exceeds one node, so the pool is the whole chain
        // and the best of the three wins even with k = 1.
        assert_eq!(result.ranked.len(), 1);
        assert_eq!(result.ranked[0].node, b);
    }

    #[test]
    fn traversal_matches_collapsed_when_k_saturates() {
        let embedder = MockEmbedder::new(32).unwrap();
        let summarizer = MockSummarizer::new(100).unwrap();
        let policy = ThresholdPolicy::default();
        let backend = AggregationBackend::Summarize(&summarizer);
        let mut tree = MemoryTree::new(32).unwrap();
        for text in [
            "alpha beta gamma",
            "alpha beta gamma delta",
            "completely different topic",
            "another unrelated subject",
            "alpha beta",
        ] {
            insert(&mut tree, text, &embedder, &backend, &policy).unwrap();
        }
        // k at least the node count saturates every level.
        let k = tree.len();
        let collapsed = collapsed_retrieve(
            &tree,
            &RetrievalQuery::new("alpha beta", k, -1.0, RetrievalMode::Collapsed).unwrap(),
            &embedder,
        )
        .unwrap();
        let traversal = traversal_retrieve(
            &tree,
            &RetrievalQuery::new("alpha beta", k, -1.0, RetrievalMode::Traversal).unwrap(),
            &embedder,
        )
        .unwrap();
        assert_eq!(collapsed.ranked, traversal.ranked);
    }

    #[test]
    fn traversal_greedy_bias_misses_deep_leaf() {
        // Two branches: A is closer to the query than B at depth 1, but the
        // best node overall is a leaf under B.
        let mut fixtures = FixtureEmbedder::new(4);
        let e = |c: f64| Embedding::new(vec![c, (1.0 - c * c).sqrt(), 0.0, 0.0]).unwrap();
        fixtures
            .pin("query", Embedding::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap())
            .unwrap();
        let mut tree = MemoryTree::new(4).unwrap();
        let a = tree.attach_child(tree.root(), "branch a", e(0.7)).unwrap();
        let b = tree.attach_child(tree.root(), "branch b", e(0.6)).unwrap();
        tree.attach_child(a, "leaf under a", e(0.65)).unwrap();
        tree.attach_child(a, "other leaf under a", e(0.1)).unwrap();
        let best = tree.attach_child(b, "best leaf", e(0.99)).unwrap();
        tree.attach_child(b, "filler leaf", e(0.05)).unwrap();

        let query = RetrievalQuery::new("query", 1, -1.0, RetrievalMode::Traversal).unwrap();
        let traversal = traversal_retrieve(&tree, &query, &fixtures).unwrap();
        assert_ne!(traversal.ranked[0].node, best, "greedy path bias");

        let query = RetrievalQuery::new("query", 1, -1.0, RetrievalMode::Collapsed).unwrap();
        let collapsed = collapsed_retrieve(&tree, &query, &fixtures).unwrap();
        assert_eq!(collapsed.ranked[0].node, best);
    }

    #[test]
    fn answer_prompt_empty_results() {
        let results = RetrievalResult {
            ranked: Vec::new(),
            query_embedding: Embedding::new(vec![1.0]).unwrap(),
        };
        let prompt = render_answer_prompt("what?", &results, 100, &WhitespaceTokenizer);
        assert_eq!(prompt.included, 0);
        assert!(!prompt.truncated);
        assert!(prompt.text.contains("[ Question ]\nwhat?"));
        assert!(prompt.text.contains("[ Search Results ]\n\n"));
        assert!(prompt.text.ends_with("[ Output ]"));
    }

    #[test]
    fn answer_prompt_budget_rules() {
        let (tree, fixtures, _) = graded_tree();
        let query = RetrievalQuery::new("query", 3, -1.0, RetrievalMode::Collapsed).unwrap();
        let results = collapsed_retrieve(&tree, &query, &fixtures).unwrap();

        // Generous budget: all three, in rank order.
        let prompt = render_answer_prompt("q", &results, 100, &WhitespaceTokenizer);
        assert_eq!(prompt.included, 3);
        assert!(!prompt.truncated);
        assert!(prompt.text.contains("high\n\nmid\n\nlow"));

        // Each content is one token; budget 2 keeps the top two.
        let prompt = render_answer_prompt("q", &results, 2, &WhitespaceTokenizer);
        assert_eq!(prompt.included, 2);
        assert!(prompt.truncated);

        // Budget smaller than the first node: nothing packed, flagged.
        let prompt = render_answer_prompt("q", &results, 0, &WhitespaceTokenizer);
        assert_eq!(prompt.included, 0);
        assert!(prompt.truncated);
        assert!(prompt.text.contains("[ Search Results ]\n\n"));
    }

    proptest! {
        /// Raising k never removes a node; raising the threshold never
        /// adds one.
        #[test]
        fn result_monotonicity(
            texts in proptest::collection::vec("[a-z]{3,20}( [a-z]{3,20}){0,5}", 2..10),
            k in 1usize..6,
            theta in -0.5f64..0.5,
        ) {
            let embedder = MockEmbedder::new(16).unwrap();
            let summarizer = MockSummarizer::new(64).unwrap();
            let policy = ThresholdPolicy::default();
            let backend = AggregationBackend::Summarize(&summarizer);
            let mut tree = MemoryTree::new(16).unwrap();
            for text in &texts {
                insert(&mut tree, text, &embedder, &backend, &policy).unwrap();
            }
            let run = |k: usize, theta: f64| {
                let query = RetrievalQuery::new("probe text", k, theta, RetrievalMode::Collapsed).unwrap();
                collapsed_retrieve(&tree, &query, &embedder).unwrap().ranked
            };
            let base = run(k, theta);
            let wider = run(k + 1, theta);
            let stricter = run(k, theta + 0.3);
            let ids = |r: &[RankedNode]| r.iter().map(|n| n.node).collect::<std::collections::HashSet<_>>();
            prop_assert!(ids(&base).is_subset(&ids(&wider)));
            prop_assert!(ids(&stricter).is_subset(&ids(&base)));
        }
    }
}
