//! Content aggregation: merging a parent's summary with newly inserted
//! text, conditioned on the parent's child count.
//!
//! Three interchangeable backends: a remote chat model fed a rendered merge
//! prompt, a deterministic offline mock for reproducible tests, and a
//! mean-embedding mode where "aggregation" happens in vector space and the
//! text is a placeholder marker.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::embed::Embedding;
use crate::error::{Error, Result};
use crate::http::{HttpClient, RemoteConfig};

/// Merge-prompt template; `{n_children}`, `{new_content}`, and
/// `{current_content}` are substituted at render time.
const AGGREGATE_TEMPLATE: &str = "You will receive two pieces of information: New Information is detailed, and Existing Information is a summary from {n_children} previous entries. Your task is to merge these into a single, cohesive summary that highlights the most important insights.\n\n- Focus on the key points from both inputs.\n\n- Ensure the final summary combines the insights from both pieces of information.\n\n- If the number of previous entries in Existing Information is accumulating (more than 2), focus on summarizing more concisely, only capturing the overarching theme, and getting more abstract in your summary.\n\nOutput the summary directly.\n\n[New Information]\n{new_content}\n\n[Existing Information (from {n_children} previous entries)]\n{current_content}\n\n[ Output Summary ]";

/// Renders the merge prompt for one aggregation call.
pub fn render_aggregate_prompt(
    existing: &str,
    new_content: &str,
    n_children: usize,
) -> Result<String> {
    if existing.is_empty() || new_content.is_empty() {
        return Err(Error::InvalidArgument(
            "aggregate prompt requires non-empty existing and new content".into(),
        ));
    }
    if n_children == 0 {
        return Err(Error::InvalidArgument(
            "n_children must be at least 1".into(),
        ));
    }
    Ok(AGGREGATE_TEMPLATE
        .replace("{n_children}", &n_children.to_string())
        .replace("{new_content}", new_content)
        .replace("{current_content}", existing))
}

/// Merges an existing summary with new content given the child count.
pub trait Summarizer: Send + Sync {
    fn aggregate(&self, existing: &str, new_content: &str, n_children: usize)
        -> Result<String>;
}

fn check_aggregate_args(existing: &str, new_content: &str, n_children: usize) -> Result<()> {
    if existing.is_empty() || new_content.is_empty() {
        return Err(Error::InvalidArgument(
            "aggregate requires non-empty existing and new content".into(),
        ));
    }
    if n_children == 0 {
        return Err(Error::InvalidArgument(
            "n_children must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Offline summarizer: tags the child count and keeps a bounded prefix of
/// each side, so tests can assert both inputs and `n` appear in the output.
#[derive(Debug, Clone)]
pub struct MockSummarizer {
    budget: usize,
}

impl MockSummarizer {
    /// `budget` is the maximum number of characters retained per side.
    pub fn new(budget: usize) -> Result<Self> {
        if budget == 0 {
            return Err(Error::InvalidArgument("budget must be positive".into()));
        }
        Ok(MockSummarizer { budget })
    }

    fn truncate(&self, text: &str) -> String {
        text.chars().take(self.budget).collect()
    }
}

impl Summarizer for MockSummarizer {
    fn aggregate(
        &self,
        existing: &str,
        new_content: &str,
        n_children: usize,
    ) -> Result<String> {
        check_aggregate_args(existing, new_content, n_children)?;
        Ok(format!(
            "[AGG n={n_children}] {} || {}",
            self.truncate(existing),
            self.truncate(new_content)
        ))
    }
}

/// Chat-backed summarizer: sends the rendered merge prompt as the sole user
/// message to an OpenAI-compatible chat-completions endpoint.
pub struct ChatSummarizer {
    client: HttpClient,
    model_name: String,
}

impl ChatSummarizer {
    pub fn new(config: RemoteConfig) -> Result<Self> {
        let model_name = config.model_name.clone();
        Ok(ChatSummarizer {
            client: HttpClient::new(config)?,
            model_name,
        })
    }

    /// Sends an arbitrary single-message chat request and returns the
    /// model's reply text.
    pub fn complete(&self, prompt: &str) -> Result<String> {
        let payload = json!({
            "model": self.model_name,
            "messages": [{"role": "user", "content": prompt}],
        });
        let response = self.client.post_json(&payload)?;
        let content = response
            .get("choices")
            .and_then(|c| c.get(0))
            .and_then(|c| c.get("message"))
            .and_then(|m| m.get("content"))
            .and_then(|c| c.as_str())
            .ok_or_else(|| {
                Error::ProtocolError("chat response missing choices[0].message.content".into())
            })?;
        if content.is_empty() {
            return Err(Error::ProtocolError("chat model returned empty text".into()));
        }
        Ok(content.to_string())
    }
}

impl Summarizer for ChatSummarizer {
    fn aggregate(
        &self,
        existing: &str,
        new_content: &str,
        n_children: usize,
    ) -> Result<String> {
        check_aggregate_args(existing, new_content, n_children)?;
        let prompt = render_aggregate_prompt(existing, new_content, n_children)?;
        self.complete(&prompt)
    }
}

/// Aggregation in vector space: the normalized arithmetic mean of the given
/// embeddings. Used where parent vectors must track their leaf descendants
/// exactly (clustering-quality evaluation) instead of re-embedding summary
/// text.
pub fn mean_embedding_merge(embeddings: &[Embedding]) -> Result<Embedding> {
    let first = embeddings
        .first()
        .ok_or_else(|| Error::InvalidArgument("mean of empty embedding list".into()))?;
    let dim = first.dimension();
    let mut sum = vec![0.0; dim];
    for e in embeddings {
        if e.dimension() != dim {
            return Err(Error::InvalidArgument(format!(
                "mixed embedding dimensions: {} and {}",
                dim,
                e.dimension()
            )));
        }
        for (acc, x) in sum.iter_mut().zip(e.values()) {
            *acc += x;
        }
    }
    let n = embeddings.len() as f64;
    for x in &mut sum {
        *x /= n;
    }
    Embedding::new(sum)?.normalized()
}

/// Placeholder content for a node whose embedding is maintained by
/// [`mean_embedding_merge`]; records how many leaves the vector covers.
pub fn mean_embedding_marker(n_leaves: usize) -> String {
    format!("[MEAN over {n_leaves} leaves]")
}

/// How parent content/embeddings are maintained on insertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AggregationMode {
    /// Text summarization via a [`Summarizer`], then re-embed the summary.
    #[default]
    Summarize,
    /// Parent embedding = normalized mean of leaf-descendant embeddings;
    /// content is a marker string. For embedding-space evaluation.
    MeanEmbedding,
}

/// Which summarizer backend to construct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SummarizerKind {
    #[default]
    DeterministicMock,
    RemoteChat,
    MeanEmbedding,
}

/// Declarative summarizer configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummarizerConfig {
    pub kind: SummarizerKind,
    /// Max characters retained per side by the deterministic mock.
    #[serde(default = "default_mock_budget")]
    pub mock_budget: usize,
    /// Endpoint settings; required when kind is remote-chat.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remote: Option<RemoteConfig>,
}

fn default_mock_budget() -> usize {
    400
}

impl Default for SummarizerConfig {
    fn default() -> Self {
        SummarizerConfig {
            kind: SummarizerKind::DeterministicMock,
            mock_budget: default_mock_budget(),
            remote: None,
        }
    }
}

impl SummarizerConfig {
    pub fn aggregation_mode(&self) -> AggregationMode {
        match self.kind {
            SummarizerKind::MeanEmbedding => AggregationMode::MeanEmbedding,
            _ => AggregationMode::Summarize,
        }
    }
}

/// Builds the configured summarizer. Mean-embedding mode has no text
/// backend, so it yields `None`; callers switch on
/// [`SummarizerConfig::aggregation_mode`].
pub fn build_summarizer(config: &SummarizerConfig) -> Result<Option<Box<dyn Summarizer>>> {
    match config.kind {
        SummarizerKind::DeterministicMock => Ok(Some(Box::new(MockSummarizer::new(
            config.mock_budget,
        )?))),
        SummarizerKind::RemoteChat => {
            let remote = config.remote.clone().ok_or_else(|| {
                Error::InvalidArgument(
                    "remote-chat summarizer requires endpoint settings".into(),
                )
            })?;
            Ok(Some(Box::new(ChatSummarizer::new(remote)?)))
        }
        SummarizerKind::MeanEmbedding => Ok(None),
    }
}
