//! Dynamically growing tree-structured memory over text.
//!
//! New content enters through similarity-guided top-down insertion:
//! traversal descends wherever the best child clears a depth-dependent
//! threshold θ(d) = θ₀·e^{λd̂}, attaches the new leaf, and refreshes every
//! ancestor on the path by aggregating its summary with the raw new text
//! (or, in mean-embedding mode, by averaging leaf embeddings). Queries
//! embed the question and rank nodes by cosine similarity, either over
//! the whole tree or level by level.
//!
//! The [`eval`] module grounds the structure: Moseley-Wang revenue,
//! a brute-force optimal hierarchy for small item sets, an online
//! top-down reference algorithm, and a harness checking the β/3 revenue
//! bound under β-well-separated streams.

pub mod aggregate;
pub mod chunk;
pub mod dot;
pub mod embed;
pub mod error;
pub mod eval;
mod http;
pub mod ingest;
pub mod insert;
pub mod retrieve;
pub mod snapshot;
pub mod token;
pub mod tree;

pub use aggregate::{
    build_summarizer, mean_embedding_marker, mean_embedding_merge, render_aggregate_prompt,
    AggregationMode, ChatSummarizer, MockSummarizer, Summarizer, SummarizerConfig, SummarizerKind,
};
pub use chunk::{chunk_text, Chunk, ChunkProfile};
pub use dot::{export_dot, DotOptions};
pub use embed::{
    build_embedder, cosine_similarity, mock_embed, EmbedderKind, Embedding,
    EmbeddingProvider, EmbeddingProviderConfig, FixtureEmbedder, MemoEmbedder, MockEmbedder,
    RemoteConfig, RemoteEmbedder,
};
pub use error::{Error, Result};
pub use ingest::{ingest_jsonl, FieldMap, IngestOutcome, IngestRecord, LineError};
pub use insert::{
    batch_insert, find_insertion_point, insert, AggregationBackend, BatchOutcome, InsertReport,
    InsertionPoint, ThresholdMode, ThresholdPolicy, TraceStep, TraversalAction,
};
pub use retrieve::{
    collapsed_retrieve, render_answer_prompt, traversal_retrieve, AnswerPrompt, RankedNode,
    RetrievalMode, RetrievalQuery, RetrievalResult,
};
pub use snapshot::{load_snapshot, save_snapshot, SNAPSHOT_FORMAT_VERSION};
pub use token::{Tokenizer, WhitespaceTokenizer};
pub use tree::{
    DepthTokenStats, MemoryNode, MemoryTree, NodeId, TreeStats, Violation, ViolationKind,
};
