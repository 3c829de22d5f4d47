//! Token-budgeted text chunking and dataset-profile defaults.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::token::Tokenizer;

/// One non-overlapping segment of a source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub source_id: String,
    /// Position within the source, starting at 0.
    pub index: usize,
    pub text: String,
    pub token_count: usize,
}

/// Splits `text` into consecutive chunks of at most `max_tokens` tokens.
///
/// Packing is greedy left to right: every chunk except possibly the last
/// holds exactly `max_tokens` tokens, and no token is dropped. Chunk text
/// is the tokens re-joined with single spaces, so concatenation
/// reconstructs the source modulo the tokenizer's whitespace folding.
pub fn chunk_text(
    source_id: &str,
    text: &str,
    max_tokens: usize,
    tokenizer: &dyn Tokenizer,
) -> Result<Vec<Chunk>> {
    if max_tokens == 0 {
        return Err(Error::InvalidArgument("max_tokens must be at least 1".into()));
    }
    let tokens = tokenizer.split(text);
    Ok(tokens
        .chunks(max_tokens)
        .enumerate()
        .map(|(index, window)| Chunk {
            source_id: source_id.to_string(),
            index,
            text: window.join(" "),
            token_count: window.len(),
        })
        .collect())
}

/// Workload presets bundling chunk size, retrieval k, and context budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ChunkProfile {
    /// Long single documents: 512-token chunks, k = 10, 8192-token context.
    #[default]
    SingleDocument,
    /// Multi-document corpora: 1024-token chunks, k = 10, 8192-token
    /// context.
    MultiDocument,
    /// Short per-round dialogue: no chunking, k = 3, 1000-token context.
    Dialogue,
}

impl ChunkProfile {
    /// Chunk size in tokens; `None` means items are inserted whole.
    pub fn chunk_tokens(self) -> Option<usize> {
        match self {
            ChunkProfile::SingleDocument => Some(512),
            ChunkProfile::MultiDocument => Some(1024),
            ChunkProfile::Dialogue => None,
        }
    }

    /// Default retrieval k.
    pub fn k(self) -> usize {
        match self {
            ChunkProfile::SingleDocument | ChunkProfile::MultiDocument => 10,
            ChunkProfile::Dialogue => 3,
        }
    }

    /// Default answer-context token budget.
    pub fn context_budget(self) -> usize {
        match self {
            ChunkProfile::SingleDocument | ChunkProfile::MultiDocument => 8192,
            ChunkProfile::Dialogue => 1000,
        }
    }
}
