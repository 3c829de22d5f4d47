//! Pluggable token counting.
//!
//! Token counts drive chunk boundaries, per-depth tree statistics, and the
//! retrieval context budget. The default splits on Unicode whitespace, which
//! is deterministic and dependency-free; a model tokenizer can be dropped in
//! behind the same trait.

/// Splits text into tokens.
pub trait Tokenizer: Send + Sync {
    /// Token spans of `text`, in order.
    fn split<'t>(&self, text: &'t str) -> Vec<&'t str>;

    /// Number of tokens in `text`.
    fn count(&self, text: &str) -> usize {
        self.split(text).len()
    }
}

/// Whitespace-delimited tokens.
#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceTokenizer;

impl Tokenizer for WhitespaceTokenizer {
    fn split<'t>(&self, text: &'t str) -> Vec<&'t str> {
        text.split_whitespace().collect()
    }

    fn count(&self, text: &str) -> usize {
        text.split_whitespace().count()
    }
}
