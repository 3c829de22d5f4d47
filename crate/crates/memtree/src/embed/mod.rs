//! Embedding providers and similarity math.
//!
//! Exposes a deterministic offline provider (signed trigram hashing, unit
//! L2 norm), a remote provider speaking the OpenAI-compatible embeddings
//! protocol, and a fixture provider that serves pinned vectors for
//! evaluation runs.

mod remote;

pub use remote::{RemoteConfig, RemoteEmbedder};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed-dimension real vector with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Embedding(Vec<f64>);

impl Embedding {
    /// Wraps `values`, rejecting NaN and infinite entries.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("embedding must be non-empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "embedding entries must be finite".into(),
            ));
        }
        Ok(Embedding(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn l2_norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Embedding) -> Result<f64> {
        if self.dimension() != other.dimension() {
            return Err(Error::InvalidArgument(format!(
                "dimension mismatch: {} vs {}",
                self.dimension(),
                other.dimension()
            )));
        }
        Ok(self
            .0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Scaled copy with unit L2 norm. Errors on the zero vector.
    pub fn normalized(&self) -> Result<Embedding> {
        let norm = self.l2_norm();
        if norm == 0.0 {
            return Err(Error::DegenerateEmbedding(
                "cannot normalize the zero vector".into(),
            ));
        }
        Ok(Embedding(self.0.iter().map(|v| v / norm).collect()))
    }
}

/// Cosine similarity `dot(a,b) / (|a||b|)`.
///
/// Both vectors must be nonzero and of equal dimension. Symmetric by
/// construction: the same expression is evaluated regardless of order.
pub fn cosine_similarity(a: &Embedding, b: &Embedding) -> Result<f64> {
    let dot = a.dot(b)?;
    let na = a.l2_norm();
    let nb = b.l2_norm();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::InvalidArgument(
            "cosine similarity of a zero vector is undefined".into(),
        ));
    }
    Ok(dot / (na * nb))
}

/// Produces embeddings of a fixed dimension.
pub trait EmbeddingProvider: Send + Sync {
    fn dimension(&self) -> usize;

    /// Embeds `text`. Empty text is rejected.
    fn embed(&self, text: &str) -> Result<Embedding>;
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a, fixed here so hashes are stable across platforms and releases.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Deterministic offline embedding: signed trigram hashing.
///
/// Character trigrams of the lowercased text are hashed into `dimension`
/// buckets; the hash's low bit picks the sign. The accumulated vector is
/// L2-normalized, so cosine similarity correlates with lexical overlap.
/// Texts too short for a trigram fall back to single-character hashing.
pub fn mock_embed(text: &str, dimension: usize) -> Result<Embedding> {
    if text.is_empty() {
        return Err(Error::InvalidArgument("cannot embed empty text".into()));
    }
    if dimension < 8 {
        return Err(Error::InvalidArgument(format!(
            "mock embedding dimension must be at least 8, got {dimension}"
        )));
    }
    let lowered = text.to_lowercase();
    let chars: Vec<char> = lowered.chars().collect();
    let mut buckets = vec![0.0f64; dimension];
    let mut accumulate = |unit: &str| {
        let h = fnv1a64(unit.as_bytes());
        let sign = if h & 1 == 0 { 1.0 } else { -1.0 };
        let bucket = ((h >> 1) % dimension as u64) as usize;
        buckets[bucket] += sign;
    };
    if chars.len() >= 3 {
        let mut buf = String::with_capacity(12);
        for window in chars.windows(3) {
            buf.clear();
            buf.extend(window);
            accumulate(&buf);
        }
    } else {
        let mut buf = String::with_capacity(4);
        for &c in &chars {
            buf.clear();
            buf.push(c);
            accumulate(&buf);
        }
    }
    // Signed counts can cancel to zero on pathological inputs; pin a single
    // text-level bucket so the output stays normalizable.
    if buckets.iter().all(|v| *v == 0.0) {
        let bucket = (fnv1a64(lowered.as_bytes()) % dimension as u64) as usize;
        buckets[bucket] = 1.0;
    }
    Embedding::new(buckets)?.normalized()
}

/// Offline provider wrapping [`mock_embed`]; a pure function of
/// `(text, dimension)`.
#[derive(Debug, Clone)]
pub struct MockEmbedder {
    dimension: usize,
}

impl MockEmbedder {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension < 8 {
            return Err(Error::InvalidArgument(format!(
                "mock embedding dimension must be at least 8, got {dimension}"
            )));
        }
        Ok(MockEmbedder { dimension })
    }
}

impl EmbeddingProvider for MockEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<Embedding> {
        mock_embed(text, self.dimension)
    }
}

/// Serves pinned vectors keyed by exact text; unknown text is an error.
///
/// Used by the evaluation harness to realize a similarity matrix with known
/// vectors, and by tests that need hand-constructed geometry.
#[derive(Debug, Clone, Default)]
pub struct FixtureEmbedder {
    dimension: usize,
    vectors: std::collections::HashMap<String, Embedding>,
}

impl FixtureEmbedder {
    pub fn new(dimension: usize) -> Self {
        FixtureEmbedder {
            dimension,
            vectors: std::collections::HashMap::new(),
        }
    }

    pub fn pin(&mut self, text: impl Into<String>, embedding: Embedding) -> Result<()> {
        if embedding.dimension() != self.dimension {
            return Err(Error::InvalidArgument(format!(
                "fixture vector has dimension {}, expected {}",
                embedding.dimension(),
                self.dimension
            )));
        }
        self.vectors.insert(text.into(), embedding);
        Ok(())
    }
}

impl EmbeddingProvider for FixtureEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<Embedding> {
        if text.is_empty() {
            return Err(Error::InvalidArgument("cannot embed empty text".into()));
        }
        self.vectors
            .get(text)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("no fixture vector pinned for {text:?}")))
    }
}

/// In-memory memo keyed by exact text, in front of any provider.
pub struct MemoEmbedder<P> {
    inner: P,
    cache: std::sync::Mutex<std::collections::HashMap<String, Embedding>>,
}

impl<P: EmbeddingProvider> MemoEmbedder<P> {
    pub fn new(inner: P) -> Self {
        MemoEmbedder {
            inner,
            cache: std::sync::Mutex::new(std::collections::HashMap::new()),
        }
    }
}

impl<P: EmbeddingProvider> EmbeddingProvider for MemoEmbedder<P> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn embed(&self, text: &str) -> Result<Embedding> {
        if let Some(hit) = self.cache.lock().unwrap().get(text) {
            return Ok(hit.clone());
        }
        let fresh = self.inner.embed(text)?;
        self.cache
            .lock()
            .unwrap()
            .insert(text.to_string(), fresh.clone());
        Ok(fresh)
    }
}

/// Which embedding backend to construct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbedderKind {
    DeterministicMock,
    Remote,
}

/// Full provider configuration; `remote` is required for the remote kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingProviderConfig {
    pub kind: EmbedderKind,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remote: Option<RemoteConfig>,
}

/// Builds a provider from its configuration.
pub fn build_embedder(config: &EmbeddingProviderConfig) -> Result<Box<dyn EmbeddingProvider>> {
    match config.kind {
        EmbedderKind::DeterministicMock => Ok(Box::new(MockEmbedder::new(config.dimension)?)),
        EmbedderKind::Remote => {
            let remote = config.remote.clone().ok_or_else(|| {
                Error::InvalidArgument("remote embedder requires remote settings".into())
            })?;
            Ok(Box::new(RemoteEmbedder::new(remote, config.dimension)?))
        }
    }
}
