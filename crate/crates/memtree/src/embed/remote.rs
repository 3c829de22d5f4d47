//! Remote embedding provider for OpenAI-compatible `/v1/embeddings` routes.

use serde_json::{json, Value};

pub use crate::http::RemoteConfig;
use crate::http::HttpClient;

use super::{Embedding, EmbeddingProvider};
use crate::error::{Error, Result};

/// HTTP-backed provider. Sends `{"model", "input"}` and reads
/// `{"data": [{"embedding": [...]}]}`; the input text is transmitted
/// byte-exact inside the JSON payload.
pub struct RemoteEmbedder {
    http: HttpClient,
    dimension: usize,
}

impl RemoteEmbedder {
    pub fn new(config: RemoteConfig, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument(
                "embedding dimension must be positive".into(),
            ));
        }
        Ok(RemoteEmbedder {
            http: HttpClient::new(config)?,
            dimension,
        })
    }

    fn parse_response(&self, value: &Value) -> Result<Embedding> {
        let raw = value
            .get("data")
            .and_then(|d| d.get(0))
            .and_then(|first| first.get("embedding"))
            .and_then(|e| e.as_array())
            .ok_or_else(|| {
                Error::ProtocolError("response is missing data[0].embedding".into())
            })?;
        let mut values = Vec::with_capacity(raw.len());
        for entry in raw {
            let v = entry.as_f64().ok_or_else(|| {
                Error::ProtocolError("embedding entry is not a number".into())
            })?;
            values.push(v);
        }
        if values.len() != self.dimension {
            return Err(Error::ProtocolError(format!(
                "provider returned dimension {}, expected {}",
                values.len(),
                self.dimension
            )));
        }
        // Remote vectors are stored verbatim, without re-normalization.
        Embedding::new(values).map_err(|e| Error::ProtocolError(e.to_string()))
    }
}

impl EmbeddingProvider for RemoteEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<Embedding> {
        if text.is_empty() {
            return Err(Error::InvalidArgument("cannot embed empty text".into()));
        }
        let body = json!({
            "model": self.http.config().model_name,
            "input": text,
        });
        let response = self.http.post_json(&body)?;
        self.parse_response(&response)
    }
}
