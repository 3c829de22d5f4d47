//! Shared HTTP plumbing for the remote embedding and chat providers.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Connection settings for an OpenAI-compatible endpoint.
///
/// `endpoint_url` is the full URL of the target route (e.g.
/// `https://api.openai.com/v1/embeddings`). The API key is read from the
/// environment variable named by `api_key_env` at request time and is never
/// persisted anywhere; `None` sends no Authorization header.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RemoteConfig {
    pub endpoint_url: String,
    pub model_name: String,
    pub api_key_env: Option<String>,
    #[serde(rename = "timeout_seconds", with = "duration_seconds")]
    pub timeout: Duration,
    pub max_retries: u32,
    /// Cap on concurrent requests through one client.
    pub max_in_flight: usize,
}

/// Duration as a positive number of seconds, the form config files use.
mod duration_seconds {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Duration, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(value.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Duration, D::Error> {
        let seconds = f64::deserialize(deserializer)?;
        if !seconds.is_finite() || seconds <= 0.0 {
            return Err(serde::de::Error::custom("timeout_seconds must be positive"));
        }
        Ok(Duration::from_secs_f64(seconds))
    }
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            endpoint_url: String::new(),
            model_name: String::new(),
            api_key_env: None,
            timeout: Duration::from_secs(30),
            max_retries: 3,
            max_in_flight: 8,
        }
    }
}

/// Counting semaphore; std has no stable one.
struct Gate {
    permits: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn new(permits: usize) -> Self {
        Gate {
            permits: Mutex::new(permits.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) {
        let mut n = self.permits.lock().unwrap();
        while *n == 0 {
            n = self.cv.wait(n).unwrap();
        }
        *n -= 1;
    }

    fn release(&self) {
        *self.permits.lock().unwrap() += 1;
        self.cv.notify_one();
    }
}

/// Blocking JSON-over-POST client with retry, auth, and an in-flight cap.
pub(crate) struct HttpClient {
    config: RemoteConfig,
    client: reqwest::blocking::Client,
    gate: Gate,
}

impl HttpClient {
    pub(crate) fn new(config: RemoteConfig) -> Result<Self> {
        if config.endpoint_url.is_empty() {
            return Err(Error::InvalidArgument("endpoint_url must be set".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| Error::ProviderUnavailable(format!("http client: {e}")))?;
        let gate = Gate::new(config.max_in_flight);
        Ok(HttpClient {
            config,
            client,
            gate,
        })
    }

    pub(crate) fn config(&self) -> &RemoteConfig {
        &self.config
    }

    fn api_key(&self) -> Result<Option<String>> {
        match &self.config.api_key_env {
            None => Ok(None),
            Some(name) => match std::env::var(name) {
                Ok(key) => Ok(Some(key)),
                Err(_) => Err(Error::InvalidArgument(format!(
                    "environment variable {name} is not set"
                ))),
            },
        }
    }

    /// POSTs `body`, retrying transport errors, 429, and 5xx with backoff.
    /// Other non-success statuses fail immediately as protocol errors.
    pub(crate) fn post_json(&self, body: &Value) -> Result<Value> {
        let key = self.api_key()?;
        self.gate.acquire();
        let result = self.post_json_inner(body, key.as_deref());
        self.gate.release();
        result
    }

    fn post_json_inner(&self, body: &Value, key: Option<&str>) -> Result<Value> {
        let attempts = self.config.max_retries.saturating_add(1);
        let mut last_failure = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                let backoff = Duration::from_millis(25u64 << attempt.min(4));
                std::thread::sleep(backoff);
            }
            let mut request = self.client.post(&self.config.endpoint_url).json(body);
            if let Some(key) = key {
                request = request.header("Authorization", format!("Bearer {key}"));
            }
            match request.send() {
                Err(e) => {
                    last_failure = format!("transport: {e}");
                }
                Ok(response) => {
                    let status = response.status();
                    if status.is_success() {
                        return response.json::<Value>().map_err(|e| {
                            Error::ProtocolError(format!("response is not JSON: {e}"))
                        });
                    }
                    let text = response.text().unwrap_or_default();
                    if status.as_u16() == 429 || status.is_server_error() {
                        last_failure = format!("status {status}: {text}");
                    } else {
                        return Err(Error::ProtocolError(format!("status {status}: {text}")));
                    }
                }
            }
        }
        Err(Error::ProviderUnavailable(format!(
            "{} after {attempts} attempts: {last_failure}",
            self.config.endpoint_url
        )))
    }
}
