//! OpenAI-compatible chat-completion client.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Environment variable holding the bearer token.
pub const API_KEY_ENV: &str = "GRAPHBLOCKS_API_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndpointConfig {
    pub base_url: String,
    pub model: String,
    pub temperature: f64,
    pub max_completion_tokens: u32,
    pub top_p: f64,
    /// Sent only when set; not every model accepts it.
    pub reasoning_effort: Option<String>,
    /// Sent only when set. Runs do not rely on it.
    pub seed: Option<u64>,
    /// Attempts per request, including the first.
    pub max_attempts: u32,
    /// Delay before the first retry; doubles on each further retry.
    pub backoff_ms: u64,
    pub timeout_secs: u64,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            base_url: "https://api.groq.com/openai/v1".into(),
            model: "openai/gpt-oss-120b".into(),
            temperature: 1.0,
            max_completion_tokens: 8192,
            top_p: 1.0,
            reasoning_effort: Some("medium".into()),
            seed: None,
            max_attempts: 3,
            backoff_ms: 1000,
            timeout_secs: 300,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("authentication failed: {0}")]
    AuthError(String),
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("transport error: {0}")]
    TransportError(String),
    #[error("the endpoint returned no message content")]
    EmptyResponse,
    #[error("invalid endpoint config: {0}")]
    InvalidConfig(String),
}

impl EndpointConfig {
    pub fn check(&self) -> Result<(), QueryError> {
        if !(self.temperature >= 0.0) {
            return Err(QueryError::InvalidConfig("temperature must be at least 0".into()));
        }
        if self.max_completion_tokens < 1 {
            return Err(QueryError::InvalidConfig("max_completion_tokens must be at least 1".into()));
        }
        if self.max_attempts < 1 {
            return Err(QueryError::InvalidConfig("max_attempts must be at least 1".into()));
        }
        Ok(())
    }

    /// JSON body of a chat-completion request. Key order is fixed, so the
    /// serialized form is stable and can be hashed.
    pub fn request_body(&self, system: &str, user: &str) -> Value {
        let mut body = json!({
            "model": self.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
            "temperature": self.temperature,
            "top_p": self.top_p,
            "max_completion_tokens": self.max_completion_tokens,
        });
        if let Some(effort) = &self.reasoning_effort {
            body["reasoning_effort"] = json!(effort);
        }
        if let Some(seed) = self.seed {
            body["seed"] = json!(seed);
        }
        body
    }
}

/// Hex SHA-256 of the serialized request body.
pub fn request_hash(body: &Value) -> String {
    hex::encode(Sha256::digest(body.to_string().as_bytes()))
}

/// Blocking client bound to one endpoint and key.
#[derive(Debug, Clone)]
pub struct ChatClient {
    config: EndpointConfig,
    api_key: String,
    http: reqwest::blocking::Client,
}

impl ChatClient {
    /// Reads the key from [`API_KEY_ENV`]. Fails before any network traffic
    /// when it is missing.
    pub fn from_env(config: EndpointConfig) -> Result<ChatClient, QueryError> {
        let key = std::env::var(API_KEY_ENV).unwrap_or_default();
        ChatClient::new(config, key)
    }

    pub fn new(config: EndpointConfig, api_key: String) -> Result<ChatClient, QueryError> {
        config.check()?;
        if api_key.trim().is_empty() {
            return Err(QueryError::AuthError(format!("{API_KEY_ENV} is not set")));
        }
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| QueryError::TransportError(e.to_string()))?;
        Ok(ChatClient { config, api_key, http })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    /// Sends one request, retrying rate limits, server errors and transport
    /// failures with exponential backoff.
    pub fn query(&self, body: &Value) -> Result<String, QueryError> {
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let mut delay = Duration::from_millis(self.config.backoff_ms);
        let mut last = QueryError::EmptyResponse;
        for attempt in 1..=self.config.max_attempts {
            if attempt > 1 {
                log::warn!("retrying after {last} (attempt {attempt})");
                std::thread::sleep(delay);
                delay *= 2;
            }
            let response = match self.http.post(&url).bearer_auth(&self.api_key).json(body).send() {
                Ok(r) => r,
                Err(e) => {
                    last = QueryError::TransportError(e.to_string());
                    continue;
                }
            };
            let status = response.status();
            if status.as_u16() == 401 || status.as_u16() == 403 {
                return Err(QueryError::AuthError(format!("endpoint answered {status}")));
            }
            if status.as_u16() == 429 {
                last = QueryError::RateLimited { attempts: attempt };
                continue;
            }
            if status.is_server_error() {
                last = QueryError::TransportError(format!("endpoint answered {status}"));
                continue;
            }
            if !status.is_success() {
                let text = response.text().unwrap_or_default();
                return Err(QueryError::TransportError(format!("endpoint answered {status}: {text}")));
            }
            let v: Value = response.json().map_err(|e| QueryError::TransportError(e.to_string()))?;
            return match v["choices"][0]["message"]["content"].as_str() {
                Some(content) if !content.trim().is_empty() => Ok(content.to_string()),
                _ => Err(QueryError::EmptyResponse),
            };
        }
        Err(last)
    }
}

/// Convenience wrapper: one request with the key from the environment.
pub fn query_model(config: &EndpointConfig, system: &str, user: &str) -> Result<String, QueryError> {
    ChatClient::from_env(config.clone())?.query(&config.request_body(system, user))
}

/// Drops reasoning segments so only the final answer reaches JSON
/// extraction. Handles `<think>` blocks and channel-tagged transcripts.
pub fn strip_reasoning(raw: &str) -> String {
    const FINAL: &str = "<|channel|>final<|message|>";
    if let Some(i) = raw.rfind(FINAL) {
        let rest = &raw[i + FINAL.len()..];
        let end = ["<|end|>", "<|return|>"]
            .iter()
            .filter_map(|m| rest.find(m))
            .min()
            .unwrap_or(rest.len());
        return rest[..end].to_string();
    }
    let mut out = String::new();
    let mut rest = raw;
    while let Some(start) = rest.find("<think>") {
        out.push_str(&rest[..start]);
        match rest[start..].find("</think>") {
            Some(end) => rest = &rest[start + end + "</think>".len()..],
            None => {
                rest = "";
                break;
            }
        }
    }
    out.push_str(rest);
    out
}
