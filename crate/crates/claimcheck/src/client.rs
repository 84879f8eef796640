//! Blocking HTTP client for OpenAI-compatible `/chat/completions` endpoints.
//!
//! Single-turn only: each benchmark prompt goes out as one user message and
//! the first choice's content comes back. Transient failures (connect
//! errors, timeouts, 408/429/5xx) retry with exponential backoff; auth
//! failures halt immediately. The API key is read from the environment at
//! client construction and never written to any file.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const BACKOFF_BASE_MS: u64 = 200;
const BACKOFF_CAP_MS: u64 = 5_000;

/// Where and how to reach a model endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    /// Base URL, e.g. `http://localhost:8000/v1`; the chat-completions path
    /// is appended unless already present.
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the API key. The key itself
    /// is read at call time, never stored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    /// Sampling temperature; 0 by default for reproducibility (recorded,
    /// not assumed — remote determinism is not guaranteed).
    #[serde(default)]
    pub temperature: f64,
}

fn default_timeout_secs() -> u64 {
    60
}

fn default_max_retries() -> u32 {
    3
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> EndpointConfig {
        EndpointConfig {
            base_url: base_url.into(),
            model: model.into(),
            api_key_env: None,
            timeout_secs: default_timeout_secs(),
            max_retries: default_max_retries(),
            temperature: 0.0,
        }
    }
}

/// Join the configured base URL with the chat-completions path.
pub fn chat_completions_url(base_url: &str) -> String {
    let trimmed = base_url.trim_end_matches('/');
    if trimmed.ends_with("/chat/completions") {
        trimmed.to_string()
    } else {
        format!("{trimmed}/chat/completions")
    }
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("API key environment variable {var} is not set")]
    MissingApiKey { var: String },
    #[error("authentication rejected with HTTP {status}; halting")]
    Auth { status: u16 },
    #[error("endpoint returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("request failed after {attempts} attempts: {source}")]
    Transport {
        attempts: u32,
        #[source]
        source: reqwest::Error,
    },
    #[error("could not build HTTP client: {0}")]
    Build(#[source] reqwest::Error),
    #[error("endpoint reply is not a chat completion: {0}")]
    MalformedReply(String),
}

/// A successful completion plus how many retries it took.
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    pub retries: u32,
}

#[derive(Debug)]
pub struct ChatClient {
    http: reqwest::blocking::Client,
    config: EndpointConfig,
    api_key: Option<String>,
    url: String,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
    temperature: f64,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatCompletion {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatReplyMessage,
}

#[derive(Deserialize)]
struct ChatReplyMessage {
    content: String,
}

impl ChatClient {
    /// Build a client, reading the API key from the configured environment
    /// variable. A named-but-missing variable is a startup error.
    pub fn new(config: EndpointConfig) -> Result<ChatClient, ClientError> {
        let api_key = match &config.api_key_env {
            Some(var) => Some(
                std::env::var(var)
                    .map_err(|_| ClientError::MissingApiKey { var: var.clone() })?,
            ),
            None => None,
        };
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(ClientError::Build)?;
        let url = chat_completions_url(&config.base_url);
        Ok(ChatClient { http, config, api_key, url })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    /// Send one prompt as a single-turn chat completion and return the first
    /// choice's content.
    pub fn complete(&self, prompt: &str) -> Result<Completion, ClientError> {
        let body = ChatRequest {
            model: &self.config.model,
            messages: [ChatMessage { role: "user", content: prompt }],
            temperature: self.config.temperature,
        };
        let mut retries = 0u32;
        loop {
            let attempt_no = retries + 1;
            match self.attempt(&body) {
                Ok(text) => return Ok(Completion { text, retries }),
                Err(AttemptError::Fatal(err)) => return Err(err),
                Err(AttemptError::Transient(err)) => {
                    if retries >= self.config.max_retries {
                        return match err {
                            TransientError::Transport(source) => Err(ClientError::Transport {
                                attempts: attempt_no,
                                source,
                            }),
                            TransientError::Status { status, body } => {
                                Err(ClientError::Http { status, body })
                            }
                        };
                    }
                    let delay = BACKOFF_BASE_MS
                        .saturating_mul(1u64 << retries.min(16))
                        .min(BACKOFF_CAP_MS);
                    std::thread::sleep(Duration::from_millis(delay));
                    retries += 1;
                }
            }
        }
    }

    fn attempt(&self, body: &ChatRequest<'_>) -> Result<String, AttemptError> {
        let mut request = self.http.post(&self.url).json(body);
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        // Anything that failed before a status came back (connect refused,
        // timeout, broken transport) is worth retrying.
        let response = request
            .send()
            .map_err(|e| AttemptError::Transient(TransientError::Transport(e)))?;
        let status = response.status();
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(AttemptError::Fatal(ClientError::Auth { status: status.as_u16() }));
        }
        if !status.is_success() {
            let body = snippet(response.text().unwrap_or_default());
            if retryable_status(status.as_u16()) {
                return Err(AttemptError::Transient(TransientError::Status {
                    status: status.as_u16(),
                    body,
                }));
            }
            return Err(AttemptError::Fatal(ClientError::Http {
                status: status.as_u16(),
                body,
            }));
        }
        let text = response
            .text()
            .map_err(|e| AttemptError::Transient(TransientError::Transport(e)))?;
        let completion: ChatCompletion = serde_json::from_str(&text)
            .map_err(|e| AttemptError::Fatal(ClientError::MalformedReply(e.to_string())))?;
        match completion.choices.into_iter().next() {
            Some(choice) => Ok(choice.message.content),
            None => Err(AttemptError::Fatal(ClientError::MalformedReply(
                "reply carries no choices".to_string(),
            ))),
        }
    }
}

/// Statuses worth retrying: request timeout, rate limiting, server errors.
pub fn retryable_status(status: u16) -> bool {
    status == 408 || status == 429 || (500..600).contains(&status)
}

fn snippet(body: String) -> String {
    const LIMIT: usize = 200;
    if body.len() <= LIMIT {
        body
    } else {
        let mut end = LIMIT;
        while !body.is_char_boundary(end) {
            end -= 1;
        }
        format!("{}…", &body[..end])
    }
}

enum AttemptError {
    /// Retry with backoff.
    Transient(TransientError),
    /// Stop immediately.
    Fatal(ClientError),
}

enum TransientError {
    Transport(reqwest::Error),
    Status { status: u16, body: String },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chat_path_is_appended_once() {
        assert_eq!(
            chat_completions_url("http://localhost:8000/v1"),
            "http://localhost:8000/v1/chat/completions"
        );
        assert_eq!(
            chat_completions_url("http://localhost:8000/v1/"),
            "http://localhost:8000/v1/chat/completions"
        );
        assert_eq!(
            chat_completions_url("http://h/v1/chat/completions"),
            "http://h/v1/chat/completions"
        );
    }

    #[test]
    fn retryable_statuses_are_timeouts_rate_limits_and_server_errors() {
        for status in [408, 429, 500, 502, 503, 599] {
            assert!(retryable_status(status), "{status}");
        }
        for status in [200, 400, 401, 403, 404, 422] {
            assert!(!retryable_status(status), "{status}");
        }
    }

    #[test]
    fn missing_api_key_variable_is_a_startup_error_naming_it() {
        let mut config = EndpointConfig::new("http://localhost:9", "m");
        config.api_key_env = Some("CLAIMCHECK_TEST_KEY_THAT_IS_NOT_SET".to_string());
        let err = ChatClient::new(config).unwrap_err();
        assert!(matches!(err, ClientError::MissingApiKey { .. }));
        assert!(err.to_string().contains("CLAIMCHECK_TEST_KEY_THAT_IS_NOT_SET"));
    }

    #[test]
    fn config_defaults_favor_reproducibility() {
        let config: EndpointConfig =
            serde_json::from_str(r#"{"base_url": "http://h/v1", "model": "m"}"#).unwrap();
        assert_eq!(config.temperature, 0.0);
        assert_eq!(config.timeout_secs, 60);
        assert_eq!(config.max_retries, 3);
        assert_eq!(config.api_key_env, None);
    }
}
