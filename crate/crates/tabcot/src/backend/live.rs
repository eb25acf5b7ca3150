//! Live OpenAI-compatible completions client.
//!
//! Speaks the classic text-completions wire format: `POST
//! <base>/v1/completions` with a bearer token. The credential comes from the
//! `TABCOT_API_KEY` environment variable only — never a CLI flag, which
//! would leak it into shell history and process listings. The endpoint
//! defaults to the public OpenAI base and can be redirected with
//! `TABCOT_API_BASE` for compatible providers.

use super::{
    BackendError, CompletionBackend, CompletionRequest, CompletionResponse, FinishReason,
    RetryPolicy, TokenUsage,
};
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

/// Environment variable holding the API credential.
pub const API_KEY_VAR: &str = "TABCOT_API_KEY";
/// Environment variable overriding the API base URL.
pub const API_BASE_VAR: &str = "TABCOT_API_BASE";
const DEFAULT_API_BASE: &str = "https://api.openai.com";
const REQUEST_TIMEOUT: Duration = Duration::from_secs(120);

/// A live completions backend with retry on transient failures.
pub struct LiveBackend {
    base: String,
    api_key: String,
    client: reqwest::blocking::Client,
    retry: RetryPolicy,
    calls: AtomicU64,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    temperature: f64,
    max_tokens: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    stop: &'a Option<Vec<String>>,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct WireChoice {
    text: String,
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct WireUsage {
    prompt_tokens: u32,
    completion_tokens: u32,
}

impl LiveBackend {
    /// Builds a backend from the environment: `TABCOT_API_KEY` (required)
    /// and `TABCOT_API_BASE` (optional).
    pub fn from_env() -> Result<LiveBackend, BackendError> {
        let api_key = std::env::var(API_KEY_VAR)
            .map_err(|_| BackendError::Auth(format!("{API_KEY_VAR} is not set")))?;
        let base =
            std::env::var(API_BASE_VAR).unwrap_or_else(|_| DEFAULT_API_BASE.to_string());
        Ok(LiveBackend::new(base, api_key))
    }

    pub fn new(base: impl Into<String>, api_key: impl Into<String>) -> LiveBackend {
        LiveBackend {
            base: base.into().trim_end_matches('/').to_string(),
            api_key: api_key.into(),
            client: reqwest::blocking::Client::builder()
                .timeout(REQUEST_TIMEOUT)
                .build()
                .expect("client builds with static configuration"),
            retry: RetryPolicy::default(),
            calls: AtomicU64::new(0),
        }
    }

    pub fn with_retry_policy(mut self, retry: RetryPolicy) -> LiveBackend {
        self.retry = retry;
        self
    }

    /// Number of HTTP requests actually sent, retries included.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    fn post_once(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let wire = WireRequest {
            model: &request.model,
            prompt: &request.prompt,
            temperature: request.temperature,
            max_tokens: request.max_tokens,
            stop: &request.stop,
        };
        let response = self
            .client
            .post(format!("{}/v1/completions", self.base))
            .bearer_auth(&self.api_key)
            .json(&wire)
            .send()
            .map_err(|e| BackendError::Transport(e.to_string()))?;

        let status = response.status();
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(BackendError::Auth(format!("endpoint returned {status}")));
        }
        if status.as_u16() == 429 {
            return Err(BackendError::RateLimited(format!(
                "endpoint returned {status}"
            )));
        }
        if status.is_server_error() {
            return Err(BackendError::Transport(format!(
                "endpoint returned {status}"
            )));
        }
        if !status.is_success() {
            let body = response.text().unwrap_or_default();
            return Err(BackendError::InvalidRequest(format!(
                "endpoint returned {status}: {}",
                body.chars().take(200).collect::<String>()
            )));
        }

        let wire: WireResponse = response
            .json()
            .map_err(|e| BackendError::Transport(format!("bad response body: {e}")))?;
        let choice = wire
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| BackendError::Transport("response has no choices".into()))?;
        Ok(CompletionResponse {
            text: choice.text,
            finish_reason: match choice.finish_reason.as_deref() {
                Some("stop") => FinishReason::Stop,
                Some("length") => FinishReason::Length,
                _ => FinishReason::Other,
            },
            token_usage: wire.usage.map(|u| TokenUsage {
                prompt_tokens: u.prompt_tokens,
                completion_tokens: u.completion_tokens,
            }),
        })
    }
}

impl CompletionBackend for LiveBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        request.validate()?;
        self.retry.run(|_attempt| self.post_once(request))
    }
}
