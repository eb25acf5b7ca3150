//! Completion backends behind one trait.
//!
//! Everything that talks to a model goes through [`CompletionBackend`], so
//! the rest of the crate is agnostic to where completions come from:
//!
//! * [`LiveBackend`] — an OpenAI-compatible `/v1/completions` client with
//!   retry on transient failures.
//! * [`ReplayBackend`] — answers from a recorded fixture store, for fully
//!   offline, deterministic runs.
//! * [`CachedBackend`] — wraps any backend with a read-through cache backed
//!   by the same store format; recording live runs to a fixture file is this
//!   wrapper around the live backend.
//!
//! Requests are keyed by a content digest over everything that affects the
//! completion (model, prompt, temperature, max tokens, stop sequences), so a
//! recorded store replays exactly the run that produced it.

mod cached;
mod live;
mod replay;
mod store;

pub use cached::CachedBackend;
pub use live::LiveBackend;
pub use replay::ReplayBackend;
pub use store::{CacheKey, FixtureStore, StoreError, StoredRecord};

use serde::{Deserialize, Serialize};
use std::time::Duration;
use thiserror::Error;

/// Default completion model, matching the recorded fixtures.
pub const DEFAULT_MODEL: &str = "code-davinci-002";
/// Default completion budget; generous enough for a full reasoning table.
pub const DEFAULT_MAX_TOKENS: u32 = 512;

/// One completion request. Temperature 0 keeps runs reproducible; anything
/// else makes recorded fixtures unfaithful.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletionRequest {
    pub model: String,
    pub prompt: String,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Up to four stop sequences.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<Vec<String>>,
}

impl CompletionRequest {
    /// A request with the defaults: temperature 0, 512 max tokens, no stop
    /// sequences.
    pub fn new(model: impl Into<String>, prompt: impl Into<String>) -> Self {
        CompletionRequest {
            model: model.into(),
            prompt: prompt.into(),
            temperature: 0.0,
            max_tokens: DEFAULT_MAX_TOKENS,
            stop: None,
        }
    }

    /// Checks the request is sendable; every backend calls this first.
    pub fn validate(&self) -> Result<(), BackendError> {
        if self.prompt.is_empty() {
            return Err(BackendError::InvalidRequest("prompt is empty".into()));
        }
        if !(0.0..=2.0).contains(&self.temperature) || !self.temperature.is_finite() {
            return Err(BackendError::InvalidRequest(format!(
                "temperature {} is outside 0..=2",
                self.temperature
            )));
        }
        if self.max_tokens == 0 {
            return Err(BackendError::InvalidRequest("max_tokens is zero".into()));
        }
        if let Some(stop) = &self.stop {
            if stop.is_empty() || stop.len() > 4 {
                return Err(BackendError::InvalidRequest(
                    "stop must list between one and four sequences".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Why the model stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinishReason {
    /// Natural stop or a stop sequence.
    Stop,
    /// Ran out of `max_tokens`; the text is likely truncated.
    Length,
    /// Anything else the provider reports.
    Other,
}

/// Token accounting, when the provider reports it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u32,
    pub completion_tokens: u32,
}

/// One completion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletionResponse {
    pub text: String,
    pub finish_reason: FinishReason,
    /// Absent on replayed responses; usage is not part of the fixture format.
    pub token_usage: Option<TokenUsage>,
}

/// Errors a backend can produce.
#[derive(Debug, Error)]
pub enum BackendError {
    /// Network-level failure or a 5xx from the provider; retryable.
    #[error("transport: {0}")]
    Transport(String),
    /// HTTP 429; retryable after a pause.
    #[error("rate limited: {0}")]
    RateLimited(String),
    /// Missing or rejected credentials; not retryable.
    #[error("authentication: {0}")]
    Auth(String),
    /// The request itself is unsendable (empty prompt, bad temperature) or
    /// the provider rejected it as malformed.
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    /// The replay store has no record for this request digest. The prompt
    /// opening is included to make the offending request recognizable.
    #[error("no recorded completion for digest {digest} (model {model}, prompt {prompt_head:?})")]
    FixtureMiss {
        digest: String,
        model: String,
        prompt_head: String,
    },
    /// The fixture store itself failed (I/O, corrupt line, write conflict).
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl BackendError {
    /// Whether retrying the same request can plausibly succeed.
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            BackendError::Transport(_) | BackendError::RateLimited(_)
        )
    }
}

/// A completion source. Implementations are shared across worker threads,
/// so they take `&self` and must be `Send + Sync`.
pub trait CompletionBackend: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError>;
}

impl<B: CompletionBackend + ?Sized> CompletionBackend for &B {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        (**self).complete(request)
    }
}

/// Exponential backoff for transient failures.
#[derive(Debug, Clone, PartialEq)]
pub struct RetryPolicy {
    /// Retries after the initial attempt.
    pub max_retries: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 5,
            base_delay: Duration::from_millis(200),
            max_delay: Duration::from_secs(10),
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `attempt` (zero-based): base * 2^attempt,
    /// capped at `max_delay`.
    pub fn delay_for(&self, attempt: u32) -> Duration {
        let factor = 1u32.checked_shl(attempt).unwrap_or(u32::MAX);
        self.base_delay
            .checked_mul(factor)
            .map_or(self.max_delay, |d| d.min(self.max_delay))
    }

    /// Runs `op` until it succeeds, fails terminally, or exhausts the retry
    /// budget; the last error is surfaced unchanged. `op` receives the
    /// zero-based attempt number.
    pub fn run<T>(
        &self,
        mut op: impl FnMut(u32) -> Result<T, BackendError>,
    ) -> Result<T, BackendError> {
        let mut attempt = 0;
        loop {
            match op(attempt) {
                Ok(value) => return Ok(value),
                Err(e) if e.is_retryable() && attempt < self.max_retries => {
                    std::thread::sleep(self.delay_for(attempt));
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_policy() -> RetryPolicy {
        RetryPolicy {
            max_retries: 5,
            base_delay: Duration::ZERO,
            max_delay: Duration::ZERO,
        }
    }

    #[test]
    fn request_defaults_are_deterministic() {
        let req = CompletionRequest::new("m", "p");
        assert_eq!(req.temperature, 0.0);
        assert_eq!(req.max_tokens, DEFAULT_MAX_TOKENS);
        assert_eq!(req.stop, None);
        assert!(req.validate().is_ok());
    }

    #[test]
    fn validation_rejects_unsendable_requests() {
        let mut req = CompletionRequest::new("m", "");
        assert!(req.validate().is_err());
        req.prompt = "p".into();
        req.temperature = 2.5;
        assert!(req.validate().is_err());
        req.temperature = 0.0;
        req.max_tokens = 0;
        assert!(req.validate().is_err());
        req.max_tokens = 1;
        req.stop = Some(vec!["a".into(); 5]);
        assert!(req.validate().is_err());
        req.stop = Some(vec!["a".into()]);
        assert!(req.validate().is_ok());
    }

    #[test]
    fn retry_gives_up_after_budget() {
        let mut calls = 0;
        let result: Result<(), _> = quick_policy().run(|_| {
            calls += 1;
            Err(BackendError::Transport("down".into()))
        });
        assert!(matches!(result, Err(BackendError::Transport(_))));
        assert_eq!(calls, 6); // initial attempt + 5 retries
    }

    #[test]
    fn retry_recovers_and_reports_attempts() {
        let result = quick_policy().run(|attempt| {
            if attempt < 2 {
                Err(BackendError::RateLimited("breathe".into()))
            } else {
                Ok(attempt)
            }
        });
        assert_eq!(result.unwrap(), 2);
    }

    #[test]
    fn non_retryable_errors_fail_fast() {
        let mut calls = 0;
        let result: Result<(), _> = quick_policy().run(|_| {
            calls += 1;
            Err(BackendError::Auth("bad key".into()))
        });
        assert!(matches!(result, Err(BackendError::Auth(_))));
        assert_eq!(calls, 1);
    }

    #[test]
    fn backoff_doubles_and_caps() {
        let policy = RetryPolicy {
            max_retries: 10,
            base_delay: Duration::from_millis(200),
            max_delay: Duration::from_secs(1),
        };
        assert_eq!(policy.delay_for(0), Duration::from_millis(200));
        assert_eq!(policy.delay_for(1), Duration::from_millis(400));
        assert_eq!(policy.delay_for(2), Duration::from_millis(800));
        assert_eq!(policy.delay_for(3), Duration::from_secs(1));
        assert_eq!(policy.delay_for(30), Duration::from_secs(1));
    }
}
