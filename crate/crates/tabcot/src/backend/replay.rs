//! Deterministic replay from a fixture store.

use super::store::{CacheKey, FixtureStore, StoreError};
use super::{BackendError, CompletionBackend, CompletionRequest, CompletionResponse};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

/// A backend that answers exclusively from recorded fixtures.
///
/// A request whose digest is not in the store fails with
/// [`BackendError::FixtureMiss`] — deliberately loud, because a miss means
/// the run being replayed is not the run that was recorded.
pub struct ReplayBackend {
    store: FixtureStore,
    calls: AtomicU64,
}

impl ReplayBackend {
    pub fn new(store: FixtureStore) -> ReplayBackend {
        ReplayBackend {
            store,
            calls: AtomicU64::new(0),
        }
    }

    /// Loads the store at `path` read-only and replays from it.
    pub fn from_path(path: &Path) -> Result<ReplayBackend, StoreError> {
        Ok(ReplayBackend::new(FixtureStore::load(path)?))
    }

    pub fn store(&self) -> &FixtureStore {
        &self.store
    }

    /// Number of `complete` calls served so far (hits and misses).
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

impl CompletionBackend for ReplayBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        request.validate()?;
        self.calls.fetch_add(1, Ordering::Relaxed);
        let key = CacheKey::for_request(request);
        match self.store.get(&key) {
            Some(record) => Ok(record.response()),
            None => Err(BackendError::FixtureMiss {
                digest: key.digest().to_string(),
                model: request.model.clone(),
                prompt_head: request.prompt.chars().take(60).collect(),
            }),
        }
    }
}
