//! Read-through caching for any backend.

use super::store::{CacheKey, FixtureStore, StoreError};
use super::{BackendError, CompletionBackend, CompletionRequest, CompletionResponse};
use std::sync::atomic::{AtomicU64, Ordering};

/// Wraps a backend with a [`FixtureStore`]-backed cache.
///
/// Hits are answered from the store; misses go to the inner backend and the
/// response is recorded before being returned. Caching is transparent by
/// construction — the text returned for a request never depends on whether
/// it was cached, only the inner backend's call count does.
///
/// With a file-backed store around [`super::LiveBackend`], this is also the
/// fixture recorder: run once live, replay forever.
pub struct CachedBackend<B> {
    inner: B,
    cache: FixtureStore,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl<B: CompletionBackend> CachedBackend<B> {
    pub fn new(inner: B, cache: FixtureStore) -> CachedBackend<B> {
        CachedBackend {
            inner,
            cache,
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }

    pub fn cache(&self) -> &FixtureStore {
        &self.cache
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }
}

impl<B: CompletionBackend> CompletionBackend for CachedBackend<B> {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        request.validate()?;
        let key = CacheKey::for_request(request);
        if let Some(record) = self.cache.get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(record.response());
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let response = self.inner.complete(request)?;
        match self.cache.record(request, &response) {
            // A concurrent writer beat us to the key with different text
            // (possible only for non-deterministic inner backends); the
            // fresh response still wins for this call.
            Ok(()) | Err(StoreError::RecordConflict { .. }) => Ok(response),
            Err(e) => Err(e.into()),
        }
    }
}
