//! The fixture store: recorded completions, content-addressed by request.
//!
//! On disk a store is JSONL — one [`StoredRecord`] per line, append-only, so
//! recording runs can be interrupted without corrupting earlier records and
//! diffs stay reviewable. In memory it is a digest-keyed map behind a
//! read-write lock; evaluation workers read concurrently while a recording
//! run appends.
//!
//! The digest is SHA-256 over a version tag plus the canonical JSON of the
//! request fields that affect the completion: model, prompt, temperature,
//! max_tokens, stop. Field order is fixed by the serializer, so the digest
//! is stable across processes and platforms; any change to the keyed fields
//! or their encoding must bump the version tag.

use super::{CompletionRequest, CompletionResponse, FinishReason};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};
use thiserror::Error;

/// Version tag mixed into every digest; bump when the key format changes.
const DIGEST_VERSION: &[u8] = b"tabcot.completion.v1\n";

/// Errors from reading or writing a fixture store.
#[derive(Debug, Error)]
pub enum StoreError {
    #[error("fixture store {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("fixture store {path}, line {line}: {msg}")]
    Corrupt {
        path: String,
        line: usize,
        msg: String,
    },
    /// The same request digest was recorded with different response text.
    /// Fixtures assume deterministic completions (temperature 0); two
    /// different answers for one key mean the store is lying to someone.
    #[error("digest {digest} already recorded with different text")]
    RecordConflict { digest: String },
    /// The store was opened read-only (e.g. by the replay backend).
    #[error("fixture store is read-only")]
    ReadOnly,
}

/// The content digest of a completion request.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey(String);

/// The request fields that affect the completion, in digest order.
#[derive(Serialize)]
struct KeyMaterial<'a> {
    model: &'a str,
    prompt: &'a str,
    temperature: f64,
    max_tokens: u32,
    stop: &'a Option<Vec<String>>,
}

impl CacheKey {
    pub fn for_request(request: &CompletionRequest) -> CacheKey {
        let material = KeyMaterial {
            model: &request.model,
            prompt: &request.prompt,
            temperature: request.temperature,
            max_tokens: request.max_tokens,
            stop: &request.stop,
        };
        let canonical =
            serde_json::to_vec(&material).expect("key material has no unserializable values");
        let mut hasher = Sha256::new();
        hasher.update(DIGEST_VERSION);
        hasher.update(&canonical);
        CacheKey(hex::encode(hasher.finalize()))
    }

    /// The digest as lowercase hex.
    pub fn digest(&self) -> &str {
        &self.0
    }
}

/// One recorded completion, as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredRecord {
    pub digest: String,
    pub model: String,
    /// Kept for human inspection and store audits; lookups use the digest.
    pub prompt: String,
    pub text: String,
    pub finish_reason: FinishReason,
}

impl StoredRecord {
    pub fn response(&self) -> CompletionResponse {
        CompletionResponse {
            text: self.text.clone(),
            finish_reason: self.finish_reason,
            token_usage: None,
        }
    }
}

/// A digest-keyed store of recorded completions, optionally file-backed.
pub struct FixtureStore {
    records: RwLock<HashMap<String, StoredRecord>>,
    /// Append handle; `None` for in-memory and read-only stores.
    appender: Option<Mutex<File>>,
    path: Option<PathBuf>,
}

impl std::fmt::Debug for FixtureStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FixtureStore")
            .field("len", &self.len())
            .field("path", &self.path)
            .field("writable", &self.appender.is_some())
            .finish()
    }
}

impl FixtureStore {
    /// An empty store with no file behind it.
    pub fn in_memory() -> FixtureStore {
        FixtureStore {
            records: RwLock::new(HashMap::new()),
            appender: None,
            path: None,
        }
    }

    /// Opens a store for recording: loads existing records if the file
    /// exists, creates it otherwise, and appends on every new record.
    pub fn open(path: &Path) -> Result<FixtureStore, StoreError> {
        let records = if path.exists() {
            Self::read_records(path)?
        } else {
            HashMap::new()
        };
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|source| StoreError::Io {
                path: path.display().to_string(),
                source,
            })?;
        Ok(FixtureStore {
            records: RwLock::new(records),
            appender: Some(Mutex::new(file)),
            path: Some(path.to_path_buf()),
        })
    }

    /// Loads a store read-only; the file must exist. Recording into it
    /// fails with [`StoreError::ReadOnly`].
    pub fn load(path: &Path) -> Result<FixtureStore, StoreError> {
        Ok(FixtureStore {
            records: RwLock::new(Self::read_records(path)?),
            appender: None,
            path: Some(path.to_path_buf()),
        })
    }

    fn read_records(path: &Path) -> Result<HashMap<String, StoredRecord>, StoreError> {
        let text = std::fs::read_to_string(path).map_err(|source| StoreError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut records = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: StoredRecord =
                serde_json::from_str(line).map_err(|e| StoreError::Corrupt {
                    path: path.display().to_string(),
                    line: idx + 1,
                    msg: e.to_string(),
                })?;
            // Later lines win; identical duplicates are the common case
            // (re-recorded runs), so this is not worth failing over.
            records.insert(record.digest.clone(), record);
        }
        Ok(records)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.records.read().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Looks up the recorded completion for a request digest.
    pub fn get(&self, key: &CacheKey) -> Option<StoredRecord> {
        self.records
            .read()
            .expect("store lock")
            .get(key.digest())
            .cloned()
    }

    /// Records a completion for a request. Recording the same request with
    /// identical text is a no-op; with different text it fails with
    /// [`StoreError::RecordConflict`].
    pub fn record(
        &self,
        request: &CompletionRequest,
        response: &CompletionResponse,
    ) -> Result<(), StoreError> {
        if self.appender.is_none() && self.path.is_some() {
            return Err(StoreError::ReadOnly);
        }
        let key = CacheKey::for_request(request);
        let record = StoredRecord {
            digest: key.digest().to_string(),
            model: request.model.clone(),
            prompt: request.prompt.clone(),
            text: response.text.clone(),
            finish_reason: response.finish_reason,
        };
        {
            let mut records = self.records.write().expect("store lock");
            match records.get(key.digest()) {
                Some(existing) if existing.text == record.text => return Ok(()),
                Some(_) => {
                    return Err(StoreError::RecordConflict {
                        digest: key.digest().to_string(),
                    })
                }
                None => records.insert(key.digest().to_string(), record.clone()),
            };
        }
        if let Some(appender) = &self.appender {
            let line = serde_json::to_string(&record).expect("record serializes");
            let mut file = appender.lock().expect("appender lock");
            writeln!(file, "{line}").map_err(|source| StoreError::Io {
                path: self
                    .path
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_default(),
                source,
            })?;
            file.flush().map_err(|source| StoreError::Io {
                path: self
                    .path
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_default(),
                source,
            })?;
        }
        Ok(())
    }

    /// Snapshot of all records, sorted by digest for stable output.
    pub fn records(&self) -> Vec<StoredRecord> {
        let mut all: Vec<StoredRecord> = self
            .records
            .read()
            .expect("store lock")
            .values()
            .cloned()
            .collect();
        all.sort_by(|a, b| a.digest.cmp(&b.digest));
        all
    }

    /// Removes every record, truncating the backing file if there is one.
    /// Fails with [`StoreError::ReadOnly`] on read-only file-backed stores.
    pub fn clear(&self) -> Result<(), StoreError> {
        if self.appender.is_none() && self.path.is_some() {
            return Err(StoreError::ReadOnly);
        }
        let mut records = self.records.write().expect("store lock");
        if let (Some(appender), Some(path)) = (&self.appender, &self.path) {
            let file = appender.lock().expect("appender lock");
            file.set_len(0).map_err(|source| StoreError::Io {
                path: path.display().to_string(),
                source,
            })?;
        }
        records.clear();
        Ok(())
    }
}
