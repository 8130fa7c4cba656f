//! Recorded model outputs, one JSON-lines file per ablation and run.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ablation::Ablation;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub prompt_id: u8,
    pub request_hash: String,
    pub raw_output: String,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("no recorded output for prompt {prompt_id} in {path}")]
    Missing { path: PathBuf, prompt_id: u8 },
    #[error("{path}:{line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Directory of `{ablation}_run{k}.jsonl` files.
#[derive(Debug)]
pub struct FixtureStore {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl FixtureStore {
    pub fn new(dir: impl Into<PathBuf>) -> FixtureStore {
        FixtureStore {
            dir: dir.into(),
            write_lock: Mutex::new(()),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, ablation: Ablation, run_index: u32) -> PathBuf {
        self.dir.join(format!("{ablation}_run{run_index}.jsonl"))
    }

    /// Entries of one file keyed by prompt. A missing file reads as empty;
    /// when a prompt was recorded twice the later line wins.
    pub fn load(&self, ablation: Ablation, run_index: u32) -> Result<BTreeMap<u8, FixtureEntry>, StoreError> {
        let path = self.path(ablation, run_index);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(BTreeMap::new()),
            Err(source) => return Err(StoreError::Io { path, source }),
        };
        let mut out = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: FixtureEntry = serde_json::from_str(line).map_err(|e| StoreError::Corrupt {
                path: path.clone(),
                line: i + 1,
                message: e.to_string(),
            })?;
            out.insert(entry.prompt_id, entry);
        }
        Ok(out)
    }

    pub fn lookup(&self, ablation: Ablation, run_index: u32, prompt_id: u8) -> Result<FixtureEntry, StoreError> {
        self.load(ablation, run_index)?
            .remove(&prompt_id)
            .ok_or_else(|| StoreError::Missing {
                path: self.path(ablation, run_index),
                prompt_id,
            })
    }

    /// Appends one entry. Safe to call from several threads.
    pub fn append(&self, ablation: Ablation, run_index: u32, entry: &FixtureEntry) -> Result<(), StoreError> {
        let path = self.path(ablation, run_index);
        let io = |source| StoreError::Io { path: path.clone(), source };
        let _guard = self.write_lock.lock().unwrap_or_else(|e| e.into_inner());
        fs::create_dir_all(&self.dir).map_err(io)?;
        let mut line = serde_json::to_string(entry).expect("entry serializes");
        line.push('\n');
        OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .and_then(|mut f| f.write_all(line.as_bytes()))
            .map_err(io)
    }

    /// Rewrites a file in prompt order with duplicates collapsed, so a live
    /// run leaves the same bytes whatever order attempts finished in.
    pub fn normalize(&self, ablation: Ablation, run_index: u32) -> Result<(), StoreError> {
        let entries = self.load(ablation, run_index)?;
        if entries.is_empty() {
            return Ok(());
        }
        let path = self.path(ablation, run_index);
        let text: String = entries
            .values()
            .map(|e| serde_json::to_string(e).expect("entry serializes") + "\n")
            .collect();
        let _guard = self.write_lock.lock().unwrap_or_else(|e| e.into_inner());
        fs::write(&path, text).map_err(|source| StoreError::Io { path, source })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(id: u8, raw: &str) -> FixtureEntry {
        FixtureEntry {
            prompt_id: id,
            request_hash: "h".into(),
            raw_output: raw.into(),
        }
    }

    #[test]
    fn append_lookup_normalize() {
        let dir = tempfile::tempdir().unwrap();
        let store = FixtureStore::new(dir.path());
        assert!(store.load(Ablation::Proposed, 1).unwrap().is_empty());
        store.append(Ablation::Proposed, 1, &entry(3, "three\n{}")).unwrap();
        store.append(Ablation::Proposed, 1, &entry(1, "one")).unwrap();
        store.append(Ablation::Proposed, 1, &entry(3, "again")).unwrap();
        assert_eq!(store.lookup(Ablation::Proposed, 1, 3).unwrap().raw_output, "again");
        assert!(matches!(store.lookup(Ablation::Proposed, 1, 2), Err(StoreError::Missing { .. })));
        store.normalize(Ablation::Proposed, 1).unwrap();
        let text = fs::read_to_string(store.path(Ablation::Proposed, 1)).unwrap();
        let ids: Vec<u8> = text
            .lines()
            .map(|l| serde_json::from_str::<FixtureEntry>(l).unwrap().prompt_id)
            .collect();
        assert_eq!(ids, [1, 3]);
        assert!(store.path(Ablation::NoTypes, 2).ends_with("no_types_run2.jsonl"));
    }

    #[test]
    fn corrupt_lines_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let store = FixtureStore::new(dir.path());
        fs::write(store.path(Ablation::Alternative, 1), "{\"prompt_id\": 1}\n").unwrap();
        let err = store.load(Ablation::Alternative, 1).unwrap_err();
        assert!(matches!(err, StoreError::Corrupt { line: 1, .. }), "{err}");
    }
}
