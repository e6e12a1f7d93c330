//! JSONL exchange store shared by the response cache and replay scripts.
//!
//! One record per line: `{"hash", "prompt": {"system", "user"}, "response",
//! "usage", "latency_ms"}`. A cache file can be used unchanged as a replay
//! script.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};

use super::{GatewayError, Prompt, Usage};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredExchange {
    pub hash: String,
    pub prompt: Prompt,
    pub response: String,
    #[serde(default)]
    pub usage: Usage,
    #[serde(default)]
    pub latency_ms: u64,
}

#[derive(Debug, Default)]
pub struct ExchangeStore {
    path: Option<PathBuf>,
    entries: RwLock<HashMap<String, StoredExchange>>,
    writer: Option<Mutex<File>>,
}

impl ExchangeStore {
    pub fn in_memory() -> Self {
        ExchangeStore::default()
    }

    fn read_records(path: &Path) -> Result<Vec<StoredExchange>, GatewayError> {
        let file = File::open(path).map_err(|e| GatewayError::Store(format!("{}: {e}", path.display())))?;
        let mut out = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| GatewayError::Store(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: StoredExchange = serde_json::from_str(&line)
                .map_err(|e| GatewayError::Store(format!("{}:{}: {e}", path.display(), n + 1)))?;
            out.push(rec);
        }
        Ok(out)
    }

    /// Read-only store, typically a replay script.
    pub fn open_read_only(path: &Path) -> Result<Self, GatewayError> {
        let store = ExchangeStore::in_memory();
        for rec in Self::read_records(path)? {
            store.insert_checked(rec)?;
        }
        Ok(ExchangeStore {
            path: Some(path.to_path_buf()),
            ..store
        })
    }

    /// Appending store; existing records are loaded first.
    pub fn open(path: &Path) -> Result<Self, GatewayError> {
        let store = if path.exists() {
            Self::open_read_only(path)?
        } else {
            ExchangeStore::in_memory()
        };
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| GatewayError::Store(e.to_string()))?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| GatewayError::Store(format!("{}: {e}", path.display())))?;
        Ok(ExchangeStore {
            path: Some(path.to_path_buf()),
            writer: Some(Mutex::new(file)),
            ..store
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    fn insert_checked(&self, rec: StoredExchange) -> Result<(), GatewayError> {
        let mut entries = self.entries.write().unwrap();
        if let Some(existing) = entries.get(&rec.hash) {
            if existing.prompt != rec.prompt {
                return Err(GatewayError::HashCollision(rec.hash));
            }
            return Ok(());
        }
        entries.insert(rec.hash.clone(), rec);
        Ok(())
    }

    /// Looks up `hash`, verifying that the stored prompt is `prompt`.
    pub fn get(&self, hash: &str, prompt: &Prompt) -> Result<Option<StoredExchange>, GatewayError> {
        match self.entries.read().unwrap().get(hash) {
            Some(rec) if &rec.prompt != prompt => Err(GatewayError::HashCollision(hash.to_string())),
            Some(rec) => Ok(Some(rec.clone())),
            None => Ok(None),
        }
    }

    pub fn put(&self, rec: StoredExchange) -> Result<(), GatewayError> {
        {
            let entries = self.entries.read().unwrap();
            if entries.contains_key(&rec.hash) {
                drop(entries);
                return self.insert_checked(rec);
            }
        }
        if let Some(w) = &self.writer {
            let mut line = serde_json::to_string(&rec).map_err(|e| GatewayError::Store(e.to_string()))?;
            line.push('\n');
            let mut f = w.lock().unwrap();
            f.write_all(line.as_bytes())
                .map_err(|e| GatewayError::Store(e.to_string()))?;
            f.flush().map_err(|e| GatewayError::Store(e.to_string()))?;
        }
        self.insert_checked(rec)
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All records sorted by hash.
    pub fn records(&self) -> Vec<StoredExchange> {
        let mut v: Vec<_> = self.entries.read().unwrap().values().cloned().collect();
        v.sort_by(|a, b| a.hash.cmp(&b.hash));
        v
    }

    /// Writes every record, sorted by hash, to `path`.
    pub fn export(&self, path: &Path) -> Result<usize, GatewayError> {
        let recs = self.records();
        let mut text = String::new();
        for r in &recs {
            text.push_str(&serde_json::to_string(r).map_err(|e| GatewayError::Store(e.to_string()))?);
            text.push('\n');
        }
        fs::write(path, text).map_err(|e| GatewayError::Store(e.to_string()))?;
        Ok(recs.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(hash: &str, user: &str, response: &str) -> StoredExchange {
        StoredExchange {
            hash: hash.into(),
            prompt: Prompt {
                system: String::new(),
                user: user.into(),
            },
            response: response.into(),
            usage: Usage::default(),
            latency_ms: 5,
        }
    }

    #[test]
    fn persists_and_reloads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        {
            let s = ExchangeStore::open(&path).unwrap();
            s.put(rec("h1", "p", "r")).unwrap();
            s.put(rec("h1", "p", "r")).unwrap();
        }
        let s = ExchangeStore::open_read_only(&path).unwrap();
        assert_eq!(s.len(), 1);
        let p = rec("h1", "p", "").prompt;
        assert_eq!(s.get("h1", &p).unwrap().unwrap().response, "r");
        let other = rec("h1", "q", "").prompt;
        assert!(matches!(s.get("h1", &other), Err(GatewayError::HashCollision(_))));
        assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 1);
    }

    #[test]
    fn export_is_sorted() {
        let dir = tempfile::tempdir().unwrap();
        let s = ExchangeStore::in_memory();
        s.put(rec("b", "2", "")).unwrap();
        s.put(rec("a", "1", "")).unwrap();
        let out = dir.path().join("replay.jsonl");
        assert_eq!(s.export(&out).unwrap(), 2);
        let text = fs::read_to_string(&out).unwrap();
        assert!(text.find("\"a\"").unwrap() < text.find("\"b\"").unwrap());
    }
}
