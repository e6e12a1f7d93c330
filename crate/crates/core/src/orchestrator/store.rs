//! Run directory persistence. Every file is rewritten whole through a
//! temporary file and a rename, so a crash never leaves a torn record.
//!
//! | file                    | content                                   |
//! |-------------------------|-------------------------------------------|
//! | `config.effective.toml` | the configuration the run used            |
//! | `tool_versions.json`    | toolchain probe results                   |
//! | `attempts.jsonl`        | one [`AttemptRecord`](super::AttemptRecord) per line |
//! | `variants.jsonl`        | generated program variants                |
//! | `exchanges.jsonl`       | every model exchange, sorted by hash      |
//! | `checkpoint.json`       | completed stages and halt reason          |
//! | `cascade_result.json`   | the final cascade result                  |

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::OrchestratorError;

pub const ATTEMPTS: &str = "attempts.jsonl";
pub const VARIANTS: &str = "variants.jsonl";
pub const EXCHANGES: &str = "exchanges.jsonl";
pub const CHECKPOINT: &str = "checkpoint.json";
pub const CASCADE_RESULT: &str = "cascade_result.json";
pub const MATRIX_RESULT: &str = "matrix_result.json";
pub const VARIANT_RESULT: &str = "variant_result.json";
pub const EFFECTIVE_CONFIG: &str = "config.effective.toml";
pub const TOOL_VERSIONS: &str = "tool_versions.json";

#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> OrchestratorError {
    OrchestratorError::Io(format!("{}: {e}", path.display()))
}

impl RunDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self, OrchestratorError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| io_err(&root, e))?;
        Ok(RunDir { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn exists(&self, name: &str) -> bool {
        self.path(name).exists()
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<(), OrchestratorError> {
        let path = self.path(name);
        let tmp = self.path(&format!(".{name}.tmp"));
        let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
        f.write_all(text.as_bytes()).map_err(|e| io_err(&tmp, e))?;
        f.sync_all().map_err(|e| io_err(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| io_err(&path, e))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), OrchestratorError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(&self.path(name), e))?;
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn write_jsonl<'a, T: Serialize + 'a>(
        &self,
        name: &str,
        items: impl IntoIterator<Item = &'a T>,
    ) -> Result<(), OrchestratorError> {
        let mut text = String::new();
        for item in items {
            text.push_str(&serde_json::to_string(item).map_err(|e| io_err(&self.path(name), e))?);
            text.push('\n');
        }
        self.write_text(name, &text)
    }

    pub fn read_json<T: DeserializeOwned>(&self, name: &str) -> Result<Option<T>, OrchestratorError> {
        let path = self.path(name);
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        serde_json::from_str(&text).map(Some).map_err(|e| io_err(&path, e))
    }

    pub fn read_jsonl<T: DeserializeOwned>(&self, name: &str) -> Result<Vec<T>, OrchestratorError> {
        let path = self.path(name);
        if !path.exists() {
            return Ok(Vec::new());
        }
        let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(n, l)| serde_json::from_str(l).map_err(|e| io_err(&path, format!("line {}: {e}", n + 1))))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip_and_atomic_replace() {
        let dir = tempfile::tempdir().unwrap();
        let run = RunDir::create(dir.path().join("run")).unwrap();
        run.write_jsonl("x.jsonl", &[1u32, 2, 3]).unwrap();
        run.write_jsonl("x.jsonl", &[4u32]).unwrap();
        assert_eq!(run.read_jsonl::<u32>("x.jsonl").unwrap(), vec![4]);
        assert!(run.read_jsonl::<u32>("missing.jsonl").unwrap().is_empty());
        assert!(!run.path(".x.jsonl.tmp").exists());
        run.write_json("c.json", &vec!["a"]).unwrap();
        assert_eq!(
            run.read_json::<Vec<String>>("c.json").unwrap().unwrap(),
            vec!["a".to_string()]
        );
    }
}
