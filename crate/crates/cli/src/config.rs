//! Plain key=value config files.
//!
//! One `key = value` pair per line, `#` starts a comment, keys are named
//! exactly like the long flags they mirror (`grid-max`, not `grid_max`).
//! Command-line flags win over file values; keys no command consumes are
//! rejected so typos cannot silently change a run.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::Failure;

/// Parsed config file contents. Commands `take` the keys they understand
/// and then call [`FileConfig::finish`] to reject leftovers.
pub struct FileConfig {
    entries: BTreeMap<String, String>,
    path: String,
}

impl FileConfig {
    /// No file given: every lookup misses and `finish` always passes.
    pub fn empty() -> Self {
        FileConfig {
            entries: BTreeMap::new(),
            path: String::new(),
        }
    }

    /// Load and parse `path`.
    pub fn load(path: &str) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {path}: {e}")))?;
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Failure::Usage(format!("{path}:{}: expected key = value", lineno + 1))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key == "config" {
                return Err(Failure::Usage(format!(
                    "{path}:{}: config files cannot nest (key \"config\")",
                    lineno + 1
                )));
            }
            if entries.insert(key.clone(), value).is_some() {
                return Err(Failure::Usage(format!(
                    "{path}:{}: duplicate key {key:?}",
                    lineno + 1
                )));
            }
        }
        Ok(FileConfig {
            entries,
            path: path.to_string(),
        })
    }

    /// Flag-wins merge for string-valued options.
    pub fn merge_str(&mut self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| self.entries.remove(key))
    }

    /// Flag-wins merge for typed options; file values parse with the same
    /// `FromStr` the flag uses.
    pub fn merge<T: FromStr>(&mut self, flag: Option<T>, key: &str) -> Result<Option<T>, Failure> {
        if flag.is_some() {
            self.entries.remove(key);
            return Ok(flag);
        }
        match self.entries.remove(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                Failure::Usage(format!(
                    "{}: key {key:?} has unparsable value {raw:?}",
                    self.path
                ))
            }),
        }
    }

    /// Flag-wins merge for boolean switches; the flag's presence or a file
    /// value of true/false.
    pub fn merge_bool(&mut self, flag: bool, key: &str) -> Result<bool, Failure> {
        match self.entries.remove(key) {
            None => Ok(flag),
            Some(raw) => match raw.as_str() {
                "true" => Ok(true),
                "false" => Ok(flag),
                _ => Err(Failure::Usage(format!(
                    "{}: key {key:?} must be true or false, got {raw:?}",
                    self.path
                ))),
            },
        }
    }

    /// Error on any key no merge consumed.
    pub fn finish(self) -> Result<(), Failure> {
        match self.entries.into_keys().next() {
            None => Ok(()),
            Some(key) => Err(Failure::Usage(format!(
                "{}: unknown key {key:?}",
                self.path
            ))),
        }
    }
}
