//! Plain key-value configuration files: one `key = value` per line, `#`
//! starts a comment, blank lines are ignored. Values never span lines.
//! Every key must be consumed by the subcommand that loaded the file;
//! leftovers are reported as validation errors so typos cannot silently
//! fall back to defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use fabtest::error::{Error, Result};

#[derive(Debug, Default)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
}

impl KvConfig {
    /// Load a config file, or produce an empty config when no path is given.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let content = fs::read_to_string(path)?;
        let mut entries = BTreeMap::new();
        for (i, raw) in content.lines().enumerate() {
            let line = (i + 1) as u64;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let Some((key, value)) = text.split_once('=') else {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    msg: format!("expected key = value, got {text:?}"),
                });
            };
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    msg: "empty key".into(),
                });
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    msg: format!("duplicate key {key:?}"),
                });
            }
        }
        Ok(Self { entries })
    }

    /// Remove and parse one key. Absent keys are `None`; unparseable values
    /// are validation errors naming the key.
    pub fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some(value) => value.parse::<T>().map(Some).map_err(|_| {
                Error::Validation(format!("config key {key}: cannot parse {value:?}"))
            }),
        }
    }

    /// Remove a comma-separated list value.
    pub fn take_list(&mut self, key: &str) -> Option<Vec<String>> {
        self.entries.remove(key).map(|value| {
            value
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect()
        })
    }

    /// Every key must have been consumed; anything left is a typo.
    pub fn finish(self) -> Result<()> {
        if self.entries.is_empty() {
            return Ok(());
        }
        let keys: Vec<&str> = self.entries.keys().map(String::as_str).collect();
        Err(Error::Validation(format!(
            "unknown config keys: {}",
            keys.join(", ")
        )))
    }
}
