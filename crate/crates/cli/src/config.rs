//! Line-oriented `key = value` config files. Command-line flags win over
//! file entries; entries no flag consumes are rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, (usize, String)>,
    used: BTreeSet<String>,
}

impl Resolver {
    pub fn from_path(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                Self::parse(&text)
            }
        }
    }

    /// Blank lines and `#` comments are skipped; keys may use `-` or `_`.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut file = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", n + 1)))?;
            let key = k.trim().replace('_', "-");
            if key.is_empty() {
                return Err(CliError::Usage(format!("config line {}: empty key", n + 1)));
            }
            if file.insert(key.clone(), (n + 1, v.trim().to_owned())).is_some() {
                return Err(CliError::Usage(format!("config line {}: duplicate key `{key}`", n + 1)));
            }
        }
        Ok(Self {
            file,
            used: BTreeSet::new(),
        })
    }

    /// The flag value if given, else the file entry, else `None`.
    pub fn opt<T: FromStr>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.used.insert(key.to_owned());
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config line {line}: bad value for `{key}`: {e}"))),
        }
    }

    pub fn get<T: FromStr>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.opt(key, flag)?.unwrap_or(default))
    }

    /// Fails on any file entry that was never looked up.
    pub fn finish(self) -> Result<(), CliError> {
        match self.file.iter().find(|(k, _)| !self.used.contains(*k)) {
            Some((k, (line, _))) => Err(CliError::Usage(format!("config line {line}: unknown key `{k}`"))),
            None => Ok(()),
        }
    }
}
