//! Flag / config-file resolution.
//!
//! A config file is flat `key = value` text. Keys outside any section apply to
//! every command; a `[bounds]`, `[fig2]`, `[fig3]` or `[validate]` section
//! applies to that command only and wins over the general keys. Command-line
//! flags win over both. Keys are the flag names without dashes.

use std::collections::BTreeSet;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use ini::Ini;

pub struct Resolver {
    ini: Option<Ini>,
    section: &'static str,
    used: BTreeSet<String>,
    /// Every resolved setting in resolution order, for output headers.
    pub resolved: Vec<(String, String)>,
}

impl Resolver {
    pub fn load(path: Option<&Path>, section: &'static str) -> Result<Self> {
        let ini = match path {
            Some(p) => Some(Ini::load_from_file(p).with_context(|| format!("reading config file {}", p.display()))?),
            None => None,
        };
        Ok(Self { ini, section, used: BTreeSet::new(), resolved: Vec::new() })
    }

    fn lookup(&mut self, key: &str) -> Option<String> {
        let ini = self.ini.as_ref()?;
        let found = ini
            .section(Some(self.section))
            .and_then(|s| s.get(key))
            .or_else(|| ini.general_section().get(key))
            .map(str::to_string);
        if found.is_some() {
            self.used.insert(key.to_string());
        }
        found
    }

    fn parse<T: FromStr>(key: &str, raw: &str) -> Result<T>
    where
        T::Err: Display,
    {
        raw.trim().parse::<T>().map_err(|e| anyhow!("config key `{key}`: cannot parse `{raw}`: {e}"))
    }

    fn record(&mut self, key: &str, shown: String) {
        self.resolved.push((key.to_string(), shown));
    }

    pub fn optional<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        let from_file = self.lookup(key);
        let value = match flag {
            Some(v) => Some(v),
            None => from_file.map(|raw| Self::parse(key, &raw)).transpose()?,
        };
        if let Some(v) = &value {
            self.record(key, v.to_string());
        }
        Ok(value)
    }

    pub fn or_default<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        let from_file = self.lookup(key);
        let value = match (flag, from_file) {
            (Some(v), _) => v,
            (None, Some(raw)) => Self::parse(key, &raw)?,
            (None, None) => default,
        };
        self.record(key, value.to_string());
        Ok(value)
    }

    pub fn required<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<T>
    where
        T::Err: Display,
    {
        self.optional(key, flag)?.ok_or_else(|| anyhow!("missing required setting `--{key}`"))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr + Display>(&mut self, key: &str, flag: Option<Vec<T>>, default: Vec<T>) -> Result<Vec<T>>
    where
        T::Err: Display,
    {
        let from_file = self.lookup(key);
        let values = match (flag, from_file) {
            (Some(v), _) => v,
            (None, Some(raw)) => raw.split(',').map(|item| Self::parse(key, item)).collect::<Result<_>>()?,
            (None, None) => default,
        };
        let shown = values.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
        self.record(key, shown);
        Ok(values)
    }

    /// Rejects keys in the command's own section that no setting consumed,
    /// so typos do not pass silently. General keys may belong to other commands.
    pub fn finish(&self) -> Result<()> {
        let Some(section) = self.ini.as_ref().and_then(|ini| ini.section(Some(self.section))) else { return Ok(()) };
        for (key, _) in section.iter() {
            if !self.used.contains(key) {
                bail!("unknown config key `{key}` in section [{}]", self.section);
            }
        }
        Ok(())
    }
}
