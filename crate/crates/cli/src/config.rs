//! Flag resolution: command line, then config file, then built-in default.

use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

/// Linear grid `lo:hi:n`; a bare number is a one-point grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn point(v: f64) -> Self {
        Grid { lo: v, hi: v, n: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.n {
            1 => vec![self.lo],
            n => (0..n).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64).collect(),
        }
    }

    /// The single value of a one-point grid.
    pub fn scalar(&self, name: &str) -> Result<f64> {
        if self.n != 1 {
            bail!(rotorkick::Error::InvalidInput(format!("--{name} takes a single value here")));
        }
        Ok(self.lo)
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("'{t}' is not a number"));
        let parts: Vec<&str> = s.split(':').collect();
        let grid = match parts.as_slice() {
            [v] => Grid::point(num(v)?),
            [lo, hi, n] => Grid {
                lo: num(lo)?,
                hi: num(hi)?,
                n: n.trim().parse().map_err(|_| format!("'{n}' is not a point count"))?,
            },
            _ => return Err(format!("expected VALUE or LO:HI:N, got '{s}'")),
        };
        if !grid.lo.is_finite() || !grid.hi.is_finite() || grid.lo > grid.hi || grid.n == 0 {
            return Err(format!("grid '{s}' needs finite lo <= hi and n >= 1"));
        }
        if grid.n == 1 && grid.lo != grid.hi {
            return Err(format!("one-point grid '{s}' needs lo == hi"));
        }
        Ok(grid)
    }
}

/// Values readable from a flat config document.
pub trait ConfigValue: Sized + Serialize {
    fn from_toml(v: &toml::Value) -> Option<Self>;
}

impl ConfigValue for f64 {
    fn from_toml(v: &toml::Value) -> Option<Self> {
        v.as_float().or_else(|| v.as_integer().map(|i| i as f64))
    }
}

impl ConfigValue for u32 {
    fn from_toml(v: &toml::Value) -> Option<Self> {
        v.as_integer().and_then(|i| u32::try_from(i).ok())
    }
}

impl ConfigValue for i32 {
    fn from_toml(v: &toml::Value) -> Option<Self> {
        v.as_integer().and_then(|i| i32::try_from(i).ok())
    }
}

impl ConfigValue for usize {
    fn from_toml(v: &toml::Value) -> Option<Self> {
        v.as_integer().and_then(|i| usize::try_from(i).ok())
    }
}

impl ConfigValue for String {
    fn from_toml(v: &toml::Value) -> Option<Self> {
        v.as_str().map(str::to_owned)
    }
}

impl ConfigValue for std::path::PathBuf {
    fn from_toml(v: &toml::Value) -> Option<Self> {
        v.as_str().map(Into::into)
    }
}

impl ConfigValue for Grid {
    fn from_toml(v: &toml::Value) -> Option<Self> {
        match v {
            toml::Value::String(s) => s.parse().ok(),
            other => f64::from_toml(other).map(Grid::point),
        }
    }
}

pub struct Resolver {
    file: toml::Table,
    resolved: Map<String, Value>,
}

impl Resolver {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                text.parse::<toml::Table>()
                    .map_err(|e| rotorkick::Error::Parse(format!("config {}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        Ok(Self { file, resolved: Map::new() })
    }

    fn from_file<T: ConfigValue>(&self, key: &str) -> Result<Option<T>> {
        let snake = key.replace('-', "_");
        let Some(v) = self.file.get(key).or_else(|| self.file.get(&snake)) else {
            return Ok(None);
        };
        match T::from_toml(v) {
            Some(t) => Ok(Some(t)),
            None => bail!(rotorkick::Error::Parse(format!("config key '{key}' has an unusable value {v}"))),
        }
    }

    fn record<T: Serialize>(&mut self, key: &str, value: &T) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.resolved.insert(key.to_owned(), v);
    }

    pub fn get_opt<T: ConfigValue>(&mut self, key: &str, cli: Option<T>) -> Result<Option<T>> {
        let v = match cli {
            Some(v) => Some(v),
            None => self.from_file(key)?,
        };
        self.record(key, &v);
        Ok(v)
    }

    pub fn get<T: ConfigValue>(&mut self, key: &str, cli: Option<T>, default: T) -> Result<T> {
        let v = match cli {
            Some(v) => v,
            None => self.from_file(key)?.unwrap_or(default),
        };
        self.record(key, &v);
        Ok(v)
    }

    pub fn resolved(&self) -> Value {
        Value::Object(self.resolved.clone())
    }
}
