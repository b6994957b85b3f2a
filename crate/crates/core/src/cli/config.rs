//! Layered `key = value` settings: defaults, then a config file, then flags.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

/// One setting with its default and help line.
#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub default: &'static str,
    pub help: &'static str,
    pub alias: Option<&'static str>,
}

pub const fn key(name: &'static str, default: &'static str, help: &'static str) -> Key {
    Key {
        name,
        default,
        help,
        alias: None,
    }
}

pub const fn aliased(name: &'static str, alias: &'static str, default: &'static str, help: &'static str) -> Key {
    Key {
        name,
        default,
        help,
        alias: Some(alias),
    }
}

/// Resolved settings of one command. An empty value means "unset".
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
    /// Keys set by a file or flag rather than left at their default.
    explicit: BTreeMap<String, bool>,
}

impl Settings {
    pub fn from_defaults(keys: &[Key]) -> Self {
        let mut s = Self::default();
        for k in keys {
            s.values.insert(k.name.to_string(), k.default.to_string());
        }
        s
    }

    pub fn set(&mut self, name: &str, value: &str) -> Result<()> {
        if !self.values.contains_key(name) {
            return Err(Error::Config(format!("unknown setting '{name}'")));
        }
        self.values.insert(name.to_string(), value.trim().to_string());
        self.explicit.insert(name.to_string(), true);
        Ok(())
    }

    /// Applies a `key = value` file; `#` starts a comment, blank lines are skipped.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value', got '{raw}'", n + 1)))?;
            self.set(k.trim(), v.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn is_explicit(&self, name: &str) -> bool {
        self.explicit.get(name).copied().unwrap_or(false)
    }

    pub fn raw(&self, name: &str) -> &str {
        self.values.get(name).map(String::as_str).unwrap_or("")
    }

    pub fn is_set(&self, name: &str) -> bool {
        !self.raw(name).is_empty()
    }

    pub fn parse<T: FromStr>(&self, name: &str) -> Result<T> {
        let v = self.raw(name);
        v.parse()
            .map_err(|_| Error::Config(format!("invalid value '{v}' for '{name}'")))
    }

    pub fn f64(&self, name: &str) -> Result<f64> {
        let x: f64 = match self.raw(name) {
            "pi" => std::f64::consts::PI,
            _ => self.parse(name)?,
        };
        if !x.is_finite() && !matches!(self.raw(name), "inf" | "infinity") {
            return Err(Error::Config(format!("'{name}' must be finite")));
        }
        Ok(x)
    }

    pub fn grid(&self, name: &str) -> Result<Vec<f64>> {
        parse_grid(self.raw(name)).map_err(|e| Error::Config(format!("'{name}': {e}")))
    }

    /// Every setting as `key = value` lines, in key order.
    pub fn dump(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &String)> {
        self.values.iter()
    }
}

/// `lo:hi:count[log|lin]`, a comma list, or a single number.
pub fn parse_grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    let num = |t: &str| -> std::result::Result<f64, String> {
        match t.trim() {
            "inf" | "infinity" => Ok(f64::INFINITY),
            x => x.parse::<f64>().map_err(|_| format!("'{x}' is not a number")),
        }
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("grid '{s}' is not lo:hi:count[log|lin]"));
        }
        let (lo, hi) = (num(parts[0])?, num(parts[1])?);
        let spec = parts[2].trim();
        let (count, log) = if let Some(c) = spec.strip_suffix("log") {
            (c, true)
        } else if let Some(c) = spec.strip_suffix("lin") {
            (c, false)
        } else {
            (spec, false)
        };
        let n: usize = count.parse().map_err(|_| format!("grid count '{count}' is not an integer"))?;
        if n == 0 || !lo.is_finite() || !hi.is_finite() {
            return Err(format!("grid '{s}' needs finite bounds and count >= 1"));
        }
        if log && !(lo > 0.0 && hi > 0.0) {
            return Err(format!("log grid '{s}' needs positive bounds"));
        }
        if n == 1 {
            return Ok(vec![lo]);
        }
        Ok((0..n)
            .map(|k| {
                let f = k as f64 / (n - 1) as f64;
                if log {
                    (lo.ln() + f * (hi.ln() - lo.ln())).exp()
                } else {
                    lo + f * (hi - lo)
                }
            })
            .collect())
    } else {
        let v: Vec<f64> = s.split(',').map(num).collect::<std::result::Result<_, _>>()?;
        if v.is_empty() {
            return Err("empty grid".into());
        }
        Ok(v)
    }
}
