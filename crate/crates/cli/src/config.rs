use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context as _, Result};

/// Keys a config file may set. Flags override them.
pub const KEYS: &[&str] = &[
    "b",
    "beta",
    "dev_fraction",
    "estimator",
    "gamma",
    "gold_union",
    "k",
    "max_len",
    "max_order",
    "min_fire",
    "passes",
    "probes",
    "scale",
    "seed",
    "sigma",
    "size",
    "sizes",
    "threshold",
    "workers",
];

/// `key = value` lines; `#` starts a comment.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str, path: &str) -> Result<Config> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("{path}:{}: expected `key = value`", i + 1);
            };
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                bail!("{path}:{}: unknown key `{k}`", i + 1);
            }
            if values.insert(k.to_string(), v.to_string()).is_some() {
                bail!("{path}:{}: `{k}` set twice", i + 1);
            }
        }
        Ok(Config { values })
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Config::parse(&text, &path.display().to_string())
    }

    /// The flag if given, else the config value, else `default`.
    pub fn pick<T: FromStr>(&self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        debug_assert!(KEYS.contains(&key), "{key}");
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.values.get(key) {
            Some(s) => s
                .parse()
                .map_err(|e| anyhow::anyhow!("config `{key} = {s}`: {e}")),
            None => Ok(default),
        }
    }
}

/// Comma separated list, as used by `beta` and `sizes`.
#[derive(Clone, Debug, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: std::fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let items = s
            .split(',')
            .map(|x| x.trim().parse::<T>().map_err(|e| format!("`{x}`: {e}")))
            .collect::<std::result::Result<Vec<T>, String>>()?;
        if items.is_empty() {
            return Err("empty list".into());
        }
        Ok(List(items))
    }
}

impl<T: std::fmt::Display> std::fmt::Display for List<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beats_default() {
        let c = Config::parse("# desk run\nscale = 0.01\nbeta = 0.01, 10\n", "c").unwrap();
        assert_eq!(c.pick("scale", None, 1.0).unwrap(), 0.01);
        assert_eq!(c.pick("scale", Some(0.5), 1.0).unwrap(), 0.5);
        assert_eq!(c.pick("seed", None, 7u64).unwrap(), 7);
        let betas: List<f64> = c.pick("beta", None, List(vec![1.0])).unwrap();
        assert_eq!(betas.0, vec![0.01, 10.0]);
        assert_eq!(betas.to_string(), "0.01,10");
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(Config::parse("bogus = 1", "c").is_err());
        assert!(Config::parse("seed 1", "c").is_err());
        assert!(Config::parse("seed = 1\nseed = 2", "c").is_err());
        let c = Config::parse("seed = x", "c").unwrap();
        assert!(c.pick("seed", None, 1u64).is_err());
    }
}
