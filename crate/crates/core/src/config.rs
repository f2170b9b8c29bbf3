//! Flat `key = value` experiment configuration.
//!
//! Lines starting with `#` (and anything after a `#`) are comments. Values
//! given as overrides replace file values, which replace the defaults.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::TrainConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CenterChoice {
    /// Hadamard rows when possible, bit-balanced random otherwise.
    #[default]
    Hadamard,
    Balanced,
    Bernoulli,
}

impl FromStr for CenterChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hadamard" => Ok(CenterChoice::Hadamard),
            "balanced" => Ok(CenterChoice::Balanced),
            "bernoulli" => Ok(CenterChoice::Bernoulli),
            other => Err(Error::Config(format!(
                "unknown center method {other:?} (expected hadamard, balanced or bernoulli)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub train_features: PathBuf,
    pub train_labels: PathBuf,
    pub query_features: PathBuf,
    pub query_labels: PathBuf,
    pub db_features: PathBuf,
    pub db_labels: PathBuf,
    pub out_dir: PathBuf,
    pub k: usize,
    /// Number of centers; defaults to the number of training categories.
    pub m: Option<usize>,
    pub method: CenterChoice,
    pub train: TrainConfig,
    pub map_n: usize,
    pub radius: u32,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            train_features: "train.csqf".into(),
            train_labels: "train.csql".into(),
            query_features: "query.csqf".into(),
            query_labels: "query.csql".into(),
            db_features: "db.csqf".into(),
            db_labels: "db.csql".into(),
            out_dir: "out".into(),
            k: 64,
            m: None,
            method: CenterChoice::default(),
            train: TrainConfig::default(),
            map_n: 1000,
            radius: 2,
            seed: 0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("bad boolean {value:?} for {key}"))),
    }
}

/// Splits `key = value` lines, dropping comments and blank lines.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key = value, got {line:?}", lineno + 1))
        })?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "train_features" => self.train_features = value.into(),
            "train_labels" => self.train_labels = value.into(),
            "query_features" => self.query_features = value.into(),
            "query_labels" => self.query_labels = value.into(),
            "db_features" => self.db_features = value.into(),
            "db_labels" => self.db_labels = value.into(),
            "out_dir" => self.out_dir = value.into(),
            "k" => self.k = parse(key, value)?,
            "m" => self.m = Some(parse(key, value)?),
            "method" => self.method = value.parse()?,
            "lambda1" => self.train.lambda1 = parse(key, value)?,
            "lr" | "learning_rate" => self.train.learning_rate = parse(key, value)?,
            "momentum" => self.train.momentum = parse(key, value)?,
            "batch" | "batch_size" => self.train.batch_size = parse(key, value)?,
            "epochs" => self.train.epochs = parse(key, value)?,
            "hidden" => self.train.hidden = Some(parse_widths(value)?),
            "use_lc" => self.train.use_lc = parse_bool(key, value)?,
            "use_lq" => self.train.use_lq = parse_bool(key, value)?,
            "map_n" => self.map_n = parse(key, value)?,
            "radius" => self.radius = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Defaults, then `text`, then `overrides`.
    pub fn from_str_with(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (k, v) in parse_pairs(text)?.iter().chain(overrides) {
            cfg.set(k, v)?;
        }
        cfg.train.seed = cfg.seed;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>, overrides: &[(String, String)]) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read {}: {e}", path.display()))
        })?;
        let mut cfg = Self::from_str_with(&text, overrides)?;
        if let Some(base) = path.parent() {
            for p in [
                &mut cfg.train_features,
                &mut cfg.train_labels,
                &mut cfg.query_features,
                &mut cfg.query_labels,
                &mut cfg.db_features,
                &mut cfg.db_labels,
                &mut cfg.out_dir,
            ] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config(format!("k must be at least 2, got {}", self.k)));
        }
        if self.m == Some(0) {
            return Err(Error::Config("m must be positive".into()));
        }
        if self.map_n == 0 {
            return Err(Error::Config("map_n must be at least 1".into()));
        }
        self.train.validate()
    }
}

pub fn parse_widths(value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(|w| parse::<usize>("hidden", w.trim()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_flag_over_file_over_default() {
        let text = "# experiment\nk = 16\nepochs = 7  # short\nmethod = bernoulli\n\nhidden = 8, 4\n";
        let cfg = RunConfig::from_str_with(text, &[("epochs".into(), "3".into())]).unwrap();
        assert_eq!(cfg.k, 16);
        assert_eq!(cfg.train.epochs, 3);
        assert_eq!(cfg.method, CenterChoice::Bernoulli);
        assert_eq!(cfg.train.hidden, Some(vec![8, 4]));
        assert_eq!(cfg.train.momentum, TrainConfig::default().momentum);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::from_str_with("nonsense", &[]).is_err());
        assert!(RunConfig::from_str_with("colour = red", &[]).is_err());
        assert!(RunConfig::from_str_with("k = 1", &[]).is_err());
        assert!(RunConfig::from_str_with("use_lc = false\nuse_lq = no", &[]).is_err());
        assert!(RunConfig::from_str_with("method = magic", &[]).is_err());
    }

    #[test]
    fn seed_propagates_to_training() {
        let cfg = RunConfig::from_str_with("seed = 42", &[]).unwrap();
        assert_eq!(cfg.train.seed, 42);
    }
}
