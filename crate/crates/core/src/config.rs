//! Flat `key = value` configuration file.
//!
//! ```text
//! # pipeline settings
//! corpus = data/corpus.tsv
//! k = 5
//! rules = 238,254,238,252
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are an
//! error. Paths are optional; everything else has a default.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fca::{RuleVector, DEFAULT_MAX_STEPS};
use crate::ranker::{FcaConfig, DEFAULT_CELLS, DEFAULT_RULES};

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_DEPTH: usize = 1000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub corpus: Option<PathBuf>,
    pub queries: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    /// Initial number of clusters per query.
    pub k: usize,
    /// Retrieved documents kept per query.
    pub depth: usize,
    pub rules: RuleVector,
    pub cells: usize,
    pub max_steps: usize,
    /// Move cap for local search; `None` means ten moves per document.
    pub lsc_max_iters: Option<usize>,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            corpus: None,
            queries: None,
            qrels: None,
            index: None,
            output_dir: None,
            k: DEFAULT_K,
            depth: DEFAULT_DEPTH,
            rules: DEFAULT_RULES.parse().expect("default rules are valid"),
            cells: DEFAULT_CELLS,
            max_steps: DEFAULT_MAX_STEPS,
            lsc_max_iters: None,
            seed: DEFAULT_SEED,
            threads: None,
        }
    }
}

fn positive(key: &str, value: &str) -> std::result::Result<usize, String> {
    match value.parse::<usize>() {
        Ok(0) => Err(format!("{key} must be positive")),
        Ok(v) => Ok(v),
        Err(e) => Err(format!("{key}: {e}")),
    }
}

impl Config {
    pub fn fca(&self) -> FcaConfig {
        FcaConfig {
            rules: self.rules.clone(),
            cells: self.cells,
            max_steps: self.max_steps,
        }
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let path = || Some(PathBuf::from(value));
        match key {
            "corpus" => self.corpus = path(),
            "queries" => self.queries = path(),
            "qrels" => self.qrels = path(),
            "index" => self.index = path(),
            "output_dir" => self.output_dir = path(),
            "k" => self.k = positive(key, value)?,
            "depth" => self.depth = positive(key, value)?,
            "rules" => self.rules = value.parse().map_err(|e: Error| e.to_string())?,
            "cells" => self.cells = positive(key, value)?,
            "max_steps" => self.max_steps = positive(key, value)?,
            "lsc_max_iters" => self.lsc_max_iters = Some(positive(key, value)?),
            "seed" => self.seed = value.parse().map_err(|e| format!("seed: {e}"))?,
            "threads" => self.threads = Some(positive(key, value)?),
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    pub fn parse(text: &str, source: &str) -> Result<Config> {
        let mut cfg = Config::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::format(source, i + 1, "expected key = value"))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|reason| Error::format(source, i + 1, reason))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Config::parse(&text, &path.display().to_string())
    }

    /// Serializes every setting; unset optional values are omitted.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# fcaclust configuration\n");
        let paths = [
            ("corpus", &self.corpus),
            ("queries", &self.queries),
            ("qrels", &self.qrels),
            ("index", &self.index),
            ("output_dir", &self.output_dir),
        ];
        for (key, p) in paths {
            if let Some(p) = p {
                writeln!(out, "{key} = {}", p.display()).expect("write to string");
            }
        }
        writeln!(out, "k = {}", self.k).expect("write to string");
        writeln!(out, "depth = {}", self.depth).expect("write to string");
        writeln!(out, "rules = {}", self.rules).expect("write to string");
        writeln!(out, "cells = {}", self.cells).expect("write to string");
        writeln!(out, "max_steps = {}", self.max_steps).expect("write to string");
        if let Some(v) = self.lsc_max_iters {
            writeln!(out, "lsc_max_iters = {v}").expect("write to string");
        }
        writeln!(out, "seed = {}", self.seed).expect("write to string");
        if let Some(v) = self.threads {
            writeln!(out, "threads = {v}").expect("write to string");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = Config::default();
        assert_eq!(Config::parse(&cfg.to_text(), "c").unwrap(), cfg);
        assert_eq!(cfg.depth, 1000);
    }

    #[test]
    fn full_round_trip() {
        let text = "\
# comment
corpus = data/corpus.tsv
queries = data/queries.tsv
qrels = data/qrels.txt
index = out/index.json
output_dir = out
k = 13
depth = 200
rules = 204,51
cells = 8
max_steps = 10
lsc_max_iters = 500
seed = 42
threads = 8
";
        let cfg = Config::parse(text, "c").unwrap();
        assert_eq!(cfg.k, 13);
        assert_eq!(cfg.rules.codes(), vec![204, 51]);
        assert_eq!(cfg.lsc_max_iters, Some(500));
        assert_eq!(Config::parse(&cfg.to_text(), "c").unwrap(), cfg);
    }

    #[test]
    fn invalid_lines() {
        let err = Config::parse("k = 3\nk = 0\n", "run.cfg").unwrap_err();
        assert_eq!(err.to_string(), "run.cfg:2: k must be positive");
        assert!(Config::parse("colour = red\n", "c").is_err());
        assert!(Config::parse("rules = 238,7\n", "c").is_err());
        assert!(Config::parse("just words\n", "c").is_err());
    }
}
