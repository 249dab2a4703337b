use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::convexity::{CheckOptions, DEFAULT_GRID, DEFAULT_SEED, DEFAULT_TRIALS, MIN_TRIALS, VIOLATION_TOL};
use crate::mappings::DEFAULT_MAPPING_GRID;
use crate::quad::{QuadOptions, DEFAULT_ORDER, DEFAULT_TOL, MAX_ORDER, MIN_ORDER};
use crate::{Error, Result, Settings, DEFAULT_TOL_MARGIN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Classify,
    Lemma1,
    Bounds,
    Chain,
    Mappings,
    Errata,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Classify,
        Suite::Lemma1,
        Suite::Bounds,
        Suite::Chain,
        Suite::Mappings,
        Suite::Errata,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Classify => "classify",
            Suite::Lemma1 => "lemma1",
            Suite::Bounds => "bounds",
            Suite::Chain => "chain",
            Suite::Mappings => "mappings",
            Suite::Errata => "errata",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite '{s}'")))
    }
}

/// Parses a comma-separated suite list; `all` selects every suite.
pub fn parse_suites(text: &str) -> Result<Vec<Suite>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if item == "all" {
            out.extend(Suite::ALL);
        } else {
            out.push(item.parse()?);
        }
    }
    if out.is_empty() {
        return Err(Error::Config("empty suite list".into()));
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Run configuration. Read from a flat `key = value` file (`#` starts a
/// comment), then overridden key by key from the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub seed: u64,
    pub tol: f64,
    pub tol_margin: f64,
    pub trials: usize,
    pub grid: usize,
    pub mapping_grid: usize,
    pub p: f64,
    pub q: f64,
    pub order: usize,
    pub suites: Vec<Suite>,
    /// Corpus entry names; empty selects the whole corpus.
    pub entries: Vec<String>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: DEFAULT_SEED,
            tol: DEFAULT_TOL,
            tol_margin: DEFAULT_TOL_MARGIN,
            trials: DEFAULT_TRIALS,
            grid: DEFAULT_GRID,
            mapping_grid: DEFAULT_MAPPING_GRID,
            p: 2.0,
            q: 2.0,
            order: DEFAULT_ORDER,
            suites: Suite::ALL.to_vec(),
            entries: Vec::new(),
        }
    }
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Config(format!("bad value for '{key}': '{raw}'")))
}

impl Config {
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let raw = raw.trim();
        match key.trim() {
            "seed" => self.seed = value(key, raw)?,
            "tol" => self.tol = value(key, raw)?,
            "tol_margin" => self.tol_margin = value(key, raw)?,
            "trials" => self.trials = value(key, raw)?,
            "grid" => self.grid = value(key, raw)?,
            "mapping_grid" => self.mapping_grid = value(key, raw)?,
            "p" => self.p = value(key, raw)?,
            "q" => self.q = value(key, raw)?,
            "order" => self.order = value(key, raw)?,
            "suites" => self.suites = parse_suites(raw)?,
            "entries" => {
                self.entries = raw
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            }
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(key, raw)
                .map_err(|e| Error::Config(format!("line {}: {}", lineno + 1, strip_prefix(e))))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Config> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Config::default();
        config.apply_text(&text)?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if !(self.tol_margin > 0.0 && self.tol_margin.is_finite()) {
            return bad(format!("tol_margin must be positive, got {}", self.tol_margin));
        }
        if self.trials < MIN_TRIALS {
            return bad(format!("trials must be >= {MIN_TRIALS}, got {}", self.trials));
        }
        if self.grid < 3 {
            return bad(format!("grid must be >= 3, got {}", self.grid));
        }
        if self.mapping_grid < 3 || self.mapping_grid.is_multiple_of(2) {
            return bad(format!("mapping_grid must be odd and >= 3, got {}", self.mapping_grid));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return bad(format!("p must be > 1, got {}", self.p));
        }
        if !(self.q >= 1.0 && self.q.is_finite()) {
            return bad(format!("q must be >= 1, got {}", self.q));
        }
        if !(MIN_ORDER..=MAX_ORDER).contains(&self.order) {
            return bad(format!(
                "order must be in {MIN_ORDER}..={MAX_ORDER}, got {}",
                self.order
            ));
        }
        if self.suites.is_empty() {
            return bad("no suites selected".into());
        }
        Ok(())
    }

    pub fn settings(&self) -> Settings {
        Settings {
            quad: QuadOptions {
                order: self.order,
                tol: self.tol,
                ..QuadOptions::default()
            },
            check: CheckOptions {
                trials: self.trials,
                seed: self.seed,
                grid: self.grid,
                tol: VIOLATION_TOL,
            },
            tol_margin: self.tol_margin,
        }
    }
}

fn strip_prefix(e: Error) -> String {
    match e {
        Error::Config(msg) => msg,
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_format() {
        let mut c = Config::default();
        c.apply_text("# run\nseed = 7\n\ntol=1e-10   # tighter\nsuites = bounds, classify\nentries = xy,x2y2\n")
            .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.tol, 1e-10);
        assert_eq!(c.suites, [Suite::Classify, Suite::Bounds]);
        assert_eq!(c.entries, ["xy", "x2y2"]);
        c.validate().unwrap();
    }

    #[test]
    fn errors_name_the_line() {
        let mut c = Config::default();
        let e = c.apply_text("seed = 1\nbogus = 3\n").unwrap_err().to_string();
        assert!(e.contains("line 2") && e.contains("bogus"), "{e}");
        let e = c.apply_text("seed 1\n").unwrap_err().to_string();
        assert!(e.contains("line 1"), "{e}");
        assert!(c.apply_text("trials = many").is_err());
        assert!(c.apply_text("suites = bounds, nope").is_err());
    }

    #[test]
    fn validation() {
        let ok = Config::default();
        ok.validate().unwrap();
        for (k, v) in [
            ("tol", "0"),
            ("tol_margin", "-1"),
            ("trials", "10"),
            ("mapping_grid", "32"),
            ("p", "1"),
            ("q", "0.5"),
            ("order", "40"),
        ] {
            let mut c = ok.clone();
            c.set(k, v).unwrap();
            assert!(c.validate().is_err(), "{k} = {v}");
        }
    }

    #[test]
    fn all_expands() {
        assert_eq!(parse_suites("all").unwrap(), Suite::ALL);
        assert_eq!(parse_suites("errata,all").unwrap(), Suite::ALL);
        assert!(parse_suites(" , ").is_err());
    }
}
