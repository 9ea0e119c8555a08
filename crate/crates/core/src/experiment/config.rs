//! Key-value experiment configuration.
//!
//! ```text
//! # comment
//! dimension = 2
//! degree_max = 32
//! n_max = 32
//! alpha_grid = 0, 0.5, 1
//! p_grid = 1.25, 1.5, 2
//! family = mixed
//! trials = 20
//! seed = 7
//! out_dir = results
//! ```
//!
//! Every key is required; unknown or repeated keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::Family;
use crate::sphere::check_dim;
use crate::zonal::MAX_DEGREE;

pub const KEYS: [&str; 9] = [
    "dimension",
    "degree_max",
    "n_max",
    "alpha_grid",
    "p_grid",
    "family",
    "trials",
    "seed",
    "out_dir",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dimension: usize,
    pub degree_max: usize,
    pub n_max: usize,
    pub alpha_grid: Vec<f64>,
    pub p_grid: Vec<f64>,
    pub family: Family,
    pub trials: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{}'", v.trim())))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    let out: Vec<f64> = v
        .split(',')
        .map(|x| parse_num::<f64>(key, x))
        .collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(Error::Config(format!("{key}: empty list")));
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(Error::Config(format!("line {}: unknown key '{k}'", lineno + 1)));
            }
            if map.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{k}'", lineno + 1)));
            }
        }
        let get = |k: &str| {
            map.get(k)
                .map(String::as_str)
                .ok_or_else(|| Error::Config(format!("missing key '{k}'")))
        };
        let cfg = Self {
            dimension: parse_num("dimension", get("dimension")?)?,
            degree_max: parse_num("degree_max", get("degree_max")?)?,
            n_max: parse_num("n_max", get("n_max")?)?,
            alpha_grid: parse_list("alpha_grid", get("alpha_grid")?)?,
            p_grid: parse_list("p_grid", get("p_grid")?)?,
            family: Family::parse(get("family")?)?,
            trials: parse_num("trials", get("trials")?)?,
            seed: parse_num("seed", get("seed")?)?,
            out_dir: PathBuf::from(get("out_dir")?),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.dimension)?;
        if self.degree_max == 0 || self.degree_max > MAX_DEGREE {
            return Err(Error::Config(format!(
                "degree_max must lie in 1..={MAX_DEGREE}, got {}",
                self.degree_max
            )));
        }
        // audits also run at twice the cutoff
        if self.n_max == 0 || 2 * self.n_max > MAX_DEGREE {
            return Err(Error::Config(format!(
                "n_max must lie in 1..={}, got {}",
                MAX_DEGREE / 2,
                self.n_max
            )));
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(**p >= 1.0 && **p <= 2.0)) {
            return Err(Error::Config(format!("p_grid values must lie in [1, 2], got {p}")));
        }
        if let Some(a) = self.alpha_grid.iter().find(|a| !(**a >= 0.0 && a.is_finite())) {
            return Err(Error::Config(format!("alpha_grid values must be >= 0, got {a}")));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        Ok(())
    }

    /// Canonical key-value text; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        let _ = writeln!(s, "dimension = {}", self.dimension);
        let _ = writeln!(s, "degree_max = {}", self.degree_max);
        let _ = writeln!(s, "n_max = {}", self.n_max);
        let _ = writeln!(s, "alpha_grid = {}", list(&self.alpha_grid));
        let _ = writeln!(s, "p_grid = {}", list(&self.p_grid));
        let _ = writeln!(s, "family = {}", self.family.name());
        let _ = writeln!(s, "trials = {}", self.trials);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "out_dir = {}", self.out_dir.display());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "# audit run\n\
        dimension = 2\n\
        degree_max = 16   # band limit\n\
        n_max = 16\n\
        alpha_grid = 0, 0.5,1\n\
        p_grid = 1.5, 2\n\
        family = mixed\n\
        trials = 3\n\
        seed = 42\n\
        out_dir = out\n";

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.alpha_grid, vec![0.0, 0.5, 1.0]);
        assert_eq!(cfg.family, Family::Mixed);
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_input() {
        let bad = [
            SAMPLE.replace("p_grid = 1.5, 2", "p_grid = 1.5, 3"),
            SAMPLE.replace("alpha_grid = 0, 0.5,1", "alpha_grid = -1"),
            SAMPLE.replace("trials = 3", "trials = 0"),
            SAMPLE.replace("seed = 42", "seed = x"),
            SAMPLE.replace("dimension = 2", "dimension = 9"),
            SAMPLE.replace("n_max = 16", "n_max = 300"),
            SAMPLE.replace("out_dir = out", ""),
            format!("{SAMPLE}colour = red\n"),
            format!("{SAMPLE}seed = 1\n"),
            format!("{SAMPLE}no equals sign\n"),
        ];
        for text in bad {
            assert!(ExperimentConfig::parse(&text).is_err(), "{text}");
        }
    }
}
