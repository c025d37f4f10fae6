//! Flat `key = value` experiment configuration.
//!
//! Lines starting with `#` are comments. List values (`m`, `nu`, `depths`)
//! accept commas or whitespace as separators.

use std::path::{Path, PathBuf};

use alcove_core::{DriftSpec, RootSystem, WeightVector};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub n: usize,
    /// Finite drift `ν` in `α`-coordinates; `None` means `ρ/(n+1)`.
    pub nu: Option<Vec<f64>>,
    pub m: Vec<f64>,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub dt: f64,
    pub steps: usize,
    pub particles: usize,
    pub seed: u64,
    /// Energy cutoff for catalogs; `None` picks the smallest one with tail
    /// mass below `1e-6`.
    #[serde(rename = "E_max")]
    pub e_max: Option<f64>,
    #[serde(rename = "K")]
    pub k_cut: usize,
    #[serde(rename = "M_cut")]
    pub m_cut: Option<f64>,
    pub depths: Vec<usize>,
    pub out: PathBuf,
    pub name: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 2,
            nu: None,
            m: vec![5.0, 20.0],
            horizon: 1.0,
            dt: 1e-3,
            steps: 200,
            particles: 1000,
            seed: 0,
            e_max: None,
            k_cut: 40,
            m_cut: None,
            depths: vec![0, 2, 5, 8, 11, 14, 17],
            out: PathBuf::from("out"),
            name: "run".into(),
        }
    }
}

fn numbers<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, CliError> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::Config(format!("{key}: cannot parse `{s}`")))
        })
        .collect()
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse `{}`", value.trim())))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| {
                    CliError::Config(format!("line {}: expected `key = value`", lineno + 1))
                })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "n" => cfg.n = number(key, value)?,
                "nu" => cfg.nu = Some(numbers(key, value)?),
                "m" => cfg.m = numbers(key, value)?,
                "T" => cfg.horizon = number(key, value)?,
                "dt" => cfg.dt = number(key, value)?,
                "steps" => cfg.steps = number(key, value)?,
                "particles" => cfg.particles = number(key, value)?,
                "seed" => cfg.seed = number(key, value)?,
                "E_max" => cfg.e_max = Some(number(key, value)?),
                "K" => cfg.k_cut = number(key, value)?,
                "M_cut" => cfg.m_cut = Some(number(key, value)?),
                "depths" => cfg.depths = numbers(key, value)?,
                "out" => cfg.out = PathBuf::from(value),
                "name" => cfg.name = value.to_string(),
                other => return Err(CliError::Config(format!("unknown key `{other}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |what: &str| Err(CliError::Config(what.to_string()));
        if self.n == 0 {
            return bad("n must be at least 1");
        }
        if let Some(nu) = &self.nu {
            if nu.len() != self.n {
                return bad("nu must have n entries");
            }
        }
        if self.m.is_empty() || self.m.iter().any(|&m| !(m > 0.0)) {
            return bad("m must be a non-empty list of positive numbers");
        }
        if !(self.horizon > 0.0) || !(self.dt > 0.0) || self.dt > self.horizon {
            return bad("need 0 < dt <= T");
        }
        if self.steps == 0 || self.particles == 0 || self.k_cut == 0 {
            return bad("steps, particles and K must be positive");
        }
        if self.e_max.is_some_and(|e| !(e > 0.0)) || self.m_cut.is_some_and(|e| !(e > 0.0)) {
            return bad("cutoffs must be positive");
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad("name must be a plain file stem");
        }
        Ok(())
    }

    pub fn root_system(&self) -> Result<RootSystem, CliError> {
        Ok(RootSystem::new(self.n)?)
    }

    pub fn drift(&self, rs: &RootSystem) -> DriftSpec {
        match &self.nu {
            Some(nu) => DriftSpec::new(nu.clone()),
            None => DriftSpec::barycentric(rs),
        }
    }

    pub fn nu_hat(&self, rs: &RootSystem) -> Result<WeightVector, CliError> {
        Ok(self.drift(rs).nu_hat(rs)?)
    }

    /// SHA-256 of the canonical JSON form, excluding the output location.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out = PathBuf::new();
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_keys() {
        let text = "# comment\nn = 1\nnu = 0.25\nm = 5, 20\nT = 2\ndt = 0.01\nsteps = 10\n\
                    particles = 50\nseed = 7\nE_max = 30\nK = 10\nM_cut = 40\ndepths = 0 1 2\n\
                    out = /tmp/x\nname = demo\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.n, 1);
        assert_eq!(cfg.nu, Some(vec![0.25]));
        assert_eq!(cfg.m, vec![5.0, 20.0]);
        assert_eq!(cfg.horizon, 2.0);
        assert_eq!(cfg.depths, vec![0, 1, 2]);
        assert_eq!(cfg.e_max, Some(30.0));
        assert_eq!(cfg.name, "demo");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::parse("bogus = 1").is_err());
        assert!(ExperimentConfig::parse("n = two").is_err());
        assert!(ExperimentConfig::parse("n = 2\nnu = 1").is_err());
        assert!(ExperimentConfig::parse("K = 0").is_err());
        assert!(ExperimentConfig::parse("E_max = -1").is_err());
        assert!(ExperimentConfig::parse("just words").is_err());
    }

    #[test]
    fn hash_ignores_output_dir() {
        let a = ExperimentConfig::parse("out = a").unwrap();
        let b = ExperimentConfig::parse("out = b").unwrap();
        let c = ExperimentConfig::parse("seed = 1").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }
}
