//! Flat key/value run configuration with preset defaults.
//!
//! Precedence: preset defaults, then the config file, then explicit
//! command-line flags. The canonical rendering of the merged config is
//! hashed (FNV-1a) and stamped into every output file header so results
//! can be traced back to their inputs.

use anyhow::{bail, Context, Result};
use semidot::model::ProblemConfig;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    ChaoticDot,
    HarmonicTest,
}

impl Preset {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "chaotic-dot" => Ok(Preset::ChaoticDot),
            "harmonic-test" => Ok(Preset::HarmonicTest),
            other => bail!("unknown preset '{other}' (expected chaotic-dot or harmonic-test)"),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::ChaoticDot => "chaotic-dot",
            Preset::HarmonicTest => "harmonic-test",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub preset: Preset,
    pub lambda: f64,
    pub grid_n: usize,
    pub extent: Option<f64>,
    pub seed: u64,
    pub orbits_k: usize,
    pub max_period: f64,
    pub n_min: f64,
    pub n_max: f64,
    pub samples: usize,
    pub eps: Vec<f64>,
    pub nev: usize,
    pub tf_tol: f64,
    pub orbit_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: Preset::ChaoticDot,
            lambda: 1.2,
            grid_n: 128,
            extent: None,
            seed: 7,
            orbits_k: 30,
            max_period: 150.0,
            n_min: 4.0,
            n_max: 100.0,
            samples: 400,
            eps: vec![0.1, 0.125, 0.15],
            nev: 24,
            tf_tol: 1e-8,
            orbit_tol: 1e-10,
        }
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "preset" => self.preset = Preset::parse(v)?,
            "lambda" => self.lambda = v.parse()?,
            "grid_n" => self.grid_n = v.parse()?,
            "extent" => self.extent = Some(v.parse()?),
            "seed" => self.seed = v.parse()?,
            "orbits_k" => self.orbits_k = v.parse()?,
            "max_period" => self.max_period = v.parse()?,
            "n_min" => self.n_min = v.parse()?,
            "n_max" => self.n_max = v.parse()?,
            "samples" => self.samples = v.parse()?,
            "nev" => self.nev = v.parse()?,
            "tf_tol" => self.tf_tol = v.parse()?,
            "orbit_tol" => self.orbit_tol = v.parse()?,
            "eps" => {
                self.eps = v
                    .split(',')
                    .map(|s| s.trim().parse::<f64>().context("bad eps entry"))
                    .collect::<Result<_>>()?;
            }
            other => bail!("unknown config key '{other}'"),
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("{}:{}: expected key = value", path.display(), lineno + 1))?;
            self.set(key, value)
                .with_context(|| format!("{}:{}", path.display(), lineno + 1))?;
        }
        Ok(())
    }

    /// Core problem definition for the selected preset.
    pub fn problem(&self) -> Result<ProblemConfig> {
        let mut cfg = match self.preset {
            Preset::ChaoticDot => ProblemConfig::chaotic_dot(self.lambda)?,
            Preset::HarmonicTest => ProblemConfig::harmonic_test(),
        };
        cfg.grid_n = self.grid_n;
        if let Some(l) = self.extent {
            cfg.extent = l;
        }
        cfg.tolerances.tf_w = self.tf_tol;
        cfg.tolerances.orbit_closure = self.orbit_tol;
        Ok(cfg)
    }

    /// Canonical text rendering; key order is fixed.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "preset = {}", self.preset.name());
        let _ = writeln!(s, "lambda = {}", self.lambda);
        let _ = writeln!(s, "grid_n = {}", self.grid_n);
        if let Some(l) = self.extent {
            let _ = writeln!(s, "extent = {l}");
        }
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "orbits_k = {}", self.orbits_k);
        let _ = writeln!(s, "max_period = {}", self.max_period);
        let _ = writeln!(s, "n_min = {}", self.n_min);
        let _ = writeln!(s, "n_max = {}", self.n_max);
        let _ = writeln!(s, "samples = {}", self.samples);
        let _ = writeln!(
            s,
            "eps = {}",
            self.eps
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        let _ = writeln!(s, "nev = {}", self.nev);
        let _ = writeln!(s, "tf_tol = {:e}", self.tf_tol);
        let _ = writeln!(s, "orbit_tol = {:e}", self.orbit_tol);
        s
    }

    pub fn hash(&self) -> u64 {
        fnv1a(self.canonical().as_bytes())
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_hash_is_stable_across_clones() {
        let a = RunConfig::default();
        let b = a.clone();
        assert_eq!(a.hash(), b.hash());
    }

    #[test]
    fn set_overrides_and_changes_hash() {
        let mut a = RunConfig::default();
        let h0 = a.hash();
        a.set("lambda", "0.8").unwrap();
        assert_ne!(a.hash(), h0);
        assert!(a.set("no_such_key", "1").is_err());
    }
}
