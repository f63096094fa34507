//! Optional TOML configuration mirroring the command-line flags.
//!
//! Flags always override config values. No environment variables are read.

use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub weyl: WeylSection,
    #[serde(default)]
    pub lattice: LatticeSection,
    #[serde(default)]
    pub rep: RepSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeylSection {
    pub coeffs: Option<Vec<f64>>,
    pub alpha: Option<Vec<f64>>,
    pub s: Option<Vec<f64>>,
    pub ell: Option<i64>,
    pub n: Option<u64>,
    pub n_min: Option<u32>,
    pub n_max: Option<u32>,
    pub mode: Option<String>,
    pub seed: Option<u64>,
    pub regime: Option<String>,
    pub nu0: Option<f64>,
    pub eps: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub alpha: Option<Vec<f64>>,
    pub rho: Option<Vec<f64>>,
    pub k: Option<usize>,
    pub t: Option<f64>,
    pub t_max: Option<f64>,
    pub t_step: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepSection {
    pub k: Option<usize>,
    pub lambda: Option<Vec<f64>>,
    pub sigma: Option<f64>,
    pub rho: Option<Vec<f64>>,
    pub t_grid: Option<Vec<f64>>,
}

pub fn load(path: &Path) -> Result<Config, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("cannot parse config {}: {e}", path.display()))
}

/// Flag value if present, else the config value, else `None`.
pub fn pick<T: Clone>(flag: Option<T>, config: Option<T>) -> Option<T> {
    flag.or(config)
}
