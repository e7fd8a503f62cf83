//! TOML run configuration. Every key is optional; command-line flags win
//! over the file, the file wins over the built-in defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "M")]
    pub m: Option<u32>,
    pub eta: Option<f64>,
    pub theta: Option<f64>,
    /// Superposition phase(s). Sweeps accept a list, other commands exactly one.
    pub phi: Option<PhiList>,
    pub eta_start: Option<f64>,
    pub eta_stop: Option<f64>,
    pub grid_step: Option<f64>,
    /// Truncation tail tolerance; for `verify`, the tolerance override.
    pub tolerance: Option<f64>,
    pub hard_cap: Option<usize>,
    pub g1: Option<f64>,
    pub g2: Option<f64>,
    pub t: Option<f64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PhiList {
    One(f64),
    Many(Vec<f64>),
}

impl PhiList {
    pub fn into_vec(self) -> Vec<f64> {
        match self {
            PhiList::One(p) => vec![p],
            PhiList::Many(v) => v,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_known_keys() {
        let cfg: RunConfig = toml::from_str("M = 30\nphi = [0.0, 2.5]\ngrid_step = 0.05\nout = \"a.csv\"").unwrap();
        assert_eq!(cfg.m, Some(30));
        assert_eq!(cfg.phi.unwrap().into_vec(), vec![0.0, 2.5]);
        let single: RunConfig = toml::from_str("phi = 1.5").unwrap();
        assert_eq!(single.phi, Some(PhiList::One(1.5)));
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(toml::from_str::<RunConfig>("M = 30\nmystery = 1").is_err());
        assert!(toml::from_str::<RunConfig>("m = 30").is_err());
    }
}
