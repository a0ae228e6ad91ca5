//! Scenario files: JSON text mapped onto core configuration types.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use gkdv_core::ansatz::{BubbleConfig, FieldOptions};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

/// Periodic evolution settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PdeSpec {
    pub length: f64,
    pub n: usize,
    /// Rescaled time of the initial ansatz.
    pub s_start: f64,
    /// Step as a fraction of the explicit stability bound.
    pub dt_fraction: f64,
    pub ells: Option<Vec<f64>>,
    pub signs: Option<Vec<f64>>,
}

impl Default for PdeSpec {
    fn default() -> Self {
        Self { length: 64.0, n: 4096, s_start: -50.0, dt_fraction: 0.3, ells: None, signs: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(rename = "K")]
    pub k: usize,
    pub ells: Vec<f64>,
    pub signs: Vec<f64>,
    #[serde(default)]
    pub c0: f64,
    #[serde(default)]
    pub c1: f64,
    #[serde(default)]
    pub lambda0: f64,
    #[serde(default = "default_s_n")]
    pub s_n: f64,
    #[serde(default = "default_s_0")]
    pub s_0: f64,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    #[serde(default = "default_window")]
    pub window_fraction: f64,
    #[serde(default)]
    pub pde: PdeSpec,
    #[serde(default)]
    pub seed: u64,
}

fn default_s_n() -> f64 {
    -1e4
}

fn default_s_0() -> f64 {
    -1e2
}

fn default_grid() -> GridSpec {
    GridSpec { x_min: -30.0, x_max: 30.0, n: 6001 }
}

fn default_window() -> f64 {
    0.1
}

impl Default for ScenarioConfig {
    /// Two bubbles with `ell = (2, 1)` and equal signs.
    fn default() -> Self {
        Self {
            k: 2,
            ells: vec![2.0, 1.0],
            signs: vec![1.0, 1.0],
            c0: 0.0,
            c1: 0.0,
            lambda0: 0.0,
            s_n: default_s_n(),
            s_0: default_s_0(),
            grid: default_grid(),
            window_fraction: default_window(),
            pde: PdeSpec { ells: Some(vec![1.0, 0.7]), signs: Some(vec![1.0, -1.0]), ..PdeSpec::default() },
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CliError::Config(m.into()));
        if self.ells.len() != self.k || self.signs.len() != self.k {
            return bad("K must equal the lengths of ells and signs");
        }
        if !(self.s_n < self.s_0 && self.s_0 < 0.0) {
            return bad("need s_n < s_0 < 0");
        }
        if self.grid.x_min != -self.grid.x_max {
            return bad("profile grid must be symmetric (x_min = -x_max)");
        }
        if !(0.0..0.5).contains(&self.window_fraction) {
            return bad("window_fraction must lie in [0, 0.5)");
        }
        if !self.pde.n.is_power_of_two() || !(self.pde.length > 0.0) || !(self.pde.s_start < 0.0) {
            return bad("pde needs a power-of-two n, positive length and s_start < 0");
        }
        self.bubbles()?;
        self.dynamics_bubbles()?;
        Ok(())
    }

    pub fn bubbles(&self) -> Result<BubbleConfig> {
        BubbleConfig::new(self.ells.clone(), self.signs.clone())
            .map(|c| c.with_constants(self.c0, self.c1, self.lambda0))
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Configuration evolved by the PDE scenario; falls back to [`Self::bubbles`].
    pub fn dynamics_bubbles(&self) -> Result<BubbleConfig> {
        let ells = self.pde.ells.clone().unwrap_or_else(|| self.ells.clone());
        let signs = self.pde.signs.clone().unwrap_or_else(|| self.signs.clone());
        BubbleConfig::new(ells, signs).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn field_options(&self) -> FieldOptions {
        FieldOptions { window_fraction: self.window_fraction, ..FieldOptions::default() }
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn content_hash(&self) -> String {
        Sha256::digest(self.canonical_json().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg: ScenarioConfig = serde_json::from_str(r#"{"K":2,"ells":[2,1],"signs":[1,1]}"#).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.s_n, -1e4);
        assert_eq!(cfg.grid.n, 6001);
        assert_eq!(cfg.pde.n, 4096);
    }

    #[test]
    fn invalid_files_are_rejected() {
        for text in [
            r#"{"K":3,"ells":[2,1],"signs":[1,1]}"#,
            r#"{"K":2,"ells":[1,2],"signs":[1,1]}"#,
            r#"{"K":1,"ells":[1],"signs":[1],"s_n":-10,"s_0":-100}"#,
            r#"{"K":1,"ells":[1],"signs":[1],"grid":{"x_min":-20,"x_max":30,"n":6001}}"#,
        ] {
            let cfg: ScenarioConfig = serde_json::from_str(text).unwrap();
            assert!(cfg.validate().is_err(), "{text}");
        }
        assert!(serde_json::from_str::<ScenarioConfig>(r#"{"K":1,"ells":[1],"signs":[1],"typo":0}"#).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ScenarioConfig::default();
        let mut b = a.clone();
        assert_eq!(a.content_hash(), b.content_hash());
        assert_eq!(a.content_hash().len(), 64);
        b.seed = 7;
        assert_ne!(a.content_hash(), b.content_hash());
    }
}
