use std::path::{Path, PathBuf};

use rodshape::forward::uniform_grid;
use rodshape::{InverseOptions, Profile, ProfileSpec, RodParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Frequencies either as an inclusive uniform grid or as an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FrequencyGrid {
    Uniform { start: f64, stop: f64, count: usize },
    List(Vec<f64>),
}

impl FrequencyGrid {
    pub fn omegas(&self) -> Vec<f64> {
        match self {
            FrequencyGrid::Uniform { start, stop, count } => uniform_grid(*start, *stop, *count),
            FrequencyGrid::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Noise {
    pub delta: f64,
    pub seed: u64,
}

impl Default for Noise {
    fn default() -> Self {
        Noise { delta: 0.0, seed: 1 }
    }
}

/// One JSON document drives every command. Relative paths are taken
/// relative to the directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: RodParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<FrequencyGrid>,
    /// Dataset CSV; defaults to `dataset.csv` in the output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    /// Recovered profile CSV read by `compare`; defaults to `profile.csv` in
    /// the output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovered: Option<PathBuf>,
    #[serde(default)]
    pub noise: Noise,
    #[serde(default)]
    pub inversion: InverseOptions,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut config: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut config.dataset, &mut config.recovered].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        config.params.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(config)
    }

    pub fn require_profile(&self) -> Result<Profile, CliError> {
        let spec = self
            .profile
            .clone()
            .ok_or_else(|| CliError::Config("a profile is required for this command".into()))?;
        let profile = Profile::new(spec).map_err(|e| CliError::Config(e.to_string()))?;
        let area = profile.area(0.0);
        if ((area - self.params.f0) / self.params.f0).abs() > 1e-12 {
            return Err(CliError::Config(format!(
                "params.F0 = {} but the profile has F(0) = {area}",
                self.params.f0
            )));
        }
        Ok(profile)
    }

    pub fn require_frequencies(&self) -> Result<Vec<f64>, CliError> {
        let omegas = self
            .frequencies
            .as_ref()
            .ok_or_else(|| CliError::Config("frequencies are required for this command".into()))?
            .omegas();
        if omegas.is_empty() {
            return Err(CliError::Config("frequency grid is empty".into()));
        }
        if let Some(w) = omegas.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(CliError::Config(format!("invalid frequency {w}")));
        }
        Ok(omegas)
    }

    pub fn dataset_path(&self, out: &Path) -> PathBuf {
        self.dataset.clone().unwrap_or_else(|| out.join("dataset.csv"))
    }

    pub fn recovered_path(&self, out: &Path) -> PathBuf {
        self.recovered.clone().unwrap_or_else(|| out.join("profile.csv"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"params": {"E": 3, "r": 4, "p": 2, "F0": 1}}"#).unwrap();
        assert_eq!(c.inversion, InverseOptions::default());
        assert_eq!(c.inversion.alpha, 1e-3);
        assert_eq!(c.inversion.m, 999);
        assert_eq!(c.noise, Noise::default());
        assert!(c.profile.is_none());
    }

    #[test]
    fn full_config() {
        let c: RunConfig = serde_json::from_str(
            r#"{
                "params": {"E": 3, "r": 4, "p": 2, "F0": 1},
                "profile": {"kind": "quartic", "params": {"a": 1, "b": 1}},
                "frequencies": {"start": 1, "stop": 2, "count": 12},
                "noise": {"delta": 1e-6, "seed": 7},
                "inversion": {"N_max": 4, "M": 499, "N_cap": 30, "tau": 0.001}
            }"#,
        )
        .unwrap();
        assert_eq!(c.require_frequencies().unwrap().len(), 12);
        assert_eq!(c.inversion.n_max, Some(4));
        assert_eq!(c.inversion.m, 499);
        assert_eq!(c.inversion.n_cap, 30);
        assert_eq!(c.inversion.x_points, 201);
        assert!(c.require_profile().is_ok());

        let listed: RunConfig =
            serde_json::from_str(r#"{"params": {"E": 3, "r": 4, "p": 2, "F0": 1}, "frequencies": [0, 0.5, 1]}"#).unwrap();
        assert_eq!(listed.require_frequencies().unwrap(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn mismatched_f0_is_a_config_error() {
        let c: RunConfig = serde_json::from_str(
            r#"{"params": {"E": 3, "r": 4, "p": 2, "F0": 2}, "profile": {"kind": "quartic", "params": {"a": 1, "b": 1}}}"#,
        )
        .unwrap();
        assert_eq!(c.require_profile().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"params": {"E": 3, "r": 4, "p": 2, "F0": 1}, "nosie": {}}"#).is_err());
    }
}
