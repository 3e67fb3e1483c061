//! Run configuration: TOML sections for properties, geometry, nominal inputs
//! and model selection.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuits::{BoundaryInputs, PipeGeometry};
use crate::error::{config_err, Result};
use crate::geometry::CapsuleGeometry;
use crate::model::{ModelKind, Tank};
use crate::output::OutputFormat;
use crate::properties::{LiquidProperties, PcmProperties, RefrigerantProperties};

/// Shipped default configuration.
pub const DEFAULT_CONFIG_TOML: &str = include_str!("../../../config/default.toml");

/// Environment variable naming a configuration file to use instead of the
/// shipped default.
pub const CONFIG_ENV: &str = "PCM_TES_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapsuleConfig {
    /// PCM radius when fully liquid, m.
    pub r_max: f64,
    /// PCM radius when fully solid, m.
    pub r_min: f64,
    /// Coating thickness, m.
    pub shell_thickness: f64,
    /// Coating conductivity, W/(m·K).
    pub k_shell: f64,
    /// Exterior natural-convection coefficient, W/(m²·K).
    pub h_conv_ext: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TankConfig {
    /// Intermediate-fluid mass, kg.
    pub m_int: f64,
    /// Number of capsules.
    pub n_pcm: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Major step, s.
    pub dt: f64,
    pub n_lay: usize,
    /// Reference-model stability step at 10 layers, s.
    pub reference_stability_dt: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

/// Complete run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub pcm: PcmProperties,
    pub refrigerant: RefrigerantProperties,
    pub intermediate: LiquidProperties,
    pub secondary: LiquidProperties,
    pub capsule: CapsuleConfig,
    pub refrigerant_pipes: PipeGeometry,
    pub secondary_pipes: PipeGeometry,
    pub tank: TankConfig,
    pub nominal: BoundaryInputs,
    pub model: ModelConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    /// Parses and validates TOML text.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Checks every section; errors name the offending section and key.
    pub fn validate(&self) -> Result<()> {
        self.tank().map(|_| ())
    }

    /// Validated tank description.
    pub fn tank(&self) -> Result<Tank> {
        self.pcm.validate()?;
        self.refrigerant.validate()?;
        self.intermediate.validate("intermediate")?;
        self.secondary.validate("secondary")?;
        self.refrigerant_pipes.validate("refrigerant_pipes")?;
        self.secondary_pipes.validate("secondary_pipes")?;
        if !(self.tank.m_int.is_finite() && self.tank.m_int > 0.0) {
            return Err(config_err("tank", "m_int", "must be positive"));
        }
        if self.tank.n_pcm == 0 {
            return Err(config_err("tank", "n_pcm", "must be at least 1"));
        }
        if !(self.model.dt.is_finite() && self.model.dt > 0.0) {
            return Err(config_err("model", "dt", "must be positive"));
        }
        if !(self.model.reference_stability_dt.is_finite()
            && self.model.reference_stability_dt > 0.0)
        {
            return Err(config_err(
                "model",
                "reference_stability_dt",
                "must be positive",
            ));
        }
        self.nominal
            .validate(&self.refrigerant)
            .map_err(|e| config_err("nominal", "inputs", e.to_string()))?;
        if (self.nominal.t_ref_in - self.refrigerant.t_sat).abs() > 1e-6 {
            return Err(config_err(
                "nominal",
                "t_ref_in",
                format!(
                    "two-phase inlet must be at the saturation temperature {} °C",
                    self.refrigerant.t_sat
                ),
            ));
        }
        if self.nominal.h_ref_in < self.refrigerant.h_sat_liquid {
            return Err(config_err(
                "nominal",
                "h_ref_in",
                "below the saturated-liquid enthalpy",
            ));
        }
        let c = &self.capsule;
        let capsule = CapsuleGeometry::new(
            self.model.n_lay,
            &self.pcm,
            c.r_max,
            c.r_min,
            c.shell_thickness,
            c.k_shell,
            c.h_conv_ext,
        )?;
        Ok(Tank {
            pcm: self.pcm,
            refrigerant: self.refrigerant,
            intermediate: self.intermediate,
            secondary: self.secondary,
            capsule,
            refrigerant_pipes: self.refrigerant_pipes,
            secondary_pipes: self.secondary_pipes,
            m_int: self.tank.m_int,
            n_pcm: self.tank.n_pcm,
            reference_stability_dt: self.model.reference_stability_dt,
        })
    }

    /// SHA-256 of the canonical TOML serialization, hex encoded.
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_toml_string()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}

/// The shipped default configuration.
pub fn default_config() -> RunConfig {
    RunConfig::from_toml_str(DEFAULT_CONFIG_TOML).expect("shipped default configuration is valid")
}

/// Reads and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    RunConfig::from_toml_str(&std::fs::read_to_string(path)?)
}

/// The configuration named by `path`, else by [`CONFIG_ENV`], else the
/// shipped default.
pub fn resolve_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => load_config(p),
        None => match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => load_config(p),
            _ => Ok(default_config()),
        },
    }
}
