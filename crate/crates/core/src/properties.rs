//! Material and fluid property records, and the PCM temperature–enthalpy map.
//!
//! Properties are constant records. The PCM enthalpy datum is free; the
//! shipped configuration puts the fully-solid latency point at 0 J/kg.

use serde::{Deserialize, Serialize};

use crate::error::{config_err, ensure_finite, Error, Result};

/// Thermophysical properties of the phase change material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcmProperties {
    /// Specific heat of the solid phase, J/(kg·K).
    pub cp_solid: f64,
    /// Specific heat of the liquid phase, J/(kg·K).
    pub cp_liquid: f64,
    /// Latent heat of fusion, J/kg.
    pub h_fusion: f64,
    /// Phase change temperature, °C.
    pub t_lat: f64,
    /// Thermal conductivity of the solid phase, W/(m·K).
    pub k_solid: f64,
    /// Thermal conductivity of the liquid phase, W/(m·K). May hold an
    /// effective value that lumps internal convection during melting.
    pub k_liquid: f64,
    /// Density of the solid phase, kg/m³.
    pub rho_solid: f64,
    /// Density of the liquid phase, kg/m³.
    pub rho_liquid: f64,
    /// Specific enthalpy at the fully-solid latency point, J/kg.
    pub h_lat_minus: f64,
}

impl Default for PcmProperties {
    /// Vegetable-oil PCM melting at −30 °C.
    fn default() -> Self {
        Self {
            cp_solid: 1390.0,
            cp_liquid: 1990.0,
            h_fusion: 145_000.0,
            t_lat: -30.0,
            k_solid: 0.25,
            k_liquid: 0.15,
            rho_solid: 970.0,
            rho_liquid: 880.0,
            h_lat_minus: 0.0,
        }
    }
}

/// Region of the PCM temperature–enthalpy diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseZone {
    /// Solid below the phase change temperature.
    Subcooled,
    /// Inside the closed latent band; temperature pinned at `t_lat`.
    Latent,
    /// Liquid above the phase change temperature.
    Superheated,
}

impl PcmProperties {
    /// Specific enthalpy at the fully-liquid latency point, J/kg.
    #[inline]
    pub fn h_lat_plus(&self) -> f64 {
        self.h_lat_minus + self.h_fusion
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("cp_solid", self.cp_solid),
            ("cp_liquid", self.cp_liquid),
            ("h_fusion", self.h_fusion),
            ("k_solid", self.k_solid),
            ("k_liquid", self.k_liquid),
            ("rho_solid", self.rho_solid),
            ("rho_liquid", self.rho_liquid),
        ];
        for (key, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(config_err(
                    "pcm",
                    key,
                    format!("must be positive, got {value}"),
                ));
            }
        }
        for (key, value) in [("t_lat", self.t_lat), ("h_lat_minus", self.h_lat_minus)] {
            if !value.is_finite() {
                return Err(config_err("pcm", key, "must be finite"));
            }
        }
        Ok(())
    }

    /// Zone of a finite enthalpy. Both latency points belong to the latent band.
    #[inline]
    pub fn zone(&self, h: f64) -> PhaseZone {
        if h < self.h_lat_minus {
            PhaseZone::Subcooled
        } else if h > self.h_lat_plus() {
            PhaseZone::Superheated
        } else {
            PhaseZone::Latent
        }
    }

    #[inline]
    pub fn is_latent(&self, h: f64) -> bool {
        self.zone(h) == PhaseZone::Latent
    }

    /// Temperature of a finite enthalpy, °C.
    #[inline]
    pub fn temperature(&self, h: f64) -> f64 {
        match self.zone(h) {
            PhaseZone::Latent => self.t_lat,
            PhaseZone::Subcooled => self.t_lat - (self.h_lat_minus - h) / self.cp_solid,
            PhaseZone::Superheated => self.t_lat + (h - self.h_lat_plus()) / self.cp_liquid,
        }
    }

    /// Liquid mass fraction, clamped to [0, 1].
    #[inline]
    pub fn liquid_fraction(&self, h: f64) -> f64 {
        ((h - self.h_lat_minus) / self.h_fusion).clamp(0.0, 1.0)
    }

    /// Density of a layer at enthalpy `h`; latent layers blend linearly by
    /// liquid fraction.
    #[inline]
    pub fn density(&self, h: f64) -> f64 {
        let f = self.liquid_fraction(h);
        self.rho_solid + f * (self.rho_liquid - self.rho_solid)
    }

    /// Conductivity of a layer at enthalpy `h`, blended like [`Self::density`].
    #[inline]
    pub fn conductivity(&self, h: f64) -> f64 {
        let f = self.liquid_fraction(h);
        self.k_solid + f * (self.k_liquid - self.k_solid)
    }
}

/// Temperature of the PCM at specific enthalpy `h`.
pub fn temperature_of_enthalpy(h: f64, props: &PcmProperties) -> Result<f64> {
    ensure_finite("enthalpy", h)?;
    Ok(props.temperature(h))
}

/// Inverse of [`temperature_of_enthalpy`] on a sensible branch.
///
/// The latent branch has no unique inverse and is rejected, as is a
/// temperature on the wrong side of `t_lat` for the requested branch. The
/// phase change temperature itself maps to the corresponding latency point.
pub fn enthalpy_of_temperature(t: f64, zone: PhaseZone, props: &PcmProperties) -> Result<f64> {
    ensure_finite("temperature", t)?;
    match zone {
        PhaseZone::Latent => Err(Error::InvalidInput(
            "latent zone has no unique enthalpy for a temperature".into(),
        )),
        PhaseZone::Subcooled if t > props.t_lat => Err(Error::InvalidInput(format!(
            "{t} °C is above the phase change temperature {} °C for a subcooled state",
            props.t_lat
        ))),
        PhaseZone::Superheated if t < props.t_lat => Err(Error::InvalidInput(format!(
            "{t} °C is below the phase change temperature {} °C for a superheated state",
            props.t_lat
        ))),
        PhaseZone::Subcooled => Ok(props.h_lat_minus - props.cp_solid * (props.t_lat - t)),
        PhaseZone::Superheated => Ok(props.h_lat_plus() + props.cp_liquid * (t - props.t_lat)),
    }
}

/// Zone of specific enthalpy `h`; the latent band is closed on both ends.
pub fn classify(h: f64, props: &PcmProperties) -> Result<PhaseZone> {
    ensure_finite("enthalpy", h)?;
    Ok(props.zone(h))
}

/// Refrigerant saturation data at the (constant) evaporating pressure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefrigerantProperties {
    /// Evaporating pressure, Pa.
    pub pressure: f64,
    /// Saturation temperature at `pressure`, °C.
    pub t_sat: f64,
    /// Saturated-liquid enthalpy, J/kg.
    pub h_sat_liquid: f64,
    /// Saturated-vapour enthalpy, J/kg.
    pub h_sat_vapour: f64,
    /// Enthalpy of vaporization, J/kg.
    pub h_vaporization: f64,
    /// Specific heat of the superheated vapour, J/(kg·K).
    pub cp_vapour: f64,
}

impl Default for RefrigerantProperties {
    /// R404A saturated at 126.5 kPa.
    fn default() -> Self {
        Self {
            pressure: 126_500.0,
            t_sat: -41.08,
            h_sat_liquid: 145_256.15,
            h_sat_vapour: 343_026.15,
            h_vaporization: 197_770.0,
            cp_vapour: 803.2,
        }
    }
}

impl RefrigerantProperties {
    pub fn validate(&self) -> Result<()> {
        for (key, value) in [
            ("pressure", self.pressure),
            ("h_vaporization", self.h_vaporization),
            ("cp_vapour", self.cp_vapour),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(config_err(
                    "refrigerant",
                    key,
                    format!("must be positive, got {value}"),
                ));
            }
        }
        for (key, value) in [
            ("t_sat", self.t_sat),
            ("h_sat_liquid", self.h_sat_liquid),
            ("h_sat_vapour", self.h_sat_vapour),
        ] {
            if !value.is_finite() {
                return Err(config_err("refrigerant", key, "must be finite"));
            }
        }
        let gap = self.h_sat_vapour - self.h_sat_liquid;
        if (gap - self.h_vaporization).abs() > 1e-9 * self.h_vaporization {
            return Err(config_err(
                "refrigerant",
                "h_vaporization",
                format!(
                    "h_sat_vapour - h_sat_liquid = {gap} does not match h_vaporization = {}",
                    self.h_vaporization
                ),
            ));
        }
        Ok(())
    }
}

/// Single-phase liquid (glycol solutions).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiquidProperties {
    /// Specific heat, J/(kg·K).
    pub cp: f64,
    /// Density, kg/m³.
    pub rho: f64,
    /// Thermal conductivity, W/(m·K).
    pub k: f64,
}

impl LiquidProperties {
    pub fn validate(&self, section: &str) -> Result<()> {
        for (key, value) in [("cp", self.cp), ("rho", self.rho), ("k", self.k)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(config_err(
                    section,
                    key,
                    format!("must be positive, got {value}"),
                ));
            }
        }
        Ok(())
    }
}
