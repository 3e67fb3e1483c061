//! Heat exchange between the intermediate fluid and the two pipe bundles.
//!
//! Duties follow the tank sign convention: a positive value is heat removed
//! from the intermediate fluid by one pipe.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};
use crate::properties::{LiquidProperties, RefrigerantProperties};

/// One bundle of identical straight pipes immersed in the intermediate fluid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipeGeometry {
    pub n_pipes: usize,
    /// Length of one pipe, m.
    pub length: f64,
    pub r_inner: f64,
    pub r_outer: f64,
    /// Wall conductivity, W/(m·K).
    pub k_wall: f64,
    /// In-tube convection coefficient, W/(m²·K). For the refrigerant this is
    /// the two-phase (boiling) value.
    pub h_conv_int: f64,
    /// In-tube coefficient for superheated vapour; refrigerant pipes only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_conv_int_vapour: Option<f64>,
    /// Natural-convection coefficient on the pipe exterior, W/(m²·K).
    pub h_conv_ext: f64,
}

impl PipeGeometry {
    pub fn validate(&self, section: &str) -> Result<()> {
        if self.n_pipes == 0 {
            return Err(config_err(section, "n_pipes", "must be at least 1"));
        }
        for (key, value) in [
            ("length", self.length),
            ("r_inner", self.r_inner),
            ("r_outer", self.r_outer),
            ("k_wall", self.k_wall),
            ("h_conv_int", self.h_conv_int),
            ("h_conv_ext", self.h_conv_ext),
            ("h_conv_int_vapour", self.h_conv_int_vapour.unwrap_or(1.0)),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(config_err(
                    section,
                    key,
                    format!("must be positive, got {value}"),
                ));
            }
        }
        if self.r_inner >= self.r_outer {
            return Err(config_err(section, "r_outer", "must exceed r_inner"));
        }
        Ok(())
    }

    /// Series resistance of one metre of pipe, K·m/W, for in-tube coefficient `h_int`.
    pub fn resistance_per_length(&self, h_int: f64) -> f64 {
        1.0 / (h_int * 2.0 * PI * self.r_inner)
            + (self.r_outer / self.r_inner).ln() / (2.0 * PI * self.k_wall)
            + 1.0 / (self.h_conv_ext * 2.0 * PI * self.r_outer)
    }

    fn vapour_coefficient(&self) -> f64 {
        self.h_conv_int_vapour.unwrap_or(self.h_conv_int)
    }
}

/// Boundary inputs of the tank for one step. Mass flows are per pipe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryInputs {
    /// Refrigerant mass flow per pipe, kg/s.
    pub mdot_ref: f64,
    /// Refrigerant inlet enthalpy (two-phase), J/kg.
    pub h_ref_in: f64,
    /// Refrigerant inlet temperature, °C; the saturation temperature.
    pub t_ref_in: f64,
    /// Secondary-fluid mass flow per pipe, kg/s.
    pub mdot_sec: f64,
    /// Secondary-fluid inlet temperature, °C.
    pub t_sec_in: f64,
}

impl BoundaryInputs {
    pub fn validate(&self, refrigerant: &RefrigerantProperties) -> Result<()> {
        for (name, value) in [
            ("mdot_ref", self.mdot_ref),
            ("h_ref_in", self.h_ref_in),
            ("t_ref_in", self.t_ref_in),
            ("mdot_sec", self.mdot_sec),
            ("t_sec_in", self.t_sec_in),
        ] {
            if !value.is_finite() {
                return Err(Error::InvalidInput(format!("{name} must be finite")));
            }
        }
        if self.mdot_ref < 0.0 || self.mdot_sec < 0.0 {
            return Err(Error::InvalidInput(
                "mass flows must be non-negative".into(),
            ));
        }
        if self.h_ref_in > refrigerant.h_sat_vapour {
            return Err(Error::InvalidInput(format!(
                "refrigerant inlet enthalpy {} J/kg is above saturated vapour {} J/kg",
                self.h_ref_in, refrigerant.h_sat_vapour
            )));
        }
        Ok(())
    }

    /// Inputs with both flows stopped.
    pub fn stopped(&self) -> Self {
        Self {
            mdot_ref: 0.0,
            mdot_sec: 0.0,
            ..*self
        }
    }
}

/// Result of one pipe exchange.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CircuitResult {
    /// Heat removed from the intermediate fluid by one pipe, W.
    pub q_per_pipe: f64,
    /// Two-phase share of the duty, W (refrigerant only).
    pub q_two_phase: f64,
    /// Superheated-vapour share of the duty, W (refrigerant only).
    pub q_vapour: f64,
    /// Outlet temperature, °C.
    pub outlet_temperature: f64,
    /// Outlet enthalpy, J/kg (refrigerant only, 0 otherwise).
    pub outlet_enthalpy: f64,
    /// Length of the two-phase zone, m (refrigerant only).
    pub two_phase_length: f64,
    /// Inner-wall temperature, °C (secondary only, diagnostic).
    pub wall_temperature: f64,
    /// Set when a flowing refrigerant was not colder than the fluid and the
    /// duty was clamped to zero.
    pub reverse_gradient: bool,
}

/// Effectiveness of a pipe against an isothermal bath: `1 - exp(-1/(R·cp·ṁ))`.
pub fn vapour_zone_effectiveness(r: f64, cp: f64, mdot: f64) -> Result<f64> {
    if !(r > 0.0 && cp > 0.0 && mdot > 0.0) || r.is_nan() {
        return Err(Error::InvalidInput(format!(
            "effectiveness needs positive R, cp and ṁ, got {r}, {cp}, {mdot}"
        )));
    }
    Ok(effectiveness(r * cp * mdot))
}

#[inline]
fn effectiveness(r_c: f64) -> f64 {
    -(-1.0 / r_c).exp_m1()
}

/// Moving-boundary refrigerant pipe: a two-phase zone at the saturation
/// temperature followed, if the refrigerant fully evaporates, by a
/// superheated-vapour zone handled with the effectiveness-NTU relation.
///
/// Every per-length resistance scales as `1/L`, so the two-phase duty is
/// linear in the zone length and the zone split has a closed form.
pub fn refrigerant_exchange(
    t_int: f64,
    inputs: &BoundaryInputs,
    props: &RefrigerantProperties,
    pipe: &PipeGeometry,
) -> Result<CircuitResult> {
    let mdot = inputs.mdot_ref;
    let t_sat = inputs.t_ref_in;
    if mdot < 0.0 {
        return Err(Error::InvalidInput(
            "refrigerant mass flow is negative".into(),
        ));
    }
    if inputs.h_ref_in > props.h_sat_vapour {
        return Err(Error::InvalidInput(
            "refrigerant must enter the tank as a two-phase fluid".into(),
        ));
    }
    let idle = CircuitResult {
        outlet_temperature: t_sat,
        outlet_enthalpy: inputs.h_ref_in,
        two_phase_length: pipe.length,
        ..CircuitResult::default()
    };
    if mdot == 0.0 {
        return Ok(idle);
    }
    let driving = t_int - t_sat;
    if driving <= 0.0 {
        return Ok(CircuitResult {
            reverse_gradient: true,
            ..idle
        });
    }

    let duty_to_evaporate = mdot * (props.h_sat_vapour - inputs.h_ref_in);
    let rho_two_phase = pipe.resistance_per_length(pipe.h_conv_int);
    let l_two_phase = duty_to_evaporate * rho_two_phase / driving;

    if l_two_phase <= pipe.length {
        let vapour_length = pipe.length - l_two_phase;
        let q_vapour = if vapour_length > 0.0 {
            let r_vapour = pipe.resistance_per_length(pipe.vapour_coefficient()) / vapour_length;
            effectiveness(r_vapour * props.cp_vapour * mdot) * props.cp_vapour * mdot * driving
        } else {
            0.0
        };
        Ok(CircuitResult {
            q_per_pipe: duty_to_evaporate + q_vapour,
            q_two_phase: duty_to_evaporate,
            q_vapour,
            outlet_temperature: t_sat + q_vapour / (props.cp_vapour * mdot),
            outlet_enthalpy: props.h_sat_vapour + q_vapour / mdot,
            two_phase_length: l_two_phase,
            wall_temperature: 0.0,
            reverse_gradient: false,
        })
    } else {
        let q = driving * pipe.length / rho_two_phase;
        Ok(CircuitResult {
            q_per_pipe: q,
            q_two_phase: q,
            q_vapour: 0.0,
            outlet_temperature: t_sat,
            outlet_enthalpy: inputs.h_ref_in + q / mdot,
            two_phase_length: pipe.length,
            wall_temperature: 0.0,
            reverse_gradient: false,
        })
    }
}

/// Secondary-fluid pipe: effectiveness-NTU against the isothermal bath,
/// outlet from the capacity-rate balance, and the inner-wall temperature
/// from the mean in-tube temperature as a diagnostic.
pub fn secondary_exchange(
    t_int: f64,
    inputs: &BoundaryInputs,
    props: &LiquidProperties,
    pipe: &PipeGeometry,
) -> Result<CircuitResult> {
    let mdot = inputs.mdot_sec;
    let t_in = inputs.t_sec_in;
    if mdot < 0.0 {
        return Err(Error::InvalidInput(
            "secondary mass flow is negative".into(),
        ));
    }
    if mdot == 0.0 {
        return Ok(CircuitResult {
            outlet_temperature: t_in,
            wall_temperature: t_int,
            ..CircuitResult::default()
        });
    }
    let capacity = props.cp * mdot;
    let r_total = pipe.resistance_per_length(pipe.h_conv_int) / pipe.length;
    let q = effectiveness(r_total * capacity) * capacity * (t_int - t_in);
    let t_out = t_in + q / capacity;
    let r_inside = (1.0 / (pipe.h_conv_int * 2.0 * PI * pipe.r_inner)
        + (pipe.r_outer / pipe.r_inner).ln() / (2.0 * PI * pipe.k_wall))
        / pipe.length;
    let t_wall = 0.5 * (t_in + t_out) + q * r_inside;
    Ok(CircuitResult {
        q_per_pipe: q,
        outlet_temperature: t_out,
        wall_temperature: t_wall,
        ..CircuitResult::default()
    })
}
