//! Simulation state shared by both tank models.

use serde::{Deserialize, Serialize};

use crate::properties::PcmProperties;

/// Specific enthalpies of the equal-mass layers of one representative
/// capsule, J/kg. Index 0 is the innermost layer (layer number 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapsuleState {
    pub h_layers: Vec<f64>,
}

impl CapsuleState {
    pub fn new(h_layers: Vec<f64>) -> Self {
        Self { h_layers }
    }

    pub fn uniform(n_lay: usize, h: f64) -> Self {
        Self {
            h_layers: vec![h; n_lay],
        }
    }

    /// Every layer at the fully-liquid latency point.
    pub fn fully_melted(n_lay: usize, props: &PcmProperties) -> Self {
        Self::uniform(n_lay, props.h_lat_plus())
    }

    /// Every layer at the fully-solid latency point.
    pub fn fully_frozen(n_lay: usize, props: &PcmProperties) -> Self {
        Self::uniform(n_lay, props.h_lat_minus)
    }

    pub fn n_lay(&self) -> usize {
        self.h_layers.len()
    }

    pub fn is_finite(&self) -> bool {
        self.h_layers.iter().all(|h| h.is_finite())
    }

    pub fn temperatures(&self, props: &PcmProperties) -> Vec<f64> {
        self.h_layers
            .iter()
            .map(|&h| props.temperature(h))
            .collect()
    }

    pub fn mean_enthalpy(&self) -> f64 {
        self.h_layers.iter().sum::<f64>() / self.h_layers.len() as f64
    }
}

/// Fraction of the latent capacity currently stored as frozen PCM.
///
/// 1 means every layer is at or below the fully-solid latency point, 0 means
/// every layer is at or above the fully-liquid one. Sensible sub- or
/// super-heat does not count.
pub fn charge_ratio(capsule: &CapsuleState, props: &PcmProperties) -> f64 {
    let plus = props.h_lat_plus();
    let frozen: f64 = capsule
        .h_layers
        .iter()
        .map(|&h| (plus - h).clamp(0.0, props.h_fusion))
        .sum();
    frozen / (capsule.n_lay() as f64 * props.h_fusion)
}

/// Full tank state: intermediate-fluid temperature, capsule layers and clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TankState {
    /// Intermediate-fluid temperature, °C.
    pub t_int: f64,
    pub capsule: CapsuleState,
    /// Simulation clock, s.
    pub clock: f64,
}

impl TankState {
    pub fn new(t_int: f64, capsule: CapsuleState) -> Self {
        Self {
            t_int,
            capsule,
            clock: 0.0,
        }
    }

    /// Internal energy of the fluid plus all capsules, J, on the datum
    /// `m·cp·T` for the fluid and `m·h` for the PCM.
    pub fn internal_energy(&self, m_int: f64, cp_int: f64, n_pcm: f64, m_lay: f64) -> f64 {
        m_int * cp_int * self.t_int + n_pcm * m_lay * self.capsule.h_layers.iter().sum::<f64>()
    }
}
