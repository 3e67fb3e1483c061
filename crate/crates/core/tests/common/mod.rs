#![allow(dead_code)]

use pcm_tes::circuits::BoundaryInputs;
use pcm_tes::config::default_config;
use pcm_tes::scenario::{
    build_canonical_scenarios, CanonicalScenarios, InitialState, Mode, Phase, Scenario,
};
use pcm_tes::{CapsuleState, Tank, TankState};

pub fn tank() -> Tank {
    default_config().tank().unwrap()
}

pub fn nominal() -> BoundaryInputs {
    default_config().nominal
}

pub fn canonical() -> CanonicalScenarios {
    build_canonical_scenarios(&nominal())
}

pub fn charging() -> BoundaryInputs {
    Phase::from_nominal(Mode::Charge, 1.0, &nominal()).inputs
}

pub fn discharging() -> BoundaryInputs {
    Phase::from_nominal(Mode::Discharge, 1.0, &nominal()).inputs
}

pub fn stopped() -> BoundaryInputs {
    nominal().stopped()
}

/// One-phase scenario starting from an explicit state.
pub fn single_phase(mode: Mode, duration: f64, initial: &TankState) -> Scenario {
    Scenario {
        name: "single".into(),
        phases: vec![Phase::from_nominal(mode, duration, &nominal())],
        initial_state: InitialState::Explicit(initial.clone()),
    }
}

pub fn uniform_state(tank: &Tank, t_int: f64, h: f64) -> TankState {
    TankState::new(t_int, CapsuleState::uniform(tank.n_lay(), h))
}

/// Fully-melted capsule at the latency temperature.
pub fn melted(tank: &Tank) -> TankState {
    TankState::new(
        tank.pcm.t_lat,
        CapsuleState::fully_melted(tank.n_lay(), &tank.pcm),
    )
}
