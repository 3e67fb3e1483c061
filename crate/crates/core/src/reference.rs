//! Fixed-step reference model: explicit update of every layer and of the
//! intermediate fluid at each step.

use crate::circuits::BoundaryInputs;
use crate::error::{Error, Result};
use crate::geometry::CapsuleNetwork;
use crate::model::{
    run_scenario, ModelKind, RunReport, StepAverages, StepRecord, SubInterval, Tank,
};
use crate::scenario::Scenario;
use crate::state::TankState;

/// Checks `dt` against the explicit stability bound of the layer update.
pub fn check_reference_step(dt: f64, tank: &Tank) -> Result<()> {
    let bound = tank.reference_step_bound();
    // A small allowance keeps bounds computed in floating point, such as
    // 2·(10/50)² = 0.08, usable as steps.
    if dt > bound * (1.0 + 1e-9) {
        return Err(Error::Stability {
            dt,
            bound,
            layers: tank.n_lay(),
        });
    }
    Ok(())
}

/// Advances the tank by one step of `dt` seconds. All temperatures and
/// duties are taken at the start of the step.
pub fn step_reference(
    state: &TankState,
    inputs: &BoundaryInputs,
    dt: f64,
    tank: &Tank,
) -> Result<(TankState, StepRecord)> {
    check_reference_step(dt, tank)?;
    let props = &tank.pcm;
    let h = &state.capsule.h_layers;
    let n = h.len();
    let net = CapsuleNetwork::build(&state.capsule, &tank.capsule, props);
    let temps: Vec<f64> = h.iter().map(|&h| props.temperature(h)).collect();

    let q_pcm = (state.t_int - temps[n - 1]) / net.surface;
    let scale = dt / tank.capsule.m_lay;
    let mut next = state.clone();
    let mut inflow_from_inside = 0.0;
    for k in 0..n {
        let outward = if k + 1 < n {
            (temps[k] - temps[k + 1]) / net.internode[k]
        } else {
            -q_pcm
        };
        next.capsule.h_layers[k] = h[k] + scale * (inflow_from_inside - outward);
        inflow_from_inside = outward;
    }

    let duties = tank.duties(state.t_int, inputs)?;
    next.t_int = tank.advance_fluid(state.t_int, &duties, q_pcm, dt);
    next.clock = state.clock + dt;
    if !(next.t_int.is_finite() && next.capsule.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "reference step diverged at t = {} s",
            state.clock
        )));
    }

    let mut averages = StepAverages::default();
    averages.add(&duties, q_pcm, dt);
    let trace = vec![SubInterval {
        duration: dt,
        active_layer: None,
        q_pcm,
        t_int_after: next.t_int,
    }];
    let record = averages.into_record(&next, props, &duties, trace);
    Ok((next, record))
}

/// Runs a scenario with the reference model at a fixed step.
pub fn run_reference(
    initial: &TankState,
    scenario: &Scenario,
    dt: f64,
    tank: &Tank,
) -> Result<RunReport> {
    if dt.is_finite() && dt > 0.0 {
        check_reference_step(dt, tank)?;
    }
    run_scenario(
        ModelKind::Reference,
        initial,
        scenario,
        dt,
        tank,
        |s, i, d| step_reference(s, i, d, tank),
    )
}
