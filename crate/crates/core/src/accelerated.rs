//! Accelerated model: only the outermost latent layer (the front) is
//! integrated. Layers inside it are frozen in time, layers outside it are
//! lumped into a steady conduction resistance, and the instant the front
//! finishes its phase change is predicted exactly, so each major step is
//! split into the sub-intervals between such events.
//!
//! When no layer is latent the capsule is lumped at its mean enthalpy and
//! exchanges through the surface plus half the full conduction path.

use crate::circuits::BoundaryInputs;
use crate::error::{Error, Result};
use crate::geometry::{CapsuleGeometry, CapsuleNetwork};
use crate::model::{
    run_scenario, Duties, ModelKind, RunReport, StepAverages, StepRecord, SubInterval, Tank,
};
use crate::properties::{PcmProperties, PhaseZone};
use crate::scenario::Scenario;
use crate::state::{CapsuleState, TankState};

/// Largest 1-based index of a layer inside the closed latent band.
pub fn find_outermost_latent(capsule: &CapsuleState, props: &PcmProperties) -> Option<usize> {
    find_front(capsule, props, capsule.n_lay(), &[])
}

fn find_front(
    capsule: &CapsuleState,
    props: &PcmProperties,
    ceiling: usize,
    exited: &[bool],
) -> Option<usize> {
    (1..=ceiling).rev().find(|&k| {
        !exited.get(k - 1).copied().unwrap_or(false) && props.is_latent(capsule.h_layers[k - 1])
    })
}

/// Heat into one capsule through front `k0`, W: the fluid-to-front
/// temperature difference over the cluster plus surface resistance.
pub fn latent_front_power(state: &TankState, k0: usize, tank: &Tank) -> Result<f64> {
    let n = state.capsule.n_lay();
    if k0 == 0 || k0 > n {
        return Err(Error::LayerIndex {
            index: k0,
            min: 1,
            max: n,
        });
    }
    let net = CapsuleNetwork::build(&state.capsule, &tank.capsule, &tank.pcm);
    Ok(front_power(state.t_int, k0, &net, &tank.pcm))
}

#[inline]
fn front_power(t_int: f64, k0: usize, net: &CapsuleNetwork, props: &PcmProperties) -> f64 {
    (t_int - props.t_lat) / (net.cluster(k0) + net.surface)
}

/// Outcome of the transition prediction for one sub-interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    /// The front reaches its latency point within the remaining time.
    pub occurs: bool,
    /// Duration of the sub-interval, s: the time to the transition, or the
    /// whole remaining time.
    pub duration: f64,
    /// Time left in the major step after this sub-interval, s.
    pub residual: f64,
    /// Enthalpy the front is heading for, J/kg; `None` when `q = 0`.
    pub target: Option<f64>,
}

/// Predicts when front `k0` (1-based) driven by `q` W reaches the latency
/// point in the direction of `q`. A transition landing exactly at the end
/// of the remaining time counts as a transition.
pub fn predict_transition(
    capsule: &CapsuleState,
    k0: usize,
    q: f64,
    remaining: f64,
    props: &PcmProperties,
    geom: &CapsuleGeometry,
) -> Transition {
    let h = capsule.h_layers[k0 - 1];
    let target = if q > 0.0 {
        props.h_lat_plus()
    } else if q < 0.0 {
        props.h_lat_minus
    } else {
        return Transition {
            occurs: false,
            duration: remaining,
            residual: 0.0,
            target: None,
        };
    };
    let to_transition = (geom.m_lay * (target - h) / q).max(0.0);
    if to_transition <= remaining {
        Transition {
            occurs: true,
            duration: to_transition,
            residual: remaining - to_transition,
            target: Some(target),
        }
    } else {
        Transition {
            occurs: false,
            duration: remaining,
            residual: 0.0,
            target: Some(target),
        }
    }
}

/// Side of the latent band a sensible (or boundary) layer sits on.
fn sensible_side(h: f64, t: f64, props: &PcmProperties) -> PhaseZone {
    if h <= props.h_lat_minus {
        PhaseZone::Subcooled
    } else if h >= props.h_lat_plus() {
        PhaseZone::Superheated
    } else if t <= props.t_lat {
        PhaseZone::Subcooled
    } else {
        PhaseZone::Superheated
    }
}

#[inline]
fn enthalpy_on_side(t: f64, side: PhaseZone, props: &PcmProperties) -> f64 {
    match side {
        PhaseZone::Superheated => props.h_lat_plus() + props.cp_liquid * (t - props.t_lat),
        _ => props.h_lat_minus + props.cp_solid * (t - props.t_lat),
    }
}

/// Steady temperatures of the layers outside front `k0` carrying `q` inward.
fn exterior_temperatures(
    k0: usize,
    q: f64,
    net: &CapsuleNetwork,
    props: &PcmProperties,
    out: &mut Vec<f64>,
) {
    out.clear();
    let mut t = props.t_lat;
    for j in k0 + 1..=net.internode.len() + 1 {
        t += q * net.internode[j - 2];
        out.push(t);
    }
}

/// Mutable bookkeeping for one major step.
struct StepWork {
    remaining: f64,
    ceiling: usize,
    exited: Vec<bool>,
    idle: usize,
    trace: Vec<SubInterval>,
    averages: StepAverages,
    last_duties: Option<Duties>,
    scratch: Vec<f64>,
}

impl StepWork {
    fn reset_front_search(&mut self, n: usize) {
        self.ceiling = n;
        self.exited.iter_mut().for_each(|e| *e = false);
    }

    fn idle_iteration(&mut self, n: usize) -> Result<()> {
        self.idle += 1;
        if self.idle > n + 2 {
            return Err(Error::NoProgress(self.idle));
        }
        Ok(())
    }
}

/// Advances the tank by one major step of `dt` seconds.
pub fn step_accelerated(
    state: &TankState,
    inputs: &BoundaryInputs,
    dt: f64,
    tank: &Tank,
) -> Result<(TankState, StepRecord)> {
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "time step must be non-negative, got {dt}"
        )));
    }
    let n = state.capsule.n_lay();
    let mut next = state.clone();
    let mut work = StepWork {
        remaining: dt,
        ceiling: n,
        exited: vec![false; n],
        idle: 0,
        trace: Vec::with_capacity(2),
        averages: StepAverages::default(),
        last_duties: None,
        scratch: Vec::with_capacity(n),
    };
    advance(&mut next, inputs, tank, &mut work)?;
    next.clock = state.clock + dt;
    finish(next, inputs, tank, work)
}

/// One major step for a capsule with no latent layer: the lumped
/// all-sensible fallback. If the lumped capsule reaches the latent band
/// mid-step, the step is split there and the front algorithm takes over for
/// the remainder.
pub fn step_all_sensible(
    state: &TankState,
    inputs: &BoundaryInputs,
    dt: f64,
    tank: &Tank,
) -> Result<(TankState, StepRecord)> {
    if let Some(k) = find_outermost_latent(&state.capsule, &tank.pcm) {
        return Err(Error::InvalidInput(format!(
            "all-sensible step requested but layer {k} is latent"
        )));
    }
    step_accelerated(state, inputs, dt, tank)
}

fn finish(
    next: TankState,
    inputs: &BoundaryInputs,
    tank: &Tank,
    work: StepWork,
) -> Result<(TankState, StepRecord)> {
    if !(next.t_int.is_finite() && next.capsule.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "accelerated step diverged at t = {} s",
            next.clock
        )));
    }
    let fallback = match work.last_duties {
        Some(d) => d,
        None => tank.duties(next.t_int, inputs)?,
    };
    let record = work
        .averages
        .into_record(&next, &tank.pcm, &fallback, work.trace);
    Ok((next, record))
}

fn advance(
    state: &mut TankState,
    inputs: &BoundaryInputs,
    tank: &Tank,
    work: &mut StepWork,
) -> Result<()> {
    let props = &tank.pcm;
    let n = state.capsule.n_lay();
    // After a lumped re-entry that consumes the whole step, one zero-length
    // front slice still runs so that the front is recorded.
    let mut tail_pending = false;
    while work.remaining > 0.0 || tail_pending {
        tail_pending = false;
        let Some(k0) = find_front(&state.capsule, props, work.ceiling, &work.exited) else {
            let reentered = lumped_slice(state, inputs, tank, work)?;
            if !reentered {
                break;
            }
            work.reset_front_search(n);
            tail_pending = work.remaining <= 0.0;
            continue;
        };

        let net = CapsuleNetwork::build(&state.capsule, &tank.capsule, props);
        let q = front_power(state.t_int, k0, &net, props);

        // Outside layers must stay on their side of the band; the outermost
        // one that would cross is pinned to its latency point and becomes
        // the front instead.
        exterior_temperatures(k0, q, &net, props, &mut work.scratch);
        let crossing = (k0 + 1..=n).rev().find(|&j| {
            let h = state.capsule.h_layers[j - 1];
            let t_now = props.temperature(h);
            let t_steady = work.scratch[j - k0 - 1];
            match sensible_side(h, t_now, props) {
                PhaseZone::Subcooled => t_steady > props.t_lat,
                _ => t_steady < props.t_lat,
            }
        });
        if let Some(j) = crossing {
            let h = &mut state.capsule.h_layers[j - 1];
            *h = if *h <= props.h_lat_minus {
                props.h_lat_minus
            } else {
                props.h_lat_plus()
            };
            work.reset_front_search(n);
            work.idle_iteration(n)?;
            continue;
        }

        let transition =
            predict_transition(&state.capsule, k0, q, work.remaining, props, &tank.capsule);
        let duration = transition.duration;
        let duties = tank.duties(state.t_int, inputs)?;

        let h0 = &mut state.capsule.h_layers[k0 - 1];
        *h0 = match (transition.occurs, transition.target) {
            (true, Some(target)) => target,
            _ => *h0 + q * duration / tank.capsule.m_lay,
        };
        for j in k0 + 1..=n {
            let h = state.capsule.h_layers[j - 1];
            let side = sensible_side(h, props.temperature(h), props);
            state.capsule.h_layers[j - 1] = enthalpy_on_side(work.scratch[j - k0 - 1], side, props);
        }
        state.t_int = tank.advance_fluid(state.t_int, &duties, q, duration);

        work.averages.add(&duties, q, duration);
        work.last_duties = Some(duties);
        work.trace.push(SubInterval {
            duration,
            active_layer: Some(k0),
            q_pcm: q,
            t_int_after: state.t_int,
        });
        work.remaining = transition.residual;

        if transition.occurs {
            work.exited[k0 - 1] = true;
            work.ceiling = k0 - 1;
            if duration == 0.0 {
                work.idle_iteration(n)?;
            } else {
                work.idle = 0;
            }
        } else {
            work.idle = 0;
        }
    }
    Ok(())
}

/// Lumped all-sensible slice. Returns `true` when the capsule re-entered the
/// latent band, with every layer placed on the crossed latency point.
fn lumped_slice(
    state: &mut TankState,
    inputs: &BoundaryInputs,
    tank: &Tank,
    work: &mut StepWork,
) -> Result<bool> {
    let props = &tank.pcm;
    let geom = &tank.capsule;
    let n = state.capsule.n_lay();
    let mean = state.capsule.mean_enthalpy();
    let (minus, plus) = (props.h_lat_minus, props.h_lat_plus());
    if mean > minus && mean < plus {
        // Redistributing to the mean lands inside the band; the front
        // algorithm resumes from there.
        state.capsule.h_layers.iter_mut().for_each(|h| *h = mean);
        work.idle_iteration(n)?;
        return Ok(true);
    }
    let lumped = CapsuleState::uniform(n, mean);
    let net = CapsuleNetwork::build(&lumped, geom, props);
    let resistance = net.surface + 0.5 * if n > 1 { net.cluster(1) } else { 0.0 };
    let q = (state.t_int - props.temperature(mean)) / resistance;

    let boundary = if mean <= minus { minus } else { plus };
    let rate = q / geom.m_capsule;
    let towards_band = if mean <= minus {
        rate > 0.0
    } else {
        rate < 0.0
    };
    let to_band = if towards_band {
        ((boundary - mean) / rate).max(0.0)
    } else {
        f64::INFINITY
    };
    let reenters = to_band <= work.remaining;
    let duration = if reenters { to_band } else { work.remaining };
    let h_new = if reenters {
        boundary
    } else {
        mean + rate * duration
    };

    let duties = tank.duties(state.t_int, inputs)?;
    state.capsule.h_layers.iter_mut().for_each(|h| *h = h_new);
    state.t_int = tank.advance_fluid(state.t_int, &duties, q, duration);
    work.averages.add(&duties, q, duration);
    work.last_duties = Some(duties);
    work.trace.push(SubInterval {
        duration,
        active_layer: None,
        q_pcm: q,
        t_int_after: state.t_int,
    });
    work.remaining -= duration;
    if reenters && duration == 0.0 {
        work.idle_iteration(n)?;
    }
    Ok(reenters)
}

/// Runs a scenario with the accelerated model at major step `dt`.
pub fn run_accelerated(
    initial: &TankState,
    scenario: &Scenario,
    dt: f64,
    tank: &Tank,
) -> Result<RunReport> {
    run_scenario(
        ModelKind::Accelerated,
        initial,
        scenario,
        dt,
        tank,
        |s, i, d| step_accelerated(s, i, d, tank),
    )
}
