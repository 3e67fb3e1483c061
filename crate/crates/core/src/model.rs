//! Tank parameters, per-step records and the scenario runner shared by both
//! models.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::circuits::{
    refrigerant_exchange, secondary_exchange, BoundaryInputs, CircuitResult, PipeGeometry,
};
use crate::error::{Error, Result};
use crate::geometry::CapsuleGeometry;
use crate::properties::{LiquidProperties, PcmProperties, RefrigerantProperties};
use crate::scenario::Scenario;
use crate::state::{charge_ratio, TankState};

/// Number of layers at which `reference_stability_dt` applies.
pub const STABILITY_REFERENCE_LAYERS: usize = 10;

/// Which tank model produced a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Fixed-step layer-by-layer model.
    Reference,
    /// Event-predicting variable-step model.
    Accelerated,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Reference => "reference",
            ModelKind::Accelerated => "accelerated",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reference" => Ok(ModelKind::Reference),
            "accelerated" => Ok(ModelKind::Accelerated),
            other => Err(Error::InvalidInput(format!("unknown model `{other}`"))),
        }
    }
}

/// Validated physical description of the tank.
#[derive(Debug, Clone, PartialEq)]
pub struct Tank {
    pub pcm: PcmProperties,
    pub refrigerant: RefrigerantProperties,
    pub intermediate: LiquidProperties,
    pub secondary: LiquidProperties,
    pub capsule: CapsuleGeometry,
    pub refrigerant_pipes: PipeGeometry,
    pub secondary_pipes: PipeGeometry,
    /// Mass of intermediate fluid, kg.
    pub m_int: f64,
    /// Number of PCM capsules.
    pub n_pcm: usize,
    /// Largest reference step at [`STABILITY_REFERENCE_LAYERS`] layers, s.
    pub reference_stability_dt: f64,
}

/// Duties of both circuits at one fluid temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Duties {
    pub refrigerant: CircuitResult,
    pub secondary: CircuitResult,
}

impl Tank {
    pub fn n_lay(&self) -> usize {
        self.capsule.n_lay
    }

    /// Heat capacity of the intermediate fluid, J/K.
    pub fn fluid_capacity(&self) -> f64 {
        self.m_int * self.intermediate.cp
    }

    /// Same tank re-layered with `n_lay` layers.
    pub fn with_layers(&self, n_lay: usize) -> Result<Self> {
        let c = &self.capsule;
        let capsule = CapsuleGeometry::new(
            n_lay,
            &self.pcm,
            c.r_max,
            c.r_min,
            c.shell_thickness,
            c.k_shell,
            c.h_conv_ext,
        )?;
        Ok(Self {
            capsule,
            ..self.clone()
        })
    }

    /// Largest stable reference step for this layer count, s. The explicit
    /// layer update scales with the squared layer thickness.
    pub fn reference_step_bound(&self) -> f64 {
        let ratio = STABILITY_REFERENCE_LAYERS as f64 / self.n_lay() as f64;
        self.reference_stability_dt * ratio * ratio
    }

    pub fn duties(&self, t_int: f64, inputs: &BoundaryInputs) -> Result<Duties> {
        Ok(Duties {
            refrigerant: refrigerant_exchange(
                t_int,
                inputs,
                &self.refrigerant,
                &self.refrigerant_pipes,
            )?,
            secondary: secondary_exchange(t_int, inputs, &self.secondary, &self.secondary_pipes)?,
        })
    }

    /// Fluid temperature after `duration` seconds at constant duties.
    #[inline]
    pub(crate) fn advance_fluid(
        &self,
        t_int: f64,
        duties: &Duties,
        q_pcm: f64,
        duration: f64,
    ) -> f64 {
        let load = self.refrigerant_pipes.n_pipes as f64 * duties.refrigerant.q_per_pipe
            + self.secondary_pipes.n_pipes as f64 * duties.secondary.q_per_pipe
            + self.n_pcm as f64 * q_pcm;
        t_int - duration / self.fluid_capacity() * load
    }

    /// Fluid plus PCM internal energy of a state, J.
    pub fn internal_energy(&self, state: &TankState) -> f64 {
        state.internal_energy(
            self.m_int,
            self.intermediate.cp,
            self.n_pcm as f64,
            self.capsule.m_lay,
        )
    }
}

/// One slice of a major step during which the capsule exchanges heat at a
/// constant rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubInterval {
    /// Duration, s.
    pub duration: f64,
    /// Latent front layer (1-based); `None` for the fixed-step model and the
    /// lumped all-sensible fallback.
    pub active_layer: Option<usize>,
    /// Heat into one capsule, W.
    pub q_pcm: f64,
    /// Fluid temperature at the end of the slice, °C.
    pub t_int_after: f64,
}

/// Ordered partition of one major step.
pub type SubIntervalTrace = Vec<SubInterval>;

/// Outputs of one major step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Clock at the end of the step, s.
    pub clock: f64,
    /// Fluid temperature at the end of the step, °C.
    pub t_int: f64,
    /// Time-averaged heat removed by one refrigerant pipe, W.
    pub q_ref_per_pipe: f64,
    /// Time-averaged heat removed by one secondary pipe, W.
    pub q_sec_per_pipe: f64,
    /// Time-averaged heat into one capsule, W.
    pub q_pcm_per_capsule: f64,
    pub charge_ratio: f64,
    /// Secondary outlet temperature, °C.
    pub t_sec_out: f64,
    /// Secondary inner-wall temperature, °C (diagnostic).
    pub t_sec_wall: f64,
    /// Refrigerant outlet enthalpy, J/kg.
    pub h_ref_out: f64,
    /// Refrigerant outlet temperature, °C.
    pub t_ref_out: f64,
    /// A flowing refrigerant was not colder than the fluid during the step.
    pub reverse_gradient: bool,
    /// Layer enthalpies at the end of the step, innermost first, J/kg.
    pub layer_enthalpies: Vec<f64>,
    pub sub_intervals: SubIntervalTrace,
}

/// Time-weighted accumulator for the circuit outputs of a step.
#[derive(Debug, Default)]
pub(crate) struct StepAverages {
    time: f64,
    q_ref: f64,
    q_sec: f64,
    q_pcm: f64,
    t_sec_out: f64,
    t_sec_wall: f64,
    h_ref_out: f64,
    t_ref_out: f64,
    reverse_gradient: bool,
}

impl StepRecord {
    /// Layer temperatures, innermost first, °C.
    pub fn layer_temperatures(&self, props: &PcmProperties) -> Vec<f64> {
        self.layer_enthalpies
            .iter()
            .map(|&h| props.temperature(h))
            .collect()
    }
}

impl StepAverages {
    pub fn add(&mut self, duties: &Duties, q_pcm: f64, duration: f64) {
        self.time += duration;
        self.q_ref += duties.refrigerant.q_per_pipe * duration;
        self.q_sec += duties.secondary.q_per_pipe * duration;
        self.q_pcm += q_pcm * duration;
        self.t_sec_out += duties.secondary.outlet_temperature * duration;
        self.t_sec_wall += duties.secondary.wall_temperature * duration;
        self.h_ref_out += duties.refrigerant.outlet_enthalpy * duration;
        self.t_ref_out += duties.refrigerant.outlet_temperature * duration;
        self.reverse_gradient |= duties.refrigerant.reverse_gradient;
    }

    pub fn into_record(
        self,
        state: &TankState,
        props: &PcmProperties,
        fallback: &Duties,
        sub_intervals: SubIntervalTrace,
    ) -> StepRecord {
        let (q_ref, q_sec, q_pcm, t_sec_out, t_sec_wall, h_ref_out, t_ref_out) = if self.time > 0.0
        {
            let w = 1.0 / self.time;
            (
                self.q_ref * w,
                self.q_sec * w,
                self.q_pcm * w,
                self.t_sec_out * w,
                self.t_sec_wall * w,
                self.h_ref_out * w,
                self.t_ref_out * w,
            )
        } else {
            let d = fallback;
            (
                d.refrigerant.q_per_pipe,
                d.secondary.q_per_pipe,
                0.0,
                d.secondary.outlet_temperature,
                d.secondary.wall_temperature,
                d.refrigerant.outlet_enthalpy,
                d.refrigerant.outlet_temperature,
            )
        };
        StepRecord {
            clock: state.clock,
            t_int: state.t_int,
            q_ref_per_pipe: q_ref,
            q_sec_per_pipe: q_sec,
            q_pcm_per_capsule: q_pcm,
            charge_ratio: charge_ratio(&state.capsule, props),
            t_sec_out,
            t_sec_wall,
            h_ref_out,
            t_ref_out,
            reverse_gradient: self.reverse_gradient,
            layer_enthalpies: state.capsule.h_layers.clone(),
            sub_intervals,
        }
    }
}

/// Whole-run output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub model: ModelKind,
    pub scenario: String,
    /// Major step, s.
    pub dt: f64,
    pub n_lay: usize,
    pub initial_state: TankState,
    pub records: Vec<StepRecord>,
    pub final_state: TankState,
    /// Wall-clock time of the integration loop, s.
    pub wall_clock: f64,
    /// Total number of sub-intervals over all steps.
    pub sub_interval_count: usize,
    /// Steps in which a flowing refrigerant was not colder than the fluid.
    pub reverse_gradient_steps: usize,
}

impl RunReport {
    /// Clock of the last record (or of the initial state), s.
    pub fn end_clock(&self) -> f64 {
        self.final_state.clock
    }

    /// Charge ratio after the initial state and every step, paired with clocks.
    pub fn charge_ratio_series(&self, props: &PcmProperties) -> Vec<(f64, f64)> {
        std::iter::once((
            self.initial_state.clock,
            charge_ratio(&self.initial_state.capsule, props),
        ))
        .chain(self.records.iter().map(|r| (r.clock, r.charge_ratio)))
        .collect()
    }
}

/// Drives a step function over every phase of a scenario.
pub(crate) fn run_scenario<F>(
    model: ModelKind,
    initial: &TankState,
    scenario: &Scenario,
    dt: f64,
    tank: &Tank,
    mut step: F,
) -> Result<RunReport>
where
    F: FnMut(&TankState, &BoundaryInputs, f64) -> Result<(TankState, StepRecord)>,
{
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidInput(format!(
            "time step must be positive, got {dt}"
        )));
    }
    if initial.capsule.n_lay() != tank.n_lay() {
        return Err(Error::InvalidInput(format!(
            "initial state has {} layers, tank has {}",
            initial.capsule.n_lay(),
            tank.n_lay()
        )));
    }
    scenario.validate(&tank.refrigerant)?;

    let expected_steps: usize = scenario
        .phases
        .iter()
        .map(|p| phase_steps(p.duration, dt))
        .sum();
    let mut records = Vec::with_capacity(expected_steps);
    let mut state = initial.clone();
    let mut sub_interval_count = 0;
    let mut reverse_gradient_steps = 0;

    let started = Instant::now();
    let mut phase_start = initial.clock;
    for phase in &scenario.phases {
        let steps = phase_steps(phase.duration, dt);
        for i in 0..steps {
            let begin = phase_start + (i as f64 * dt).min(phase.duration);
            let end = phase_start + ((i + 1) as f64 * dt).min(phase.duration);
            state.clock = begin;
            let (mut next, mut record) = step(&state, &phase.inputs, end - begin)?;
            next.clock = end;
            record.clock = end;
            sub_interval_count += record.sub_intervals.len();
            if record.reverse_gradient {
                reverse_gradient_steps += 1;
            }
            records.push(record);
            state = next;
        }
        phase_start += phase.duration;
    }
    let wall_clock = started.elapsed().as_secs_f64();

    Ok(RunReport {
        model,
        scenario: scenario.name.clone(),
        dt,
        n_lay: tank.n_lay(),
        initial_state: initial.clone(),
        records,
        final_state: state,
        wall_clock,
        sub_interval_count,
        reverse_gradient_steps,
    })
}

/// Number of steps covering `duration`; the last may be shorter than `dt`.
pub(crate) fn phase_steps(duration: f64, dt: f64) -> usize {
    let exact = duration / dt;
    let rounded = exact.round();
    if (exact - rounded).abs() <= 1e-9 * rounded.max(1.0) {
        rounded as usize
    } else {
        exact.ceil() as usize
    }
}
