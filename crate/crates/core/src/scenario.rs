//! Operating schedules, oracle comparison and wall-clock benchmarking.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::accelerated::run_accelerated;
use crate::circuits::BoundaryInputs;
use crate::error::{Error, Result};
use crate::model::{ModelKind, RunReport, Tank};
use crate::properties::{PcmProperties, RefrigerantProperties};
use crate::reference::run_reference;
use crate::state::{CapsuleState, TankState};

/// Operating mode of one phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Refrigerant flowing, secondary stopped.
    Charge,
    /// Secondary flowing, refrigerant stopped.
    Discharge,
    /// Both circuits stopped.
    StandBy,
}

/// One constant-input segment of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub mode: Mode,
    /// Duration, s.
    pub duration: f64,
    pub inputs: BoundaryInputs,
}

impl Phase {
    /// A phase whose inputs are `nominal` with the flows of the circuits not
    /// used by `mode` stopped.
    pub fn from_nominal(mode: Mode, duration: f64, nominal: &BoundaryInputs) -> Self {
        let mut inputs = *nominal;
        match mode {
            Mode::Charge => inputs.mdot_sec = 0.0,
            Mode::Discharge => inputs.mdot_ref = 0.0,
            Mode::StandBy => inputs = nominal.stopped(),
        }
        Self {
            mode,
            duration,
            inputs,
        }
    }

    pub fn validate(&self, refrigerant: &RefrigerantProperties) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::InvalidInput(format!(
                "phase durations must be positive, got {}",
                self.duration
            )));
        }
        self.inputs.validate(refrigerant)?;
        let (ref_on, sec_on) = (self.inputs.mdot_ref > 0.0, self.inputs.mdot_sec > 0.0);
        let ok = match self.mode {
            Mode::Charge => !sec_on,
            Mode::Discharge => !ref_on,
            Mode::StandBy => !ref_on && !sec_on,
        };
        if !ok {
            return Err(Error::InvalidInput(format!(
                "{:?} phase with refrigerant flow {} and secondary flow {} kg/s",
                self.mode, self.inputs.mdot_ref, self.inputs.mdot_sec
            )));
        }
        Ok(())
    }
}

/// Starting point of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    /// Every layer at the fully-solid latency point, fluid at the latency
    /// temperature.
    FullyCharged,
    /// Every layer at the fully-liquid latency point, fluid at the latency
    /// temperature.
    FullyDischarged,
    Explicit(TankState),
}

impl InitialState {
    pub fn resolve(&self, n_lay: usize, props: &PcmProperties) -> Result<TankState> {
        match self {
            InitialState::FullyCharged => Ok(TankState::new(
                props.t_lat,
                CapsuleState::fully_frozen(n_lay, props),
            )),
            InitialState::FullyDischarged => Ok(TankState::new(
                props.t_lat,
                CapsuleState::fully_melted(n_lay, props),
            )),
            InitialState::Explicit(state) => {
                if state.capsule.n_lay() != n_lay {
                    return Err(Error::InvalidInput(format!(
                        "explicit initial state has {} layers, {n_lay} requested",
                        state.capsule.n_lay()
                    )));
                }
                if !(state.t_int.is_finite() && state.capsule.is_finite()) {
                    return Err(Error::InvalidInput(
                        "explicit initial state is not finite".into(),
                    ));
                }
                Ok(state.clone())
            }
        }
    }
}

/// An ordered list of phases and a starting state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub phases: Vec<Phase>,
    pub initial_state: InitialState,
}

impl Scenario {
    pub fn total_duration(&self) -> f64 {
        self.phases.iter().map(|p| p.duration).sum()
    }

    pub fn validate(&self, refrigerant: &RefrigerantProperties) -> Result<()> {
        self.phases.iter().try_for_each(|p| p.validate(refrigerant))
    }

    pub fn initial_tank_state(&self, tank: &Tank) -> Result<TankState> {
        self.initial_state.resolve(tank.n_lay(), &tank.pcm)
    }

    /// Runs the scenario with `model` at step `dt` from its own initial state.
    pub fn run(&self, model: ModelKind, dt: f64, tank: &Tank) -> Result<RunReport> {
        let initial = self.initial_tank_state(tank)?;
        match model {
            ModelKind::Reference => run_reference(&initial, self, dt, tank),
            ModelKind::Accelerated => run_accelerated(&initial, self, dt, tank),
        }
    }
}

/// Scenario file: a name, a starting state and a list of phases whose inputs
/// default to the nominal ones.
///
/// ```toml
/// name = "evening"
/// initial = "fully-discharged"
///
/// [[phases]]
/// mode = "charge"
/// duration = 3600.0
///
/// [[phases]]
/// mode = "discharge"
/// duration = 1800.0
/// t_sec_in = -18.0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default = "default_initial")]
    pub initial: InitialState,
    pub phases: Vec<PhaseSpec>,
}

fn default_initial() -> InitialState {
    InitialState::FullyDischarged
}

/// One phase of a scenario file; unset inputs take the nominal values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpec {
    pub mode: Mode,
    pub duration: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mdot_ref: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_ref_in: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mdot_sec: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_sec_in: Option<f64>,
}

impl ScenarioFile {
    pub fn into_scenario(self, nominal: &BoundaryInputs) -> Scenario {
        let phases = self
            .phases
            .into_iter()
            .map(|p| {
                let mut base = *nominal;
                base.mdot_ref = p.mdot_ref.unwrap_or(base.mdot_ref);
                base.h_ref_in = p.h_ref_in.unwrap_or(base.h_ref_in);
                base.mdot_sec = p.mdot_sec.unwrap_or(base.mdot_sec);
                base.t_sec_in = p.t_sec_in.unwrap_or(base.t_sec_in);
                let mut phase = Phase::from_nominal(p.mode, p.duration, &base);
                // Flows set explicitly are kept so that validation can
                // reject a phase that contradicts its mode.
                if let Some(m) = p.mdot_ref {
                    phase.inputs.mdot_ref = m;
                }
                if let Some(m) = p.mdot_sec {
                    phase.inputs.mdot_sec = m;
                }
                phase
            })
            .collect();
        Scenario {
            name: self.name,
            phases,
            initial_state: self.initial,
        }
    }
}

impl Scenario {
    /// Parses a scenario file and checks every phase.
    pub fn from_toml_str(
        text: &str,
        nominal: &BoundaryInputs,
        refrigerant: &RefrigerantProperties,
    ) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text)?;
        let scenario = file.into_scenario(nominal);
        scenario.validate(refrigerant)?;
        Ok(scenario)
    }
}

/// The three canonical scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalScenarios {
    pub full_charge: Scenario,
    pub full_discharge: Scenario,
    pub partial_sequence: Scenario,
}

impl CanonicalScenarios {
    pub fn all(&self) -> [&Scenario; 3] {
        [
            &self.full_charge,
            &self.full_discharge,
            &self.partial_sequence,
        ]
    }

    pub fn by_name(&self, name: &str) -> Option<&Scenario> {
        self.all().into_iter().find(|s| s.name == name)
    }
}

pub const FULL_CHARGE: &str = "full-charge";
pub const FULL_DISCHARGE: &str = "full-discharge";
pub const PARTIAL: &str = "partial";

/// 2.5 h charge from fully discharged, 3 h discharge from fully charged, and
/// the 3 h charge / stand-by / discharge / stand-by / charge sequence from
/// fully discharged, all at the nominal inputs.
pub fn build_canonical_scenarios(nominal: &BoundaryInputs) -> CanonicalScenarios {
    let phase = |mode, hours: f64| Phase::from_nominal(mode, hours * 3600.0, nominal);
    CanonicalScenarios {
        full_charge: Scenario {
            name: FULL_CHARGE.into(),
            phases: vec![phase(Mode::Charge, 2.5)],
            initial_state: InitialState::FullyDischarged,
        },
        full_discharge: Scenario {
            name: FULL_DISCHARGE.into(),
            phases: vec![phase(Mode::Discharge, 3.0)],
            initial_state: InitialState::FullyCharged,
        },
        partial_sequence: Scenario {
            name: PARTIAL.into(),
            phases: vec![
                phase(Mode::Charge, 1.0),
                phase(Mode::StandBy, 0.5),
                phase(Mode::Discharge, 0.5),
                phase(Mode::StandBy, 0.5),
                phase(Mode::Charge, 0.5),
            ],
            initial_state: InitialState::FullyDischarged,
        },
    }
}

/// Charge-ratio error of a candidate run against an oracle run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scenario: String,
    pub oracle_model: ModelKind,
    pub oracle_dt: f64,
    pub candidate_model: ModelKind,
    pub candidate_dt: f64,
    /// Instants of the candidate records, s.
    pub instants: Vec<f64>,
    /// Absolute charge-ratio error at each instant, percentage points.
    pub errors: Vec<f64>,
    /// Largest error, %.
    pub max_error: f64,
    /// Mean error, %.
    pub mean_error: f64,
    /// Oracle wall-clock over candidate wall-clock.
    pub speedup: f64,
    pub oracle_steps: usize,
    pub candidate_steps: usize,
}

#[inline]
fn clock_key(clock: f64) -> i64 {
    (clock * 1e3).round() as i64
}

/// Compares the charge ratio at every candidate instant with the oracle
/// record at the same clock.
pub fn compare_runs(oracle: &RunReport, candidate: &RunReport) -> Result<ComparisonReport> {
    if oracle.scenario != candidate.scenario {
        return Err(Error::InvalidComparison(format!(
            "scenario `{}` compared with scenario `{}`",
            oracle.scenario, candidate.scenario
        )));
    }
    if oracle.n_lay != candidate.n_lay {
        return Err(Error::InvalidComparison(format!(
            "{} layers compared with {} layers",
            oracle.n_lay, candidate.n_lay
        )));
    }
    if clock_key(oracle.end_clock()) != clock_key(candidate.end_clock()) {
        return Err(Error::InvalidComparison(format!(
            "runs end at {} s and {} s",
            oracle.end_clock(),
            candidate.end_clock()
        )));
    }
    let by_clock: HashMap<i64, f64> = oracle
        .records
        .iter()
        .map(|r| (clock_key(r.clock), r.charge_ratio))
        .collect();
    let mut instants = Vec::with_capacity(candidate.records.len());
    let mut errors = Vec::with_capacity(candidate.records.len());
    for r in &candidate.records {
        let reference = by_clock.get(&clock_key(r.clock)).ok_or_else(|| {
            Error::InvalidComparison(format!(
                "candidate instant {} s is not on the oracle grid (Δt = {} s)",
                r.clock, oracle.dt
            ))
        })?;
        instants.push(r.clock);
        errors.push(100.0 * (r.charge_ratio - reference).abs());
    }
    let max_error = errors.iter().copied().fold(0.0, f64::max);
    let mean_error = if errors.is_empty() {
        0.0
    } else {
        errors.iter().sum::<f64>() / errors.len() as f64
    };
    Ok(ComparisonReport {
        scenario: candidate.scenario.clone(),
        oracle_model: oracle.model,
        oracle_dt: oracle.dt,
        candidate_model: candidate.model,
        candidate_dt: candidate.dt,
        instants,
        errors,
        max_error,
        mean_error,
        speedup: oracle.wall_clock / candidate.wall_clock.max(f64::MIN_POSITIVE),
        oracle_steps: oracle.records.len(),
        candidate_steps: candidate.records.len(),
    })
}

/// Minimum number of repetitions per benchmark configuration.
pub const MIN_REPETITIONS: usize = 3;

/// One row of a timing table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub scenario: String,
    pub model: ModelKind,
    pub n_lay: usize,
    /// Major step, s.
    pub dt: f64,
    /// Median wall-clock time, s.
    pub median_seconds: f64,
    /// Reference median over this row's median.
    pub speedup: f64,
    pub steps: usize,
    pub sub_intervals: usize,
}

/// Median wall-clock time of `repetitions` runs of one model and step.
pub fn time_run(
    scenario: &Scenario,
    model: ModelKind,
    dt: f64,
    repetitions: usize,
    tank: &Tank,
) -> Result<(f64, RunReport)> {
    if repetitions < MIN_REPETITIONS {
        return Err(Error::InvalidInput(format!(
            "at least {MIN_REPETITIONS} repetitions are required, got {repetitions}"
        )));
    }
    let mut times = Vec::with_capacity(repetitions);
    let mut last = None;
    for _ in 0..repetitions {
        let report = scenario.run(model, dt, tank)?;
        times.push(report.wall_clock);
        last = Some(report);
    }
    times.sort_by(f64::total_cmp);
    let median = if repetitions % 2 == 1 {
        times[repetitions / 2]
    } else {
        0.5 * (times[repetitions / 2 - 1] + times[repetitions / 2])
    };
    Ok((median, last.expect("at least one repetition")))
}

/// Timing table: the reference model at its stability step for the tank's
/// layer count, then the accelerated model at each step of `dt_list`. A step
/// of the list equal to the reference step is timed with the reference model
/// only once, as the first row.
pub fn benchmark(
    scenario: &Scenario,
    dt_list: &[f64],
    repetitions: usize,
    tank: &Tank,
) -> Result<Vec<TimingRow>> {
    let reference_dt = tank.reference_step_bound();
    let (reference_median, reference_run) = time_run(
        scenario,
        ModelKind::Reference,
        reference_dt,
        repetitions,
        tank,
    )?;
    let row = |model, dt, median: f64, run: &RunReport| TimingRow {
        scenario: scenario.name.clone(),
        model,
        n_lay: tank.n_lay(),
        dt,
        median_seconds: median,
        speedup: reference_median / median.max(f64::MIN_POSITIVE),
        steps: run.records.len(),
        sub_intervals: run.sub_interval_count,
    };
    let mut rows = vec![row(
        ModelKind::Reference,
        reference_dt,
        reference_median,
        &reference_run,
    )];
    for &dt in dt_list {
        if (dt - reference_dt).abs() <= 1e-9 * reference_dt {
            continue;
        }
        let (median, run) = time_run(scenario, ModelKind::Accelerated, dt, repetitions, tank)?;
        rows.push(row(ModelKind::Accelerated, dt, median, &run));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nominal() -> BoundaryInputs {
        BoundaryInputs {
            mdot_ref: 0.00918,
            h_ref_in: 255_000.0,
            t_ref_in: -41.08,
            mdot_sec: 0.074,
            t_sec_in: -20.0,
        }
    }

    #[test]
    fn scenario_file_defaults_to_nominal_inputs() {
        let text = r#"
            name = "evening"
            initial = "fully-charged"

            [[phases]]
            mode = "discharge"
            duration = 1800.0
            t_sec_in = -18.0

            [[phases]]
            mode = "stand-by"
            duration = 600.0
        "#;
        let s =
            Scenario::from_toml_str(text, &nominal(), &RefrigerantProperties::default()).unwrap();
        assert_eq!(s.initial_state, InitialState::FullyCharged);
        assert_eq!(s.phases[0].inputs.mdot_ref, 0.0);
        assert_eq!(s.phases[0].inputs.mdot_sec, 0.074);
        assert_eq!(s.phases[0].inputs.t_sec_in, -18.0);
        assert_eq!(s.phases[1].inputs.mdot_sec, 0.0);
        assert_eq!(s.total_duration(), 2400.0);
    }

    #[test]
    fn scenario_file_rejects_contradictory_flows() {
        let text =
            "name = \"bad\"\n[[phases]]\nmode = \"charge\"\nduration = 60.0\nmdot_sec = 0.1\n";
        assert!(
            Scenario::from_toml_str(text, &nominal(), &RefrigerantProperties::default()).is_err()
        );
    }

    #[test]
    fn canonical_durations_and_starts() {
        let c = build_canonical_scenarios(&nominal());
        assert_eq!(c.full_charge.total_duration(), 9000.0);
        assert_eq!(c.full_discharge.total_duration(), 10_800.0);
        assert_eq!(c.partial_sequence.total_duration(), 3.0 * 3600.0);
        assert_eq!(c.full_charge.initial_state, InitialState::FullyDischarged);
        assert_eq!(
            c.partial_sequence.initial_state,
            InitialState::FullyDischarged
        );
        assert_eq!(c.full_discharge.initial_state, InitialState::FullyCharged);
    }

    #[test]
    fn flow_exclusivity() {
        let refrigerant = RefrigerantProperties::default();
        let c = build_canonical_scenarios(&nominal());
        for s in c.all() {
            s.validate(&refrigerant).unwrap();
            for p in &s.phases {
                match p.mode {
                    Mode::Charge => assert_eq!(p.inputs.mdot_sec, 0.0),
                    Mode::Discharge => assert_eq!(p.inputs.mdot_ref, 0.0),
                    Mode::StandBy => {
                        assert_eq!(p.inputs.mdot_ref, 0.0);
                        assert_eq!(p.inputs.mdot_sec, 0.0);
                    }
                }
            }
        }
        let bad = Phase {
            mode: Mode::Charge,
            duration: 10.0,
            inputs: nominal(),
        };
        assert!(bad.validate(&refrigerant).is_err());
        let empty = Phase {
            duration: 0.0,
            ..Phase::from_nominal(Mode::StandBy, 1.0, &nominal())
        };
        assert!(empty.validate(&refrigerant).is_err());
    }
}
