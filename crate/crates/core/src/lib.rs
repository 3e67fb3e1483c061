//! Simulation of a cold thermal-energy-storage tank filled with spherical
//! phase-change-material capsules.
//!
//! Two models share the same physics:
//!
//! * [`reference`] — fixed-step explicit update of every capsule layer, the
//!   accuracy oracle;
//! * [`accelerated`] — integrates only the latent front and predicts the
//!   instant each layer completes its phase change, so it can take major
//!   steps of minutes.
//!
//! ```
//! use pcm_tes::{config::default_config, scenario::build_canonical_scenarios, ModelKind};
//!
//! let config = default_config();
//! let tank = config.tank()?;
//! let scenarios = build_canonical_scenarios(&config.nominal);
//! let run = scenarios.full_charge.run(ModelKind::Accelerated, 300.0, &tank)?;
//! assert_eq!(run.records.len(), 30);
//! # Ok::<(), pcm_tes::Error>(())
//! ```

pub mod accelerated;
pub mod circuits;
pub mod config;
pub mod error;
pub mod geometry;
pub mod model;
pub mod output;
pub mod properties;
pub mod reference;
pub mod scenario;
pub mod state;

pub use error::{Error, Result};
pub use model::{ModelKind, RunReport, StepRecord, SubInterval, SubIntervalTrace, Tank};
pub use state::{charge_ratio, CapsuleState, TankState};

/// The guide's chapters, compiled so their snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/properties.md")]
    mod properties {}
    #[doc = include_str!("../../../book/src/capsule.md")]
    mod capsule {}
    #[doc = include_str!("../../../book/src/circuits.md")]
    mod circuits {}
    #[doc = include_str!("../../../book/src/reference.md")]
    mod reference {}
    #[doc = include_str!("../../../book/src/accelerated.md")]
    mod accelerated {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
