//! Checks a set of free coefficients against the calibration targets: a
//! nominal full charge and full discharge that complete in 2.5 h and 3 h
//! (±20 %) under the reference model, and five frozen layers after the
//! first hour of the partial sequence.
//!
//! ```text
//! cargo run --release -p pcm-tes --example calibration -- [h_conv_ext] [ref_length] [sec_length] [k_liquid]
//! ```
//!
//! Omitted arguments keep their configured values.

use pcm_tes::config::default_config;
use pcm_tes::scenario::{build_canonical_scenarios, compare_runs, Scenario};
use pcm_tes::{ModelKind, RunReport};

fn arg(i: usize) -> Option<f64> {
    std::env::args().nth(i).and_then(|s| s.parse().ok())
}

fn extended(scenario: &Scenario, hours: f64) -> Scenario {
    let mut s = scenario.clone();
    s.phases[0].duration = hours * 3600.0;
    s
}

fn first_clock(run: &RunReport, done: impl Fn(f64) -> bool) -> Option<f64> {
    run.records
        .iter()
        .find(|r| done(r.charge_ratio))
        .map(|r| r.clock)
}

fn report(name: &str, clock: Option<f64>, target_hours: f64) {
    match clock {
        Some(t) => {
            let off = 100.0 * (t / (target_hours * 3600.0) - 1.0);
            println!(
                "{name}: {:.2} h ({off:+.1} % of {target_hours} h)",
                t / 3600.0
            );
        }
        None => println!("{name}: not reached"),
    }
}

fn main() -> pcm_tes::Result<()> {
    let mut config = default_config();
    if let Some(v) = arg(1) {
        config.capsule.h_conv_ext = v;
    }
    if let Some(v) = arg(2) {
        config.refrigerant_pipes.length = v;
    }
    if let Some(v) = arg(3) {
        config.secondary_pipes.length = v;
    }
    if let Some(v) = arg(4) {
        config.pcm.k_liquid = v;
    }
    let tank = config.tank()?;
    let s = build_canonical_scenarios(&config.nominal);

    let charge = extended(&s.full_charge, 4.0).run(ModelKind::Reference, 2.0, &tank)?;
    report(
        "full charge to 0.99",
        first_clock(&charge, |c| c >= 0.99),
        2.5,
    );
    let discharge = extended(&s.full_discharge, 5.0).run(ModelKind::Reference, 2.0, &tank)?;
    report(
        "full discharge to 0.01",
        first_clock(&discharge, |c| c <= 0.01),
        3.0,
    );

    let partial = s.partial_sequence.run(ModelKind::Reference, 2.0, &tank)?;
    let h_minus = tank.pcm.h_lat_minus;
    for clock in [3600.0, 5400.0, 7200.0, 9000.0, 10_800.0] {
        let r = partial
            .records
            .iter()
            .find(|r| (r.clock - clock).abs() < 1e-6)
            .unwrap();
        let frozen = r.layer_enthalpies.iter().filter(|h| **h < h_minus).count();
        println!(
            "partial at {:.1} h: {frozen} frozen layers, charge ratio {:.3}",
            clock / 3600.0,
            r.charge_ratio
        );
    }

    for scenario in s.all() {
        let oracle = scenario.run(ModelKind::Reference, 2.0, &tank)?;
        for dt in [60.0, 180.0, 300.0] {
            let c = compare_runs(&oracle, &scenario.run(ModelKind::Accelerated, dt, &tank)?)?;
            println!(
                "{} at {dt} s: max {:.2} %, mean {:.2} %",
                scenario.name, c.max_error, c.mean_error
            );
        }
    }
    Ok(())
}
