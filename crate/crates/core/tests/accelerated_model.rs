mod common;

use approx::assert_relative_eq;
use proptest::prelude::*;

use common::*;
use pcm_tes::accelerated::{
    find_outermost_latent, latent_front_power, predict_transition, step_accelerated,
    step_all_sensible,
};
use pcm_tes::circuits::BoundaryInputs;
use pcm_tes::geometry::{
    clustered_outer_resistance, internode_resistance, layer_radii, surface_resistance,
    CapsuleGeometry,
};
use pcm_tes::scenario::Mode;
use pcm_tes::{CapsuleState, ModelKind, Tank, TankState};

/// Front at layer 5 halfway through freezing, layers 6–10 sub-cooled on a
/// gradient towards the surface.
fn half_frozen(tank: &Tank, t_int: f64) -> TankState {
    let p = &tank.pcm;
    let h = (1..=tank.n_lay())
        .map(|k| match k {
            1..=4 => p.h_lat_plus(),
            5 => p.h_lat_minus + 0.5 * p.h_fusion,
            _ => p.h_lat_minus - p.cp_solid * 0.4 * (k - 5) as f64,
        })
        .collect();
    TankState::new(t_int, CapsuleState::new(h))
}

#[test]
fn scan_finds_the_outermost_latent_layer() {
    let tank = tank();
    let p = &tank.pcm;
    let mid = p.h_lat_minus + 0.5 * p.h_fusion;
    assert_eq!(
        find_outermost_latent(&CapsuleState::uniform(10, mid), p),
        Some(10)
    );
    assert_eq!(
        find_outermost_latent(&half_frozen(&tank, -35.0).capsule, p),
        Some(5)
    );
    let cold = CapsuleState::uniform(10, p.h_lat_minus - 1.0);
    assert_eq!(find_outermost_latent(&cold, p), None);
    // The band is closed: a layer exactly on a latency point is latent.
    assert_eq!(
        find_outermost_latent(&CapsuleState::fully_frozen(10, p), p),
        Some(10)
    );
}

#[test]
fn front_power_matches_the_resistance_chain() {
    let tank = tank();
    let state = half_frozen(&tank, -36.0);
    let p = &tank.pcm;
    let radii = layer_radii(&state.capsule, &tank.capsule, p);
    let (wall, conv) = surface_resistance(&radii, &tank.capsule);
    let cluster = clustered_outer_resistance(5, &radii, &state.capsule, p).unwrap();
    let q = latent_front_power(&state, 5, &tank).unwrap();
    assert_relative_eq!(
        q,
        (state.t_int - p.t_lat) / (cluster + wall + conv),
        max_relative = 1e-12
    );
    assert!(q < 0.0);

    let at_lat = TankState::new(p.t_lat, state.capsule.clone());
    assert_eq!(latent_front_power(&at_lat, 5, &tank).unwrap(), 0.0);
    assert!(latent_front_power(&state, 11, &tank).is_err());
}

#[test]
fn one_watt_through_five_kelvin_per_watt() {
    let base = tank();
    let p = base.pcm;
    let state = TankState::new(
        -25.0,
        CapsuleState::uniform(10, p.h_lat_minus + 0.5 * p.h_fusion),
    );
    let radii = layer_radii(&state.capsule, &base.capsule, &p);
    let (wall, conv) = surface_resistance(&radii, &base.capsule);
    // Rescale the exterior coefficient so the surface path totals 5 K/W.
    let g = base.capsule;
    let h_conv_ext = g.h_conv_ext * conv / (5.0 - wall);
    let capsule = CapsuleGeometry::new(
        10,
        &p,
        g.r_max,
        g.r_min,
        g.shell_thickness,
        g.k_shell,
        h_conv_ext,
    )
    .unwrap();
    let tank = Tank { capsule, ..base };
    assert_relative_eq!(
        latent_front_power(&state, 10, &tank).unwrap(),
        1.0,
        max_relative = 1e-12
    );
}

#[test]
fn transition_prediction_examples() {
    let tank = tank();
    let p = &tank.pcm;
    let g = &tank.capsule;
    let mut capsule = CapsuleState::uniform(10, p.h_lat_plus());
    // 100 J of latent energy left before the fully-solid point.
    capsule.h_layers[4] = p.h_lat_minus + 100.0 / g.m_lay;
    let t = predict_transition(&capsule, 5, -1.0, 300.0, p, g);
    assert!(t.occurs);
    assert_relative_eq!(t.duration, 100.0, max_relative = 1e-9);
    assert_relative_eq!(t.residual, 200.0, max_relative = 1e-9);
    assert_eq!(t.target, Some(p.h_lat_minus));

    // Already at the target: immediate transition.
    capsule.h_layers[4] = p.h_lat_minus;
    let t = predict_transition(&capsule, 5, -1.0, 300.0, p, g);
    assert!(t.occurs);
    assert_eq!((t.duration, t.residual), (0.0, 300.0));

    // Ten times too slow: no transition, the whole remaining time is used.
    capsule.h_layers[4] = p.h_lat_minus + 100.0 / g.m_lay;
    let t = predict_transition(&capsule, 5, -1.0 / 30.0, 300.0, p, g);
    assert!(!t.occurs);
    assert_eq!((t.duration, t.residual), (300.0, 0.0));

    // Positive power melts towards the fully-liquid point.
    let t = predict_transition(&capsule, 5, 1.0, 1e9, p, g);
    assert_eq!(t.target, Some(p.h_lat_plus()));
    assert_relative_eq!(
        t.duration,
        g.m_lay * (p.h_lat_plus() - capsule.h_layers[4]),
        max_relative = 1e-12
    );

    let t = predict_transition(&capsule, 5, 0.0, 300.0, p, g);
    assert!(!t.occurs);
    assert_eq!((t.duration, t.target), (300.0, None));

    // A transition landing exactly on the end of the step counts.
    let t = predict_transition(&capsule, 5, -1.0 / 3.0, 300.0, p, g);
    assert!(t.occurs);
    assert_eq!(t.residual, 0.0);
}

#[test]
fn short_step_is_a_single_front_interval() {
    let tank = tank();
    let state = half_frozen(&tank, -36.0);
    let q = latent_front_power(&state, 5, &tank).unwrap();
    let (next, record) = step_accelerated(&state, &charging(), 10.0, &tank).unwrap();
    assert_eq!(record.sub_intervals.len(), 1);
    let s = record.sub_intervals[0];
    assert_eq!((s.duration, s.active_layer), (10.0, Some(5)));
    assert_eq!(s.q_pcm, q);
    let expected = state.capsule.h_layers[4] + q * 10.0 / tank.capsule.m_lay;
    assert_relative_eq!(next.capsule.h_layers[4], expected, max_relative = 1e-12);
    assert_eq!(next.capsule.h_layers[..4], state.capsule.h_layers[..4]);
    assert_eq!(next.clock, 10.0);
}

#[test]
fn exterior_layers_follow_the_steady_profile() {
    let tank = tank();
    let state = half_frozen(&tank, -36.0);
    let p = &tank.pcm;
    let q = latent_front_power(&state, 5, &tank).unwrap();
    let radii = layer_radii(&state.capsule, &tank.capsule, p);
    let (next, _) = step_accelerated(&state, &charging(), 10.0, &tank).unwrap();
    let t = next.capsule.temperatures(p);
    let mut previous = p.t_lat;
    for j in 6..=10 {
        let r = internode_resistance(j - 1, &radii, &state.capsule, p).unwrap();
        assert_relative_eq!((t[j - 1] - previous) / r, q, max_relative = 1e-9);
        previous = t[j - 1];
    }
}

#[test]
fn completed_front_hands_over_to_the_next_layer() {
    let tank = tank();
    let p = &tank.pcm;
    let mut state = half_frozen(&tank, -36.0);
    state.capsule.h_layers[4] = p.h_lat_minus + 50.0;
    let (next, record) = step_accelerated(&state, &charging(), 300.0, &tank).unwrap();
    let layers: Vec<_> = record
        .sub_intervals
        .iter()
        .map(|s| s.active_layer)
        .collect();
    assert_eq!(layers, vec![Some(5), Some(4)]);
    assert!(next.capsule.h_layers[4] <= p.h_lat_minus);
    assert!(p.is_latent(next.capsule.h_layers[3]));
    let total: f64 = record.sub_intervals.iter().map(|s| s.duration).sum();
    assert_relative_eq!(total, 300.0, max_relative = 1e-12);
}

#[test]
fn lumped_capsule_in_equilibrium_is_unchanged() {
    let tank = tank();
    let p = &tank.pcm;
    let state = uniform_state(&tank, -35.0, p.h_lat_minus - p.cp_solid * 5.0);
    let (next, record) = step_all_sensible(&state, &stopped(), 300.0, &tank).unwrap();
    assert_eq!(next.capsule, state.capsule);
    assert_eq!(next.t_int, state.t_int);
    assert_eq!(record.sub_intervals.len(), 1);
    assert_eq!(record.sub_intervals[0].active_layer, None);
}

#[test]
fn all_sensible_step_rejects_latent_capsules() {
    let tank = tank();
    assert!(step_all_sensible(&melted(&tank), &charging(), 60.0, &tank).is_err());
}

#[test]
fn sub_cooled_capsule_warms_back_into_the_band() {
    let tank = tank();
    let p = &tank.pcm;
    let mut state = uniform_state(&tank, -30.0, p.h_lat_minus - p.cp_solid * 2.0);
    let mut previous = state.capsule.mean_enthalpy();
    for _ in 0..200 {
        let (next, record) = step_accelerated(&state, &discharging(), 300.0, &tank).unwrap();
        state = next;
        let mean = state.capsule.mean_enthalpy();
        assert!(mean > previous);
        previous = mean;
        if record
            .sub_intervals
            .iter()
            .any(|s| s.active_layer.is_some())
        {
            assert!(find_outermost_latent(&state.capsule, p).is_some());
            return;
        }
    }
    panic!("capsule never re-entered the latent band");
}

#[test]
fn re_entry_on_the_step_end_leaves_a_zero_tail() {
    let tank = tank();
    let p = &tank.pcm;
    let state = uniform_state(&tank, -20.0, p.h_lat_minus - p.cp_solid * 2.0);
    let mean = state.capsule.mean_enthalpy();
    let radii = layer_radii(&state.capsule, &tank.capsule, p);
    let (wall, conv) = surface_resistance(&radii, &tank.capsule);
    let cluster = clustered_outer_resistance(1, &radii, &state.capsule, p).unwrap();
    let q = (state.t_int - p.temperature(mean)) / (wall + conv + 0.5 * cluster);
    let dt = (p.h_lat_minus - mean) / (q / tank.capsule.m_capsule);

    let (next, record) = step_all_sensible(&state, &stopped(), dt, &tank).unwrap();
    let trace = &record.sub_intervals;
    assert_eq!(trace.len(), 2, "{trace:?}");
    assert_eq!(trace[0].active_layer, None);
    assert_relative_eq!(trace[0].duration, dt, max_relative = 1e-12);
    assert_eq!(trace[1].active_layer, Some(tank.n_lay()));
    assert_eq!(trace[1].duration, 0.0);
    assert!(next.capsule.h_layers.iter().all(|h| *h == p.h_lat_minus));
}

#[test]
fn coarse_runs_take_fewer_steps_and_land_near_the_oracle() {
    let tank = tank();
    for scenario in canonical().all() {
        let oracle = scenario.run(ModelKind::Reference, 2.0, &tank).unwrap();
        let fast = scenario.run(ModelKind::Accelerated, 300.0, &tank).unwrap();
        assert_eq!(oracle.records.len(), 150 * fast.records.len());
        let gap = (oracle.records.last().unwrap().charge_ratio
            - fast.records.last().unwrap().charge_ratio)
            .abs();
        assert!(
            gap <= 0.03,
            "{}: final charge ratio off by {gap}",
            scenario.name
        );
    }
}

#[test]
fn at_most_one_jump_per_step_in_a_coarse_full_charge() {
    let tank = tank();
    let run = canonical()
        .full_charge
        .run(ModelKind::Accelerated, 300.0, &tank)
        .unwrap();
    assert_eq!(run.records.len(), 30);
    assert!(run.records.iter().all(|r| r.sub_intervals.len() <= 2));
    assert_eq!(
        run.sub_interval_count,
        run.records
            .iter()
            .map(|r| r.sub_intervals.len())
            .sum::<usize>()
    );
}

fn inputs_for(mode: u8) -> BoundaryInputs {
    match mode {
        0 => charging(),
        1 => discharging(),
        _ => stopped(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn step_invariants(
        t_int in -42.0f64..-18.0,
        h in prop::collection::vec(-20_000.0f64..165_000.0, 10),
        mode in 0u8..3,
        dt in 1.0f64..600.0,
    ) {
        let tank = tank();
        let state = TankState::new(t_int, CapsuleState::new(h));
        let (next, record) = step_accelerated(&state, &inputs_for(mode), dt, &tank).unwrap();
        let p = &tank.pcm;

        let total: f64 = record.sub_intervals.iter().map(|s| s.duration).sum();
        prop_assert!((total - dt).abs() <= 1e-9 * dt, "partition {total} vs {dt}");
        prop_assert!(record.sub_intervals.iter().all(|s| s.duration >= 0.0));

        // Layers inside every front of the step keep their enthalpy.
        if record.sub_intervals.iter().all(|s| s.active_layer.is_some()) {
            let innermost = record.sub_intervals.iter().filter_map(|s| s.active_layer).min().unwrap();
            prop_assert_eq!(&next.capsule.h_layers[..innermost - 1], &state.capsule.h_layers[..innermost - 1]);
        }

        // The last front ends inside the closed band.
        if let Some(k) = record.sub_intervals.last().and_then(|s| s.active_layer) {
            let h = next.capsule.h_layers[k - 1];
            prop_assert!(h >= p.h_lat_minus && h <= p.h_lat_plus(), "layer {} at {}", k, h);
        }
    }

    #[test]
    fn charge_runs_partition_exactly(dt in 30.0f64..400.0) {
        let tank = tank();
        let scenario = single_phase(Mode::Charge, 3600.0, &melted(&tank));
        let run = scenario.run(ModelKind::Accelerated, dt, &tank).unwrap();
        let mut previous = 0.0;
        for r in &run.records {
            let total: f64 = r.sub_intervals.iter().map(|s| s.duration).sum();
            let step = r.clock - previous;
            prop_assert!((total - step).abs() <= 1e-9 * step);
            previous = r.clock;
        }
        prop_assert_eq!(run.end_clock(), 3600.0);
    }
}
