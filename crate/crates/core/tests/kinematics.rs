//! Scenario trials against the closed-form corridor oracle and the trial contracts.

mod common;

use common::corridor::Corridor;
use hrc_risk::scenario::{
    Geometry, Scenario, ScenarioConfig, ScenarioKind, TrialParams,
};
use hrc_risk::uncertainty::SpatialUncertaintyModel;
use hrc_risk::RandomStream;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn corridor_config(o: &Corridor, jitter: f64) -> ScenarioConfig {
    ScenarioConfig::builder(ScenarioKind::Approach)
        .timestep(o.t)
        .horizon_steps(o.horizon)
        .d_threshold(o.d_th)
        .human_speed(o.v_h)
        .robot_speed(o.v_r)
        .geometry(Geometry::Approach {
            initial_separation: o.s0,
            start_jitter: jitter,
        })
        .build()
        .unwrap()
}

fn random_corridor(rng: &mut ChaCha8Rng) -> Corridor {
    let v_h = rng.gen_range(0.2..2.0);
    Corridor {
        s0: rng.gen_range(0.5..5.0),
        d_th: rng.gen_range(0.1..1.0),
        v_h,
        v_r: v_h + rng.gen_range(0.1..2.0),
        t: [0.01, 0.02, 0.05, 0.1][rng.gen_range(0..4)],
        horizon: rng.gen_range(50..500),
    }
}

#[test]
fn corridor_trials_match_the_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    let mut collisions = 0;
    while checked < 2000 {
        let o = random_corridor(&mut rng);
        let u_s: f64 = rng.gen_range(-0.3..0.3);
        let n: u32 = rng.gen_range(0..10);
        if !o.well_conditioned(u_s) {
            continue;
        }
        let config = corridor_config(&o, 0.0);
        let out = Scenario::new(config).run_trial(&TrialParams::new(n, u_s, 0.0), &mut RandomStream::root(0));
        let expected = o.collides(n, u_s);
        assert_eq!(out.collided, expected, "{o:?} N={n} u_s={u_s}");
        if expected {
            collisions += 1;
            assert_eq!(out.collision_step, Some(o.contact_step()));
            let v = o.impact_speed();
            assert!((out.impact_speed.unwrap() - v).abs() < 1e-9);
            let force = v * (config.contact_stiffness() * config.effective_mass()).sqrt();
            assert!((out.collision_force - force).abs() < 1e-6);
        } else {
            assert!((out.min_true_distance - o.min_distance(n, u_s)).abs() < 1e-9, "{o:?}");
            assert_eq!(out.severity, 0.0);
        }
        checked += 1;
    }
    assert!(collisions > 200 && collisions < 1800, "{collisions}");
}

#[test]
fn exact_cutoff_never_exceeds_the_textbook_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..5000 {
        let o = random_corridor(&mut rng);
        if o.well_conditioned(0.0) {
            assert!(o.cutoff(0.0) <= o.textbook_cutoff(), "{o:?}");
        }
    }
    // A concrete case where the bound is not tight.
    let o = Corridor { s0: 2.07, d_th: 0.55, v_h: 1.0, v_r: 1.0, t: 0.05, horizon: 500 };
    assert!(o.well_conditioned(0.0));
    assert_eq!((o.cutoff(0.0), o.textbook_cutoff()), (5, 6));
}

#[test]
fn saturation_beyond_the_cutoff_with_start_jitter() {
    // Start jitter moves s0, which shifts the exact cutoff but never above ceil(d_th / delta).
    let o = Corridor { s0: 3.0, d_th: 0.5, v_h: 1.0, v_r: 1.5, t: 0.05, horizon: 400 };
    let scenario = Scenario::new(corridor_config(&o, 0.3));
    let n_star = o.textbook_cutoff() as u32;
    for n in n_star..=12 {
        let hits = (0..500)
            .filter(|&t| {
                scenario
                    .run_trial(&TrialParams::new(n, 0.0, 0.0), &mut RandomStream::derive(3, &[t]))
                    .collided
            })
            .count();
        assert_eq!(hits, 500, "N = {n}");
    }
}

#[test]
fn benign_geometry_at_zero_delay_never_collides() {
    let o = Corridor { s0: 3.0, d_th: 0.5, v_h: 1.0, v_r: 1.5, t: 0.05, horizon: 400 };
    assert!(!o.collides(0, 0.0));
    let scenario = Scenario::new(corridor_config(&o, 0.1));
    for t in 0..500 {
        let out = scenario.run_trial(&TrialParams::new(0, 0.0, 0.0), &mut RandomStream::derive(4, &[t]));
        assert!(!out.collided);
        assert_eq!(out.severity, 0.0);
    }
}

#[test]
fn collisions_are_monotone_in_delay() {
    let spatial = SpatialUncertaintyModel::default();
    for kind in [ScenarioKind::Approach, ScenarioKind::SharedReach, ScenarioKind::MobileStop] {
        let scenario = Scenario::new(ScenarioConfig::preset(kind));
        for trial in 0..100u64 {
            let draw = spatial.sample_params(&mut RandomStream::derive(77, &[0, trial]));
            let collided: Vec<bool> = (0..10)
                .map(|n| {
                    let params = TrialParams::new(n, draw.delta_d0, draw.c);
                    scenario
                        .run_trial(&params, &mut RandomStream::derive(77, &[1, trial]))
                        .collided
                })
                .collect();
            if let Some(first) = collided.iter().position(|&c| c) {
                assert!(collided[first..].iter().all(|&c| c), "{kind:?} trial {trial}: {collided:?}");
            }
        }
    }
}

#[test]
fn severity_contract_over_random_trials() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let spatial = SpatialUncertaintyModel::new(0.0, 0.1, 0.0, 0.1).unwrap();
    let kinds = [ScenarioKind::Approach, ScenarioKind::SharedReach, ScenarioKind::MobileStop];
    let mut collided = 0;
    for trial in 0..10_000u64 {
        let config = ScenarioConfig::preset(kinds[rng.gen_range(0..3)]);
        let mut s = RandomStream::derive(5, &[trial]);
        let draw = spatial.sample_params(&mut s);
        let n = rng.gen_range(0..10);
        let out = Scenario::new(config).run_trial(&TrialParams::new(n, draw.delta_d0, draw.c), &mut s);
        assert_eq!(out.severity == 0.0, !out.collided, "{out:?}");
        if out.collided {
            collided += 1;
            let force = out.impact_speed.unwrap()
                * (config.contact_stiffness() * config.effective_mass()).sqrt();
            assert_eq!(out.collision_force, force);
            assert_eq!(out.severity, out.collision_force / config.f_max());
        } else {
            assert_eq!(out.collision_force, 0.0);
        }
        if let (Some(a), Some(b)) = (out.reaction_triggered_step, out.reaction_effective_step) {
            assert_eq!(b - a, n as usize);
        }
    }
    assert!(collided > 1000 && collided < 9000, "{collided}");
}

#[test]
fn zero_deviation_measures_the_true_distance() {
    for kind in [ScenarioKind::Approach, ScenarioKind::SharedReach, ScenarioKind::MobileStop] {
        let scenario = Scenario::new(ScenarioConfig::preset(kind));
        let mut steps = 0;
        scenario.run_from(scenario.initial_state(0.0), &TrialParams::new(3, 0.0, 0.0), |truth, measured| {
            assert_eq!(truth, measured);
            steps += 1;
        });
        assert!(steps > 0);
    }
}

#[test]
fn trials_are_pure_functions_of_their_inputs() {
    for kind in [ScenarioKind::Approach, ScenarioKind::SharedReach, ScenarioKind::MobileStop] {
        let scenario = Scenario::new(ScenarioConfig::preset(kind));
        let params = TrialParams::new(4, 0.02, 0.03);
        let a = scenario.run_trial(&params, &mut RandomStream::derive(9, &[1, 2]));
        let b = scenario.run_trial(&params, &mut RandomStream::derive(9, &[1, 2]));
        assert_eq!(a, b);
    }
}
