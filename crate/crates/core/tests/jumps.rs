use goldenrate_core::integrator::{integrate, IntegratorConfig, SampleGrid};
use goldenrate_core::models::VectorField;
use goldenrate_core::params::{ModelKind, ModelParams};
use goldenrate_core::state::thermal_state;
use goldenrate_core::stochastic::{
    aggregate, build_channels, ensemble_mean, sample_trajectory, trajectory_rng, JumpMicrostate, JumpSimulator,
};

fn blackbody() -> ModelParams {
    ModelParams { gamma_prime: 1e6, n_modes: 100.0, tls_count: 100, ..ModelParams::default() }
}

#[test]
fn blackbody_conserves_over_a_million_events() {
    let p = blackbody();
    let channels = build_channels(ModelKind::BlackBody, &p);
    let s0 = JumpMicrostate { m: 12, photon_totals: [154, 0, 0, 0, 0] };
    let mut sim = JumpSimulator::new(&channels, p, ModelKind::BlackBody, s0, trajectory_rng(5, 0)).unwrap();
    while sim.events() < 1_000_000 {
        sim.next_event(f64::INFINITY).expect("never absorbed");
        assert_eq!(sim.state().excitation(), s0.excitation());
    }
    sim.state().validate(&p).unwrap();
}

#[test]
fn conservative_models_conserve_in_integers() {
    let closed = ModelParams {
        gamma_dec: 1e4,
        gamma_dec_prime: 1e4,
        gamma_0: 1e4,
        gamma_3: 1e4,
        gamma_t1: 1e7,
        gamma_t11: 1e7,
        n_modes: 100.0,
        n_modes_wg: 100.0,
        tls_count: 100,
        ..ModelParams::default()
    };
    let embedded = ModelParams { gamma_4: 1e5, gamma_4_prime: 1e5, gamma_5: 1e5, gamma_6: 1e3, tls_count: 100, ..ModelParams::default() };
    for (kind, p) in [(ModelKind::ClosedChiral, closed), (ModelKind::EmbeddedCavity, embedded)] {
        let s0 = JumpMicrostate::from_state(&thermal_state(&p, kind, 1.0).unwrap(), &p, kind);
        let channels = build_channels(kind, &p);
        let mut sim = JumpSimulator::new(&channels, p, kind, s0, trajectory_rng(9, 3)).unwrap();
        for _ in 0..100_000 {
            sim.next_event(f64::INFINITY).expect("never absorbed");
            assert_eq!(sim.state().excitation(), s0.excitation());
        }
    }
}

#[test]
fn open_chiral_drains_to_the_empty_state() {
    let p = ModelParams {
        gamma_dec: 1e5,
        gamma_0: 1e4,
        gamma_t1: 1e7,
        gamma_t11: 1e7,
        n_modes: 10.0,
        tls_count: 10,
        ..ModelParams::default()
    };
    let s0 = JumpMicrostate::from_state(&thermal_state(&p, ModelKind::OpenChiral, 1.0).unwrap(), &p, ModelKind::OpenChiral);
    let path = goldenrate_core::stochastic::simulate_jump(ModelKind::OpenChiral, &p, s0, 1.0, 11).unwrap();
    assert!(path.absorbed);
    assert_eq!(path.final_state, JumpMicrostate::default());
}

#[test]
fn aggregation_ignores_production_order() {
    let p = blackbody();
    let channels = build_channels(ModelKind::BlackBody, &p);
    let s0 = JumpMicrostate { m: 12, photon_totals: [154, 0, 0, 0, 0] };
    let times = [0.0, 5e-7, 1e-6];
    let forward: Vec<_> =
        (0..64).map(|i| sample_trajectory(ModelKind::BlackBody, &p, &channels, s0, &times, 42, i).unwrap()).collect();
    let mut backward: Vec<_> = (0..64)
        .rev()
        .map(|i| sample_trajectory(ModelKind::BlackBody, &p, &channels, s0, &times, 42, i).unwrap())
        .collect();
    backward.reverse();
    let a = aggregate(ModelKind::BlackBody, &p, &times, &forward).unwrap();
    let b = aggregate(ModelKind::BlackBody, &p, &times, &backward).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, ensemble_mean(ModelKind::BlackBody, &p, s0, &times, 64, 42).unwrap());
    assert_ne!(a, ensemble_mean(ModelKind::BlackBody, &p, s0, &times, 64, 43).unwrap());
}

#[test]
fn ensemble_mean_tracks_the_rate_equations() {
    let p = blackbody();
    let s0 = JumpMicrostate { m: 12, photon_totals: [154, 0, 0, 0, 0] };
    let times: Vec<f64> = (1..=5).map(|i| i as f64 * 4e-7).collect();
    let stats = ensemble_mean(ModelKind::BlackBody, &p, s0, &times, 400, 2024).unwrap();
    let cfg = IntegratorConfig::new(2e-6, SampleGrid::Explicit(times.clone())).with_tolerances(1e-12, 1e-14);
    let ode = integrate(&VectorField::new(ModelKind::BlackBody, p), &s0.to_state(&p, ModelKind::BlackBody), &cfg).unwrap();
    let se = stats.std_err.unwrap();
    for k in 0..times.len() {
        let expected = ode.samples[k + 1].state;
        let z = (stats.mean[k].m - expected.m) / se[k].m;
        assert!(z.abs() < 4.0, "t = {}: z = {z}", times[k]);
    }
}
