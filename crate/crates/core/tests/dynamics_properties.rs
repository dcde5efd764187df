use josephson_cavity::{
    classify_mode, estimate_period, find_stationary_points, integrate, integrate_span,
    photon_series, separatrix_levels, IntegratorConfig, Method, ModeLabel, PhaseState,
    ReducedParams,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn coupled() -> ReducedParams {
    ReducedParams::new(3.0, 0.02, -0.65, 0.07).unwrap()
}

#[test]
fn stationary_points_stay_put() {
    let p = coupled();
    for s in find_stationary_points(&p, 20_000).unwrap() {
        let traj = integrate(&s.state(), &p, 10.0, &IntegratorConfig::default()).unwrap();
        let dz = traj.z().iter().map(|z| (z - s.z).abs()).fold(0.0, f64::max);
        let dphi = traj
            .phi()
            .iter()
            .map(|q| (q - traj.phi()[0]).abs())
            .fold(0.0, f64::max);
        assert!(dz < 1e-8 && dphi < 1e-8, "{s:?}: ({dz:e}, {dphi:e})");
    }
}

#[test]
fn energy_drift_small_for_random_initial_conditions() {
    let p = coupled();
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..20 {
        let s0 = PhaseState::new(
            rng.random_range(-0.95..0.95),
            rng.random_range(0.0..std::f64::consts::TAU),
        )
        .unwrap();
        let traj = integrate(&s0, &p, 100.0, &IntegratorConfig::default()).unwrap();
        assert!(
            traj.energy_drift() < 1e-8,
            "{s0:?}: {:e}",
            traj.energy_drift()
        );
    }
}

#[test]
fn tighter_tolerances_do_not_increase_drift() {
    let p = coupled();
    let s0 = PhaseState::new(-0.8, 0.0).unwrap();
    let mut previous = f64::INFINITY;
    for k in 0..4 {
        let scale = 0.5f64.powi(k);
        let config = IntegratorConfig {
            rtol: 1e-8 * scale,
            atol: 1e-10 * scale,
            max_step: 1.0,
            ..IntegratorConfig::default()
        };
        let drift = integrate(&s0, &p, 50.0, &config).unwrap().energy_drift();
        assert!(
            drift <= 2.0 * previous,
            "rtol {}: {drift:e} after {previous:e}",
            config.rtol
        );
        previous = drift;
    }
}

#[test]
fn fixed_step_and_adaptive_agree() {
    let p = coupled();
    let s0 = PhaseState::new(-0.75, 0.0).unwrap();
    let adaptive = integrate(&s0, &p, 10.0, &IntegratorConfig::default()).unwrap();
    let fixed = IntegratorConfig {
        method: Method::Rk4,
        max_step: 1e-3,
        ..IntegratorConfig::default()
    };
    let rk4 = integrate(&s0, &p, 10.0, &fixed).unwrap();
    assert_eq!(adaptive.len(), rk4.len());
    for k in 0..adaptive.len() {
        assert!((adaptive.z()[k] - rk4.z()[k]).abs() < 1e-8);
        assert!((adaptive.phi()[k] - rk4.phi()[k]).abs() < 1e-8);
    }
}

#[test]
fn backward_span_retraces_forward_orbit() {
    let p = coupled();
    let config = IntegratorConfig::default();
    let forward = integrate_span(-0.8, 0.0, &p, 0.0, 5.0, &config).unwrap();
    let n = forward.len() - 1;
    let back = integrate_span(forward.z()[n], forward.phi()[n], &p, 5.0, 0.0, &config).unwrap();
    for k in 0..=n {
        assert!(
            (forward.z()[k] - back.z()[n - k]).abs() < 1e-8,
            "sample {k}"
        );
    }
}

#[test]
fn photon_series_peaks_on_resonance_crossings() {
    let p = coupled();
    let traj = integrate(
        &PhaseState::new(-0.8, 0.0).unwrap(),
        &p,
        20.0,
        &IntegratorConfig::default(),
    )
    .unwrap();
    let series = photon_series(&traj, &p);
    assert_eq!(series, traj.photons());
    let peak = series.iter().copied().fold(0.0, f64::max);
    let bound = p.tilt() / (p.c() * p.c());
    assert!(peak <= bound * (1.0 + 1e-15));
    assert!(peak > 0.99 * bound, "{peak} vs {bound}");
}

#[test]
fn bare_junction_orbit_families() {
    let p = ReducedParams::uncoupled(3.0).unwrap();
    let levels = separatrix_levels(&find_stationary_points(&p, 20_000).unwrap());
    let label = |z0: f64, phi0: f64| {
        let traj = integrate(
            &PhaseState::new(z0, phi0).unwrap(),
            &p,
            40.0,
            &IntegratorConfig::default(),
        )
        .unwrap();
        classify_mode(&traj, &p, &levels).unwrap()
    };
    assert_eq!(label(0.3, 0.0), ModeLabel::ZeroPhaseOscillation);
    assert_eq!(label(0.99, 0.0), ModeLabel::RunningPhase);
    assert_eq!(label(-0.99, 0.0), ModeLabel::RunningPhase);
}

#[test]
fn coupled_reference_orbit_is_trapped_about_new_minimum() {
    let p = coupled();
    let levels = separatrix_levels(&find_stationary_points(&p, 20_000).unwrap());
    let traj = integrate(
        &PhaseState::new(-0.75, 0.0).unwrap(),
        &p,
        40.0,
        &IntegratorConfig::default(),
    )
    .unwrap();
    assert_eq!(
        classify_mode(&traj, &p, &levels).unwrap(),
        ModeLabel::SelfTrappedZeroPhase
    );
    let period = estimate_period(&traj).unwrap();
    assert!(period.spread < 1e-3);
}
