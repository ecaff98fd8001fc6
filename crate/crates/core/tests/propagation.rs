use faraday_core::analytic::{check_regime, damping_rate, rho3i_analytic, Component};
use faraday_core::evolution::{evolve, TimeGrid, Tolerances};
use faraday_core::model::build_liouvillian;
use faraday_core::observables::{
    absorption_dispersion, propagate_z_sliced, propagate_z_sliced_with, rotation_angle_thin, AnalyticSource,
    CoherenceSource, TimeOrigin, TrajectorySource,
};
use faraday_core::params::{MediumParams, SystemParams, GAMMA_UNITS_GAMMA};
use faraday_core::state::DensityMatrix;

const L0_CM: f64 = 1.0 / 29.0;

fn medium(length_in_l0: f64) -> MediumParams {
    MediumParams::new(1e10, length_in_l0 * L0_CM, 2.9e-9).unwrap()
}

#[test]
fn single_slice_is_the_local_dispersion() {
    let p = SystemParams::fig2(0.03);
    let m = medium(0.5);
    let grid = TimeGrid::new(0.0, 200.0, 201).unwrap();
    let obs = propagate_z_sliced(&p, &m, &grid, 1).unwrap();
    assert!(obs.eta < 0.01);
    for (t, phi) in obs.times.iter().zip(&obs.phi) {
        let r32 = rho3i_analytic(&p, *t, Component::Two).unwrap();
        let (_, b2) = absorption_dispersion(r32, p.omega_2(), &p, &m).unwrap();
        assert!((phi - b2 * m.cell_length).abs() <= 1e-12 * phi.abs());
    }
}

#[test]
fn weak_medium_matches_closed_form() {
    // αL = 0.01 and η = 0.1 at δ = 0.03
    let p = SystemParams::fig2(0.03);
    let l_over_l0 = 0.1 * 4.0 / (p.delta * p.dephasing());
    let m = medium(l_over_l0);
    let report = check_regime(&p, Some(&m));
    assert!((report.thin_medium_value.unwrap() - 0.006).abs() < 1e-9);
    let grid = TimeGrid::new(0.0, 400.0, 401).unwrap();
    let obs = propagate_z_sliced(&p, &m, &grid, 64).unwrap();
    assert!((obs.eta - 0.1).abs() < 1e-12);
    for (t, phi) in obs.times.iter().zip(&obs.phi) {
        let closed = rotation_angle_thin(&p, &m, *t).unwrap().phi;
        assert!((phi - closed).abs() <= 0.01 * closed.abs());
    }
}

#[test]
fn entrance_origin_shifts_the_beat_phase_by_eta() {
    let p = SystemParams::symmetric(GAMMA_UNITS_GAMMA, 0.0, 1.0, 0.3, 0.002).unwrap();
    let eta = 2.0;
    let m = medium(eta * 4.0 / (p.delta * p.dephasing()));
    let grid = TimeGrid::new(0.0, 3000.0, 301).unwrap();
    let obs = propagate_z_sliced_with(
        &AnalyticSource::symmetric(&p),
        &p,
        &m,
        &grid,
        512,
        TimeOrigin::CellEntrance,
    )
    .unwrap();
    let gd = damping_rate(&p).unwrap();
    let transit = eta / p.delta;
    let r = p.omega_p.powi(2) / p.omega_c.powi(2);
    for (t, phi) in obs.times.iter().zip(&obs.phi) {
        // damping evaluated at the mid-cell retarded time
        let expected = eta + r * eta.sin() * (2.0 * p.delta * t - eta).cos() * (-gd * (t - 0.5 * transit)).exp();
        assert!((phi - expected).abs() < 1e-4 * eta, "t={t}: {phi} vs {expected}");
    }
}

#[test]
fn decayed_beat_transmits_beer_lambert() {
    // δ = 0.1: αL = δ²Γ²L/(2Ω_c⁴ l0) = 0.13 after the beat has died out
    let p = SystemParams::fig2(0.1);
    let m = medium(0.13 * 2.0 / (p.delta * p.delta));
    let grid = TimeGrid::new(6000.0, 7000.0, 11).unwrap();
    let obs = propagate_z_sliced(&p, &m, &grid, 128).unwrap();
    for power in &obs.power_ratio {
        assert!((power - (-0.13f64).exp()).abs() < 1e-4, "{power}");
    }
}

#[test]
fn transparent_medium_transmits_everything() {
    let p = SystemParams::fig2(0.0);
    let grid = TimeGrid::new(0.0, 100.0, 51).unwrap();
    let obs = propagate_z_sliced(&p, &medium(100.0), &grid, 32).unwrap();
    assert!(obs.power_ratio.iter().all(|x| (x - 1.0).abs() < 1e-10));
    assert!(obs.phi.iter().all(|x| *x == 0.0));
}

#[test]
fn trajectory_source_interpolates_linearly() {
    let p = SystemParams::fig2(0.03);
    let grid = TimeGrid::new(0.0, 20.0, 21).unwrap();
    let traj = evolve(
        &DensityMatrix::zeeman_mixture(),
        &build_liouvillian(&p),
        &grid,
        Tolerances::default(),
    )
    .unwrap();
    let src = TrajectorySource { trajectory: &traj };
    let (a, _) = src.coherences(5.0).unwrap();
    assert_eq!(a, traj.states[5].rho31());
    let (mid, _) = src.coherences(5.5).unwrap();
    let want = (traj.states[5].rho31() + traj.states[6].rho31()) * 0.5;
    assert!((mid - want).norm() < 1e-15);
    assert_eq!(src.coherences(-3.0).unwrap().0, traj.states[0].rho31());
    assert_eq!(src.coherences(99.0).unwrap().1, traj.states[20].rho32());
}
