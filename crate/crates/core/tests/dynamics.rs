//! Simulated dynamics against closed forms and independent oracles.

use faraday_core::analytic::{rho21_with_shifts, Shifts};
use faraday_core::evolution::{evolve, StateTrajectory, TimeGrid, Tolerances};
use faraday_core::fit::fit_oscillation;
use faraday_core::linalg::C64;
use faraday_core::model::build_liouvillian;
use faraday_core::observables::observables_from_trajectory;
use faraday_core::params::{MediumParams, SystemParams, GAMMA_UNITS_GAMMA};
use faraday_core::state::DensityMatrix;

fn run(p: &SystemParams, t_end: f64, samples: usize) -> StateTrajectory {
    let grid = TimeGrid::new(0.0, t_end, samples).unwrap();
    evolve(
        &DensityMatrix::zeeman_mixture(),
        &build_liouvillian(p),
        &grid,
        Tolerances::default(),
    )
    .unwrap()
}

fn late_fit(traj: &StateTrajectory) -> faraday_core::fit::OscillationFit {
    let (t, v): (Vec<f64>, Vec<f64>) = traj
        .times()
        .into_iter()
        .zip(traj.rho21())
        .filter(|(t, _)| *t >= 30.0)
        .map(|(t, z)| (t, z.re))
        .unzip();
    fit_oscillation(&t, &v, None).unwrap()
}

/// Splitting of `diag(0, Δ1, Δ2)` restricted to the two ground-state
/// superpositions that do not couple to `|3>`.
fn dark_subspace_splitting(p: &SystemParams) -> f64 {
    let bright = [C64::new(p.omega_c, 0.0), p.omega_1(), p.omega_2()];
    let norm = bright.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let b: Vec<C64> = bright.iter().map(|c| c / norm).collect();
    // Gram–Schmidt of the unit vectors against the bright state
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for k in 0..3 {
        let mut v = vec![C64::new(0.0, 0.0); 3];
        v[k] = C64::new(1.0, 0.0);
        for u in std::iter::once(&b).chain(basis.iter()) {
            let overlap: C64 = u.iter().zip(&v).map(|(a, x)| a.conj() * x).sum();
            for (x, a) in v.iter_mut().zip(u.iter()) {
                *x -= overlap * a;
            }
        }
        let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-8 && basis.len() < 2 {
            basis.push(v.iter().map(|c| c / n).collect());
        }
    }
    let energies = [0.0, p.delta_1, p.delta_2];
    let elem = |a: &[C64], c: &[C64]| -> C64 { (0..3).map(|k| a[k].conj() * energies[k] * c[k]).sum() };
    let h00 = elem(&basis[0], &basis[0]).re;
    let h11 = elem(&basis[1], &basis[1]).re;
    let h01 = elem(&basis[0], &basis[1]);
    ((h00 - h11).powi(2) + 4.0 * h01.norm_sqr()).sqrt()
}

#[test]
fn beat_frequency_follows_dark_subspace_splitting() {
    for (omega_p, delta) in [(0.3, 0.03), (0.3, 0.1), (0.2, 0.05), (0.1, 0.03)] {
        let p = SystemParams::symmetric(GAMMA_UNITS_GAMMA, 1e-4, 1.0, omega_p, delta).unwrap();
        let fit = late_fit(&run(&p, 400.0, 4000));
        let oracle = dark_subspace_splitting(&p);
        assert!(
            (fit.frequency - oracle).abs() / oracle < 2e-3,
            "Ωp={omega_p} δ={delta}: fit {} oracle {oracle}",
            fit.frequency
        );
    }
}

#[test]
fn weak_probe_beats_at_twice_the_zeeman_shift() {
    for delta in [0.01, 0.03, 0.1] {
        let p = SystemParams::symmetric(GAMMA_UNITS_GAMMA, 1e-4, 1.0, 0.05, delta).unwrap();
        let t_end = (3.0 * std::f64::consts::PI / delta).max(400.0);
        let fit = late_fit(&run(&p, t_end, 4000));
        assert!(
            (fit.frequency - 2.0 * delta).abs() / (2.0 * delta) < 0.01,
            "δ={delta}: {}",
            fit.frequency
        );
    }
}

#[test]
fn zero_field_coherence_is_real_and_does_not_oscillate() {
    let traj = run(&SystemParams::fig2(0.0), 400.0, 4000);
    let late: Vec<(f64, C64)> = traj
        .times()
        .into_iter()
        .zip(traj.rho21())
        .filter(|(t, _)| *t > 30.0)
        .collect();
    assert!(late.iter().all(|(_, z)| z.im.abs() < 1e-6));
    let (t, v): (Vec<f64>, Vec<f64>) = late.iter().map(|(t, z)| (*t, z.re)).unzip();
    let fit = fit_oscillation(&t, &v, None).unwrap();
    assert!(!fit.frequency_identified);
    assert!(fit.amplitude < 1e-4, "amplitude {}", fit.amplitude);
}

fn normalized_deviation(omega_p: f64, delta: f64) -> f64 {
    let p = SystemParams::symmetric(GAMMA_UNITS_GAMMA, 1e-4, 1.0, omega_p, delta).unwrap();
    let traj = run(&p, 100.0, 1001);
    let scale = (p.omega_1() * p.omega_2()).norm() / (p.omega_c * p.omega_c);
    traj.times()
        .into_iter()
        .zip(traj.rho21())
        .filter(|(t, _)| *t >= 30.0)
        .map(|(t, z)| (z - rho21_with_shifts(&p, Shifts::from_hamiltonian(&p), t).unwrap()).norm())
        .fold(0.0, f64::max)
        / scale
}

#[test]
fn closed_form_tracks_numerics_in_the_weak_probe_limit() {
    let base = normalized_deviation(0.1, 0.01);
    assert!(base <= 0.05, "deviation {base}");
    let weaker = normalized_deviation(0.05, 0.01);
    let smaller_field = normalized_deviation(0.05, 0.005);
    assert!(weaker < base, "{weaker} !< {base}");
    assert!(smaller_field < weaker, "{smaller_field} !< {weaker}");
}

#[test]
fn tighter_tolerances_converge_monotonically() {
    let p = SystemParams::fig2(0.1);
    let grid = TimeGrid::new(0.0, 100.0, 101).unwrap();
    let m = build_liouvillian(&p);
    let rho0 = DensityMatrix::zeeman_mixture();
    let reference = evolve(
        &rho0,
        &m,
        &grid,
        Tolerances {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
        },
    )
    .unwrap();
    let mut last = f64::INFINITY;
    for k in 0..4 {
        let scale = 0.5f64.powi(2 * k);
        let tol = Tolerances {
            rel_tol: 1e-5 * scale,
            abs_tol: 1e-7 * scale,
        };
        let err = evolve(&rho0, &m, &grid, tol).unwrap().max_deviation(&reference);
        assert!(err < last, "tolerance step {k}: {err} !< {last}");
        last = err;
    }
    assert!(last < 1e-6);
}

#[test]
fn numeric_coefficients_respect_component_symmetry() {
    let p = SystemParams::fig2(0.03);
    let m = MediumParams::new(1e10, 3.0, 2.9e-9).unwrap();
    let obs = observables_from_trajectory(&run(&p, 400.0, 4000), &p, &m).unwrap();
    let late = |v: &[f64]| -> Vec<f64> {
        obs.times
            .iter()
            .zip(v)
            .filter(|(t, _)| **t > 30.0)
            .map(|(_, x)| *x)
            .collect()
    };
    let (a1, a2, b1, b2) = (late(&obs.alpha), late(&obs.alpha2), late(&obs.beta1), late(&obs.beta2));
    let amax = a1.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let bmax = b1.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let da = a1.iter().zip(&a2).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let db = b1.iter().zip(&b2).map(|(x, y)| (x + y).abs()).fold(0.0, f64::max);
    assert!(da <= 0.05 * amax, "α1 vs α2: {da} / {amax}");
    assert!(db <= 0.05 * bmax, "β1 vs −β2: {db} / {bmax}");
}

#[test]
fn populations_stay_in_the_ground_manifold() {
    let traj = run(&SystemParams::fig2(0.03), 200.0, 201);
    for s in &traj.states[10..] {
        assert!(s.population(3) < 0.01);
        assert!((s.population(1) - s.population(2)).abs() < 1e-9);
    }
}
