//! Shared scenario builders for the acceptance checks in `tests/`.

use faraday_core::evolution::{evolve, StateTrajectory, TimeGrid, Tolerances};
use faraday_core::fit::{fit_oscillation, OscillationFit};
use faraday_core::model::build_liouvillian;
use faraday_core::params::SystemParams;
use faraday_core::state::DensityMatrix;
use faraday_core::Result;

/// Observation window used for every fit: `t ∈ [0, 400]` in units of `1/Γ`,
/// 4000 samples.
pub fn fig2_grid() -> TimeGrid {
    TimeGrid::new(0.0, 400.0, 4000).expect("static grid")
}

/// Start of the fitted window, after the optical transient.
pub const FIT_START: f64 = 30.0;

/// Evolves the equal-population Zeeman mixture with default tolerances.
pub fn run(p: &SystemParams, grid: &TimeGrid) -> Result<StateTrajectory> {
    evolve(
        &DensityMatrix::zeeman_mixture(),
        &build_liouvillian(p),
        grid,
        Tolerances::default(),
    )
}

/// Samples of a real series with `t ≥ t_min`.
pub fn window(times: &[f64], values: &[f64], t_min: f64) -> (Vec<f64>, Vec<f64>) {
    times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= t_min)
        .map(|(t, v)| (*t, *v))
        .unzip()
}

pub fn re_rho21(traj: &StateTrajectory) -> Vec<f64> {
    traj.rho21().iter().map(|z| z.re).collect()
}

/// Damped-cosine fit of `Re ρ21` over `t ≥ FIT_START`.
pub fn fit_re_rho21(traj: &StateTrajectory) -> Result<OscillationFit> {
    let (t, v) = window(&traj.times(), &re_rho21(traj), FIT_START);
    fit_oscillation(&t, &v, None)
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}
