//! Probe absorption, dispersion, transmitted power and polarization
//! rotation.
//!
//! The two circular components pick up phases with `dΦi/dz = βi` and
//! intensities decay with `dΩi²/dz = −αi Ωi²`. The rotation angle of the
//! linear polarization is `Φ = (Φ2 − Φ1)/2`; in the symmetric configuration
//! `β1 = −β2`, so `dΦ1/dz = −β2` and `dΦ2/dz = +β2`.

use alloc::vec::Vec;

#[allow(unused_imports)] // needed without std
use num_traits::Float;

use crate::analytic::{self, check_regime, damping_rate, group_velocity, rho3i_terms, Component, Shifts};
use crate::error::{Error, Result};
use crate::evolution::{StateTrajectory, TimeGrid};
use crate::fit::{fit_oscillation, OscillationFit};
use crate::linalg::C64;
use crate::params::{MediumParams, SystemParams};

/// Time series of probe observables. Coefficients are in inverse length
/// units of the medium, angles in radians.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProbeObservables {
    pub times: Vec<f64>,
    /// Absorption coefficient of component 1.
    pub alpha: Vec<f64>,
    pub alpha2: Vec<f64>,
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
    pub phi: Vec<f64>,
    /// Transmitted over incident probe intensity.
    pub power_ratio: Vec<f64>,
    pub eta: f64,
}

impl ProbeObservables {
    /// Fits the oscillation of `Φ(t)` over samples with `t ≥ t_min`.
    pub fn fit_rotation(&self, t_min: f64) -> Result<OscillationFit> {
        let (t, v): (Vec<f64>, Vec<f64>) = self
            .times
            .iter()
            .zip(&self.phi)
            .filter(|(t, _)| **t >= t_min)
            .map(|(t, v)| (*t, *v))
            .unzip();
        fit_oscillation(&t, &v, None)
    }
}

/// `α_i = Im(ρ3i Γ/Ω_i)/l0`, `β_i = Re(ρ3i Γ/Ω_i)/(2 l0)`.
pub fn absorption_dispersion(rho3i: C64, omega_i: C64, p: &SystemParams, m: &MediumParams) -> Result<(f64, f64)> {
    if omega_i.norm() == 0.0 {
        return Err(Error::ZeroProbe);
    }
    let chi = rho3i * p.dephasing() / omega_i;
    Ok((chi.im / m.absorption_length, chi.re / (2.0 * m.absorption_length)))
}

/// Closed-form rotation angle together with the quantities it is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThinRotation {
    pub phi: f64,
    /// `η = δL/v_g`, also the non-oscillating part of `Φ`.
    pub eta: f64,
    /// `(Ω_p²/Ω_c²) sin η`.
    pub oscillation_amplitude: f64,
    pub damping: f64,
    /// Optical depth of the non-oscillating absorption and whether it is
    /// small enough for the closed form.
    pub thin_medium_value: f64,
    pub thin_medium_ok: bool,
}

/// `Φ(t) = η + (Ω_p²/Ω_c²) sin η cos(2δt) e^{−γ_d t}`.
pub fn rotation_angle_thin(p: &SystemParams, m: &MediumParams, t: f64) -> Result<ThinRotation> {
    let eta = analytic::eta(p, m)?;
    let damping = damping_rate(p)?;
    let ratio = p.omega_p * p.omega_p / (p.omega_c * p.omega_c);
    let amplitude = ratio * eta.sin();
    let report = check_regime(p, Some(m));
    let thin = report.thin_medium_value.unwrap_or(f64::INFINITY);
    Ok(ThinRotation {
        phi: eta + amplitude * (2.0 * p.delta * t).cos() * (-damping * t).exp(),
        eta,
        oscillation_amplitude: amplitude,
        damping,
        thin_medium_value: thin,
        thin_medium_ok: report.thin_medium_pass.unwrap_or(false),
    })
}

/// Transmitted probe power in the thin-medium closed form: the output
/// intensity equals the input intensity at the retarded time, which is
/// constant for a stationary input.
pub fn transmitted_power_thin(_p: &SystemParams, _m: &MediumParams, _t: f64) -> f64 {
    1.0
}

/// `t − z/v_g`.
pub fn retarded_time(t: f64, z: f64, group_velocity: f64) -> f64 {
    t - z / group_velocity
}

/// Optical coherences `(ρ31, ρ32)` as a function of time.
pub trait CoherenceSource {
    fn coherences(&self, t: f64) -> Result<(C64, C64)>;
}

/// Closed-form coherences for a given choice of shifts.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticSource {
    pub params: SystemParams,
    pub shifts: Shifts,
}

impl AnalyticSource {
    /// Closed forms with `δ1 = −δ`, `δ2 = +δ`.
    pub fn symmetric(p: &SystemParams) -> Self {
        AnalyticSource {
            params: *p,
            shifts: Shifts::symmetric(p.delta),
        }
    }
}

impl CoherenceSource for AnalyticSource {
    fn coherences(&self, t: f64) -> Result<(C64, C64)> {
        Ok((
            analytic::rho3i_with_shifts(&self.params, self.shifts, t, Component::One)?,
            analytic::rho3i_with_shifts(&self.params, self.shifts, t, Component::Two)?,
        ))
    }
}

/// Coherences of a simulated trajectory, linearly interpolated between grid
/// points and held at the end values outside the grid.
#[derive(Debug, Clone, Copy)]
pub struct TrajectorySource<'a> {
    pub trajectory: &'a StateTrajectory,
}

impl CoherenceSource for TrajectorySource<'_> {
    fn coherences(&self, t: f64) -> Result<(C64, C64)> {
        let traj = self.trajectory;
        let g = &traj.grid;
        let last = traj.states.len() - 1;
        let pick = |k: usize| (traj.states[k].rho31(), traj.states[k].rho32());
        if last == 0 || t <= g.t_start {
            return Ok(pick(0));
        }
        if t >= g.t_end {
            return Ok(pick(last));
        }
        let x = (t - g.t_start) / g.step();
        let k = (x.floor() as usize).min(last - 1);
        let f = (t - g.time(k)) / (g.time(k + 1) - g.time(k));
        let (a, b) = (pick(k), pick(k + 1));
        Ok((a.0 + (b.0 - a.0) * f, a.1 + (b.1 - a.1) * f))
    }
}

/// Observables from instantaneous coherences of a thin cell: local
/// coefficients at each time, `Φ = (β2 − β1)L/2` and
/// `P = (e^{−α1 L} + e^{−α2 L})/2`.
pub fn observables_from_source(
    source: &dyn CoherenceSource,
    p: &SystemParams,
    m: &MediumParams,
    times: &[f64],
) -> Result<ProbeObservables> {
    let eta = analytic::eta(p, m)?;
    let mut obs = ProbeObservables::with_capacity(times.len(), eta);
    for &t in times {
        let (r31, r32) = source.coherences(t)?;
        let (a1, b1) = absorption_dispersion(r31, p.omega_1(), p, m)?;
        let (a2, b2) = absorption_dispersion(r32, p.omega_2(), p, m)?;
        let l = m.cell_length;
        obs.push(
            t,
            a1,
            a2,
            b1,
            b2,
            0.5 * (b2 - b1) * l,
            0.5 * ((-a1 * l).exp() + (-a2 * l).exp()),
        );
    }
    Ok(obs)
}

/// [`observables_from_source`] on the grid of a trajectory.
pub fn observables_from_trajectory(
    traj: &StateTrajectory,
    p: &SystemParams,
    m: &MediumParams,
) -> Result<ProbeObservables> {
    observables_from_source(&TrajectorySource { trajectory: traj }, p, m, &traj.times())
}

impl ProbeObservables {
    fn with_capacity(n: usize, eta: f64) -> Self {
        ProbeObservables {
            times: Vec::with_capacity(n),
            alpha: Vec::with_capacity(n),
            alpha2: Vec::with_capacity(n),
            beta1: Vec::with_capacity(n),
            beta2: Vec::with_capacity(n),
            phi: Vec::with_capacity(n),
            power_ratio: Vec::with_capacity(n),
            eta,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn push(&mut self, t: f64, a1: f64, a2: f64, b1: f64, b2: f64, phi: f64, power: f64) {
        self.times.push(t);
        self.alpha.push(a1);
        self.alpha2.push(a2);
        self.beta1.push(b1);
        self.beta2.push(b2);
        self.phi.push(phi);
        self.power_ratio.push(power);
    }
}

/// Where the retarded time is referenced in a z-sliced propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TimeOrigin {
    /// `t_ret = t − (z − L/2)/v_g`: observation time refers to atoms at the
    /// middle of the cell. The closed-form rotation angle uses this origin.
    #[default]
    CellMidpoint,
    /// `t_ret = t − z/v_g`.
    CellEntrance,
}

/// Largest `αL` tolerated by the sliced propagator.
pub const MAX_OPTICAL_DEPTH: f64 = 1.0;

/// Sliced propagation with closed-form coherences (`δ1 = −δ`, `δ2 = +δ`) and
/// midpoint time origin.
pub fn propagate_z_sliced(
    p: &SystemParams,
    m: &MediumParams,
    grid: &TimeGrid,
    n_slices: usize,
) -> Result<ProbeObservables> {
    propagate_z_sliced_with(
        &AnalyticSource::symmetric(p),
        p,
        m,
        grid,
        n_slices,
        TimeOrigin::CellMidpoint,
    )
}

/// Integrates `dΦi/dz = βi(t_ret)` and `dΩi²/dz = −αi(t_ret)Ωi²` across
/// `n_slices` equal slices with the midpoint rule. The reported `alpha` and
/// `beta` are averages over the cell.
pub fn propagate_z_sliced_with(
    source: &dyn CoherenceSource,
    p: &SystemParams,
    m: &MediumParams,
    grid: &TimeGrid,
    n_slices: usize,
    origin: TimeOrigin,
) -> Result<ProbeObservables> {
    if n_slices == 0 {
        return Err(Error::InvalidSliceCount);
    }
    grid.validate()?;
    let v_g = group_velocity(p, m)?;
    let eta = analytic::eta(p, m)?;
    let l = m.cell_length;
    let dz = l / n_slices as f64;
    let shift = match origin {
        TimeOrigin::CellMidpoint => 0.5 * l,
        TimeOrigin::CellEntrance => 0.0,
    };

    let mut obs = ProbeObservables::with_capacity(grid.sample_count, eta);
    let mut max_depth = 0.0f64;
    for t in grid.times() {
        let (mut ia1, mut ia2, mut ib1, mut ib2) = (0.0, 0.0, 0.0, 0.0);
        for k in 0..n_slices {
            let z = (k as f64 + 0.5) * dz;
            let (r31, r32) = source.coherences(retarded_time(t, z - shift, v_g))?;
            let (a1, b1) = absorption_dispersion(r31, p.omega_1(), p, m)?;
            let (a2, b2) = absorption_dispersion(r32, p.omega_2(), p, m)?;
            ia1 += a1 * dz;
            ia2 += a2 * dz;
            ib1 += b1 * dz;
            ib2 += b2 * dz;
        }
        max_depth = max_depth.max(ia1.abs()).max(ia2.abs());
        obs.push(
            t,
            ia1 / l,
            ia2 / l,
            ib1 / l,
            ib2 / l,
            0.5 * (ib2 - ib1),
            0.5 * ((-ia1).exp() + (-ia2).exp()),
        );
    }
    if max_depth > MAX_OPTICAL_DEPTH {
        return Err(Error::RegimeViolation {
            optical_depth: max_depth,
        });
    }
    Ok(obs)
}

/// Phase shift of beam 1 over the cell caused by beam 2 of intensity
/// `|Ω2|² = omega_2_sq`, with beam 1 on resonance and beam 2 detuned by `2δ`.
/// Only the beat term of `ρ31` contributes:
/// `β1 L = −|Ω2|² 2δ Γ L cos(2δt) e^{−γ_d t}/(4Ω_c⁴ l0)`.
pub fn cross_modulation_phase(p: &SystemParams, m: &MediumParams, omega_2_sq: f64, t: f64) -> Result<f64> {
    if !(omega_2_sq.is_finite() && omega_2_sq >= 0.0) {
        return Err(Error::param("omega_2_sq", "must be finite and >= 0"));
    }
    let gamma_d = damping_rate(p)?;
    let own = C64::new(1.0, 0.0);
    let other = C64::new(omega_2_sq.sqrt(), 0.0);
    let rho31 = rho3i_terms(p, own, other, Shifts::cross_modulation(p.delta), gamma_d, t);
    let (_, beta1) = absorption_dispersion(rho31, own, p, m)?;
    Ok(beta1 * m.cell_length)
}
