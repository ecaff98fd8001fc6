//! Time evolution of the density matrix under a fixed generator.
//!
//! [`evolve`] is an adaptive Dormand–Prince 5(4) integrator with PI step
//! control. [`oracle_evolve`] propagates with a single matrix exponential
//! per grid interval and shares no code with the integrator beyond the
//! generator itself.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // needed without std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{expm, C64, ZERO};
use crate::model::Superoperator;
use crate::state::{DensityMatrix, EVOLVED_POSITIVITY_TOL};

const MIN_STEP: f64 = 1e-14;

/// Equally spaced sample times `t_start ..= t_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub sample_count: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, sample_count: usize) -> Result<Self> {
        let g = TimeGrid {
            t_start,
            t_end,
            sample_count,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_start.is_finite() && self.t_end.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if self.t_start < 0.0 || self.t_end <= self.t_start {
            return Err(Error::InvalidGrid(format!(
                "need t_end > t_start >= 0, got [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        if self.sample_count < 2 {
            return Err(Error::InvalidGrid("sample_count must be >= 2".into()));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.t_end - self.t_start) / (self.sample_count - 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k + 1 == self.sample_count {
            self.t_end
        } else {
            self.t_start + k as f64 * self.step()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.sample_count).map(move |k| self.time(k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v <= 1e-2;
        if ok(self.rel_tol) && ok(self.abs_tol) {
            Ok(())
        } else {
            Err(Error::InvalidTolerance {
                rel_tol: self.rel_tol,
                abs_tol: self.abs_tol,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejected: usize,
    /// Largest normalized local error estimate among accepted steps.
    pub max_error_estimate: f64,
}

#[derive(Debug, Clone)]
pub struct StateTrajectory {
    pub grid: TimeGrid,
    pub states: Vec<DensityMatrix>,
    pub stats: IntegratorStats,
}

impl StateTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.grid.times().collect()
    }

    pub fn rho21(&self) -> Vec<C64> {
        self.states.iter().map(DensityMatrix::rho21).collect()
    }

    pub fn element(&self, i: usize, j: usize) -> Vec<C64> {
        self.states.iter().map(|s| s.get(i, j)).collect()
    }

    /// Largest elementwise deviation between two trajectories on the same grid.
    pub fn max_deviation(&self, other: &StateTrajectory) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .flat_map(|(a, b)| (0..16).map(move |k| (a.matrix()[k / 4][k % 4] - b.matrix()[k / 4][k % 4]).norm()))
            .fold(0.0, f64::max)
    }

    /// Checks every sample against the evolved-state invariants: trace and
    /// Hermiticity within `tol`, eigenvalues above −1e-8.
    pub fn validate(&self, tol: f64) -> Result<()> {
        for (k, s) in self.states.iter().enumerate() {
            s.check(tol, EVOLVED_POSITIVITY_TOL)
                .map_err(|e| Error::InvalidState(format!("sample {k} (t = {}): {e}", self.grid.time(k))))?;
        }
        Ok(())
    }
}

// Dormand–Prince 5(4) tableau (autonomous system, stage times unused).
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type Vec16 = [C64; 16];

fn combine(y: &Vec16, h: f64, terms: &[(f64, &Vec16)]) -> Vec16 {
    let mut out = *y;
    for (coef, k) in terms {
        let c = h * coef;
        for (o, v) in out.iter_mut().zip(k.iter()) {
            *o += v * c;
        }
    }
    out
}

fn symmetrize(v: &Vec16) -> Vec16 {
    DensityMatrix::from_vec_unchecked(v).symmetrized().to_vec()
}

struct Stepper<'a> {
    m: &'a Superoperator,
    tol: Tolerances,
}

impl Stepper<'_> {
    /// One trial step: returns the 5th-order solution and the normalized
    /// error estimate.
    fn trial(&self, y: &Vec16, k1: &Vec16, h: f64) -> (Vec16, f64) {
        let m = self.m;
        let k2 = m.apply(&combine(y, h, &[(A21, k1)]));
        let k3 = m.apply(&combine(y, h, &[(A31, k1), (A32, &k2)]));
        let k4 = m.apply(&combine(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
        let k5 = m.apply(&combine(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = m.apply(&combine(
            y,
            h,
            &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ));
        let y_new = combine(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = m.apply(&y_new);

        let mut sum = 0.0;
        for i in 0..16 {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let scale = self.tol.abs_tol + self.tol.rel_tol * y[i].norm().max(y_new[i].norm());
            let r = e.norm() / scale;
            sum += r * r;
        }
        (y_new, (sum / 16.0).sqrt())
    }
}

fn norm_rms(v: &Vec16) -> f64 {
    (v.iter().map(|c| c.norm_sqr()).sum::<f64>() / 16.0).sqrt()
}

/// Integrates `dρ/dt = Mρ` from `grid.t_start`, returning the state at every
/// grid time. The state is re-symmetrized after each accepted step.
pub fn evolve(rho0: &DensityMatrix, m: &Superoperator, grid: &TimeGrid, tol: Tolerances) -> Result<StateTrajectory> {
    tol.validate()?;
    grid.validate()?;
    rho0.check(crate::state::STATE_TOL, crate::state::POSITIVITY_TOL)?;

    let stepper = Stepper { m, tol };
    let mut stats = IntegratorStats::default();
    let mut states = Vec::with_capacity(grid.sample_count);
    states.push(*rho0);

    let mut y = rho0.to_vec();
    let mut t = grid.t_start;

    // initial step from the scale of y and its derivative
    let f0 = m.apply(&y);
    let d0 = norm_rms(&y);
    let d1 = norm_rms(&f0);
    let mut h = if d1 > 1e-12 { 0.01 * d0 / d1 } else { grid.step() };
    h = h.min(grid.t_end - grid.t_start).max(1e-6 * grid.step());

    const SAFETY: f64 = 0.9;
    const BETA: f64 = 0.04;
    const EXPO: f64 = 0.2 - BETA * 0.75;
    let mut err_old = 1e-4f64;

    for k in 1..grid.sample_count {
        let target = grid.time(k);
        while target - t > 1e-13 * target.abs().max(1.0) {
            if h < MIN_STEP || !h.is_finite() {
                return Err(Error::StepSizeUnderflow { t, step: h });
            }
            let remaining = target - t;
            let h_try = h.min(remaining);
            let k1 = m.apply(&y);
            let (y_new, err) = stepper.trial(&y, &k1, h_try);
            if !err.is_finite() {
                stats.rejected += 1;
                h = h_try * 0.1;
                continue;
            }
            let fac11 = err.powf(EXPO);
            if err <= 1.0 {
                let fac = (fac11 / err_old.powf(BETA) / SAFETY).clamp(0.1, 5.0);
                err_old = err.max(1e-4);
                stats.steps += 1;
                stats.max_error_estimate = stats.max_error_estimate.max(err);
                y = symmetrize(&y_new);
                t = if h_try == remaining { target } else { t + h_try };
                h = h_try / fac;
            } else {
                stats.rejected += 1;
                h = h_try / (fac11 / SAFETY).min(5.0);
            }
        }
        t = target;
        states.push(DensityMatrix::from_vec_unchecked(&y));
    }

    Ok(StateTrajectory {
        grid: *grid,
        states,
        stats,
    })
}

/// Propagates with `exp(M Δt)` for the uniform grid spacing `Δt`, computed
/// once by scaling and squaring and applied repeatedly.
pub fn oracle_evolve(rho0: &DensityMatrix, m: &Superoperator, grid: &TimeGrid) -> Result<StateTrajectory> {
    grid.validate()?;
    rho0.check(crate::state::STATE_TOL, crate::state::POSITIVITY_TOL)?;
    let dt = grid.step();
    let propagator = expm(&m.matrix().scale(C64::new(dt, 0.0))).ok_or(Error::SingularGenerator)?;

    let mut states = Vec::with_capacity(grid.sample_count);
    let mut v = rho0.to_vec();
    states.push(*rho0);
    for _ in 1..grid.sample_count {
        let next = propagator.mul_vec(&v);
        let mut arr = [ZERO; 16];
        arr.copy_from_slice(&next);
        v = arr;
        states.push(DensityMatrix::from_vec_unchecked(&v));
    }
    Ok(StateTrajectory {
        grid: *grid,
        states,
        stats: IntegratorStats::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_liouvillian;
    use crate::params::{SystemParams, GAMMA_UNITS_GAMMA};

    fn fields_off(gamma0: f64) -> SystemParams {
        SystemParams::symmetric(GAMMA_UNITS_GAMMA, gamma0, 0.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn null_generator_keeps_state() {
        let grid = TimeGrid::new(0.0, 10.0, 11).unwrap();
        let rho = DensityMatrix::zeeman_mixture();
        let traj = evolve(&rho, &Superoperator::zero(), &grid, Tolerances::default()).unwrap();
        assert!(traj.states.iter().all(|s| *s == rho));
        let oracle = oracle_evolve(&rho, &Superoperator::zero(), &grid).unwrap();
        assert!(oracle.states.iter().all(|s| *s == rho));
    }

    #[test]
    fn excited_state_decays_as_exponential() {
        let gamma = GAMMA_UNITS_GAMMA;
        let t_star = 1.0 / (3.0 * gamma);
        let grid = TimeGrid::new(0.0, t_star, 2).unwrap();
        let m = build_liouvillian(&fields_off(0.0));
        let traj = evolve(&DensityMatrix::pure_level(3), &m, &grid, Tolerances::default()).unwrap();
        let last = traj.states.last().unwrap();
        assert!((last.population(3) - (-1.0f64).exp()).abs() < 1e-8);
        let ground = (1.0 - (-1.0f64).exp()) / 3.0;
        for g in 0..3 {
            assert!((last.population(g) - ground).abs() < 1e-8);
        }
    }

    #[test]
    fn three_channel_decay_along_the_grid() {
        let gamma = GAMMA_UNITS_GAMMA;
        let grid = TimeGrid::new(0.0, 5.0, 51).unwrap();
        let m = build_liouvillian(&fields_off(0.0));
        let traj = evolve(&DensityMatrix::pure_level(3), &m, &grid, Tolerances::default()).unwrap();
        for (t, s) in grid.times().zip(&traj.states) {
            let e = (-3.0 * gamma * t).exp();
            assert!((s.population(3) - e).abs() < 1e-9);
            assert!((s.population(0) - (1.0 - e) / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn isolated_zeeman_coherence_decays_at_gamma0() {
        let gamma0 = 0.05;
        let mut m0 = *DensityMatrix::zeeman_mixture().matrix();
        m0[2][1] = C64::new(0.5, 0.0);
        m0[1][2] = C64::new(0.5, 0.0);
        let rho = DensityMatrix::new(m0).unwrap();
        let grid = TimeGrid::new(0.0, 20.0, 21).unwrap();
        let m = build_liouvillian(&fields_off(gamma0));
        let traj = evolve(&rho, &m, &grid, Tolerances::default()).unwrap();
        for (t, s) in grid.times().zip(&traj.states) {
            assert!((s.rho21() - C64::new(0.5 * (-gamma0 * t).exp(), 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn optical_coherence_decays_at_big_gamma() {
        // |ψ> = (|1> + |3>)/√2 with fields off: ρ31 ∝ e^{-Γt}
        let gamma = 0.8;
        let p = SystemParams::symmetric(gamma, 0.0, 0.0, 0.0, 0.0).unwrap();
        let mut m0 = crate::linalg::mat4_zero();
        for (i, j) in [(1, 1), (1, 3), (3, 1), (3, 3)] {
            m0[i][j] = C64::new(0.5, 0.0);
        }
        let rho = DensityMatrix::new(m0).unwrap();
        let t_end = 3.0;
        let grid = TimeGrid::new(0.0, t_end, 2).unwrap();
        let traj = oracle_evolve(&rho, &build_liouvillian(&p), &grid).unwrap();
        let ratio = traj.states[1].rho31().re / 0.5;
        let rate = -ratio.ln() / t_end;
        assert!((rate - 1.5 * gamma).abs() / (1.5 * gamma) < 1e-9);
    }

    #[test]
    fn nilpotent_generator_oracle_is_linear_in_time() {
        // M moves population ρ11 into the coherence slot ρ21 only: M² = 0
        let mut mm = crate::linalg::CMatrix::zeros(16);
        mm[(2 + 4, 1 + 4)] = C64::new(0.3, -0.2);
        let m = Superoperator::from_matrix(mm);
        let grid = TimeGrid::new(0.0, 4.0, 5).unwrap();
        let rho = DensityMatrix::zeeman_mixture();
        let traj = oracle_evolve(&rho, &m, &grid).unwrap();
        for (t, s) in grid.times().zip(&traj.states) {
            let want = C64::new(0.3, -0.2) * 0.5 * t;
            assert!((s.rho21() - want).norm() < 1e-13);
        }
    }

    #[test]
    fn rejects_bad_tolerances_and_grids() {
        let m = Superoperator::zero();
        let rho = DensityMatrix::zeeman_mixture();
        let grid = TimeGrid::new(0.0, 1.0, 3).unwrap();
        for (r, a) in [(0.0, 1e-9), (1e-9, 0.0), (0.1, 1e-9), (1e-9, -1.0)] {
            let tol = Tolerances { rel_tol: r, abs_tol: a };
            assert!(matches!(
                evolve(&rho, &m, &grid, tol),
                Err(Error::InvalidTolerance { .. })
            ));
        }
        assert!(TimeGrid::new(1.0, 1.0, 3).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        assert!(TimeGrid::new(-1.0, 1.0, 3).is_err());
    }

    #[test]
    fn runaway_generator_underflows() {
        // a huge anti-damped mode drives the step size to zero
        let mut mm = crate::linalg::CMatrix::zeros(16);
        mm[(5, 5)] = C64::new(1e16, 0.0);
        let m = Superoperator::from_matrix(mm);
        let grid = TimeGrid::new(0.0, 1.0, 2).unwrap();
        let r = evolve(&DensityMatrix::zeeman_mixture(), &m, &grid, Tolerances::default());
        assert!(matches!(r, Err(Error::StepSizeUnderflow { .. })));
    }

    #[test]
    fn grid_times_hit_end_exactly() {
        let g = TimeGrid::new(0.0, 400.0, 4001).unwrap();
        assert_eq!(g.time(4000), 400.0);
        assert!((g.time(300) - 30.0).abs() < 1e-12);
        assert_eq!(g.times().count(), 4001);
    }
}
