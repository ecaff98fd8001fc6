//! Thermal averaging over a Gaussian distribution of Doppler shifts.
//!
//! The shift `Δ` of a velocity class is added to all three detunings
//! (co-propagating beams of nearly equal frequency see the same shift). The
//! distribution is `exp(−(Δ/Δ_D)²)/(√π Δ_D)`, so `Δ_D` is the 1/e half-width
//! and `<Δ²> = Δ_D²/2`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // needed without std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::evolution::{evolve, IntegratorStats, StateTrajectory, TimeGrid, Tolerances};
use crate::linalg::{C64, ZERO};
use crate::model::build_liouvillian;
use crate::params::SystemParams;
use crate::state::DensityMatrix;

pub const MIN_POINTS: usize = 8;
pub const MAX_POINTS: usize = 256;
pub const DEFAULT_POINTS: usize = 32;
/// Relative change under point doubling accepted as converged.
pub const CONVERGENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DopplerConfig {
    pub doppler_width: f64,
    pub quadrature_points: usize,
    pub enabled: bool,
}

impl Default for DopplerConfig {
    fn default() -> Self {
        DopplerConfig {
            doppler_width: 0.0,
            quadrature_points: DEFAULT_POINTS,
            enabled: false,
        }
    }
}

impl DopplerConfig {
    pub fn new(doppler_width: f64) -> Result<Self> {
        let cfg = DopplerConfig {
            doppler_width,
            quadrature_points: DEFAULT_POINTS,
            enabled: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_points(mut self, n: usize) -> Self {
        self.quadrature_points = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.doppler_width.is_finite() && self.doppler_width >= 0.0) {
            return Err(Error::InvalidDopplerConfig(
                "doppler_width must be finite and >= 0".into(),
            ));
        }
        if !(MIN_POINTS..=MAX_POINTS).contains(&self.quadrature_points) {
            return Err(Error::InvalidDopplerConfig(alloc::format!(
                "quadrature_points must be in [{MIN_POINTS}, {MAX_POINTS}], got {}",
                self.quadrature_points
            )));
        }
        Ok(())
    }

    /// True when averaging reduces to evaluating at zero shift.
    pub fn is_trivial(&self) -> bool {
        !self.enabled || self.doppler_width == 0.0
    }
}

/// Number of eigenvalues of the Hermite Jacobi matrix (zero diagonal,
/// off-diagonal `√(j/2)`) below `x`, by Sturm sequence.
fn sturm_count(n: usize, x: f64) -> usize {
    let mut count = 0;
    let mut q = -x;
    for j in 0..n {
        if j > 0 {
            let b2 = j as f64 / 2.0;
            q = -x - b2 / q;
        }
        if q == 0.0 {
            q = -f64::EPSILON * x.abs().max(1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Orthonormal Hermite value `p_n(z)` and `√(2n) p_{n−1}(z)`, the derivative
/// of `p_n` up to the Gaussian weight.
fn hermite_pair(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = PI.powf(-0.25);
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, (2.0 * n as f64).sqrt() * p2)
}

/// Gauss–Hermite rule for `∫ e^{−x²} f(x) dx`: non-negative nodes in
/// decreasing order and their weights. For odd `n` the last node is zero.
/// The negative nodes are the mirror images with equal weights.
///
/// Roots are bracketed by bisection on the Sturm count of the Jacobi matrix
/// and polished with Newton steps on the orthonormal recurrence.
pub fn gauss_hermite_half(n: usize) -> (Vec<f64>, Vec<f64>) {
    let m = n.div_ceil(2);
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    let bound = (2.0 * n as f64 + 1.0).sqrt() + 1.0;
    for i in 0..m {
        // i-th largest root: exactly n − 1 − i eigenvalues lie below it
        let rank = n - 1 - i;
        let (mut lo, mut hi) = (0.0f64, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(n, mid) > rank {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mut z = 0.5 * (lo + hi);
        if n % 2 == 1 && i == m - 1 {
            z = 0.0;
        } else {
            for _ in 0..3 {
                let (p, dp) = hermite_pair(n, z);
                z -= p / dp;
            }
        }
        let (_, dp) = hermite_pair(n, z);
        x[i] = z;
        w[i] = 2.0 / (dp * dp);
    }
    (x, w)
}

fn next_levels(points: usize) -> (usize, usize) {
    if points * 2 > MAX_POINTS {
        (MAX_POINTS / 2, MAX_POINTS)
    } else {
        (points, points * 2)
    }
}

/// Weighted sum over an `n`-point rule. Mirror nodes are combined before
/// weighting so that odd integrands cancel exactly. Also returns
/// `max_k Σ w |f_k|` as a scale for the convergence test.
fn rule_sum<F>(f: &mut F, width: f64, n: usize) -> Result<(Vec<C64>, f64)>
where
    F: FnMut(f64) -> Result<Vec<C64>>,
{
    let (x, w) = gauss_hermite_half(n);
    let norm = 1.0 / PI.sqrt();
    let mut acc: Vec<C64> = Vec::new();
    let mut magnitude: Vec<f64> = Vec::new();
    for (k, (&xk, &wk)) in x.iter().zip(&w).enumerate() {
        let weight = wk * norm;
        let (a, b) = if n % 2 == 1 && k == x.len() - 1 {
            (f(0.0)?, None)
        } else {
            (f(width * xk)?, Some(f(-width * xk)?))
        };
        if acc.is_empty() {
            acc = vec![ZERO; a.len()];
            magnitude = vec![0.0; a.len()];
        }
        if a.len() != acc.len() || b.as_ref().is_some_and(|b| b.len() != acc.len()) {
            return Err(Error::InvalidDopplerConfig(
                "integrand length varies with the shift".into(),
            ));
        }
        for j in 0..acc.len() {
            let bj = b.as_ref().map_or(ZERO, |b| b[j]);
            acc[j] += (a[j] + bj) * weight;
            magnitude[j] += weight * (a[j].norm() + bj.norm());
        }
    }
    let scale = magnitude.iter().fold(0.0f64, |m, v| m.max(*v));
    Ok((acc, scale))
}

/// Averages a vector-valued integrand, doubling the rule until the result
/// changes by at most [`CONVERGENCE_TOL`] relative to
/// `max(max_k |I_k|, max_k Σ w |f_k|)`. A rule already at
/// [`MAX_POINTS`] is compared against the half rule.
pub fn doppler_average_vec<F>(mut f: F, cfg: &DopplerConfig) -> Result<Vec<C64>>
where
    F: FnMut(f64) -> Result<Vec<C64>>,
{
    cfg.validate()?;
    if cfg.is_trivial() {
        return f(0.0);
    }
    let width = cfg.doppler_width;
    let (lo, mut hi) = next_levels(cfg.quadrature_points);
    let mut prev = rule_sum(&mut f, width, lo)?;
    loop {
        let next = rule_sum(&mut f, width, hi)?;
        let scale = next
            .0
            .iter()
            .fold(next.1, |m, v| m.max(v.norm()))
            .max(f64::MIN_POSITIVE);
        let change = next
            .0
            .iter()
            .zip(&prev.0)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()))
            / scale;
        if change <= CONVERGENCE_TOL {
            return Ok(next.0);
        }
        if hi == MAX_POINTS {
            return Err(Error::QuadratureNonConvergent { points: hi, change });
        }
        hi = (2 * hi).min(MAX_POINTS);
        prev = next;
    }
}

/// `∫ f(Δ) exp(−(Δ/Δ_D)²)/(√π Δ_D) dΔ` by Gauss–Hermite quadrature. Returns
/// `f(0)` exactly when the configuration is disabled or `Δ_D = 0`.
pub fn doppler_average<F>(mut f: F, cfg: &DopplerConfig) -> Result<C64>
where
    F: FnMut(f64) -> C64,
{
    cfg.validate()?;
    if cfg.is_trivial() {
        return Ok(f(0.0));
    }
    let v = doppler_average_vec(|d| Ok(vec![f(d)]), cfg)?;
    Ok(v[0])
}

/// Velocity-averaged density-matrix trajectory. Every velocity class is
/// evolved with the same shift added to `Δc`, `Δ1` and `Δ2`; the states are
/// averaged elementwise, so the result is again a valid density matrix.
/// Integrator statistics are summed over classes.
pub fn doppler_averaged_trajectory(
    p: &SystemParams,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    tol: &Tolerances,
    cfg: &DopplerConfig,
) -> Result<StateTrajectory> {
    cfg.validate()?;
    if cfg.is_trivial() {
        return evolve(rho0, &build_liouvillian(p), grid, *tol);
    }
    let mut stats = IntegratorStats::default();
    let flat = doppler_average_vec(
        |shift| {
            let traj = evolve(rho0, &build_liouvillian(&p.with_common_shift(shift)), grid, *tol)?;
            stats.steps += traj.stats.steps;
            stats.rejected += traj.stats.rejected;
            stats.max_error_estimate = stats.max_error_estimate.max(traj.stats.max_error_estimate);
            Ok(traj.states.iter().flat_map(|s| s.to_vec()).collect())
        },
        cfg,
    )?;
    let states = flat
        .chunks_exact(16)
        .map(|c| {
            let mut v = [ZERO; 16];
            v.copy_from_slice(c);
            DensityMatrix::from_vec_unchecked(&v).symmetrized()
        })
        .collect();
    Ok(StateTrajectory {
        grid: *grid,
        states,
        stats,
    })
}
