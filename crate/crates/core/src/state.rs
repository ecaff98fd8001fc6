use alloc::format;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat4, C64, ZERO};

/// Hermiticity and trace tolerance for a valid density matrix.
pub const STATE_TOL: f64 = 1e-12;
/// Smallest admissible eigenvalue of a constructed density matrix.
pub const POSITIVITY_TOL: f64 = -1e-10;
/// Relaxed positivity bound for numerically evolved states.
pub const EVOLVED_POSITIVITY_TOL: f64 = -1e-8;

/// Density matrix of the four-level atom, `ρ[i][j] = <i|ρ|j>` in the basis
/// `|0>, |1>, |2>, |3>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Mat4);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(m: Mat4) -> Result<Self> {
        let rho = DensityMatrix(m);
        rho.check(STATE_TOL, POSITIVITY_TOL)?;
        Ok(rho)
    }

    /// Wraps a matrix without validation; used for integrator output.
    pub fn from_matrix_unchecked(m: Mat4) -> Self {
        DensityMatrix(m)
    }

    pub fn diagonal(populations: [f64; 4]) -> Result<Self> {
        let mut m = linalg::mat4_zero();
        for (i, p) in populations.iter().enumerate() {
            m[i][i] = C64::new(*p, 0.0);
        }
        Self::new(m)
    }

    pub fn pure_level(level: usize) -> Self {
        let mut m = linalg::mat4_zero();
        m[level][level] = C64::new(1.0, 0.0);
        DensityMatrix(m)
    }

    /// Equal populations in the two Zeeman sublevels, no coherences.
    pub fn zeeman_mixture() -> Self {
        let mut m = linalg::mat4_zero();
        m[1][1] = C64::new(0.5, 0.0);
        m[2][2] = C64::new(0.5, 0.0);
        DensityMatrix(m)
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[i][j]
    }

    /// Zeeman coherence `ρ21 = <2|ρ|1>`.
    pub fn rho21(&self) -> C64 {
        self.0[2][1]
    }

    pub fn rho31(&self) -> C64 {
        self.0[3][1]
    }

    pub fn rho32(&self) -> C64 {
        self.0[3][2]
    }

    pub fn population(&self, level: usize) -> f64 {
        self.0[level][level].re
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.0)
    }

    pub fn trace_error(&self) -> f64 {
        (self.trace() - C64::new(1.0, 0.0)).norm()
    }

    pub fn hermiticity_error(&self) -> f64 {
        linalg::hermiticity_error(&self.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.0)[0]
    }

    pub fn to_vec(&self) -> [C64; 16] {
        linalg::vectorize(&self.0)
    }

    pub fn from_vec_unchecked(v: &[C64; 16]) -> Self {
        DensityMatrix(linalg::unvectorize(v))
    }

    /// `(ρ + ρ†)/2`.
    pub fn symmetrized(&self) -> Self {
        let mut m = [[ZERO; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = (self.0[i][j] + self.0[j][i].conj()) * 0.5;
            }
        }
        DensityMatrix(m)
    }

    /// Checks the state invariants with the given trace/Hermiticity
    /// tolerance and eigenvalue floor.
    pub fn check(&self, tol: f64, min_eigenvalue: f64) -> Result<()> {
        if self.0.iter().flatten().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidState("non-finite element".into()));
        }
        let herm = self.hermiticity_error();
        if herm >= tol {
            return Err(Error::InvalidState(format!("not Hermitian (error {herm:e})")));
        }
        let tr = self.trace_error();
        if tr >= tol {
            return Err(Error::InvalidState(format!("trace differs from 1 by {tr:e}")));
        }
        let ev = self.min_eigenvalue();
        if ev < min_eigenvalue {
            return Err(Error::InvalidState(format!("negative eigenvalue {ev:e}")));
        }
        Ok(())
    }
}
