//! Hamiltonian and Lindblad generator of the driven four-level atom.
//!
//! Relaxation consists of spontaneous emission `|3> → |0>, |1>, |2>`, each
//! channel at rate `γ` (so optical coherences decay at `Γ = 3γ/2` and the
//! excited population at `3γ`), plus a pure decay of the ground-state
//! coherences `ρij`, `i ≠ j ∈ {0, 1, 2}`, at `γ0`. There is no exchange of
//! population between ground levels.

#[allow(unused_imports)] // needed without std
use num_traits::Float;

use crate::linalg::{self, CMatrix, Mat4, C64, I, ZERO};
use crate::params::SystemParams;
use crate::state::DensityMatrix;

/// Interaction-picture Hamiltonian with `ħ = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hamiltonian(pub Mat4);

impl Hamiltonian {
    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }
}

/// Builds `H = Δ1|1><1| + Δ2|2><2| + Δc|3><3|
///            − (Ωc|3><0| + Ω1|3><1| + Ω2|3><2| + h.c.)`.
pub fn build_hamiltonian(p: &SystemParams) -> Hamiltonian {
    let mut h = linalg::mat4_zero();
    h[1][1] = C64::new(p.delta_1, 0.0);
    h[2][2] = C64::new(p.delta_2, 0.0);
    h[3][3] = C64::new(p.delta_c, 0.0);
    let couplings = [C64::new(p.omega_c, 0.0), p.omega_1(), p.omega_2()];
    for (g, omega) in couplings.iter().enumerate() {
        h[3][g] = -omega;
        h[g][3] = -omega.conj();
    }
    Hamiltonian(h)
}

/// Generator of the master equation acting on the column-stacked density
/// matrix: `dρ_vec/dt = M ρ_vec`, with `ρ_vec[i + 4j] = ρ[i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator(CMatrix);

impl Superoperator {
    pub fn zero() -> Self {
        Superoperator(CMatrix::zeros(16))
    }

    pub fn from_matrix(m: CMatrix) -> Self {
        assert_eq!(m.dim(), 16, "superoperator must be 16x16");
        Superoperator(m)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn apply(&self, v: &[C64; 16]) -> [C64; 16] {
        let mut out = [ZERO; 16];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.0.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// `dρ/dt` as a matrix.
    pub fn apply_to(&self, rho: &DensityMatrix) -> Mat4 {
        linalg::unvectorize(&self.apply(&rho.to_vec()))
    }
}

fn kron(a: &Mat4, b: &Mat4) -> CMatrix {
    let mut out = CMatrix::zeros(16);
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    out[(4 * i + k, 4 * j + l)] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn identity4() -> Mat4 {
    let mut m = linalg::mat4_zero();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C64::new(1.0, 0.0);
    }
    m
}

fn transpose(m: &Mat4) -> Mat4 {
    let mut t = linalg::mat4_zero();
    for i in 0..4 {
        for j in 0..4 {
            t[j][i] = m[i][j];
        }
    }
    t
}

/// Builds the Lindblad generator `M`.
///
/// With column stacking `vec(AXB) = (Bᵀ ⊗ A) vec(X)`, so the coherent part
/// is `−i(I ⊗ H − Hᵀ ⊗ I)` and a jump operator `L` contributes
/// `L̄ ⊗ L − ½ I ⊗ L†L − ½ (L†L)ᵀ ⊗ I`.
pub fn build_liouvillian(p: &SystemParams) -> Superoperator {
    let h = build_hamiltonian(p).0;
    let id = identity4();
    let mut m = kron(&id, &h).sub(&kron(&transpose(&h), &id)).scale(-I);

    let rate = C64::new(p.gamma.sqrt(), 0.0);
    for ground in 0..3 {
        let mut jump = linalg::mat4_zero();
        jump[ground][3] = rate;
        let ldl = linalg::mat4_mul(&linalg::dagger(&jump), &jump);
        let conj_jump = jump.map(|row| row.map(|v| v.conj()));
        m = m
            .add(&kron(&conj_jump, &jump))
            .sub(&kron(&id, &ldl).scale(C64::new(0.5, 0.0)))
            .sub(&kron(&transpose(&ldl), &id).scale(C64::new(0.5, 0.0)));
    }

    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                let idx = i + 4 * j;
                m[(idx, idx)] -= C64::new(p.gamma0, 0.0);
            }
        }
    }
    Superoperator(m)
}

/// Right-hand side `−i[H, ρ] + Lρ` evaluated directly in matrix form.
/// Independent of the Kronecker construction in [`build_liouvillian`].
pub fn master_equation_rhs(p: &SystemParams, rho: &Mat4) -> Mat4 {
    let h = build_hamiltonian(p).0;
    let hr = linalg::mat4_mul(&h, rho);
    let rh = linalg::mat4_mul(rho, &h);
    let mut out = linalg::mat4_zero();
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = -I * (hr[i][j] - rh[i][j]);
        }
    }
    let gamma = p.gamma;
    let big_gamma = p.dephasing();
    for g in 0..3 {
        out[g][g] += gamma * rho[3][3];
    }
    out[3][3] -= 3.0 * gamma * rho[3][3];
    for g in 0..3 {
        out[3][g] -= big_gamma * rho[3][g];
        out[g][3] -= big_gamma * rho[g][3];
    }
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                out[i][j] -= p.gamma0 * rho[i][j];
            }
        }
    }
    out
}
