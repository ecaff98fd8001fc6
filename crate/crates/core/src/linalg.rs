//! Small dense complex linear algebra: 4×4 operators, an n×n matrix type
//! for the superoperator, the Padé matrix exponential and a Hermitian
//! eigenvalue routine.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
#[allow(unused_imports)] // needed without std
use num_traits::Float;

pub type C64 = Complex64;

/// 4×4 complex operator, `m[row][col]`.
pub type Mat4 = [[C64; 4]; 4];

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn mat4_zero() -> Mat4 {
    [[ZERO; 4]; 4]
}

pub fn dagger(m: &Mat4) -> Mat4 {
    let mut out = mat4_zero();
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[j][i] = v.conj();
        }
    }
    out
}

pub fn mat4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = mat4_zero();
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = ZERO;
            for k in 0..4 {
                acc += a[i][k] * b[k][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

pub fn trace(m: &Mat4) -> C64 {
    (0..4).map(|i| m[i][i]).sum()
}

/// Largest element of `|m - m†|`.
pub fn hermiticity_error(m: &Mat4) -> f64 {
    let mut err = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            err = err.max((m[i][j] - m[j][i].conj()).norm());
        }
    }
    err
}

/// Column-major stacking: `v[i + 4 j] = m[i][j]`.
pub fn vectorize(m: &Mat4) -> [C64; 16] {
    let mut v = [ZERO; 16];
    for i in 0..4 {
        for j in 0..4 {
            v[i + 4 * j] = m[i][j];
        }
    }
    v
}

pub fn unvectorize(v: &[C64; 16]) -> Mat4 {
    let mut m = mat4_zero();
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = v[i + 4 * j];
        }
    }
    m
}

/// Eigenvalues of a Hermitian 4×4 matrix in ascending order.
///
/// The matrix `A + iB` is embedded as the real symmetric 8×8 block matrix
/// `[[A, -B], [B, A]]`, whose spectrum is that of `A + iB` with every
/// eigenvalue doubled.
pub fn hermitian_eigenvalues(m: &Mat4) -> [f64; 4] {
    let mut s = [[0.0f64; 8]; 8];
    for i in 0..4 {
        for j in 0..4 {
            // average with the conjugate-transpose partner so tiny
            // non-Hermitian noise does not break symmetry
            let h = (m[i][j] + m[j][i].conj()) * 0.5;
            s[i][j] = h.re;
            s[i + 4][j + 4] = h.re;
            s[i][j + 4] = -h.im;
            s[i + 4][j] = h.im;
        }
    }
    let mut evals = jacobi_eigenvalues(s);
    evals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    [evals[0], evals[2], evals[4], evals[6]]
}

fn jacobi_eigenvalues<const N: usize>(mut a: [[f64; N]; N]) -> [f64; N] {
    for _sweep in 0..100 {
        let mut off = 0.0;
        let mut total = 0.0;
        for i in 0..N {
            for j in 0..N {
                total += a[i][j] * a[i][j];
                if i != j {
                    off += a[i][j] * a[i][j];
                }
            }
        }
        if off <= 1e-30 * total || off == 0.0 {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut d = [0.0; N];
    for (i, v) in d.iter_mut().enumerate() {
        *v = a[i][i];
    }
    d
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                let orow = &mut out.data[i * n..(i + 1) * n];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Solves `self · X = rhs` by LU decomposition with partial pivoting.
    /// Returns `None` for a numerically singular matrix.
    pub fn solve(&self, rhs: &CMatrix) -> Option<CMatrix> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut b = rhs.data.clone();
        let scale = self.data.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return None;
        }
        for col in 0..n {
            let (piv, piv_abs) = (col..n)
                .map(|r| (r, a[r * n + col].norm()))
                .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if piv_abs <= scale * 1e-300 {
                return None;
            }
            if piv != col {
                for k in 0..n {
                    a.swap(col * n + k, piv * n + k);
                    b.swap(col * n + k, piv * n + k);
                }
            }
            let d = a[col * n + col];
            for r in (col + 1)..n {
                let f = a[r * n + col] / d;
                if f == ZERO {
                    continue;
                }
                for k in col..n {
                    let v = a[col * n + k];
                    a[r * n + k] -= f * v;
                }
                for k in 0..n {
                    let v = b[col * n + k];
                    b[r * n + k] -= f * v;
                }
            }
        }
        for col in (0..n).rev() {
            let d = a[col * n + col];
            for k in 0..n {
                let mut acc = b[col * n + k];
                for j in (col + 1)..n {
                    acc -= a[col * n + j] * b[j * n + k];
                }
                b[col * n + k] = acc / d;
            }
        }
        let out = CMatrix { n, data: b };
        out.is_finite().then_some(out)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Backward-error bounds for the diagonal Padé approximants of degree 3..13.
const THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
    (13, 5.371920351148152),
];

/// Matrix exponential by scaling and squaring with a diagonal Padé
/// approximant, degree chosen from the 1-norm.
pub fn expm(a: &CMatrix) -> Option<CMatrix> {
    let n = a.dim();
    let id = CMatrix::identity(n);
    let norm = a.norm1();
    if !norm.is_finite() {
        return None;
    }
    if norm == 0.0 {
        return Some(id);
    }

    for &(m, theta) in &THETA[..4] {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            let (u, v) = pade_low(a, coeffs);
            return v.sub(&u).solve(&v.add(&u));
        }
    }

    let theta13 = THETA[4].1;
    let s = (norm / theta13).log2().ceil().max(0.0) as i32;
    let scaled = a.scale(C64::new(2f64.powi(-s), 0.0));
    let (u, v) = pade13(&scaled);
    let mut r = v.sub(&u).solve(&v.add(&u))?;
    for _ in 0..s {
        r = r.mul(&r);
    }
    r.is_finite().then_some(r)
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn pade_low(a: &CMatrix, b: &[f64]) -> (CMatrix, CMatrix) {
    let n = a.dim();
    let a2 = a.mul(a);
    let mut powers = vec![CMatrix::identity(n)];
    for _ in 1..b.len() / 2 {
        let next = powers.last().unwrap().mul(&a2);
        powers.push(next);
    }
    let mut u = CMatrix::zeros(n);
    let mut v = CMatrix::zeros(n);
    for (k, p) in powers.iter().enumerate() {
        u = u.add(&p.scale(real(b[2 * k + 1])));
        v = v.add(&p.scale(real(b[2 * k])));
    }
    (a.mul(&u), v)
}

fn pade13(a: &CMatrix) -> (CMatrix, CMatrix) {
    let b = &PADE13;
    let n = a.dim();
    let id = CMatrix::identity(n);
    let a2 = a.mul(a);
    let a4 = a2.mul(&a2);
    let a6 = a4.mul(&a2);
    let inner_u = a6
        .scale(real(b[13]))
        .add(&a4.scale(real(b[11])))
        .add(&a2.scale(real(b[9])));
    let u = a6
        .mul(&inner_u)
        .add(&a6.scale(real(b[7])))
        .add(&a4.scale(real(b[5])))
        .add(&a2.scale(real(b[3])))
        .add(&id.scale(real(b[1])));
    let u = a.mul(&u);
    let inner_v = a6
        .scale(real(b[12]))
        .add(&a4.scale(real(b[10])))
        .add(&a2.scale(real(b[8])));
    let v = a6
        .mul(&inner_v)
        .add(&a6.scale(real(b[6])))
        .add(&a4.scale(real(b[4])))
        .add(&a2.scale(real(b[2])))
        .add(&id.scale(real(b[0])));
    (u, v)
}

/// Solves the real system `a x = b` in place (`a` is `n×n` row-major).
/// Returns `false` if the matrix is singular.
pub(crate) fn solve_real(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| {
                a[x * n + col]
                    .abs()
                    .partial_cmp(&a[y * n + col].abs())
                    .unwrap_or(core::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if a[piv * n + col].abs() < 1e-300 || !a[piv * n + col].is_finite() {
            return false;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        for r in (col + 1)..n {
            let f = a[r * n + col] / a[col * n + col];
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
            b[r] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for j in (col + 1)..n {
            acc -= a[col * n + j] * b[j];
        }
        b[col] = acc / a[col * n + col];
    }
    b.iter().all(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn expm_of_nilpotent_is_truncated_series() {
        // strictly upper triangular => A^3 = 0 for 3x3
        let mut a = CMatrix::zeros(3);
        a[(0, 1)] = c(2.0, 1.0);
        a[(1, 2)] = c(-0.5, 0.0);
        a[(0, 2)] = c(0.0, 3.0);
        let e = expm(&a).unwrap();
        let expect = CMatrix::identity(3).add(&a).add(&a.mul(&a).scale(c(0.5, 0.0)));
        for i in 0..3 {
            for j in 0..3 {
                assert!((e[(i, j)] - expect[(i, j)]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn expm_diagonal_matches_scalar_exponentials() {
        let mut a = CMatrix::zeros(4);
        let d = [c(-30.0, 2.0), c(0.1, -7.0), c(5.0, 0.0), c(-0.001, 40.0)];
        for (i, v) in d.iter().enumerate() {
            a[(i, i)] = *v;
        }
        let e = expm(&a).unwrap();
        for (i, v) in d.iter().enumerate() {
            let want = v.exp();
            assert!((e[(i, i)] - want).norm() <= 1e-12 * want.norm().max(1.0));
        }
    }

    #[test]
    fn expm_rotation_generator() {
        // exp([[0, -w], [w, 0]] t) is a rotation by w t
        for &w in &[1e-3, 0.3, 2.0, 50.0] {
            let mut a = CMatrix::zeros(2);
            a[(0, 1)] = c(-w, 0.0);
            a[(1, 0)] = c(w, 0.0);
            let e = expm(&a).unwrap();
            assert!((e[(0, 0)].re - w.cos()).abs() < 1e-12);
            assert!((e[(1, 0)].re - w.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn hermitian_eigenvalues_of_known_matrix() {
        // Pauli-y (+ identity) in the 1-2 block, diagonal elsewhere
        let mut m = mat4_zero();
        m[0][0] = c(0.3, 0.0);
        m[1][1] = c(1.0, 0.0);
        m[2][2] = c(1.0, 0.0);
        m[1][2] = c(0.0, -0.5);
        m[2][1] = c(0.0, 0.5);
        m[3][3] = c(-0.2, 0.0);
        let ev = hermitian_eigenvalues(&m);
        let want = [-0.2, 0.3, 0.5, 1.5];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-13, "{ev:?}");
        }
    }

    #[test]
    fn solve_recovers_known_solution() {
        let mut a = CMatrix::zeros(3);
        let vals = [
            [c(0.0, 1.0), c(2.0, 0.0), c(1.0, 1.0)],
            [c(3.0, 0.0), c(0.0, 0.0), c(-1.0, 2.0)],
            [c(1.0, -1.0), c(1.0, 0.0), c(4.0, 0.0)],
        ];
        for i in 0..3 {
            for j in 0..3 {
                a[(i, j)] = vals[i][j];
            }
        }
        let x = a.solve(&CMatrix::identity(3)).unwrap();
        let p = a.mul(&x);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { ONE } else { ZERO };
                assert!((p[(i, j)] - want).norm() < 1e-14);
            }
        }
        assert!(CMatrix::zeros(3).solve(&CMatrix::identity(3)).is_none());
    }
}
