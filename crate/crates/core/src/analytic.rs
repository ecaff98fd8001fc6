//! Leading-order closed forms in the EIT regime (`Ω_p, δ ≪ Ω_c, Γ`), valid
//! once the optical transient `~e^{−Γt}` has died out.
//!
//! The formulas are written in terms of the level shifts `δ1, δ2`. In the
//! symmetric configuration these are `δ1 = −δ`, `δ2 = +δ`
//! ([`Shifts::symmetric`]). With the Hamiltonian of [`crate::model`] the
//! simulated coherences follow the same expressions with `δi → Δi`
//! ([`Shifts::from_hamiltonian`]); the two conventions differ only by the
//! sign of the field.

#[allow(unused_imports)] // needed without std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::params::{MediumParams, SystemParams};

/// Threshold ratio used for every "much smaller than" condition.
pub const REGIME_RATIO: f64 = 0.1;

/// Level shifts entering the closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shifts {
    pub delta_1: f64,
    pub delta_2: f64,
}

impl Shifts {
    /// `δ1 = −δ`, `δ2 = +δ`.
    pub fn symmetric(delta: f64) -> Self {
        Shifts {
            delta_1: -delta,
            delta_2: delta,
        }
    }

    /// Shifts taken as the probe detunings of the simulated Hamiltonian.
    pub fn from_hamiltonian(p: &SystemParams) -> Self {
        Shifts {
            delta_1: p.delta_1,
            delta_2: p.delta_2,
        }
    }

    /// Beam 1 on resonance, beam 2 detuned by `2δ`.
    pub fn cross_modulation(delta: f64) -> Self {
        Shifts {
            delta_1: 0.0,
            delta_2: 2.0 * delta,
        }
    }

    fn swapped(self) -> Self {
        Shifts {
            delta_1: self.delta_2,
            delta_2: self.delta_1,
        }
    }
}

/// Circular probe component: `One` drives `|1>→|3>`, `Two` drives `|2>→|3>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    One,
    Two,
}

fn require_coupling(p: &SystemParams) -> Result<()> {
    if p.omega_c == 0.0 {
        Err(Error::ZeroCoupling)
    } else {
        Ok(())
    }
}

/// Beat damping rate `γ_d = γ0 + 2ΓΩ_p²δ²/Ω_c⁴`.
pub fn damping_rate(p: &SystemParams) -> Result<f64> {
    require_coupling(p)?;
    let oc2 = p.omega_c * p.omega_c;
    Ok(p.gamma0 + 2.0 * p.dephasing() * p.omega_p * p.omega_p * p.delta * p.delta / (oc2 * oc2))
}

/// `e^{−γ_d t} e^{i(δ1−δ2)t}`.
fn beat(gamma_d: f64, s: Shifts, t: f64) -> C64 {
    C64::from_polar((-gamma_d * t).exp(), (s.delta_1 - s.delta_2) * t)
}

/// Zeeman coherence in the symmetric configuration:
/// `ρ21 = −Ω1Ω2*/(2Ω_c²) {1 + e^{−γ_d t} e^{i(δ1−δ2)t}}`.
pub fn rho21_analytic(p: &SystemParams, t: f64) -> Result<C64> {
    rho21_with_shifts(p, Shifts::symmetric(p.delta), t)
}

pub fn rho21_with_shifts(p: &SystemParams, shifts: Shifts, t: f64) -> Result<C64> {
    let gamma_d = damping_rate(p)?;
    let pre = -(p.omega_1() * p.omega_2().conj()) / (2.0 * p.omega_c * p.omega_c);
    Ok(pre * (beat(gamma_d, shifts, t) + 1.0))
}

/// Leading-order value of `ρ21` right after the optical transient,
/// `−Ω1Ω2*/Ω_c²` (the closed form at `t = 0`).
pub fn rho21_initial_leading_order(p: &SystemParams) -> Result<C64> {
    require_coupling(p)?;
    Ok(-(p.omega_1() * p.omega_2().conj()) / (p.omega_c * p.omega_c))
}

/// Value the beats start from including probe saturation of the dark
/// state, `−|Ω1Ω2|/(Ω_c² + 2Ω_p²)`.
pub fn beat_start_value(p: &SystemParams) -> Result<f64> {
    require_coupling(p)?;
    let o1o2 = (p.omega_1() * p.omega_2()).norm();
    Ok(-o1o2 / (p.omega_c * p.omega_c + 2.0 * p.omega_p * p.omega_p))
}

/// Optical coherence of component `i` in the symmetric configuration.
pub fn rho3i_analytic(p: &SystemParams, t: f64, i: Component) -> Result<C64> {
    rho3i_with_shifts(p, Shifts::symmetric(p.delta), t, i)
}

/// Optical coherence for arbitrary shifts; `ρ32` follows from `ρ31` by
/// exchanging the labels 1 and 2.
pub fn rho3i_with_shifts(p: &SystemParams, shifts: Shifts, t: f64, i: Component) -> Result<C64> {
    let gamma_d = damping_rate(p)?;
    Ok(match i {
        Component::One => rho3i_terms(p, p.omega_1(), p.omega_2(), shifts, gamma_d, t),
        Component::Two => rho3i_terms(p, p.omega_2(), p.omega_1(), shifts.swapped(), gamma_d, t),
    })
}

/// `ρ31 = Ω1δ1(Ω_c² + iΓδ1)/(2Ω_c⁴) − Ω1|Ω2|²δ2 e^{−γ_d t} e^{i(δ1−δ2)t}/(2Ω_c⁴)`
/// with `own = Ω1`, `other = Ω2`.
pub(crate) fn rho3i_terms(p: &SystemParams, own: C64, other: C64, s: Shifts, gamma_d: f64, t: f64) -> C64 {
    let oc2 = p.omega_c * p.omega_c;
    let oc4 = oc2 * oc2;
    let big_gamma = p.dephasing();
    let first = own * s.delta_1 * C64::new(oc2, big_gamma * s.delta_1) / (2.0 * oc4);
    let second = own * other.norm_sqr() * s.delta_2 * beat(gamma_d, s, t) / (2.0 * oc4);
    first - second
}

/// The three coherences of the closed-form solution at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticCoherences {
    pub rho21: C64,
    pub rho31: C64,
    pub rho32: C64,
}

impl AnalyticCoherences {
    pub fn evaluate(p: &SystemParams, t: f64) -> Result<Self> {
        Self::evaluate_with_shifts(p, Shifts::symmetric(p.delta), t)
    }

    pub fn evaluate_with_shifts(p: &SystemParams, shifts: Shifts, t: f64) -> Result<Self> {
        Ok(AnalyticCoherences {
            rho21: rho21_with_shifts(p, shifts, t)?,
            rho31: rho3i_with_shifts(p, shifts, t, Component::One)?,
            rho32: rho3i_with_shifts(p, shifts, t, Component::Two)?,
        })
    }
}

/// Probe group velocity `v_g = 4Ω_c² l0/Γ`, in cm per unit time.
pub fn group_velocity(p: &SystemParams, m: &MediumParams) -> Result<f64> {
    require_coupling(p)?;
    Ok(4.0 * p.omega_c * p.omega_c * m.absorption_length / p.dephasing())
}

/// Ratio of the probe transit time to the Zeeman beat time, `η = δL/v_g`.
pub fn eta(p: &SystemParams, m: &MediumParams) -> Result<f64> {
    Ok(p.delta * m.cell_length / group_velocity(p, m)?)
}

/// Margins of the EIT and thin-medium conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegimeReport {
    /// `Ω_c²`.
    pub eit_lhs: f64,
    /// `|δ| Δ_D`.
    pub eit_rhs_1: f64,
    /// `γ0 (γ + Δ_D)`.
    pub eit_rhs_2: f64,
    /// `eit_lhs / eit_rhs_1` (infinite when the right side vanishes).
    pub eit_margin_1: f64,
    pub eit_margin_2: f64,
    pub eit_pass_1: bool,
    pub eit_pass_2: bool,
    /// `δ²Γ²L/(2Ω_c⁴ l0)`, the optical depth of the non-oscillating
    /// absorption; absent without a medium.
    pub thin_medium_value: Option<f64>,
    pub thin_medium_pass: Option<bool>,
}

impl RegimeReport {
    pub fn all_pass(&self) -> bool {
        self.eit_pass_1 && self.eit_pass_2 && self.thin_medium_pass.unwrap_or(true)
    }
}

fn margin(large: f64, small: f64) -> f64 {
    if small == 0.0 {
        f64::INFINITY
    } else {
        large / small
    }
}

/// Evaluates `Ω_c² ≫ δΔ_D, γ0(γ + Δ_D)` and the thin-medium condition. A
/// condition passes when the small side is below [`REGIME_RATIO`] times the
/// large side. Degenerate inputs produce failed flags.
pub fn check_regime(p: &SystemParams, m: Option<&MediumParams>) -> RegimeReport {
    let lhs = p.omega_c * p.omega_c;
    let rhs1 = p.delta.abs() * p.doppler_width;
    let rhs2 = p.gamma0 * (p.gamma + p.doppler_width);
    let thin = m.map(|m| {
        if p.omega_c == 0.0 {
            return f64::INFINITY;
        }
        let g = p.dephasing();
        p.delta * p.delta * g * g * m.cell_length / (2.0 * lhs * lhs * m.absorption_length)
    });
    RegimeReport {
        eit_lhs: lhs,
        eit_rhs_1: rhs1,
        eit_rhs_2: rhs2,
        eit_margin_1: margin(lhs, rhs1),
        eit_margin_2: margin(lhs, rhs2),
        eit_pass_1: lhs > 0.0 && rhs1 < REGIME_RATIO * lhs,
        eit_pass_2: lhs > 0.0 && rhs2 < REGIME_RATIO * lhs,
        thin_medium_value: thin,
        thin_medium_pass: thin.map(|v| v < REGIME_RATIO),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::GAMMA_UNITS_GAMMA;
    use core::f64::consts::PI;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn zero_field_start_value() {
        let p = SystemParams::fig2(0.0);
        let r = rho21_analytic(&p, 0.0).unwrap();
        assert!(close(r, C64::new(-0.09, 0.0), 1e-15));
        assert!(close(
            rho21_initial_leading_order(&p).unwrap(),
            C64::new(-0.09, 0.0),
            1e-15
        ));
    }

    #[test]
    fn long_time_limit_is_half_the_start() {
        let p = SystemParams::fig2(0.03);
        let r = rho21_analytic(&p, 1e6).unwrap();
        assert!(close(r, C64::new(-0.045, 0.0), 1e-12));
    }

    #[test]
    fn quarter_beat_phase() {
        let p = SystemParams::fig2(0.03);
        let t = PI / (2.0 * 0.06);
        assert!((t - 26.18).abs() < 1e-2);
        let gd = damping_rate(&p).unwrap();
        let r = rho21_analytic(&p, t).unwrap();
        // braces = 1 + e^{-γd t} e^{-iπ/2}
        let want = C64::new(-0.045, 0.0) * C64::new(1.0, -(-gd * t).exp());
        assert!(close(r, want, 1e-15));
        assert!(((r / C64::new(-0.045, 0.0)).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rho31_vanishes_without_field() {
        let p = SystemParams::fig2(0.0);
        assert_eq!(rho3i_analytic(&p, 50.0, Component::One).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(rho3i_analytic(&p, 50.0, Component::Two).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn rho31_hand_value_at_unit_phase() {
        // γ0 = 0 and phase factor 1 (t = 0) isolate the two terms
        let p = SystemParams::symmetric(GAMMA_UNITS_GAMMA, 0.0, 1.0, 0.3, 0.03).unwrap();
        let r = rho3i_analytic(&p, 0.0, Component::One).unwrap();
        assert!(close(r, C64::new(-0.004905, 0.000135), 1e-15), "{r}");
    }

    #[test]
    fn rho32_is_rho31_with_labels_swapped() {
        let p = SystemParams::symmetric(GAMMA_UNITS_GAMMA, 1e-4, 1.2, 0.2, 0.04)
            .unwrap()
            .with_phases(0.3, -0.8);
        let swapped = SystemParams {
            phi1: p.phi2,
            phi2: p.phi1,
            delta: -p.delta,
            ..p
        };
        for t in [0.0, 13.0, 77.0] {
            let r32 = rho3i_analytic(&p, t, Component::Two).unwrap();
            let r31 = rho3i_analytic(&swapped, t, Component::One).unwrap();
            assert!(close(r32, r31, 1e-16));
        }
    }

    #[test]
    fn damping_rate_hand_values() {
        let gd = |d: f64| damping_rate(&SystemParams::fig2(d)).unwrap();
        assert_eq!(gd(0.0), 1e-4);
        assert!((gd(0.1) - 1.9e-3).abs() < 1e-15);
        assert!((gd(0.03) - 2.62e-4).abs() < 1e-16);
        assert_eq!(gd(0.05), gd(-0.05));
    }

    #[test]
    fn zero_coupling_is_an_error() {
        let p = SystemParams::symmetric(1.0, 0.0, 0.0, 0.1, 0.01).unwrap();
        assert_eq!(damping_rate(&p), Err(Error::ZeroCoupling));
        assert_eq!(rho21_analytic(&p, 1.0), Err(Error::ZeroCoupling));
        assert_eq!(rho3i_analytic(&p, 1.0, Component::One), Err(Error::ZeroCoupling));
        let m = MediumParams::new(1e10, 3.0, 2.9e-9).unwrap();
        assert_eq!(group_velocity(&p, &m), Err(Error::ZeroCoupling));
    }

    #[test]
    fn group_velocity_scalings() {
        let p = SystemParams::fig2(0.03);
        let m = MediumParams::new(1e10, 3.0, 2.9e-9).unwrap();
        let v = group_velocity(&p, &m).unwrap();
        assert!((v - 4.0 * m.absorption_length).abs() < 1e-15);
        let m2 = MediumParams::new(2e10, 3.0, 2.9e-9).unwrap();
        assert!((group_velocity(&p, &m2).unwrap() - v / 2.0).abs() < 1e-15);
    }

    #[test]
    fn rb_group_velocity() {
        let big_gamma = 2.0 * PI * 9e6;
        let p = SystemParams::symmetric(big_gamma / 1.5, 0.0, big_gamma, big_gamma / 10f64.sqrt(), 3.078e6).unwrap();
        let m = MediumParams::new(1e10, 3.0, 2.9e-9).unwrap();
        assert!((m.absorption_length - 0.0345).abs() < 1e-4);
        let v = group_velocity(&p, &m).unwrap();
        assert!((v - 7.8e6).abs() / 7.8e6 < 0.01, "{v:e}");
    }

    #[test]
    fn regime_without_doppler_or_dephasing_passes() {
        let p = SystemParams::symmetric(GAMMA_UNITS_GAMMA, 0.0, 0.05, 0.01, 0.2).unwrap();
        let r = check_regime(&p, None);
        assert!(r.eit_pass_1 && r.eit_pass_2);
        assert!(r.eit_margin_1.is_infinite());
        assert_eq!(r.thin_medium_value, None);
    }

    #[test]
    fn regime_gross_violation() {
        let p = SystemParams::symmetric(GAMMA_UNITS_GAMMA, 0.0, 0.01, 0.001, 0.1)
            .unwrap()
            .with_doppler_width(100.0);
        let r = check_regime(&p, None);
        assert!(!r.eit_pass_1);
        assert!(!r.all_pass());
    }

    #[test]
    fn rb_thin_medium_value() {
        let big_gamma = 5.65e7;
        let p = SystemParams::symmetric(big_gamma / 1.5, 0.0, big_gamma, big_gamma / 10f64.sqrt(), 3.08e6).unwrap();
        let m = MediumParams::new(1.0 / (0.0345 * 2.9e-9), 3.0, 2.9e-9).unwrap();
        let r = check_regime(&p, Some(&m));
        let v = r.thin_medium_value.unwrap();
        assert!((v - 0.13).abs() < 0.005, "{v}");
        assert_eq!(r.thin_medium_pass, Some(false));
    }
}
