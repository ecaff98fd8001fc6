//! Physical inputs of the four-level model.

use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Bohr magneton over ħ, rad s⁻¹ G⁻¹ (2π × 1.3996 MHz/G).
pub const MU_B_OVER_HBAR: f64 = 2.0 * PI * 1.3996e6;
/// Reduced Planck constant, erg s.
pub const HBAR_CGS: f64 = 1.054571817e-27;
/// Speed of light, cm s⁻¹.
pub const C_CGS: f64 = 2.99792458e10;

/// Spontaneous rate `γ` that makes the optical dephasing rate `Γ = 3γ/2`
/// equal to one.
pub const GAMMA_UNITS_GAMMA: f64 = 2.0 / 3.0;

/// Rates, Rabi frequencies and detunings of the four-level system.
///
/// All quantities are angular frequencies in one consistent unit. Level
/// `|0>` is the auxiliary ground state, `|1>` and `|2>` are the Zeeman
/// sublevels coupled to `|3>` by the two circular probe components.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SystemParams {
    /// Spontaneous decay rate of each channel `|3> → |i>`.
    pub gamma: f64,
    /// Decay rate of the ground-state coherences.
    pub gamma0: f64,
    pub omega_c: f64,
    /// Probe Rabi frequency magnitude shared by both circular components.
    pub omega_p: f64,
    pub phi1: f64,
    pub phi2: f64,
    /// Zeeman shift `δ` of the `m = ±1` sublevels.
    pub delta: f64,
    /// Zeeman shift of level `|0>`.
    pub delta0: f64,
    pub delta_c: f64,
    pub delta_1: f64,
    pub delta_2: f64,
    pub doppler_width: f64,
}

impl SystemParams {
    /// Symmetric configuration: resonant coupling (`Δc = 0`) and probe
    /// detunings `Δ1 = +δ`, `Δ2 = −δ`.
    pub fn symmetric(gamma: f64, gamma0: f64, omega_c: f64, omega_p: f64, delta: f64) -> Result<Self> {
        let p = SystemParams {
            gamma,
            gamma0,
            omega_c,
            omega_p,
            phi1: 0.0,
            phi2: 0.0,
            delta,
            delta0: 0.0,
            delta_c: 0.0,
            delta_1: delta,
            delta_2: -delta,
            doppler_width: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// The field strengths used for the Zeeman-coherence time traces, in
    /// units of `Γ`: `Ω_c = 1`, `Ω_p = 0.3`, `γ0 = 1e-4`.
    pub fn fig2(delta: f64) -> Self {
        SystemParams::symmetric(GAMMA_UNITS_GAMMA, 1e-4, 1.0, 0.3, delta).expect("fixed parameters are valid")
    }

    pub fn with_coupling_detuning(mut self, delta_c: f64) -> Self {
        self.delta_c = delta_c;
        self
    }

    pub fn with_probe_detunings(mut self, delta_1: f64, delta_2: f64) -> Self {
        self.delta_1 = delta_1;
        self.delta_2 = delta_2;
        self
    }

    pub fn with_phases(mut self, phi1: f64, phi2: f64) -> Self {
        self.phi1 = phi1;
        self.phi2 = phi2;
        self
    }

    pub fn with_delta0(mut self, delta0: f64) -> Self {
        self.delta0 = delta0;
        self
    }

    pub fn with_doppler_width(mut self, width: f64) -> Self {
        self.doppler_width = width;
        self
    }

    /// Adds one Doppler shift to all three detunings. Coupling and probe
    /// see the same shift for co-propagating beams of nearly equal
    /// frequency.
    pub fn with_common_shift(mut self, shift: f64) -> Self {
        self.delta_c += shift;
        self.delta_1 += shift;
        self.delta_2 += shift;
        self
    }

    /// Optical dephasing rate `Γ = 3γ/2`.
    pub fn dephasing(&self) -> f64 {
        1.5 * self.gamma
    }

    pub fn omega_1(&self) -> C64 {
        C64::from_polar(self.omega_p, self.phi1)
    }

    pub fn omega_2(&self) -> C64 {
        C64::from_polar(self.omega_p, self.phi2)
    }

    pub fn is_symmetric(&self) -> bool {
        self.delta_c == 0.0 && self.delta_1 == self.delta && self.delta_2 == -self.delta
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.gamma,
            self.gamma0,
            self.omega_c,
            self.omega_p,
            self.phi1,
            self.phi2,
            self.delta,
            self.delta0,
            self.delta_c,
            self.delta_1,
            self.delta_2,
            self.doppler_width,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::param("system", "all parameters must be finite"));
        }
        if self.gamma <= 0.0 {
            return Err(Error::param("gamma", "must be > 0"));
        }
        if self.gamma0 < 0.0 {
            return Err(Error::param("gamma0", "must be >= 0"));
        }
        if self.omega_c < 0.0 {
            return Err(Error::param("omega_c", "must be >= 0"));
        }
        if self.omega_p < 0.0 {
            return Err(Error::param("omega_p", "must be >= 0"));
        }
        if self.doppler_width < 0.0 {
            return Err(Error::param("doppler_width", "must be >= 0"));
        }
        Ok(())
    }

    /// Rescales every rate so that `Γ = 1`. Returns the rescaled parameters
    /// and the value of `Γ` in the original units; times convert back by
    /// dividing by that value.
    pub fn to_gamma_units(&self) -> (SystemParams, f64) {
        let g = self.dephasing();
        let scaled = SystemParams {
            gamma: self.gamma / g,
            gamma0: self.gamma0 / g,
            omega_c: self.omega_c / g,
            omega_p: self.omega_p / g,
            phi1: self.phi1,
            phi2: self.phi2,
            delta: self.delta / g,
            delta0: self.delta0 / g,
            delta_c: self.delta_c / g,
            delta_1: self.delta_1 / g,
            delta_2: self.delta_2 / g,
            doppler_width: self.doppler_width / g,
        };
        (scaled, g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZeemanParams {
    pub g_lande: f64,
    pub g0: f64,
    pub m0: i32,
    /// Magnetic field in gauss.
    pub b_field: f64,
    pub mu_b_over_hbar: f64,
}

impl ZeemanParams {
    pub fn new(g_lande: f64, g0: f64, m0: i32, b_field: f64) -> Result<Self> {
        let z = ZeemanParams {
            g_lande,
            g0,
            m0,
            b_field,
            mu_b_over_hbar: MU_B_OVER_HBAR,
        };
        z.validate()?;
        Ok(z)
    }

    pub fn validate(&self) -> Result<()> {
        if !(-2..=2).contains(&self.m0) {
            return Err(Error::param("m0", "must lie in -2..=2"));
        }
        if !(self.g_lande.is_finite() && self.g0.is_finite() && self.b_field.is_finite()) {
            return Err(Error::param("zeeman", "must be finite"));
        }
        Ok(())
    }
}

/// Zeeman shifts `(δ, δ0)` in rad/s: `δ = g μB B/ħ`, `δ0 = g0 μB B m0/ħ`.
pub fn zeeman_shifts(z: &ZeemanParams) -> (f64, f64) {
    let delta = z.g_lande * z.mu_b_over_hbar * z.b_field;
    let delta0 = z.g0 * z.mu_b_over_hbar * z.b_field * f64::from(z.m0);
    (delta, delta0)
}

/// Transition dipole data from which the resonant cross-section follows.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DipoleSpec {
    /// Dipole moment, esu·cm.
    pub moment: f64,
    /// Optical angular frequency, rad/s.
    pub optical_frequency: f64,
    /// Optical dephasing rate `Γ`, rad/s.
    pub dephasing: f64,
}

impl DipoleSpec {
    /// `σ = 4π ω μ² / (ħ c Γ)` in cm².
    pub fn cross_section(&self) -> f64 {
        4.0 * PI * self.optical_frequency * self.moment * self.moment / (HBAR_CGS * C_CGS * self.dephasing)
    }
}

/// Atomic vapour: density (cm⁻³), cell length (cm) and resonant
/// cross-section (cm²).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MediumParams {
    pub number_density: f64,
    pub cell_length: f64,
    pub cross_section: f64,
    /// `l0 = 1/(σN)`.
    pub absorption_length: f64,
}

impl MediumParams {
    pub fn new(number_density: f64, cell_length: f64, cross_section: f64) -> Result<Self> {
        for (field, v) in [
            ("number_density", number_density),
            ("cell_length", cell_length),
            ("cross_section", cross_section),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(field, "must be finite and > 0"));
            }
        }
        Ok(MediumParams {
            number_density,
            cell_length,
            cross_section,
            absorption_length: 1.0 / (cross_section * number_density),
        })
    }

    pub fn from_dipole(number_density: f64, cell_length: f64, dipole: &DipoleSpec) -> Result<Self> {
        let sigma = dipole.cross_section();
        Self::new(number_density, cell_length, sigma)
    }

    /// Builds the medium from a cross-section given both directly and
    /// through the dipole data; the two must agree to 1e-9 relative.
    pub fn with_checked_cross_section(
        number_density: f64,
        cell_length: f64,
        cross_section: f64,
        dipole: &DipoleSpec,
    ) -> Result<Self> {
        let derived = dipole.cross_section();
        if (derived - cross_section).abs() > 1e-9 * cross_section.abs() {
            return Err(Error::param(
                "cross_section",
                alloc::format!("given {cross_section:e} cm² but dipole data imply {derived:e} cm²"),
            ));
        }
        Self::new(number_density, cell_length, cross_section)
    }

    /// Cell length in units of the absorption length, `L/l0`.
    pub fn optical_length(&self) -> f64 {
        self.cell_length / self.absorption_length
    }
}
