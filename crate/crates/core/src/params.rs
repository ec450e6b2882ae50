//! Physical parameters, constants, unit conventions and the complex detunings.
//!
//! Internally every frequency (detunings, decay rates, Rabi frequencies) is
//! measured in units of the optical coherence decay rate γ, so `gamma = 1`
//! in all numerical kernels. Times are in 1/γ and lengths in meters. Only
//! the susceptibility prefactors, the propagation coefficients and the
//! phase shifts touch SI constants, and they need `gamma_si`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TripodError};

pub type C64 = Complex64;

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity (F/m).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Speed of light (m/s).
pub const C_LIGHT: f64 = 299_792_458.0;
/// 1 statvolt/cm expressed in V/m.
pub const STATVOLT_PER_CM_IN_V_PER_M: f64 = 29_979.245_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Beam {
    Probe,
    Trigger,
}

impl Beam {
    pub fn other(self) -> Beam {
        match self {
            Beam::Probe => Beam::Trigger,
            Beam::Trigger => Beam::Probe,
        }
    }
}

/// Circular polarization label of a photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    #[serde(rename = "sigma+")]
    SigmaPlus,
    #[serde(rename = "sigma-")]
    SigmaMinus,
}

impl Polarization {
    pub fn label(self) -> &'static str {
        match self {
            Polarization::SigmaPlus => "sigma+",
            Polarization::SigmaMinus => "sigma-",
        }
    }
}

/// Which unit system the susceptibility and phase prefactors are expressed in.
///
/// `Si` uses 𝒩|μ|²/(ħε₀) with refractive index n = 1 + χ/2. `Gaussian` uses
/// the 4π𝒩|μ|² form with n = 1 + 2πχ, so χ_G = χ_SI/(4π) for the same medium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Si,
    #[default]
    Gaussian,
}

impl Convention {
    /// Multiplier turning χ into the refractive-index increment n − 1.
    pub fn index_multiplier(self) -> f64 {
        match self {
            Convention::Si => 0.5,
            Convention::Gaussian => 2.0 * std::f64::consts::PI,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Convention::Si => "si",
            Convention::Gaussian => "gaussian",
        }
    }
}

/// Which form of the closed-form susceptibilities is evaluated.
///
/// `Printed` is a literal transcription including every printed conjugate.
/// `Corrected` uses the 1↔3 symmetric, sign-consistent lineshape cores that
/// agree with the Bloch steady state (absorption ⇔ Im χ > 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Transcription {
    Printed,
    #[default]
    Corrected,
}

/// Atomic detunings and decay rates, all in units of γ except `gamma` itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomParams {
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    /// Optical coherence decay γ_{j0}; the unit scale, 1 in γ units.
    #[serde(default = "one")]
    pub gamma: f64,
    /// Ground-state dephasing γ_{kj}.
    pub gamma_d: f64,
}

fn one() -> f64 {
    1.0
}

impl AtomParams {
    pub fn new(delta1: f64, delta2: f64, delta3: f64, gamma_d: f64) -> Self {
        AtomParams { delta1, delta2, delta3, gamma: 1.0, gamma_d }
    }

    pub fn resonant(gamma_d: f64) -> Self {
        Self::new(0.0, 0.0, 0.0, gamma_d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(TripodError::InvalidParams(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if !(self.gamma_d >= 0.0) || !self.gamma_d.is_finite() {
            return Err(TripodError::InvalidParams(format!("gamma_d must be >= 0, got {}", self.gamma_d)));
        }
        for (name, d) in [("delta1", self.delta1), ("delta2", self.delta2), ("delta3", self.delta3)] {
            if !d.is_finite() {
                return Err(TripodError::InvalidParams(format!("{name} must be finite")));
            }
        }
        Ok(())
    }
}

/// Rabi frequencies (γ units, stored as nonnegative magnitudes) and polarizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    pub omega_p: f64,
    pub omega_t: f64,
    pub omega_pump: f64,
    #[serde(default = "sigma_plus")]
    pub pol_p: Polarization,
    #[serde(default = "sigma_minus")]
    pub pol_t: Polarization,
}

fn sigma_plus() -> Polarization {
    Polarization::SigmaPlus
}
fn sigma_minus() -> Polarization {
    Polarization::SigmaMinus
}

impl FieldParams {
    pub fn new(omega_p: f64, omega_t: f64, omega_pump: f64) -> Self {
        FieldParams { omega_p, omega_t, omega_pump, pol_p: Polarization::SigmaPlus, pol_t: Polarization::SigmaMinus }
    }

    pub fn rabi(&self, beam: Beam) -> f64 {
        match beam {
            Beam::Probe => self.omega_p,
            Beam::Trigger => self.omega_t,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("omega_p", self.omega_p), ("omega_t", self.omega_t), ("omega_pump", self.omega_pump)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(TripodError::InvalidParams(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub(crate) fn require_pump(&self) -> Result<()> {
        if self.omega_pump > 0.0 {
            Ok(())
        } else {
            Err(TripodError::Degenerate("pump Rabi frequency must be > 0 for EIT quantities".into()))
        }
    }
}

/// Medium constants in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediumParams {
    /// Number density 𝒩 (m⁻³).
    pub density: f64,
    /// Sample length l (m).
    pub length: f64,
    pub lambda_p: f64,
    pub lambda_t: f64,
    /// Dipole matrix elements |μ| (C·m).
    pub dipole_p: f64,
    pub dipole_t: f64,
    /// Single-atom field couplings g (rad/s).
    pub g_p: f64,
    pub g_t: f64,
    /// Atom number N in the interaction volume.
    pub n_atoms: f64,
}

impl MediumParams {
    /// Builds a medium whose single-atom couplings follow from a mode of cross
    /// section `mode_area` (m²): g² = ωμ²/(2ħε₀V), V = area·l, N = 𝒩V.
    pub fn from_density(density: f64, length: f64, lambda: f64, dipole: f64, mode_area: f64) -> Self {
        let volume = mode_area * length;
        let omega = 2.0 * std::f64::consts::PI * C_LIGHT / lambda;
        let g = (omega * dipole * dipole / (2.0 * HBAR * EPSILON_0 * volume)).sqrt();
        MediumParams {
            density,
            length,
            lambda_p: lambda,
            lambda_t: lambda,
            dipole_p: dipole,
            dipole_t: dipole,
            g_p: g,
            g_t: g,
            n_atoms: density * volume,
        }
    }

    pub fn wavenumber(&self, beam: Beam) -> f64 {
        let lambda = match beam {
            Beam::Probe => self.lambda_p,
            Beam::Trigger => self.lambda_t,
        };
        2.0 * std::f64::consts::PI / lambda
    }

    pub fn dipole(&self, beam: Beam) -> f64 {
        match beam {
            Beam::Probe => self.dipole_p,
            Beam::Trigger => self.dipole_t,
        }
    }

    pub fn coupling(&self, beam: Beam) -> f64 {
        match beam {
            Beam::Probe => self.g_p,
            Beam::Trigger => self.g_t,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("density", self.density),
            ("length", self.length),
            ("lambda_p", self.lambda_p),
            ("lambda_t", self.lambda_t),
            ("dipole_p", self.dipole_p),
            ("dipole_t", self.dipole_t),
            ("g_p", self.g_p),
            ("g_t", self.g_t),
            ("n_atoms", self.n_atoms),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(TripodError::InvalidParams(format!("medium.{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// The six complex detunings Δ_{j0} = δ_j + iγ and Δ_{kj} = δ_j − δ_k − iγ_d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexDetunings {
    pub d10: C64,
    pub d20: C64,
    pub d30: C64,
    pub d12: C64,
    pub d13: C64,
    pub d23: C64,
}

impl ComplexDetunings {
    /// Δ_{21} = δ₁ − δ₂ − iγ_d, i.e. −Δ₁₂*.
    pub fn d21(&self) -> C64 {
        -self.d12.conj()
    }
    /// Δ_{31} = δ₁ − δ₃ − iγ_d.
    pub fn d31(&self) -> C64 {
        -self.d13.conj()
    }
    /// Δ_{32} = δ₂ − δ₃ − iγ_d.
    pub fn d32(&self) -> C64 {
        -self.d23.conj()
    }
}

pub fn complex_detunings(atom: &AtomParams) -> ComplexDetunings {
    let AtomParams { delta1, delta2, delta3, gamma, gamma_d } = *atom;
    let kj = |dk: f64, dj: f64| C64::new(dj - dk, -gamma_d);
    ComplexDetunings {
        d10: C64::new(delta1, gamma),
        d20: C64::new(delta2, gamma),
        d30: C64::new(delta3, gamma),
        d12: kj(delta1, delta2),
        d13: kj(delta1, delta3),
        d23: kj(delta2, delta3),
    }
}

/// Physical dimension of a quantity expressed in γ units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    /// Scales as γ (detunings, Rabi frequencies, rates).
    Frequency,
    /// Scales as 1/γ.
    Time,
    /// Scales as γ^n.
    Power(i32),
}

impl Dimension {
    fn exponent(self) -> i32 {
        match self {
            Dimension::Frequency => 1,
            Dimension::Time => -1,
            Dimension::Power(n) => n,
        }
    }
}

pub fn to_si(value: f64, gamma_si: f64, dim: Dimension) -> f64 {
    value * gamma_si.powi(dim.exponent())
}

pub fn from_si(value: f64, gamma_si: f64, dim: Dimension) -> f64 {
    value / gamma_si.powi(dim.exponent())
}

/// Everything a calculation needs in one bundle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub atom: AtomParams,
    pub fields: FieldParams,
    pub medium: MediumParams,
    #[serde(default)]
    pub convention: Convention,
    #[serde(default)]
    pub transcription: Transcription,
    /// γ in rad/s; required for anything reported in SI units.
    #[serde(default, rename = "gamma_si_rad_per_s")]
    pub gamma_si: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        self.atom.validate()?;
        self.fields.validate()?;
        self.medium.validate()?;
        if let Some(g) = self.gamma_si {
            if !(g > 0.0) || !g.is_finite() {
                return Err(TripodError::InvalidParams(format!("gamma_si_rad_per_s must be > 0, got {g}")));
            }
        }
        Ok(())
    }

    pub fn gamma_si(&self) -> Result<f64> {
        self.gamma_si.ok_or(TripodError::MissingGammaSi)
    }

    pub fn detunings(&self) -> ComplexDetunings {
        complex_detunings(&self.atom)
    }

    /// Parameter set of the π-phase operating point: Ω_P = Ω_T = γ, Ω = 4.5γ,
    /// δ = (10.01, 10, 10.02)γ, γ_d = 0.01γ, cold ⁸⁷Rb D1 medium.
    ///
    /// γ_si is not part of the published set; 2π·6.07 MHz is assumed.
    pub fn reference() -> Self {
        let mut medium = MediumParams::from_density(3.0e18, 0.007, 795.0e-9, 1.0e-29, 1.0e-8);
        medium.lambda_t = 795.0e-9;
        SystemParams {
            atom: AtomParams::new(10.01, 10.0, 10.02, 0.01),
            fields: FieldParams::new(1.0, 1.0, 4.5),
            medium,
            convention: Convention::Gaussian,
            transcription: Transcription::Corrected,
            gamma_si: Some(2.0 * std::f64::consts::PI * 6.07e6),
            seed: 0,
        }
    }
}
