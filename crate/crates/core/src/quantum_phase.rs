//! Quantized probe and trigger: per-photon phase shifts Φ = c·η·Δω and the
//! field expectation values after propagation for multimode coherent inputs.
//!
//! |α|²/Δω is treated as one dimensionless group (α per mode, Δω in rad/s).

use serde::Serialize;

use crate::error::{Result, TripodError};
use crate::params::{Beam, SystemParams, C64, C_LIGHT};
use crate::propagation::{coefficients, PropagationCoeffs};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct CoherentInput {
    pub alpha_p: C64,
    pub alpha_t: C64,
    /// rad/s
    pub delta_omega: f64,
}

impl CoherentInput {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_omega > 0.0) || !self.delta_omega.is_finite() {
            return Err(TripodError::InvalidParams(format!("delta_omega must be > 0, got {}", self.delta_omega)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantumPhases {
    pub phi_p: f64,
    pub phi_t: f64,
    /// c·Im(η)·Δω, reported beside the phase
    pub nonlinear_absorption_p: f64,
    pub nonlinear_absorption_t: f64,
    pub delta_omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantumPhaseResult {
    pub phi_p: f64,
    pub phi_t: f64,
    pub mean_e_p: C64,
    pub mean_e_t: C64,
    /// 2·sin²(Φ/2)·|α_other|²/Δω
    pub damping_p: f64,
    pub damping_t: f64,
}

/// Φ = c·Re(η)·Δω for both beams.
pub fn phases_from(coeffs: &PropagationCoeffs, delta_omega: f64) -> Result<QuantumPhases> {
    if !(delta_omega > 0.0) || !delta_omega.is_finite() {
        return Err(TripodError::InvalidParams(format!("delta_omega must be finite and > 0, got {delta_omega}")));
    }
    let f = |b: Beam| C_LIGHT * coeffs.eta(b) * delta_omega;
    let (p, t) = (f(Beam::Probe), f(Beam::Trigger));
    Ok(QuantumPhases {
        phi_p: p.re,
        phi_t: t.re,
        nonlinear_absorption_p: p.im,
        nonlinear_absorption_t: t.im,
        delta_omega,
    })
}

/// The narrower of the two transparency windows.
pub fn default_delta_omega(coeffs: &PropagationCoeffs) -> Result<f64> {
    let w = coeffs.dwtr_p.min(coeffs.dwtr_t);
    if w.is_finite() && w > 0.0 {
        Ok(w)
    } else {
        Err(TripodError::Degenerate("no finite transparency window; pass delta_omega explicitly".into()))
    }
}

/// Quantum phases for a parameter set; `delta_omega` defaults to the narrower
/// transparency window.
pub fn quantum_phase(p: &SystemParams, delta_omega: Option<f64>) -> Result<QuantumPhases> {
    let c = coefficients(p)?;
    let dw = match delta_omega {
        Some(v) => v,
        None => default_delta_omega(&c)?,
    };
    phases_from(&c, dw)
}

fn factor(phi: f64, n_other: f64, dw: f64) -> (C64, f64) {
    let s = (phi / 2.0).sin();
    let damping = 2.0 * s * s * n_other / dw;
    (C64::new(-damping, phi.sin() * n_other / dw).exp(), damping)
}

/// ⟨E_P⟩ = α_P·exp{[−2sin²(Φ_P/2) + i·sinΦ_P]·|α_T|²/Δω} and the mirror image for the trigger.
pub fn coherent_expectation(input: &CoherentInput, phi_p: f64, phi_t: f64) -> Result<QuantumPhaseResult> {
    input.validate()?;
    let (fp, dp) = factor(phi_p, input.alpha_t.norm_sqr(), input.delta_omega);
    let (ft, dt) = factor(phi_t, input.alpha_p.norm_sqr(), input.delta_omega);
    Ok(QuantumPhaseResult {
        phi_p,
        phi_t,
        mean_e_p: input.alpha_p * fp,
        mean_e_t: input.alpha_t * ft,
        damping_p: dp,
        damping_t: dt,
    })
}
