//! Closed-form linear and cross-Kerr susceptibilities of probe and trigger.
//!
//! Every susceptibility is a prefactor times a dimensionless lineshape core
//! evaluated in γ units. The cores come in two forms (see [`Transcription`]):
//! the literal printed expressions, and the 1↔3 symmetric, sign-consistent
//! form that the Bloch steady state reproduces.

use serde::Serialize;

use crate::error::{Result, TripodError};
use crate::params::{
    complex_detunings, AtomParams, Beam, ComplexDetunings, Convention, FieldParams, MediumParams, SystemParams,
    Transcription, C64, EPSILON_0, HBAR, STATVOLT_PER_CM_IN_V_PER_M,
};

/// Steady-state population assumed in each of |1⟩ and |3⟩.
pub const POP_SYMMETRIC: f64 = 0.5;

/// Denominators smaller than this (γ² units) are reported as poles.
pub const POLE_TOLERANCE: f64 = 1e-9;

/// Dimensionless lineshape cores (γ units, prefactors stripped).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineshapeCores {
    pub lin_p: C64,
    pub lin_t: C64,
    pub cub_p: C64,
    pub cub_t: C64,
}

fn guard(what: &'static str, den: C64) -> Result<C64> {
    if den.norm() < POLE_TOLERANCE {
        Err(TripodError::PoleProximity { what, magnitude: den.norm() })
    } else {
        Ok(den)
    }
}

/// Linear cores (χ⁽¹⁾ without prefactor). Only the pump enters.
pub fn linear_cores(d: &ComplexDetunings, omega_pump: f64, form: Transcription) -> Result<(C64, C64)> {
    let o2 = omega_pump * omega_pump;
    match form {
        Transcription::Printed => {
            let den_p = guard("chi1 probe", d.d10 * d.d12 - o2)?;
            let den_t = guard("chi1 trigger", d.d30 * d.d23.conj() - o2)?;
            Ok((POP_SYMMETRIC * d.d12 / den_p, POP_SYMMETRIC * d.d23.conj() / den_t))
        }
        Transcription::Corrected => {
            let (cp, ct) = corrected_full_cores(d, o2)?;
            Ok((POP_SYMMETRIC * cp, POP_SYMMETRIC * ct))
        }
    }
}

// c_P = Δ21/(Δ10*Δ21 − |Ω|²), c_T = Δ23/(Δ30*Δ23 − |Ω|²)
fn corrected_full_cores(d: &ComplexDetunings, o2: f64) -> Result<(C64, C64)> {
    let den_p = guard("chi1 probe", d.d10.conj() * d.d21() - o2)?;
    let den_t = guard("chi1 trigger", d.d30.conj() * d.d23 - o2)?;
    Ok((d.d21() / den_p, d.d23 / den_t))
}

/// All four cores.
pub fn lineshape_cores(atom: &AtomParams, omega_pump: f64, form: Transcription) -> Result<LineshapeCores> {
    let d = complex_detunings(atom);
    let o2 = omega_pump * omega_pump;
    let (lin_p, lin_t) = linear_cores(&d, omega_pump, form)?;
    let (cub_p, cub_t) = match form {
        Transcription::Printed => {
            if d.d13.norm() < POLE_TOLERANCE {
                return Err(TripodError::Degenerate(
                    "Delta_13 = 0: chi3 is singular (delta1 = delta3, gamma_d = 0)".into(),
                ));
            }
            let den_p = guard("chi3 probe", d.d10 * d.d12 - o2)?;
            let den_p2 = guard("chi3 probe", d.d30.conj() * d.d23 - o2)?;
            let cub_p = POP_SYMMETRIC * (d.d12 / d.d13) / den_p * (d.d12 / den_p + d.d23 / den_p2);
            let den_t = guard("chi3 trigger", d.d30 * d.d23.conj() - o2)?;
            let den_t2 = guard("chi3 trigger", d.d10.conj() * d.d12.conj() - o2)?;
            let cub_t = POP_SYMMETRIC * (d.d23.conj() / d.d13.conj()) / den_t * (d.d12 / den_t2 + d.d23.conj() / den_t);
            (cub_p, cub_t)
        }
        Transcription::Corrected => {
            if d.d13.norm() < POLE_TOLERANCE {
                return Err(TripodError::Degenerate(
                    "Delta_13 = 0: chi3 is singular (delta1 = delta3, gamma_d = 0)".into(),
                ));
            }
            let (cp, ct) = corrected_full_cores(&d, o2)?;
            let den_p = d.d10.conj() * d.d21() - o2;
            let den_t = d.d30.conj() * d.d23 - o2;
            let cub_p = POP_SYMMETRIC * (d.d21() / d.d31()) / den_p * (cp - ct.conj());
            let cub_t = POP_SYMMETRIC * (d.d23 / d.d13) / den_t * (ct - cp.conj());
            (cub_p, cub_t)
        }
    };
    Ok(LineshapeCores { lin_p, lin_t, cub_p, cub_t })
}

/// Prefactor of χ⁽¹⁾ for one beam: 𝒩|μ|²/(ħε₀γ) in SI, divided by 4π in Gaussian.
pub fn linear_prefactor(medium: &MediumParams, beam: Beam, convention: Convention, gamma_si: f64) -> f64 {
    let mu = medium.dipole(beam);
    let si = medium.density * mu * mu / (HBAR * EPSILON_0 * gamma_si);
    match convention {
        Convention::Si => si,
        Convention::Gaussian => si / (4.0 * std::f64::consts::PI),
    }
}

/// Prefactor of χ⁽³⁾: 𝒩|μ_P|²|μ_T|²/(ħ³ε₀γ³) in SI (m²/V²); in Gaussian
/// (cm²/statV²) chosen so that χ⁽³⁾_G|E_G|² = χ⁽³⁾_SI|E_SI|²/(4π).
pub fn cubic_prefactor(medium: &MediumParams, convention: Convention, gamma_si: f64) -> f64 {
    let (mp, mt) = (medium.dipole_p, medium.dipole_t);
    let si = medium.density * mp * mp * mt * mt / (HBAR.powi(3) * EPSILON_0 * gamma_si.powi(3));
    match convention {
        Convention::Si => si,
        Convention::Gaussian => si * STATVOLT_PER_CM_IN_V_PER_M.powi(2) / (4.0 * std::f64::consts::PI),
    }
}

/// |E|² of a field whose Rabi frequency is `omega` (γ units), E = ħΩ/|μ|.
/// Returned in (V/m)² for SI and (statV/cm)² for Gaussian.
pub fn field_intensity(omega: f64, dipole: f64, convention: Convention, gamma_si: f64) -> f64 {
    let e = HBAR * omega * gamma_si / dipole;
    match convention {
        Convention::Si => e * e,
        Convention::Gaussian => (e / STATVOLT_PER_CM_IN_V_PER_M).powi(2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Susceptibilities {
    pub chi1_p: C64,
    pub chi1_t: C64,
    pub chi3_p: C64,
    pub chi3_t: C64,
    pub convention: Convention,
    pub transcription: Transcription,
    pub cores: LineshapeCores,
}

impl Susceptibilities {
    pub fn chi1(&self, beam: Beam) -> C64 {
        match beam {
            Beam::Probe => self.chi1_p,
            Beam::Trigger => self.chi1_t,
        }
    }

    pub fn chi3(&self, beam: Beam) -> C64 {
        match beam {
            Beam::Probe => self.chi3_p,
            Beam::Trigger => self.chi3_t,
        }
    }
}

pub fn susceptibilities(p: &SystemParams) -> Result<Susceptibilities> {
    susceptibilities_in(p, p.convention)
}

pub fn susceptibilities_in(p: &SystemParams, convention: Convention) -> Result<Susceptibilities> {
    p.fields.require_pump()?;
    let g = p.gamma_si()?;
    let cores = lineshape_cores(&p.atom, p.fields.omega_pump, p.transcription)?;
    let k3 = cubic_prefactor(&p.medium, convention, g);
    Ok(Susceptibilities {
        chi1_p: cores.lin_p * linear_prefactor(&p.medium, Beam::Probe, convention, g),
        chi1_t: cores.lin_t * linear_prefactor(&p.medium, Beam::Trigger, convention, g),
        chi3_p: cores.cub_p * k3,
        chi3_t: cores.cub_t * k3,
        convention,
        transcription: p.transcription,
        cores,
    })
}

/// Linear susceptibility of one beam.
pub fn chi1(beam: Beam, p: &SystemParams) -> Result<C64> {
    p.fields.require_pump()?;
    let g = p.gamma_si()?;
    let (lp, lt) = linear_cores(&complex_detunings(&p.atom), p.fields.omega_pump, p.transcription)?;
    let core = if beam == Beam::Probe { lp } else { lt };
    Ok(core * linear_prefactor(&p.medium, beam, p.convention, g))
}

/// Cross-Kerr susceptibility of one beam.
pub fn chi3(beam: Beam, p: &SystemParams) -> Result<C64> {
    Ok(susceptibilities(p)?.chi3(beam))
}

/// Total weak-field susceptibility χ⁽¹⁾ + χ⁽³⁾|E_other|² with the other beam
/// at its configured Rabi frequency.
pub fn perturbative_chi(beam: Beam, p: &SystemParams, convention: Convention) -> Result<C64> {
    let s = susceptibilities_in(p, convention)?;
    let other = beam.other();
    let e2 = field_intensity(p.fields.rabi(other), p.medium.dipole(other), convention, p.gamma_si()?);
    Ok(s.chi1(beam) + s.chi3(beam) * e2)
}

/// Intensity attenuation exponent over a length `l`: 2·k·l·Im(n − 1) with the
/// same index multiplier the linear phase uses.
pub fn absorption(chi: C64, k: f64, l: f64, convention: Convention) -> f64 {
    2.0 * k * l * convention.index_multiplier() * chi.im
}

/// Field-independent linear cores for a bare atom/pump configuration; used by scans.
pub fn linear_core(beam: Beam, atom: &AtomParams, fields: &FieldParams, form: Transcription) -> Result<C64> {
    let (lp, lt) = linear_cores(&complex_detunings(atom), fields.omega_pump, form)?;
    Ok(if beam == Beam::Probe { lp } else { lt })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cores(atom: AtomParams, form: Transcription) -> LineshapeCores {
        lineshape_cores(&atom, 4.5, form).unwrap()
    }

    #[test]
    fn eit_point_vanishes() {
        for form in [Transcription::Printed, Transcription::Corrected] {
            let c = linear_cores(&complex_detunings(&AtomParams::resonant(0.0)), 4.5, form).unwrap();
            assert_eq!(c.0.norm(), 0.0);
            assert_eq!(c.1.norm(), 0.0);
            let c = linear_cores(&complex_detunings(&AtomParams::new(3.0, 3.0, 3.0, 0.0)), 4.5, form).unwrap();
            assert_eq!(c.0.norm(), 0.0);
            assert_eq!(c.1.norm(), 0.0);
        }
    }

    #[test]
    fn resonant_dephasing_core() {
        // δ = 0, γ_d = 0.01: corrected core is ½·iγ_d/(Ω² + γγ_d)
        let gd = 0.01;
        let c = cores(AtomParams::resonant(gd), Transcription::Corrected);
        assert_relative_eq!(c.lin_p.im, 0.5 * gd / (20.25 + gd), max_relative = 1e-14);
        assert!(c.lin_p.re.abs() < 1e-18);
        // printed form: ½·Im[(−iγ_d)/(iγ·(−iγ_d) − Ω²)] = ½γ_d/(Ω² − γγ_d)
        let c = cores(AtomParams::resonant(gd), Transcription::Printed);
        assert_relative_eq!(c.lin_p.im, 0.5 * gd / (20.25 - gd), max_relative = 1e-14);
    }

    #[test]
    fn kerr_vanishes_on_two_photon_resonance() {
        for form in [Transcription::Printed, Transcription::Corrected] {
            let c = cores(AtomParams::new(1.0, 1.0, 1.5, 0.0), form);
            assert_eq!(c.cub_p.norm(), 0.0);
        }
    }

    #[test]
    fn degenerate_delta13_rejected() {
        let r = lineshape_cores(&AtomParams::new(1.0, 0.5, 1.0, 0.0), 4.5, Transcription::Corrected);
        assert!(matches!(r, Err(TripodError::Degenerate(_))));
    }

    #[test]
    fn pole_reported() {
        // Printed probe denominator Δ10Δ12 − Ω² vanishes only for complex inputs; the
        // corrected one has real Autler–Townes roots at δ₁(δ₁ − δ₂) = Ω² when γ → 0.
        let d = ComplexDetunings {
            d10: C64::new(2.0, 0.0),
            d20: C64::new(0.0, 0.0),
            d30: C64::new(0.0, 1.0),
            d12: C64::new(-2.0, 0.0),
            d13: C64::new(1.0, 0.0),
            d23: C64::new(3.0, 0.0),
        };
        assert!(matches!(linear_cores(&d, 2.0, Transcription::Corrected), Err(TripodError::PoleProximity { .. })));
    }

    #[test]
    fn kerr_coefficients_equal_for_mirrored_detunings() {
        let c = cores(AtomParams::new(10.01, 10.0, 10.01, 0.01), Transcription::Corrected);
        assert_relative_eq!((c.cub_p - c.cub_t).norm(), 0.0, epsilon = 1e-15);
        assert!(c.cub_p.norm() > 0.0);
    }

    #[test]
    fn corrected_forms_are_mirror_symmetric() {
        let a = AtomParams::new(0.3, -0.2, 1.1, 0.02);
        let b = AtomParams::new(1.1, -0.2, 0.3, 0.02);
        let ca = cores(a, Transcription::Corrected);
        let cb = cores(b, Transcription::Corrected);
        assert_relative_eq!((ca.lin_p - cb.lin_t).norm(), 0.0, epsilon = 1e-15);
        assert_relative_eq!((ca.cub_p - cb.cub_t).norm(), 0.0, epsilon = 1e-15);
        assert_relative_eq!((ca.cub_t - cb.cub_p).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn absorption_linear_in_length() {
        let chi = C64::new(0.0, 1e-6);
        assert_eq!(absorption(C64::new(3.0, 0.0), 1e7, 0.01, Convention::Si), 0.0);
        let a1 = absorption(chi, 1e7, 0.01, Convention::Si);
        let a2 = absorption(chi, 1e7, 0.02, Convention::Si);
        assert_relative_eq!(a2, 2.0 * a1);
        // same medium, same exponent in both conventions
        assert_relative_eq!(
            absorption(chi, 1e7, 0.01, Convention::Si),
            absorption(chi / (4.0 * std::f64::consts::PI), 1e7, 0.01, Convention::Gaussian),
            max_relative = 1e-14
        );
    }

    #[test]
    fn conventions_describe_same_medium() {
        let p = SystemParams::reference();
        let si = susceptibilities_in(&p, Convention::Si).unwrap();
        let g = susceptibilities_in(&p, Convention::Gaussian).unwrap();
        let n_si = si.chi1_p * Convention::Si.index_multiplier();
        let n_g = g.chi1_p * Convention::Gaussian.index_multiplier();
        assert_relative_eq!((n_si - n_g).norm(), 0.0, epsilon = 1e-14 * n_si.norm());
        let gs = p.gamma_si.unwrap();
        let e_si = field_intensity(1.0, p.medium.dipole_t, Convention::Si, gs);
        let e_g = field_intensity(1.0, p.medium.dipole_t, Convention::Gaussian, gs);
        let kerr_si = si.chi3_p * e_si;
        let kerr_g = g.chi3_p * e_g;
        assert_relative_eq!(kerr_g.re, kerr_si.re / (4.0 * std::f64::consts::PI), max_relative = 1e-12);
    }

    #[test]
    fn missing_gamma_si() {
        let mut p = SystemParams::reference();
        p.gamma_si = None;
        assert_eq!(susceptibilities(&p).unwrap_err(), TripodError::MissingGammaSi);
    }

    #[test]
    fn autler_townes_doublet() {
        // scan δ₁ at δ₂ = 0, γ_d = 0: |χ⁽¹⁾| peaks near δ₁ = ±Ω (Re(Δ10*Δ21) = Ω²)
        let om = 3.0;
        let scan: Vec<(f64, f64)> = (0..=1200)
            .map(|i| -6.0 + i as f64 * 0.01)
            .map(|d1| {
                let c =
                    linear_cores(&complex_detunings(&AtomParams::new(d1, 0.0, 0.3, 0.0)), om, Transcription::Corrected)
                        .unwrap();
                (d1, c.0.norm())
            })
            .collect();
        let peaks: Vec<f64> = scan.windows(3).filter(|w| w[1].1 > w[0].1 && w[1].1 > w[2].1).map(|w| w[1].0).collect();
        assert_eq!(peaks.len(), 2, "{peaks:?}");
        // with γ = 1 the poles sit at δ₁ = ±√(Ω² + ...) to leading order
        assert!((peaks[0] + om).abs() < 0.2 && (peaks[1] - om).abs() < 0.2, "{peaks:?}");
    }
}
