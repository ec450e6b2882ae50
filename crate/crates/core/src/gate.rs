//! Polarization phase gate: truth table, conditional phase, the absorption
//! versus dephasing scan and Monte Carlo gate error under intensity noise.
//!
//! A basis state |p⟩_P|t⟩_T picks up e^{−iφ}; every phase below is the φ in
//! that exponent, unwrapped.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, TripodError};
use crate::params::{AtomParams, Beam, Convention, FieldParams, Polarization, SystemParams};
use crate::propagation::{coefficients, default_pulses, default_tau, nonlinear_phase, PulseSpec};
use crate::susceptibility::{linear_core, susceptibilities_in};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseShifts {
    /// k·l
    pub phi0_p: f64,
    pub phi0_t: f64,
    /// k·l·(1 + mult·Re χ⁽¹⁾) in `convention`
    pub phi_lin_p: f64,
    pub phi_lin_t: f64,
    /// Same, evaluated with the other convention's χ and multiplier.
    pub phi_lin_alt_p: f64,
    pub phi_lin_alt_t: f64,
    pub phi_nlin_p: f64,
    pub phi_nlin_t: f64,
    pub phi_nlin_alt_p: f64,
    pub phi_nlin_alt_t: f64,
    pub convention: Convention,
}

/// One basis state's phase split into vacuum, linear-excess and nonlinear parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableEntry {
    pub pol_p: Polarization,
    pub pol_t: Polarization,
    pub vacuum: f64,
    /// φ_lin − φ₀ summed over the beams that see the medium
    pub linear: f64,
    pub nonlinear: f64,
    pub total: f64,
}

impl TableEntry {
    fn new(pol_p: Polarization, pol_t: Polarization, vacuum: f64, linear: f64, nonlinear: f64) -> Self {
        TableEntry { pol_p, pol_t, vacuum, linear, nonlinear, total: vacuum + linear + nonlinear }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateTruthTable {
    /// Order: (σ⁻,σ⁻), (σ⁻,σ⁺), (σ⁺,σ⁺), (σ⁺,σ⁻).
    pub entries: [TableEntry; 4],
    pub phases: PhaseShifts,
}

use Polarization::{SigmaMinus as M, SigmaPlus as P};

impl GateTruthTable {
    /// Only σ⁺ probe photons see the probe transition and only σ⁻ trigger
    /// photons see the trigger one.
    pub fn from_phases(s: PhaseShifts) -> Self {
        let (v, lp, lt) = (s.phi0_p + s.phi0_t, s.phi_lin_p - s.phi0_p, s.phi_lin_t - s.phi0_t);
        GateTruthTable {
            entries: [
                TableEntry::new(M, M, v, lt, 0.0),
                TableEntry::new(M, P, v, 0.0, 0.0),
                TableEntry::new(P, P, v, lp, 0.0),
                TableEntry::new(P, M, v, lp + lt, s.phi_nlin_p + s.phi_nlin_t),
            ],
            phases: s,
        }
    }

    pub fn entry(&self, pol_p: Polarization, pol_t: Polarization) -> &TableEntry {
        self.entries.iter().find(|e| e.pol_p == pol_p && e.pol_t == pol_t).expect("table has all four entries")
    }
}

/// Phase shifts for a parameter set and pulse pair.
pub fn phase_shifts(p: &SystemParams, pulses: &[PulseSpec; 2], convention: Convention) -> Result<PhaseShifts> {
    let coeffs = coefficients(p)?;
    let alt = match convention {
        Convention::Si => Convention::Gaussian,
        Convention::Gaussian => Convention::Si,
    };
    let lin = |conv: Convention| -> Result<[f64; 2]> {
        let s = susceptibilities_in(p, conv)?;
        Ok([Beam::Probe, Beam::Trigger].map(|b| {
            let kl = p.medium.wavenumber(b) * p.medium.length;
            kl * (1.0 + conv.index_multiplier() * s.chi1(b).re)
        }))
    };
    let nlin = |conv: Convention| -> Result<[f64; 2]> {
        Ok([
            nonlinear_phase(Beam::Probe, p, &coeffs, pulses, conv)?.phi,
            nonlinear_phase(Beam::Trigger, p, &coeffs, pulses, conv)?.phi,
        ])
    };
    let (l, la, n, na) = (lin(convention)?, lin(alt)?, nlin(convention)?, nlin(alt)?);
    Ok(PhaseShifts {
        phi0_p: p.medium.wavenumber(Beam::Probe) * p.medium.length,
        phi0_t: p.medium.wavenumber(Beam::Trigger) * p.medium.length,
        phi_lin_p: l[0],
        phi_lin_t: l[1],
        phi_lin_alt_p: la[0],
        phi_lin_alt_t: la[1],
        phi_nlin_p: n[0],
        phi_nlin_t: n[1],
        phi_nlin_alt_p: na[0],
        phi_nlin_alt_t: na[1],
        convention,
    })
}

pub fn truth_table(p: &SystemParams, pulses: &[PulseSpec; 2], convention: Convention) -> Result<GateTruthTable> {
    Ok(GateTruthTable::from_phases(phase_shifts(p, pulses, convention)?))
}

/// φ₊^P + φ₋^T − φ_lin^P − φ_lin^T, i.e. φ(σ⁺,σ⁻) − φ(σ⁺,σ⁺) − φ(σ⁻,σ⁻) + φ(σ⁻,σ⁺).
///
/// Evaluated part by part so the ~10⁵ rad vacuum phases cancel exactly.
pub fn conditional_phase(table: &GateTruthTable) -> f64 {
    let part = |f: fn(&TableEntry) -> f64| {
        (f(table.entry(P, M)) - f(table.entry(P, P))) - (f(table.entry(M, M)) - f(table.entry(M, P)))
    };
    part(|e| e.vacuum) + part(|e| e.linear) + part(|e| e.nonlinear)
}

/// The same conditional phase evaluated in the other convention, and the ratio
/// between the two.
pub fn conditional_phase_alt(table: &GateTruthTable) -> (f64, f64) {
    let s = &table.phases;
    let alt = s.phi_nlin_alt_p + s.phi_nlin_alt_t;
    (alt, alt / conditional_phase(table))
}

/// Absorption-scan operating point: δ_j = 0, Ω_P = Ω_T = γ, Ω = 4.5γ.
pub fn fig2_fields() -> FieldParams {
    FieldParams::new(1.0, 1.0, 4.5)
}

/// γ_d samples spanning [0, 0.1γ].
pub fn fig2_range(points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![0.0],
        n => (0..n).map(|k| 0.1 * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Weak-probe absorption Im χ⁽¹⁾_P at each dephasing rate, normalized to the
/// largest value in the range. The detunings of `atom` are kept; its γ_d is replaced.
pub fn absorption_scan(gamma_d: &[f64], atom: &AtomParams, fields: &FieldParams) -> Result<Vec<(f64, f64)>> {
    let raw = gamma_d
        .iter()
        .map(|&g| {
            let a = AtomParams { gamma_d: g, ..*atom };
            a.validate()?;
            Ok((g, linear_core(Beam::Probe, &a, fields, crate::params::Transcription::Corrected)?.im))
        })
        .collect::<Result<Vec<_>>>()?;
    let max = raw.iter().map(|r| r.1).fold(0.0f64, f64::max);
    Ok(if max > 0.0 { raw.into_iter().map(|(g, a)| (g, a / max)).collect() } else { raw })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct NoiseModel {
    /// Relative standard deviation of each intensity.
    pub level: f64,
    pub samples: usize,
    pub seed: u64,
    /// Which of |Ω_P|², |Ω_T|², |Ω|² fluctuate.
    pub fluctuate: [bool; 3],
}

impl NoiseModel {
    pub fn new(level: f64, samples: usize, seed: u64) -> Self {
        NoiseModel { level, samples, seed, fluctuate: [true; 3] }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.level >= 0.0) || !self.level.is_finite() {
            return Err(TripodError::InvalidParams(format!("noise level must be >= 0, got {}", self.level)));
        }
        if self.samples == 0 {
            return Err(TripodError::InvalidParams("samples must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McResult {
    pub level: f64,
    pub samples: usize,
    pub seed: u64,
    pub nominal_phase: f64,
    /// 1 − mean cos²(Δφ/2); local phases treated as correctable.
    pub error: f64,
    pub std_error: f64,
    /// 95% normal interval on `error`.
    pub ci95: [f64; 2],
    /// 1 − mean |¼Σ e^{−iΔφ_ab}|² over the equal superposition, no local correction.
    pub error_uncorrected: f64,
    pub std_error_uncorrected: f64,
    pub dphi_mean: f64,
    pub dphi_std: f64,
    /// 5%, 25%, 50%, 75%, 95%.
    pub dphi_quantiles: [f64; 5],
    pub failed: usize,
    pub failed_pole: usize,
    pub failed_other: usize,
    /// Conditional-phase deviations of the successful samples, in sample order.
    #[serde(skip)]
    pub dphi: Vec<f64>,
}

enum Sample {
    Ok { dphi: f64, uncorrected: f64 },
    Pole,
    Other,
}

fn perturbed(p: &SystemParams, pulses: &[PulseSpec; 2], m: [f64; 3]) -> (SystemParams, [PulseSpec; 2]) {
    let mut q = *p;
    let mut ps = *pulses;
    let s = m.map(f64::sqrt);
    q.fields.omega_p *= s[0];
    q.fields.omega_t *= s[1];
    q.fields.omega_pump *= s[2];
    for pulse in ps.iter_mut() {
        pulse.peak_rabi *= if pulse.beam == Beam::Probe { s[0] } else { s[1] };
    }
    (q, ps)
}

fn totals(t: &GateTruthTable) -> [f64; 4] {
    t.entries.map(|e| e.total)
}

/// Monte Carlo gate error under independent Gaussian intensity fluctuations.
///
/// Sample i draws from its own ChaCha8 stream (seed, stream i), so results do
/// not depend on thread scheduling and a fixed seed reproduces bit-exactly.
pub fn gate_error_mc(
    noise: &NoiseModel,
    p: &SystemParams,
    pulses: &[PulseSpec; 2],
    convention: Convention,
) -> Result<McResult> {
    noise.validate()?;
    let nominal = truth_table(p, pulses, convention)?;
    let phi0 = conditional_phase(&nominal);
    let t0 = totals(&nominal);

    let draws: Vec<Sample> = (0..noise.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
            rng.set_stream(i as u64);
            let mut m = [1.0; 3];
            for (k, mk) in m.iter_mut().enumerate() {
                let z: f64 = StandardNormal.sample(&mut rng);
                if noise.fluctuate[k] {
                    *mk = 1.0 + noise.level * z;
                }
            }
            if m.iter().any(|&x| x <= 0.0) {
                return Sample::Other;
            }
            let (q, ps) = perturbed(p, pulses, m);
            match truth_table(&q, &ps, convention) {
                Ok(t) => {
                    let dphi = conditional_phase(&t) - phi0;
                    let tt = totals(&t);
                    let amp: crate::params::C64 =
                        (0..4).map(|k| crate::params::C64::from_polar(0.25, -(tt[k] - t0[k]))).sum();
                    if dphi.is_finite() && amp.norm().is_finite() {
                        Sample::Ok { dphi, uncorrected: amp.norm_sqr() }
                    } else {
                        Sample::Other
                    }
                }
                Err(TripodError::PoleProximity { .. }) => Sample::Pole,
                Err(_) => Sample::Other,
            }
        })
        .collect();

    let (mut dphi, mut unc) = (Vec::with_capacity(draws.len()), Vec::with_capacity(draws.len()));
    let (mut pole, mut other) = (0, 0);
    for d in &draws {
        match *d {
            Sample::Ok { dphi: x, uncorrected } => {
                dphi.push(x);
                unc.push(1.0 - uncorrected);
            }
            Sample::Pole => pole += 1,
            Sample::Other => other += 1,
        }
    }
    if dphi.is_empty() {
        return Err(TripodError::Numerical("every Monte Carlo sample failed".into()));
    }
    let err: Vec<f64> = dphi.iter().map(|x| (x / 2.0).sin().powi(2)).collect();
    let (e, se) = mean_se(&err);
    let (eu, seu) = mean_se(&unc);
    let (dm, _) = mean_se(&dphi);
    let dstd = if dphi.len() > 1 {
        (dphi.iter().map(|x| (x - dm).powi(2)).sum::<f64>() / (dphi.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut sorted = dphi.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(McResult {
        level: noise.level,
        samples: noise.samples,
        seed: noise.seed,
        nominal_phase: phi0,
        error: e,
        std_error: se,
        ci95: [e - 1.96 * se, e + 1.96 * se],
        error_uncorrected: eu,
        std_error_uncorrected: seu,
        dphi_mean: dm,
        dphi_std: dstd,
        dphi_quantiles: [0.05, 0.25, 0.5, 0.75, 0.95].map(|q| quantile(&sorted, q)),
        failed: pole + other,
        failed_pole: pole,
        failed_other: other,
        dphi,
    })
}

/// Gate error with the default pulses (τ = 10/min Δω_tr).
pub fn gate_error_mc_default(noise: &NoiseModel, p: &SystemParams, convention: Convention) -> Result<McResult> {
    let tau = default_tau(&coefficients(p)?);
    gate_error_mc(noise, p, &default_pulses(p, tau), convention)
}

fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (m, 0.0);
    }
    let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

// linear interpolation between order statistics
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Equal-width histogram of Δφ: (bin center, count).
pub fn histogram(x: &[f64], bins: usize) -> Vec<(f64, usize)> {
    if x.is_empty() || bins == 0 {
        return vec![];
    }
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for &v in x {
        counts[(((v - lo) / w) as usize).min(bins - 1)] += 1;
    }
    counts.into_iter().enumerate().map(|(k, c)| (lo + (k as f64 + 0.5) * w, c)).collect()
}
