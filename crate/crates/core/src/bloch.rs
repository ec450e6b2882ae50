//! Lindblad master equation for the tripod: Liouvillian, steady state,
//! time evolution and the susceptibility read off the steady-state coherences.
//!
//! Density matrices are vectorized row-major, `vec[4*i + j] = ρ_ij`, so
//! `(A ⊗ B) vec(ρ) = vec(A ρ Bᵀ)`.
//!
//! Decay model: |0⟩ decays at total rate Γ = 2γ − γ_d with branching
//! [`DecayModel::branching`] into |1⟩, |2⟩, |3⟩; each ground state carries a
//! pure-dephasing jump √γ_d |k⟩⟨k|. Together every optical coherence ρ_{j0}
//! decays at exactly γ and every ground coherence ρ_{kj} at exactly γ_d.

use nalgebra::{Matrix4, SMatrix, SVector};
use serde::Serialize;

use crate::dressed::{interaction_hamiltonian, Hamiltonian4};
use crate::error::{Result, TripodError};
use crate::params::{AtomParams, Beam, Convention, FieldParams, MediumParams, C64};
use crate::susceptibility::linear_prefactor;

pub type Super = SMatrix<C64, 16, 16>;
pub type SuperVec = SVector<C64, 16>;

/// Equal branching of spontaneous emission from |0⟩.
pub const EQUAL_BRANCHING: [f64; 3] = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayModel {
    /// Fractions of the |0⟩ decay landing in |1⟩, |2⟩, |3⟩; must sum to 1.
    pub branching: [f64; 3],
}

impl Default for DecayModel {
    fn default() -> Self {
        DecayModel { branching: EQUAL_BRANCHING }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(pub Matrix4<C64>);

impl DensityMatrix {
    pub fn pure(amplitudes: &nalgebra::Vector4<C64>) -> Self {
        DensityMatrix(amplitudes * amplitudes.adjoint())
    }

    pub fn basis(j: usize) -> Self {
        let mut m = Matrix4::zeros();
        m[(j, j)] = C64::new(1.0, 0.0);
        DensityMatrix(m)
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Matrix4::identity() * C64::new(0.25, 0.0))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn population(&self, j: usize) -> f64 {
        self.0[(j, j)].re
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.0 - self.0.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let h = (self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        [ev[0], ev[1], ev[2], ev[3]]
    }

    /// Checks Hermiticity, unit trace and positivity at the given tolerances.
    pub fn validate(&self, tol: f64, psd_tol: f64) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > tol {
            return Err(TripodError::Numerical(format!("density matrix not Hermitian ({herm:e})")));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol {
            return Err(TripodError::Numerical(format!("density matrix trace {tr}")));
        }
        let min = self.eigenvalues()[0];
        if min < -psd_tol {
            return Err(TripodError::Numerical(format!("density matrix eigenvalue {min:e} < 0")));
        }
        Ok(())
    }

    pub fn to_vec(&self) -> SuperVec {
        SuperVec::from_fn(|k, _| self.0[(k / 4, k % 4)])
    }

    pub fn from_vec(v: &SuperVec) -> Self {
        DensityMatrix(Matrix4::from_fn(|i, j| v[4 * i + j]))
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let re: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| self.0[(i, j)].re).collect()).collect();
        let im: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| self.0[(i, j)].im).collect()).collect();
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("DensityMatrix", 2)?;
        st.serialize_field("re", &re)?;
        st.serialize_field("im", &im)?;
        st.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Liouvillian(pub Super);

impl Liouvillian {
    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::from_vec(&(self.0 * rho.to_vec()))
    }

    /// Largest |Σ_i L_{ii,k}| over columns k: zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        (0..16).map(|k| (0..4).map(|i| self.0[(5 * i, k)]).sum::<C64>().norm()).fold(0.0, f64::max)
    }
}

fn kron(a: &Matrix4<C64>, b: &Matrix4<C64>) -> Super {
    Super::from_fn(|r, c| a[(r / 4, c / 4)] * b[(r % 4, c % 4)])
}

fn dissipator(c: &Matrix4<C64>) -> Super {
    let id = Matrix4::<C64>::identity();
    let cdc = c.adjoint() * c;
    kron(c, &c.conjugate()) - (kron(&cdc, &id) + kron(&id, &cdc.transpose())) * C64::new(0.5, 0.0)
}

fn jump(to: usize, from: usize, rate: f64) -> Matrix4<C64> {
    let mut m = Matrix4::zeros();
    m[(to, from)] = C64::new(rate.sqrt(), 0.0);
    m
}

/// Total spontaneous decay rate of |0⟩ that keeps γ_{j0} = γ exactly.
pub fn spontaneous_rate(atom: &AtomParams) -> f64 {
    2.0 * atom.gamma - atom.gamma_d
}

pub fn liouvillian_from(h: &Hamiltonian4, atom: &AtomParams, model: &DecayModel) -> Result<Liouvillian> {
    atom.validate()?;
    let total = spontaneous_rate(atom);
    if total < 0.0 {
        return Err(TripodError::InvalidParams(format!(
            "gamma_d = {} exceeds 2*gamma; optical coherence decay cannot be gamma",
            atom.gamma_d
        )));
    }
    let sum: f64 = model.branching.iter().sum();
    if (sum - 1.0).abs() > 1e-12 || model.branching.iter().any(|b| *b < 0.0) {
        return Err(TripodError::InvalidParams("branching ratios must be >= 0 and sum to 1".into()));
    }
    let id = Matrix4::<C64>::identity();
    let hm = h.matrix();
    let mut l = (kron(hm, &id) - kron(&id, &hm.transpose())) * C64::new(0.0, -1.0);
    for (k, b) in (1..4).zip(model.branching) {
        if b > 0.0 && total > 0.0 {
            l += dissipator(&jump(k, 0, total * b));
        }
        if atom.gamma_d > 0.0 {
            l += dissipator(&jump(k, k, atom.gamma_d));
        }
    }
    Ok(Liouvillian(l))
}

pub fn build_liouvillian(atom: &AtomParams, fields: &FieldParams) -> Result<Liouvillian> {
    fields.validate()?;
    liouvillian_from(&interaction_hamiltonian(fields, atom), atom, &DecayModel::default())
}

/// Unique stationary state of `l`, from the bordered system with the first
/// row replaced by the trace functional plus one step of iterative refinement.
pub fn steady_state_of(l: &Liouvillian) -> Result<DensityMatrix> {
    let mut a = l.0;
    for k in 0..16 {
        a[(0, k)] = C64::new(0.0, 0.0);
    }
    for i in 0..4 {
        a[(0, 5 * i)] = C64::new(1.0, 0.0);
    }
    let mut b = SuperVec::zeros();
    b[0] = C64::new(1.0, 0.0);

    let scale = l.0.norm().max(1.0);
    let sv = a.singular_values();
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if smin < 1e-13 * scale {
        return Err(TripodError::Degenerate(format!("stationary state not unique (smallest singular value {smin:e})")));
    }
    let lu = a.lu();
    let mut x = lu.solve(&b).ok_or_else(|| TripodError::Numerical("bordered system singular".into()))?;
    let r = b - a * x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    let mut rho = DensityMatrix::from_vec(&x);
    // symmetrize away round-off
    rho.0 = (rho.0 + rho.0.adjoint()) * C64::new(0.5, 0.0);
    Ok(rho)
}

pub fn steady_state(atom: &AtomParams, fields: &FieldParams) -> Result<DensityMatrix> {
    steady_state_of(&build_liouvillian(atom, fields)?)
}

/// Dephasing used to resolve dark-state degeneracy in [`steady_state_limit`].
pub const LIMIT_DEPHASING: f64 = 1e-6;

/// Steady state, or for γ_d = 0 with a dark-state degeneracy the limit γ_d → 0⁺
/// (Richardson extrapolation from γ_d = ε and 2ε). That limit is the state reached
/// from any initial condition once an arbitrarily weak dephasing is present.
pub fn steady_state_limit(atom: &AtomParams, fields: &FieldParams) -> Result<DensityMatrix> {
    match steady_state(atom, fields) {
        Err(TripodError::Degenerate(msg)) if atom.gamma_d == 0.0 => {
            let at = |gd: f64| steady_state(&AtomParams { gamma_d: gd, ..*atom }, fields);
            let (r1, r2) = match (at(LIMIT_DEPHASING), at(2.0 * LIMIT_DEPHASING)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => return Err(TripodError::Degenerate(msg)),
            };
            let rho = DensityMatrix(r1.0 * C64::new(2.0, 0.0) - r2.0);
            if (rho.0 - r1.0).norm() > 1e-4 {
                return Err(TripodError::Numerical("gamma_d -> 0 limit did not converge".into()));
            }
            Ok(rho)
        }
        other => other,
    }
}

/// Dormand–Prince 5(4) tolerances for [`time_evolve`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub min_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-10, atol: 1e-12, min_step: 1e-12 }
    }
}

/// Integrates dρ/dt = Lρ adaptively, returning ρ sampled at t = 0, dt, 2dt, …, t_final.
pub fn evolve_with(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    t_final: f64,
    dt: f64,
    tol: Tolerances,
) -> Result<Vec<(f64, DensityMatrix)>> {
    if !(dt > 0.0) || !(t_final >= 0.0) {
        return Err(TripodError::InvalidParams("dt must be > 0 and t_final >= 0".into()));
    }
    rho0.validate(1e-8, 1e-8)?;
    let n_out = (t_final / dt).round() as usize;
    let mut out = Vec::with_capacity(n_out + 1);
    let mut y = rho0.to_vec();
    let mut t = 0.0;
    let mut h = dt.min(0.1 / l.0.norm().max(1e-300)).max(tol.min_step);
    out.push((0.0, *rho0));
    for k in 1..=n_out {
        let target = k as f64 * dt;
        while t < target {
            let step = h.min(target - t);
            let (y_new, err) = dopri_step(&l.0, &y, step);
            let sc = y.iter().zip(y_new.iter()).map(|(a, b)| tol.atol + tol.rtol * a.norm().max(b.norm()));
            let e = err.iter().zip(sc).map(|(e, s)| (e.norm() / s).powi(2)).sum::<f64>().sqrt() / 4.0;
            if e <= 1.0 {
                t += step;
                y = y_new;
            }
            let factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
            h = step * factor;
            if h < tol.min_step && t < target {
                return Err(TripodError::Numerical(format!("step size underflow at t = {t}")));
            }
        }
        out.push((target, DensityMatrix::from_vec(&y)));
    }
    Ok(out)
}

pub fn time_evolve(
    atom: &AtomParams,
    fields: &FieldParams,
    rho0: &DensityMatrix,
    t_final: f64,
    dt: f64,
) -> Result<Vec<(f64, DensityMatrix)>> {
    evolve_with(&build_liouvillian(atom, fields)?, rho0, t_final, dt, Tolerances::default())
}

fn dopri_step(l: &Super, y: &SuperVec, h: f64) -> (SuperVec, SuperVec) {
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const E: [f64; 7] =
        [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];
    let mut k: [SuperVec; 7] = [SuperVec::zeros(); 7];
    k[0] = l * y;
    for s in 0..6 {
        let mut acc = *y;
        for (j, a) in A[s].iter().enumerate().take(s + 1) {
            if *a != 0.0 {
                acc += k[j] * C64::new(h * a, 0.0);
            }
        }
        k[s + 1] = l * acc;
    }
    // FSAL: the 7th stage is evaluated at the 5th-order solution
    let mut y5 = *y;
    for (j, a) in A[5].iter().enumerate() {
        y5 += k[j] * C64::new(h * a, 0.0);
    }
    let mut err = SuperVec::zeros();
    for (kj, e) in k.iter().zip(E) {
        err += kj * C64::new(h * e, 0.0);
    }
    (y5, err)
}

/// Susceptibility read from the steady state, χ = −K·ρ_{j0}/Ω_j with j = 1
/// (probe) or 3 (trigger). K is the same linear prefactor the closed forms use,
/// so at ρ_jj = ½ the two routes agree in the weak-field limit.
pub fn chi_from_bloch(
    atom: &AtomParams,
    fields: &FieldParams,
    medium: &MediumParams,
    beam: Beam,
    convention: Convention,
    gamma_si: f64,
) -> Result<C64> {
    let rho = steady_state(atom, fields)?;
    let core = coherence_ratio(&rho, fields, beam)?;
    Ok(core * linear_prefactor(medium, beam, convention, gamma_si))
}

/// −ρ_{j0}/Ω_j in γ units: the dimensionless lineshape the closed forms call
/// ½·Δ/(…) when ρ_jj = ½.
pub fn coherence_ratio(rho: &DensityMatrix, fields: &FieldParams, beam: Beam) -> Result<C64> {
    let (j, omega) = match beam {
        Beam::Probe => (1, fields.omega_p),
        Beam::Trigger => (3, fields.omega_t),
    };
    if omega == 0.0 {
        return Err(TripodError::Degenerate(format!("{beam:?} Rabi frequency is zero")));
    }
    Ok(-rho.get(j, 0) / omega)
}
