//! Semiclassical tripod Hamiltonian and its dressed states.
//!
//! Basis ordering is (|0⟩, |1⟩, |2⟩, |3⟩) with |0⟩ the excited state, |1⟩ and
//! |3⟩ the probe and trigger ground states and |2⟩ the pump ground state.

use nalgebra::{Matrix4, Vector4};
use serde::Serialize;

use crate::error::{Result, TripodError};
use crate::params::{AtomParams, FieldParams, C64};

/// Overlap with |0⟩ below which a state counts as dark.
pub const DARK_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hamiltonian4(pub Matrix4<C64>);

impl Hamiltonian4 {
    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.0 - self.0.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &Vector4<C64>) -> Vector4<C64> {
        self.0 * v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DressedState {
    pub energy: f64,
    #[serde(serialize_with = "ser_amplitudes")]
    pub amplitudes: Vector4<C64>,
    pub is_dark: bool,
}

fn ser_amplitudes<S: serde::Serializer>(v: &Vector4<C64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(4))?;
    for z in v.iter() {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

impl DressedState {
    pub fn new(energy: f64, amplitudes: Vector4<C64>) -> Self {
        let is_dark = amplitudes[0].norm() < DARK_THRESHOLD;
        DressedState { energy, amplitudes, is_dark }
    }

    /// |⟨self|other⟩|.
    pub fn overlap(&self, other: &Vector4<C64>) -> f64 {
        self.amplitudes.dotc(other).norm()
    }
}

/// Single-atom, c-number-field reduction of the tripod interaction Hamiltonian
/// (ħ = 1, γ units):
///
/// H = −[δ₁|0⟩⟨0| + (δ₁−δ₂)|2⟩⟨2| + (δ₁−δ₃)|3⟩⟨3|
///       + Ω_P(|0⟩⟨1| + h.c.) + Ω(|0⟩⟨2| + h.c.) + Ω_T(|0⟩⟨3| + h.c.)]
pub fn interaction_hamiltonian(fields: &FieldParams, atom: &AtomParams) -> Hamiltonian4 {
    let z = C64::new(0.0, 0.0);
    let r = |x: f64| C64::new(-x, 0.0);
    let mut h = Matrix4::from_element(z);
    h[(0, 0)] = r(atom.delta1);
    h[(2, 2)] = r(atom.delta1 - atom.delta2);
    h[(3, 3)] = r(atom.delta1 - atom.delta3);
    for (j, omega) in [(1, fields.omega_p), (2, fields.omega_pump), (3, fields.omega_t)] {
        h[(0, j)] = r(omega);
        h[(j, 0)] = r(omega);
    }
    Hamiltonian4(h)
}

fn fix_phase(mut v: Vector4<C64>) -> Vector4<C64> {
    if let Some(first) = v.iter().copied().find(|z| z.norm() > 1e-12) {
        let phase = first.conj() / first.norm();
        v *= phase;
    }
    v
}

fn basis(j: usize) -> Vector4<C64> {
    let mut v = Vector4::from_element(C64::new(0.0, 0.0));
    v[j] = C64::new(1.0, 0.0);
    v
}

/// Closed-form dark states |e₁⟩, |e₂⟩ valid at δ_j = 0 (energy 0).
pub fn dark_states(fields: &FieldParams) -> Result<(DressedState, DressedState)> {
    let (op, ot, om) = (fields.omega_p, fields.omega_t, fields.omega_pump);
    let pt2 = op * op + ot * ot;
    if pt2 == 0.0 {
        return Err(TripodError::Degenerate("dark states need omega_p or omega_t > 0".into()));
    }
    let r = |x: f64| C64::new(x, 0.0);
    let n1 = pt2.sqrt();
    let e1 = Vector4::new(r(0.0), r(ot / n1), r(0.0), r(-op / n1));
    let total = pt2 + om * om;
    let n2 = (pt2 * total).sqrt();
    let e2 = Vector4::new(r(0.0), r(om * op / n2), r(-pt2 / n2), r(om * ot / n2));
    Ok((DressedState::new(0.0, fix_phase(e1)), DressedState::new(0.0, fix_phase(e2))))
}

/// Closed-form bright states at δ_j = 0, energies ∓√(Ω_P² + Ω² + Ω_T²).
///
/// Returned as (lower, upper). With the overall minus sign of the Hamiltonian
/// the combination with +|0⟩ is the lower one.
pub fn bright_states(fields: &FieldParams) -> Result<(DressedState, DressedState)> {
    let (op, ot, om) = (fields.omega_p, fields.omega_t, fields.omega_pump);
    let big = (op * op + ot * ot + om * om).sqrt();
    if big == 0.0 {
        return Err(TripodError::Degenerate("all Rabi frequencies are zero".into()));
    }
    let norm = std::f64::consts::SQRT_2 * big;
    let make = |sign: f64| {
        let r = |x: f64| C64::new(x / norm, 0.0);
        Vector4::new(r(sign * big), r(op), r(om), r(ot))
    };
    Ok((DressedState::new(-big, fix_phase(make(1.0))), DressedState::new(big, fix_phase(make(-1.0)))))
}

/// Diagonalizes a Hermitian 4×4 matrix. States are sorted by energy; each
/// degenerate cluster is re-orthonormalized into a canonical basis (projections
/// of |0⟩..|3⟩, Gram–Schmidt) and the first nonzero amplitude is made real positive.
pub fn eigensystem(h: &Hamiltonian4) -> Result<Vec<DressedState>> {
    let scale = h.norm().max(1.0);
    let herm = h.hermiticity_error();
    if herm > 1e-10 * scale {
        return Err(TripodError::NonHermitian(herm));
    }
    let eig = h.0.symmetric_eigen();
    let mut pairs: Vec<(f64, Vector4<C64>)> =
        (0..4).map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned())).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let tol = 1e-9 * scale;
    let mut out = Vec::with_capacity(4);
    let mut i = 0;
    while i < 4 {
        let mut j = i + 1;
        while j < 4 && (pairs[j].0 - pairs[i].0).abs() < tol {
            j += 1;
        }
        if j - i == 1 {
            out.push(DressedState::new(pairs[i].0, fix_phase(pairs[i].1)));
        } else {
            let energy = pairs[i..j].iter().map(|p| p.0).sum::<f64>() / (j - i) as f64;
            for v in canonical_basis(&pairs[i..j].iter().map(|p| p.1).collect::<Vec<_>>()) {
                out.push(DressedState::new(energy, fix_phase(v)));
            }
        }
        i = j;
    }
    Ok(out)
}

fn canonical_basis(subspace: &[Vector4<C64>]) -> Vec<Vector4<C64>> {
    let project = |v: &Vector4<C64>| -> Vector4<C64> {
        subspace.iter().fold(Vector4::from_element(C64::new(0.0, 0.0)), |acc, u| acc + u * u.dotc(v))
    };
    let mut basis_out: Vec<Vector4<C64>> = Vec::with_capacity(subspace.len());
    for k in 0..4 {
        if basis_out.len() == subspace.len() {
            break;
        }
        let mut v = project(&basis(k));
        for b in &basis_out {
            v -= b * b.dotc(&v);
        }
        let n = v.norm();
        if n > 1e-6 {
            basis_out.push(v / C64::new(n, 0.0));
        }
    }
    basis_out
}

/// Rotates a degenerate pair onto the closest orthonormal pair in its span
/// matching `target`: the first output maximizes overlap with `target`.
pub fn align_to(pair: (&Vector4<C64>, &Vector4<C64>), target: &Vector4<C64>) -> (Vector4<C64>, Vector4<C64>) {
    let (a, b) = pair;
    let ca = a.dotc(target);
    let cb = b.dotc(target);
    let n = (ca.norm_sqr() + cb.norm_sqr()).sqrt();
    if n < 1e-14 {
        return (*a, *b);
    }
    let first = (a * ca + b * cb) / C64::new(n, 0.0);
    let second = (b * ca.conj() - a * cb.conj()) / C64::new(n, 0.0);
    (fix_phase(first), fix_phase(second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn symmetric() -> FieldParams {
        FieldParams::new(1.0, 1.0, 4.5)
    }

    #[test]
    fn resonant_matrix_is_off_diagonal() {
        let h = interaction_hamiltonian(&symmetric(), &AtomParams::resonant(0.0));
        let m = h.matrix();
        assert_eq!(m[(0, 1)].re, -1.0);
        assert_eq!(m[(0, 2)].re, -4.5);
        assert_eq!(m[(0, 3)].re, -1.0);
        for j in 0..4 {
            assert_eq!(m[(j, j)].norm(), 0.0);
        }
        assert_eq!(h.hermiticity_error(), 0.0);
    }

    #[test]
    fn zero_fields_zero_matrix() {
        let h = interaction_hamiltonian(&FieldParams::new(0.0, 0.0, 0.0), &AtomParams::resonant(0.0));
        assert_eq!(h.norm(), 0.0);
        let states = eigensystem(&h).unwrap();
        assert!(states.iter().all(|s| s.energy == 0.0));
    }

    #[test]
    fn equal_detunings_leave_only_excited_diagonal() {
        let h = interaction_hamiltonian(&FieldParams::new(0.0, 0.0, 0.0), &AtomParams::new(3.0, 3.0, 3.0, 0.0));
        assert_eq!(h.matrix()[(0, 0)].re, -3.0);
        assert_eq!(h.matrix()[(2, 2)].norm(), 0.0);
        assert_eq!(h.matrix()[(3, 3)].norm(), 0.0);
    }

    #[test]
    fn dark_state_limits() {
        let (e1, _) = dark_states(&symmetric()).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert_relative_eq!(e1.amplitudes[1].re, s, epsilon = 1e-15);
        assert_relative_eq!(e1.amplitudes[3].re, -s, epsilon = 1e-15);

        let (e1, _) = dark_states(&FieldParams::new(0.0, 2.0, 4.5)).unwrap();
        assert_relative_eq!(e1.amplitudes[1].re, 1.0);
        assert!(e1.is_dark);

        assert!(matches!(dark_states(&FieldParams::new(0.0, 0.0, 1.0)), Err(TripodError::Degenerate(_))));
    }

    #[test]
    fn second_dark_state_amplitudes() {
        let (_, e2) = dark_states(&symmetric()).unwrap();
        let n = (2.0f64 * 22.25).sqrt();
        assert_relative_eq!(e2.amplitudes[1].re, 4.5 / n, epsilon = 1e-14);
        assert_relative_eq!(e2.amplitudes[2].re, -2.0 / n, epsilon = 1e-14);
        assert_relative_eq!(e2.amplitudes[3].re, 4.5 / n, epsilon = 1e-14);
        let h = interaction_hamiltonian(&symmetric(), &AtomParams::resonant(0.0));
        assert!(h.apply(&e2.amplitudes).norm() < 1e-12);
    }

    #[test]
    fn resonant_spectrum() {
        let h = interaction_hamiltonian(&symmetric(), &AtomParams::resonant(0.0));
        let states = eigensystem(&h).unwrap();
        let big = 22.25f64.sqrt();
        assert_relative_eq!(states[0].energy, -big, max_relative = 1e-12);
        assert!(states[1].energy.abs() < 1e-12 && states[2].energy.abs() < 1e-12);
        assert_relative_eq!(states[3].energy, big, max_relative = 1e-12);
        assert!(states[1].is_dark && states[2].is_dark);
        assert!(!states[0].is_dark && !states[3].is_dark);
    }

    #[test]
    fn bright_states_reproduced_up_to_phase() {
        let f = FieldParams::new(0.7, 1.3, 4.5);
        let h = interaction_hamiltonian(&f, &AtomParams::resonant(0.0));
        let states = eigensystem(&h).unwrap();
        let (minus, plus) = bright_states(&f).unwrap();
        assert_relative_eq!(states[0].overlap(&minus.amplitudes), 1.0, epsilon = 1e-10);
        assert_relative_eq!(states[3].overlap(&plus.amplitudes), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn degenerate_pair_matches_closed_forms() {
        let f = FieldParams::new(0.4, 1.9, 3.0);
        let h = interaction_hamiltonian(&f, &AtomParams::resonant(0.0));
        let states = eigensystem(&h).unwrap();
        let (e1, e2) = dark_states(&f).unwrap();
        let (a, b) = align_to((&states[1].amplitudes, &states[2].amplitudes), &e1.amplitudes);
        assert_relative_eq!(a.dotc(&e1.amplitudes).norm(), 1.0, epsilon = 1e-10);
        assert_relative_eq!(b.dotc(&e2.amplitudes).norm(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut h = interaction_hamiltonian(&symmetric(), &AtomParams::resonant(0.0));
        h.0[(0, 1)] = C64::new(2.0, 0.0);
        assert!(matches!(eigensystem(&h), Err(TripodError::NonHermitian(_))));
    }

    #[test]
    fn detuned_states_flagged_by_overlap() {
        let f = FieldParams::new(1.0, 1.0, 4.5);
        let h = interaction_hamiltonian(&f, &AtomParams::new(10.01, 10.0, 10.02, 0.0));
        let states = eigensystem(&h).unwrap();
        for s in &states {
            assert_relative_eq!(s.amplitudes.norm(), 1.0, epsilon = 1e-12);
            let r = h.apply(&s.amplitudes) - s.amplitudes * C64::new(s.energy, 0.0);
            assert!(r.norm() < 1e-10 * h.norm());
        }
        // unequal detunings: no state is exactly dark
        assert!(states.iter().all(|s| !s.is_dark));
    }
}
