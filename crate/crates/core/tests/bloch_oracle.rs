use nalgebra::{DMatrix, DVector, SMatrix, SVector};
use proptest::prelude::*;
use tripod::bloch::*;
use tripod::susceptibility::*;
use tripod::*;

type S = SMatrix<C64, 16, 16>;
type V = SVector<C64, 16>;

const POPULATIONS: [usize; 4] = [0, 5, 10, 15];
const RHO13: [usize; 2] = [7, 13];

fn generator(atom: &AtomParams, p: f64, t: f64, pump: f64) -> S {
    build_liouvillian(atom, &FieldParams::new(p, t, pump)).unwrap().0
}

// L0 x = −rhs restricted to the coherences; populations stay at their zeroth-order values.
fn frozen_solve(l0: &S, rhs: &V) -> V {
    let idx: Vec<usize> = (0..16).filter(|k| !POPULATIONS.contains(k)).collect();
    let n = idx.len();
    let mut a = DMatrix::<C64>::zeros(n, n);
    let mut b = DVector::<C64>::zeros(n);
    for (i, &r) in idx.iter().enumerate() {
        b[i] = -rhs[r];
        for (j, &c) in idx.iter().enumerate() {
            a[(i, j)] = l0[(r, c)];
        }
    }
    let x = a.lu().solve(&b).unwrap();
    let mut out = V::zeros();
    for (i, &r) in idx.iter().enumerate() {
        out[r] = x[i];
    }
    out
}

fn keep_only(v: &V, idx: &[usize]) -> V {
    let mut out = V::zeros();
    for &k in idx {
        out[k] = v[k];
    }
    out
}

struct Perturbative {
    lin_p: C64,
    lin_t: C64,
    raman_p: C64,
    full_p: C64,
}

/// Order-by-order expansion of the generator in Ω_P and Ω_T around ρ = ½(|1⟩⟨1| + |3⟩⟨3|).
fn perturbative(atom: &AtomParams, pump: f64) -> Perturbative {
    let l0 = generator(atom, 0.0, 0.0, pump);
    let lp = generator(atom, 1.0, 0.0, pump) - l0;
    let lt = generator(atom, 0.0, 1.0, pump) - l0;
    let mut r0 = V::zeros();
    r0[5] = C64::new(0.5, 0.0);
    r0[15] = C64::new(0.5, 0.0);
    let rp = frozen_solve(&l0, &(lp * r0));
    let rt = frozen_solve(&l0, &(lt * r0));
    let rtt = frozen_solve(&l0, &(lt * rt));
    let rpt = frozen_solve(&l0, &(lp * rt + lt * rp));
    let full = frozen_solve(&l0, &(lp * rtt + lt * rpt));
    let raman = frozen_solve(&l0, &(lp * keep_only(&rtt, &RHO13) + lt * keep_only(&rpt, &RHO13)));
    Perturbative { lin_p: -rp[4], lin_t: -rt[12], raman_p: -raman[4], full_p: -full[4] }
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn linear_cores_match_perturbed_generator() {
    for atom in [
        AtomParams::new(10.01, 10.0, 10.02, 0.01),
        AtomParams::new(0.3, 0.1, 0.7, 0.02),
        AtomParams::new(-2.0, 1.0, 0.5, 0.0),
    ] {
        let p = perturbative(&atom, 4.5);
        let c = lineshape_cores(&atom, 4.5, Transcription::Corrected).unwrap();
        assert!(rel(c.lin_p, p.lin_p) < 1e-10, "{atom:?}");
        assert!(rel(c.lin_t, p.lin_t) < 1e-10, "{atom:?}");
    }
}

#[test]
fn raman_path_kerr_matches_perturbed_generator() {
    for atom in [AtomParams::new(10.01, 10.0, 10.02, 0.01), AtomParams::new(0.3, 0.1, 0.7, 0.02)] {
        let p = perturbative(&atom, 4.5);
        let c = lineshape_cores(&atom, 4.5, Transcription::Corrected).unwrap();
        assert!(rel(c.cub_p, p.raman_p) < 1e-9, "{:?} vs {:?}", c.cub_p, p.raman_p);
    }
}

#[test]
fn two_photon_path_accounts_for_remainder() {
    let atom = AtomParams::new(10.01, 10.0, 10.02, 0.01);
    let p = perturbative(&atom, 4.5);
    let d = complex_detunings(&atom);
    let o2 = 4.5 * 4.5;
    let extra = -0.5 * o2 / (d.d20 * (d.d30.conj() * d.d23 - o2) * (d.d10.conj() * d.d21() - o2));
    let c = lineshape_cores(&atom, 4.5, Transcription::Corrected).unwrap();
    assert!(rel(c.cub_p + extra, p.full_p) < 1e-9, "{:?} {:?}", c.cub_p + extra, p.full_p);
}

#[test]
fn printed_kerr_disagrees_with_oracle() {
    let atom = AtomParams::new(10.01, 10.0, 10.02, 0.01);
    let p = perturbative(&atom, 4.5);
    let c = lineshape_cores(&atom, 4.5, Transcription::Printed).unwrap();
    assert!(rel(c.cub_p, p.raman_p) > 0.5);
    assert!(rel(c.lin_p, p.lin_p) > 0.5);
}

#[test]
fn lambda_limit_doubles_linear_core() {
    // no trigger: all population ends in |1⟩ and the probe sees a bare Λ system
    // |3⟩ would trap population without a trigger, so nothing decays into it
    let atom = AtomParams::new(0.4, 0.1, 0.0, 0.02);
    let f = FieldParams::new(0.005, 0.0, 4.5);
    let h = tripod::dressed::interaction_hamiltonian(&f, &atom);
    let l = liouvillian_from(&h, &atom, &DecayModel { branching: [0.5, 0.5, 0.0] }).unwrap();
    // |3⟩ is then decoupled, so the stationary state is found by evolving out of |1⟩
    let rho = evolve_with(&l, &DensityMatrix::basis(1), 2000.0, 2000.0, Tolerances::default()).unwrap()[1].1;
    assert!(rho.population(1) > 0.999);
    let bloch = coherence_ratio(&rho, &f, Beam::Probe).unwrap();
    let formula = linear_core(Beam::Probe, &atom, &f, Transcription::Corrected).unwrap();
    assert!(rel(bloch, 2.0 * formula) < 1e-4, "{bloch} vs {formula}");
}

#[test]
fn weak_field_chi_matches_closed_form() {
    let mut p = SystemParams::reference();
    p.convention = Convention::Si;
    p.fields = FieldParams::new(0.01, 0.01, 4.5);
    let g = p.gamma_si.unwrap();
    for beam in [Beam::Probe, Beam::Trigger] {
        let bloch = chi_from_bloch(&p.atom, &p.fields, &p.medium, beam, Convention::Si, g).unwrap();
        let closed = perturbative_chi(beam, &p, Convention::Si).unwrap();
        assert!((bloch.re - closed.re).abs() < 0.01 * closed.re.abs(), "{beam:?}");
        assert!((bloch.im - closed.im).abs() < 0.01 * closed.im.abs(), "{beam:?}");
    }
}

#[test]
fn long_time_evolution_reaches_steady_state() {
    // the far-detuned reference point pumps between |1⟩ and |3⟩ slowly, so it gets a longer run
    for (atom, f, t) in [
        (AtomParams::new(0.5, -0.3, 1.0, 0.05), FieldParams::new(0.7, 0.4, 2.0), 1000.0),
        (AtomParams::new(0.0, 0.0, 0.0, 0.01), FieldParams::new(1.0, 1.0, 4.5), 1000.0),
        (AtomParams::new(10.01, 10.0, 10.02, 0.01), FieldParams::new(1.0, 1.0, 4.5), 20000.0),
    ] {
        let l = build_liouvillian(&atom, &f).unwrap();
        let ss = steady_state_of(&l).unwrap();
        let traj = evolve_with(&l, &DensityMatrix::maximally_mixed(), t, t, Tolerances::default()).unwrap();
        let end = traj.last().unwrap().1;
        for i in 0..4 {
            for j in 0..4 {
                assert!((end.get(i, j) - ss.get(i, j)).norm() < 1e-6, "{i}{j} {atom:?}");
            }
        }
    }
}

#[test]
fn pump_alone_empties_two_and_zero() {
    let atom = AtomParams::new(0.0, 0.0, 0.0, 0.01);
    let f = FieldParams::new(0.0, 0.0, 4.5);
    let traj = time_evolve(&atom, &f, &DensityMatrix::maximally_mixed(), 200.0, 200.0).unwrap();
    let end = traj.last().unwrap().1;
    assert!(end.population(0) < 1e-6 && end.population(2) < 1e-6);
}

#[test]
fn unitary_evolution_keeps_spectrum() {
    let h = tripod::dressed::interaction_hamiltonian(
        &FieldParams::new(0.8, 0.5, 2.0),
        &AtomParams::new(0.3, -0.2, 0.5, 0.0),
    );
    let id = nalgebra::Matrix4::<C64>::identity();
    let hm = h.matrix();
    let mut l = S::zeros();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    l[(4 * a + b, 4 * c + d)] =
                        C64::new(0.0, -1.0) * (hm[(a, c)] * id[(d, b)] - id[(a, c)] * hm[(d, b)]);
                }
            }
        }
    }
    let mut rho0 = DensityMatrix::basis(1);
    rho0.0[(1, 1)] = C64::new(0.7, 0.0);
    rho0.0[(3, 3)] = C64::new(0.3, 0.0);
    let ev0 = rho0.eigenvalues();
    let traj = evolve_with(&Liouvillian(l), &rho0, 10.0, 1.0, Tolerances::default()).unwrap();
    for (_, rho) in traj {
        let ev = rho.eigenvalues();
        for k in 0..4 {
            assert!((ev[k] - ev0[k]).abs() < 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn steady_states_are_density_matrices(
        d1 in -20.0..20.0f64, d2 in -20.0..20.0f64, d3 in -20.0..20.0f64,
        op in 0.01..10.0f64, ot in 0.01..10.0f64, om in 0.01..10.0f64,
        gd in 0.0..0.1f64,
    ) {
        let atom = AtomParams::new(d1, d2, d3, gd);
        let f = FieldParams::new(op, ot, om);
        let l = build_liouvillian(&atom, &f).unwrap();
        match steady_state_of(&l) {
            Ok(rho) => {
                rho.validate(1e-10, 1e-9).unwrap();
                prop_assert!(l.apply(&rho).0.norm() < 1e-10);
            }
            Err(TripodError::Degenerate(_)) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
