use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::*;
use crate::circuit::{conserved_charges, PotentialTopology};
use crate::operator::LinearOperator;
use crate::rotor::{cos_op, embed_dims, number_op, ChargeBasis};

fn sorted_eigs(m: DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

fn sparse(rep: &HamiltonianRep) -> &SparseOperator {
    rep.h.as_sparse().unwrap()
}

#[test]
fn no_tunnelling_means_diagonal() {
    let rep = build(&PlaquetteParams::full(0.7, 1.3, 0.0, 1)).unwrap();
    let h = sparse(&rep);
    assert!(h.is_diagonal());
    let zero = rep.config_space().unwrap().encode(&[0; 8]).unwrap();
    let d = h.diagonal();
    assert_eq!(d[zero], C64::new(0.0, 0.0));
    assert!(d.iter().all(|x| x.re >= 0.0));
}

#[test]
fn gauss_generators_commute_exactly() {
    let plain = build(&PlaquetteParams::full(0.9, 1.1, 0.8, 1)).unwrap();
    assert_eq!(gauss_violation(&plain).unwrap(), 0.0);
    let corr = Corrections {
        chi: 0.02,
        eta: 0.03,
        n_s: 0.1,
    };
    let dressed = build(&PlaquetteParams::full(0.9, 1.1, 0.8, 1).with_corrections(corr)).unwrap();
    assert_eq!(gauss_violation(&dressed).unwrap(), 0.0);
    assert!(gauss_violation(&build(&PlaquetteParams::gauge_fixed(1.0, 1.0, 1.0, 1)).unwrap()).is_err());
}

#[test]
fn term_shifts_respect_every_conserved_charge() {
    let u = conserved_charges(&PotentialTopology::plaquette());
    let p = PlaquetteParams::full(1.0, 1.0, 1.0, 1).with_corrections(Corrections {
        chi: 0.1,
        eta: 0.2,
        n_s: 0.3,
    });
    let terms = hamiltonian_terms(&p);
    assert_eq!(terms.iter().filter(|t| t.shift != [0; 8]).count(), 8);
    for t in &terms {
        for row in &u.rows {
            assert_eq!(row.iter().zip(&t.shift).map(|(a, b)| a * b).sum::<i64>(), 0, "{}", t.name);
        }
    }
}

#[test]
fn zero_charge_sector_matches_gauge_fixed_spectrum() {
    for (m, g, lam) in [(1.0, 1.0, 1.0), (0.3, 2.0, 1.7)] {
        let full = build(&PlaquetteParams::full(m, g, lam, 1)).unwrap();
        let idx = sector_indices(&full).unwrap();
        assert_eq!(idx.len(), 81);
        let block = sparse(&full).restrict(&idx).to_dense_real();
        let gf = build(&PlaquetteParams::gauge_fixed(m, g, lam, 1)).unwrap();
        let a = sorted_eigs(block);
        let b = sorted_eigs(sparse(&gf).to_dense_real());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }
}

#[test]
fn zero_charge_projector_properties() {
    let full = build(&PlaquetteParams::full(1.0, 1.0, 1.0, 1)).unwrap();
    let p = zero_charge_projector(&full).unwrap();
    let zero = full.config_space().unwrap().encode(&[0; 8]).unwrap();
    assert_eq!(p.get(zero, zero), C64::new(1.0, 0.0));
    assert_eq!(p.diagonal().iter().filter(|x| x.re == 1.0).count(), 81);
    assert_eq!(p.commutator(sparse(&full)).unwrap().max_abs(), 0.0);
}

#[test]
fn kinetic_matrix_from_gauge_fixing() {
    let map = plaquette_gauge_map([0; 4]).unwrap();
    for a in 0..4 {
        for b in 0..4 {
            let ata: i64 = (0..4).map(|k| map.coeffs[k][a] * map.coeffs[k][b]).sum();
            assert_eq!(ata, KINETIC_MATRIX[a][b]);
        }
    }
    let pairs: [([i64; 4], i64); 4] = [
        ([1, -1, 1, -1], 4),
        ([1, 0, 0, 1], 2),
        ([0, 1, 1, 0], 2),
        ([1, 1, -1, -1], 0),
    ];
    for (v, ev) in pairs {
        for r in 0..4 {
            let mv: i64 = (0..4).map(|c| KINETIC_MATRIX[r][c] * v[c]).sum();
            assert_eq!(mv, ev * v[r]);
        }
    }
}

#[test]
fn kinetic_energy_of_up_state() {
    let (m, g) = (0.7, 1.9);
    let rep = build(&PlaquetteParams::gauge_fixed(m, g, 0.0, 1)).unwrap();
    let (up, down) = updown_states(&rep).unwrap();
    let ku = rep.h.apply_vec(up.amplitudes());
    let kd = rep.h.apply_vec(down.amplitudes());
    let eu = crate::operator::dot(up.amplitudes(), &ku).re;
    let ed = crate::operator::dot(down.amplitudes(), &kd).re;
    assert!((eu - (2.0 * g + 2.0 * m)).abs() < 1e-14);
    assert!((ed - eu).abs() < 1e-14);
    assert_eq!(up.inner(&down), C64::new(0.0, 0.0));
    assert_eq!(plaquette_gauge_map([0; 4]).unwrap().apply(&[1, 1, 0, 0]), vec![1, 0, 0, -1]);
}

#[test]
fn decoupled_links_at_zero_mass() {
    let (g, lam) = (1.3, 0.8);
    let rep = build(&PlaquetteParams::gauge_fixed(0.0, g, lam, 2)).unwrap();
    let b = ChargeBasis::new(2);
    let n = number_op(b);
    let single = n.matmul(&n).unwrap().scale_real(g).sub(&cos_op(b).scale_real(lam)).unwrap();
    let dims = [5; 4];
    let mut sum = SparseOperator::zeros(625);
    for slot in 0..4 {
        sum = sum.add(&embed_dims(&single, slot, &dims).unwrap()).unwrap();
    }
    assert!(sparse(&rep).sub(&sum).unwrap().max_abs() < 1e-15);
}

#[test]
fn plaquette_operator_basics() {
    let rep = build(&PlaquetteParams::gauge_fixed(1.0, 1.0, 1.0, 2)).unwrap();
    let p = plaquette_op(&rep).as_sparse().unwrap();
    assert!(p.diagonal().iter().all(|x| *x == C64::new(0.0, 0.0)));
    assert!(p.is_hermitian());
    let e = sorted_eigs(p.to_dense_real());
    assert!(e[0] >= -1.0 - 1e-12 && e[e.len() - 1] <= 1.0 + 1e-12);
}

#[test]
fn vortex_conjugation() {
    let rep = build(&PlaquetteParams::gauge_fixed(1.0, 1.0, 1.0, 2)).unwrap();
    let id = vortex_unitary(&rep, 0.0).unwrap();
    assert_eq!(id.to_dense(), SparseOperator::identity(625).to_dense());
    let space = rep.config_space().unwrap();
    // P = raise12 raise24 lower13 lower34
    let shift = SparseOperator::from_row_fn(625, |r, out| {
        let c = space.decode(r);
        if let Some(t) = space.shifted(r, &c, &[(0, -1), (1, -1), (2, 1), (3, 1)]) {
            out.push((t, C64::new(1.0, 0.0)));
        }
    });
    for theta in [0.3, std::f64::consts::PI, 2.0 * std::f64::consts::PI, 5.1] {
        let u = vortex_unitary(&rep, theta).unwrap();
        let conj = u.adjoint().matmul(&shift).unwrap().matmul(&u).unwrap();
        let want = shift.scale(C64::from_polar(1.0, -theta));
        let err = conj.sub(&want).unwrap().max_abs();
        assert!(err < 1e-14, "{err}");
    }
    let m = build(&PlaquetteParams::mathieu(1.0, 1.0, 1.0, 3)).unwrap();
    assert!(vortex_unitary(&m, 1.0).is_err());
}

#[test]
fn updown_requires_gauge_fixed_charge() {
    assert!(updown_states(&build(&PlaquetteParams::gauge_fixed(1.0, 1.0, 1.0, 0)).unwrap()).is_err());
    assert!(updown_states(&build(&PlaquetteParams::full(1.0, 1.0, 1.0, 1)).unwrap()).is_err());
}

#[test]
fn static_charge_sector_neutralizes_updown() {
    let rep = build(&PlaquetteParams::gauge_fixed(5.0, 1.0, 0.0, 1).with_static_charges([-1, 0, 0, 1])).unwrap();
    let (up, down) = updown_states(&rep).unwrap();
    let h = rep.h.as_sparse().unwrap();
    let iu = up.amplitudes().iter().position(|a| a.re == 1.0).unwrap();
    let id = down.amplitudes().iter().position(|a| a.re == 1.0).unwrap();
    // only the electric energy remains once the matter charges vanish
    assert_eq!(h.get(iu, iu).re, 2.0);
    assert_eq!(h.get(id, id).re, 2.0);
}

#[test]
fn mathieu_basis_decoupled_limit() {
    let (g, lam) = (1.0, 3.0);
    let rep = build(&PlaquetteParams::mathieu(0.0, g, lam, 4)).unwrap();
    let link = rep.link_basis.as_ref().unwrap();
    // H is diagonal with the all-ce_0 product lowest
    let d: Vec<f64> = rep.h.diagonal().iter().map(|x| x.re).collect();
    assert_eq!(d.iter().cloned().fold(f64::INFINITY, f64::min), d[0]);
    let mut e0 = vec![C64::new(0.0, 0.0); rep.dim()];
    e0[0] = C64::new(1.0, 0.0);
    let he = rep.h.apply_vec(&e0);
    assert!(he.iter().skip(1).all(|x| x.norm() == 0.0));
    // independent single-link oracle in a large charge window
    let nmax = 40usize;
    let dim = 2 * nmax + 1;
    let hl = DMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            g * (r as f64 - nmax as f64).powi(2)
        } else if r.abs_diff(c) == 1 {
            -0.5 * lam
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(hl);
    let k = eig.eigenvalues.imin();
    let v = eig.eigenvectors.column(k);
    let cos: f64 = (0..dim - 1).map(|i| v[i] * v[i + 1]).sum();
    let plaq = crate::operator::dot(&e0, &plaquette_op(&rep).apply_vec(&e0)).re;
    assert!((plaq - cos.powi(4)).abs() < 1e-12, "{plaq} vs {}", cos.powi(4));
    assert!((link.energies[0] - eig.eigenvalues[k]).abs() < 1e-12);
}

#[test]
fn mathieu_hamiltonian_is_hermitian() {
    let rep = build(&PlaquetteParams::mathieu(0.8, 1.0, 2.0, 3)).unwrap();
    let h = rep.h.to_sparse(100).unwrap().to_dense();
    assert!((&h - h.adjoint()).camax() < 1e-12);
    for (name, op) in &rep.observables {
        let o = op.to_sparse(100).unwrap().to_dense();
        assert!((&o - o.adjoint()).camax() < 1e-12, "{name}");
    }
    let bad = PlaquetteParams::mathieu(0.8, 1.0, 2.0, 3).with_static_charges([1, 0, 0, -1]);
    assert!(build(&bad).is_err());
}

#[test]
fn mathieu_basis_at_lambda_zero_is_the_charge_basis() {
    // with λ = 0 the Mathieu states are charge states, so spectra coincide
    let m = build(&PlaquetteParams::mathieu(0.6, 1.0, 0.0, 5)).unwrap();
    let c = build(&PlaquetteParams::gauge_fixed(0.6, 1.0, 0.0, 2)).unwrap();
    let a = sorted_eigs(m.h.to_sparse(1000).unwrap().to_dense_real());
    let b = sorted_eigs(sparse(&c).to_dense_real());
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn static_matter_constraint_at_large_mass() {
    let rep = build(&PlaquetteParams::gauge_fixed(1e4, 1.0, 1.0, 2)).unwrap();
    let eig = SymmetricEigen::new(sparse(&rep).to_dense_real());
    let k = eig.eigenvalues.imin();
    let v = eig.eigenvectors.column(k);
    let space = rep.config_space().unwrap();
    let weight: f64 = (0..rep.dim())
        .filter(|&r| {
            let c = space.decode(r);
            c[0] == c[1] && c[1] == -c[2] && c[2] == c[3]
        })
        .map(|r| v[r] * v[r])
        .sum();
    assert!(weight >= 0.999, "{weight}");
}

#[test]
fn basis_names_roundtrip() {
    for b in [BasisKind::FullCharge, BasisKind::GaugeFixedCharge, BasisKind::GaugeFixedMathieu] {
        assert_eq!(b.to_string().parse::<BasisKind>().unwrap(), b);
    }
    assert_eq!("mathieu".parse::<BasisKind>().unwrap(), BasisKind::GaugeFixedMathieu);
    assert!("nope".parse::<BasisKind>().is_err());
}

#[test]
fn overflow_is_refused() {
    assert!(matches!(
        build(&PlaquetteParams::full(1.0, 1.0, 1.0, 6)),
        Err(Error::DimensionOverflow { .. })
    ));
}
