//! Fermionic forms of the particle-number and spin operators used to check
//! symmetry conservation.

use crate::fermion::{spin_orbital, FermionOperator, Ladder, Spin};

/// Total particle number over `m` spatial orbitals.
pub fn number_operator(m: usize) -> FermionOperator {
    let mut op = FermionOperator::new();
    for so in 0..2 * m {
        op = op.add(&FermionOperator::term(
            1.0,
            vec![Ladder::create(so), Ladder::annihilate(so)],
        ));
    }
    op
}

/// Alpha-channel particle number.
pub fn n_alpha_operator(m: usize) -> FermionOperator {
    let mut op = FermionOperator::new();
    for p in 0..m {
        let so = spin_orbital(p, Spin::Alpha);
        op = op.add(&FermionOperator::term(
            1.0,
            vec![Ladder::create(so), Ladder::annihilate(so)],
        ));
    }
    op
}

/// Beta-channel particle number.
pub fn n_beta_operator(m: usize) -> FermionOperator {
    let mut op = FermionOperator::new();
    for p in 0..m {
        let so = spin_orbital(p, Spin::Beta);
        op = op.add(&FermionOperator::term(
            1.0,
            vec![Ladder::create(so), Ladder::annihilate(so)],
        ));
    }
    op
}

/// `S_z = (N_alpha - N_beta) / 2`.
pub fn sz_operator(m: usize) -> FermionOperator {
    n_alpha_operator(m)
        .scaled(0.5)
        .sub(&n_beta_operator(m).scaled(0.5))
}

/// Total-spin operator `S^2 = S_- S_+ + S_z + S_z^2`.
pub fn s2_operator(m: usize) -> FermionOperator {
    let mut s_plus = FermionOperator::new();
    for p in 0..m {
        s_plus = s_plus.add(&FermionOperator::term(
            1.0,
            vec![
                Ladder::create(spin_orbital(p, Spin::Alpha)),
                Ladder::annihilate(spin_orbital(p, Spin::Beta)),
            ],
        ));
    }
    let s_minus = s_plus.adjoint();
    let sz = sz_operator(m);
    s_minus.mul(&s_plus).add(&sz).add(&sz.mul(&sz))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{DetBasis, Determinant, Statevector};
    use num_complex::Complex64;

    fn expectation(op: &FermionOperator, v: &Statevector) -> f64 {
        let m = op.compile(&v.basis).unwrap();
        let hv = m.apply(&v.amplitudes);
        v.amplitudes
            .iter()
            .zip(&hv)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    #[test]
    fn closed_shell_determinant_is_singlet() {
        let basis = DetBasis::sector(3, 2, 2);
        let v = Statevector::unit(basis, Determinant::new(0b11, 0b11)).unwrap();
        assert!(expectation(&s2_operator(3), &v).abs() < 1e-12);
        assert!((expectation(&number_operator(3), &v) - 4.0).abs() < 1e-12);
        assert!(expectation(&sz_operator(3), &v).abs() < 1e-12);
    }

    #[test]
    fn open_shell_combinations() {
        // (|a_p b_q> - |b_p a_q>)/sqrt2 is a singlet, + combination a triplet.
        let basis = DetBasis::sector(2, 1, 1);
        let s2 = s2_operator(2);
        let i_ab = basis.index_of(Determinant::new(0b01, 0b10)).unwrap();
        let i_ba = basis.index_of(Determinant::new(0b10, 0b01)).unwrap();
        for (sign, expect) in [(-1.0, 0.0), (1.0, 2.0)] {
            let mut v = Statevector::zero(basis.clone());
            let r = std::f64::consts::FRAC_1_SQRT_2;
            v.amplitudes[i_ab] = Complex64::new(r, 0.0);
            v.amplitudes[i_ba] = Complex64::new(sign * r, 0.0);
            assert!((expectation(&s2, &v) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn high_spin_eigenvalue() {
        // Two alpha electrons: S = 1, S^2 = 2.
        let basis = DetBasis::sector(2, 2, 0);
        let v = Statevector::unit(basis, Determinant::new(0b11, 0)).unwrap();
        assert!((expectation(&s2_operator(2), &v) - 2.0).abs() < 1e-12);
        assert!((expectation(&sz_operator(2), &v) - 1.0).abs() < 1e-12);
    }
}
