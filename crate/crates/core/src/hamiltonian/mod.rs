//! Active-space electronic Hamiltonians.
//!
//! The Hamiltonian is held as spatial-orbital integrals
//! `H = E_core + sum_pq h_pq E_pq + 1/2 sum_pqrs (pq|rs) (E_pq E_rs - d_qr E_ps)`
//! and compiled to sparse matrices over determinant bases with the
//! Slater-Condon rules. A term-by-term ladder-operator compilation and a
//! Pauli-string route are kept as independent cross-checks.

mod fcidump;
mod pauli;

pub use fcidump::{parse_fcidump_path, parse_fcidump_str};
pub use pauli::{PauliAxis, PauliSum, PauliWord};

use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use crate::error::{Result, SavqeError};
use crate::fermion::FermionOperator;
use crate::sparse::SparseOp;
use crate::states::{DetBasis, Determinant};

/// Dense chemists'-notation two-electron integrals `(pq|rs)` with all eight
/// symmetry-related entries materialized.
#[derive(Debug, Clone)]
pub struct Eri {
    n: usize,
    data: Vec<f64>,
}

impl Eri {
    pub fn zeros(n: usize) -> Self {
        Eri {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    #[inline]
    fn idx(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.n + q) * self.n + r) * self.n + s
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.data[self.idx(p, q, r, s)]
    }

    /// Store a value into all eight permutation-equivalent slots.
    pub fn set_symmetric(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        for (a, b, c, d) in [
            (p, q, r, s),
            (q, p, r, s),
            (p, q, s, r),
            (q, p, s, r),
            (r, s, p, q),
            (s, r, p, q),
            (r, s, q, p),
            (s, r, q, p),
        ] {
            let i = self.idx(a, b, c, d);
            self.data[i] = v;
        }
    }
}

/// Core energy plus one- and two-electron integrals over an orthonormal
/// spatial-orbital active space.
#[derive(Debug, Clone)]
pub struct ActiveSpaceHamiltonian {
    n_spatial: usize,
    n_electrons: u32,
    ms2: i32,
    core_energy: f64,
    h1: DMatrix<f64>,
    eri: Eri,
}

impl ActiveSpaceHamiltonian {
    pub(crate) fn from_parts(
        n_spatial: usize,
        n_electrons: u32,
        ms2: i32,
        core_energy: f64,
        h1: DMatrix<f64>,
        eri: Eri,
    ) -> Result<Self> {
        if h1.nrows() != n_spatial || h1.ncols() != n_spatial || eri.n != n_spatial {
            return Err(SavqeError::ShapeMismatch(format!(
                "integral arrays do not match {n_spatial} orbitals"
            )));
        }
        Ok(ActiveSpaceHamiltonian {
            n_spatial,
            n_electrons,
            ms2,
            core_energy,
            h1,
            eri,
        })
    }

    pub fn from_fcidump(path: impl AsRef<Path>) -> Result<Self> {
        parse_fcidump_path(path.as_ref())
    }

    pub fn n_spatial(&self) -> usize {
        self.n_spatial
    }

    pub fn n_electrons(&self) -> u32 {
        self.n_electrons
    }

    pub fn ms2(&self) -> i32 {
        self.ms2
    }

    pub fn core_energy(&self) -> f64 {
        self.core_energy
    }

    pub fn h1(&self) -> &DMatrix<f64> {
        &self.h1
    }

    pub fn eri(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.eri.get(p, q, r, s)
    }

    /// Alpha/beta electron counts implied by `NELEC` and `MS2`.
    pub fn default_sector(&self) -> (u32, u32) {
        let na = (self.n_electrons as i32 + self.ms2) / 2;
        let nb = (self.n_electrons as i32 - self.ms2) / 2;
        (na as u32, nb as u32)
    }

    /// Determinant basis of the particle sector named in the header.
    pub fn sector_basis(&self) -> Arc<DetBasis> {
        let (na, nb) = self.default_sector();
        DetBasis::sector(self.n_spatial, na, nb)
    }

    /// Hex digest identifying the parsed content (orbital count, electron
    /// count, spin, and all integrals at fixed precision).
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!(
            "norb={};nelec={};ms2={};core={:.14e};",
            self.n_spatial, self.n_electrons, self.ms2, self.core_energy
        ));
        for p in 0..self.n_spatial {
            for q in 0..=p {
                hasher.update(format!("h{p},{q}={:.14e};", self.h1[(p, q)]));
            }
        }
        for p in 0..self.n_spatial {
            for q in 0..self.n_spatial {
                for r in 0..self.n_spatial {
                    for s in 0..self.n_spatial {
                        let v = self.eri.get(p, q, r, s);
                        if v != 0.0 {
                            hasher.update(format!("g{p},{q},{r},{s}={v:.14e};"));
                        }
                    }
                }
            }
        }
        hex_digest(hasher)
    }

    /// Full second-quantized form, including the core energy as an identity
    /// term. Exact but slow to compile; used to validate the fast route.
    pub fn to_fermion_operator(&self) -> FermionOperator {
        let n = self.n_spatial;
        let mut op = FermionOperator::term(self.core_energy, vec![]);
        for p in 0..n {
            for q in 0..n {
                let h = self.h1[(p, q)];
                if h != 0.0 {
                    op = op.add(&FermionOperator::e_singlet(p, q).scaled(h));
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let g = self.eri.get(p, q, r, s);
                        if g == 0.0 {
                            continue;
                        }
                        let e_pq = FermionOperator::e_singlet(p, q);
                        let e_rs = FermionOperator::e_singlet(r, s);
                        let mut two_body = e_pq.mul(&e_rs);
                        if q == r {
                            two_body = two_body.sub(&FermionOperator::e_singlet(p, s));
                        }
                        op = op.add(&two_body.scaled(0.5 * g));
                    }
                }
            }
        }
        op
    }

    /// Jordan-Wigner qubit form over `2 * n_spatial` qubits (interleaved
    /// spin orbitals). The core energy lands on the identity word.
    pub fn to_pauli_sum(&self) -> PauliSum {
        PauliSum::from_fermion_operator(&self.to_fermion_operator(), 2 * self.n_spatial)
    }

    /// Sparse matrix over `basis` via the Slater-Condon rules.
    pub fn compile(&self, basis: &Arc<DetBasis>) -> Result<SparseOp> {
        if basis.n_spatial() != self.n_spatial {
            return Err(SavqeError::Basis(format!(
                "basis spans {} orbitals but the Hamiltonian has {}",
                basis.n_spatial(),
                self.n_spatial
            )));
        }
        let dim = basis.dim();
        let mut triplets: Vec<(u32, u32, f64)> = Vec::new();
        for (col, &det) in basis.dets().iter().enumerate() {
            self.connected_elements(det, basis, &mut |row, value| {
                triplets.push((row as u32, col as u32, value));
            })?;
        }
        Ok(SparseOp::from_triplets(dim, dim, triplets))
    }

    /// Emit `(row, value)` for every `<D'|H|D>` with `D` fixed.
    fn connected_elements(
        &self,
        det: Determinant,
        basis: &Arc<DetBasis>,
        emit: &mut impl FnMut(usize, f64),
    ) -> Result<()> {
        let col = basis
            .index_of(det)
            .ok_or_else(|| SavqeError::Basis("determinant outside its own basis".to_string()))?;
        let occ_a = bits(det.alpha, self.n_spatial);
        let occ_b = bits(det.beta, self.n_spatial);
        let virt_a = anti_bits(det.alpha, self.n_spatial);
        let virt_b = anti_bits(det.beta, self.n_spatial);

        // diagonal
        let mut diag = self.core_energy;
        for &p in occ_a.iter().chain(&occ_b) {
            diag += self.h1[(p, p)];
        }
        for &p in &occ_a {
            for &q in &occ_a {
                diag += 0.5 * (self.eri.get(p, p, q, q) - self.eri.get(p, q, q, p));
            }
        }
        for &p in &occ_b {
            for &q in &occ_b {
                diag += 0.5 * (self.eri.get(p, p, q, q) - self.eri.get(p, q, q, p));
            }
        }
        for &p in &occ_a {
            for &q in &occ_b {
                diag += self.eri.get(p, p, q, q);
            }
        }
        emit(col, diag);

        // single excitations, each spin channel
        for (alpha_channel, occ, virt) in [(true, &occ_a, &virt_a), (false, &occ_b, &virt_b)] {
            for &p in occ.iter() {
                for &a in virt.iter() {
                    let mut val = self.h1[(p, a)];
                    for &q in occ_a.iter().chain(&occ_b) {
                        val += self.eri.get(p, a, q, q);
                    }
                    // exchange only against same-spin occupations
                    for &q in occ.iter() {
                        val -= self.eri.get(p, q, q, a);
                    }
                    if val == 0.0 {
                        continue;
                    }
                    let (d2, sign) = single_sub(det, alpha_channel, p, a);
                    let row = self.row_index(basis, d2)?;
                    emit(row, sign * val);
                }
            }
        }

        // same-spin double excitations
        for (alpha_channel, occ, virt) in [(true, &occ_a, &virt_a), (false, &occ_b, &virt_b)] {
            for (pi, &p) in occ.iter().enumerate() {
                for &q in occ.iter().skip(pi + 1) {
                    for (ai, &a) in virt.iter().enumerate() {
                        for &b in virt.iter().skip(ai + 1) {
                            let val = self.eri.get(p, a, q, b) - self.eri.get(p, b, q, a);
                            if val == 0.0 {
                                continue;
                            }
                            let (d1, s1) = single_sub(det, alpha_channel, p, a);
                            let (d2, s2) = single_sub(d1, alpha_channel, q, b);
                            let row = self.row_index(basis, d2)?;
                            emit(row, s1 * s2 * val);
                        }
                    }
                }
            }
        }

        // opposite-spin double excitations
        for &p in &occ_a {
            for &a in &virt_a {
                for &q in &occ_b {
                    for &b in &virt_b {
                        let val = self.eri.get(p, a, q, b);
                        if val == 0.0 {
                            continue;
                        }
                        let (d1, s1) = single_sub(det, true, p, a);
                        let (d2, s2) = single_sub(d1, false, q, b);
                        let row = self.row_index(basis, d2)?;
                        emit(row, s1 * s2 * val);
                    }
                }
            }
        }
        Ok(())
    }

    fn row_index(&self, basis: &Arc<DetBasis>, det: Determinant) -> Result<usize> {
        basis.index_of(det).ok_or_else(|| {
            SavqeError::Basis("Hamiltonian maps determinant out of the basis".to_string())
        })
    }
}

fn hex_digest(hasher: Sha256) -> String {
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Occupied spatial orbitals of one spin channel, ascending.
fn bits(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&p| mask >> p & 1 == 1).collect()
}

fn anti_bits(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&p| mask >> p & 1 == 0).collect()
}

/// Move one electron of the chosen channel from `p` to `a`; sign is the
/// parity of the occupied count strictly between them in the interleaved
/// spin-orbital string.
fn single_sub(det: Determinant, alpha_channel: bool, p: usize, a: usize) -> (Determinant, f64) {
    let so_p = 2 * p + usize::from(!alpha_channel);
    let so_a = 2 * a + usize::from(!alpha_channel);
    let (lo, hi) = if so_p < so_a {
        (so_p, so_a)
    } else {
        (so_a, so_p)
    };
    let between = det.count_below(hi) - det.count_below(lo + 1);
    let sign = if between.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut d = det;
    let mask_p = 1u32 << p;
    let mask_a = 1u32 << a;
    if alpha_channel {
        d.alpha = (d.alpha & !mask_p) | mask_a;
    } else {
        d.beta = (d.beta & !mask_p) | mask_a;
    }
    (d, sign)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::Statevector;

    fn h2_hamiltonian() -> ActiveSpaceHamiltonian {
        // minimal-basis H2 at 0.74 A (values generated alongside the test data)
        let text = "\
&FCI NORB=2,NELEC=2,MS2=0,
&END
  6.7475592824085295E-01 1 1 1 1
  1.8121046136704239E-01 2 1 2 1
  6.6371140025967934E-01 2 2 1 1
  6.9765150110988217E-01 2 2 2 2
 -1.2533097874026595E+00 1 1 0 0
 -4.7506885496107065E-01 2 2 0 0
  7.1510433905810811E-01 0 0 0 0
";
        parse_fcidump_str(text).unwrap()
    }

    #[test]
    fn slater_condon_matches_ladder_compile() {
        let h = h2_hamiltonian();
        for basis in [DetBasis::sector(2, 1, 1), DetBasis::full_jw(2)] {
            let fast = h.compile(&basis).unwrap().dense();
            let slow = h.to_fermion_operator().compile(&basis).unwrap().dense();
            assert!(
                (&fast - &slow).norm() < 1e-12,
                "mismatch on basis {:?}: {}",
                basis.kind(),
                (&fast - &slow).norm()
            );
        }
    }

    #[test]
    fn hamiltonian_is_symmetric() {
        let h = h2_hamiltonian();
        let m = h.compile(&DetBasis::sector(2, 1, 1)).unwrap().dense();
        assert!((m.transpose() - &m).norm() < 1e-12);
    }

    #[test]
    fn closed_shell_energy_expectation() {
        // <2 0|H|2 0> reproduces the restricted mean-field energy of H2
        let h = h2_hamiltonian();
        let basis = DetBasis::sector(2, 1, 1);
        let v = Statevector::unit(basis.clone(), Determinant::new(0b1, 0b1)).unwrap();
        let hv = h.compile(&basis).unwrap().apply(&v.amplitudes);
        let e: f64 = v
            .amplitudes
            .iter()
            .zip(&hv)
            .map(|(a, b)| (a.conj() * b).re)
            .sum();
        assert!((e - -1.1167593075063587).abs() < 1e-10, "got {e}");
    }

    #[test]
    fn ground_state_energy() {
        let h = h2_hamiltonian();
        let m = h.compile(&DetBasis::sector(2, 1, 1)).unwrap().dense();
        let eig = m.symmetric_eigen();
        let e0 = eig
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert!((e0 - -1.1372838346519656).abs() < 1e-10, "got {e0}");
    }

    #[test]
    fn content_hash_is_stable_and_sensitive() {
        let h = h2_hamiltonian();
        let a = h.content_hash();
        assert_eq!(a, h2_hamiltonian().content_hash());
        let mut h2 = h.clone();
        h2.core_energy += 1e-6;
        assert_ne!(a, h2.content_hash());
    }

    #[test]
    fn full_jw_block_structure() {
        // the Hamiltonian must not connect different particle-number sectors
        let h = h2_hamiltonian();
        let basis = DetBasis::full_jw(2);
        let m = h.compile(&basis).unwrap();
        let dets = basis.dets();
        let dense = m.dense();
        for i in 0..basis.dim() {
            for j in 0..basis.dim() {
                if dense[(i, j)] != 0.0 {
                    assert_eq!(dets[i].n_alpha(), dets[j].n_alpha());
                    assert_eq!(dets[i].n_beta(), dets[j].n_beta());
                }
            }
        }
    }
}
