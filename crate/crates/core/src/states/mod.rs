//! Determinants, basis enumerations, and statevector storage.
//!
//! Spin orbitals are interleaved: index `2p` is spatial orbital `p` with
//! alpha spin, `2p+1` the same orbital with beta spin. A determinant is the
//! canonical creation string in ascending spin-orbital order applied to the
//! vacuum; with that ordering its full Jordan-Wigner basis index is simply
//! the occupation bitmask (bit `k` = spin orbital `k`).

mod csf;
mod spin;

pub use csf::{enumerate_csf_basis, project_csf_weights, CsfReference, OrbOcc};
pub use spin::{n_alpha_operator, n_beta_operator, number_operator, s2_operator, sz_operator};

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Result, SavqeError};

/// Occupation bitmasks over spatial orbitals, one per spin channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Determinant {
    pub alpha: u32,
    pub beta: u32,
}

impl Determinant {
    pub fn new(alpha: u32, beta: u32) -> Self {
        Determinant { alpha, beta }
    }

    pub fn n_alpha(&self) -> u32 {
        self.alpha.count_ones()
    }

    pub fn n_beta(&self) -> u32 {
        self.beta.count_ones()
    }

    pub fn n_electrons(&self) -> u32 {
        self.n_alpha() + self.n_beta()
    }

    /// Full Jordan-Wigner basis index (interleaved spin orbitals).
    pub fn jw_index(&self) -> usize {
        let mut idx = 0usize;
        let mut a = self.alpha;
        while a != 0 {
            let p = a.trailing_zeros();
            idx |= 1 << (2 * p);
            a &= a - 1;
        }
        let mut b = self.beta;
        while b != 0 {
            let p = b.trailing_zeros();
            idx |= 1 << (2 * p + 1);
            b &= b - 1;
        }
        idx
    }

    /// Inverse of [`jw_index`](Self::jw_index).
    pub fn from_jw_index(idx: usize, n_spatial: usize) -> Self {
        let mut alpha = 0u32;
        let mut beta = 0u32;
        for p in 0..n_spatial {
            if idx >> (2 * p) & 1 == 1 {
                alpha |= 1 << p;
            }
            if idx >> (2 * p + 1) & 1 == 1 {
                beta |= 1 << p;
            }
        }
        Determinant { alpha, beta }
    }

    /// Number of occupied spin orbitals with index strictly below `so`.
    pub fn count_below(&self, so: usize) -> u32 {
        let p = (so / 2) as u32;
        let low = (1u32 << p) - 1;
        if so.is_multiple_of(2) {
            (self.alpha & low).count_ones() + (self.beta & low).count_ones()
        } else {
            (self.alpha & ((1u32 << (p + 1)) - 1)).count_ones() + (self.beta & low).count_ones()
        }
    }
}

/// Which slice of Fock space a basis spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    /// All `4^M` occupation states, indexed by the JW bitmask.
    FullJw,
    /// Fixed particle numbers per spin channel.
    Sector { n_alpha: u32, n_beta: u32 },
}

/// Ordered determinant list with index lookup.
#[derive(Debug)]
pub struct DetBasis {
    n_spatial: usize,
    kind: BasisKind,
    dets: Vec<Determinant>,
    index: HashMap<Determinant, u32>,
}

/// Ascending enumeration of all masks over `m` bits with `k` bits set.
fn masks_with_popcount(m: usize, k: u32) -> Vec<u32> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << m) {
        if mask.count_ones() == k {
            out.push(mask);
        }
    }
    out
}

impl DetBasis {
    pub fn full_jw(n_spatial: usize) -> Arc<Self> {
        assert!(
            n_spatial <= 16,
            "full JW basis limited to 16 spatial orbitals"
        );
        let dim = 1usize << (2 * n_spatial);
        let dets = (0..dim)
            .map(|i| Determinant::from_jw_index(i, n_spatial))
            .collect();
        Arc::new(DetBasis {
            n_spatial,
            kind: BasisKind::FullJw,
            dets,
            index: HashMap::new(),
        })
    }

    pub fn sector(n_spatial: usize, n_alpha: u32, n_beta: u32) -> Arc<Self> {
        assert!(n_alpha as usize <= n_spatial && n_beta as usize <= n_spatial);
        let alphas = masks_with_popcount(n_spatial, n_alpha);
        let betas = masks_with_popcount(n_spatial, n_beta);
        let mut dets = Vec::with_capacity(alphas.len() * betas.len());
        for &a in &alphas {
            for &b in &betas {
                dets.push(Determinant::new(a, b));
            }
        }
        let index = dets
            .iter()
            .enumerate()
            .map(|(i, &d)| (d, i as u32))
            .collect();
        Arc::new(DetBasis {
            n_spatial,
            kind: BasisKind::Sector { n_alpha, n_beta },
            dets,
            index,
        })
    }

    pub fn n_spatial(&self) -> usize {
        self.n_spatial
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dets.len()
    }

    pub fn dets(&self) -> &[Determinant] {
        &self.dets
    }

    pub fn det(&self, i: usize) -> Determinant {
        self.dets[i]
    }

    pub fn index_of(&self, det: Determinant) -> Option<usize> {
        match self.kind {
            BasisKind::FullJw => Some(det.jw_index()),
            BasisKind::Sector { .. } => self.index.get(&det).map(|&i| i as usize),
        }
    }

    pub fn same_space(&self, other: &DetBasis) -> bool {
        self.n_spatial == other.n_spatial && self.kind == other.kind
    }
}

/// Complex amplitude vector over a determinant basis.
#[derive(Debug, Clone)]
pub struct Statevector {
    pub basis: Arc<DetBasis>,
    pub amplitudes: Vec<Complex64>,
}

impl Statevector {
    pub fn zero(basis: Arc<DetBasis>) -> Self {
        let dim = basis.dim();
        Statevector {
            basis,
            amplitudes: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    pub fn from_amplitudes(basis: Arc<DetBasis>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(SavqeError::ShapeMismatch(format!(
                "amplitude vector of length {} for basis of dimension {}",
                amplitudes.len(),
                basis.dim()
            )));
        }
        Ok(Statevector { basis, amplitudes })
    }

    /// One-hot state on a single determinant.
    pub fn unit(basis: Arc<DetBasis>, det: Determinant) -> Result<Self> {
        let idx = basis.index_of(det).ok_or_else(|| {
            SavqeError::Basis(format!(
                "determinant {det:?} not in basis {:?}",
                basis.kind()
            ))
        })?;
        let mut v = Statevector::zero(basis);
        v.amplitudes[idx] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `<self|other>` with the left argument conjugated.
    pub fn dot(&self, other: &Statevector) -> Complex64 {
        debug_assert!(self.basis.same_space(&other.basis));
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        for a in &mut self.amplitudes {
            *a *= s;
        }
    }

    pub fn add_scaled(&mut self, other: &Statevector, s: Complex64) {
        debug_assert!(self.basis.same_space(&other.basis));
        for (a, b) in self.amplitudes.iter_mut().zip(&other.amplitudes) {
            *a += s * b;
        }
    }

    pub fn check_same_space(&self, other: &DetBasis) -> Result<()> {
        if self.basis.same_space(other) {
            Ok(())
        } else {
            Err(SavqeError::ShapeMismatch(format!(
                "statevector basis {:?} does not match {:?}",
                self.basis.kind(),
                other.kind()
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jw_index_round_trip() {
        for idx in 0..256 {
            let d = Determinant::from_jw_index(idx, 4);
            assert_eq!(d.jw_index(), idx);
        }
    }

    #[test]
    fn interleaved_convention() {
        // alpha in spatial orbital 0 -> qubit 0, beta -> qubit 1
        assert_eq!(Determinant::new(0b1, 0).jw_index(), 0b01);
        assert_eq!(Determinant::new(0, 0b1).jw_index(), 0b10);
        assert_eq!(Determinant::new(0b10, 0b1).jw_index(), 0b0110);
    }

    #[test]
    fn sector_dimensions() {
        assert_eq!(DetBasis::sector(4, 2, 2).dim(), 36);
        assert_eq!(DetBasis::sector(2, 1, 1).dim(), 4);
        assert_eq!(DetBasis::sector(8, 5, 5).dim(), 3136);
    }

    #[test]
    fn count_below_interleaving() {
        // alpha mask 0b11, beta 0b01: spin orbitals 0,1,2 occupied
        let d = Determinant::new(0b11, 0b01);
        assert_eq!(d.count_below(0), 0);
        assert_eq!(d.count_below(1), 1);
        assert_eq!(d.count_below(2), 2);
        assert_eq!(d.count_below(3), 3);
        assert_eq!(d.count_below(4), 3);
    }

    #[test]
    fn unit_vector_has_norm_one() {
        let basis = DetBasis::sector(2, 1, 1);
        let v = Statevector::unit(basis, Determinant::new(0b1, 0b1)).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-15);
    }
}
