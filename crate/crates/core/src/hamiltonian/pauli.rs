//! Jordan-Wigner mapping of fermionic operators to qubit Pauli sums.
//!
//! Qubit `k` carries the occupation of spin orbital `k` (interleaved
//! convention), and ladder operators acquire the usual Z string on all lower
//! qubits. Products are accumulated in the symplectic `X^x Z^z`
//! representation and converted to `I/X/Y/Z` words at the end, so stored
//! coefficients of Hermitian operators come out real.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;

use crate::fermion::FermionOperator;

/// Single-qubit Pauli axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PauliAxis {
    I,
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub fn to_char(self) -> char {
        match self {
            PauliAxis::I => 'I',
            PauliAxis::X => 'X',
            PauliAxis::Y => 'Y',
            PauliAxis::Z => 'Z',
        }
    }
}

/// Tensor product of Pauli axes (`axes[0]` on qubit 0) with a real weight.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliWord {
    pub coeff: f64,
    pub axes: Vec<PauliAxis>,
}

impl PauliWord {
    pub fn is_identity(&self) -> bool {
        self.axes.iter().all(|&a| a == PauliAxis::I)
    }

    /// Symplectic masks `(x, z)` and the phase exponent `n_y` with
    /// `W = i^{n_y} X^x Z^z`.
    fn symplectic(&self) -> (u64, u64, u32) {
        let mut x = 0u64;
        let mut z = 0u64;
        for (k, &a) in self.axes.iter().enumerate() {
            match a {
                PauliAxis::I => {}
                PauliAxis::X => x |= 1 << k,
                PauliAxis::Y => {
                    x |= 1 << k;
                    z |= 1 << k;
                }
                PauliAxis::Z => z |= 1 << k,
            }
        }
        (x, z, (x & z).count_ones())
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+.12e} ", self.coeff)?;
        for a in &self.axes {
            write!(f, "{}", a.to_char())?;
        }
        Ok(())
    }
}

/// Real-weighted sum of Pauli words on a fixed qubit count.
#[derive(Debug, Clone)]
pub struct PauliSum {
    n_qubits: usize,
    words: Vec<PauliWord>,
}

/// Coefficients below this magnitude are treated as mapping round-off and
/// dropped.
const COEFF_CUTOFF: f64 = 1e-12;

impl PauliSum {
    /// Map a real-coefficient fermionic operator over `n_qubits` spin
    /// orbitals. Panics if the mapped coefficients are not real, which for a
    /// Hermitian input would indicate a mapping bug.
    pub fn from_fermion_operator(op: &FermionOperator, n_qubits: usize) -> Self {
        assert!(n_qubits <= 64, "symplectic masks are limited to 64 qubits");
        let mut acc: HashMap<(u64, u64), Complex64> = HashMap::new();
        for term in &op.terms {
            let mut product: HashMap<(u64, u64), Complex64> = HashMap::new();
            product.insert((0, 0), Complex64::new(term.coeff, 0.0));
            for ladder in &term.ops {
                assert!(ladder.orbital < n_qubits);
                let site = 1u64 << ladder.orbital;
                let string = site - 1; // Z on every qubit below
                let sign = if ladder.create { 0.5 } else { -0.5 };
                let factors = [((site, string), 0.5), ((site, site | string), sign)];
                let mut next: HashMap<(u64, u64), Complex64> = HashMap::new();
                for (&(x1, z1), &c1) in &product {
                    for &((x2, z2), c2) in &factors {
                        let phase = if (z1 & x2).count_ones() % 2 == 1 {
                            -1.0
                        } else {
                            1.0
                        };
                        *next
                            .entry((x1 ^ x2, z1 ^ z2))
                            .or_insert(Complex64::new(0.0, 0.0)) += c1 * c2 * phase;
                    }
                }
                product = next;
            }
            for (key, c) in product {
                *acc.entry(key).or_insert(Complex64::new(0.0, 0.0)) += c;
            }
        }
        let mut words = Vec::new();
        for ((x, z), c) in acc {
            let n_y = (x & z).count_ones();
            // X^x Z^z = (-i)^{-n_y} W  =>  coefficient of W is c * (-i)^{n_y}
            let w_coeff = c * Complex64::new(0.0, -1.0).powu(n_y);
            assert!(
                w_coeff.im.abs() < 1e-9,
                "non-real Pauli coefficient {w_coeff} for masks ({x:#b},{z:#b})"
            );
            if w_coeff.re.abs() < COEFF_CUTOFF {
                continue;
            }
            let axes = (0..n_qubits)
                .map(|k| match (x >> k & 1, z >> k & 1) {
                    (0, 0) => PauliAxis::I,
                    (1, 0) => PauliAxis::X,
                    (1, 1) => PauliAxis::Y,
                    (0, 1) => PauliAxis::Z,
                    _ => unreachable!(),
                })
                .collect();
            words.push(PauliWord {
                coeff: w_coeff.re,
                axes,
            });
        }
        words.sort_by(|a, b| a.axes.cmp(&b.axes));
        PauliSum { n_qubits, words }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_words(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[PauliWord] {
        &self.words
    }

    /// Weight of the all-identity word (zero when absent).
    pub fn identity_coefficient(&self) -> f64 {
        self.words
            .iter()
            .find(|w| w.is_identity())
            .map_or(0.0, |w| w.coeff)
    }

    /// Apply to a full `2^n` amplitude vector indexed by occupation bitmask.
    pub fn apply(&self, input: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(input.len(), 1 << self.n_qubits);
        let mut out = vec![Complex64::new(0.0, 0.0); input.len()];
        for word in &self.words {
            let (x, z, n_y) = word.symplectic();
            let phase = Complex64::new(0.0, 1.0).powu(n_y) * word.coeff;
            for (b, amp) in input.iter().enumerate() {
                if amp.norm_sqr() == 0.0 {
                    continue;
                }
                let sign = if (z & b as u64).count_ones() % 2 == 1 {
                    -1.0
                } else {
                    1.0
                };
                out[b ^ x as usize] += phase * sign * amp;
            }
        }
        out
    }
}
