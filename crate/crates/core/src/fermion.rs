//! Second-quantized operator algebra on spin orbitals.
//!
//! Operators are sums of normal-unordered ladder products with real
//! coefficients. Application to determinants uses the Jordan-Wigner parity
//! convention consistent with canonical (ascending spin-orbital) creation
//! strings: acting with `a_k` or `a^+_k` picks up `(-1)^(number of occupied
//! spin orbitals below k)`.

use std::sync::Arc;

use crate::error::{Result, SavqeError};
use crate::sparse::SparseOp;
use crate::states::{DetBasis, Determinant};

/// Spin of a spin orbital in the interleaved convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Alpha,
    Beta,
}

/// Spin-orbital index: `2p` alpha, `2p+1` beta on spatial orbital `p`.
pub fn spin_orbital(p: usize, spin: Spin) -> usize {
    match spin {
        Spin::Alpha => 2 * p,
        Spin::Beta => 2 * p + 1,
    }
}

/// Single ladder operator on a spin orbital.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ladder {
    pub orbital: usize,
    pub create: bool,
}

impl Ladder {
    pub fn create(orbital: usize) -> Self {
        Ladder {
            orbital,
            create: true,
        }
    }

    pub fn annihilate(orbital: usize) -> Self {
        Ladder {
            orbital,
            create: false,
        }
    }
}

/// Product of ladder operators (leftmost acts last) with a coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderTerm {
    pub coeff: f64,
    pub ops: Vec<Ladder>,
}

impl LadderTerm {
    /// Apply to a determinant; returns the resulting determinant and sign,
    /// or `None` if the term annihilates it.
    pub fn apply_det(&self, det: Determinant) -> Option<(Determinant, f64)> {
        let mut d = det;
        let mut sign = 1.0f64;
        for op in self.ops.iter().rev() {
            let mask = 1u32 << (op.orbital / 2);
            let is_alpha = op.orbital % 2 == 0;
            let channel = if is_alpha { d.alpha } else { d.beta };
            let occupied = channel & mask != 0;
            if op.create == occupied {
                return None;
            }
            // the strict below-count is unaffected by toggling bit k itself
            if d.count_below(op.orbital) % 2 == 1 {
                sign = -sign;
            }
            if is_alpha {
                d.alpha ^= mask;
            } else {
                d.beta ^= mask;
            }
        }
        Some((d, sign * self.coeff))
    }
}

/// Real-coefficient sum of ladder products.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FermionOperator {
    pub terms: Vec<LadderTerm>,
}

impl FermionOperator {
    pub fn new() -> Self {
        FermionOperator { terms: Vec::new() }
    }

    pub fn term(coeff: f64, ops: Vec<Ladder>) -> Self {
        FermionOperator {
            terms: vec![LadderTerm { coeff, ops }],
        }
    }

    /// Spin-free excitation `E_pq = a^+_{p,a} a_{q,a} + a^+_{p,b} a_{q,b}`.
    pub fn e_singlet(p: usize, q: usize) -> Self {
        FermionOperator {
            terms: vec![
                LadderTerm {
                    coeff: 1.0,
                    ops: vec![
                        Ladder::create(spin_orbital(p, Spin::Alpha)),
                        Ladder::annihilate(spin_orbital(q, Spin::Alpha)),
                    ],
                },
                LadderTerm {
                    coeff: 1.0,
                    ops: vec![
                        Ladder::create(spin_orbital(p, Spin::Beta)),
                        Ladder::annihilate(spin_orbital(q, Spin::Beta)),
                    ],
                },
            ],
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        FermionOperator {
            terms: self
                .terms
                .iter()
                .map(|t| LadderTerm {
                    coeff: s * t.coeff,
                    ops: t.ops.clone(),
                })
                .collect(),
        }
    }

    pub fn add(&self, other: &FermionOperator) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        FermionOperator { terms }
    }

    pub fn sub(&self, other: &FermionOperator) -> Self {
        self.add(&other.scaled(-1.0))
    }

    /// Operator product: `(self)(other)`, expanded term by term.
    pub fn mul(&self, other: &FermionOperator) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut ops = a.ops.clone();
                ops.extend(b.ops.iter().copied());
                terms.push(LadderTerm {
                    coeff: a.coeff * b.coeff,
                    ops,
                });
            }
        }
        FermionOperator { terms }
    }

    /// Hermitian adjoint (real coefficients: reverse each product and flip
    /// create/annihilate).
    pub fn adjoint(&self) -> Self {
        FermionOperator {
            terms: self
                .terms
                .iter()
                .map(|t| LadderTerm {
                    coeff: t.coeff,
                    ops: t
                        .ops
                        .iter()
                        .rev()
                        .map(|l| Ladder {
                            orbital: l.orbital,
                            create: !l.create,
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Largest spin-orbital index referenced, if any.
    pub fn max_orbital(&self) -> Option<usize> {
        self.terms
            .iter()
            .flat_map(|t| t.ops.iter().map(|l| l.orbital))
            .max()
    }

    /// Compile to a sparse matrix over the given basis. Matrix element
    /// convention: `A[index(d'), index(d)] += amp` for every `d` in the basis
    /// with `term |d> = amp |d'>`. Determinants produced outside the basis
    /// are an error for sector bases (the operator must preserve the sector).
    pub fn compile(&self, basis: &Arc<DetBasis>) -> Result<SparseOp> {
        let n_so = 2 * basis.n_spatial();
        if let Some(m) = self.max_orbital() {
            if m >= n_so {
                return Err(SavqeError::Basis(format!(
                    "operator references spin orbital {m} but basis has only {n_so}"
                )));
            }
        }
        let dim = basis.dim();
        let mut triplets: Vec<(u32, u32, f64)> = Vec::new();
        for (col, &det) in basis.dets().iter().enumerate() {
            for term in &self.terms {
                if let Some((d, amp)) = term.apply_det(det) {
                    if amp == 0.0 {
                        continue;
                    }
                    let row = basis.index_of(d).ok_or_else(|| {
                        SavqeError::Basis(format!(
                            "operator maps determinant {det:?} out of sector basis"
                        ))
                    })?;
                    triplets.push((row as u32, col as u32, amp));
                }
            }
        }
        Ok(SparseOp::from_triplets(dim, dim, triplets))
    }
}
