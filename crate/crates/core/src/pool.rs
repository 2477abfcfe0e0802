//! Spin-adapted excitation pool for unitary ansatz construction.
//!
//! Every pool entry is an anti-Hermitian generator `G = T - T^+` built from
//! spin-free excitations `E_pq`, so each exponential gate `exp(theta G)`
//! conserves particle number, `S_z`, and total spin `S^2` exactly. Three
//! families are enumerated over an occupied/virtual split of the spatial
//! orbitals:
//!
//! - singles `T = E_ai / sqrt(2)`,
//! - symmetric pair doubles (`i <= j`, `a <= b`)
//!   `T = (E_ai E_bj + E_aj E_bi) / (2 sqrt((1+d_ij)(1+d_ab)))`,
//! - antisymmetric pair doubles (`i < j`, `a < b`)
//!   `T = (E_ai E_bj - E_aj E_bi) / (2 sqrt(3))`.
//!
//! For `o` occupied and `v` virtual orbitals the pool size is
//! `ov + ov(o+1)(v+1)/4 + o(o-1)v(v-1)/4`.

use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::{Result, SavqeError};
use crate::fermion::FermionOperator;

/// Index structure of one pool generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    /// `i -> a`.
    Single { i: usize, a: usize },
    /// Symmetric combination of `i -> a, j -> b` and `i -> b, j -> a`.
    PairSymmetric {
        i: usize,
        j: usize,
        a: usize,
        b: usize,
    },
    /// Antisymmetric combination of the same excitation pair.
    PairAntisymmetric {
        i: usize,
        j: usize,
        a: usize,
        b: usize,
    },
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GeneratorKind::Single { i, a } => write!(f, "single({i}->{a})"),
            GeneratorKind::PairSymmetric { i, j, a, b } => {
                write!(f, "pair+({i},{j}->{a},{b})")
            }
            GeneratorKind::PairAntisymmetric { i, j, a, b } => {
                write!(f, "pair-({i},{j}->{a},{b})")
            }
        }
    }
}

/// One normalized excitation `T` with its anti-Hermitian generator.
#[derive(Debug, Clone)]
pub struct PoolOperator {
    pub id: usize,
    pub kind: GeneratorKind,
    pub generator: FermionOperator,
}

/// Ordered, immutable pool with a content hash for parameter-file alignment.
#[derive(Debug)]
pub struct OperatorPool {
    occupied: Vec<usize>,
    virtuals: Vec<usize>,
    ops: Vec<PoolOperator>,
    hash: String,
}

impl OperatorPool {
    /// Build the full singles-plus-pair-doubles pool over explicit orbital
    /// sets. `occupied` and `virtuals` must be disjoint and non-empty.
    pub fn build(occupied: &[usize], virtuals: &[usize]) -> Result<Self> {
        if occupied.is_empty() || virtuals.is_empty() {
            return Err(SavqeError::Partition(
                "occupied and virtual orbital sets must both be non-empty".to_string(),
            ));
        }
        for i in occupied {
            if virtuals.contains(i) {
                return Err(SavqeError::Partition(format!(
                    "orbital {i} appears in both occupied and virtual sets"
                )));
            }
        }
        let mut kinds = Vec::new();
        for &i in occupied {
            for &a in virtuals {
                kinds.push(GeneratorKind::Single { i, a });
            }
        }
        for (ii, &i) in occupied.iter().enumerate() {
            for &j in &occupied[ii..] {
                for (ai, &a) in virtuals.iter().enumerate() {
                    for &b in &virtuals[ai..] {
                        kinds.push(GeneratorKind::PairSymmetric { i, j, a, b });
                    }
                }
            }
        }
        for (ii, &i) in occupied.iter().enumerate() {
            for &j in &occupied[ii + 1..] {
                for (ai, &a) in virtuals.iter().enumerate() {
                    for &b in &virtuals[ai + 1..] {
                        kinds.push(GeneratorKind::PairAntisymmetric { i, j, a, b });
                    }
                }
            }
        }
        let ops: Vec<PoolOperator> = kinds
            .into_iter()
            .enumerate()
            .map(|(id, kind)| PoolOperator {
                id,
                kind,
                generator: generator_for(kind),
            })
            .collect();
        let mut hasher = Sha256::new();
        hasher.update(b"pool-v1;");
        for op in &ops {
            hasher.update(format!("{};", op.kind));
        }
        let hash = hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        Ok(OperatorPool {
            occupied: occupied.to_vec(),
            virtuals: virtuals.to_vec(),
            ops,
            hash,
        })
    }

    /// Mean-field partition for a closed-shell electron count: the lowest
    /// `n_electrons / 2` orbitals are occupied, the rest virtual.
    pub fn build_closed_shell(n_spatial: usize, n_electrons: u32) -> Result<Self> {
        if !n_electrons.is_multiple_of(2) {
            return Err(SavqeError::Partition(format!(
                "closed-shell partition requires an even electron count, got {n_electrons}"
            )));
        }
        let n_occ = (n_electrons / 2) as usize;
        if n_occ == 0 || n_occ >= n_spatial {
            return Err(SavqeError::Partition(format!(
                "{n_electrons} electrons in {n_spatial} orbitals leaves no occupied/virtual split"
            )));
        }
        let occupied: Vec<usize> = (0..n_occ).collect();
        let virtuals: Vec<usize> = (n_occ..n_spatial).collect();
        OperatorPool::build(&occupied, &virtuals)
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[PoolOperator] {
        &self.ops
    }

    pub fn op(&self, id: usize) -> Option<&PoolOperator> {
        self.ops.get(id)
    }

    pub fn occupied(&self) -> &[usize] {
        &self.occupied
    }

    pub fn virtuals(&self) -> &[usize] {
        &self.virtuals
    }

    /// Hex digest of the pool layout (family, index order, normalization
    /// scheme). Two pools with equal hashes produce interchangeable
    /// parameter vectors.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn n_singles(&self) -> usize {
        self.ops
            .iter()
            .filter(|o| matches!(o.kind, GeneratorKind::Single { .. }))
            .count()
    }

    pub fn n_doubles(&self) -> usize {
        self.len() - self.n_singles()
    }
}

/// Normalized excitation `T` for one index structure.
fn excitation_for(kind: GeneratorKind) -> FermionOperator {
    match kind {
        GeneratorKind::Single { i, a } => {
            FermionOperator::e_singlet(a, i).scaled(1.0 / 2.0f64.sqrt())
        }
        GeneratorKind::PairSymmetric { i, j, a, b } => {
            let delta = |x: usize, y: usize| if x == y { 2.0f64 } else { 1.0f64 };
            let norm = 1.0 / (2.0 * (delta(i, j) * delta(a, b)).sqrt());
            let direct = FermionOperator::e_singlet(a, i).mul(&FermionOperator::e_singlet(b, j));
            let swapped = FermionOperator::e_singlet(a, j).mul(&FermionOperator::e_singlet(b, i));
            direct.add(&swapped).scaled(norm)
        }
        GeneratorKind::PairAntisymmetric { i, j, a, b } => {
            let norm = 1.0 / (2.0 * 3.0f64.sqrt());
            let direct = FermionOperator::e_singlet(a, i).mul(&FermionOperator::e_singlet(b, j));
            let swapped = FermionOperator::e_singlet(a, j).mul(&FermionOperator::e_singlet(b, i));
            direct.sub(&swapped).scaled(norm)
        }
    }
}

fn generator_for(kind: GeneratorKind) -> FermionOperator {
    let t = excitation_for(kind);
    t.sub(&t.adjoint())
}
