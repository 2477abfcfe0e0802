//! Exact diagonalization oracle with spin targeting.
//!
//! The active-space Hamiltonian is diagonalized in the particle sector named
//! by its header, with a level shift that pushes every state of the wrong
//! total spin above the spectrum: for singlet targets `H' = H + lambda S^2`,
//! and for general targets `H' = H + lambda (S^2 - s(s+1))^2`, where
//! `lambda` exceeds half the Gershgorin spectral width plus one. Small
//! problems are solved densely; larger ones iteratively, and the two routes
//! agree to the iterative residual tolerance.

mod davidson;

pub use davidson::{lowest_eigenpairs, DavidsonOptions};

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Result, SavqeError};
use crate::hamiltonian::ActiveSpaceHamiltonian;
use crate::sparse::SparseOp;
use crate::states::{
    enumerate_csf_basis, project_csf_weights, BasisKind, CsfReference, DetBasis, Statevector,
};

/// Controls for one oracle solve.
#[derive(Debug, Clone)]
pub struct CasciOptions {
    pub n_roots: usize,
    /// Twice the targeted total spin (0 = singlets).
    pub two_s: u32,
    /// Sector dimensions up to this bound use dense diagonalization.
    pub dense_cutoff: usize,
    /// Residual tolerance of the iterative eigensolver.
    pub residual_tol: f64,
}

impl CasciOptions {
    pub fn singlets(n_roots: usize) -> Self {
        CasciOptions {
            n_roots,
            two_s: 0,
            dense_cutoff: 4000,
            residual_tol: 1e-9,
        }
    }
}

/// Exact eigenstates of one spin target inside one particle sector.
#[derive(Debug, Clone)]
pub struct CasciResult {
    /// Ascending exact energies (Rayleigh quotients of the unshifted
    /// Hamiltonian).
    pub energies: Vec<f64>,
    /// `<S^2>` per root; all within tolerance of the target.
    pub s2_values: Vec<f64>,
    pub states: Vec<Statevector>,
    pub sector_dim: usize,
}

/// Diagonalize for the lowest `n_roots` states of the requested spin.
pub fn casci_solve(
    hamiltonian: &ActiveSpaceHamiltonian,
    opts: &CasciOptions,
) -> Result<CasciResult> {
    let basis = hamiltonian.sector_basis();
    let dim = basis.dim();
    if opts.n_roots == 0 || opts.n_roots > dim {
        return Err(SavqeError::Config(format!(
            "requested {} roots from a sector of dimension {dim}",
            opts.n_roots
        )));
    }
    let h_op = hamiltonian.compile(&basis)?;
    let s2_op = crate::states::s2_operator(hamiltonian.n_spatial()).compile(&basis)?;
    let (lo, hi) = h_op.gershgorin_interval();
    let lambda = 0.5 * (hi - lo) + 1.0;
    let target = opts.two_s as f64 / 2.0 * (opts.two_s as f64 / 2.0 + 1.0);

    // shifted operator action: H + lambda * penalty(S^2)
    let shifted_apply = |v: &[f64]| -> Vec<f64> {
        let mut out = h_op.apply_real(v);
        if opts.two_s == 0 {
            let s2v = s2_op.apply_real(v);
            for (o, s) in out.iter_mut().zip(&s2v) {
                *o += lambda * s;
            }
        } else {
            // (S^2 - t)^2 applied as two passes
            let mut s2v = s2_op.apply_real(v);
            for (s, x) in s2v.iter_mut().zip(v) {
                *s -= target * x;
            }
            let mut s2v2 = s2_op.apply_real(&s2v);
            for (s, x) in s2v2.iter_mut().zip(&s2v) {
                *s -= target * x;
            }
            for (o, s) in out.iter_mut().zip(&s2v2) {
                *o += lambda * s;
            }
        }
        out
    };

    let vectors: Vec<Vec<f64>> = if dim <= opts.dense_cutoff {
        dense_lowest(&shifted_apply, dim, opts.n_roots)
    } else {
        let h_diag = h_op.diagonal();
        let s2_diag = s2_op.diagonal();
        let diag: Vec<f64> = h_diag
            .iter()
            .zip(&s2_diag)
            .map(|(&h, &s)| {
                let pen = if opts.two_s == 0 {
                    s
                } else {
                    (s - target) * (s - target)
                };
                h + lambda * pen
            })
            .collect();
        let dv_opts = DavidsonOptions {
            residual_tol: opts.residual_tol,
            ..DavidsonOptions::default()
        };
        let seeds = csf_seeds(hamiltonian, &basis, &h_diag, opts);
        let (_, vecs) = lowest_eigenpairs(&shifted_apply, &diag, opts.n_roots, &seeds, &dv_opts)?;
        vecs
    };

    let mut roots: Vec<(f64, f64, Vec<f64>)> = vectors
        .into_iter()
        .map(|v| {
            let hv = h_op.apply_real(&v);
            let s2v = s2_op.apply_real(&v);
            let norm2: f64 = v.iter().map(|x| x * x).sum();
            let e = v.iter().zip(&hv).map(|(a, b)| a * b).sum::<f64>() / norm2;
            let s2 = v.iter().zip(&s2v).map(|(a, b)| a * b).sum::<f64>() / norm2;
            (e, s2, v)
        })
        .collect();
    roots.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite energies"));

    for (i, (e, s2, _)) in roots.iter().enumerate() {
        if (s2 - target).abs() > 1e-6 {
            return Err(SavqeError::Convergence {
                msg: format!(
                    "root {i} at energy {e:.8} has <S^2> = {s2:.6}, expected {target:.1}; \
                     the sector holds fewer than {} such states",
                    opts.n_roots
                ),
            });
        }
    }

    let states = roots
        .iter()
        .map(|(_, _, v)| {
            let amplitudes = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            Statevector::from_amplitudes(basis.clone(), amplitudes)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(CasciResult {
        energies: roots.iter().map(|r| r.0).collect(),
        s2_values: roots.iter().map(|r| r.1).collect(),
        states,
        sector_dim: dim,
    })
}

/// Start vectors for the iterative route: CSFs of the target spin, ranked
/// by their diagonal energy expectation. Seeding inside the right spin
/// subspace keeps weakly coupled roots (open-shell singlets above a sea of
/// closed-shell determinants, say) from being skipped. Falls back to no
/// seeds when the sector's magnetization cannot host CSFs built at M = S.
fn csf_seeds(
    hamiltonian: &ActiveSpaceHamiltonian,
    basis: &Arc<DetBasis>,
    h_diag: &[f64],
    opts: &CasciOptions,
) -> Vec<Vec<f64>> {
    let (na, nb) = hamiltonian.default_sector();
    if na as i64 - nb as i64 != opts.two_s as i64 {
        return Vec::new();
    }
    let csfs = enumerate_csf_basis(
        hamiltonian.n_spatial(),
        hamiltonian.n_electrons(),
        opts.two_s,
    );
    let expansions: Vec<Vec<(usize, f64)>> = csfs
        .iter()
        .map(|c| {
            c.expand()
                .into_iter()
                .map(|(det, w)| {
                    let idx = basis
                        .index_of(det)
                        .expect("CSF determinants lie inside the sector");
                    (idx, w)
                })
                .collect()
        })
        .collect();
    let mut order: Vec<usize> = (0..csfs.len()).collect();
    let score = |i: usize| -> f64 {
        expansions[i]
            .iter()
            .map(|&(idx, w)| w * w * h_diag[idx])
            .sum()
    };
    order.sort_by(|&a, &b| score(a).partial_cmp(&score(b)).expect("finite diagonal"));
    let block = (opts.n_roots + 2).min(basis.dim());
    order
        .into_iter()
        .take(block)
        .map(|i| {
            let mut v = vec![0.0; basis.dim()];
            for &(idx, w) in &expansions[i] {
                v[idx] = w;
            }
            v
        })
        .collect()
}

/// Dense route: materialize the shifted operator column by column.
fn dense_lowest(apply: &dyn Fn(&[f64]) -> Vec<f64>, dim: usize, n_roots: usize) -> Vec<Vec<f64>> {
    let mut m = nalgebra::DMatrix::<f64>::zeros(dim, dim);
    let mut unit = vec![0.0; dim];
    for col in 0..dim {
        unit[col] = 1.0;
        let av = apply(&unit);
        unit[col] = 0.0;
        for (row, v) in av.into_iter().enumerate() {
            m[(row, col)] = v;
        }
    }
    let m = 0.5 * (&m + m.transpose());
    let eig = m.symmetric_eigen();
    let mut idx: Vec<usize> = (0..dim).collect();
    idx.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("finite eigenvalues")
    });
    idx.iter()
        .take(n_roots)
        .map(|&col| (0..dim).map(|row| eig.eigenvectors[(row, col)]).collect())
        .collect()
}

/// Dominant CSF decomposition of a spin eigenstate: every CSF of the state's
/// sector and spin with squared overlap at least `min_weight`, heaviest
/// first (ties broken by pattern).
pub fn csf_character(
    state: &Statevector,
    two_s: u32,
    min_weight: f64,
) -> Result<Vec<(CsfReference, f64)>> {
    let BasisKind::Sector { n_alpha, n_beta } = state.basis.kind() else {
        return Err(SavqeError::Basis(
            "CSF characters require a particle-sector basis".to_string(),
        ));
    };
    let refs = enumerate_csf_basis(state.basis.n_spatial(), n_alpha + n_beta, two_s);
    let weights = project_csf_weights(state, &refs)?;
    let mut decorated: Vec<(CsfReference, f64)> = refs
        .into_iter()
        .zip(weights)
        .filter(|(_, w)| *w >= min_weight)
        .collect();
    decorated.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("finite weights")
            .then_with(|| a.0.to_string().cmp(&b.0.to_string()))
    });
    Ok(decorated)
}

/// Write amplitudes as little-endian binary: `u64` dimension, then
/// `(re, im)` pairs of `f64` per determinant in basis order.
pub fn write_civec(path: &Path, state: &Statevector) -> Result<()> {
    let mut bytes = Vec::with_capacity(8 + 16 * state.dim());
    bytes.extend_from_slice(&(state.dim() as u64).to_le_bytes());
    for amp in &state.amplitudes {
        bytes.extend_from_slice(&amp.re.to_le_bytes());
        bytes.extend_from_slice(&amp.im.to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(|e| SavqeError::io(path, e))
}

/// Inverse of [`write_civec`]; the dimension must match the basis.
pub fn read_civec(path: &Path, basis: Arc<DetBasis>) -> Result<Statevector> {
    let bytes = std::fs::read(path).map_err(|e| SavqeError::io(path, e))?;
    if bytes.len() < 8 {
        return Err(SavqeError::Format(format!(
            "{} is too short for an amplitude file",
            path.display()
        )));
    }
    let dim = u64::from_le_bytes(bytes[..8].try_into().expect("8 bytes")) as usize;
    if dim != basis.dim() {
        return Err(SavqeError::ShapeMismatch(format!(
            "amplitude file holds {dim} entries but the basis has {}",
            basis.dim()
        )));
    }
    if bytes.len() != 8 + 16 * dim {
        return Err(SavqeError::Format(format!(
            "{} has {} bytes, expected {}",
            path.display(),
            bytes.len(),
            8 + 16 * dim
        )));
    }
    let mut amplitudes = Vec::with_capacity(dim);
    for i in 0..dim {
        let at = 8 + 16 * i;
        let re = f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
        let im = f64::from_le_bytes(bytes[at + 8..at + 16].try_into().expect("8 bytes"));
        amplitudes.push(Complex64::new(re, im));
    }
    Statevector::from_amplitudes(basis, amplitudes)
}

/// Rayleigh quotient of the (unshifted) Hamiltonian for an externally
/// produced state.
pub fn rayleigh_energy(h_op: &SparseOp, state: &Statevector) -> f64 {
    let hv = h_op.apply(&state.amplitudes);
    let num: f64 = state
        .amplitudes
        .iter()
        .zip(&hv)
        .map(|(a, b)| (a.conj() * b).re)
        .sum();
    num / state.norm().powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::parse_fcidump_str;

    fn h2() -> ActiveSpaceHamiltonian {
        parse_fcidump_str(
            "\
&FCI NORB=2,NELEC=2,MS2=0,
&END
  6.7475592824085295E-01 1 1 1 1
  1.8121046136704239E-01 2 1 2 1
  6.6371140025967934E-01 2 2 1 1
  6.9765150110988217E-01 2 2 2 2
 -1.2533097874026595E+00 1 1 0 0
 -4.7506885496107065E-01 2 2 0 0
  7.1510433905810811E-01 0 0 0 0
",
        )
        .unwrap()
    }

    #[test]
    fn singlet_spectrum_skips_the_triplet() {
        // the 2-orbital sector holds 3 singlets and 1 triplet; all three
        // singlet energies must come back with <S^2> = 0
        let res = casci_solve(&h2(), &CasciOptions::singlets(3)).unwrap();
        assert_eq!(res.sector_dim, 4);
        assert!((res.energies[0] - -1.1372838346519656).abs() < 1e-10);
        assert!((res.energies[1] - -0.1683524416789004).abs() < 1e-10);
        assert!((res.energies[2] - 0.48314265739145673).abs() < 1e-10);
        for s2 in &res.s2_values {
            assert!(s2.abs() < 1e-8);
        }
    }

    #[test]
    fn too_many_roots_of_one_spin_is_an_error() {
        assert!(casci_solve(&h2(), &CasciOptions::singlets(4)).is_err());
    }

    #[test]
    fn triplet_target() {
        let opts = CasciOptions {
            two_s: 2,
            ..CasciOptions::singlets(1)
        };
        let res = casci_solve(&h2(), &opts).unwrap();
        assert!((res.s2_values[0] - 2.0).abs() < 1e-8);
        // the single triplet of the sector lies between the two lowest singlets
        assert!(res.energies[0] > -1.14 && res.energies[0] < -0.16);
    }

    #[test]
    fn dense_and_iterative_routes_agree() {
        let h = h2();
        let dense = casci_solve(&h, &CasciOptions::singlets(3)).unwrap();
        let iterative = casci_solve(
            &h,
            &CasciOptions {
                dense_cutoff: 0,
                ..CasciOptions::singlets(3)
            },
        )
        .unwrap();
        for (a, b) in dense.energies.iter().zip(&iterative.energies) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn ground_state_character_is_closed_shell() {
        let res = casci_solve(&h2(), &CasciOptions::singlets(1)).unwrap();
        let chars = csf_character(&res.states[0], 0, 0.01).unwrap();
        assert_eq!(chars[0].0.to_string(), "20");
        assert!(chars[0].1 > 0.9);
    }

    #[test]
    fn civec_round_trip() {
        let res = casci_solve(&h2(), &CasciOptions::singlets(2)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("root0.civec");
        write_civec(&path, &res.states[0]).unwrap();
        let back = read_civec(&path, res.states[0].basis.clone()).unwrap();
        for (a, b) in res.states[0].amplitudes.iter().zip(&back.amplitudes) {
            assert_eq!(a, b);
        }
        // wrong basis dimension is rejected
        let wrong = DetBasis::sector(3, 2, 1);
        assert!(read_civec(&path, wrong).is_err());
    }
}
