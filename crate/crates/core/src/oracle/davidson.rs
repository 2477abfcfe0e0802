//! Block Davidson iteration for the lowest eigenpairs of a large symmetric
//! operator given only its action and (approximate) diagonal.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SavqeError};

#[derive(Debug, Clone)]
pub struct DavidsonOptions {
    /// Residual 2-norm below which a root counts as converged.
    pub residual_tol: f64,
    pub max_iterations: usize,
    /// Subspace size triggering a restart, as a multiple of the root count.
    pub max_subspace_factor: usize,
}

impl Default for DavidsonOptions {
    fn default() -> Self {
        DavidsonOptions {
            residual_tol: 1e-9,
            max_iterations: 300,
            max_subspace_factor: 12,
        }
    }
}

/// Lowest `n_roots` eigenpairs of a symmetric operator. `apply` computes the
/// matrix-vector product; `diagonal` preconditions the residuals.
///
/// `seeds` supplies start vectors (the iteration pads them with unit vectors
/// at the smallest diagonal entries up to the working block size). Good
/// seeds matter: the iteration tracks and corrects a buffer of two Ritz
/// pairs beyond the requested roots so that an eigenvector weakly
/// represented in the start subspace can still surface before the lower
/// pairs lock in, but it can only refine directions the subspace overlaps.
pub fn lowest_eigenpairs(
    apply: &dyn Fn(&[f64]) -> Vec<f64>,
    diagonal: &[f64],
    n_roots: usize,
    seeds: &[Vec<f64>],
    opts: &DavidsonOptions,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let dim = diagonal.len();
    if n_roots == 0 || n_roots > dim {
        return Err(SavqeError::Config(format!(
            "requested {n_roots} roots from a space of dimension {dim}"
        )));
    }
    for s in seeds {
        if s.len() != dim {
            return Err(SavqeError::ShapeMismatch(format!(
                "seed vector of length {} in a space of dimension {dim}",
                s.len()
            )));
        }
    }

    let block = (n_roots + 2).min(dim);
    let mut basis: Vec<Vec<f64>> = seeds.iter().take(block).cloned().collect();
    orthonormalize(&mut basis);
    // pad with unit vectors on the smallest diagonal entries
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        diagonal[a]
            .partial_cmp(&diagonal[b])
            .expect("finite diagonal")
    });
    for &i in &order {
        if basis.len() >= block {
            break;
        }
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                axpy(&mut v, -c, b);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-8 {
            for vi in &mut v {
                *vi /= norm;
            }
            basis.push(v);
        }
    }
    let mut applied: Vec<Vec<f64>> = basis.iter().map(|v| apply(v)).collect();
    let max_subspace = (opts.max_subspace_factor * n_roots).max(2 * block).min(dim);

    for _ in 0..opts.max_iterations {
        let m = basis.len();
        let mut rayleigh = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                rayleigh[(i, j)] = dot(&basis[i], &applied[j]);
            }
        }
        let rayleigh = 0.5 * (&rayleigh + rayleigh.transpose());
        let (eigenvalues, eigenvectors) = polished_symmetric_eigen(&rayleigh);
        let mut idx: Vec<usize> = (0..m).collect();
        idx.sort_by(|&a, &b| {
            eigenvalues[a]
                .partial_cmp(&eigenvalues[b])
                .expect("finite eigenvalues")
        });

        // Ritz data for the requested roots plus the trailing buffer
        let tracked = block.min(m);
        let ritz_values: Vec<f64> = idx.iter().take(tracked).map(|&i| eigenvalues[i]).collect();
        let ritz_vectors: Vec<Vec<f64>> = idx
            .iter()
            .take(tracked)
            .map(|&col| {
                let mut x = vec![0.0; dim];
                for (i, b) in basis.iter().enumerate() {
                    let c = eigenvectors[(i, col)];
                    axpy(&mut x, c, b);
                }
                x
            })
            .collect();
        let residuals: Vec<Vec<f64>> = idx
            .iter()
            .take(tracked)
            .enumerate()
            .map(|(r, &col)| {
                let mut res = vec![0.0; dim];
                for (i, w) in applied.iter().enumerate() {
                    axpy(&mut res, eigenvectors[(i, col)], w);
                }
                axpy(&mut res, -ritz_values[r], &ritz_vectors[r]);
                res
            })
            .collect();
        // convergence is judged on the requested roots only
        let worst = residuals
            .iter()
            .take(n_roots)
            .map(|r| dot(r, r).sqrt())
            .fold(0.0f64, f64::max);
        if worst < opts.residual_tol {
            return Ok((
                ritz_values[..n_roots].to_vec(),
                ritz_vectors[..n_roots].to_vec(),
            ));
        }

        if basis.len() >= max_subspace {
            // restart from all tracked Ritz vectors so buffer directions
            // survive the truncation
            basis = ritz_vectors.clone();
            orthonormalize(&mut basis);
            applied = basis.iter().map(|v| apply(v)).collect();
            continue;
        }

        let mut grew = false;
        for (r, res) in residuals.iter().enumerate() {
            let res_norm = dot(res, res).sqrt();
            if res_norm < opts.residual_tol {
                continue;
            }
            // diagonal-preconditioned residue correction, normalized before
            // orthogonalization so the acceptance cutoff is scale-free
            let theta = ritz_values[r];
            let mut t: Vec<f64> = res
                .iter()
                .zip(diagonal)
                .map(|(&ri, &di)| {
                    let denom = theta - di;
                    let denom = if denom.abs() < 1e-8 {
                        1e-8 * denom.signum()
                    } else {
                        denom
                    };
                    ri / denom
                })
                .collect();
            let t_norm = dot(&t, &t).sqrt();
            if t_norm > 0.0 {
                for ti in &mut t {
                    *ti /= t_norm;
                }
            }
            if append_orthogonal(&mut basis, &mut applied, t, apply) {
                grew = true;
            } else {
                // the preconditioned direction collapsed onto the subspace;
                // the raw residual is orthogonal to it by construction
                let raw: Vec<f64> = res.iter().map(|&x| x / res_norm).collect();
                grew |= append_orthogonal(&mut basis, &mut applied, raw, apply);
            }
        }
        if !grew {
            // no independent correction directions left; accept only if the
            // residuals are already essentially at tolerance
            if worst < 10.0 * opts.residual_tol {
                return Ok((
                    ritz_values[..n_roots].to_vec(),
                    ritz_vectors[..n_roots].to_vec(),
                ));
            }
            return Err(SavqeError::Convergence {
                msg: format!(
                    "eigenvalue iteration stalled with residual {worst:.2e} above tolerance"
                ),
            });
        }
    }
    Err(SavqeError::Convergence {
        msg: "eigenvalue iteration exceeded its iteration cap".to_string(),
    })
}

/// Symmetric eigendecomposition with an accuracy back-stop. The library
/// eigensolver can return eigenvectors whose residuals sit well above
/// roundoff on clustered spectra; any such column is polished by shifted
/// inverse iteration, re-orthogonalized against near-degenerate partners.
fn polished_symmetric_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let mut values = eig.eigenvalues;
    let mut vectors = eig.eigenvectors;
    let scale = m.amax().max(f64::MIN_POSITIVE);
    for j in 0..n {
        let mut z = vectors.column(j).into_owned();
        let residual = (m * &z - &z * values[j]).norm();
        if residual <= 1e-13 * scale {
            continue;
        }
        for _ in 0..2 {
            let mut shifted = m.clone();
            let delta = 1e-13 * scale;
            for i in 0..n {
                shifted[(i, i)] -= values[j] - delta;
            }
            let Some(solved) = shifted.lu().solve(&z) else {
                break;
            };
            z = solved;
            for k in 0..n {
                if k != j && (values[k] - values[j]).abs() < 1e-10 * scale {
                    let partner = vectors.column(k).into_owned();
                    let overlap = partner.dot(&z);
                    z.axpy(-overlap, &partner, 1.0);
                }
            }
            let norm = z.norm();
            if norm == 0.0 {
                break;
            }
            z /= norm;
        }
        values[j] = z.dot(&(m * &z));
        vectors.set_column(j, &z);
    }
    (values, vectors)
}

/// Orthogonalize a unit-scale candidate against the basis and append it (and
/// its image under the operator) if an independent component survives.
fn append_orthogonal(
    basis: &mut Vec<Vec<f64>>,
    applied: &mut Vec<Vec<f64>>,
    mut v: Vec<f64>,
    apply: &dyn Fn(&[f64]) -> Vec<f64>,
) -> bool {
    for _ in 0..2 {
        for b in basis.iter() {
            let c = dot(&v, b);
            axpy(&mut v, -c, b);
        }
    }
    let norm = dot(&v, &v).sqrt();
    if norm <= 1e-7 {
        return false;
    }
    for vi in &mut v {
        *vi /= norm;
    }
    applied.push(apply(&v));
    basis.push(v);
    true
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Modified Gram-Schmidt, in place; drops vanishing vectors.
fn orthonormalize(vectors: &mut Vec<Vec<f64>>) {
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for mut v in vectors.drain(..) {
        for _ in 0..2 {
            for k in &kept {
                let c = dot(&v, k);
                axpy(&mut v, -c, k);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-12 {
            for vi in &mut v {
                *vi /= norm;
            }
            kept.push(v);
        }
    }
    *vectors = kept;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SparseOp;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(dim: usize, seed: u64) -> SparseOp {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut triplets = Vec::new();
        for i in 0..dim {
            triplets.push((
                i as u32,
                i as u32,
                rng.gen_range(-2.0..2.0) + i as f64 * 0.1,
            ));
            for j in (i + 1)..dim {
                if rng.gen_bool(0.15) {
                    let v = rng.gen_range(-0.5..0.5);
                    triplets.push((i as u32, j as u32, v));
                    triplets.push((j as u32, i as u32, v));
                }
            }
        }
        SparseOp::from_triplets(dim, dim, triplets)
    }

    #[test]
    fn matches_dense_eigenvalues() {
        for seed in [1u64, 7, 42] {
            let dim = 120;
            let a = random_symmetric(dim, seed);
            let apply = |v: &[f64]| a.apply_real(v);
            let (vals, vecs) =
                lowest_eigenpairs(&apply, &a.diagonal(), 4, &[], &DavidsonOptions::default())
                    .unwrap();
            let dense = a.dense();
            let mut exact: Vec<f64> = dense
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .cloned()
                .collect();
            exact.sort_by(|x, y| x.partial_cmp(y).unwrap());
            for (k, v) in vals.iter().enumerate() {
                assert!(
                    (v - exact[k]).abs() < 1e-8,
                    "seed {seed} root {k}: {v} vs {}",
                    exact[k]
                );
            }
            // eigenvectors satisfy the eigenvalue equation
            for (val, vec) in vals.iter().zip(&vecs) {
                let av = a.apply_real(vec);
                let res: f64 = av
                    .iter()
                    .zip(vec)
                    .map(|(x, y)| (x - val * y).powi(2))
                    .sum::<f64>()
                    .sqrt();
                assert!(res < 1e-8, "residual {res}");
            }
        }
    }

    #[test]
    fn handles_degenerate_spectra() {
        // block-diagonal with an exactly repeated eigenvalue
        let mut triplets = Vec::new();
        for i in 0..40u32 {
            triplets.push((i, i, if i < 3 { -5.0 } else { i as f64 }));
        }
        let a = SparseOp::from_triplets(40, 40, triplets);
        let apply = |v: &[f64]| a.apply_real(v);
        let (vals, _) =
            lowest_eigenpairs(&apply, &a.diagonal(), 3, &[], &DavidsonOptions::default()).unwrap();
        for v in vals {
            assert!((v + 5.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_absurd_requests() {
        let a = SparseOp::from_triplets(3, 3, vec![(0, 0, 1.0), (1, 1, 2.0), (2, 2, 3.0)]);
        let apply = |v: &[f64]| a.apply_real(v);
        assert!(
            lowest_eigenpairs(&apply, &a.diagonal(), 0, &[], &DavidsonOptions::default()).is_err()
        );
        assert!(
            lowest_eigenpairs(&apply, &a.diagonal(), 5, &[], &DavidsonOptions::default()).is_err()
        );
    }
}
