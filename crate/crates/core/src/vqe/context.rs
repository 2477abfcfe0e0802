//! Compiled workspace for a (Hamiltonian, pool, basis) triple.
//!
//! Everything the inner optimization loop touches is precompiled here:
//! the sparse Hamiltonian, one sparse matrix per pool generator, and the
//! reference statevectors. Energy gradients use the adjoint (back-
//! propagation) sweep, so a full gradient costs two circuit applications
//! per reference state regardless of the parameter count.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::ansatz::AnsatzProgram;
use crate::error::{Result, SavqeError};
use crate::hamiltonian::ActiveSpaceHamiltonian;
use crate::pool::OperatorPool;
use crate::sparse::SparseOp;
use crate::states::{CsfReference, DetBasis, Statevector};

/// Precompiled operators over a fixed determinant basis.
pub struct CompiledSystem {
    basis: Arc<DetBasis>,
    hamiltonian: SparseOp,
    pool: Arc<OperatorPool>,
    generators: Vec<SparseOp>,
}

impl CompiledSystem {
    pub fn new(
        hamiltonian: &ActiveSpaceHamiltonian,
        pool: Arc<OperatorPool>,
        basis: Arc<DetBasis>,
    ) -> Result<Self> {
        let h = hamiltonian.compile(&basis)?;
        let generators: Vec<SparseOp> = pool
            .ops()
            .par_iter()
            .map(|op| op.generator.compile(&basis))
            .collect::<Result<Vec<_>>>()?;
        Ok(CompiledSystem {
            basis,
            hamiltonian: h,
            pool,
            generators,
        })
    }

    pub fn basis(&self) -> &Arc<DetBasis> {
        &self.basis
    }

    pub fn hamiltonian(&self) -> &SparseOp {
        &self.hamiltonian
    }

    pub fn pool(&self) -> &Arc<OperatorPool> {
        &self.pool
    }

    pub fn generator(&self, op_id: usize) -> &SparseOp {
        &self.generators[op_id]
    }

    /// Build reference statevectors, checking they live in this basis.
    pub fn reference_states(&self, refs: &[CsfReference]) -> Result<Vec<Statevector>> {
        refs.iter().map(|r| r.to_statevector(&self.basis)).collect()
    }

    /// Apply the circuit to one state (entry 0 first).
    pub fn apply_program(&self, program: &AnsatzProgram, state: &Statevector) -> Statevector {
        let mut out = state.clone();
        for entry in program.entries() {
            self.generators[entry.op_id].expm_apply(entry.theta, &mut out.amplitudes);
        }
        out
    }

    /// Apply the circuit to every reference state.
    pub fn apply_program_all(
        &self,
        program: &AnsatzProgram,
        refs: &[Statevector],
    ) -> Vec<Statevector> {
        refs.par_iter()
            .map(|r| self.apply_program(program, r))
            .collect()
    }

    /// `<v|H|v>` for a (normalized) state.
    pub fn energy(&self, state: &Statevector) -> f64 {
        let hv = self.hamiltonian.apply(&state.amplitudes);
        real_dot(&state.amplitudes, &hv)
    }

    /// Weighted average energy over already-evolved states.
    pub fn sa_energy(&self, states: &[Statevector], weights: &[f64]) -> f64 {
        states
            .iter()
            .zip(weights)
            .map(|(s, &w)| w * self.energy(s))
            .sum()
    }

    /// State-averaged energy and its gradient with respect to every program
    /// angle, via one adjoint sweep per reference state.
    pub fn sa_energy_and_gradient(
        &self,
        program: &AnsatzProgram,
        refs: &[Statevector],
        weights: &[f64],
    ) -> (f64, Vec<f64>) {
        let n_params = program.len();
        let per_state: Vec<(f64, Vec<f64>)> = refs
            .par_iter()
            .zip(weights.par_iter())
            .map(|(reference, &w)| {
                let mut psi = self.apply_program(program, reference);
                let mut lambda = Statevector {
                    basis: psi.basis.clone(),
                    amplitudes: self.hamiltonian.apply(&psi.amplitudes),
                };
                let energy = real_dot(&psi.amplitudes, &lambda.amplitudes);
                let mut grad = vec![0.0; n_params];
                for (k, entry) in program.entries().iter().enumerate().rev() {
                    let gen = &self.generators[entry.op_id];
                    let g_psi = gen.apply(&psi.amplitudes);
                    grad[k] = w * 2.0 * real_dot(&lambda.amplitudes, &g_psi);
                    gen.expm_apply(-entry.theta, &mut psi.amplitudes);
                    gen.expm_apply(-entry.theta, &mut lambda.amplitudes);
                }
                (w * energy, grad)
            })
            .collect();
        let mut total_e = 0.0;
        let mut total_g = vec![0.0; n_params];
        for (e, g) in per_state {
            total_e += e;
            for (t, gi) in total_g.iter_mut().zip(g) {
                *t += gi;
            }
        }
        (total_e, total_g)
    }

    /// Magnitude of the state-averaged energy derivative for appending each
    /// pool operator (at angle zero) behind the current circuit.
    pub fn pool_gradient(&self, states: &[Statevector], weights: &[f64]) -> Vec<f64> {
        let h_states: Vec<Vec<Complex64>> = states
            .par_iter()
            .map(|s| self.hamiltonian.apply(&s.amplitudes))
            .collect();
        self.generators
            .par_iter()
            .map(|gen| {
                let mut g = 0.0;
                for ((state, h_state), &w) in states.iter().zip(&h_states).zip(weights) {
                    let g_psi = gen.apply(&state.amplitudes);
                    g += w * 2.0 * real_dot(h_state, &g_psi);
                }
                g.abs()
            })
            .collect()
    }

    /// Diagonalize the Hamiltonian inside the span of the evolved states:
    /// returns ascending eigenvalues and the corresponding rotated states.
    pub fn resolve_states(&self, states: &[Statevector]) -> Result<(Vec<f64>, Vec<Statevector>)> {
        let k = states.len();
        if k == 0 {
            return Err(SavqeError::Reference(0));
        }
        let mut h_sub = nalgebra::DMatrix::<f64>::zeros(k, k);
        let h_states: Vec<Vec<Complex64>> = states
            .iter()
            .map(|s| self.hamiltonian.apply(&s.amplitudes))
            .collect();
        for i in 0..k {
            for j in 0..k {
                h_sub[(i, j)] = real_dot(&states[i].amplitudes, &h_states[j]);
            }
        }
        // enforce exact symmetry before diagonalizing
        let h_sym = 0.5 * (&h_sub + h_sub.transpose());
        let eig = h_sym.symmetric_eigen();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[a]
                .partial_cmp(&eig.eigenvalues[b])
                .expect("finite eigenvalues")
        });
        let energies: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let rotated: Vec<Statevector> = order
            .iter()
            .map(|&col| {
                let mut v = Statevector::zero(self.basis.clone());
                for (i, state) in states.iter().enumerate() {
                    let c = Complex64::new(eig.eigenvectors[(i, col)], 0.0);
                    v.add_scaled(state, c);
                }
                v
            })
            .collect();
        Ok((energies, rotated))
    }
}

fn real_dot(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::parse_fcidump_str;
    use crate::states::CsfReference;

    fn h2_system() -> (ActiveSpaceHamiltonian, CompiledSystem) {
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
        let h = parse_fcidump_str(text).unwrap();
        let pool = Arc::new(OperatorPool::build_closed_shell(2, 2).unwrap());
        let basis = h.sector_basis();
        let sys = CompiledSystem::new(&h, pool, basis).unwrap();
        (h, sys)
    }

    #[test]
    fn circuit_preserves_norm_and_symmetries() {
        let (_, sys) = h2_system();
        let refs = sys
            .reference_states(&[CsfReference::parse("20").unwrap()])
            .unwrap();
        let mut program = AnsatzProgram::layered(sys.pool(), 1);
        let thetas: Vec<f64> = (0..program.len()).map(|i| 0.3 - 0.13 * i as f64).collect();
        program.set_thetas(&thetas).unwrap();
        let out = sys.apply_program(&program, &refs[0]);
        assert!((out.norm() - 1.0).abs() < 1e-12);
        let s2 = crate::states::s2_operator(2).compile(sys.basis()).unwrap();
        let s2v = s2.apply(&out.amplitudes);
        assert!(real_dot(&out.amplitudes, &s2v).abs() < 1e-10);
    }

    #[test]
    fn adjoint_gradient_matches_finite_differences() {
        let (_, sys) = h2_system();
        let refs = sys
            .reference_states(&[
                CsfReference::parse("20").unwrap(),
                CsfReference::parse("ud").unwrap(),
            ])
            .unwrap();
        let weights = [0.5, 0.5];
        let mut program = AnsatzProgram::layered(sys.pool(), 1);
        let thetas: Vec<f64> = (0..program.len())
            .map(|i| 0.17 * ((i % 5) as f64 - 2.0))
            .collect();
        program.set_thetas(&thetas).unwrap();
        let (_, analytic) = sys.sa_energy_and_gradient(&program, &refs, &weights);
        let h_step = 1e-5;
        for k in 0..program.len() {
            let mut plus = program.clone();
            let mut minus = program.clone();
            let mut tp = thetas.clone();
            let mut tm = thetas.clone();
            tp[k] += h_step;
            tm[k] -= h_step;
            plus.set_thetas(&tp).unwrap();
            minus.set_thetas(&tm).unwrap();
            let ep = sys.sa_energy(&sys.apply_program_all(&plus, &refs), &weights);
            let em = sys.sa_energy(&sys.apply_program_all(&minus, &refs), &weights);
            let fd = (ep - em) / (2.0 * h_step);
            assert!(
                (analytic[k] - fd).abs() < 1e-8 + 1e-6 * fd.abs(),
                "param {k}: analytic {} vs fd {fd}",
                analytic[k]
            );
        }
    }

    #[test]
    fn pool_gradient_matches_append_derivative() {
        let (_, sys) = h2_system();
        let refs = sys
            .reference_states(&[CsfReference::parse("20").unwrap()])
            .unwrap();
        let weights = [1.0];
        let program = AnsatzProgram::empty(sys.pool());
        let states = sys.apply_program_all(&program, &refs);
        let pg = sys.pool_gradient(&states, &weights);
        for (id, &g) in pg.iter().enumerate() {
            let mut extended = program.clone();
            extended.push(id, 0.0);
            let (_, grad) = sys.sa_energy_and_gradient(&extended, &refs, &weights);
            assert!(
                (g - grad[0].abs()).abs() < 1e-10,
                "op {id}: pool {g} vs append {}",
                grad[0]
            );
        }
    }

    #[test]
    fn resolved_energies_average_to_sa_energy() {
        let (_, sys) = h2_system();
        let refs = sys
            .reference_states(&[
                CsfReference::parse("20").unwrap(),
                CsfReference::parse("ud").unwrap(),
            ])
            .unwrap();
        let weights = [0.5, 0.5];
        let mut program = AnsatzProgram::layered(sys.pool(), 1);
        let thetas: Vec<f64> = (0..program.len())
            .map(|i| 0.05 * (i as f64 + 1.0))
            .collect();
        program.set_thetas(&thetas).unwrap();
        let states = sys.apply_program_all(&program, &refs);
        let sa = sys.sa_energy(&states, &weights);
        let (energies, rotated) = sys.resolve_states(&states).unwrap();
        // equal weights: the trace is invariant under the subspace rotation
        let mean = energies.iter().sum::<f64>() / energies.len() as f64;
        assert!((mean - sa).abs() < 1e-12);
        assert!(energies.windows(2).all(|w| w[0] <= w[1]));
        for (e, v) in energies.iter().zip(&rotated) {
            assert!((sys.energy(v) - e).abs() < 1e-10);
            assert!((v.norm() - 1.0).abs() < 1e-10);
        }
    }
}
