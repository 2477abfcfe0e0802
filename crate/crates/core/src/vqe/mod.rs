//! State-averaged VQE drivers.
//!
//! Both solvers minimize the weighted average energy of a shared circuit
//! applied to orthogonal CSF references, then diagonalize the Hamiltonian in
//! the span of the evolved states to obtain the individual energies.
//!
//! - [`solve_layered`] optimizes a fixed circuit of `n` repetitions of the
//!   full pool.
//! - [`solve_adaptive`] grows the circuit one macroiteration at a time,
//!   appending the operator(s) with the largest pool gradient until the
//!   largest gradient falls below a threshold. With `growth_fraction = 1.0`
//!   exactly one operator is appended per macroiteration; smaller fractions
//!   append every operator whose gradient is within that fraction of the
//!   maximum, ordered by descending gradient.

mod context;
mod method;
mod metrics;
mod opt;

pub use context::CompiledSystem;
pub use method::{AdaptiveMethod, LayeredMethod, Method, MethodRegistry};
pub use metrics::{method_metrics, write_metrics_csv, MethodMetrics, RunErrors};
pub use opt::{minimize, OptimOptions, OptimResult, Termination};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzProgram;
use crate::error::{Result, SavqeError};
use crate::states::CsfReference;

/// Shared numeric knobs for both solver families.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Averaging weights; must match the reference count and sum to one.
    pub weights: Vec<f64>,
    /// Gradient infinity-norm target for the angle optimizer.
    pub optimizer_tol: f64,
    /// Pool-gradient threshold that stops adaptive growth.
    pub adapt_threshold: f64,
    /// Fraction of the maximum pool gradient an operator must reach to be
    /// appended in one adaptive macroiteration (1.0 = single operator).
    pub growth_fraction: f64,
    /// Cap on adaptive macroiterations; exceeding it is reported as
    /// non-converged rather than an error.
    pub max_macroiterations: usize,
    /// Iteration cap for each angle optimization.
    pub max_optimizer_iters: usize,
}

impl SolverConfig {
    pub fn equal_weights(n_states: usize) -> Self {
        SolverConfig {
            weights: vec![1.0 / n_states as f64; n_states],
            optimizer_tol: 1e-8,
            adapt_threshold: 1e-5,
            growth_fraction: 1.0,
            max_macroiterations: 250,
            max_optimizer_iters: 5000,
        }
    }

    pub fn validate(&self, n_refs: usize) -> Result<()> {
        if self.weights.len() != n_refs {
            return Err(SavqeError::Config(format!(
                "{} weights for {} reference states",
                self.weights.len(),
                n_refs
            )));
        }
        if self.weights.iter().any(|&w| w <= 0.0) {
            return Err(SavqeError::Config(
                "averaging weights must be strictly positive".to_string(),
            ));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(SavqeError::Config(format!(
                "averaging weights sum to {total}, expected 1"
            )));
        }
        if !(0.0 < self.growth_fraction && self.growth_fraction <= 1.0) {
            return Err(SavqeError::Config(format!(
                "growth fraction {} outside (0, 1]",
                self.growth_fraction
            )));
        }
        if self.adapt_threshold <= 0.0 || self.optimizer_tol <= 0.0 {
            return Err(SavqeError::Config(
                "tolerances must be positive".to_string(),
            ));
        }
        Ok(())
    }

    fn optim_options(&self) -> OptimOptions {
        OptimOptions {
            grad_tol: self.optimizer_tol,
            max_iters: self.max_optimizer_iters,
            ..OptimOptions::default()
        }
    }
}

/// One row of the convergence trace. Row 0 describes the initial circuit;
/// every optimization cycle appends one row, so a finished run has
/// `macroiterations + 1` rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub n_operators: usize,
    pub sa_energy: f64,
    pub max_pool_gradient: f64,
}

/// Full record of one solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverReport {
    pub method: String,
    pub n_states: usize,
    pub weights: Vec<f64>,
    /// Weighted average energy of the final circuit.
    pub sa_energy: f64,
    /// Individual state energies after the subspace rotation, ascending.
    pub energies: Vec<f64>,
    pub n_operators: usize,
    pub n_parameters: usize,
    pub operator_ids: Vec<usize>,
    pub thetas: Vec<f64>,
    pub macroiterations: usize,
    pub trace: Vec<TraceEntry>,
    pub converged: bool,
    pub wall_time_s: f64,
}

/// Optimize the angles of `program` in place; returns the optimizer result.
fn optimize_program(
    system: &CompiledSystem,
    program: &mut AnsatzProgram,
    refs: &[crate::states::Statevector],
    config: &SolverConfig,
) -> Result<OptimResult> {
    let x0 = program.thetas();
    let result = minimize(
        |x, grad| {
            let mut trial = program.clone();
            trial
                .set_thetas(x)
                .expect("optimizer preserves the parameter count");
            let (e, g) = system.sa_energy_and_gradient(&trial, refs, &config.weights);
            grad.copy_from_slice(&g);
            e
        },
        &x0,
        &config.optim_options(),
    )?;
    program.set_thetas(&result.x)?;
    Ok(result)
}

/// Fixed-depth solve: `n_layers` copies of the whole pool.
///
/// `warm_start` may carry angles from an identically shaped program (same
/// pool, same layer count); anything else is an alignment error.
pub fn solve_layered(
    system: &CompiledSystem,
    references: &[CsfReference],
    n_layers: usize,
    config: &SolverConfig,
    warm_start: Option<&AnsatzProgram>,
) -> Result<SolverReport> {
    config.validate(references.len())?;
    if n_layers == 0 {
        return Err(SavqeError::Config(
            "a layered circuit needs at least one layer".to_string(),
        ));
    }
    let start = Instant::now();
    let refs = system.reference_states(references)?;
    let mut program = AnsatzProgram::layered(system.pool(), n_layers);
    if let Some(previous) = warm_start {
        program.adopt_thetas(previous)?;
    }

    let mut trace = Vec::new();
    let initial_states = system.apply_program_all(&program, &refs);
    trace.push(TraceEntry {
        iteration: 0,
        n_operators: program.len(),
        sa_energy: system.sa_energy(&initial_states, &config.weights),
        max_pool_gradient: max_abs(&system.pool_gradient(&initial_states, &config.weights)),
    });

    let optim = optimize_program(system, &mut program, &refs, config)?;

    let final_states = system.apply_program_all(&program, &refs);
    trace.push(TraceEntry {
        iteration: 1,
        n_operators: program.len(),
        sa_energy: optim.value,
        max_pool_gradient: max_abs(&system.pool_gradient(&final_states, &config.weights)),
    });
    let (energies, _) = system.resolve_states(&final_states)?;

    Ok(SolverReport {
        method: format!("fuccsd({n_layers})"),
        n_states: references.len(),
        weights: config.weights.clone(),
        sa_energy: optim.value,
        energies,
        n_operators: program.len(),
        n_parameters: program.len(),
        operator_ids: program.operator_ids(),
        thetas: program.thetas(),
        macroiterations: 1,
        trace,
        // a stall at the numerical floor still counts as a converged
        // optimum; only an exhausted iteration budget does not
        converged: optim.termination != Termination::IterationLimit,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Adaptive solve: grow the circuit until the largest pool gradient drops
/// below `config.adapt_threshold` or the macroiteration cap is hit.
///
/// `warm_start` may carry a previously grown program for the same pool; its
/// gates and angles become the starting circuit.
pub fn solve_adaptive(
    system: &CompiledSystem,
    references: &[CsfReference],
    config: &SolverConfig,
    warm_start: Option<&AnsatzProgram>,
) -> Result<SolverReport> {
    config.validate(references.len())?;
    let start = Instant::now();
    let refs = system.reference_states(references)?;
    let mut program = match warm_start {
        Some(previous) => {
            previous.check_against(system.pool())?;
            previous.clone()
        }
        None => AnsatzProgram::empty(system.pool()),
    };

    let mut trace: Vec<TraceEntry> = Vec::new();
    let mut converged = false;

    loop {
        let states = system.apply_program_all(&program, &refs);
        let sa_energy = system.sa_energy(&states, &config.weights);
        let pool_grad = system.pool_gradient(&states, &config.weights);
        let g_max = max_abs(&pool_grad);
        trace.push(TraceEntry {
            iteration: trace.len(),
            n_operators: program.len(),
            sa_energy,
            max_pool_gradient: g_max,
        });
        if g_max < config.adapt_threshold {
            converged = true;
            break;
        }
        if trace.len() > config.max_macroiterations {
            break;
        }

        for op_id in select_operators(&pool_grad, config.growth_fraction) {
            program.push(op_id, 0.0);
        }
        optimize_program(system, &mut program, &refs, config)?;
    }

    let final_states = system.apply_program_all(&program, &refs);
    let (energies, _) = system.resolve_states(&final_states)?;
    let sa_energy = trace.last().expect("trace is never empty").sa_energy;

    Ok(SolverReport {
        method: if config.growth_fraction >= 1.0 {
            "adapt(standard)".to_string()
        } else {
            format!("adapt({})", config.growth_fraction)
        },
        n_states: references.len(),
        weights: config.weights.clone(),
        sa_energy,
        energies,
        n_operators: program.len(),
        n_parameters: program.len(),
        operator_ids: program.operator_ids(),
        thetas: program.thetas(),
        macroiterations: trace.len() - 1,
        trace,
        // adaptive convergence means the pool-gradient threshold was met
        // within the macroiteration budget
        converged,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Operator ids to append for one macroiteration, most important first.
///
/// With `fraction = 1.0` this is the single argmax (lowest id on exact
/// ties). Otherwise every operator whose gradient reaches
/// `fraction * max` is selected, ordered by descending gradient with
/// ascending id as the tie-break.
fn select_operators(pool_grad: &[f64], fraction: f64) -> Vec<usize> {
    let g_max = max_abs(pool_grad);
    if fraction >= 1.0 {
        let best = pool_grad
            .iter()
            .enumerate()
            .find(|(_, &g)| g == g_max)
            .map(|(i, _)| i)
            .expect("non-empty pool");
        return vec![best];
    }
    let cutoff = fraction * g_max;
    let mut selected: Vec<usize> = (0..pool_grad.len())
        .filter(|&i| pool_grad[i] >= cutoff)
        .collect();
    selected.sort_by(|&a, &b| {
        pool_grad[b]
            .partial_cmp(&pool_grad[a])
            .expect("finite gradients")
            .then(a.cmp(&b))
    });
    selected
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, &v| m.max(v.abs()))
}
