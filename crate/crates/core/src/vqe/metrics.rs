//! Error metrics of solver runs against exact reference energies.
//!
//! Errors are per-state energy differences (solver minus exact) in Hartree;
//! aggregates are reported in milli-Hartree. Runs are grouped by method
//! across a geometry series, preserving first-appearance order.

use std::path::Path;

use crate::error::{Result, SavqeError};

/// Per-run error record: one solve at one geometry.
#[derive(Debug, Clone)]
pub struct RunErrors {
    pub method: String,
    pub geometry: String,
    pub n_operators: usize,
    /// Solver energy minus exact energy per state, in Hartree.
    pub errors: Vec<f64>,
}

impl RunErrors {
    /// Pair solver energies with the lowest exact roots.
    pub fn new(
        method: &str,
        geometry: &str,
        n_operators: usize,
        solver_energies: &[f64],
        exact_energies: &[f64],
    ) -> Result<Self> {
        if exact_energies.len() < solver_energies.len() {
            return Err(SavqeError::ShapeMismatch(format!(
                "{} solver states but only {} exact roots",
                solver_energies.len(),
                exact_energies.len()
            )));
        }
        Ok(RunErrors {
            method: method.to_string(),
            geometry: geometry.to_string(),
            n_operators,
            errors: solver_energies
                .iter()
                .zip(exact_energies)
                .map(|(s, e)| s - e)
                .collect(),
        })
    }
}

/// Aggregate over all geometries of one method.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodMetrics {
    pub method: String,
    /// Mean operator count over the geometry series.
    pub operators: f64,
    /// Mean absolute per-state error, milli-Hartree.
    pub mad_meh: f64,
    /// Largest absolute per-state error, milli-Hartree.
    pub max_error_meh: f64,
}

/// Group runs by method (first-appearance order) and aggregate.
pub fn method_metrics(runs: &[RunErrors]) -> Vec<MethodMetrics> {
    let mut order: Vec<&str> = Vec::new();
    for run in runs {
        if !order.contains(&run.method.as_str()) {
            order.push(&run.method);
        }
    }
    order
        .into_iter()
        .map(|method| {
            let group: Vec<&RunErrors> = runs.iter().filter(|r| r.method == method).collect();
            let operators =
                group.iter().map(|r| r.n_operators as f64).sum::<f64>() / group.len() as f64;
            let all_errors: Vec<f64> = group
                .iter()
                .flat_map(|r| r.errors.iter().copied())
                .collect();
            let mad = if all_errors.is_empty() {
                0.0
            } else {
                all_errors.iter().map(|e| e.abs()).sum::<f64>() / all_errors.len() as f64
            };
            let max = all_errors.iter().fold(0.0f64, |m, e| m.max(e.abs()));
            MethodMetrics {
                method: method.to_string(),
                operators,
                mad_meh: mad * 1e3,
                max_error_meh: max * 1e3,
            }
        })
        .collect()
}

/// Write the aggregate table as CSV with a fixed header.
pub fn write_metrics_csv(path: &Path, metrics: &[MethodMetrics]) -> Result<()> {
    let mut text = String::from("method,operators,mad_mEh,max_error_mEh\n");
    for m in metrics {
        text.push_str(&format!(
            "{},{},{:.6},{:.6}\n",
            m.method, m.operators, m.mad_meh, m.max_error_meh
        ));
    }
    std::fs::write(path, text).map_err(|e| SavqeError::io(path, e))
}
