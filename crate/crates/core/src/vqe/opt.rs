//! Limited-memory BFGS with a strong-Wolfe line search.
//!
//! The objective callback fills the gradient in place and returns the value.
//! Convergence is declared on the gradient infinity norm; a stall guard
//! stops runs whose value stops moving at machine-level resolution without
//! reaching the gradient target.

use crate::error::{Result, SavqeError};

/// Optimizer knobs. The defaults match the solver configuration used across
/// the crate: tight gradients, generous iteration budget.
#[derive(Debug, Clone)]
pub struct OptimOptions {
    /// Stop when the gradient infinity norm falls below this.
    pub grad_tol: f64,
    /// Hard iteration cap.
    pub max_iters: usize,
    /// Number of curvature pairs retained.
    pub memory: usize,
    /// Relative objective-change floor for the stall guard.
    pub stall_tol: f64,
    /// Consecutive stalled iterations tolerated before giving up.
    pub stall_patience: usize,
}

impl Default for OptimOptions {
    fn default() -> Self {
        OptimOptions {
            grad_tol: 1e-8,
            max_iters: 5000,
            memory: 12,
            stall_tol: 1e-12,
            stall_patience: 8,
        }
    }
}

/// Why a minimization run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Gradient infinity norm fell below `grad_tol`.
    GradientConverged,
    /// Objective stopped moving at machine-level resolution; the point is
    /// numerically stationary even though the gradient target was not met.
    Stalled,
    /// Iteration cap reached with the objective still moving.
    IterationLimit,
}

/// Outcome of a minimization run.
#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_inf_norm: f64,
    pub iterations: usize,
    pub n_evaluations: usize,
    pub converged: bool,
    pub termination: Termination,
}

const WOLFE_C1: f64 = 1e-4;
const WOLFE_C2: f64 = 0.9;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, &x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimize `f` starting from `x0`. The callback writes the gradient of the
/// point into its second argument and returns the objective value.
pub fn minimize<F>(mut f: F, x0: &[f64], opts: &OptimOptions) -> Result<OptimResult>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut grad = vec![0.0; n];
    let mut value = f(&x, &mut grad);
    let mut n_evals = 1usize;
    if n == 0 {
        return Ok(OptimResult {
            x,
            value,
            grad_inf_norm: 0.0,
            iterations: 0,
            n_evaluations: n_evals,
            converged: true,
            termination: Termination::GradientConverged,
        });
    }

    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut rho_hist: Vec<f64> = Vec::new();
    let mut stalled = 0usize;

    for iter in 0..opts.max_iters {
        let g_norm = inf_norm(&grad);
        if g_norm <= opts.grad_tol {
            return Ok(OptimResult {
                x,
                value,
                grad_inf_norm: g_norm,
                iterations: iter,
                n_evaluations: n_evals,
                converged: true,
                termination: Termination::GradientConverged,
            });
        }

        // two-loop recursion for the search direction
        let mut d: Vec<f64> = grad.iter().map(|&g| -g).collect();
        let k = s_hist.len();
        let mut alphas = vec![0.0; k];
        for i in (0..k).rev() {
            let a = rho_hist[i] * dot(&s_hist[i], &d);
            alphas[i] = a;
            for (dj, yj) in d.iter_mut().zip(&y_hist[i]) {
                *dj -= a * yj;
            }
        }
        if k > 0 {
            let last = k - 1;
            let gamma = dot(&s_hist[last], &y_hist[last]) / dot(&y_hist[last], &y_hist[last]);
            for dj in &mut d {
                *dj *= gamma;
            }
        }
        for i in 0..k {
            let b = rho_hist[i] * dot(&y_hist[i], &d);
            for (dj, sj) in d.iter_mut().zip(&s_hist[i]) {
                *dj += (alphas[i] - b) * sj;
            }
        }
        let mut slope = dot(&grad, &d);
        if slope >= 0.0 {
            // fall back to steepest descent if curvature info went bad
            d = grad.iter().map(|&g| -g).collect();
            slope = -dot(&grad, &grad);
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        let init_step = if k == 0 {
            (1.0 / inf_norm(&d).max(1e-12)).min(1.0)
        } else {
            1.0
        };
        let ls = line_search(&mut f, &x, value, &d, slope, init_step, &mut n_evals)?;

        let x_new = ls.x;
        let grad_new = ls.grad;
        let value_new = ls.value;

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = grad_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * dot(&y, &y).max(1e-300) {
            if s_hist.len() == opts.memory {
                s_hist.remove(0);
                y_hist.remove(0);
                rho_hist.remove(0);
            }
            rho_hist.push(1.0 / sy);
            s_hist.push(s);
            y_hist.push(y);
        }

        let df = (value - value_new).abs();
        if df <= opts.stall_tol * (1.0 + value.abs()) {
            stalled += 1;
        } else {
            stalled = 0;
        }
        x = x_new;
        grad = grad_new;
        value = value_new;
        if stalled >= opts.stall_patience {
            let g_norm = inf_norm(&grad);
            let converged = g_norm <= opts.grad_tol;
            return Ok(OptimResult {
                x,
                value,
                grad_inf_norm: g_norm,
                iterations: iter + 1,
                n_evaluations: n_evals,
                converged,
                termination: if converged {
                    Termination::GradientConverged
                } else {
                    Termination::Stalled
                },
            });
        }
    }

    let g_norm = inf_norm(&grad);
    let converged = g_norm <= opts.grad_tol;
    Ok(OptimResult {
        x,
        value,
        grad_inf_norm: g_norm,
        iterations: opts.max_iters,
        n_evaluations: n_evals,
        converged,
        termination: if converged {
            Termination::GradientConverged
        } else {
            Termination::IterationLimit
        },
    })
}

struct LineSearchResult {
    x: Vec<f64>,
    grad: Vec<f64>,
    value: f64,
}

/// Strong-Wolfe line search (bracket then zoom with bisection safeguards).
#[allow(clippy::too_many_arguments)]
fn line_search<F>(
    f: &mut F,
    x0: &[f64],
    f0: f64,
    d: &[f64],
    slope0: f64,
    init_step: f64,
    n_evals: &mut usize,
) -> Result<LineSearchResult>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut eval = |alpha: f64, grad: &mut Vec<f64>| -> (f64, f64, Vec<f64>) {
        let xt: Vec<f64> = x0.iter().zip(d).map(|(x, di)| x + alpha * di).collect();
        let v = f(&xt, grad);
        *n_evals += 1;
        (v, dot(grad, d), xt)
    };

    let mut grad = vec![0.0; n];
    let mut alpha_prev = 0.0f64;
    let mut f_prev = f0;
    let mut slope_prev = slope0;
    let mut alpha = init_step;
    let max_alpha = 1e6;

    for i in 0..60 {
        let (fi, slope_i, xt) = eval(alpha, &mut grad);
        if fi > f0 + WOLFE_C1 * alpha * slope0 || (i > 0 && fi >= f_prev) {
            return zoom(
                f, x0, f0, slope0, d, alpha_prev, f_prev, slope_prev, alpha, fi, n_evals,
            );
        }
        if slope_i.abs() <= -WOLFE_C2 * slope0 {
            return Ok(LineSearchResult {
                x: xt,
                grad,
                value: fi,
            });
        }
        if slope_i >= 0.0 {
            return zoom(
                f, x0, f0, slope0, d, alpha, fi, slope_i, alpha_prev, f_prev, n_evals,
            );
        }
        alpha_prev = alpha;
        f_prev = fi;
        slope_prev = slope_i;
        alpha = (2.0 * alpha).min(max_alpha);
        if alpha >= max_alpha {
            return Err(SavqeError::Convergence {
                msg: "line search expanded past its step cap".to_string(),
            });
        }
    }
    Err(SavqeError::Convergence {
        msg: "line search failed to bracket a Wolfe point".to_string(),
    })
}

/// Shrink a bracket `[lo, hi]` (function values known at both ends) until a
/// strong-Wolfe point is found.
#[allow(clippy::too_many_arguments)]
fn zoom<F>(
    f: &mut F,
    x0: &[f64],
    f0: f64,
    slope0: f64,
    d: &[f64],
    mut alpha_lo: f64,
    mut f_lo: f64,
    mut slope_lo: f64,
    mut alpha_hi: f64,
    mut f_hi: f64,
    n_evals: &mut usize,
) -> Result<LineSearchResult>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut grad = vec![0.0; n];
    for _ in 0..60 {
        // quadratic interpolation using the low-end slope, safeguarded toward
        // the interval midpoint
        let span = alpha_hi - alpha_lo;
        let mut alpha =
            alpha_lo + 0.5 * span * slope_lo / (slope_lo - (f_hi - f_lo) / span).max(1e-300);
        if !alpha.is_finite()
            || (alpha - alpha_lo).abs() < 0.1 * span.abs()
            || (alpha - alpha_hi).abs() < 0.1 * span.abs()
            || (alpha - alpha_lo) / span < 0.0
            || (alpha - alpha_lo) / span > 1.0
        {
            alpha = alpha_lo + 0.5 * span;
        }
        let xt: Vec<f64> = x0.iter().zip(d).map(|(x, di)| x + alpha * di).collect();
        let fi = f(&xt, &mut grad);
        *n_evals += 1;
        let slope_i = dot(&grad, d);
        if fi > f0 + WOLFE_C1 * alpha * slope0 || fi >= f_lo {
            alpha_hi = alpha;
            f_hi = fi;
        } else {
            if slope_i.abs() <= -WOLFE_C2 * slope0 {
                return Ok(LineSearchResult {
                    x: xt,
                    grad,
                    value: fi,
                });
            }
            if slope_i * (alpha_hi - alpha_lo) >= 0.0 {
                alpha_hi = alpha_lo;
                f_hi = f_lo;
            }
            alpha_lo = alpha;
            f_lo = fi;
            slope_lo = slope_i;
        }
        if (alpha_hi - alpha_lo).abs() < 1e-16 {
            // interval collapsed; accept the best low point
            let xt: Vec<f64> = x0.iter().zip(d).map(|(x, di)| x + alpha_lo * di).collect();
            let fi = f(&xt, &mut grad);
            *n_evals += 1;
            return Ok(LineSearchResult {
                x: xt,
                grad,
                value: fi,
            });
        }
    }
    Err(SavqeError::Convergence {
        msg: "line search zoom failed to satisfy the Wolfe conditions".to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let f = |x: &[f64], g: &mut [f64]| {
            let mut v = 0.0;
            for (i, (xi, gi)) in x.iter().zip(g.iter_mut()).enumerate() {
                let w = (i + 1) as f64;
                v += 0.5 * w * xi * xi;
                *gi = w * xi;
            }
            v
        };
        let res = minimize(f, &[3.0, -2.0, 1.0], &OptimOptions::default()).unwrap();
        assert!(res.converged);
        assert!(res.value < 1e-15);
        assert!(res.x.iter().all(|&x| x.abs() < 1e-7));
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64], g: &mut [f64]| {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        };
        let res = minimize(f, &[-1.2, 1.0], &OptimOptions::default()).unwrap();
        assert!(res.converged, "{res:?}");
        assert!((res.x[0] - 1.0).abs() < 1e-6);
        assert!((res.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn trig_surface() {
        // non-convex periodic surface similar in character to angle landscapes
        let f = |x: &[f64], g: &mut [f64]| {
            let v = x.iter().map(|&t| -t.cos()).sum::<f64>() + 0.1 * x[0] * x[1];
            g[0] = x[0].sin() + 0.1 * x[1];
            g[1] = x[1].sin() + 0.1 * x[0];
            v
        };
        let res = minimize(f, &[0.4, -0.3], &OptimOptions::default()).unwrap();
        assert!(res.converged);
        assert!(res.grad_inf_norm <= 1e-8);
    }

    #[test]
    fn empty_parameter_vector() {
        let f = |_: &[f64], _: &mut [f64]| 42.0;
        let res = minimize(f, &[], &OptimOptions::default()).unwrap();
        assert!(res.converged);
        assert_eq!(res.value, 42.0);
    }

    #[test]
    fn gradient_tolerance_is_respected() {
        let opts = OptimOptions {
            grad_tol: 1e-3,
            ..OptimOptions::default()
        };
        let f = |x: &[f64], g: &mut [f64]| {
            g[0] = x[0];
            0.5 * x[0] * x[0]
        };
        let res = minimize(f, &[10.0], &opts).unwrap();
        assert!(res.converged);
        assert!(res.grad_inf_norm <= 1e-3);
    }
}
