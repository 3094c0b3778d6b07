//! Sequential minimal optimisation for the soft-margin SVM dual
//!
//! ```text
//! max  Σ α_i − ½ Σ α_i α_j y_i y_j K_ij
//! s.t. 0 ≤ α_i ≤ C_i,  Σ α_i y_i = 0
//! ```
//!
//! Working pairs are chosen with second-order information (maximal
//! violating `i`, then the `j` with the largest guaranteed decrease).

use ndarray::Array2;

use crate::error::{GladError, Result};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SmoParams {
    /// Stop when the maximal KKT violation gap falls below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Record the dual objective after every iteration.
    pub trace: bool,
}

impl Default for SmoParams {
    fn default() -> Self {
        SmoParams {
            tol: 1e-3,
            max_iter: 100_000,
            trace: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    /// Decision offset: `f(x) = Σ α_i y_i K(x_i, x) + bias`.
    pub bias: f64,
    pub iterations: usize,
    pub gap: f64,
    /// Dual objective per iteration (empty unless requested).
    pub objective: Vec<f64>,
}

/// `y` must be ±1, `upper` the per-sample box bound, `k` the full Gram matrix.
pub fn solve(k: &Array2<f64>, y: &[f64], upper: &[f64], params: &SmoParams) -> Result<SmoSolution> {
    let n = y.len();
    let has_pos = y.iter().any(|&v| v > 0.0);
    let has_neg = y.iter().any(|&v| v < 0.0);
    if !(has_pos && has_neg) {
        // one-sided problem: the optimum is α = 0 with a constant decision
        return Ok(SmoSolution {
            alpha: vec![0.0; n],
            bias: if has_pos { 1.0 } else { -1.0 },
            iterations: 0,
            gap: 0.0,
            objective: Vec::new(),
        });
    }
    let diag: Vec<f64> = (0..n).map(|i| k[[i, i]]).collect();
    let mut alpha = vec![0.0; n];
    // G = Qα − 1
    let mut grad = vec![-1.0; n];
    let mut objective = Vec::new();
    let in_up = |a: f64, yi: f64, c: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64, c: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    let mut iter = 0;
    let mut gap;
    loop {
        let mut g_max = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..n {
            if in_up(alpha[t], y[t], upper[t]) {
                let v = -y[t] * grad[t];
                if v > g_max {
                    g_max = v;
                    i_sel = t;
                }
            }
        }
        let mut g_min = f64::INFINITY;
        let mut j_sel = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !in_low(alpha[t], y[t], upper[t]) {
                continue;
            }
            let v = -y[t] * grad[t];
            g_min = g_min.min(v);
            if i_sel != usize::MAX && v < g_max {
                let b = g_max - v;
                let mut a = diag[i_sel] + diag[t] - 2.0 * k[[i_sel, t]];
                if a <= 0.0 {
                    a = TAU;
                }
                let score = -(b * b) / a;
                if score < best {
                    best = score;
                    j_sel = t;
                }
            }
        }
        gap = g_max - g_min;
        if gap < params.tol || i_sel == usize::MAX || j_sel == usize::MAX {
            break;
        }
        if iter >= params.max_iter {
            return Err(GladError::NoConvergence {
                iterations: iter,
                residual: gap,
            });
        }
        iter += 1;

        let (i, j) = (i_sel, j_sel);
        let (ci, cj) = (upper[i], upper[j]);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let kij = k[[i, j]];
        if y[i] != y[j] {
            let mut quad = diag[i] + diag[j] - 2.0 * kij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > ci - cj {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else if alpha[j] > cj {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            let mut quad = diag[i] + diag[j] - 2.0 * kij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > ci {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > cj {
                if alpha[j] > cj {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k[[t, i]] * di + y[j] * k[[t, j]] * dj);
        }
        if params.trace {
            objective.push(dual_objective(&alpha, &grad));
        }
    }

    Ok(SmoSolution {
        bias: -offset(&alpha, &grad, y, upper),
        alpha,
        iterations: iter,
        gap,
        objective,
    })
}

/// `Σ α − ½ αᵀQα` expressed through `G = Qα − 1`.
pub fn dual_objective(alpha: &[f64], grad: &[f64]) -> f64 {
    0.5 * alpha
        .iter()
        .zip(grad)
        .map(|(a, g)| a * (1.0 - g))
        .sum::<f64>()
}

/// The `ρ` with `f(x) = Σ α y K − ρ`: mean of `y G` over free variables,
/// else the midpoint of the feasible interval.
fn offset(alpha: &[f64], grad: &[f64], y: &[f64], upper: &[f64]) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum) = (0usize, 0.0);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= upper[t] {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum += yg;
        }
    }
    if free > 0 {
        sum / free as f64
    } else {
        (ub + lb) / 2.0
    }
}
