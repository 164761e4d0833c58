//! Practical recovery pipeline: diagonal spectral initializer, backtracking
//! gradient descent, and the log-barrier outer loop.
//!
//! The initializer is the leading eigenvector (largest algebraic
//! eigenvalue) of `A^T diag(1 - d/y) A` with the measurement weights
//! replicated across the d row blocks. The weights have a heavy negative
//! tail (`1 - d/y` with `y` chi-square), so the matrix is indefinite with
//! `|lambda_min|` often thousands of times the top spectral gap; shifted
//! power iteration stalls there, and the eigenpair is instead taken from a
//! dense symmetric eigendecomposition (the matrix is only `dn x dn`).
//!
//! Recovery then minimizes `t0 f_plain(x) - ln(1 - ||x||^2)` for a
//! geometric schedule of `t0` (0.01, x1.6, ... until 1e7), warm-starting
//! every stage from the previous one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{axpy, dot, BarrierConfig, MeasurementInstance};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverConfig {
    pub barrier: BarrierConfig,
    /// Norm of the starting point, strictly inside the unit ball.
    pub init_norm: f64,
    pub armijo_sigma: f64,
    pub backtrack_beta: f64,
    pub step_init: f64,
    pub grad_tol: f64,
    pub max_inner_iters: usize,
    pub success_overlap: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            barrier: BarrierConfig::default(),
            init_norm: 0.95,
            armijo_sigma: 1e-4,
            backtrack_beta: 0.5,
            step_init: 1.0,
            grad_tol: 1e-8,
            max_inner_iters: 2000,
            success_overlap: 0.99,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        self.barrier.validate()?;
        let ok = self.init_norm > 0.0
            && self.init_norm < 1.0
            && self.armijo_sigma > 0.0
            && self.armijo_sigma < 1.0
            && self.backtrack_beta > 0.0
            && self.backtrack_beta < 1.0
            && self.step_init > 0.0
            && self.grad_tol > 0.0
            && self.max_inner_iters > 0
            && self.success_overlap > 0.0
            && self.success_overlap <= 1.0;
        if !ok {
            return Err(Error::precondition("SolverConfig", "parameter outside its range"));
        }
        Ok(())
    }
}

/// Per-stage diagnostics of the outer loop.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StageTrace {
    pub t0: f64,
    pub residual: f64,
    pub overlap: f64,
    pub inner_iters: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverResult {
    pub x_hat: Vec<f64>,
    /// `|x_hat . x_true| / ||x_hat||`, in [0, 1] for the unit planted vector.
    pub overlap: f64,
    /// `f_plain_grouped` at the estimate.
    pub residual: f64,
    pub outer_stages: usize,
    pub inner_iter_total: usize,
    /// Stages whose line search hit the step underflow floor.
    pub stalled_stages: usize,
    pub trace: Option<Vec<StageTrace>>,
}

/// Diagonal spectral initializer: leading eigenvector of
/// `M = A^T diag(1 - d/y^{(d)}) A`, scaled to `init_norm`, sign fixed so
/// the first nonzero coordinate is positive.
pub fn spectral_init(instance: &MeasurementInstance, init_norm: f64) -> Result<Vec<f64>> {
    if !(init_norm > 0.0 && init_norm < 1.0) {
        return Err(Error::domain(
            "spectral_init",
            format!("init_norm = {init_norm} must be in (0, 1)"),
        ));
    }
    for (i, &y) in instance.y_bar.iter().enumerate() {
        if y == 0.0 {
            return Err(Error::DegenerateMeasurement { index: i });
        }
    }

    let dn = instance.dn();
    let d = instance.d as f64;

    // M = sum_k w_k a_k a_k^T with w_{jm+i} = 1 - d / y_i
    let mut matrix = vec![0.0f64; dn * dn];
    for j in 0..instance.d {
        for i in 0..instance.m {
            let k = j * instance.m + i;
            let w = 1.0 - d / instance.y_bar[i];
            let row = instance.row(k);
            for p in 0..dn {
                let scale = w * row[p];
                axpy(scale, row, &mut matrix[p * dn..(p + 1) * dn]);
            }
        }
    }

    let mut direction = largest_algebraic_eigenvector(&matrix, dn)?;

    // deterministic sign: first coordinate of visible magnitude is positive
    let flip = direction
        .iter()
        .find(|t| t.abs() > 1e-12)
        .map(|&t| t < 0.0)
        .unwrap_or(false);
    for t in direction.iter_mut() {
        if flip {
            *t = -*t;
        }
        *t *= init_norm;
    }
    Ok(direction)
}

/// Unit eigenvector for the largest algebraic eigenvalue of a dense
/// symmetric (possibly indefinite) matrix.
fn largest_algebraic_eigenvector(matrix: &[f64], dn: usize) -> Result<Vec<f64>> {
    const MAX_ITERS: usize = 4096;
    let m = nalgebra::DMatrix::from_row_slice(dn, dn, matrix);
    let eig = nalgebra::SymmetricEigen::try_new(m, 1e-13, MAX_ITERS).ok_or(
        Error::EigenNoConverge { iterations: MAX_ITERS, residual: f64::NAN },
    )?;
    let mut top = 0;
    let mut top_val = f64::NEG_INFINITY;
    for (i, &val) in eig.eigenvalues.iter().enumerate() {
        if val > top_val {
            top_val = val;
            top = i;
        }
    }
    let col = eig.eigenvectors.column(top);
    let norm = col.norm();
    Ok(col.iter().map(|t| t / norm).collect())
}

/// Outcome of one backtracking gradient descent run.
#[derive(Debug, Clone)]
pub struct GradbackOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub stalled: bool,
    pub final_grad_norm: f64,
}

/// Backtracking gradient descent on an objective defined strictly inside
/// the unit ball.
///
/// Each step shrinks from `step_init` by `backtrack_beta` until both the
/// iterate stays inside the ball and the Armijo decrease
/// `f(x - s g) <= f(x) - sigma s ||g||^2` holds. Stops at the gradient
/// tolerance, the iteration cap, or step underflow (stall, flagged).
pub fn gradback<F, FG>(value: F, value_grad: FG, x0: &[f64], cfg: &SolverConfig) -> Result<GradbackOutcome>
where
    F: Fn(&[f64]) -> Result<f64>,
    FG: Fn(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    cfg.validate()?;
    let norm0: f64 = dot(x0, x0).sqrt();
    if norm0 >= 1.0 {
        return Err(Error::BarrierDomain { norm: norm0 });
    }

    let mut x = x0.to_vec();
    let (mut f, mut grad) = value_grad(&x)?;
    let dn = x.len();
    let mut candidate = vec![0.0f64; dn];

    for iter in 0..cfg.max_inner_iters {
        let grad_norm_sq = dot(&grad, &grad);
        let grad_norm = grad_norm_sq.sqrt();
        if grad_norm <= cfg.grad_tol {
            return Ok(GradbackOutcome { x, iterations: iter, stalled: false, final_grad_norm: grad_norm });
        }

        let mut step = cfg.step_init;
        loop {
            if step < 1e-18 {
                // no admissible decrease at any representable step
                return Ok(GradbackOutcome {
                    x,
                    iterations: iter,
                    stalled: true,
                    final_grad_norm: grad_norm,
                });
            }
            let mut norm_sq = 0.0;
            for p in 0..dn {
                let t = x[p] - step * grad[p];
                candidate[p] = t;
                norm_sq += t * t;
            }
            if norm_sq < 1.0 {
                let f_new = value(&candidate)?;
                if f_new <= f - cfg.armijo_sigma * step * grad_norm_sq {
                    x.copy_from_slice(&candidate);
                    f = f_new;
                    break;
                }
            }
            step *= cfg.backtrack_beta;
        }
        let refreshed = value_grad(&x)?;
        // keep the line-search value; the refreshed one is identical
        grad = refreshed.1;
    }
    let grad_norm = dot(&grad, &grad).sqrt();
    Ok(GradbackOutcome { x, iterations: cfg.max_inner_iters, stalled: false, final_grad_norm: grad_norm })
}

/// The full log-barrier pipeline: geometric `t0` schedule, warm starts,
/// spectral initializer unless an explicit start is given.
pub fn gradbar(
    instance: &MeasurementInstance,
    cfg: &SolverConfig,
    x0: Option<&[f64]>,
    want_trace: bool,
) -> Result<SolverResult> {
    cfg.validate()?;
    let mut x = match x0 {
        Some(v) => {
            let norm: f64 = dot(v, v).sqrt();
            if norm >= 1.0 {
                return Err(Error::BarrierDomain { norm });
            }
            v.to_vec()
        }
        None => spectral_init(instance, cfg.init_norm)?,
    };

    let mut trace = want_trace.then(Vec::new);
    let mut t0 = cfg.barrier.t0_init;
    let mut outer_stages = 0;
    let mut inner_iter_total = 0;
    let mut stalled_stages = 0;

    while t0 < cfg.barrier.t0_max {
        let outcome = gradback(
            |v| instance.f_bar(t0, v),
            |v| instance.f_bar_with_grad(t0, v),
            &x,
            cfg,
        )?;
        x = outcome.x;
        inner_iter_total += outcome.iterations;
        stalled_stages += outcome.stalled as usize;
        outer_stages += 1;
        if let Some(t) = trace.as_mut() {
            t.push(StageTrace {
                t0,
                residual: instance.f_plain_grouped(&x),
                overlap: overlap(&x, &instance.x_true),
                inner_iters: outcome.iterations,
            });
        }
        t0 *= cfg.barrier.t0_multiplier;
    }

    Ok(SolverResult {
        overlap: overlap(&x, &instance.x_true),
        residual: instance.f_plain_grouped(&x),
        outer_stages,
        inner_iter_total,
        stalled_stages,
        trace,
        x_hat: x,
    })
}

/// `|x_hat . x_true| / ||x_hat||` (the planted vector has unit norm).
pub fn overlap(x_hat: &[f64], x_true: &[f64]) -> f64 {
    let norm = dot(x_hat, x_hat).sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    (dot(x_hat, x_true) / norm).abs()
}

/// Success criterion: overlap at or above the threshold (default 0.99).
pub fn is_success(result: &SolverResult, threshold: f64) -> bool {
    result.overlap >= threshold
}

/// Equivalent phase-insensitive error form:
/// `min(||x/||x|| - x_true||, ||x/||x|| + x_true||)`. Success at overlap
/// threshold `t` corresponds to this error being at most `sqrt(2 - 2t)`.
pub fn phase_error(x_hat: &[f64], x_true: &[f64]) -> f64 {
    let norm = dot(x_hat, x_hat).sqrt();
    if norm == 0.0 {
        return 2.0f64.sqrt();
    }
    let mut minus = 0.0;
    let mut plus = 0.0;
    for (xh, xt) in x_hat.iter().zip(x_true) {
        let u = xh / norm;
        minus += (u - xt) * (u - xt);
        plus += (u + xt) * (u + xt);
    }
    minus.min(plus).sqrt()
}
