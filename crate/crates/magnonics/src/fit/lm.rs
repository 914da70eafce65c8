//! Bounded Levenberg–Marquardt nonlinear least squares with numeric
//! Jacobians.
//!
//! The solver minimizes the weighted sum of squared residuals
//! Σᵢ wᵢ²·(yᵢ − fᵢ(p))² subject to per-parameter box bounds. Steps solve the
//! damped normal equations (JᵀJ + λ·diag(JᵀJ))·δ = Jᵀr with λ starting at
//! 1e-3, ×10 on a rejected step and ÷10 on an accepted one. Bounds are
//! enforced by projection, with the gradient zeroed for parameters pinned at
//! an active bound. Convergence: relative step or relative gradient below
//! 1e-10 (also triggered by a relative SSR decrease below 1e-10 on an
//! accepted step), or 200 iterations. Everything is deterministic for fixed
//! inputs, and accepted iterations never increase the residual norm.

use super::linalg::{invert_sym_eigh, solve_spd, Mat};
use crate::error::{FitError, Result};

const TINY: f64 = 1e-300;

/// Solver options. Defaults implement the documented schedule.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iter: usize,
    pub step_tol: f64,
    pub grad_tol: f64,
    pub lambda_init: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            step_tol: 1e-10,
            grad_tol: 1e-10,
            lambda_init: 1e-3,
            lambda_up: 10.0,
            lambda_down: 10.0,
        }
    }
}

/// A weighted, bounded least-squares problem. The model closure receives the
/// parameter vector and writes one prediction per observation; the abscissa
/// is captured by the closure.
pub struct FitProblem<F>
where
    F: Fn(&[f64], &mut [f64]),
{
    pub model: F,
    pub observed: Vec<f64>,
    /// Optional multiplicative residual weights (1/σ per point, all > 0).
    pub weights: Option<Vec<f64>>,
    pub init: Vec<f64>,
    /// Per-parameter [lo, hi]; use infinities for unbounded sides.
    pub bounds: Vec<(f64, f64)>,
    pub options: FitOptions,
}

impl<F> FitProblem<F>
where
    F: Fn(&[f64], &mut [f64]),
{
    /// Unweighted, unbounded problem with default options.
    pub fn new(model: F, observed: Vec<f64>, init: Vec<f64>) -> Self {
        let k = init.len();
        Self {
            model,
            observed,
            weights: None,
            init,
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); k],
            options: FitOptions::default(),
        }
    }
}

/// Fit outcome: parameters, 1σ uncertainties from the covariance
/// (JᵀJ)⁻¹ scaled by the reduced chi-square, the final weighted SSR, and
/// convergence diagnostics. `sigma` is `None` when the Jacobian is singular
/// or there are no spare degrees of freedom.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
    pub residual_norm: f64,
    pub converged: bool,
    pub n_iter: usize,
    /// Indices of parameters sitting exactly on a bound at exit.
    pub at_bounds: Vec<usize>,
    /// Weighted SSR after the start and each accepted step (non-increasing).
    pub ssr_history: Vec<f64>,
}

/// Weighted sum of squared residuals of `model` at `params`; shared between
/// the LM solver and the brute-force grid oracle so both optimize the same
/// objective.
pub fn weighted_ssr<F>(model: &F, params: &[f64], observed: &[f64], weights: Option<&[f64]>) -> f64
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut pred = vec![0.0; observed.len()];
    model(params, &mut pred);
    let mut ssr = 0.0;
    for (i, (&y, &f)) in observed.iter().zip(pred.iter()).enumerate() {
        let w = weights.map_or(1.0, |w| w[i]);
        let r = w * (y - f);
        ssr += r * r;
    }
    ssr
}

/// Jacobian of the model by central differences with relative step 1e-6 and
/// absolute floor 1e-12. Errors if the model produces non-finite values at
/// any probe point.
pub fn numeric_jacobian<F>(model: &F, params: &[f64], n_out: usize) -> Result<Mat>
where
    F: Fn(&[f64], &mut [f64]),
{
    let bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); params.len()];
    jacobian_with_bounds(model, params, n_out, &bounds, None)
}

/// Same differencing scheme, but switches to a one-sided difference when the
/// probe would cross a bound, so models are never evaluated outside their
/// physical domain. `f_center` avoids re-evaluating the model at `params`
/// when the caller already has it.
fn jacobian_with_bounds<F>(
    model: &F,
    params: &[f64],
    n_out: usize,
    bounds: &[(f64, f64)],
    f_center: Option<&[f64]>,
) -> Result<Mat>
where
    F: Fn(&[f64], &mut [f64]),
{
    let k = params.len();
    let mut jac = Mat::zeros(n_out, k);
    let mut p = params.to_vec();
    let mut f_plus = vec![0.0; n_out];
    let mut f_minus = vec![0.0; n_out];
    let mut center_buf = Vec::new();
    for j in 0..k {
        let mut h = (1e-6 * params[j].abs()).max(1e-12);
        let (lo, hi) = bounds[j];
        // A parameter sitting near zero inside wide finite bounds still has a
        // natural scale; floor the step accordingly so the difference stays
        // above the model's float resolution.
        if lo.is_finite() && hi.is_finite() {
            h = h.max(1e-9 * (hi - lo));
        }
        let up_ok = params[j] + h <= hi;
        let down_ok = params[j] - h >= lo;
        let (left, right, denom): (&[f64], &[f64], f64) = if up_ok && down_ok {
            p[j] = params[j] + h;
            model(&p, &mut f_plus);
            p[j] = params[j] - h;
            model(&p, &mut f_minus);
            p[j] = params[j];
            (&f_minus, &f_plus, 2.0 * h)
        } else {
            // One-sided difference against the center value.
            if center_buf.is_empty() {
                match f_center {
                    Some(c) => center_buf.extend_from_slice(c),
                    None => {
                        center_buf.resize(n_out, 0.0);
                        model(params, &mut center_buf);
                    }
                }
            }
            if up_ok {
                p[j] = params[j] + h;
                model(&p, &mut f_plus);
                p[j] = params[j];
                (center_buf.as_slice(), f_plus.as_slice(), h)
            } else if down_ok {
                p[j] = params[j] - h;
                model(&p, &mut f_minus);
                p[j] = params[j];
                (f_minus.as_slice(), center_buf.as_slice(), h)
            } else {
                // Parameter boxed in tighter than the step: treat as fixed.
                for i in 0..n_out {
                    *jac.at_mut(i, j) = 0.0;
                }
                continue;
            }
        };
        for i in 0..n_out {
            let d = (right[i] - left[i]) / denom;
            if !d.is_finite() {
                return Err(FitError::NonFiniteModel.into());
            }
            *jac.at_mut(i, j) = d;
        }
    }
    Ok(jac)
}

fn clamp_to_bounds(p: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in p.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

/// Minimize the problem's weighted squared residuals within bounds.
pub fn solve_least_squares<F>(problem: &FitProblem<F>) -> Result<FitResult>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = problem.observed.len();
    let k = problem.init.len();
    if n == 0 {
        return Err(FitError::Malformed("no observations".into()).into());
    }
    if k == 0 {
        return Err(FitError::Malformed("no parameters".into()).into());
    }
    if problem.bounds.len() != k {
        return Err(FitError::Malformed(format!(
            "{} bounds for {} parameters",
            problem.bounds.len(),
            k
        ))
        .into());
    }
    if let Some(w) = &problem.weights {
        if w.len() != n {
            return Err(FitError::Malformed(format!(
                "{} weights for {} observations",
                w.len(),
                n
            ))
            .into());
        }
        if w.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(FitError::Malformed("weights must be positive and finite".into()).into());
        }
    }
    for (j, (&v, &(lo, hi))) in problem.init.iter().zip(&problem.bounds).enumerate() {
        if !(v >= lo && v <= hi) {
            return Err(FitError::InitOutOfBounds {
                index: j,
                value: v,
                lo,
                hi,
            }
            .into());
        }
    }

    let opts = problem.options;
    let weights = problem.weights.as_deref();
    let mut p = problem.init.clone();

    let mut pred = vec![0.0; n];
    let mut residual = vec![0.0; n];
    let eval =
        |p: &[f64], pred: &mut Vec<f64>, residual: &mut Vec<f64>| -> Option<f64> {
            (problem.model)(p, pred);
            let mut ssr = 0.0;
            for i in 0..n {
                let w = weights.map_or(1.0, |w| w[i]);
                let r = w * (problem.observed[i] - pred[i]);
                if !r.is_finite() {
                    return None;
                }
                residual[i] = r;
                ssr += r * r;
            }
            Some(ssr)
        };

    let mut ssr = eval(&p, &mut pred, &mut residual).ok_or(FitError::NonFiniteModel)?;
    let mut history = vec![ssr];
    let mut lambda = opts.lambda_init;
    let mut converged = false;
    let mut n_iter = 0;

    'outer: while n_iter < opts.max_iter {
        n_iter += 1;
        // Fresh Jacobian at the current point; rejected trials reuse it
        // inside the damping loop below.
        let mut jac = jacobian_with_bounds(&problem.model, &p, n, &problem.bounds, Some(&pred))?;
        if let Some(w) = weights {
            for i in 0..n {
                for j in 0..k {
                    *jac.at_mut(i, j) *= w[i];
                }
            }
        }
        let a = jac.normal_matrix();
        let mut grad = jac.transpose_mul_vec(&residual);

        // Pin parameters pressed against an active bound (and fixed ones).
        let mut pinned = vec![false; k];
        for j in 0..k {
            let (lo, hi) = problem.bounds[j];
            if lo == hi
                || (p[j] <= lo && grad[j] < 0.0)
                || (p[j] >= hi && grad[j] > 0.0)
                || a.at(j, j) < TINY
            {
                pinned[j] = true;
                grad[j] = 0.0;
            }
        }

        // Scaled gradient convergence test.
        let grad_scale = (0..k)
            .map(|j| {
                let s = (ssr / a.at(j, j).max(TINY)).sqrt();
                grad[j].abs() * p[j].abs().max(s) / ssr.max(TINY)
            })
            .fold(0.0, f64::max);
        if grad_scale < opts.grad_tol {
            converged = true;
            break;
        }

        // Diagonal equilibration keeps the damped system well conditioned
        // across the very different parameter scales (rad/s vs unit scale).
        let d: Vec<f64> = (0..k)
            .map(|j| 1.0 / a.at(j, j).max(TINY).sqrt())
            .collect();

        // Try steps with growing damping until one is accepted.
        loop {
            let mut m = Mat::zeros(k, k);
            let mut rhs = vec![0.0; k];
            for i in 0..k {
                for j in 0..k {
                    *m.at_mut(i, j) = if pinned[i] || pinned[j] {
                        0.0
                    } else {
                        d[i] * a.at(i, j) * d[j]
                    };
                }
            }
            for j in 0..k {
                if pinned[j] {
                    *m.at_mut(j, j) = 1.0;
                    rhs[j] = 0.0;
                } else {
                    *m.at_mut(j, j) += lambda;
                    rhs[j] = d[j] * grad[j];
                }
            }
            let delta_scaled = match solve_spd(&m, &rhs) {
                Some(x) => x,
                None => {
                    lambda *= opts.lambda_up;
                    if lambda > 1e14 {
                        break 'outer;
                    }
                    continue;
                }
            };
            let mut trial = p.clone();
            for j in 0..k {
                trial[j] += d[j] * delta_scaled[j];
            }
            clamp_to_bounds(&mut trial, &problem.bounds);

            // Relative step size measured against each parameter's own value
            // or its natural scale sqrt(ssr / (JᵀJ)_jj), whichever is larger.
            let rel_step = (0..k)
                .map(|j| {
                    let s = (ssr / a.at(j, j).max(TINY)).sqrt();
                    (trial[j] - p[j]).abs() / (p[j].abs().max(s) + TINY)
                })
                .fold(0.0, f64::max);

            let mut trial_pred = vec![0.0; n];
            let mut trial_residual = vec![0.0; n];
            match eval(&trial, &mut trial_pred, &mut trial_residual) {
                Some(trial_ssr) if trial_ssr <= ssr => {
                    let decrease = (ssr - trial_ssr) / ssr.max(TINY);
                    p = trial;
                    pred = trial_pred;
                    residual = trial_residual;
                    ssr = trial_ssr;
                    history.push(ssr);
                    lambda = (lambda / opts.lambda_down).max(1e-14);
                    if rel_step < opts.step_tol || decrease < opts.step_tol {
                        converged = true;
                        break 'outer;
                    }
                    break;
                }
                _ => {
                    // Rejected (worse or non-finite). A step this small that
                    // still fails means the minimum is resolved.
                    if rel_step < opts.step_tol {
                        converged = true;
                        break 'outer;
                    }
                    lambda *= opts.lambda_up;
                    if lambda > 1e14 {
                        break 'outer;
                    }
                }
            }
        }
    }

    // Covariance from the unpinned normal matrix at the solution, scaled by
    // the reduced chi-square; unavailable when singular or dof <= 0.
    let jac_final = jacobian_with_bounds(&problem.model, &p, n, &problem.bounds, Some(&pred))?;
    let mut jac_w = jac_final;
    if let Some(w) = weights {
        for i in 0..n {
            for j in 0..k {
                *jac_w.at_mut(i, j) *= w[i];
            }
        }
    }
    let a = jac_w.normal_matrix();
    let d: Vec<f64> = (0..k)
        .map(|j| 1.0 / a.at(j, j).max(TINY).sqrt())
        .collect();
    let mut a_scaled = Mat::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            *a_scaled.at_mut(i, j) = d[i] * a.at(i, j) * d[j];
        }
    }
    let sigma = if n > k {
        // Threshold at the float-noise floor of the eigensolve: genuinely
        // singular directions flag the covariance unavailable, while merely
        // ill-determined nuisance combinations get their honest (large)
        // uncertainties.
        invert_sym_eigh(&a_scaled, 1e-14).map(|inv| {
            let redchi = ssr / (n - k) as f64;
            (0..k)
                .map(|j| (inv.at(j, j).max(0.0) * redchi).sqrt() * d[j])
                .collect()
        })
    } else {
        None
    };

    let at_bounds = (0..k)
        .filter(|&j| {
            let (lo, hi) = problem.bounds[j];
            p[j] == lo || p[j] == hi
        })
        .collect();

    Ok(FitResult {
        params: p,
        sigma,
        residual_norm: ssr,
        converged,
        n_iter,
        at_bounds,
        ssr_history: history,
    })
}
