//! Log-log power-law fit for the excitation-number calibration.

use super::lm::{solve_least_squares, FitOptions, FitProblem, FitResult};
use crate::error::{Error, FitError, Result};

/// N = coeff·(P/1 fW)^exponent, fitted as a line in log-log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    /// Coefficient normalized to femtowatts (value of N at P = 1 fW).
    pub coeff_per_fw: f64,
    pub exponent: f64,
    /// 1σ on the coefficient (delta method from the log-space intercept).
    pub coeff_sigma: f64,
    /// 1σ on the exponent.
    pub exponent_sigma: f64,
}

/// Fit (P_in in watts, N) points to a power law. The raw result vector is
/// [ln coeff, exponent].
pub fn fit_powerlaw(points: &[(f64, f64)], options: FitOptions) -> Result<(PowerLaw, FitResult)> {
    if points.len() < 2 {
        return Err(Error::Fit(FitError::Malformed(format!(
            "power-law fit needs at least 2 points, got {}",
            points.len()
        ))));
    }
    for &(p, n) in points {
        if !(p.is_finite() && n.is_finite()) {
            return Err(Error::NonFinite("power-law point"));
        }
        if p <= 0.0 || n <= 0.0 {
            return Err(Error::InvalidParam(
                "power-law points must be strictly positive on both axes".into(),
            ));
        }
    }
    let log_p: Vec<f64> = points.iter().map(|&(p, _)| (p / 1e-15).ln()).collect();
    let log_n: Vec<f64> = points.iter().map(|&(_, n)| n.ln()).collect();
    // Seed from the endpoints.
    let last = points.len() - 1;
    let b0 = if log_p[last] != log_p[0] {
        (log_n[last] - log_n[0]) / (log_p[last] - log_p[0])
    } else {
        1.0
    };
    let a0 = log_n[0] - b0 * log_p[0];

    let xs = log_p.clone();
    let model = move |p: &[f64], out: &mut [f64]| {
        for (o, &x) in out.iter_mut().zip(&xs) {
            *o = p[0] + p[1] * x;
        }
    };
    let problem = FitProblem {
        model,
        observed: log_n,
        weights: None,
        init: vec![a0, b0],
        bounds: vec![
            (f64::NEG_INFINITY, f64::INFINITY),
            (f64::NEG_INFINITY, f64::INFINITY),
        ],
        options,
    };
    let result = solve_least_squares(&problem)?;
    let coeff = result.params[0].exp();
    let (coeff_sigma, exponent_sigma) = match &result.sigma {
        Some(s) => (coeff * s[0], s[1]),
        None => (0.0, 0.0),
    };
    Ok((
        PowerLaw {
            coeff_per_fw: coeff,
            exponent: result.params[1],
            coeff_sigma,
            exponent_sigma,
        },
        result,
    ))
}
