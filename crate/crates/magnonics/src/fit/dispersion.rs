//! Avoided-crossing dispersion fit: (ω_r^bare, ω_m at zero current, tuning
//! slope, coupling strength) from per-current branch frequencies.

use super::lm::{solve_least_squares, FitOptions, FitProblem, FitResult};
use crate::constants::hz_to_angular;
use crate::error::{Error, FitError, Result};
use crate::physics::DispersionCal;

/// One tracked pair of branch frequencies at a bias current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoint {
    pub current_a: f64,
    pub omega_plus_hz: f64,
    pub omega_minus_hz: f64,
}

/// Post-fit sanity information: where the fitted magnon crosses the fitted
/// bare cavity, and whether that current lies inside the data span. When it
/// does not, the coupling strength is poorly conditioned.
#[derive(Debug, Clone, Copy)]
pub struct DispersionDiagnostics {
    pub crossing_current_a: f64,
    pub crossing_in_span: bool,
}

/// Fit the branch frequencies of two coupled oscillators, one fixed and one
/// tuning linearly with current. Parameter order in the raw result:
/// [ω_r^bare, ω_m(0), slope, g] (rad/s; slope rad/s per A).
pub fn fit_dispersion(
    points: &[BranchPoint],
    options: FitOptions,
) -> Result<(DispersionCal, FitResult, DispersionDiagnostics)> {
    if points.len() < 4 {
        return Err(Error::Fit(FitError::Malformed(format!(
            "dispersion fit needs at least 4 branch points, got {}",
            points.len()
        ))));
    }
    for p in points {
        if !(p.current_a.is_finite() && p.omega_plus_hz.is_finite() && p.omega_minus_hz.is_finite())
        {
            return Err(Error::NonFinite("branch point"));
        }
    }

    // Splitting is minimal at the crossing; the branch sum is linear in
    // current with the tuning slope, which seeds the remaining parameters.
    let (min_idx, _) = points
        .iter()
        .enumerate()
        .min_by(|a, b| {
            let sa = a.1.omega_plus_hz - a.1.omega_minus_hz;
            let sb = b.1.omega_plus_hz - b.1.omega_minus_hz;
            sa.partial_cmp(&sb).unwrap()
        })
        .unwrap();
    let g0 = hz_to_angular(0.5 * (points[min_idx].omega_plus_hz - points[min_idx].omega_minus_hz));
    let omega_r0 =
        hz_to_angular(0.5 * (points[min_idx].omega_plus_hz + points[min_idx].omega_minus_hz));
    let n = points.len() as f64;
    let mean_i = points.iter().map(|p| p.current_a).sum::<f64>() / n;
    let mean_sum = points
        .iter()
        .map(|p| hz_to_angular(p.omega_plus_hz + p.omega_minus_hz))
        .sum::<f64>()
        / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for p in points {
        let di = p.current_a - mean_i;
        cov += di * (hz_to_angular(p.omega_plus_hz + p.omega_minus_hz) - mean_sum);
        var += di * di;
    }
    let slope0 = if var > 0.0 { cov / var } else { 0.0 };
    let omega_m0 = mean_sum - slope0 * mean_i - omega_r0;

    let currents: Vec<f64> = points.iter().map(|p| p.current_a).collect();
    let mut observed = Vec::with_capacity(2 * points.len());
    for p in points {
        observed.push(hz_to_angular(p.omega_plus_hz));
        observed.push(hz_to_angular(p.omega_minus_hz));
    }
    let model = move |p: &[f64], out: &mut [f64]| {
        for (k, &i) in currents.iter().enumerate() {
            let omega_m = p[1] + p[2] * i;
            let mean = 0.5 * (p[0] + omega_m);
            let half = 0.5 * (p[0] - omega_m);
            let root = (half * half + p[3] * p[3]).sqrt();
            out[2 * k] = mean + root;
            out[2 * k + 1] = mean - root;
        }
    };

    let problem = FitProblem {
        model,
        observed,
        weights: None,
        init: vec![omega_r0, omega_m0, slope0, g0],
        bounds: vec![
            (f64::NEG_INFINITY, f64::INFINITY),
            (f64::NEG_INFINITY, f64::INFINITY),
            (f64::NEG_INFINITY, f64::INFINITY),
            (0.0, f64::INFINITY),
        ],
        options,
    };
    let result = solve_least_squares(&problem)?;
    let cal = DispersionCal::new(
        result.params[0],
        result.params[1],
        result.params[2],
        result.params[3],
    )?;

    let crossing = cal.degeneracy_current();
    let (i_min, i_max) = points.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| {
        (lo.min(p.current_a), hi.max(p.current_a))
    });
    let diag = DispersionDiagnostics {
        crossing_current_a: crossing,
        crossing_in_span: crossing.is_finite() && crossing >= i_min && crossing <= i_max,
    };
    Ok((cal, result, diag))
}
