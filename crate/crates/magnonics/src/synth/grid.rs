//! Exhaustive grid-search oracle over the same weighted objective as the
//! Levenberg–Marquardt solver, for independent verification of fit minima.

use crate::error::{Error, FitError, Result};
use crate::fit::weighted_ssr;

/// Per-parameter ranges and point counts for the exhaustive search.
#[derive(Debug, Clone)]
pub struct GridSpec {
    /// Inclusive (lo, hi) per parameter.
    pub ranges: Vec<(f64, f64)>,
    /// Points per parameter (>= 1; a count of 1 fixes the parameter at lo).
    pub counts: Vec<usize>,
    /// Maximum number of grid points evaluated (parameter combinations).
    pub cap: usize,
}

impl GridSpec {
    pub fn new(ranges: Vec<(f64, f64)>, counts: Vec<usize>) -> Self {
        Self {
            ranges,
            counts,
            cap: 10_000_000,
        }
    }

    /// Grid spacing per parameter — the oracle's resolution.
    pub fn cell_sizes(&self) -> Vec<f64> {
        self.ranges
            .iter()
            .zip(&self.counts)
            .map(|(&(lo, hi), &n)| if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 })
            .collect()
    }
}

/// Result of the exhaustive search: the best grid point and its objective.
#[derive(Debug, Clone)]
pub struct GridFit {
    pub params: Vec<f64>,
    pub residual_norm: f64,
}

/// Evaluate the weighted SSR at every grid point and return the minimum.
/// Errors before any evaluation if the grid exceeds the configured cap.
pub fn grid_search_fit<F>(
    model: &F,
    observed: &[f64],
    weights: Option<&[f64]>,
    grid: &GridSpec,
) -> Result<GridFit>
where
    F: Fn(&[f64], &mut [f64]),
{
    let k = grid.ranges.len();
    if k == 0 || grid.counts.len() != k {
        return Err(Error::Fit(FitError::Malformed(
            "grid needs matching ranges and counts".into(),
        )));
    }
    if grid.counts.iter().any(|&c| c == 0) {
        return Err(Error::Fit(FitError::Malformed("zero-count grid axis".into())));
    }
    let total: usize = grid.counts.iter().try_fold(1usize, |acc, &c| {
        acc.checked_mul(c)
    }).ok_or_else(|| Error::Fit(FitError::GridCapExceeded {
        points: usize::MAX,
        cap: grid.cap,
    }))?;
    if total > grid.cap {
        return Err(Error::Fit(FitError::GridCapExceeded {
            points: total,
            cap: grid.cap,
        }));
    }

    let cells = grid.cell_sizes();
    let mut indices = vec![0usize; k];
    let mut params = vec![0.0; k];
    let mut best_params = Vec::new();
    let mut best = f64::INFINITY;
    for _ in 0..total {
        for j in 0..k {
            params[j] = grid.ranges[j].0 + cells[j] * indices[j] as f64;
        }
        let ssr = weighted_ssr(model, &params, observed, weights);
        if ssr < best {
            best = ssr;
            best_params = params.clone();
        }
        // Odometer increment.
        for j in (0..k).rev() {
            indices[j] += 1;
            if indices[j] < grid.counts[j] {
                break;
            }
            indices[j] = 0;
        }
    }
    Ok(GridFit {
        params: best_params,
        residual_norm: best,
    })
}
