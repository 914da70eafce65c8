//! Squared-gradient map of the amplitude data, used to expose weak spectral
//! features (e.g. faintly coupled modes) as ridges.

use super::{Grid2, Sweep};

/// Squared magnitude of the 2D finite-difference gradient of the amplitude,
/// in index units: central differences in the interior, one-sided at the
/// edges. Output has the same shape as the input.
pub fn gradient_squared_map(sweep: &Sweep) -> Grid2 {
    let a = sweep.amplitude();
    let (n_f, n_i) = (a.n_rows(), a.n_cols());
    let mut out = Grid2::zeros(n_f, n_i);
    for r in 0..n_f {
        for c in 0..n_i {
            let df = if n_f == 1 {
                0.0
            } else if r == 0 {
                a.at(1, c) - a.at(0, c)
            } else if r == n_f - 1 {
                a.at(n_f - 1, c) - a.at(n_f - 2, c)
            } else {
                0.5 * (a.at(r + 1, c) - a.at(r - 1, c))
            };
            let di = if n_i == 1 {
                0.0
            } else if c == 0 {
                a.at(r, 1) - a.at(r, 0)
            } else if c == n_i - 1 {
                a.at(r, n_i - 1) - a.at(r, n_i - 2)
            } else {
                0.5 * (a.at(r, c + 1) - a.at(r, c - 1))
            };
            *out.at_mut(r, c) = df * df + di * di;
        }
    }
    out
}
