//! Nonlinear least squares: the bounded Levenberg–Marquardt core and the
//! concrete fits of the analysis chain (single resonator, polariton cut,
//! branch dispersion, TLS surface, log-log power law).
//!
//! `solve_least_squares` is reentrant and stateless between calls;
//! independent fits may run concurrently.

mod dispersion;
mod linalg;
mod lm;
mod polariton;
mod powerlaw;
mod resonator;
mod tls;

pub use dispersion::{fit_dispersion, BranchPoint, DispersionDiagnostics};
pub use linalg::Mat;
pub use lm::{
    numeric_jacobian, solve_least_squares, weighted_ssr, FitOptions, FitProblem, FitResult,
};
pub use polariton::{fit_polariton_cut, PolaritonFixed, PolaritonOptions};
pub use powerlaw::{fit_powerlaw, PowerLaw};
pub use resonator::{fit_resonator, CouplingRegime, ResonatorOptions};
pub use tls::{fit_tls_surface, TlsSample};

/// A cross-section spectrum: amplitude (and optionally phase) against probe
/// frequency in Hz.
#[derive(Debug, Clone)]
pub struct SpectrumCut {
    pub freq_hz: Vec<f64>,
    pub amplitude: Vec<f64>,
    pub phase: Option<Vec<f64>>,
}

impl SpectrumCut {
    pub fn new(freq_hz: Vec<f64>, amplitude: Vec<f64>, phase: Option<Vec<f64>>) -> Self {
        Self {
            freq_hz,
            amplitude,
            phase,
        }
    }

    pub fn len(&self) -> usize {
        self.freq_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freq_hz.is_empty()
    }
}

/// Robust noise estimate from median absolute successive differences; immune
/// to smooth spectral features, sensitive only to point-to-point scatter.
pub(crate) fn noise_sigma(values: &[f64]) -> f64 {
    if values.len() < 3 {
        return 0.0;
    }
    let mut diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    diffs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = diffs[diffs.len() / 2];
    // |d| = |n_i+1 - n_i| has sigma*sqrt(2); MAD to sigma factor 1.4826.
    median * 1.4826 / std::f64::consts::SQRT_2
}

/// Vertex of the parabola through three (x, y) points; used for sub-bin
/// interpolation of dip positions. Returns (x_vertex, y_vertex).
pub(crate) fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let curvature = (d12 - d01) / (x[2] - x[0]);
    if curvature.abs() < 1e-300 {
        return (x[1], y[1]);
    }
    let xv = 0.5 * (x[0] + x[1] - d01 / curvature);
    let clamped = xv.clamp(x[0], x[2]);
    let yv = y[1] + curvature * (clamped - x[1]).powi(2)
        + (d01 + curvature * (x[1] - x[0])) * (clamped - x[1]);
    (clamped, yv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola_vertex_recovers_exact_quadratic() {
        // y = 2 (x - 1.3)^2 + 0.5 sampled at three points around the vertex.
        let f = |x: f64| 2.0 * (x - 1.3).powi(2) + 0.5;
        let x = [1.0, 1.5, 2.0];
        let y = [f(x[0]), f(x[1]), f(x[2])];
        let (xv, yv) = parabola_vertex(x, y);
        assert!((xv - 1.3).abs() < 1e-12);
        assert!((yv - 0.5).abs() < 1e-12);
    }

    #[test]
    fn noise_sigma_tracks_injected_scatter() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let sigma = 0.02;
        let values: Vec<f64> = (0..4000)
            .map(|i| {
                let smooth = (i as f64 / 500.0).sin();
                // Box-Muller pair, first component.
                let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                smooth
                    + sigma
                        * (-2.0 * u1.ln()).sqrt()
                        * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect();
        let est = noise_sigma(&values);
        assert!(
            (est - sigma).abs() < 0.15 * sigma,
            "noise estimate {est} vs true {sigma}"
        );
    }
}
