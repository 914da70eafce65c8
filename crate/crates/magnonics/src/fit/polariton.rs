//! Polariton cut fit: extracts the magnon frequency and internal linewidth
//! from one baseline-normalized amplitude cross section, with the cavity
//! parameters and (by default) the coupling strength held fixed from the
//! earlier analysis stages.

use super::lm::{solve_least_squares, FitOptions, FitProblem, FitResult};
use super::{noise_sigma, SpectrumCut};
use crate::constants::hz_to_angular;
use crate::error::{Error, FitError, Result};
use crate::physics::{s11_model, MagnonParams};

/// Parameters held fixed during the cut fit (all rad/s).
#[derive(Debug, Clone, Copy)]
pub struct PolaritonFixed {
    pub omega_r: f64,
    pub kappa_c: f64,
    pub kappa_l: f64,
    pub g: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct PolaritonOptions {
    /// Also free the coupling strength (useful at the degeneracy cut).
    pub free_g: bool,
    /// Free additive amplitude offset in addition to the multiplicative scale.
    pub free_offset: bool,
    /// Degree of the multiplicative baseline polynomial (0 = plain scale).
    /// Degrees 1-2 absorb smooth residual background left over by the
    /// masked-average normalization without touching the dip shapes.
    pub baseline_degree: usize,
    /// Initial magnon frequency (rad/s); when `None` it is inferred from the
    /// two dip positions, whose sum equals ω_r + ω_m.
    pub omega_m_init: Option<f64>,
    /// Initial magnon half-linewidth (rad/s).
    pub kappa_m_init: f64,
    /// Physical lower bound for κ_m (rad/s); a fit pinned here is rejected.
    pub kappa_m_floor: f64,
    /// Minimum relative dip contrast; cuts with less structure than this
    /// (and less than 4x the noise) carry no usable resonance.
    pub min_contrast: f64,
    pub options: FitOptions,
}

impl Default for PolaritonOptions {
    fn default() -> Self {
        Self {
            free_g: false,
            free_offset: true,
            baseline_degree: 2,
            omega_m_init: None,
            kappa_m_init: hz_to_angular(1.0e6),
            kappa_m_floor: 1.0,
            min_contrast: 0.04,
            options: FitOptions::default(),
        }
    }
}

fn infer_omega_m(cut: &SpectrumCut, omega_r: f64) -> Result<f64> {
    let amp = &cut.amplitude;
    let n = amp.len();
    let sigma = noise_sigma(amp);
    let mut sorted = amp.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let baseline = sorted[n / 2];
    let threshold = (3.0 * sigma).max(1e-9 * baseline.max(1e-12));
    // Local minima deep enough to matter, deepest two retained.
    let mut dips: Vec<(usize, f64)> = Vec::new();
    for i in 1..n - 1 {
        if amp[i] < amp[i - 1] && amp[i] <= amp[i + 1] && baseline - amp[i] > threshold {
            dips.push((i, amp[i]));
        }
    }
    dips.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    if dips.len() < 2 {
        return Err(Error::Fit(FitError::Malformed(
            "cannot infer the magnon frequency from fewer than two dips; pass omega_m_init".into(),
        )));
    }
    let w0 = hz_to_angular(cut.freq_hz[dips[0].0]);
    let w1 = hz_to_angular(cut.freq_hz[dips[1].0]);
    // Branch frequencies sum to ω_r + ω_m.
    Ok(w0 + w1 - omega_r)
}

/// Fit one normalized polariton cut. Free parameters, in order: ω_m, κ_m,
/// amplitude scale, then (optionally) additive offset, baseline polynomial
/// coefficients, and coupling strength. A fit whose κ_m (or another
/// calibration parameter) lands on a bound is rejected with
/// [`FitError::AtBound`].
pub fn fit_polariton_cut(
    cut: &SpectrumCut,
    fixed: &PolaritonFixed,
    opts: &PolaritonOptions,
) -> Result<(MagnonParams, FitResult)> {
    if cut.len() < 16 || cut.amplitude.len() != cut.freq_hz.len() {
        return Err(Error::Fit(FitError::Malformed(
            "polariton cut needs matching axes and at least 16 points".into(),
        )));
    }
    if opts.baseline_degree > 3 {
        return Err(Error::Fit(FitError::Malformed(
            "baseline polynomial degree must be <= 3".into(),
        )));
    }
    // A cut without a resonance dip well above the noise floor carries no
    // linewidth information.
    {
        let mut sorted = cut.amplitude.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let baseline = sorted[sorted.len() / 2].max(1e-12);
        let min_val = sorted[0];
        let sigma = noise_sigma(&cut.amplitude);
        let contrast = (baseline - min_val) / baseline;
        if contrast < (4.0 * sigma / baseline).max(opts.min_contrast) {
            return Err(Error::Fit(FitError::NoDip));
        }
    }
    let omega_m0 = match opts.omega_m_init {
        Some(w) => w,
        None => infer_omega_m(cut, fixed.omega_r)?,
    };

    let span = hz_to_angular(cut.freq_hz.last().unwrap() - cut.freq_hz[0]);
    let omega_lo = hz_to_angular(cut.freq_hz[0]);
    let omega_hi = hz_to_angular(*cut.freq_hz.last().unwrap());
    let omega_mid = 0.5 * (omega_lo + omega_hi);

    // The magnon frequency is fitted as an offset from the window center so
    // the relative differencing step stays small against the linewidths.
    let mut init = vec![
        omega_m0 - omega_mid,
        opts.kappa_m_init.max(opts.kappa_m_floor),
        1.0,
    ];
    let mut bounds = vec![
        (-2.5 * span, 2.5 * span),
        (opts.kappa_m_floor, 10.0 * span),
        (1e-6, 1e6),
    ];
    let offset_idx = opts.free_offset.then_some(init.len());
    if opts.free_offset {
        init.push(0.0);
        bounds.push((-1.0, 1.0));
    }
    let poly_idx = init.len();
    for _ in 0..opts.baseline_degree {
        init.push(0.0);
        bounds.push((-10.0, 10.0));
    }
    let g_idx = opts.free_g.then_some(init.len());
    if opts.free_g {
        init.push(fixed.g);
        bounds.push((0.0, 5.0 * span));
    }

    let axis: Vec<f64> = cut.freq_hz.iter().map(|&f| hz_to_angular(f)).collect();
    let fixed_params = *fixed;
    let degree = opts.baseline_degree;
    let half_span = 0.5 * span;
    let model = move |p: &[f64], out: &mut [f64]| {
        let offset = offset_idx.map_or(0.0, |j| p[j]);
        let g = g_idx.map_or(fixed_params.g, |j| p[j]);
        for (o, &w) in out.iter_mut().zip(&axis) {
            // Multiplicative baseline: scale·(1 + b1·x + b2·x² + ...) with
            // x the normalized frequency coordinate.
            let x = (w - omega_mid) / half_span;
            let mut baseline = 1.0;
            let mut xn = 1.0;
            for d in 0..degree {
                xn *= x;
                baseline += p[poly_idx + d] * xn;
            }
            *o = p[2]
                * baseline
                * s11_model(
                    w,
                    fixed_params.omega_r,
                    fixed_params.kappa_c,
                    fixed_params.kappa_l,
                    omega_mid + p[0],
                    p[1],
                    g,
                )
                .norm()
                + offset;
        }
    };

    let problem = FitProblem {
        model,
        observed: cut.amplitude.clone(),
        weights: None,
        init,
        bounds,
        options: opts.options,
    };
    let mut result = solve_least_squares(&problem)?;
    result.params[0] += omega_mid;
    // A physical parameter or the amplitude calibration pinned at a bound
    // means the model never matched the data; report it as a failure.
    for &idx in &result.at_bounds {
        let name = if idx == 0 {
            "omega_m"
        } else if idx == 1 {
            "kappa_m"
        } else if idx == 2 {
            "scale"
        } else if Some(idx) == offset_idx {
            "offset"
        } else {
            continue;
        };
        return Err(Error::Fit(FitError::AtBound { name: name.into() }));
    }
    let g_fitted = g_idx.map_or(fixed.g, |j| result.params[j]);
    let mag = MagnonParams::new(result.params[0], result.params[1], g_fitted)?;
    Ok((mag, result))
}
