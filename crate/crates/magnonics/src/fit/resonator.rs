//! Single-resonator reflection fit: extracts (ω_r, κ_c, κ_i) from a
//! cross-section spectrum with the magnon decoupled (g = 0).
//!
//! The fit works directly on the reflection model — complex-domain when phase
//! data is present, amplitude-domain otherwise. The amplitude of a single
//! resonator only determines |κ_c − κ_i|, so the amplitude-domain fit needs a
//! coupling-regime hint to pick the physical branch; the complex fit resolves
//! it from the phase.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lm::{solve_least_squares, FitOptions, FitProblem, FitResult};
use super::{noise_sigma, parabola_vertex, SpectrumCut};
use crate::constants::hz_to_angular;
use crate::error::{Error, FitError, Result};
use crate::physics::{s11_model, CavityParams};

/// Which loss channel dominates when only amplitude data is available.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingRegime {
    /// κ_c > κ_i (the external channel dominates).
    #[default]
    Overcoupled,
    /// κ_c < κ_i.
    Undercoupled,
}

#[derive(Debug, Clone, Copy)]
pub struct ResonatorOptions {
    pub regime: CouplingRegime,
    /// Free amplitude scale (leave on for raw data; off for oracle checks on
    /// normalized synthetic cuts, which keeps the fit at 3 parameters).
    pub fit_scale: bool,
    /// Use phase data when the cut carries it.
    pub use_phase: bool,
    pub options: FitOptions,
}

impl Default for ResonatorOptions {
    fn default() -> Self {
        Self {
            regime: CouplingRegime::Overcoupled,
            fit_scale: true,
            use_phase: true,
            options: FitOptions::default(),
        }
    }
}

/// Initial estimates from the dip geometry: position, half-depth width, and
/// contrast. Errors with [`FitError::NoDip`] if no dip clears the noise.
fn initial_guess(cut: &SpectrumCut) -> Result<(f64, f64, f64, f64)> {
    let amp = &cut.amplitude;
    let n = amp.len();
    let mut sorted = amp.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let baseline = sorted[n / 2].max(1e-12);
    let (min_idx, &min_val) = amp
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    let contrast = baseline - min_val;
    let sigma = noise_sigma(amp);
    if contrast <= (3.0 * sigma).max(1e-9 * baseline) {
        return Err(Error::Fit(FitError::NoDip));
    }
    // Sub-bin dip position.
    let f_dip = if min_idx > 0 && min_idx + 1 < n {
        parabola_vertex(
            [
                cut.freq_hz[min_idx - 1],
                cut.freq_hz[min_idx],
                cut.freq_hz[min_idx + 1],
            ],
            [amp[min_idx - 1], amp[min_idx], amp[min_idx + 1]],
        )
        .0
    } else {
        cut.freq_hz[min_idx]
    };
    // Half-depth crossings on both sides give the width estimate.
    let half = min_val + 0.5 * contrast;
    let mut left = cut.freq_hz[0];
    for i in (0..min_idx).rev() {
        if amp[i] >= half {
            left = cut.freq_hz[i];
            break;
        }
    }
    let mut right = *cut.freq_hz.last().unwrap();
    for i in min_idx..n {
        if amp[i] >= half {
            right = cut.freq_hz[i];
            break;
        }
    }
    let width_hz = (right - left).max(cut.freq_hz[1] - cut.freq_hz[0]);
    Ok((f_dip, width_hz, baseline, (contrast / baseline).min(0.999)))
}

/// Fit a reflection resonance, returning the cavity parameters and the raw
/// fit result (parameter order: ω_r, κ_c, κ_i[, scale], rad/s).
pub fn fit_resonator(
    cut: &SpectrumCut,
    opts: &ResonatorOptions,
) -> Result<(CavityParams, FitResult)> {
    if cut.len() < 8 || cut.amplitude.len() != cut.freq_hz.len() {
        return Err(Error::Fit(FitError::Malformed(
            "resonator cut needs matching axes and at least 8 points".into(),
        )));
    }
    let (f_dip, width_hz, baseline, contrast) = initial_guess(cut)?;

    // The resonance frequency is fitted as an offset from the window center:
    // the offset lives on the same scale as the linewidths, which keeps the
    // 1e-6 relative differencing step well inside the feature width.
    let omega_mid = hz_to_angular(0.5 * (cut.freq_hz[0] + cut.freq_hz.last().unwrap()));
    let delta0 = hz_to_angular(f_dip) - omega_mid;
    let kappa_l0 = hz_to_angular(0.5 * width_hz);
    // Amplitude at the dip is |kappa_c - kappa_i| / kappa_l.
    let (kc_frac, ki_frac) = match opts.regime {
        CouplingRegime::Overcoupled => (0.5 * (1.0 + contrast), 0.5 * (1.0 - contrast)),
        CouplingRegime::Undercoupled => (0.5 * (1.0 - contrast), 0.5 * (1.0 + contrast)),
    };
    let mut init = vec![delta0, kc_frac * kappa_l0, ki_frac * kappa_l0];
    if opts.fit_scale {
        init.push(baseline);
    }

    let span = hz_to_angular(cut.freq_hz.last().unwrap() - cut.freq_hz[0]);
    let mut bounds = vec![
        (-0.5 * span, 0.5 * span),
        (1.0, 10.0 * span),
        (1.0, 10.0 * span),
    ];
    if opts.fit_scale {
        bounds.push((1e-6, 1e6));
    }

    let omega_axis: Vec<f64> = cut.freq_hz.iter().map(|&f| hz_to_angular(f)).collect();
    let fit_scale = opts.fit_scale;

    let mut result = if opts.use_phase && cut.phase.is_some() {
        // Complex fit on stacked re/im parts.
        let phase = cut.phase.as_ref().unwrap();
        if phase.len() != cut.len() {
            return Err(Error::Fit(FitError::Malformed(
                "phase array length differs from amplitude".into(),
            )));
        }
        let mut observed = Vec::with_capacity(2 * cut.len());
        for (a, ph) in cut.amplitude.iter().zip(phase) {
            observed.push(a * ph.cos());
        }
        for (a, ph) in cut.amplitude.iter().zip(phase) {
            observed.push(a * ph.sin());
        }
        let axis = omega_axis.clone();
        let model = move |p: &[f64], out: &mut [f64]| {
            let scale = if fit_scale { p[3] } else { 1.0 };
            let n = axis.len();
            for (i, &w) in axis.iter().enumerate() {
                let s: Complex64 =
                    scale * s11_model(w, omega_mid + p[0], p[1], p[1] + p[2], 1.0, 1.0, 0.0);
                out[i] = s.re;
                out[n + i] = s.im;
            }
        };
        let problem = FitProblem {
            model,
            observed,
            weights: None,
            init,
            bounds,
            options: opts.options,
        };
        solve_least_squares(&problem)?
    } else {
        let axis = omega_axis.clone();
        let model = move |p: &[f64], out: &mut [f64]| {
            let scale = if fit_scale { p[3] } else { 1.0 };
            for (o, &w) in out.iter_mut().zip(&axis) {
                *o = scale
                    * s11_model(w, omega_mid + p[0], p[1], p[1] + p[2], 1.0, 1.0, 0.0).norm();
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
        solve_least_squares(&problem)?
    };

    // Report the absolute resonance frequency; a constant shift leaves the
    // uncertainties untouched.
    result.params[0] += omega_mid;
    let cav = CavityParams::new(result.params[0], result.params[1], result.params[2])?;
    Ok((cav, result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{hz_to_angular, TWO_PI};
    use crate::physics::s11_model;

    fn synth_cut(
        omega_r_hz: f64,
        q_i: f64,
        q_c: f64,
        n: usize,
        span_hz: f64,
        with_phase: bool,
    ) -> SpectrumCut {
        let omega_r = hz_to_angular(omega_r_hz);
        let cav = CavityParams::from_quality_factors(omega_r, q_i, q_c).unwrap();
        let freq_hz: Vec<f64> = (0..n)
            .map(|i| omega_r_hz - span_hz / 2.0 + span_hz * i as f64 / (n - 1) as f64)
            .collect();
        let mut amplitude = Vec::with_capacity(n);
        let mut phase = Vec::with_capacity(n);
        for &f in &freq_hz {
            let s = s11_model(
                hz_to_angular(f),
                cav.omega_r(),
                cav.kappa_c(),
                cav.kappa_l(),
                1.0,
                1.0,
                0.0,
            );
            amplitude.push(s.norm());
            phase.push(s.im.atan2(s.re));
        }
        SpectrumCut::new(freq_hz, amplitude, with_phase.then_some(phase))
    }

    #[test]
    fn recovers_reference_quality_factors() {
        let cut = synth_cut(5.2395e9, 7125.0, 5439.0, 1201, 40e6, false);
        let (cav, fit) = fit_resonator(&cut, &ResonatorOptions::default()).unwrap();
        assert!(fit.converged);
        assert!((cav.q_l() - 3084.0).abs() < 1.0, "Q_l = {}", cav.q_l());
        assert!((cav.q_i() - 7125.0).abs() < 2.0);
        assert!((cav.q_c() - 5439.0).abs() < 2.0);
    }

    #[test]
    fn noiseless_recovery_to_sub_ppm() {
        for with_phase in [false, true] {
            let cut = synth_cut(5.0e9, 8000.0, 4000.0, 801, 30e6, with_phase);
            let (cav, _) = fit_resonator(&cut, &ResonatorOptions::default()).unwrap();
            let omega_r = hz_to_angular(5.0e9);
            let truth = CavityParams::from_quality_factors(omega_r, 8000.0, 4000.0).unwrap();
            assert!((cav.omega_r() / truth.omega_r() - 1.0).abs() < 1e-9);
            assert!((cav.kappa_c() / truth.kappa_c() - 1.0).abs() < 1e-6);
            assert!((cav.kappa_i() / truth.kappa_i() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn fitted_center_matches_interpolated_minimum() {
        let cut = synth_cut(5.0e9, 6000.0, 3000.0, 601, 25e6, false);
        let (cav, _) = fit_resonator(&cut, &ResonatorOptions::default()).unwrap();
        let (idx, _) = cut
            .amplitude
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        let (f_min, _) = parabola_vertex(
            [
                cut.freq_hz[idx - 1],
                cut.freq_hz[idx],
                cut.freq_hz[idx + 1],
            ],
            [
                cut.amplitude[idx - 1],
                cut.amplitude[idx],
                cut.amplitude[idx + 1],
            ],
        );
        let step = cut.freq_hz[1] - cut.freq_hz[0];
        assert!((cav.omega_r() / TWO_PI - f_min).abs() < step);
    }

    #[test]
    fn flat_spectrum_reports_no_dip() {
        let freq_hz: Vec<f64> = (0..100).map(|i| 5.0e9 + 1e5 * i as f64).collect();
        let amplitude = vec![0.75; 100];
        let cut = SpectrumCut::new(freq_hz, amplitude, None);
        match fit_resonator(&cut, &ResonatorOptions::default()) {
            Err(Error::Fit(FitError::NoDip)) => {}
            other => panic!("expected NoDip, got {other:?}"),
        }
    }

    #[test]
    fn undercoupled_hint_selects_the_other_branch() {
        // Same amplitude data fits both regimes; the hint picks the branch.
        let cut = synth_cut(5.0e9, 4000.0, 8000.0, 801, 30e6, false);
        let opts = ResonatorOptions {
            regime: CouplingRegime::Undercoupled,
            ..Default::default()
        };
        let (cav, _) = fit_resonator(&cut, &opts).unwrap();
        assert!(cav.kappa_c() < cav.kappa_i());
        assert!((cav.q_i() - 4000.0).abs() / 4000.0 < 1e-6);
        assert!((cav.q_c() - 8000.0).abs() / 8000.0 < 1e-6);
    }
}
