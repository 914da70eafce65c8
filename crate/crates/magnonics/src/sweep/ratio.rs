//! Excitation-ratio curves: per current, the fraction of the stored energy
//! residing in the magnon component, from individual single-resonance fits of
//! both branch dips weighted by the Hopfield fractions.

use super::minima::{track_minima, TrackOptions};
use super::Sweep;
use crate::constants::{hz_to_angular, TWO_PI};
use crate::error::Result;
use crate::fit::{solve_least_squares, CouplingRegime, FitOptions, FitProblem};
use crate::physics::{hopfield_fractions, magnon_dispersion, CavityParams, DispersionCal};

/// Fitted single-resonance description of one branch dip and the stored
/// energy it implies (arbitrary common units: κ_c/κ_l² per unit drive).
#[derive(Debug, Clone, Copy)]
pub struct BranchEnergy {
    pub center_hz: f64,
    pub kappa_c: f64,
    pub kappa_l: f64,
    pub energy: f64,
    pub magnon_fraction: f64,
}

/// Energy-weighted magnon share at one current.
#[derive(Debug, Clone, Copy)]
pub struct SharePoint {
    pub current_a: f64,
    pub magnon_share: f64,
    pub photon_share: f64,
    pub upper: BranchEnergy,
    pub lower: BranchEnergy,
}

#[derive(Debug, Clone, Copy)]
pub struct RatioOptions {
    /// Coupling regime of the individual branch dips. Polariton branches
    /// carry the magnon's internal loss on top of the cavity's, so they are
    /// effectively undercoupled unless the magnon content is tiny.
    pub regime: CouplingRegime,
    /// Half-width of the per-branch fit window (Hz); `None` picks
    /// min(0.45·separation, 5 MHz), at least 10 frequency steps.
    pub window_half_width_hz: Option<f64>,
    pub track: TrackOptions,
    pub fit: FitOptions,
}

impl Default for RatioOptions {
    fn default() -> Self {
        Self {
            regime: CouplingRegime::Undercoupled,
            window_half_width_hz: None,
            track: TrackOptions::default(),
            fit: FitOptions::default(),
        }
    }
}

/// Fit one branch dip as a single reflection resonance on a local window:
/// amplitude = (b0 + b1·δ)·√((δ² + (c·κ_l)²)/(δ² + κ_l²)) with δ = ω − ω_0,
/// where c is the relative amplitude at the dip. The linear local baseline
/// absorbs the tail of the neighboring branch. Returns
/// (center Hz, κ_c, κ_l) with κ_c from the dip contrast and the configured
/// coupling regime.
fn fit_branch(
    sweep: &Sweep,
    col: usize,
    center_hz: f64,
    half_width_hz: f64,
    opts: &RatioOptions,
) -> Option<(f64, f64, f64)> {
    let freq = sweep.freq_hz();
    let lo = freq.partition_point(|&f| f < center_hz - half_width_hz);
    let hi = freq.partition_point(|&f| f <= center_hz + half_width_hz);
    if hi - lo < 10 {
        return None;
    }
    let omega: Vec<f64> = freq[lo..hi].iter().map(|&f| hz_to_angular(f)).collect();
    let amp: Vec<f64> = (lo..hi).map(|r| sweep.amplitude().at(r, col)).collect();

    let mut sorted = amp.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let base = sorted[sorted.len() / 2].max(1e-12);
    let (min_idx, &min_val) = amp
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    if base - min_val <= 0.0 {
        return None;
    }
    // Half-depth width seeds the linewidth.
    let half_level = 0.5 * (base + min_val);
    let mut left = omega[0];
    for k in (0..min_idx).rev() {
        if amp[k] >= half_level {
            left = omega[k];
            break;
        }
    }
    let mut right = *omega.last().unwrap();
    for k in min_idx..amp.len() {
        if amp[k] >= half_level {
            right = omega[k];
            break;
        }
    }
    let step = hz_to_angular(sweep.freq_step());
    let kappa_l0 = (0.5 * (right - left)).max(step);
    let omega00 = hz_to_angular(center_hz);
    let span = *omega.last().unwrap() - omega[0];

    let init = vec![omega00, kappa_l0, (min_val / base).clamp(1e-3, 0.98), base, 0.0];
    let bounds = vec![
        (omega[0], *omega.last().unwrap()),
        (0.5 * step, 2.0 * span),
        (0.0, 1.0),
        (0.05 * base, 20.0 * base),
        (-10.0 / span, 10.0 / span),
    ];
    let omega_model = omega.clone();
    let model = move |p: &[f64], out: &mut [f64]| {
        for (o, &w) in out.iter_mut().zip(&omega_model) {
            let d = w - p[0];
            let dip = ((d * d + (p[2] * p[1]).powi(2)) / (d * d + p[1] * p[1])).sqrt();
            *o = (p[3] + p[4] * (w - omega00)) * dip;
        }
    };
    let problem = FitProblem {
        model,
        observed: amp,
        weights: None,
        init,
        bounds,
        options: opts.fit,
    };
    let fit = solve_least_squares(&problem).ok()?;
    // A center or linewidth pinned at a bound is a degenerate dip fit.
    if fit.at_bounds.iter().any(|&j| j <= 2) {
        return None;
    }
    let (omega_0, kappa_l, contrast) = (fit.params[0], fit.params[1], fit.params[2]);
    let kappa_c = match opts.regime {
        CouplingRegime::Overcoupled => 0.5 * kappa_l * (1.0 + contrast),
        CouplingRegime::Undercoupled => 0.5 * kappa_l * (1.0 - contrast),
    };
    Some((omega_0 / TWO_PI, kappa_c, kappa_l))
}

/// Per-current magnon share of the stored energy. Output is indexed by
/// current column; untraceable or unfittable columns yield `None` (gaps).
pub fn excitation_ratio_curve(
    sweep: &Sweep,
    cal: &DispersionCal,
    cav: &CavityParams,
    opts: &RatioOptions,
) -> Result<Vec<Option<SharePoint>>> {
    let tracked = track_minima(sweep, &opts.track)?;
    let mut by_col: Vec<Option<super::BranchTrace>> = vec![None; sweep.n_current()];
    for tr in tracked.traces {
        let col = sweep.nearest_column(tr.current_a);
        by_col[col] = Some(tr);
    }

    let step = sweep.freq_step();
    let mut out = Vec::with_capacity(sweep.n_current());
    for (col, slot) in by_col.iter().enumerate() {
        let Some(tr) = slot else {
            out.push(None);
            continue;
        };
        let current = sweep.current_a()[col];
        let fractions = match hopfield_fractions(
            cal.omega_r_bare,
            magnon_dispersion(current, cal),
            cal.g,
        ) {
            Ok(f) => f,
            Err(_) => {
                out.push(None);
                continue;
            }
        };
        let separation = tr.omega_plus_hz - tr.omega_minus_hz;
        let half_window = opts
            .window_half_width_hz
            .unwrap_or_else(|| (0.45 * separation).min(5e6))
            .max(10.0 * step)
            .max(5.0 * cav.kappa_l() / crate::constants::TWO_PI);

        if separation < 4.0 * step {
            // Merged branches: equal energies by construction.
            let Some((center, kc, kl)) = fit_branch(sweep, col, tr.omega_plus_hz, half_window, opts)
            else {
                out.push(None);
                continue;
            };
            let energy = kc / (kl * kl);
            let share = 0.5 * (fractions.upper_magnon + fractions.lower_magnon);
            let branch = BranchEnergy {
                center_hz: center,
                kappa_c: kc,
                kappa_l: kl,
                energy,
                magnon_fraction: share,
            };
            out.push(Some(SharePoint {
                current_a: current,
                magnon_share: share,
                photon_share: 1.0 - share,
                upper: branch,
                lower: branch,
            }));
            continue;
        }

        let upper = fit_branch(sweep, col, tr.omega_plus_hz, half_window, opts);
        let lower = fit_branch(sweep, col, tr.omega_minus_hz, half_window, opts);
        let (Some((uc, ukc, ukl)), Some((lc, lkc, lkl))) = (upper, lower) else {
            out.push(None);
            continue;
        };
        let e_upper = ukc / (ukl * ukl);
        let e_lower = lkc / (lkl * lkl);
        let share = (e_upper * fractions.upper_magnon + e_lower * fractions.lower_magnon)
            / (e_upper + e_lower);
        out.push(Some(SharePoint {
            current_a: current,
            magnon_share: share,
            photon_share: 1.0 - share,
            upper: BranchEnergy {
                center_hz: uc,
                kappa_c: ukc,
                kappa_l: ukl,
                energy: e_upper,
                magnon_fraction: fractions.upper_magnon,
            },
            lower: BranchEnergy {
                center_hz: lc,
                kappa_c: lkc,
                kappa_l: lkl,
                energy: e_lower,
                magnon_fraction: fractions.lower_magnon,
            },
        }));
    }
    Ok(out)
}
