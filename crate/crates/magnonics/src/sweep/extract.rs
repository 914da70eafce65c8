//! Per-cut linewidth extraction across a set of sweeps: every current column
//! of every normalized sweep gets a polariton cut fit with the cavity and
//! dispersion parameters held fixed; rows carry the magnon share from the
//! excitation-ratio curve.

use serde::{Deserialize, Serialize};

use super::ratio::{excitation_ratio_curve, RatioOptions, SharePoint};
use super::Sweep;
use crate::error::Result;
use crate::fit::{
    fit_polariton_cut, FitOptions, FitResult, PolaritonFixed, PolaritonOptions,
};
use crate::physics::{magnon_dispersion, CavityParams, DispersionCal};

/// Current interval flagged (not dropped) in the output, e.g. around a known
/// weakly coupled spurious mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuardBand {
    pub center_current_a: f64,
    pub half_width_a: f64,
}

#[derive(Debug, Clone)]
pub struct ExtractOptions {
    /// Free the coupling strength at the nearest-degeneracy cut.
    pub free_g_at_degeneracy: bool,
    /// Compute magnon shares via the ratio curve.
    pub with_shares: bool,
    pub guard_band: Option<GuardBand>,
    pub kappa_m_init: f64,
    pub kappa_m_floor: f64,
    /// Degree of the per-cut multiplicative baseline polynomial.
    pub baseline_degree: usize,
    pub ratio: RatioOptions,
    pub fit: FitOptions,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            free_g_at_degeneracy: false,
            with_shares: true,
            guard_band: None,
            kappa_m_init: crate::constants::hz_to_angular(1.0e6),
            kappa_m_floor: 1.0,
            baseline_degree: 2,
            ratio: RatioOptions::default(),
            fit: FitOptions::default(),
        }
    }
}

/// One extracted linewidth: where it came from, the fitted κ_m with its 1σ,
/// and the magnon share of the stored energy at that cut.
#[derive(Debug, Clone)]
pub struct LinewidthRow {
    pub sweep_label: String,
    pub current_a: f64,
    pub temperature_k: f64,
    pub power_dbm: f64,
    /// Internal magnon half-linewidth (rad/s, HWHM).
    pub kappa_m: f64,
    /// 1σ uncertainty (rad/s); zero when the covariance was unavailable.
    pub sigma: f64,
    pub magnon_share: Option<f64>,
    pub flags: Vec<String>,
}

/// Extraction product over a sweep campaign.
#[derive(Debug, Clone, Default)]
pub struct LinewidthTable {
    pub rows: Vec<LinewidthRow>,
}

impl LinewidthTable {
    /// Rows at the nearest-degeneracy cut of each sweep.
    pub fn degeneracy_rows(&self, cal: &DispersionCal) -> Vec<&LinewidthRow> {
        let crossing = cal.degeneracy_current();
        let mut by_label: Vec<(&str, &LinewidthRow)> = Vec::new();
        for row in &self.rows {
            match by_label.iter_mut().find(|(l, _)| *l == row.sweep_label) {
                Some((_, best)) => {
                    if (row.current_a - crossing).abs() < (best.current_a - crossing).abs() {
                        *best = row;
                    }
                }
                None => by_label.push((&row.sweep_label, row)),
            }
        }
        by_label.into_iter().map(|(_, r)| r).collect()
    }
}

/// Per-cut fit bookkeeping for the report bundle.
#[derive(Debug, Clone)]
pub struct CutFitRecord {
    pub sweep_label: String,
    pub current_a: f64,
    pub g_freed: bool,
    pub result: FitResult,
}

/// Everything extraction produces: the table, per-cut fit results, the share
/// curves per sweep, and the omission log.
#[derive(Debug, Clone, Default)]
pub struct ExtractOutput {
    pub table: LinewidthTable,
    pub cut_fits: Vec<CutFitRecord>,
    pub share_curves: Vec<(String, Vec<Option<SharePoint>>)>,
    pub log: Vec<String>,
}

pub(crate) fn sweep_label(sweep: &Sweep, index: usize) -> String {
    sweep
        .meta
        .tags
        .get("label")
        .cloned()
        .unwrap_or_else(|| {
            format!(
                "sweep{index:02}_T{:.4}K_P{:+.1}dBm",
                sweep.meta.temperature_k, sweep.meta.power_dbm
            )
        })
}

/// Run the per-cut fits over every column of every sweep. Failed cuts are
/// omitted from the table, with the reason recorded in the output log.
pub fn extract_linewidths(
    sweeps: &[Sweep],
    cal: &DispersionCal,
    cav: &CavityParams,
    opts: &ExtractOptions,
) -> Result<ExtractOutput> {
    let mut out = ExtractOutput::default();
    let crossing = cal.degeneracy_current();

    for (s_idx, sweep) in sweeps.iter().enumerate() {
        let label = sweep_label(sweep, s_idx);
        let shares: Vec<Option<f64>> = if opts.with_shares {
            match excitation_ratio_curve(sweep, cal, cav, &opts.ratio) {
                Ok(points) => {
                    let values = points.iter().map(|p| p.map(|sp| sp.magnon_share)).collect();
                    out.share_curves.push((label.clone(), points));
                    values
                }
                Err(e) => {
                    out.log.push(format!("{label}: ratio curve failed: {e}"));
                    vec![None; sweep.n_current()]
                }
            }
        } else {
            vec![None; sweep.n_current()]
        };

        let degeneracy_col = sweep.nearest_column(crossing);
        for col in 0..sweep.n_current() {
            let current = sweep.current_a()[col];
            let free_g = opts.free_g_at_degeneracy && col == degeneracy_col;
            let cut = sweep.cut(col);
            let fixed = PolaritonFixed {
                omega_r: cal.omega_r_bare,
                kappa_c: cav.kappa_c(),
                kappa_l: cav.kappa_l(),
                g: cal.g,
            };
            let cut_opts = PolaritonOptions {
                free_g,
                free_offset: true,
                baseline_degree: opts.baseline_degree,
                omega_m_init: Some(magnon_dispersion(current, cal)),
                kappa_m_init: opts.kappa_m_init,
                kappa_m_floor: opts.kappa_m_floor,
                options: opts.fit,
                ..Default::default()
            };
            match fit_polariton_cut(&cut, &fixed, &cut_opts) {
                Ok((mag, result)) => {
                    let sigma = result.sigma.as_ref().map_or(0.0, |s| s[1]);
                    let mut flags = Vec::new();
                    if free_g {
                        flags.push("g-freed".to_string());
                    }
                    if result.sigma.is_none() {
                        flags.push("sigma-unavailable".to_string());
                    }
                    if !result.converged {
                        flags.push("not-converged".to_string());
                    }
                    if let Some(gb) = &opts.guard_band {
                        if (current - gb.center_current_a).abs() <= gb.half_width_a {
                            flags.push("guard-band".to_string());
                        }
                    }
                    out.table.rows.push(LinewidthRow {
                        sweep_label: label.clone(),
                        current_a: current,
                        temperature_k: sweep.meta.temperature_k,
                        power_dbm: sweep.meta.power_dbm,
                        kappa_m: mag.kappa_m(),
                        sigma,
                        magnon_share: shares[col],
                        flags,
                    });
                    out.cut_fits.push(CutFitRecord {
                        sweep_label: label.clone(),
                        current_a: current,
                        g_freed: free_g,
                        result,
                    });
                }
                Err(e) => out.log.push(format!("{label} cut at {current} A omitted: {e}")),
            }
        }
    }
    Ok(out)
}
