//! The staged analysis pipeline: resonator fit → rough dispersion → baseline
//! normalization → final dispersion → per-cut linewidth fits and ratio
//! curves → TLS surface fit, assembled into a report bundle with full fit
//! provenance.
//!
//! Every stage is deterministic for fixed inputs and configuration; a failing
//! sweep aborts only its own downstream stages and is recorded as partial
//! completion.

use serde::{Deserialize, Serialize};

use super::baseline::{
    exclusion_from_dispersion, normalize_baseline, BaselineWeighting, TailCorrection,
};
use super::extract::{extract_linewidths, sweep_label, ExtractOptions, GuardBand};
use super::minima::{track_minima, TrackOptions};
use super::ratio::{RatioOptions, SharePoint};
use super::Sweep;
use crate::constants::{angular_to_hz, hz_to_angular, TWO_PI};
use crate::error::{Error, Result};
use crate::fit::{
    fit_dispersion, fit_polariton_cut, fit_resonator, fit_tls_surface, CouplingRegime,
    FitOptions, FitResult, PolaritonFixed, PolaritonOptions, ResonatorOptions, TlsSample,
};
use crate::physics::{magnon_dispersion, CavityParams, DispersionCal};

/// Explicit cavity parameters (Hz, HWHM) used instead of a resonator fit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CavityOverride {
    pub f_r_hz: f64,
    pub kappa_c_hwhm_hz: f64,
    pub kappa_i_hwhm_hz: f64,
}

/// Pipeline configuration. All frequencies in Hz, powers in dBm, currents in
/// amperes; every default of the processing stages is overridable here.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Baseline exclusion half-width around each dressed branch, in units of κ_l.
    pub exclusion_half_width_kappa_l: f64,
    pub baseline_weighting: BaselineWeighting,
    /// Dip depth threshold for minima tracking, in robust noise sigmas.
    pub track_depth_sigmas: f64,
    /// Current of the resonator-fit column (nearest column is used).
    pub resonator_current_a: Option<f64>,
    pub resonator_regime: CouplingRegime,
    pub free_g_at_degeneracy: bool,
    pub with_shares: bool,
    pub ratio_window_half_width_hz: Option<f64>,
    pub ratio_regime: CouplingRegime,
    pub kappa_m_init_hz: f64,
    pub kappa_m_floor_hz: f64,
    /// Degree of the per-cut multiplicative baseline polynomial.
    pub cut_baseline_degree: usize,
    /// Refine the coupling strength with a freed-g fit of the normalized
    /// degeneracy cut before extraction. The minima-tracking dispersion fit
    /// inherits a small systematic pull (the amplitude dips sit slightly
    /// closer together than the lossless branch frequencies); the full
    /// reflection model does not.
    pub refine_g_with_degeneracy_cut: bool,
    /// Reference frequency of the TLS tanh argument; defaults to the fitted
    /// cavity frequency.
    pub tls_f_ref_hz: Option<f64>,
    pub guard_band: Option<GuardBand>,
    /// Skip the resonator stage and use these cavity parameters.
    pub cavity_override: Option<CavityOverride>,
    pub max_iter: usize,
    /// Generator seed recorded in the bundle for provenance.
    pub seed: Option<u64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            exclusion_half_width_kappa_l: 5.0,
            baseline_weighting: BaselineWeighting::default(),
            track_depth_sigmas: 3.0,
            resonator_current_a: None,
            resonator_regime: CouplingRegime::Overcoupled,
            free_g_at_degeneracy: false,
            with_shares: true,
            ratio_window_half_width_hz: None,
            ratio_regime: CouplingRegime::Undercoupled,
            kappa_m_init_hz: 1.0e6,
            kappa_m_floor_hz: 1.0,
            cut_baseline_degree: 2,
            refine_g_with_degeneracy_cut: true,
            tls_f_ref_hz: None,
            guard_band: None,
            cavity_override: None,
            max_iter: 200,
            seed: None,
        }
    }
}

impl PipelineConfig {
    fn fit_options(&self) -> FitOptions {
        FitOptions {
            max_iter: self.max_iter,
            ..FitOptions::default()
        }
    }

    fn track_options(&self) -> TrackOptions {
        TrackOptions {
            depth_threshold_sigmas: self.track_depth_sigmas,
            ..TrackOptions::default()
        }
    }

    /// FNV-1a hash of the canonical JSON form, recorded in the bundle.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).unwrap_or_default();
        let mut h: u64 = 0xcbf29ce484222325;
        for b in json.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }
}

/// Input sweeps: the crossing maps to analyze, plus (optionally) a dedicated
/// sweep of the bare cavity resonance for the resonator stage.
#[derive(Debug, Clone)]
pub struct PipelineInput {
    pub crossing: Vec<Sweep>,
    pub resonator: Option<Sweep>,
}

/// Index of the reference sweep: coldest, then quietest.
pub fn reference_index(crossing: &[Sweep]) -> usize {
    (0..crossing.len())
        .min_by(|&a, &b| {
            let ka = (crossing[a].meta.temperature_k, crossing[a].meta.power_dbm);
            let kb = (crossing[b].meta.temperature_k, crossing[b].meta.power_dbm);
            ka.partial_cmp(&kb).unwrap()
        })
        .expect("nonempty crossing set")
}

/// The preliminary stages shared by `run_pipeline` and the standalone
/// normalize command: rough tracking on the raw reference, a preliminary
/// dispersion fit, and a raw degeneracy-cut linewidth estimate that feeds
/// the baseline tail correction. Returns the preliminary calibration, its
/// fit result, and the tail correction (with any soft-failure notes).
pub fn preliminary_normalization(
    crossing: &[Sweep],
    reference_idx: usize,
    cav: &CavityParams,
    config: &PipelineConfig,
) -> Result<(DispersionCal, FitResult, TailCorrection, Vec<String>)> {
    let mut notes = Vec::new();
    let fit_opts = config.fit_options();
    let rough = track_minima(&crossing[reference_idx], &config.track_options())?;
    if rough.traces.len() < 4 {
        return Err(Error::Pipeline(format!(
            "only {} columns traceable on the raw reference sweep",
            rough.traces.len()
        )));
    }
    let points: Vec<_> = rough.traces.iter().map(|t| t.to_branch_point()).collect();
    let (prelim_cal, prelim_fit, _) = fit_dispersion(&points, fit_opts)?;

    let reference = &crossing[reference_idx];
    let col = reference.nearest_column(prelim_cal.degeneracy_current());
    let cut_opts = PolaritonOptions {
        baseline_degree: 2,
        omega_m_init: Some(magnon_dispersion(reference.current_a()[col], &prelim_cal)),
        kappa_m_init: hz_to_angular(config.kappa_m_init_hz),
        kappa_m_floor: hz_to_angular(config.kappa_m_floor_hz),
        options: fit_opts,
        ..Default::default()
    };
    let fixed = PolaritonFixed {
        omega_r: prelim_cal.omega_r_bare,
        kappa_c: cav.kappa_c(),
        kappa_l: cav.kappa_l(),
        g: prelim_cal.g,
    };
    let prelim_kappa_m = match fit_polariton_cut(&reference.cut(col), &fixed, &cut_opts) {
        Ok((mag, _)) => mag.kappa_m(),
        Err(e) => {
            notes.push(format!(
                "preliminary linewidth estimate failed ({e}); using 1.5 kappa_l"
            ));
            1.5 * cav.kappa_l()
        }
    };
    let tail = TailCorrection {
        cal: prelim_cal,
        kappa_c: cav.kappa_c(),
        kappa_l: cav.kappa_l(),
        kappa_m: prelim_kappa_m,
    };
    Ok((prelim_cal, prelim_fit, tail, notes))
}

/// One reported fit parameter with its unit spelled out.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageParam {
    pub name: String,
    pub value: f64,
    pub sigma: Option<f64>,
    pub unit: String,
}

/// A fit result with stage provenance: `fixed_from` lists the ids of the
/// stages whose outputs were held fixed in this fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitRecord {
    pub id: String,
    pub stage: String,
    pub sweep_label: Option<String>,
    pub params: Vec<StageParam>,
    pub residual_norm: f64,
    pub n_iter: usize,
    pub converged: bool,
    pub fixed_from: Vec<String>,
    pub notes: Vec<String>,
}

fn record(
    id: &str,
    stage: &str,
    sweep_label: Option<String>,
    spec: &[(&str, &str, f64)],
    result: &FitResult,
    fixed_from: &[String],
    notes: Vec<String>,
) -> FitRecord {
    let params = spec
        .iter()
        .enumerate()
        .map(|(j, &(name, unit, factor))| StageParam {
            name: name.to_string(),
            value: result.params[j] * factor,
            sigma: result.sigma.as_ref().map(|s| s[j] * factor),
            unit: unit.to_string(),
        })
        .collect();
    FitRecord {
        id: id.to_string(),
        stage: stage.to_string(),
        sweep_label,
        params,
        residual_norm: result.residual_norm,
        n_iter: result.n_iter,
        converged: result.converged,
        fixed_from: fixed_from.to_vec(),
        notes,
    }
}

/// Cavity parameters in reporting units (Hz, HWHM).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CavityReport {
    pub f_r_hz: f64,
    pub kappa_c_hwhm_hz: f64,
    pub kappa_i_hwhm_hz: f64,
    pub kappa_l_hwhm_hz: f64,
    pub q_c: f64,
    pub q_i: f64,
    pub q_l: f64,
}

impl CavityReport {
    fn from_params(cav: &CavityParams) -> Self {
        Self {
            f_r_hz: angular_to_hz(cav.omega_r()),
            kappa_c_hwhm_hz: angular_to_hz(cav.kappa_c()),
            kappa_i_hwhm_hz: angular_to_hz(cav.kappa_i()),
            kappa_l_hwhm_hz: angular_to_hz(cav.kappa_l()),
            q_c: cav.q_c(),
            q_i: cav.q_i(),
            q_l: cav.q_l(),
        }
    }

    pub fn to_params(&self) -> Result<CavityParams> {
        CavityParams::new(
            hz_to_angular(self.f_r_hz),
            hz_to_angular(self.kappa_c_hwhm_hz),
            hz_to_angular(self.kappa_i_hwhm_hz),
        )
    }
}

/// Dispersion calibration in reporting units.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DispersionReport {
    pub f_r_bare_hz: f64,
    pub f_m_zero_hz: f64,
    pub slope_hz_per_a: f64,
    pub g_hz: f64,
    /// Coupling strength from the freed-g degeneracy-cut fit, when enabled.
    pub g_refined_hz: Option<f64>,
    pub crossing_current_a: f64,
    pub crossing_in_span: bool,
}

impl DispersionReport {
    pub fn to_cal(&self) -> Result<DispersionCal> {
        DispersionCal::new(
            hz_to_angular(self.f_r_bare_hz),
            hz_to_angular(self.f_m_zero_hz),
            hz_to_angular(self.slope_hz_per_a),
            hz_to_angular(self.g_hz),
        )
    }
}

/// TLS loss-tangent parameters in reporting units.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TlsReport {
    pub kappa_0_hwhm_hz: f64,
    pub kappa_0_sigma_hz: Option<f64>,
    pub p_c_dbm: f64,
    pub p_c_sigma_db: Option<f64>,
    pub kappa_off_hwhm_hz: f64,
    pub kappa_off_sigma_hz: Option<f64>,
    pub f_ref_hz: f64,
}

/// Tracked branch minima of one sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceReport {
    pub sweep_label: String,
    /// (current A, f_plus Hz, f_minus Hz, amplitude at each minimum).
    pub points: Vec<(f64, f64, f64, f64, f64)>,
}

/// Linewidth table row in reporting units (Hz, HWHM).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinewidthRowReport {
    pub sweep_label: String,
    pub current_a: f64,
    pub temperature_k: f64,
    pub power_dbm: f64,
    pub kappa_m_hwhm_hz: f64,
    pub sigma_hz: f64,
    pub magnon_share: Option<f64>,
    pub flags: Vec<String>,
}

/// Per-branch share detail at one current.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SharePointReport {
    pub current_a: f64,
    pub magnon_share: f64,
    pub photon_share: f64,
    pub upper_center_hz: f64,
    pub upper_energy: f64,
    pub upper_magnon_fraction: f64,
    pub lower_center_hz: f64,
    pub lower_energy: f64,
    pub lower_magnon_fraction: f64,
}

impl SharePointReport {
    fn from_point(p: &SharePoint) -> Self {
        Self {
            current_a: p.current_a,
            magnon_share: p.magnon_share,
            photon_share: p.photon_share,
            upper_center_hz: p.upper.center_hz,
            upper_energy: p.upper.energy,
            upper_magnon_fraction: p.upper.magnon_fraction,
            lower_center_hz: p.lower.center_hz,
            lower_energy: p.lower.energy,
            lower_magnon_fraction: p.lower.magnon_fraction,
        }
    }
}

/// Ratio curve of one sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShareCurveReport {
    pub sweep_label: String,
    pub points: Vec<SharePointReport>,
}

/// The full analysis product: calibrations, tables, curves, and every fit
/// with its provenance chain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportBundle {
    pub toolkit_version: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub partial: bool,
    pub warnings: Vec<String>,
    pub cavity: CavityReport,
    pub dispersion: DispersionReport,
    pub tls: Option<TlsReport>,
    pub traces: Vec<TraceReport>,
    pub linewidths: Vec<LinewidthRowReport>,
    pub shares: Vec<ShareCurveReport>,
    pub fits: Vec<FitRecord>,
}

const HZ: f64 = 1.0 / TWO_PI;

/// Run the full staged analysis over a campaign of sweeps.
pub fn run_pipeline(input: &PipelineInput, config: &PipelineConfig) -> Result<ReportBundle> {
    if input.crossing.is_empty() {
        return Err(Error::Pipeline("no crossing sweeps provided".into()));
    }
    let mut warnings: Vec<String> = Vec::new();
    let mut fits: Vec<FitRecord> = Vec::new();
    let mut partial = false;
    let fit_opts = config.fit_options();

    // Stage 1: cavity parameters, either fitted from the dedicated resonator
    // sweep or taken from the configuration.
    let mut cavity_sources: Vec<String> = Vec::new();
    let cav = if let Some(o) = &config.cavity_override {
        CavityParams::new(
            hz_to_angular(o.f_r_hz),
            hz_to_angular(o.kappa_c_hwhm_hz),
            hz_to_angular(o.kappa_i_hwhm_hz),
        )?
    } else if let Some(res_sweep) = &input.resonator {
        let col = config
            .resonator_current_a
            .map_or(0, |i| res_sweep.nearest_column(i));
        let cut = res_sweep.cut(col);
        let opts = ResonatorOptions {
            regime: config.resonator_regime,
            fit_scale: true,
            use_phase: true,
            options: fit_opts,
        };
        let (cav, result) = fit_resonator(&cut, &opts)?;
        fits.push(record(
            "resonator",
            "resonator",
            Some(sweep_label(res_sweep, 0)),
            &[
                ("f_r", "Hz", HZ),
                ("kappa_c_hwhm", "Hz", HZ),
                ("kappa_i_hwhm", "Hz", HZ),
                ("scale", "1", 1.0),
            ],
            &result,
            &[],
            vec![format!("column at {} A", res_sweep.current_a()[col])],
        ));
        cavity_sources.push("resonator".into());
        cav
    } else {
        return Err(Error::Pipeline(
            "no resonator sweep and no cavity override in the config".into(),
        ));
    };

    // Stage 2: reference sweep = coldest, then quietest.
    let ref_idx = reference_index(&input.crossing);

    // Stage 3: rough tracking on the raw reference, preliminary dispersion,
    // and the preliminary linewidth estimate feeding the tail correction.
    let track_opts = config.track_options();
    let (prelim_cal, prelim_fit, tail, prelim_notes) =
        preliminary_normalization(&input.crossing, ref_idx, &cav, config)?;
    warnings.extend(prelim_notes);
    fits.push(record(
        "dispersion-preliminary",
        "dispersion",
        Some(sweep_label(&input.crossing[ref_idx], ref_idx)),
        &[
            ("f_r_bare", "Hz", HZ),
            ("f_m_zero", "Hz", HZ),
            ("slope", "Hz/A", HZ),
            ("g", "Hz", HZ),
        ],
        &prelim_fit,
        &[],
        vec!["raw-data minima for baseline windows".into()],
    ));

    // Stage 4: baseline normalization of every crossing sweep.
    let mut normalized: Vec<Sweep> = Vec::new();
    let mut normalized_ref: Option<usize> = None;
    for (idx, sweep) in input.crossing.iter().enumerate() {
        let windows = exclusion_from_dispersion(
            &prelim_cal,
            cav.kappa_l(),
            sweep.current_a(),
            config.exclusion_half_width_kappa_l,
        );
        match normalize_baseline(sweep, &windows, config.baseline_weighting, Some(&tail)) {
            Ok(n) => {
                if idx == ref_idx {
                    normalized_ref = Some(normalized.len());
                }
                normalized.push(n);
            }
            Err(e) => {
                warnings.push(format!(
                    "{}: baseline normalization failed, sweep dropped: {e}",
                    sweep_label(sweep, idx)
                ));
                partial = true;
            }
        }
    }
    let Some(ref_norm) = normalized_ref else {
        return Err(Error::Pipeline(
            "reference sweep failed baseline normalization".into(),
        ));
    };

    // Stage 5: final tracking and dispersion fit on the normalized reference.
    let tracked = track_minima(&normalized[ref_norm], &track_opts)?;
    if !tracked.skipped.is_empty() {
        warnings.push(format!(
            "reference sweep: {} columns skipped during tracking",
            tracked.skipped.len()
        ));
    }
    let points: Vec<_> = tracked.traces.iter().map(|t| t.to_branch_point()).collect();
    let (cal, disp_fit, diag) = fit_dispersion(&points, fit_opts)?;
    if !diag.crossing_in_span {
        warnings.push(format!(
            "branches do not cross inside the current span (crossing at {} A); \
             coupling strength poorly conditioned",
            diag.crossing_current_a
        ));
    }
    fits.push(record(
        "dispersion",
        "dispersion",
        Some(sweep_label(&input.crossing[ref_idx], ref_idx)),
        &[
            ("f_r_bare", "Hz", HZ),
            ("f_m_zero", "Hz", HZ),
            ("slope", "Hz/A", HZ),
            ("g", "Hz", HZ),
        ],
        &disp_fit,
        &[],
        Vec::new(),
    ));

    // Optional stage 5b: refine g on the normalized degeneracy cut with the
    // full reflection model, which is free of the dip-pull bias.
    let mut extraction_cal = cal;
    let mut g_refined_hz = None;
    let mut g_provenance: Vec<String> = Vec::new();
    if config.refine_g_with_degeneracy_cut {
        let reference = &normalized[ref_norm];
        let col = reference.nearest_column(cal.degeneracy_current());
        let cut_opts = PolaritonOptions {
            free_g: true,
            baseline_degree: config.cut_baseline_degree,
            omega_m_init: Some(magnon_dispersion(reference.current_a()[col], &cal)),
            kappa_m_init: hz_to_angular(config.kappa_m_init_hz),
            kappa_m_floor: hz_to_angular(config.kappa_m_floor_hz),
            options: fit_opts,
            ..Default::default()
        };
        let fixed = PolaritonFixed {
            omega_r: cal.omega_r_bare,
            kappa_c: cav.kappa_c(),
            kappa_l: cav.kappa_l(),
            g: cal.g,
        };
        match fit_polariton_cut(&reference.cut(col), &fixed, &cut_opts) {
            Ok((mag, result)) => {
                let mut spec: Vec<(&str, &str, f64)> = vec![
                    ("f_m", "Hz", HZ),
                    ("kappa_m_hwhm", "Hz", HZ),
                    ("scale", "1", 1.0),
                    ("offset", "1", 1.0),
                ];
                for name in ["b1", "b2", "b3"].iter().take(config.cut_baseline_degree) {
                    spec.push((name, "1", 1.0));
                }
                spec.push(("g", "Hz", HZ));
                let mut fixed_from = vec!["dispersion".to_string()];
                fixed_from.extend(cavity_sources.iter().cloned());
                fits.push(record(
                    "g-refine",
                    "polariton-cut",
                    Some(sweep_label(&input.crossing[ref_idx], ref_idx)),
                    &spec,
                    &result,
                    &fixed_from,
                    vec!["g freed at the degeneracy cut".into()],
                ));
                g_refined_hz = Some(angular_to_hz(mag.g()));
                extraction_cal.g = mag.g();
                g_provenance.push("g-refine".to_string());
            }
            Err(e) => {
                warnings.push(format!("g refinement failed, dispersion value kept: {e}"));
            }
        }
    }

    // Tracked minima of every normalized sweep go into the bundle.
    let mut traces = Vec::new();
    for (idx, sweep) in normalized.iter().enumerate() {
        let label = sweep_label(sweep, idx);
        let tr = if idx == ref_norm {
            tracked.traces.clone()
        } else {
            match track_minima(sweep, &track_opts) {
                Ok(r) => r.traces,
                Err(e) => {
                    warnings.push(format!("{label}: tracking failed: {e}"));
                    Vec::new()
                }
            }
        };
        traces.push(TraceReport {
            sweep_label: label,
            points: tr
                .iter()
                .map(|t| {
                    (
                        t.current_a,
                        t.omega_plus_hz,
                        t.omega_minus_hz,
                        t.depth_plus,
                        t.depth_minus,
                    )
                })
                .collect(),
        });
    }

    // Stage 6: per-cut linewidths and ratio curves.
    let extract_opts = ExtractOptions {
        free_g_at_degeneracy: config.free_g_at_degeneracy,
        with_shares: config.with_shares,
        guard_band: config.guard_band,
        kappa_m_init: hz_to_angular(config.kappa_m_init_hz),
        kappa_m_floor: hz_to_angular(config.kappa_m_floor_hz),
        baseline_degree: config.cut_baseline_degree,
        ratio: RatioOptions {
            regime: config.ratio_regime,
            window_half_width_hz: config.ratio_window_half_width_hz,
            track: track_opts,
            fit: fit_opts,
        },
        fit: fit_opts,
    };
    let extraction = extract_linewidths(&normalized, &extraction_cal, &cav, &extract_opts)?;
    warnings.extend(extraction.log.iter().cloned());

    let mut cut_provenance = vec!["dispersion".to_string()];
    cut_provenance.extend(cavity_sources.iter().cloned());
    cut_provenance.extend(g_provenance.iter().cloned());
    let poly_names = ["b1", "b2", "b3"];
    for cut in &extraction.cut_fits {
        let mut spec: Vec<(&str, &str, f64)> = vec![
            ("f_m", "Hz", HZ),
            ("kappa_m_hwhm", "Hz", HZ),
            ("scale", "1", 1.0),
            ("offset", "1", 1.0),
        ];
        for name in poly_names.iter().take(config.cut_baseline_degree) {
            spec.push((name, "1", 1.0));
        }
        if cut.g_freed {
            spec.push(("g", "Hz", HZ));
        }
        let mut notes = Vec::new();
        notes.push(if cut.g_freed {
            "g freed".to_string()
        } else {
            "g fixed from dispersion".to_string()
        });
        fits.push(record(
            &format!("cut/{}/{:.6}A", cut.sweep_label, cut.current_a),
            "polariton-cut",
            Some(cut.sweep_label.clone()),
            &spec,
            &cut.result,
            &cut_provenance,
            notes,
        ));
    }

    // Stage 7: TLS surface over the nearest-degeneracy rows.
    let degeneracy_rows = extraction.table.degeneracy_rows(&extraction_cal);
    let tls_ids: Vec<String> = degeneracy_rows
        .iter()
        .map(|r| format!("cut/{}/{:.6}A", r.sweep_label, r.current_a))
        .collect();
    let omega_ref = config
        .tls_f_ref_hz
        .map_or(cav.omega_r(), hz_to_angular);
    let samples: Vec<TlsSample> = degeneracy_rows
        .iter()
        .map(|r| TlsSample {
            temperature_k: r.temperature_k,
            power_dbm: r.power_dbm,
            kappa_m: r.kappa_m,
            sigma: r.sigma,
        })
        .collect();
    let tls = if samples.len() >= 4 {
        match fit_tls_surface(&samples, omega_ref, fit_opts) {
            Ok((params, result)) => {
                fits.push(record(
                    "tls",
                    "tls-surface",
                    None,
                    &[
                        ("kappa_0_hwhm", "Hz", HZ),
                        ("p_c", "dBm", 1.0),
                        ("kappa_off_hwhm", "Hz", HZ),
                    ],
                    &result,
                    &tls_ids,
                    vec![format!("f_ref = {} Hz", angular_to_hz(omega_ref))],
                ));
                Some(TlsReport {
                    kappa_0_hwhm_hz: angular_to_hz(params.kappa_0),
                    kappa_0_sigma_hz: result.sigma.as_ref().map(|s| angular_to_hz(s[0])),
                    p_c_dbm: result.params[1],
                    p_c_sigma_db: result.sigma.as_ref().map(|s| s[1]),
                    kappa_off_hwhm_hz: angular_to_hz(params.kappa_off),
                    kappa_off_sigma_hz: result.sigma.as_ref().map(|s| angular_to_hz(s[2])),
                    f_ref_hz: angular_to_hz(omega_ref),
                })
            }
            Err(e) => {
                warnings.push(format!("TLS surface fit failed: {e}"));
                partial = true;
                None
            }
        }
    } else {
        warnings.push(format!(
            "TLS stage skipped: only {} degeneracy samples",
            samples.len()
        ));
        None
    };

    Ok(ReportBundle {
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config.hash(),
        seed: config.seed,
        partial,
        warnings,
        cavity: CavityReport::from_params(&cav),
        dispersion: DispersionReport {
            f_r_bare_hz: angular_to_hz(cal.omega_r_bare),
            f_m_zero_hz: angular_to_hz(cal.omega_m_zero),
            slope_hz_per_a: angular_to_hz(cal.slope),
            g_hz: angular_to_hz(cal.g),
            g_refined_hz,
            crossing_current_a: diag.crossing_current_a,
            crossing_in_span: diag.crossing_in_span,
        },
        tls,
        traces,
        linewidths: extraction
            .table
            .rows
            .iter()
            .map(|r| LinewidthRowReport {
                sweep_label: r.sweep_label.clone(),
                current_a: r.current_a,
                temperature_k: r.temperature_k,
                power_dbm: r.power_dbm,
                kappa_m_hwhm_hz: angular_to_hz(r.kappa_m),
                sigma_hz: angular_to_hz(r.sigma),
                magnon_share: r.magnon_share,
                flags: r.flags.clone(),
            })
            .collect(),
        shares: extraction
            .share_curves
            .iter()
            .map(|(label, points)| ShareCurveReport {
                sweep_label: label.clone(),
                points: points
                    .iter()
                    .flatten()
                    .map(SharePointReport::from_point)
                    .collect(),
            })
            .collect(),
        fits,
    })
}
