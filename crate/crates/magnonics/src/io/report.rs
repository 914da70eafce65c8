//! Report bundle persistence (JSON) and plot-data emission (TSV tables).

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::constants::hz_to_angular;
use crate::error::{Error, Result};
use crate::physics::{dbm_to_watts, tls_linewidth, TlsParams};
use crate::sweep::{ReportBundle, Sweep};

/// Serialize the bundle as pretty JSON. The field order is fixed by the
/// struct definitions, so identical bundles produce identical bytes.
pub fn save_report(bundle: &ReportBundle, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(bundle)
        .map_err(|e| Error::Pipeline(format!("report serialization failed: {e}")))?;
    fs::write(path, json + "\n")?;
    Ok(())
}

pub fn load_report(path: &Path) -> Result<ReportBundle> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Pipeline(format!("report parse failed: {e}")))
}

fn open(path: &Path) -> Result<fs::File> {
    Ok(fs::File::create(path)?)
}

/// Emit plain tabular plot data from a bundle into `dir`:
///
/// * `traces_<label>.tsv` — (I, f_plus, f_minus, depths): the branch minima.
/// * `linewidths.tsv` — (label, I, T, P, κ_m/2π, σ, magnon share, flags).
/// * `shares_<label>.tsv` — the excitation-ratio curves.
/// * `tls_curves.tsv` — per temperature: (P, κ_m measured, σ, κ_m model).
/// * `cut_<label>_<current>.tsv` — (f, |S11| measured, fit) when the source
///   sweeps are provided to regenerate the fitted curves.
pub fn emit_plot_data(
    bundle: &ReportBundle,
    sweeps: Option<&[Sweep]>,
    dir: &Path,
) -> Result<Vec<std::path::PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    for trace in &bundle.traces {
        let path = dir.join(format!("traces_{}.tsv", trace.sweep_label));
        let mut f = open(&path)?;
        writeln!(f, "# current_a\tf_plus_hz\tf_minus_hz\tdepth_plus\tdepth_minus")?;
        for (i, fp, fm, dp, dm) in &trace.points {
            writeln!(f, "{i}\t{fp}\t{fm}\t{dp}\t{dm}")?;
        }
        written.push(path);
    }

    {
        let path = dir.join("linewidths.tsv");
        let mut f = open(&path)?;
        writeln!(
            f,
            "# sweep\tcurrent_a\ttemperature_k\tpower_dbm\tkappa_m_hwhm_hz\tsigma_hz\tmagnon_share\tflags"
        )?;
        for r in &bundle.linewidths {
            writeln!(
                f,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.sweep_label,
                r.current_a,
                r.temperature_k,
                r.power_dbm,
                r.kappa_m_hwhm_hz,
                r.sigma_hz,
                r.magnon_share.map_or("-".to_string(), |s| s.to_string()),
                if r.flags.is_empty() {
                    "-".to_string()
                } else {
                    r.flags.join(",")
                }
            )?;
        }
        written.push(path);
    }

    for curve in &bundle.shares {
        let path = dir.join(format!("shares_{}.tsv", curve.sweep_label));
        let mut f = open(&path)?;
        writeln!(f, "# current_a\tmagnon_share\tphoton_share\tupper_fraction\tlower_fraction")?;
        for p in &curve.points {
            writeln!(
                f,
                "{}\t{}\t{}\t{}\t{}",
                p.current_a,
                p.magnon_share,
                p.photon_share,
                p.upper_magnon_fraction,
                p.lower_magnon_fraction
            )?;
        }
        written.push(path);
    }

    if let Some(tls) = &bundle.tls {
        let params = TlsParams::new(
            hz_to_angular(tls.kappa_0_hwhm_hz),
            dbm_to_watts(tls.p_c_dbm),
            hz_to_angular(tls.kappa_off_hwhm_hz),
            hz_to_angular(tls.f_ref_hz),
        )?;
        // Measured degeneracy-point linewidths against the fitted model.
        let path = dir.join("tls_curves.tsv");
        let mut f = open(&path)?;
        writeln!(
            f,
            "# temperature_k\tpower_dbm\tkappa_m_hwhm_hz\tsigma_hz\tmodel_hz"
        )?;
        let mut rows: Vec<_> = bundle
            .linewidths
            .iter()
            .filter(|r| {
                (r.current_a - bundle.dispersion.crossing_current_a).abs()
                    <= nearest_cut_tolerance(bundle)
            })
            .collect();
        rows.sort_by(|a, b| {
            (a.temperature_k, a.power_dbm)
                .partial_cmp(&(b.temperature_k, b.power_dbm))
                .unwrap()
        });
        for r in rows {
            let model = tls_linewidth(r.temperature_k, dbm_to_watts(r.power_dbm), &params)?
                / crate::constants::TWO_PI;
            writeln!(
                f,
                "{}\t{}\t{}\t{}\t{}",
                r.temperature_k, r.power_dbm, r.kappa_m_hwhm_hz, r.sigma_hz, model
            )?;
        }
        written.push(path);
    }

    if let Some(sweeps) = sweeps {
        written.extend(emit_cut_tables(bundle, sweeps, dir)?);
    }
    Ok(written)
}

/// Current distance below which a row counts as the degeneracy cut: half the
/// median current step of the reported rows.
fn nearest_cut_tolerance(bundle: &ReportBundle) -> f64 {
    let mut currents: Vec<f64> = bundle.linewidths.iter().map(|r| r.current_a).collect();
    currents.sort_by(|a, b| a.partial_cmp(b).unwrap());
    currents.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut steps: Vec<f64> = currents.windows(2).map(|w| w[1] - w[0]).collect();
    if steps.is_empty() {
        return f64::MAX;
    }
    steps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    0.5 * steps[steps.len() / 2]
}

/// Per-sweep degeneracy-cut spectrum with the fitted model regenerated from
/// the recorded cut parameters.
fn emit_cut_tables(
    bundle: &ReportBundle,
    sweeps: &[Sweep],
    dir: &Path,
) -> Result<Vec<std::path::PathBuf>> {
    use crate::physics::s11_model;
    let mut written = Vec::new();
    let cav = bundle.cavity.to_params()?;
    let cal = bundle.dispersion.to_cal()?;
    for sweep in sweeps {
        let Some(label) = sweep.meta.tags.get("label") else {
            continue;
        };
        let col = sweep.nearest_column(bundle.dispersion.crossing_current_a);
        let current = sweep.current_a()[col];
        let Some(fit) = bundle.fits.iter().find(|f| {
            f.stage == "polariton-cut"
                && f.sweep_label.as_deref() == Some(label)
                && f.id.ends_with(&format!("{current:.6}A"))
        }) else {
            continue;
        };
        let get = |name: &str| fit.params.iter().find(|p| p.name == name).map(|p| p.value);
        let (Some(f_m), Some(kappa_m), Some(scale)) =
            (get("f_m"), get("kappa_m_hwhm"), get("scale"))
        else {
            continue;
        };
        let offset = get("offset").unwrap_or(0.0);
        let poly: Vec<f64> = ["b1", "b2", "b3"]
            .iter()
            .map_while(|n| get(n))
            .collect();
        let g = get("g").map_or(cal.g, hz_to_angular);
        let cut = sweep.cut(col);
        let f_mid = 0.5 * (cut.freq_hz[0] + cut.freq_hz.last().unwrap());
        let half_span = 0.5 * (cut.freq_hz.last().unwrap() - cut.freq_hz[0]);
        let path = dir.join(format!("cut_{label}_{current:.6}A.tsv"));
        let mut f = open(&path)?;
        writeln!(f, "# freq_hz\tamplitude\tfit")?;
        for (fr, a) in cut.freq_hz.iter().zip(&cut.amplitude) {
            let x = (fr - f_mid) / half_span;
            let mut baseline = 1.0;
            let mut xn = 1.0;
            for b in &poly {
                xn *= x;
                baseline += b * xn;
            }
            let model = scale
                * baseline
                * s11_model(
                    hz_to_angular(*fr),
                    cal.omega_r_bare,
                    cav.kappa_c(),
                    cav.kappa_l(),
                    hz_to_angular(f_m),
                    hz_to_angular(kappa_m),
                    g,
                )
                .norm()
                + offset;
            writeln!(f, "{fr}\t{a}\t{model}")?;
        }
        written.push(path);
    }
    Ok(written)
}

/// Human-readable one-page summary of a bundle.
pub fn write_summary(bundle: &ReportBundle, path: &Path) -> Result<()> {
    let mut f = open(path)?;
    writeln!(f, "magnonics report (toolkit {})", bundle.toolkit_version)?;
    writeln!(f, "config hash {}", bundle.config_hash)?;
    if let Some(seed) = bundle.seed {
        writeln!(f, "seed {seed}")?;
    }
    writeln!(f, "partial: {}", bundle.partial)?;
    let c = &bundle.cavity;
    writeln!(
        f,
        "cavity: f_r = {} Hz, kappa_c = {} Hz, kappa_i = {} Hz (HWHM), Q_l = {:.0}",
        c.f_r_hz, c.kappa_c_hwhm_hz, c.kappa_i_hwhm_hz, c.q_l
    )?;
    let d = &bundle.dispersion;
    writeln!(
        f,
        "dispersion: f_r_bare = {} Hz, f_m(0) = {} Hz, slope = {} Hz/A, g = {} Hz, crossing at {} A",
        d.f_r_bare_hz, d.f_m_zero_hz, d.slope_hz_per_a, d.g_hz, d.crossing_current_a
    )?;
    match &bundle.tls {
        Some(t) => writeln!(
            f,
            "tls: kappa_0 = {} Hz (HWHM), P_c = {} dBm, kappa_off = {} Hz (HWHM)",
            t.kappa_0_hwhm_hz, t.p_c_dbm, t.kappa_off_hwhm_hz
        )?,
        None => writeln!(f, "tls: not fitted")?,
    }
    writeln!(f, "linewidth rows: {}", bundle.linewidths.len())?;
    writeln!(f, "fits recorded: {}", bundle.fits.len())?;
    for w in &bundle.warnings {
        writeln!(f, "warning: {w}")?;
    }
    Ok(())
}
