//! Baseline normalization: divide each frequency row by its current-independent
//! background, estimated as a weighted average along the current axis with the
//! dressed-resonance regions masked out.

use serde::{Deserialize, Serialize};

use super::{Grid2, Sweep};
use crate::constants::hz_to_angular;
use crate::error::{Error, Result};
use crate::physics::{branch_frequencies, magnon_dispersion, s11_model, DispersionCal};

/// Model-predicted resonance tails for baseline estimation. Outside the
/// exclusion windows the reflection dips still suppress the amplitude by up
/// to a few percent; dividing each entry by the predicted |S11| before
/// averaging removes that bias to second order in the prediction error.
#[derive(Debug, Clone, Copy)]
pub struct TailCorrection {
    pub cal: DispersionCal,
    pub kappa_c: f64,
    pub kappa_l: f64,
    /// Rough magnon linewidth (rad/s); only the small tail values depend on
    /// it, so a preliminary estimate is plenty.
    pub kappa_m: f64,
}

impl TailCorrection {
    fn factor(&self, f_hz: f64, current_a: f64) -> f64 {
        let omega_m = magnon_dispersion(current_a, &self.cal);
        s11_model(
            hz_to_angular(f_hz),
            self.cal.omega_r_bare,
            self.kappa_c,
            self.kappa_l,
            omega_m,
            self.kappa_m,
            self.cal.g,
        )
        .norm()
    }
}

/// Frequency intervals to exclude per current column (Hz).
#[derive(Debug, Clone)]
pub struct ExclusionWindows {
    columns: Vec<Vec<(f64, f64)>>,
}

impl ExclusionWindows {
    pub fn new(columns: Vec<Vec<(f64, f64)>>) -> Self {
        Self { columns }
    }

    /// No exclusions for `n_cols` columns.
    pub fn none(n_cols: usize) -> Self {
        Self {
            columns: vec![Vec::new(); n_cols],
        }
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn is_excluded(&self, col: usize, f_hz: f64) -> bool {
        self.columns[col]
            .iter()
            .any(|&(lo, hi)| f_hz >= lo && f_hz <= hi)
    }
}

/// Windows of ± `half_width_factor`·κ_l around both dressed branches predicted
/// by the dispersion calibration, per current column.
pub fn exclusion_from_dispersion(
    cal: &DispersionCal,
    kappa_l: f64,
    current_a: &[f64],
    half_width_factor: f64,
) -> ExclusionWindows {
    let half_hz = half_width_factor * kappa_l / crate::constants::TWO_PI;
    let columns = current_a
        .iter()
        .map(|&i| {
            let omega_m = magnon_dispersion(i, cal);
            match branch_frequencies(cal.omega_r_bare, omega_m, cal.g) {
                Ok((plus, minus)) => {
                    let fp = plus / crate::constants::TWO_PI;
                    let fm = minus / crate::constants::TWO_PI;
                    vec![(fp - half_hz, fp + half_hz), (fm - half_hz, fm + half_hz)]
                }
                Err(_) => Vec::new(),
            }
        })
        .collect();
    ExclusionWindows::new(columns)
}

/// How the masked row average weights its entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineWeighting {
    /// Plain mean of the unmasked entries.
    Uniform,
    /// Robust inverse-variance weights 1/(σ² + (x − median)²) with σ from the
    /// row MAD; falls back to uniform when the row has no scatter.
    #[default]
    InverseVariance,
}

fn row_baseline(values: &[f64], weighting: BaselineWeighting) -> f64 {
    match weighting {
        BaselineWeighting::Uniform => values.iter().sum::<f64>() / values.len() as f64,
        BaselineWeighting::InverseVariance => {
            let mut sorted = values.to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = sorted[sorted.len() / 2];
            let mut dev: Vec<f64> = values.iter().map(|v| (v - median).abs()).collect();
            dev.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let sigma = 1.4826 * dev[dev.len() / 2];
            if sigma <= 1e-12 * median.abs().max(1e-300) {
                return values.iter().sum::<f64>() / values.len() as f64;
            }
            let var = sigma * sigma;
            let mut num = 0.0;
            let mut den = 0.0;
            for &v in values {
                let w = 1.0 / (var + (v - median) * (v - median));
                num += w * v;
                den += w;
            }
            num / den
        }
    }
}

/// Divide every frequency row by its masked weighted average along the
/// current axis. Rows with too few usable columns get a baseline interpolated
/// from neighboring rows and are flagged in the output metadata. When a
/// [`TailCorrection`] is supplied, the averaged entries are first divided by
/// the predicted off-resonance reflection so the residual dip tails outside
/// the exclusion windows do not pull the baseline low.
pub fn normalize_baseline(
    sweep: &Sweep,
    exclusion: &ExclusionWindows,
    weighting: BaselineWeighting,
    tail: Option<&TailCorrection>,
) -> Result<Sweep> {
    if exclusion.n_cols() != sweep.n_current() {
        return Err(Error::Sweep(format!(
            "exclusion windows cover {} columns, sweep has {}",
            exclusion.n_cols(),
            sweep.n_current()
        )));
    }
    let n_f = sweep.n_freq();
    let n_i = sweep.n_current();
    let min_usable = 3.max(n_i / 10);

    let mut baselines: Vec<Option<f64>> = Vec::with_capacity(n_f);
    for (row, &f) in sweep.freq_hz().iter().enumerate() {
        let usable: Vec<f64> = (0..n_i)
            .filter(|&col| !exclusion.is_excluded(col, f))
            .map(|col| {
                let a = sweep.amplitude().at(row, col);
                match tail {
                    Some(t) => a / t.factor(f, sweep.current_a()[col]).max(0.05),
                    None => a,
                }
            })
            .collect();
        if usable.len() >= min_usable {
            let b = row_baseline(&usable, weighting);
            baselines.push((b > 0.0).then_some(b));
        } else {
            baselines.push(None);
        }
    }

    // Interpolate the flagged rows from their nearest estimated neighbors.
    let known: Vec<usize> = (0..n_f).filter(|&r| baselines[r].is_some()).collect();
    if known.is_empty() {
        return Err(Error::Sweep(
            "no frequency row has enough unmasked columns to estimate a baseline".into(),
        ));
    }
    let mut interpolated_rows = Vec::new();
    for row in 0..n_f {
        if baselines[row].is_some() {
            continue;
        }
        interpolated_rows.push(row);
        let next = known.partition_point(|&r| r < row);
        let baseline = if next == 0 {
            baselines[known[0]].unwrap()
        } else if next == known.len() {
            baselines[known[known.len() - 1]].unwrap()
        } else {
            let (r0, r1) = (known[next - 1], known[next]);
            let (f0, f1) = (sweep.freq_hz()[r0], sweep.freq_hz()[r1]);
            let (b0, b1) = (baselines[r0].unwrap(), baselines[r1].unwrap());
            let t = (sweep.freq_hz()[row] - f0) / (f1 - f0);
            b0 + t * (b1 - b0)
        };
        baselines[row] = Some(baseline);
    }

    let mut amplitude = Grid2::zeros(n_f, n_i);
    for row in 0..n_f {
        let b = baselines[row].unwrap();
        for col in 0..n_i {
            *amplitude.at_mut(row, col) = sweep.amplitude().at(row, col) / b;
        }
    }

    let mut meta = sweep.meta.clone();
    meta.tags.insert("normalized".into(), "true".into());
    if !interpolated_rows.is_empty() {
        meta.notes.push(format!(
            "baseline interpolated for {} rows ({}..{})",
            interpolated_rows.len(),
            interpolated_rows.first().unwrap(),
            interpolated_rows.last().unwrap()
        ));
    }
    sweep.with_amplitude(amplitude, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::hz_to_angular;
    use crate::physics::CavityParams;
    use crate::sweep::SweepMeta;
    use crate::synth::{generate_sweep, Background, KappaMLaw, TruthSpec};

    fn truth(noise: f64, background: Background) -> TruthSpec {
        let omega_r = hz_to_angular(5.23902e9);
        let omega_m0 = hz_to_angular(4.9817e9);
        TruthSpec {
            cav: CavityParams::from_quality_factors(omega_r, 7125.0, 5439.0).unwrap(),
            cal: DispersionCal::new(
                omega_r,
                omega_m0,
                (omega_r - omega_m0) / 2.09,
                hz_to_angular(10.39e6),
            )
            .unwrap(),
            kappa_m_law: KappaMLaw::Constant(hz_to_angular(1.82e6)),
            background,
            noise_sigma: noise,
            seed: 3,
            emit_phase: false,
        }
    }

    fn axes() -> (Vec<f64>, Vec<f64>) {
        let f: Vec<f64> = (0..501)
            .map(|k| 5.23902e9 - 30e6 + 60e6 * k as f64 / 500.0)
            .collect();
        let i: Vec<f64> = (0..41).map(|k| 2.09 - 0.17 + 0.0085 * k as f64).collect();
        (f, i)
    }

    #[test]
    fn flat_background_without_resonances_normalizes_to_unity() {
        // Constant map: every entry 0.5, no structure at all.
        let f: Vec<f64> = (0..50).map(|k| 5.0e9 + 1e5 * k as f64).collect();
        let i: Vec<f64> = (0..20).map(|k| 0.1 * k as f64).collect();
        let mut amp = Grid2::zeros(50, 20);
        for r in 0..50 {
            for c in 0..20 {
                *amp.at_mut(r, c) = 0.5;
            }
        }
        let sweep = Sweep::new(f, i, amp, None, SweepMeta::new(0.055, -140.0, -75.0)).unwrap();
        for weighting in [BaselineWeighting::Uniform, BaselineWeighting::InverseVariance] {
            let out = normalize_baseline(&sweep, &ExclusionWindows::none(20), weighting, None).unwrap();
            assert!(out.amplitude().data().iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn ripple_background_is_removed_and_dips_preserved() {
        let bg = Background {
            poly: vec![0.9, 0.08, -0.04],
            ripple: Some((0.03, 18e6, 1.1)),
        };
        let t = truth(0.0, bg);
        let (f, i) = axes();
        let sweep = generate_sweep(&t, &f, &i, SweepMeta::new(0.055, -140.0, -75.0)).unwrap();
        let windows = exclusion_from_dispersion(&t.cal, t.cav.kappa_l(), &i, 5.0);
        let out =
            normalize_baseline(&sweep, &windows, BaselineWeighting::InverseVariance, None).unwrap();

        // Pure physics for comparison.
        let mut flat = t.clone();
        flat.background = Background::flat(1.0);
        let pure = generate_sweep(&flat, &f, &i, SweepMeta::new(0.055, -140.0, -75.0)).unwrap();

        let mut max_err: f64 = 0.0;
        for row in 0..out.n_freq() {
            for col in 0..out.n_current() {
                let err = (out.amplitude().at(row, col) - pure.amplitude().at(row, col)).abs();
                max_err = max_err.max(err);
            }
        }
        // Residual baseline error stays at the percent level and the dips
        // survive with their relative depth.
        assert!(max_err < 0.03, "worst normalization error {max_err}");
        let col = out.nearest_column(2.09);
        let min_out = out.cut(col).amplitude.iter().cloned().fold(f64::MAX, f64::min);
        let min_pure = pure.cut(col).amplitude.iter().cloned().fold(f64::MAX, f64::min);
        assert!((min_out - min_pure).abs() < 0.02);
    }

    #[test]
    fn normalization_is_idempotent_within_noise() {
        let t = truth(0.005, Background::flat(0.8));
        let (f, i) = axes();
        let sweep = generate_sweep(&t, &f, &i, SweepMeta::new(0.055, -140.0, -75.0)).unwrap();
        let windows = exclusion_from_dispersion(&t.cal, t.cav.kappa_l(), &i, 5.0);
        let once = normalize_baseline(&sweep, &windows, BaselineWeighting::InverseVariance, None).unwrap();
        let twice = normalize_baseline(&once, &windows, BaselineWeighting::InverseVariance, None).unwrap();
        let mut max_rel: f64 = 0.0;
        for (a, b) in twice.amplitude().data().iter().zip(once.amplitude().data()) {
            max_rel = max_rel.max((a - b).abs() / b.abs().max(1e-9));
        }
        assert!(max_rel < 0.005, "renormalization changed values by {max_rel}");
    }

    #[test]
    fn commutes_with_amplitude_rescaling() {
        let t = truth(0.01, Background::flat(1.0));
        let (f, i) = axes();
        let sweep = generate_sweep(&t, &f, &i, SweepMeta::new(0.055, -140.0, -75.0)).unwrap();
        let windows = exclusion_from_dispersion(&t.cal, t.cav.kappa_l(), &i, 5.0);
        let direct =
            normalize_baseline(&sweep, &windows, BaselineWeighting::InverseVariance, None).unwrap();
        // Scale every amplitude by c and renormalize: identical output.
        let c = 3.7;
        let mut scaled_amp = Grid2::zeros(sweep.n_freq(), sweep.n_current());
        for r in 0..sweep.n_freq() {
            for col in 0..sweep.n_current() {
                *scaled_amp.at_mut(r, col) = c * sweep.amplitude().at(r, col);
            }
        }
        let scaled = sweep.with_amplitude(scaled_amp, sweep.meta.clone()).unwrap();
        let from_scaled =
            normalize_baseline(&scaled, &windows, BaselineWeighting::InverseVariance, None).unwrap();
        for (a, b) in from_scaled
            .amplitude()
            .data()
            .iter()
            .zip(direct.amplitude().data())
        {
            assert!(
                (a - b).abs() <= 1e-12 * b.abs().max(1.0),
                "rescaling broke normalization: {a} vs {b}"
            );
        }
    }

    #[test]
    fn fully_excluded_rows_fall_back_to_interpolation() {
        let t = truth(0.0, Background::flat(1.0));
        let (f, i) = axes();
        let sweep = generate_sweep(&t, &f, &i, SweepMeta::new(0.055, -140.0, -75.0)).unwrap();
        // Exclude a band of frequencies at every current.
        let f_lo = 5.23902e9 - 2e6;
        let f_hi = 5.23902e9 + 2e6;
        let windows = ExclusionWindows::new(vec![vec![(f_lo, f_hi)]; i.len()]);
        let out = normalize_baseline(&sweep, &windows, BaselineWeighting::Uniform, None).unwrap();
        assert!(
            out.meta.notes.iter().any(|n| n.contains("interpolated")),
            "interpolation fallback not flagged: {:?}",
            out.meta.notes
        );
    }
}
