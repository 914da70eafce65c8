//! Branch-minima tracking: per current column, the two deepest resonance dips
//! with sub-bin parabolic interpolation, associated across columns by
//! frequency continuity.

use super::Sweep;
use crate::error::{Error, Result};
use crate::fit::{noise_sigma, parabola_vertex, BranchPoint};

/// One tracked column: both branch frequencies (Hz) and the linear amplitude
/// at each minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchTrace {
    pub current_a: f64,
    pub omega_plus_hz: f64,
    pub omega_minus_hz: f64,
    pub depth_plus: f64,
    pub depth_minus: f64,
}

impl BranchTrace {
    pub fn to_branch_point(self) -> BranchPoint {
        BranchPoint {
            current_a: self.current_a,
            omega_plus_hz: self.omega_plus_hz,
            omega_minus_hz: self.omega_minus_hz,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrackOptions {
    /// Dip depth threshold in units of the robust noise σ.
    pub depth_threshold_sigmas: f64,
    /// Absolute depth floor relative to the column baseline.
    pub rel_depth_floor: f64,
    /// Candidate minima kept per column before association.
    pub max_candidates: usize,
    /// Boxcar half-width (bins) applied to each column before the minima
    /// search; averages the noise down without moving symmetric dip centers.
    pub smooth_half_width_bins: usize,
    /// Candidates closer than this (Hz) collapse onto the strongest one: a
    /// noisy dip bottom produces a cluster of local minima that would
    /// otherwise crowd the weaker branch out of the candidate list.
    pub min_separation_hz: f64,
    /// Integration half-width (Hz) of the area score used to rank
    /// candidates; roughly half a dip linewidth.
    pub area_half_width_hz: f64,
    /// Half-width (Hz) of the parabolic sub-bin refinement window; on
    /// coarse grids this degenerates to the classic 3-point parabola.
    pub quad_half_width_hz: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self {
            depth_threshold_sigmas: 3.0,
            rel_depth_floor: 1e-6,
            max_candidates: 5,
            smooth_half_width_bins: 2,
            min_separation_hz: 1.5e6,
            area_half_width_hz: 0.75e6,
            quad_half_width_hz: 0.6e6,
        }
    }
}

/// Moving average with a truncated window at the edges.
fn boxcar(values: &[f64], half_width: usize) -> Vec<f64> {
    if half_width == 0 {
        return values.to_vec();
    }
    let n = values.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half_width);
            let hi = (i + half_width + 1).min(n);
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Tracking outcome: traces for the columns where both branches were found,
/// plus the skipped columns with the reason.
#[derive(Debug, Clone)]
pub struct TrackResult {
    pub traces: Vec<BranchTrace>,
    pub skipped: Vec<(usize, String)>,
}

#[derive(Debug, Clone, Copy)]
struct Dip {
    freq_hz: f64,
    amplitude: f64,
    /// Integrated depth over ±2 bins; separates real resonances (many bins
    /// wide) from single-bin noise excursions of similar point depth.
    area: f64,
}

/// Local minima of one column deep enough to clear the threshold, ranked by
/// integrated area, at most `max_candidates`, each with sub-bin
/// interpolation.
/// Least-squares parabola y = a·δ² + b·δ + c over the window around index
/// `center` (δ = f − f_center); returns the vertex (frequency, amplitude)
/// when the window curves upward, falling back to the 3-point form.
fn refine_vertex(freq_hz: &[f64], amp: &[f64], center: usize, half_bins: usize) -> (f64, f64) {
    let n = amp.len();
    let lo = center.saturating_sub(half_bins);
    let hi = (center + half_bins + 1).min(n);
    if hi - lo >= 4 {
        let f0 = freq_hz[center];
        let (mut s0, mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let (mut t0, mut t1, mut t2) = (0.0, 0.0, 0.0);
        for k in lo..hi {
            let x = freq_hz[k] - f0;
            let y = amp[k];
            let x2 = x * x;
            s0 += 1.0;
            s1 += x;
            s2 += x2;
            s3 += x2 * x;
            s4 += x2 * x2;
            t0 += y;
            t1 += x * y;
            t2 += x2 * y;
        }
        // Solve the 3x3 normal equations by Cramer's rule.
        let det = s4 * (s2 * s0 - s1 * s1) - s3 * (s3 * s0 - s1 * s2)
            + s2 * (s3 * s1 - s2 * s2);
        if det.abs() > 1e-300 {
            let a = (t2 * (s2 * s0 - s1 * s1) - s3 * (t1 * s0 - t0 * s1)
                + s2 * (t1 * s1 - t0 * s2))
                / det;
            let b = (s4 * (t1 * s0 - t0 * s1) - t2 * (s3 * s0 - s1 * s2)
                + s2 * (s3 * t0 - s2 * t1))
                / det;
            let c = (s4 * (s2 * t0 - s1 * t1) - s3 * (s3 * t0 - s2 * t1)
                + t2 * (s3 * s1 - s2 * s2))
                / det;
            if a > 0.0 {
                let dv = (-b / (2.0 * a)).clamp(freq_hz[lo] - f0, freq_hz[hi - 1] - f0);
                return (f0 + dv, c + dv * (b + a * dv));
            }
        }
    }
    if center > 0 && center + 1 < n {
        parabola_vertex(
            [freq_hz[center - 1], freq_hz[center], freq_hz[center + 1]],
            [amp[center - 1], amp[center], amp[center + 1]],
        )
    } else {
        (freq_hz[center], amp[center])
    }
}

fn column_candidates(freq_hz: &[f64], raw: &[f64], opts: &TrackOptions) -> Vec<Dip> {
    let n = raw.len();
    let amp = boxcar(raw, opts.smooth_half_width_bins);
    let mut sorted = amp.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let baseline = sorted[n / 2];
    // Noise of the raw column, scaled down by the boxcar averaging.
    let sigma = noise_sigma(raw) / ((2 * opts.smooth_half_width_bins + 1) as f64).sqrt();
    let threshold = (opts.depth_threshold_sigmas * sigma)
        .max(opts.rel_depth_floor * baseline.abs().max(1e-300));
    let step = if n > 1 {
        (freq_hz[n - 1] - freq_hz[0]).abs() / (n - 1) as f64
    } else {
        1.0
    };
    let area_bins = ((opts.area_half_width_hz / step).round() as usize).max(2);
    let mut dips: Vec<(usize, Dip)> = Vec::new();
    for i in 1..n - 1 {
        if amp[i] < amp[i - 1] && amp[i] <= amp[i + 1] && baseline - amp[i] > threshold {
            let area = (i.saturating_sub(area_bins)..(i + area_bins + 1).min(n))
                .map(|k| baseline - amp[k])
                .sum::<f64>();
            dips.push((
                i,
                Dip {
                    freq_hz: freq_hz[i],
                    amplitude: amp[i],
                    area,
                },
            ));
        }
    }
    dips.sort_by(|a, b| b.1.area.partial_cmp(&a.1.area).unwrap());
    // Deduplicate (strongest first), then refine the survivors on the raw
    // data over a physical window.
    let quad_bins = ((opts.quad_half_width_hz / step).round() as usize).max(1);
    let mut kept: Vec<Dip> = Vec::new();
    for (idx, d) in dips {
        if kept
            .iter()
            .all(|k| (k.freq_hz - d.freq_hz).abs() > opts.min_separation_hz)
        {
            let (f, a) = refine_vertex(freq_hz, raw, idx, quad_bins);
            kept.push(Dip {
                freq_hz: f,
                amplitude: a,
                area: d.area,
            });
            if kept.len() == opts.max_candidates {
                break;
            }
        }
    }
    kept
}

/// Pick the candidate pair that best continues the previous column's branch
/// frequencies. Candidates farther than `jump_tol_hz` from both previous
/// branches are ignored; a single candidate near both branches means they
/// merged below resolution.
fn assign(
    candidates: &[Dip],
    prev_upper: f64,
    prev_lower: f64,
    merge_tol_hz: f64,
    jump_tol_hz: f64,
) -> Option<(Dip, Dip)> {
    let gated: Vec<Dip> = candidates
        .iter()
        .copied()
        .filter(|d| {
            (d.freq_hz - prev_upper).abs() <= jump_tol_hz
                || (d.freq_hz - prev_lower).abs() <= jump_tol_hz
        })
        .collect();
    match gated.len() {
        0 => None,
        1 => {
            let d = gated[0];
            let near_both = (d.freq_hz - prev_upper).abs() < merge_tol_hz
                && (d.freq_hz - prev_lower).abs() < merge_tol_hz;
            near_both.then_some((d, d))
        }
        _ => {
            let mut best: Option<((Dip, Dip), f64)> = None;
            for (i, &a) in gated.iter().enumerate() {
                for (j, &b) in gated.iter().enumerate() {
                    if i == j || a.freq_hz < b.freq_hz {
                        continue;
                    }
                    let cost = (a.freq_hz - prev_upper).abs() + (b.freq_hz - prev_lower).abs();
                    if best.map_or(true, |(_, c)| cost < c) {
                        best = Some(((a, b), cost));
                    }
                }
            }
            best.map(|(pair, _)| pair)
        }
    }
}

/// Track both branch minima across the sweep. Columns where the branches
/// cannot be resolved are skipped and reported as gaps.
pub fn track_minima(sweep: &Sweep, opts: &TrackOptions) -> Result<TrackResult> {
    let n_cols = sweep.n_current();
    if sweep.n_freq() < 5 {
        return Err(Error::Sweep("tracking needs at least 5 frequency rows".into()));
    }
    let freq = sweep.freq_hz();
    let candidates: Vec<Vec<Dip>> = (0..n_cols)
        .map(|c| column_candidates(freq, &sweep.amplitude().column(c), opts))
        .collect();

    // Seed at the column with the widest separation between its two deepest
    // candidates, which is the least ambiguous assignment.
    let seed = candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.len() >= 2)
        .max_by(|a, b| {
            let sep = |c: &[Dip]| (c[0].freq_hz - c[1].freq_hz).abs();
            sep(a.1).partial_cmp(&sep(b.1)).unwrap()
        })
        .map(|(i, _)| i);
    let seed = match seed {
        Some(s) => s,
        None => {
            return Ok(TrackResult {
                traces: Vec::new(),
                skipped: (0..n_cols)
                    .map(|c| (c, "fewer than two dips above threshold".into()))
                    .collect(),
            })
        }
    };

    let merge_tol = 4.0 * sweep.freq_step();
    let mut assigned: Vec<Option<(Dip, Dip)>> = vec![None; n_cols];
    let seed_pair = {
        let c = &candidates[seed];
        let (a, b) = (c[0], c[1]);
        if a.freq_hz >= b.freq_hz {
            (a, b)
        } else {
            (b, a)
        }
    };
    assigned[seed] = Some(seed_pair);

    // Walk outward from the seed in both directions. The jump gate scales
    // with the local splitting so it tolerates the branch motion per column
    // on any grid density.
    let step = sweep.freq_step();
    let mut walk = |range: Box<dyn Iterator<Item = usize>>| {
        let mut prev = seed_pair;
        for col in range {
            let jump_tol = (0.12 * (prev.0.freq_hz - prev.1.freq_hz).abs()).max(10.0 * step);
            if let Some(pair) = assign(
                &candidates[col],
                prev.0.freq_hz,
                prev.1.freq_hz,
                merge_tol,
                jump_tol,
            ) {
                assigned[col] = Some(pair);
                prev = pair;
            }
        }
    };
    walk(Box::new((seed + 1)..n_cols));
    walk(Box::new((0..seed).rev()));

    let mut traces = Vec::new();
    let mut skipped = Vec::new();
    for (col, slot) in assigned.iter().enumerate() {
        match slot {
            Some((upper, lower)) => traces.push(BranchTrace {
                current_a: sweep.current_a()[col],
                omega_plus_hz: upper.freq_hz.max(lower.freq_hz),
                omega_minus_hz: upper.freq_hz.min(lower.freq_hz),
                depth_plus: if upper.freq_hz >= lower.freq_hz {
                    upper.amplitude
                } else {
                    lower.amplitude
                },
                depth_minus: if upper.freq_hz >= lower.freq_hz {
                    lower.amplitude
                } else {
                    upper.amplitude
                },
            }),
            None => skipped.push((
                col,
                if candidates[col].is_empty() {
                    "no dip above threshold".to_string()
                } else {
                    "branches unresolved".to_string()
                },
            )),
        }
    }
    Ok(TrackResult { traces, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{angular_to_hz, hz_to_angular};
    use crate::physics::{branch_frequencies, magnon_dispersion, CavityParams, DispersionCal};
    use crate::sweep::SweepMeta;
    use crate::synth::{generate_sweep, Background, KappaMLaw, TruthSpec};

    fn truth(noise: f64) -> TruthSpec {
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
            background: Background::flat(1.0),
            noise_sigma: noise,
            seed: 11,
            emit_phase: false,
        }
    }

    // The amplitude dips of the full reflection model sit a few tens of kHz
    // away from the lossless two-oscillator branch frequencies (the loss
    // channels pull them together), so comparisons against the branch
    // formula need a frequency step coarse enough to absorb that pull:
    // 200 kHz here, against a worst-case pull of ~80 kHz per branch.
    fn axes() -> (Vec<f64>, Vec<f64>) {
        let f: Vec<f64> = (0..301)
            .map(|k| 5.23902e9 - 30e6 + 60e6 * k as f64 / 300.0)
            .collect();
        let i: Vec<f64> = (0..41).map(|k| 2.09 - 0.17 + 0.0085 * k as f64).collect();
        (f, i)
    }

    #[test]
    fn noiseless_traces_match_branch_frequencies_within_half_a_step() {
        let t = truth(0.0);
        let (f, i) = axes();
        let sweep = generate_sweep(&t, &f, &i, SweepMeta::new(0.055, -140.0, -75.0)).unwrap();
        let result = track_minima(&sweep, &TrackOptions::default()).unwrap();
        assert_eq!(result.traces.len(), i.len(), "skipped: {:?}", result.skipped);
        let half_step = 0.5 * sweep.freq_step();
        for tr in &result.traces {
            let omega_m = magnon_dispersion(tr.current_a, &t.cal);
            let (plus, minus) =
                branch_frequencies(t.cal.omega_r_bare, omega_m, t.cal.g).unwrap();
            assert!(
                (tr.omega_plus_hz - angular_to_hz(plus)).abs() < half_step,
                "upper branch off by {} Hz at {} A",
                (tr.omega_plus_hz - angular_to_hz(plus)).abs(),
                tr.current_a
            );
            assert!(
                (tr.omega_minus_hz - angular_to_hz(minus)).abs() < half_step,
                "lower branch off by {} Hz at {} A",
                (tr.omega_minus_hz - angular_to_hz(minus)).abs(),
                tr.current_a
            );
        }
    }

    #[test]
    fn degeneracy_splitting_is_twice_the_coupling() {
        let t = truth(0.0);
        let (f, i) = axes();
        let sweep = generate_sweep(&t, &f, &i, SweepMeta::new(0.055, -140.0, -75.0)).unwrap();
        let result = track_minima(&sweep, &TrackOptions::default()).unwrap();
        let step = sweep.freq_step();
        let tr = result
            .traces
            .iter()
            .min_by(|a, b| {
                (a.current_a - 2.09)
                    .abs()
                    .partial_cmp(&(b.current_a - 2.09).abs())
                    .unwrap()
            })
            .unwrap();
        let split = tr.omega_plus_hz - tr.omega_minus_hz;
        let expect = 2.0 * angular_to_hz(t.cal.g);
        assert!(
            (split - expect).abs() < step,
            "splitting {split} vs 2g {expect} (step {step})"
        );
    }

    #[test]
    fn noisy_sweep_traces_most_columns_accurately() {
        // 30 dB SNR over a ±1.2g detuning span, where the shallower branch
        // keeps enough contrast to localize against the noise.
        let t = truth(10f64.powf(-30.0 / 20.0));
        let (f, _) = axes();
        let i: Vec<f64> = (0..41).map(|k| 2.09 - 0.101 + 0.00505 * k as f64).collect();
        let sweep = generate_sweep(&t, &f, &i, SweepMeta::new(0.055, -140.0, -75.0)).unwrap();
        // Heavier smoothing for the noisy data: the dips are ~1.5 MHz wide,
        // so a ±1.2 MHz boxcar trades negligible bias for 3.6x less noise.
        let opts = TrackOptions {
            smooth_half_width_bins: 6,
            ..Default::default()
        };
        let result = track_minima(&sweep, &opts).unwrap();
        assert!(
            result.traces.len() * 100 >= 95 * i.len(),
            "only {}/{} columns traced",
            result.traces.len(),
            i.len()
        );
        let step = sweep.freq_step();
        let mut ss = 0.0;
        for tr in &result.traces {
            let omega_m = magnon_dispersion(tr.current_a, &t.cal);
            let (plus, minus) =
                branch_frequencies(t.cal.omega_r_bare, omega_m, t.cal.g).unwrap();
            ss += (tr.omega_plus_hz - angular_to_hz(plus)).powi(2)
                + (tr.omega_minus_hz - angular_to_hz(minus)).powi(2);
        }
        let rms = (ss / (2.0 * result.traces.len() as f64)).sqrt();
        assert!(rms < step, "RMS trace error {rms} Hz exceeds one step {step} Hz");
    }

    #[test]
    fn tracking_is_invariant_under_frequency_axis_reversal() {
        // Reversing the frequency axis and re-sorting the data must give the
        // same traces.
        let t = truth(0.0);
        let (f, i) = axes();
        let sweep = generate_sweep(&t, &f, &i, SweepMeta::new(0.055, -140.0, -75.0)).unwrap();
        let a = track_minima(&sweep, &TrackOptions::default()).unwrap();

        let n = f.len();
        let rev_f: Vec<f64> = f.iter().rev().map(|&x| -x).collect();
        let mut rev_amp = crate::sweep::Grid2::zeros(n, i.len());
        for r in 0..n {
            for c in 0..i.len() {
                *rev_amp.at_mut(r, c) = sweep.amplitude().at(n - 1 - r, c);
            }
        }
        let rev = Sweep::new(
            rev_f,
            i.clone(),
            rev_amp,
            None,
            SweepMeta::new(0.055, -140.0, -75.0),
        )
        .unwrap();
        let b = track_minima(&rev, &TrackOptions::default()).unwrap();
        assert_eq!(a.traces.len(), b.traces.len());
        for (ta, tb) in a.traces.iter().zip(&b.traces) {
            // Negated axis swaps the branches; allow float noise from the
            // mirrored arithmetic.
            assert!((ta.omega_plus_hz + tb.omega_minus_hz).abs() < 1e-3);
            assert!((ta.omega_minus_hz + tb.omega_plus_hz).abs() < 1e-3);
        }
    }

    #[test]
    fn featureless_columns_are_skipped() {
        let f: Vec<f64> = (0..100).map(|k| 5.0e9 + 1e5 * k as f64).collect();
        let i: Vec<f64> = (0..10).map(|k| 0.1 * k as f64).collect();
        let mut amp = crate::sweep::Grid2::zeros(100, 10);
        for r in 0..100 {
            for c in 0..10 {
                *amp.at_mut(r, c) = 1.0;
            }
        }
        let sweep = Sweep::new(f, i, amp, None, SweepMeta::new(0.055, -140.0, -75.0)).unwrap();
        let result = track_minima(&sweep, &TrackOptions::default()).unwrap();
        assert!(result.traces.is_empty());
        assert_eq!(result.skipped.len(), 10);
    }
}
