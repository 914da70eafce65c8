//! End-to-end pipeline behavior on synthetic campaigns: recovery, stage
//! isolation, determinism, and provenance bookkeeping.

use magnonics::constants::hz_to_angular;
use magnonics::io::SimulateConfig;
use magnonics::physics::{dbm_to_watts, tls_linewidth, TlsParams};
use magnonics::sweep::{run_pipeline, PipelineConfig, PipelineInput, ReportBundle, Sweep};
use magnonics::synth::generate_sweep;

/// Build a small synthetic campaign straight from the simulator config
/// machinery, exactly as the CLI would.
fn campaign(
    temps: &[f64],
    powers: &[f64],
    noise_sigma: f64,
    n_freq: usize,
    n_current: usize,
    seed: u64,
) -> PipelineInput {
    let mut sim = SimulateConfig::default();
    sim.noise_sigma = noise_sigma;
    sim.seed = seed;
    sim.kappa_m.law = "tls".into();
    sim.axes.n_freq = n_freq;
    sim.axes.n_current = n_current;
    sim.campaign.temperatures_k = temps.to_vec();
    sim.campaign.powers_dbm = powers.to_vec();

    let (freq, currents) = sim.axes.axes().unwrap();
    let mut crossing = Vec::new();
    let mut idx = 0;
    for &t in temps {
        for &p in powers {
            let truth = sim.truth_spec(seed.wrapping_add(idx)).unwrap();
            let mut meta = magnonics::sweep::SweepMeta::new(t, p, sim.attenuation_db);
            meta.tags
                .insert("label".into(), format!("T{}K_P{}dBm", t, p));
            crossing.push(generate_sweep(&truth, &freq, &currents, meta).unwrap());
            idx += 1;
        }
    }
    // Dedicated single-column resonator sweep at zero current, where the
    // magnon sits hundreds of linewidths away.
    let truth = sim.truth_spec(seed.wrapping_add(10_000)).unwrap();
    let mut meta = magnonics::sweep::SweepMeta::new(temps[0], powers[0], sim.attenuation_db);
    meta.tags.insert("label".into(), "resonator".into());
    meta.tags.insert("role".into(), "resonator".into());
    let resonator = generate_sweep(&truth, &freq, &[0.0], meta).unwrap();
    PipelineInput {
        crossing,
        resonator: Some(resonator),
    }
}

fn truth_tls() -> TlsParams {
    TlsParams::new(
        hz_to_angular(1.05e6),
        dbm_to_watts(-81.0),
        hz_to_angular(0.91e6),
        hz_to_angular(5.23902e9),
    )
    .unwrap()
}

#[test]
fn noiseless_single_sweep_runs_every_stage_exactly() {
    let input = campaign(&[0.055], &[-140.0], 0.0, 601, 21, 1);
    let config = PipelineConfig {
        seed: Some(1),
        ..Default::default()
    };
    let bundle = run_pipeline(&input, &config).unwrap();
    assert!(!bundle.partial);
    // Cavity within a percent of the generator truth.
    assert!((bundle.cavity.q_c - 5439.0).abs() / 5439.0 < 0.01);
    assert!((bundle.cavity.q_i - 7125.0).abs() / 7125.0 < 0.01);
    // Dispersion close to the generator calibration (dip positions carry a
    // small physical pull relative to the lossless branch formula).
    assert!((bundle.dispersion.f_r_bare_hz - 5.23902e9).abs() < 1e5);
    assert!((bundle.dispersion.g_hz - 10.39e6).abs() / 10.39e6 < 0.01);
    assert!((bundle.dispersion.crossing_current_a - 2.09).abs() < 0.002);
    // Every cut extracted, each close to the truth.
    assert_eq!(bundle.linewidths.len(), 21);
    let tls = truth_tls();
    let expect = tls_linewidth(0.055, dbm_to_watts(-140.0), &tls).unwrap()
        / magnonics::constants::TWO_PI;
    for row in &bundle.linewidths {
        assert!(
            (row.kappa_m_hwhm_hz - expect).abs() / expect < 0.05,
            "cut at {} A: {} Hz vs {} Hz",
            row.current_a,
            row.kappa_m_hwhm_hz,
            expect
        );
    }
    // One sweep cannot constrain the TLS surface; stage skipped with a note.
    assert!(bundle.tls.is_none());
    assert!(bundle.warnings.iter().any(|w| w.contains("TLS stage skipped")));
}

#[test]
fn corrupted_sweep_is_isolated_and_the_rest_completes() {
    let mut input = campaign(&[0.055], &[-140.0, -100.0, -80.0, -65.0], 0.0, 501, 15, 3);
    // Corrupt one sweep: amplitude flat at exactly zero contrast.
    let broken_idx = 1;
    let freq = input.crossing[broken_idx].freq_hz().to_vec();
    let currents = input.crossing[broken_idx].current_a().to_vec();
    let mut flat = magnonics::sweep::Grid2::zeros(freq.len(), currents.len());
    for r in 0..freq.len() {
        for c in 0..currents.len() {
            *flat.at_mut(r, c) = 0.9;
        }
    }
    let mut meta = input.crossing[broken_idx].meta.clone();
    meta.tags.insert("label".into(), "corrupted".into());
    input.crossing[broken_idx] = Sweep::new(freq, currents, flat, None, meta).unwrap();

    let bundle = run_pipeline(&input, &PipelineConfig::default()).unwrap();
    // The corrupted sweep contributes no linewidth rows; the others do.
    assert!(bundle.linewidths.iter().all(|r| r.sweep_label != "corrupted"));
    let good_labels: std::collections::BTreeSet<_> = bundle
        .linewidths
        .iter()
        .map(|r| r.sweep_label.clone())
        .collect();
    assert_eq!(good_labels.len(), 3);
    assert!(
        bundle.warnings.iter().any(|w| w.contains("corrupted")),
        "corruption not logged: {:?}",
        bundle.warnings
    );
}

#[test]
fn identical_inputs_give_bit_identical_bundles() {
    let config = PipelineConfig {
        seed: Some(7),
        ..Default::default()
    };
    let a = run_pipeline(
        &campaign(&[0.055, 0.2], &[-140.0, -80.0], 0.02, 401, 15, 7),
        &config,
    )
    .unwrap();
    let b = run_pipeline(
        &campaign(&[0.055, 0.2], &[-140.0, -80.0], 0.02, 401, 15, 7),
        &config,
    )
    .unwrap();
    let ja = serde_json::to_string(&a).unwrap();
    let jb = serde_json::to_string(&b).unwrap();
    assert_eq!(ja, jb, "pipeline output is not deterministic");
}

#[test]
fn provenance_chain_is_complete_and_acyclic() {
    let input = campaign(&[0.055, 0.2], &[-140.0, -100.0, -80.0], 0.01, 401, 15, 5);
    let bundle = run_pipeline(&input, &PipelineConfig::default()).unwrap();
    provenance_check(&bundle);
    assert!(bundle.tls.is_some());
}

fn provenance_check(bundle: &ReportBundle) {
    use std::collections::BTreeSet;
    let ids: BTreeSet<&str> = bundle.fits.iter().map(|f| f.id.as_str()).collect();
    assert_eq!(ids.len(), bundle.fits.len(), "duplicate fit ids");
    // Every fixed_from reference points at an earlier fit: complete and
    // acyclic by construction order.
    let mut seen = BTreeSet::new();
    for fit in &bundle.fits {
        for dep in &fit.fixed_from {
            assert!(
                seen.contains(dep.as_str()),
                "fit {} depends on {} which is not an earlier stage",
                fit.id,
                dep
            );
        }
        seen.insert(fit.id.as_str());
    }
    // Units are explicit on every reported parameter.
    for fit in &bundle.fits {
        for p in &fit.params {
            assert!(!p.unit.is_empty());
        }
    }
}

#[test]
fn cavity_override_skips_the_resonator_stage() {
    let mut input = campaign(&[0.055], &[-140.0], 0.0, 401, 15, 9);
    input.resonator = None;
    let config = PipelineConfig {
        cavity_override: Some(magnonics::sweep::CavityOverride {
            f_r_hz: 5.23902e9,
            kappa_c_hwhm_hz: 5.23902e9 / (2.0 * 5439.0),
            kappa_i_hwhm_hz: 5.23902e9 / (2.0 * 7125.0),
        }),
        ..Default::default()
    };
    let bundle = run_pipeline(&input, &config).unwrap();
    assert!(bundle.fits.iter().all(|f| f.stage != "resonator"));
    assert_eq!(bundle.linewidths.len(), 15);
    // Without either source the pipeline refuses to run.
    let bare = PipelineConfig::default();
    assert!(run_pipeline(&input, &bare).is_err());
}
