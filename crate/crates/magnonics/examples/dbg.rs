use magnonics::io::SimulateConfig;
use magnonics::physics::{branch_frequencies, magnon_dispersion, CavityParams, DispersionCal};
use magnonics::constants::{hz_to_angular, angular_to_hz};
use magnonics::sweep::*;
use magnonics::synth::generate_sweep;

fn main() {
    let seed = 2024u64;
    let mut sim = SimulateConfig::default();
    sim.seed = seed;
    sim.noise_sigma = 10f64.powf(-30.0 / 20.0);
    sim.kappa_m.law = "tls".into();
    sim.axes.n_freq = 1001;
    sim.axes.f_start_hz = 5.23902e9 - 36e6;
    sim.axes.f_stop_hz = 5.23902e9 + 36e6;
    sim.axes.n_current = 41;
    let di = 1.5 * 10.39e6 / ((5.23902e9 - 4.9817e9) / 2.09);
    sim.axes.i_start_a = 2.09 - di;
    sim.axes.i_stop_a = 2.09 + di;
    let (freq, currents) = sim.axes.axes().unwrap();
    let truth = sim.truth_spec(seed).unwrap();
    let raw = generate_sweep(&truth, &freq, &currents, SweepMeta::new(0.055, -140.0, -75.0)).unwrap();
    let cav = CavityParams::from_quality_factors(hz_to_angular(5.23902e9), 7125.0, 5439.0).unwrap();
    let cal = DispersionCal::new(hz_to_angular(5.23902e9), hz_to_angular(4.9817e9), (hz_to_angular(5.23902e9)-hz_to_angular(4.9817e9))/2.09, hz_to_angular(10.39e6)).unwrap();
    let config = PipelineConfig::default();
    let (pcal, _, tail, _) = preliminary_normalization(&vec![raw.clone()], 0, &cav, &config).unwrap();
    let windows = exclusion_from_dispersion(&pcal, cav.kappa_l(), raw.current_a(), 5.0);
    let norm = normalize_baseline(&raw, &windows, BaselineWeighting::InverseVariance, Some(&tail)).unwrap();
    let tracked = track_minima(&norm, &TrackOptions::default()).unwrap();
    println!("traced {} skipped {}", tracked.traces.len(), tracked.skipped.len());
    for tr in &tracked.traces {
        if (tr.current_a - 2.09).abs() < 0.035 {
            let omega_m = magnon_dispersion(tr.current_a, &cal);
            let (p, m) = branch_frequencies(cal.omega_r_bare, omega_m, cal.g).unwrap();
            println!("I={:.4}: plus {:+.3} (S1 {:+.3}) minus {:+.3} (S1 {:+.3}) MHz",
                tr.current_a, (tr.omega_plus_hz-5.23902e9)/1e6, (angular_to_hz(p)-5.23902e9)/1e6,
                (tr.omega_minus_hz-5.23902e9)/1e6, (angular_to_hz(m)-5.23902e9)/1e6);
        }
    }
}
