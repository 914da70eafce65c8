//! Input-output reflection coefficient of the coupled cavity–magnon system.

use num_complex::Complex64;

use super::params::{CavityParams, MagnonParams};
use crate::error::{Error, Result};

/// Raw reflection model on bare parameters, used both by the validated public
/// functions and by the fit models that explore parameter space directly.
///
/// S11(ω_p) = −1 + 2κ_c / ( i(ω_r − ω_p) + κ_l + g² / ( i(ω_m − ω_p) + κ_m ) )
#[inline]
pub fn s11_model(
    omega_p: f64,
    omega_r: f64,
    kappa_c: f64,
    kappa_l: f64,
    omega_m: f64,
    kappa_m: f64,
    g: f64,
) -> Complex64 {
    let magnon = Complex64::new(kappa_m, omega_m - omega_p);
    let denom = Complex64::new(kappa_l, omega_r - omega_p) + g * g / magnon;
    -1.0 + 2.0 * kappa_c / denom
}

/// Complex reflection coefficient at probe frequency `omega_p` (rad/s).
pub fn reflection_s11(omega_p: f64, cav: &CavityParams, mag: &MagnonParams) -> Result<Complex64> {
    if !omega_p.is_finite() {
        return Err(Error::NonFinite("omega_p"));
    }
    if omega_p <= 0.0 {
        return Err(Error::InvalidParam(format!(
            "probe frequency must be positive, got {omega_p}"
        )));
    }
    Ok(s11_model(
        omega_p,
        cav.omega_r(),
        cav.kappa_c(),
        cav.kappa_l(),
        mag.omega_m(),
        mag.kappa_m(),
        mag.g(),
    ))
}

/// |S11| at probe frequency `omega_p` (rad/s).
pub fn reflection_amplitude(omega_p: f64, cav: &CavityParams, mag: &MagnonParams) -> Result<f64> {
    reflection_s11(omega_p, cav, mag).map(|s| s.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::hz_to_angular;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent re-evaluation of the reflection coefficient using only real
    /// arithmetic, kept deliberately separate from the num-complex route.
    fn s11_real_arithmetic(
        omega_p: f64,
        omega_r: f64,
        kappa_c: f64,
        kappa_l: f64,
        omega_m: f64,
        kappa_m: f64,
        g: f64,
    ) -> (f64, f64) {
        // g^2 / (i dm + km) = g^2 (km - i dm) / (km^2 + dm^2)
        let dm = omega_m - omega_p;
        let den_m = kappa_m * kappa_m + dm * dm;
        let add_re = g * g * kappa_m / den_m;
        let add_im = -g * g * dm / den_m;
        // denominator D = (kl + add_re) + i (dr + add_im)
        let d_re = kappa_l + add_re;
        let d_im = (omega_r - omega_p) + add_im;
        let den = d_re * d_re + d_im * d_im;
        // 2 kc / D = 2 kc (d_re - i d_im) / |D|^2
        (-1.0 + 2.0 * kappa_c * d_re / den, -2.0 * kappa_c * d_im / den)
    }

    fn fig_cut_params() -> (CavityParams, MagnonParams) {
        let omega_r = hz_to_angular(5.23902e9);
        let cav = CavityParams::from_quality_factors(omega_r, 7125.0, 5439.0).unwrap();
        let mag = MagnonParams::new(omega_r, hz_to_angular(1.82e6), hz_to_angular(10.4e6)).unwrap();
        (cav, mag)
    }

    #[test]
    fn critical_coupling_reflects_nothing() {
        let omega_r = hz_to_angular(5.0e9);
        let kappa = hz_to_angular(0.5e6);
        let cav = CavityParams::new(omega_r, kappa, kappa).unwrap();
        let mag = MagnonParams::new(hz_to_angular(4.5e9), hz_to_angular(1.0e6), 0.0).unwrap();
        let s = reflection_s11(omega_r, &cav, &mag).unwrap();
        assert!(s.norm() < 1e-12, "critically coupled on-resonance S11 = {s}");
    }

    #[test]
    fn lossless_cavity_reflects_everything() {
        // kappa_i = 0 is outside the type invariant; take the limit instead.
        let omega_r = hz_to_angular(5.0e9);
        let kappa_c = hz_to_angular(0.5e6);
        let mag = MagnonParams::new(hz_to_angular(4.5e9), hz_to_angular(1.0e6), 0.0).unwrap();
        let mut prev = 0.0;
        for kappa_i_frac in [1e-3, 1e-6, 1e-9] {
            let cav = CavityParams::new(omega_r, kappa_c, kappa_c * kappa_i_frac).unwrap();
            let s = reflection_s11(omega_r, &cav, &mag).unwrap();
            assert!((s.re - 1.0).abs() < 3.0 * kappa_i_frac);
            assert!(s.re > prev);
            prev = s.re;
        }
    }

    #[test]
    fn degeneracy_cut_shows_two_dips_at_the_coupling_splitting() {
        let (cav, mag) = fig_cut_params();
        let omega_r = cav.omega_r();
        let g = mag.g();
        // Dense scan over the crossing region.
        let n = 20_001;
        let span = 3.0 * g;
        let mut minima = Vec::new();
        let amp = |w: f64| reflection_amplitude(w, &cav, &mag).unwrap();
        let step = 2.0 * span / (n - 1) as f64;
        let mut prev2 = amp(omega_r - span);
        let mut prev = amp(omega_r - span + step);
        for k in 2..n {
            let w = omega_r - span + k as f64 * step;
            let cur = amp(w);
            if prev < prev2 && prev <= cur {
                minima.push(omega_r - span + (k - 1) as f64 * step);
            }
            prev2 = prev;
            prev = cur;
        }
        assert_eq!(minima.len(), 2, "expected exactly two dips");
        // Dip positions match omega_r ± g within a loaded linewidth.
        let kappa_l = cav.kappa_l();
        assert!((minima[0] - (omega_r - g)).abs() < kappa_l);
        assert!((minima[1] - (omega_r + g)).abs() < kappa_l);
    }

    #[test]
    fn amplitude_is_modulus_of_s11() {
        let (cav, mag) = fig_cut_params();
        let w = cav.omega_r() + hz_to_angular(3.0e6);
        let s = reflection_s11(w, &cav, &mag).unwrap();
        let a = reflection_amplitude(w, &cav, &mag).unwrap();
        assert_eq!(a, s.norm());
    }

    #[test]
    fn far_detuned_amplitude_approaches_unity() {
        let omega_r = hz_to_angular(5.0e9);
        let cav = CavityParams::new(omega_r, hz_to_angular(0.5e6), hz_to_angular(0.4e6)).unwrap();
        let mag = MagnonParams::new(hz_to_angular(4.0e9), hz_to_angular(1.0e6), 0.0).unwrap();
        let w = omega_r + 1e4 * cav.kappa_l();
        let a = reflection_amplitude(w, &cav, &mag).unwrap();
        assert!((a - 1.0).abs() < 1e-3, "far off resonance |S11| = {a}");
    }

    #[test]
    fn matches_independent_real_arithmetic_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let omega_r = hz_to_angular(rng.gen_range(3.0e9..8.0e9));
            let kappa_c = hz_to_angular(rng.gen_range(0.1e6..2.0e6));
            let kappa_i = hz_to_angular(rng.gen_range(0.1e6..2.0e6));
            let cav = CavityParams::new(omega_r, kappa_c, kappa_i).unwrap();
            let omega_m = omega_r + hz_to_angular(rng.gen_range(-50.0e6..50.0e6));
            let kappa_m = hz_to_angular(rng.gen_range(0.2e6..5.0e6));
            let g = hz_to_angular(rng.gen_range(0.0..20.0e6));
            let mag = MagnonParams::new(omega_m, kappa_m, g).unwrap();
            for k in 0..501 {
                let w = omega_r + hz_to_angular(-60.0e6 + 0.24e6 * k as f64);
                let s = reflection_s11(w, &cav, &mag).unwrap();
                let (re, im) = s11_real_arithmetic(
                    w,
                    omega_r,
                    kappa_c,
                    cav.kappa_l(),
                    omega_m,
                    kappa_m,
                    g,
                );
                let expect = (re * re + im * im).sqrt();
                assert!(
                    (s.norm() - expect).abs() <= 1e-12 * expect.max(1e-30),
                    "complex and real routes disagree: {} vs {expect}",
                    s.norm()
                );
            }
        }
    }

    #[test]
    fn passivity_over_random_parameter_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..60 {
            let omega_r = hz_to_angular(rng.gen_range(3.0e9..8.0e9));
            let kappa_c = hz_to_angular(rng.gen_range(0.05e6..5.0e6));
            let kappa_i = hz_to_angular(rng.gen_range(1e-6..5.0e6));
            let cav = CavityParams::new(omega_r, kappa_c, kappa_i).unwrap();
            let omega_m = omega_r + hz_to_angular(rng.gen_range(-100.0e6..100.0e6));
            let kappa_m = hz_to_angular(rng.gen_range(1e-6..10.0e6));
            let g = hz_to_angular(rng.gen_range(0.0..30.0e6));
            let mag = MagnonParams::new(omega_m, kappa_m, g).unwrap();
            for k in 0..400 {
                let w = omega_r + hz_to_angular(-150.0e6 + 0.75e6 * k as f64);
                let a = reflection_amplitude(w, &cav, &mag).unwrap();
                assert!(a <= 1.0 + 1e-9, "passivity violated: |S11| = {a}");
            }
        }
    }

    #[test]
    fn decoupled_system_equals_single_resonator() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..10 {
            let omega_r = hz_to_angular(rng.gen_range(3.0e9..8.0e9));
            let kappa_c = hz_to_angular(rng.gen_range(0.1e6..2.0e6));
            let kappa_i = hz_to_angular(rng.gen_range(0.1e6..2.0e6));
            let cav = CavityParams::new(omega_r, kappa_c, kappa_i).unwrap();
            let mag =
                MagnonParams::new(hz_to_angular(4.5e9), hz_to_angular(1.0e6), 0.0).unwrap();
            let kappa_l = cav.kappa_l();
            for k in 0..500 {
                let w = omega_r + hz_to_angular(-20.0e6 + 0.08e6 * k as f64);
                let s = reflection_s11(w, &cav, &mag).unwrap();
                let single = -1.0
                    + 2.0 * kappa_c
                        / Complex64::new(kappa_l, omega_r - w);
                assert!(
                    (s - single).norm() <= 1e-12 * single.norm().max(1.0),
                    "g = 0 must reduce to the single-resonator response"
                );
            }
        }
    }

    #[test]
    fn rejects_non_finite_probe() {
        let (cav, mag) = fig_cut_params();
        assert!(reflection_s11(f64::NAN, &cav, &mag).is_err());
        assert!(reflection_s11(f64::INFINITY, &cav, &mag).is_err());
        assert!(reflection_s11(-1.0, &cav, &mag).is_err());
    }
}
