//! Ground-truth synthetic data: sweeps built from the reflection model over a
//! calibrated avoided crossing, TLS campaigns, smooth backgrounds, seeded
//! noise, and a brute-force grid-search oracle.
//!
//! The random generator is ChaCha8 (`rand_chacha`), a portable, seedable
//! stream cipher RNG: identical seeds give bit-identical data on every
//! platform. Gaussian deviates come from the Box–Muller transform.

mod grid;
mod noise;

pub use grid::{grid_search_fit, GridFit, GridSpec};
pub use noise::GaussianSampler;

use crate::error::{Error, Result};
use crate::physics::{
    magnon_dispersion, s11_model, tls_linewidth, CavityParams, DispersionCal, TlsParams,
};
use crate::sweep::{Grid2, Sweep, SweepMeta};

use crate::fit::TlsSample;

/// How the generator picks the magnon linewidth for a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KappaMLaw {
    /// Fixed κ_m (rad/s).
    Constant(f64),
    /// TLS loss tangent evaluated at the sweep's (temperature, power).
    Tls(TlsParams),
}

impl KappaMLaw {
    pub fn kappa_m(&self, temperature_k: f64, p_in_w: f64) -> Result<f64> {
        match self {
            KappaMLaw::Constant(k) => Ok(*k),
            KappaMLaw::Tls(p) => tls_linewidth(temperature_k, p_in_w, p),
        }
    }
}

/// Smooth multiplicative background over the frequency axis: a polynomial in
/// the normalized coordinate x = (f − f_mid)/(f_span/2) ∈ [−1, 1], plus an
/// optional sinusoidal ripple.
#[derive(Debug, Clone, PartialEq)]
pub struct Background {
    /// Polynomial coefficients, constant term first (degree ≤ 5).
    pub poly: Vec<f64>,
    /// Optional ripple (amplitude, period in Hz, phase in rad).
    pub ripple: Option<(f64, f64, f64)>,
}

impl Background {
    pub fn flat(level: f64) -> Self {
        Self {
            poly: vec![level],
            ripple: None,
        }
    }

    pub fn value(&self, f_hz: f64, f_lo: f64, f_hi: f64) -> f64 {
        let x = if f_hi > f_lo {
            2.0 * (f_hz - 0.5 * (f_lo + f_hi)) / (f_hi - f_lo)
        } else {
            0.0
        };
        let mut acc = 0.0;
        for &c in self.poly.iter().rev() {
            acc = acc * x + c;
        }
        if let Some((amp, period, phase)) = self.ripple {
            acc += amp * (crate::constants::TWO_PI * f_hz / period + phase).cos();
        }
        acc
    }
}

/// Everything the generator needs to synthesize a sweep: cavity, crossing
/// calibration, linewidth law, background, noise level, and the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthSpec {
    pub cav: CavityParams,
    pub cal: DispersionCal,
    pub kappa_m_law: KappaMLaw,
    pub background: Background,
    /// Additive Gaussian noise σ on the linear amplitude.
    pub noise_sigma: f64,
    pub seed: u64,
    /// Also emit the model phase (noise-free).
    pub emit_phase: bool,
}

impl TruthSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::InvalidParam(format!(
                "noise sigma must be finite and >= 0, got {}",
                self.noise_sigma
            )));
        }
        if self.poly_degree() > 5 {
            return Err(Error::InvalidParam(
                "background polynomial degree must be <= 5".into(),
            ));
        }
        Ok(())
    }

    fn poly_degree(&self) -> usize {
        self.background.poly.len().saturating_sub(1)
    }
}

/// Synthesize one sweep: amplitude[f, i] = background(f)·|S11(f; cavity,
/// ω_m(i), κ_m(T, P))| + noise, deterministic for a fixed seed.
pub fn generate_sweep(
    truth: &TruthSpec,
    freq_hz: &[f64],
    current_a: &[f64],
    meta: SweepMeta,
) -> Result<Sweep> {
    truth.validate()?;
    if freq_hz.len() < 2 || current_a.is_empty() {
        return Err(Error::Sweep("generator needs at least a 2x1 grid".into()));
    }
    let f_lo = freq_hz[0];
    let f_hi = *freq_hz.last().unwrap();
    let p_in_w = crate::physics::dbm_to_watts(meta.power_dbm);
    let kappa_m = truth.kappa_m_law.kappa_m(meta.temperature_k, p_in_w)?;

    // Background must stay strictly positive over the span.
    for &f in freq_hz {
        let b = truth.background.value(f, f_lo, f_hi);
        if !(b > 0.0) {
            return Err(Error::InvalidParam(format!(
                "background is not strictly positive at {f} Hz (value {b})"
            )));
        }
    }

    let n_f = freq_hz.len();
    let n_i = current_a.len();
    let mut amplitude = Grid2::zeros(n_f, n_i);
    let mut phase = truth.emit_phase.then(|| Grid2::zeros(n_f, n_i));
    let mut noise = GaussianSampler::new(truth.seed);
    for (row, &f) in freq_hz.iter().enumerate() {
        let omega_p = crate::constants::hz_to_angular(f);
        let bg = truth.background.value(f, f_lo, f_hi);
        for (col, &i) in current_a.iter().enumerate() {
            let omega_m = magnon_dispersion(i, &truth.cal);
            let s = s11_model(
                omega_p,
                truth.cav.omega_r(),
                truth.cav.kappa_c(),
                truth.cav.kappa_l(),
                omega_m,
                kappa_m,
                truth.cal.g,
            );
            let clean = bg * s.norm();
            let noisy = if truth.noise_sigma > 0.0 {
                (clean + truth.noise_sigma * noise.sample()).max(0.0)
            } else {
                clean
            };
            *amplitude.at_mut(row, col) = noisy;
            if let Some(ph) = phase.as_mut() {
                *ph.at_mut(row, col) = s.im.atan2(s.re);
            }
        }
    }
    Sweep::new(freq_hz.to_vec(), current_a.to_vec(), amplitude, phase, meta)
}

/// Synthesize κ_m samples over a (temperature × power) grid with relative
/// Gaussian noise, ready for the TLS surface fit. Deterministic per seed.
pub fn generate_tls_campaign(
    params: &TlsParams,
    temperatures_k: &[f64],
    powers_dbm: &[f64],
    noise_rel: f64,
    seed: u64,
) -> Result<Vec<TlsSample>> {
    if temperatures_k.is_empty() || powers_dbm.is_empty() {
        return Err(Error::InvalidParam("empty TLS campaign grid".into()));
    }
    if !(noise_rel >= 0.0) || !noise_rel.is_finite() {
        return Err(Error::InvalidParam("relative noise must be >= 0".into()));
    }
    let mut noise = GaussianSampler::new(seed);
    let mut out = Vec::with_capacity(temperatures_k.len() * powers_dbm.len());
    for &t in temperatures_k {
        for &dbm in powers_dbm {
            let truth = tls_linewidth(t, crate::physics::dbm_to_watts(dbm), params)?;
            let kappa_m = if noise_rel > 0.0 {
                (truth * (1.0 + noise_rel * noise.sample())).max(1e-6 * truth)
            } else {
                truth
            };
            out.push(TlsSample {
                temperature_k: t,
                power_dbm: dbm,
                kappa_m,
                sigma: noise_rel * truth,
            });
        }
    }
    Ok(out)
}
