//! Avoided-crossing branch frequencies, Hopfield fractions, and the linear
//! magnon dispersion against coil current.

use super::params::{DispersionCal, HopfieldFractions};
use crate::error::{Error, Result};

/// Eigenfrequencies ω_± of two coupled harmonic oscillators:
/// ω_± = (ω_r + ω_m)/2 ± √(((ω_r − ω_m)/2)² + g²), returned as (ω_+, ω_−).
pub fn branch_frequencies(omega_r: f64, omega_m: f64, g: f64) -> Result<(f64, f64)> {
    for (v, name) in [(omega_r, "omega_r"), (omega_m, "omega_m"), (g, "g")] {
        if !v.is_finite() {
            return Err(Error::NonFinite(name));
        }
    }
    if g < 0.0 {
        return Err(Error::InvalidParam(format!(
            "coupling strength must be non-negative, got {g}"
        )));
    }
    let mean = 0.5 * (omega_r + omega_m);
    let half = 0.5 * (omega_r - omega_m);
    let root = (half * half + g * g).sqrt();
    Ok((mean + root, mean - root))
}

/// Photon/magnon weights of both polariton branches from the eigenvectors of
/// the real symmetric coupling matrix [[ω_r, g], [g, ω_m]].
///
/// With Δ = ω_m − ω_r, the upper branch's magnon fraction is
/// ½(1 + Δ/√(Δ² + 4g²)); the remaining fractions follow from normalization
/// and the 2×2 eigenvector symmetry.
pub fn hopfield_fractions(omega_r: f64, omega_m: f64, g: f64) -> Result<HopfieldFractions> {
    for (v, name) in [(omega_r, "omega_r"), (omega_m, "omega_m"), (g, "g")] {
        if !v.is_finite() {
            return Err(Error::NonFinite(name));
        }
    }
    if g < 0.0 {
        return Err(Error::InvalidParam(format!(
            "coupling strength must be non-negative, got {g}"
        )));
    }
    let delta = omega_m - omega_r;
    if g == 0.0 && delta == 0.0 {
        return Err(Error::InvalidParam(
            "eigenvectors undefined at zero coupling and zero detuning".into(),
        ));
    }
    let upper_magnon = 0.5 * (1.0 + delta / (delta * delta + 4.0 * g * g).sqrt());
    Ok(HopfieldFractions {
        upper_magnon,
        upper_photon: 1.0 - upper_magnon,
        lower_magnon: 1.0 - upper_magnon,
        lower_photon: upper_magnon,
    })
}

/// Linear magnon tuning: ω_m(I) = ω_m(0) + slope·I.
pub fn magnon_dispersion(current_a: f64, cal: &DispersionCal) -> f64 {
    cal.omega_m_zero + cal.slope * current_a
}
