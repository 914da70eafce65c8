//! Two-level-system loss-tangent model for the internal magnon linewidth.

use super::params::TlsParams;
use crate::constants::{HBAR, K_B};
use crate::error::{Error, Result};

/// Magnon half-linewidth from the generic TLS loss tangent:
///
/// κ_m(T, P) = κ_0 · tanh(ħω_ref / 2k_BT) / √(1 + P/P_c) + κ_off
///
/// `temperature_k` in kelvin, `p_in_w` the input power in watts.
pub fn tls_linewidth(temperature_k: f64, p_in_w: f64, p: &TlsParams) -> Result<f64> {
    if !temperature_k.is_finite() {
        return Err(Error::NonFinite("temperature"));
    }
    if !p_in_w.is_finite() {
        return Err(Error::NonFinite("input power"));
    }
    if temperature_k <= 0.0 {
        return Err(Error::InvalidParam(format!(
            "temperature must be strictly positive, got {temperature_k} K"
        )));
    }
    if p_in_w < 0.0 {
        return Err(Error::InvalidParam(format!(
            "input power must be non-negative, got {p_in_w} W"
        )));
    }
    let thermal = (HBAR * p.omega_ref / (2.0 * K_B * temperature_k)).tanh();
    let saturation = (1.0 + p_in_w / p.p_c).sqrt();
    Ok(p.kappa_0 * thermal / saturation + p.kappa_off)
}
