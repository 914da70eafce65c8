//! Physical constants (CODATA 2018) and unit conversion helpers.

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;

/// Vacuum magnetic permeability (N/A²).
pub const MU_0: f64 = 1.256_637_062_12e-6;

/// Electron gyromagnetic ratio (rad·s⁻¹·T⁻¹); γ_e/2π = 28.0249514 GHz/T.
pub const GAMMA_E: f64 = 1.760_859_630_23e11;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Plain frequency in Hz to angular frequency in rad/s.
#[inline]
pub fn hz_to_angular(f_hz: f64) -> f64 {
    TWO_PI * f_hz
}

/// Angular frequency in rad/s to plain frequency in Hz.
#[inline]
pub fn angular_to_hz(omega: f64) -> f64 {
    omega / TWO_PI
}
