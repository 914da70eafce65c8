//! Theoretical collective coupling strength from material and geometry.

use super::params::MaterialParams;
use crate::constants::{HBAR, MU_0};

/// Expected collective coupling strength (rad/s) of N_s spins of spin number s
/// to a cavity mode of angular frequency `omega_r` and mode volume V_a:
///
/// g = (γ_e·η/2) · √(μ₀ħω_r / 2V_a) · √(2·N_s·s)
pub fn coupling_strength_theory(m: &MaterialParams, omega_r: f64) -> f64 {
    let single_spin = (MU_0 * HBAR * omega_r / (2.0 * m.v_a)).sqrt();
    0.5 * m.gamma_e * m.eta * single_spin * (2.0 * m.n_s * m.s).sqrt()
}
