//! Excitation-number calibration and power unit conversions.

use super::params::CavityParams;
use crate::constants::HBAR;

/// Mean total number of photon and magnon excitations stored in the driven
/// cavity, in units of ħω_r:
///
/// ⟨N_e⟩ = 4·(Q_l²/Q_c)·P_in / (ħ·ω_r²)
pub fn excitation_number(p_in_w: f64, cav: &CavityParams) -> f64 {
    let q_l = cav.q_l();
    let q_c = cav.q_c();
    4.0 * q_l * q_l / q_c * p_in_w / (HBAR * cav.omega_r() * cav.omega_r())
}

/// Mean magnon number when photon and magnon frequencies match: the stored
/// energy splits evenly, ⟨m⟩ = ⟨N_e⟩/2.
pub fn magnon_number_resonant(n_e: f64) -> f64 {
    0.5 * n_e
}

/// Mean magnon number off resonance: the total excitation weighted by the
/// energy-averaged magnon share of the occupied branches (see
/// `sweep::excitation_ratio_curve` for how the share is measured).
pub fn magnon_number_weighted(n_e: f64, magnon_share: f64) -> f64 {
    magnon_share * n_e
}

/// dBm (dB-milliwatt) to watts: 10^(P/10) mW.
pub fn dbm_to_watts(p_dbm: f64) -> f64 {
    1e-3 * 10f64.powf(p_dbm / 10.0)
}

/// Watts to dBm.
pub fn watts_to_dbm(p_w: f64) -> f64 {
    10.0 * (p_w / 1e-3).log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::hz_to_angular;

    fn reference_cavity() -> CavityParams {
        CavityParams::from_loaded_and_coupling_q(hz_to_angular(5.2395e9), 3084.0, 5439.0).unwrap()
    }

    #[test]
    fn femtowatt_drive_excitation() {
        let cav = reference_cavity();
        let n = excitation_number(1e-15, &cav);
        assert!(
            (61.0..=63.0).contains(&n),
            "1 fW drive must store 61..63 excitations, got {n}"
        );
    }

    #[test]
    fn linear_in_power() {
        let cav = reference_cavity();
        assert_eq!(excitation_number(0.0, &cav), 0.0);
        let n1 = excitation_number(3.2e-14, &cav);
        let n2 = excitation_number(6.4e-14, &cav);
        assert!((n2 / n1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn magnon_numbers_at_the_experiment_endpoints() {
        let cav = reference_cavity();
        let m_low = magnon_number_resonant(excitation_number(dbm_to_watts(-140.0), &cav));
        assert!((m_low - 0.31).abs() < 0.05 * 0.31, "low endpoint {m_low}");
        let m_high = magnon_number_resonant(excitation_number(dbm_to_watts(-65.0), &cav));
        assert!(
            (m_high - 9.85e6).abs() < 0.05 * 9.85e6,
            "high endpoint {m_high}"
        );
        let m_crit = magnon_number_resonant(excitation_number(dbm_to_watts(-81.0), &cav));
        assert!(
            (m_crit - 2.4e5).abs() < 0.10 * 2.4e5,
            "critical magnon number {m_crit}"
        );
    }

    #[test]
    fn weighted_share_reduces_to_resonant_at_half() {
        assert_eq!(magnon_number_weighted(10.0, 0.5), magnon_number_resonant(10.0));
        assert_eq!(magnon_number_weighted(10.0, 0.2), 2.0);
    }

    #[test]
    fn dbm_conversions() {
        assert!((dbm_to_watts(0.0) - 1e-3).abs() < 1e-15);
        assert!((dbm_to_watts(-140.0) - 1e-17).abs() < 1e-29);
        assert!((dbm_to_watts(-81.0) - 7.943282347e-12).abs() < 1e-18);
        for dbm in [-140.0, -81.0, -65.0, 0.0, 10.0] {
            assert!((watts_to_dbm(dbm_to_watts(dbm)) - dbm).abs() < 1e-9);
        }
    }
}
