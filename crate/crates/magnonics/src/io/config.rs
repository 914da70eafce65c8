//! TOML configuration for the simulator and the analysis pipeline. Every
//! field uses external units (Hz, dBm, A, K); defaults mirror the documented
//! stage defaults and are individually overridable.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::hz_to_angular;
use crate::error::{Error, Result};
use crate::physics::{CavityParams, DispersionCal, TlsParams};
use crate::sweep::PipelineConfig;
use crate::synth::{Background, KappaMLaw, TruthSpec};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub simulate: Option<SimulateConfig>,
    pub pipeline: PipelineConfig,
}

pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CavityConfig {
    pub f_r_hz: f64,
    pub q_i: Option<f64>,
    pub q_c: Option<f64>,
    pub kappa_c_hwhm_hz: Option<f64>,
    pub kappa_i_hwhm_hz: Option<f64>,
}

impl Default for CavityConfig {
    fn default() -> Self {
        Self {
            f_r_hz: 5.23902e9,
            q_i: Some(7125.0),
            q_c: Some(5439.0),
            kappa_c_hwhm_hz: None,
            kappa_i_hwhm_hz: None,
        }
    }
}

impl CavityConfig {
    pub fn to_params(&self) -> Result<CavityParams> {
        let omega_r = hz_to_angular(self.f_r_hz);
        match (self.kappa_c_hwhm_hz, self.kappa_i_hwhm_hz, self.q_i, self.q_c) {
            (Some(kc), Some(ki), _, _) => {
                CavityParams::new(omega_r, hz_to_angular(kc), hz_to_angular(ki))
            }
            (None, None, Some(qi), Some(qc)) => CavityParams::from_quality_factors(omega_r, qi, qc),
            _ => Err(Error::Config(
                "cavity needs either kappa_c_hwhm_hz+kappa_i_hwhm_hz or q_i+q_c".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DispersionConfig {
    pub f_r_bare_hz: f64,
    pub f_m_zero_hz: f64,
    pub slope_hz_per_a: f64,
    pub g_hz: f64,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        Self {
            f_r_bare_hz: 5.23902e9,
            f_m_zero_hz: 4.9817e9,
            slope_hz_per_a: (5.23902e9 - 4.9817e9) / 2.09,
            g_hz: 10.39e6,
        }
    }
}

impl DispersionConfig {
    pub fn to_cal(&self) -> Result<DispersionCal> {
        DispersionCal::new(
            hz_to_angular(self.f_r_bare_hz),
            hz_to_angular(self.f_m_zero_hz),
            hz_to_angular(self.slope_hz_per_a),
            hz_to_angular(self.g_hz),
        )
    }
}

/// Magnon linewidth law of the generator: a constant or the TLS model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TlsLawConfig {
    /// "constant" or "tls".
    pub law: String,
    pub constant_hwhm_hz: f64,
    pub kappa_0_hwhm_hz: f64,
    pub p_c_dbm: f64,
    pub kappa_off_hwhm_hz: f64,
    pub f_ref_hz: f64,
}

impl Default for TlsLawConfig {
    fn default() -> Self {
        Self {
            law: "constant".into(),
            constant_hwhm_hz: 1.82e6,
            kappa_0_hwhm_hz: 1.05e6,
            p_c_dbm: -81.0,
            kappa_off_hwhm_hz: 0.91e6,
            f_ref_hz: 5.23902e9,
        }
    }
}

impl TlsLawConfig {
    pub fn to_law(&self) -> Result<KappaMLaw> {
        match self.law.as_str() {
            "constant" => Ok(KappaMLaw::Constant(hz_to_angular(self.constant_hwhm_hz))),
            "tls" => Ok(KappaMLaw::Tls(TlsParams::new(
                hz_to_angular(self.kappa_0_hwhm_hz),
                crate::physics::dbm_to_watts(self.p_c_dbm),
                hz_to_angular(self.kappa_off_hwhm_hz),
                hz_to_angular(self.f_ref_hz),
            )?)),
            other => Err(Error::Config(format!(
                "kappa_m law must be 'constant' or 'tls', got '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RippleConfig {
    pub amplitude: f64,
    pub period_hz: f64,
    pub phase: f64,
}

impl Default for RippleConfig {
    fn default() -> Self {
        Self {
            amplitude: 0.0,
            period_hz: 1e7,
            phase: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BackgroundConfig {
    pub poly: Vec<f64>,
    pub ripple: Option<RippleConfig>,
}

impl Default for BackgroundConfig {
    fn default() -> Self {
        Self {
            poly: vec![1.0],
            ripple: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct AxesConfig {
    pub f_start_hz: f64,
    pub f_stop_hz: f64,
    pub n_freq: usize,
    pub i_start_a: f64,
    pub i_stop_a: f64,
    pub n_current: usize,
}

impl Default for AxesConfig {
    fn default() -> Self {
        Self {
            f_start_hz: 5.23902e9 - 30e6,
            f_stop_hz: 5.23902e9 + 30e6,
            n_freq: 1001,
            i_start_a: 2.09 - 0.0844,
            i_stop_a: 2.09 + 0.0844,
            n_current: 41,
        }
    }
}

impl AxesConfig {
    pub fn axes(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.n_freq < 2 || self.n_current < 1 {
            return Err(Error::Config("axes need n_freq >= 2, n_current >= 1".into()));
        }
        if !(self.f_stop_hz > self.f_start_hz) {
            return Err(Error::Config("f_stop_hz must exceed f_start_hz".into()));
        }
        let f = linspace(self.f_start_hz, self.f_stop_hz, self.n_freq);
        let i = if self.n_current == 1 {
            vec![self.i_start_a]
        } else {
            linspace(self.i_start_a, self.i_stop_a, self.n_current)
        };
        Ok((f, i))
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CampaignConfig {
    pub temperatures_k: Vec<f64>,
    pub powers_dbm: Vec<f64>,
    /// Also emit a dedicated single-column resonator sweep.
    pub resonator: bool,
    pub resonator_current_a: f64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            temperatures_k: vec![0.055],
            powers_dbm: vec![-140.0],
            resonator: true,
            resonator_current_a: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateConfig {
    pub seed: u64,
    /// Additive amplitude noise σ; 10^(-SNR_dB/20) for a given SNR.
    pub noise_sigma: f64,
    pub emit_phase: bool,
    pub attenuation_db: f64,
    pub cavity: CavityConfig,
    pub dispersion: DispersionConfig,
    pub kappa_m: TlsLawConfig,
    pub background: BackgroundConfig,
    pub axes: AxesConfig,
    pub campaign: CampaignConfig,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            noise_sigma: 10f64.powf(-30.0 / 20.0),
            emit_phase: false,
            attenuation_db: -75.0,
            cavity: CavityConfig::default(),
            dispersion: DispersionConfig::default(),
            kappa_m: TlsLawConfig::default(),
            background: BackgroundConfig::default(),
            axes: AxesConfig::default(),
            campaign: CampaignConfig::default(),
        }
    }
}

impl SimulateConfig {
    pub fn truth_spec(&self, seed: u64) -> Result<TruthSpec> {
        Ok(TruthSpec {
            cav: self.cavity.to_params()?,
            cal: self.dispersion.to_cal()?,
            kappa_m_law: self.kappa_m.to_law()?,
            background: Background {
                poly: self.background.poly.clone(),
                ripple: self
                    .background
                    .ripple
                    .as_ref()
                    .map(|r| (r.amplitude, r.period_hz, r.phase)),
            },
            noise_sigma: self.noise_sigma,
            seed,
            emit_phase: self.emit_phase,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips_through_toml() {
        let config = Config {
            simulate: Some(SimulateConfig::default()),
            pipeline: PipelineConfig::default(),
        };
        let text = toml::to_string(&config).unwrap();
        let back: Config = toml::from_str(&text).unwrap();
        assert_eq!(back.pipeline.hash(), config.pipeline.hash());
        assert!(back.simulate.is_some());
    }

    #[test]
    fn overriding_a_single_key_keeps_the_rest_default() {
        let text = r#"
[pipeline]
exclusion_half_width_kappa_l = 7.5

[simulate]
seed = 99

[simulate.kappa_m]
law = "tls"
"#;
        let config: Config = toml::from_str(text).unwrap();
        assert_eq!(config.pipeline.exclusion_half_width_kappa_l, 7.5);
        assert_eq!(config.pipeline.track_depth_sigmas, 3.0);
        let sim = config.simulate.unwrap();
        assert_eq!(sim.seed, 99);
        assert!(matches!(sim.kappa_m.to_law().unwrap(), KappaMLaw::Tls(_)));
        assert_eq!(sim.axes.n_freq, 1001);
    }

    #[test]
    fn bad_law_is_a_config_error() {
        let text = r#"
[simulate.kappa_m]
law = "cubic"
"#;
        let config: Config = toml::from_str(text).unwrap();
        assert!(config.simulate.unwrap().kappa_m.to_law().is_err());
    }
}
