//! Domain parameter types with validated invariants.

use crate::error::{Error, Result};

fn ensure_finite(value: f64, name: &'static str) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(name))
    }
}

/// Cavity resonance parameters: angular frequency plus coupling and internal
/// half-linewidths (HWHM, rad/s). The loaded linewidth and the quality factors
/// are derived quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    omega_r: f64,
    kappa_c: f64,
    kappa_i: f64,
}

impl CavityParams {
    pub fn new(omega_r: f64, kappa_c: f64, kappa_i: f64) -> Result<Self> {
        ensure_finite(omega_r, "omega_r")?;
        ensure_finite(kappa_c, "kappa_c")?;
        ensure_finite(kappa_i, "kappa_i")?;
        if omega_r <= 0.0 || kappa_c <= 0.0 || kappa_i <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "cavity rates must be strictly positive (omega_r={omega_r}, kappa_c={kappa_c}, kappa_i={kappa_i})"
            )));
        }
        Ok(Self {
            omega_r,
            kappa_c,
            kappa_i,
        })
    }

    /// Construct from internal and coupling quality factors.
    pub fn from_quality_factors(omega_r: f64, q_i: f64, q_c: f64) -> Result<Self> {
        if q_i <= 0.0 || q_c <= 0.0 {
            return Err(Error::InvalidParam(
                "quality factors must be strictly positive".into(),
            ));
        }
        Self::new(omega_r, omega_r / (2.0 * q_c), omega_r / (2.0 * q_i))
    }

    /// Construct from loaded and coupling quality factors (Q_l < Q_c required,
    /// since the internal channel must carry the remaining loss).
    pub fn from_loaded_and_coupling_q(omega_r: f64, q_l: f64, q_c: f64) -> Result<Self> {
        if q_l <= 0.0 || q_c <= 0.0 || q_l >= q_c {
            return Err(Error::InvalidParam(format!(
                "need 0 < Q_l < Q_c, got Q_l={q_l}, Q_c={q_c}"
            )));
        }
        let kappa_c = omega_r / (2.0 * q_c);
        let kappa_l = omega_r / (2.0 * q_l);
        Self::new(omega_r, kappa_c, kappa_l - kappa_c)
    }

    pub fn omega_r(&self) -> f64 {
        self.omega_r
    }
    pub fn kappa_c(&self) -> f64 {
        self.kappa_c
    }
    pub fn kappa_i(&self) -> f64 {
        self.kappa_i
    }
    /// Loaded half-linewidth κ_l = κ_c + κ_i.
    pub fn kappa_l(&self) -> f64 {
        self.kappa_c + self.kappa_i
    }
    pub fn q_c(&self) -> f64 {
        self.omega_r / (2.0 * self.kappa_c)
    }
    pub fn q_i(&self) -> f64 {
        self.omega_r / (2.0 * self.kappa_i)
    }
    /// Loaded quality factor (1/Q_i + 1/Q_c)⁻¹.
    pub fn q_l(&self) -> f64 {
        1.0 / (1.0 / self.q_i() + 1.0 / self.q_c())
    }
}

/// Magnon mode parameters: angular frequency, internal half-linewidth (HWHM),
/// and coupling strength to the cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnonParams {
    omega_m: f64,
    kappa_m: f64,
    g: f64,
}

impl MagnonParams {
    pub fn new(omega_m: f64, kappa_m: f64, g: f64) -> Result<Self> {
        ensure_finite(omega_m, "omega_m")?;
        ensure_finite(kappa_m, "kappa_m")?;
        ensure_finite(g, "g")?;
        if kappa_m <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "kappa_m must be strictly positive, got {kappa_m}"
            )));
        }
        if g < 0.0 {
            return Err(Error::InvalidParam(format!(
                "coupling strength must be non-negative, got {g}"
            )));
        }
        Ok(Self { omega_m, kappa_m, g })
    }

    pub fn omega_m(&self) -> f64 {
        self.omega_m
    }
    pub fn kappa_m(&self) -> f64 {
        self.kappa_m
    }
    pub fn g(&self) -> f64 {
        self.g
    }
}

/// Parameters of the TLS loss-tangent model for the magnon linewidth:
/// κ_m(T, P) = κ_0·tanh(ħω_ref/2k_BT)/√(1 + P/P_c) + κ_off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlsParams {
    /// TLS-limited linewidth amplitude (rad/s).
    pub kappa_0: f64,
    /// Critical power at the input port (W).
    pub p_c: f64,
    /// TLS-independent offset linewidth (rad/s).
    pub kappa_off: f64,
    /// Reference angular frequency in the tanh argument (rad/s).
    pub omega_ref: f64,
}

impl TlsParams {
    pub fn new(kappa_0: f64, p_c: f64, kappa_off: f64, omega_ref: f64) -> Result<Self> {
        for (v, name) in [
            (kappa_0, "kappa_0"),
            (p_c, "p_c"),
            (kappa_off, "kappa_off"),
            (omega_ref, "omega_ref"),
        ] {
            ensure_finite(v, name)?;
        }
        if kappa_0 < 0.0 || kappa_off < 0.0 {
            return Err(Error::InvalidParam(
                "TLS linewidth amplitudes must be non-negative".into(),
            ));
        }
        if p_c <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "critical power must be strictly positive, got {p_c}"
            )));
        }
        Ok(Self {
            kappa_0,
            p_c,
            kappa_off,
            omega_ref,
        })
    }
}

/// Material/geometry inputs of the theoretical coupling strength. Physical
/// constants enter via [`crate::constants`], fixed at CODATA 2018 values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Electron gyromagnetic ratio (rad·s⁻¹·T⁻¹).
    pub gamma_e: f64,
    /// Spatial overlap factor between microwave and magnon field, in (0, 1].
    pub eta: f64,
    /// Cavity mode volume (m³).
    pub v_a: f64,
    /// Total number of spins.
    pub n_s: f64,
    /// Spin number per site.
    pub s: f64,
}

impl MaterialParams {
    pub fn new(gamma_e: f64, eta: f64, v_a: f64, n_s: f64, s: f64) -> Result<Self> {
        for (v, name) in [
            (gamma_e, "gamma_e"),
            (eta, "eta"),
            (v_a, "v_a"),
            (n_s, "n_s"),
            (s, "s"),
        ] {
            ensure_finite(v, name)?;
        }
        if !(eta >= 0.0 && eta <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "overlap factor must lie in [0, 1], got {eta}"
            )));
        }
        if v_a <= 0.0 || n_s <= 0.0 || s <= 0.0 {
            return Err(Error::InvalidParam(
                "mode volume, spin count and spin number must be strictly positive".into(),
            ));
        }
        Ok(Self {
            gamma_e,
            eta,
            v_a,
            n_s,
            s,
        })
    }
}

/// Calibration of the avoided crossing: bare cavity frequency, zero-current
/// magnon frequency, linear magnon tuning rate against coil current, and
/// coupling strength. All angular (rad/s; slope rad/s per A).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionCal {
    pub omega_r_bare: f64,
    pub omega_m_zero: f64,
    pub slope: f64,
    pub g: f64,
}

impl DispersionCal {
    pub fn new(omega_r_bare: f64, omega_m_zero: f64, slope: f64, g: f64) -> Result<Self> {
        for (v, name) in [
            (omega_r_bare, "omega_r_bare"),
            (omega_m_zero, "omega_m_zero"),
            (slope, "slope"),
            (g, "g"),
        ] {
            ensure_finite(v, name)?;
        }
        Ok(Self {
            omega_r_bare,
            omega_m_zero,
            slope,
            g,
        })
    }

    /// Current at which the magnon crosses the bare cavity frequency.
    pub fn degeneracy_current(&self) -> f64 {
        (self.omega_r_bare - self.omega_m_zero) / self.slope
    }
}

/// Photon/magnon content of the two polariton branches, from the eigenvectors
/// of the 2×2 coupling Hamiltonian. Each branch's two fractions sum to one,
/// and `upper_magnon == lower_photon` by the eigenvector symmetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfieldFractions {
    pub upper_magnon: f64,
    pub upper_photon: f64,
    pub lower_magnon: f64,
    pub lower_photon: f64,
}
