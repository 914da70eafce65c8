//! Closed-form physical models of the hybridized photon–magnon system.
//!
//! Everything here is a pure function of its inputs: no shared state, safe to
//! call from any number of threads. Frequencies and rates are angular (rad/s),
//! linewidths are HWHM.

mod coupling;
mod dispersion;
mod excitation;
mod params;
mod reflection;
mod tls;

pub use coupling::coupling_strength_theory;
pub use dispersion::{branch_frequencies, hopfield_fractions, magnon_dispersion};
pub use excitation::{
    dbm_to_watts, excitation_number, magnon_number_resonant, magnon_number_weighted,
    watts_to_dbm,
};
pub use params::{
    CavityParams, DispersionCal, HopfieldFractions, MagnonParams, MaterialParams, TlsParams,
};
pub use reflection::{reflection_amplitude, reflection_s11, s11_model};
pub use tls::tls_linewidth;
