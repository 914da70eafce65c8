//! Spectroscopy toolkit for hybridized photon–magnon systems.
//!
//! The crate forward-models the complex reflection spectrum of a microwave
//! cavity strongly coupled to a magnon mode, generates synthetic measurement
//! sweeps with seeded noise, and runs the inverse analysis that turns raw 2D
//! reflection maps into an internal magnon linewidth and its two-level-system
//! (TLS) loss-tangent dependence on temperature and power.
//!
//! The main pieces:
//!
//! * [`physics`] — closed-form models: reflection coefficient, avoided-crossing
//!   branch frequencies, Hopfield fractions, TLS linewidth, theoretical coupling
//!   strength, excitation-number calibration.
//! * [`fit`] — a bounded Levenberg–Marquardt core with numeric Jacobians plus
//!   the concrete fits: single resonator, polariton cut, branch dispersion,
//!   TLS surface, and log-log power law.
//! * [`sweep`] — 2D sweep processing: baseline normalization, minima tracking,
//!   squared-gradient maps, per-cut linewidth extraction, excitation-ratio
//!   curves, and the staged pipeline.
//! * [`synth`] — ground-truth synthetic sweeps/campaigns and a brute-force
//!   grid-search oracle.
//! * [`io`] — the text sweep-file container, TOML configuration, and the JSON
//!   report bundle with plot-data emission.
//!
//! Internally every frequency and rate is an angular quantity in rad/s and all
//! linewidths are half widths at half maximum (HWHM). External interfaces
//! (files, configs, reports) use plain Hz and powers in dBm.

pub mod constants;
pub mod error;
pub mod fit;
pub mod io;
pub mod physics;
pub mod sweep;
pub mod synth;

pub use error::{Error, Result};

// The book chapters double as doctests so the guide can never drift from the
// API. `cargo test` compiles and runs every Rust snippet in book/src.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/reflection-model.md")]
    mod reflection_model {}
    #[doc = include_str!("../../../book/src/avoided-crossing.md")]
    mod avoided_crossing {}
    #[doc = include_str!("../../../book/src/tls-loss.md")]
    mod tls_loss {}
    #[doc = include_str!("../../../book/src/fitting.md")]
    mod fitting {}
    #[doc = include_str!("../../../book/src/sweeps.md")]
    mod sweeps {}
    #[doc = include_str!("../../../book/src/synthetic-data.md")]
    mod synthetic_data {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
}
