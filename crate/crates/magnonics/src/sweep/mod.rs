//! 2D spectroscopy sweeps and the processing stages that turn them into
//! linewidth tables: baseline normalization, branch-minima tracking,
//! squared-gradient maps, per-cut fits, excitation-ratio curves, and the
//! staged end-to-end pipeline.

mod baseline;
mod extract;
mod gradient;
mod minima;
mod pipeline;
mod ratio;

pub use baseline::{
    exclusion_from_dispersion, normalize_baseline, BaselineWeighting, ExclusionWindows,
    TailCorrection,
};
pub use extract::{
    extract_linewidths, CutFitRecord, ExtractOptions, ExtractOutput, GuardBand, LinewidthRow,
    LinewidthTable,
};
pub use gradient::gradient_squared_map;
pub use minima::{track_minima, BranchTrace, TrackOptions, TrackResult};
pub use pipeline::{
    preliminary_normalization, reference_index, run_pipeline, CavityOverride, CavityReport,
    DispersionReport, FitRecord, PipelineConfig, PipelineInput, ReportBundle, ShareCurveReport,
    SharePointReport, StageParam, TlsReport, TraceReport,
};
pub use ratio::{excitation_ratio_curve, BranchEnergy, RatioOptions, SharePoint};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fit::SpectrumCut;

/// Dense row-major 2D array; rows index frequency, columns index current.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2 {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl Grid2 {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Sweep("ragged rows in 2D grid".into()));
        }
        Ok(Self {
            n_rows,
            n_cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n_cols + col]
    }

    #[inline]
    pub fn at_mut(&mut self, row: usize, col: usize) -> &mut f64 {
        &mut self.data[row * self.n_cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.at(r, col)).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Sweep metadata carried through every stage.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepMeta {
    pub temperature_k: f64,
    pub power_dbm: f64,
    pub attenuation_db: f64,
    /// Free-form key/value tags (ordered for deterministic serialization).
    pub tags: BTreeMap<String, String>,
    /// Processing notes appended by the stages (e.g. interpolated baseline rows).
    pub notes: Vec<String>,
}

impl SweepMeta {
    pub fn new(temperature_k: f64, power_dbm: f64, attenuation_db: f64) -> Self {
        Self {
            temperature_k,
            power_dbm,
            attenuation_db,
            tags: BTreeMap::new(),
            notes: Vec::new(),
        }
    }
}

/// A 2D reflection map over probe frequency (Hz, rows) × bias current
/// (A, columns), with linear amplitude and optional phase (radians).
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    freq_hz: Vec<f64>,
    current_a: Vec<f64>,
    amplitude: Grid2,
    phase: Option<Grid2>,
    pub meta: SweepMeta,
}

fn strictly_increasing(axis: &[f64]) -> bool {
    axis.windows(2).all(|w| w[1] > w[0])
}

fn strictly_monotone(axis: &[f64]) -> bool {
    axis.len() < 2 || strictly_increasing(axis) || axis.windows(2).all(|w| w[1] < w[0])
}

impl Sweep {
    pub fn new(
        freq_hz: Vec<f64>,
        current_a: Vec<f64>,
        amplitude: Grid2,
        phase: Option<Grid2>,
        meta: SweepMeta,
    ) -> Result<Self> {
        if freq_hz.is_empty() || current_a.is_empty() {
            return Err(Error::Sweep("empty axis".into()));
        }
        if amplitude.n_rows() != freq_hz.len() || amplitude.n_cols() != current_a.len() {
            return Err(Error::Sweep(format!(
                "amplitude shape {}x{} does not match axes {}x{}",
                amplitude.n_rows(),
                amplitude.n_cols(),
                freq_hz.len(),
                current_a.len()
            )));
        }
        if let Some(ph) = &phase {
            if ph.n_rows() != freq_hz.len() || ph.n_cols() != current_a.len() {
                return Err(Error::Sweep("phase shape does not match axes".into()));
            }
        }
        if freq_hz.iter().any(|v| !v.is_finite()) || current_a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Sweep("non-finite axis values".into()));
        }
        if !strictly_increasing(&freq_hz) {
            return Err(Error::Sweep("frequency axis must be strictly increasing".into()));
        }
        if !strictly_monotone(&current_a) {
            return Err(Error::Sweep("current axis must be strictly monotone".into()));
        }
        if amplitude.data().iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::Sweep("amplitude entries must be finite and >= 0".into()));
        }
        if !(meta.temperature_k > 0.0) {
            return Err(Error::Sweep(format!(
                "temperature must be positive, got {}",
                meta.temperature_k
            )));
        }
        Ok(Self {
            freq_hz,
            current_a,
            amplitude,
            phase,
            meta,
        })
    }

    pub fn freq_hz(&self) -> &[f64] {
        &self.freq_hz
    }

    pub fn current_a(&self) -> &[f64] {
        &self.current_a
    }

    pub fn amplitude(&self) -> &Grid2 {
        &self.amplitude
    }

    pub fn phase(&self) -> Option<&Grid2> {
        self.phase.as_ref()
    }

    pub fn n_freq(&self) -> usize {
        self.freq_hz.len()
    }

    pub fn n_current(&self) -> usize {
        self.current_a.len()
    }

    /// Median frequency step (Hz); the tracking resolution.
    pub fn freq_step(&self) -> f64 {
        if self.freq_hz.len() < 2 {
            return 0.0;
        }
        let mut steps: Vec<f64> = self.freq_hz.windows(2).map(|w| w[1] - w[0]).collect();
        steps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        steps[steps.len() / 2]
    }

    /// Cross-section spectrum at one current column.
    pub fn cut(&self, col: usize) -> SpectrumCut {
        SpectrumCut::new(
            self.freq_hz.clone(),
            self.amplitude.column(col),
            self.phase.as_ref().map(|p| p.column(col)),
        )
    }

    /// Column index whose current is closest to `current_a`.
    pub fn nearest_column(&self, current_a: f64) -> usize {
        self.current_a
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (a.1 - current_a)
                    .abs()
                    .partial_cmp(&(b.1 - current_a).abs())
                    .unwrap()
            })
            .map(|(i, _)| i)
            .unwrap()
    }

    /// Replace the amplitude grid, preserving axes and metadata.
    pub(crate) fn with_amplitude(&self, amplitude: Grid2, meta: SweepMeta) -> Result<Self> {
        Self::new(
            self.freq_hz.clone(),
            self.current_a.clone(),
            amplitude,
            self.phase.clone(),
            meta,
        )
    }
}
