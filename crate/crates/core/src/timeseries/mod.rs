//! Scenario engine: drive waveforms, voltage traces, spectra and sweeps.

pub mod analysis;
pub mod drive;
pub mod engine;
pub mod spectrum;

pub use analysis::{
    closed_form_advantage, deviation_curve, fisher_sweep, ideal_slope_sweep, jitter_comparison, mc_slope_sweep,
    simulate_spectra, slope_fit_r, DeviationCurve, DeviationPoint, FisherSweep, JitterSummary, ModKind,
    PlateauAcquisition, SlopeFit, SlopeSweep, SpectralAcquisition, SpectrumPair, TimeDomainAcquisition,
};
pub use drive::{DriveKind, DriveWaveform};
pub use engine::{run_segments, run_timeseries, Channel, DetectorSettings, Simulation, Traces};
pub use spectrum::{averaged_spectrum, peak_ratio_table, peak_rows, PeakFreqs, PeakRow, PeakTable, SpectrumResult};
