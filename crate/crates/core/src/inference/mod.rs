//! Fisher information, Cramér–Rao bounds and estimators for the kick `k`.

pub mod analytic;
pub mod estimate;
pub mod numeric;
pub mod quadrature;

pub use analytic::{
    crb_with_noise, deviation_ratio, efficiency_angle_bound, fisher_analytic, fisher_fraction_from_snr,
    fisher_with_angular_jitter, fisher_with_detector_jitter, info_full, FisherReport, Readout,
};
pub use estimate::{
    estimate_k_mle, estimate_k_split, estimate_k_split_batch, port_information, split_bound, EstimationReport,
};
pub use numeric::{
    binary_outcome_information, binary_outcome_information_numeric, fisher_numeric, geometry_factor, DensityFamily,
    GaussianShiftFamily,
};
