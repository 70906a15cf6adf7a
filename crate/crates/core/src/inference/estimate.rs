//! Estimators of the kick from split-detector voltages and from photon
//! positions.

use super::analytic::{crb_with_noise, Readout};
use super::numeric::geometry_factor;
use crate::detector::SplitDetector;
use crate::error::{Error, Result};
use crate::optics::port_probabilities;
use crate::sampler::{pairwise_sum, PhotonBatch, Port};
use crate::{Beam, Technique};
use serde::Serialize;
use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimationReport {
    pub k_hat: f64,
    /// Observed deviation of the estimate (1/m).
    pub delta_k: f64,
    /// Lower bound on `delta_k` (1/m).
    pub delta_k_bound: f64,
    /// `(delta_k_bound / delta_k)^2`.
    pub efficiency: f64,
    /// Photons contributing.
    pub n_used: u64,
    /// Samples (or photons, for the MLE) entering the statistics.
    pub samples_used: usize,
    /// Samples dropped because the detector was saturated.
    pub samples_saturated: usize,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    (mean, (pairwise_sum(&dev) / (n - 1.0)).sqrt())
}

fn efficiency(bound: f64, delta: f64) -> f64 {
    if delta > 0.0 {
        (bound / delta).powi(2)
    } else {
        f64::INFINITY
    }
}

/// Per-sample information of the split readout of one port: the analytic
/// port information times `2/pi`, folded into the bound by
/// [`crb_with_noise`].
pub fn split_bound(
    beam: &Beam,
    technique: &Technique,
    port: Port,
    det: &SplitDetector,
    photons_per_sample: f64,
) -> Result<f64> {
    let gain = geometry_factor(beam, technique, port)?;
    let weight = match (technique, port) {
        (Technique::WeakValue(wv), Port::Dark) => port_probabilities(wv).0,
        (Technique::WeakValue(wv), Port::Bright) => port_probabilities(wv).1,
        _ => 1.0,
    };
    let s = technique.spot_sigma(beam);
    let info0 = photons_per_sample * weight * (gain / s).powi(2);
    // Same conversion as `electronic_noise_momentum`, through this port's geometry.
    let j = det.sample_noise() * det.alpha_cal() * 2.0 * s / det.v_total() / gain.abs();
    crb_with_noise(info0, j, Readout::Split)
}

/// Inverts split-detector voltages sampled at constant `k` through the
/// linearized readout and the port geometry. Saturated samples are dropped.
pub fn estimate_k_split(
    samples: &[f64],
    det: &SplitDetector,
    beam: &Beam,
    technique: &Technique,
    port: Port,
    photons_per_sample: f64,
) -> Result<EstimationReport> {
    if samples.is_empty() {
        return Err(Error::Empty("voltage samples"));
    }
    let gain = geometry_factor(beam, technique, port)?;
    let s = technique.spot_sigma(beam);
    let ks: Vec<f64> = samples
        .iter()
        .filter(|v| !det.is_saturated(**v))
        .map(|&v| det.displacement(v, s) / gain)
        .collect();
    let saturated = samples.len() - ks.len();
    if ks.is_empty() {
        return Err(Error::Empty("unsaturated voltage samples"));
    }
    let (k_hat, delta_k) = mean_std(&ks);
    let bound = split_bound(beam, technique, port, det, photons_per_sample)?;
    Ok(EstimationReport {
        k_hat,
        delta_k,
        delta_k_bound: bound,
        efficiency: efficiency(bound, delta_k),
        n_used: (photons_per_sample * ks.len() as f64).round() as u64,
        samples_used: ks.len(),
        samples_saturated: saturated,
    })
}

/// Maximum-likelihood estimate for the Gaussian location family: the sample
/// mean divided by the port geometry. `delta_k` is the standard error.
pub fn estimate_k_mle(batch: &PhotonBatch, beam: &Beam, technique: &Technique) -> Result<EstimationReport> {
    if batch.is_empty() {
        return Err(Error::Empty("photon batch"));
    }
    let gain = geometry_factor(beam, technique, batch.port)?;
    let n = batch.len();
    let (mean, std) = mean_std(&batch.positions);
    let s = technique.spot_sigma(beam);
    let delta_k = std / gain.abs() / (n as f64).sqrt();
    let bound = s / gain.abs() / (n as f64).sqrt();
    Ok(EstimationReport {
        k_hat: mean / gain,
        delta_k,
        delta_k_bound: bound,
        efficiency: efficiency(bound, delta_k),
        n_used: n as u64,
        samples_used: n,
        samples_saturated: 0,
    })
}

/// Split-detector estimate from an explicit batch: the left/right
/// imbalance scaled by the ideal slope `s sqrt(pi/2)`.
pub fn estimate_k_split_batch(batch: &PhotonBatch, beam: &Beam, technique: &Technique) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Empty("photon batch"));
    }
    let gain = geometry_factor(beam, technique, batch.port)?;
    let right = batch.positions.iter().filter(|&&x| x > 0.0).count() as f64;
    let n = batch.len() as f64;
    let imbalance = (2.0 * right - n) / n;
    Ok(imbalance * technique.spot_sigma(beam) * FRAC_PI_2.sqrt() / gain)
}

/// Information of `n` photons in one port, conditional on the port.
pub fn port_information(beam: &Beam, technique: &Technique, port: Port, n: usize) -> Result<f64> {
    let gain = geometry_factor(beam, technique, port)?;
    Ok(n as f64 * (gain / technique.spot_sigma(beam)).powi(2))
}
