//! Split-detector readout.
//!
//! The normalized signal of a beam of deviation `s` centred at `mu` on an
//! ideal knife-edge split detector is `erf(mu / (s sqrt 2))`. Its slope at
//! the origin is `sqrt(2/pi) / s`, i.e. the linearized form
//! `V / V_total = dx / (2 s alpha)` with `alpha = sqrt(pi/8)`.
//!
//! `sigma_j` is a noise density in V·√s: one sample of length `T` carries
//! Gaussian noise of deviation `sigma_j / sqrt(T)`.

use crate::error::{Error, Result};
use crate::sampler::{PhotonBatch, SplitCounts};
use crate::{Beam, Technique};
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{FRAC_PI_8, SQRT_2};

/// Calibration constant measured on the reference detector.
pub const MEASURED_ALPHA_CAL: f64 = 0.66;

/// `sqrt(pi/8)`, the calibration constant of an ideal split detector.
pub fn alpha_cal_ideal() -> f64 {
    FRAC_PI_8.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitDetector {
    alpha_cal: f64,
    sigma_j: f64,
    v_total: f64,
    sample_time: f64,
    saturation_v: Option<f64>,
}

impl Default for SplitDetector {
    fn default() -> Self {
        Self {
            alpha_cal: MEASURED_ALPHA_CAL,
            sigma_j: 0.0,
            v_total: 1.0,
            sample_time: 8e-6,
            saturation_v: None,
        }
    }
}

impl SplitDetector {
    pub fn new(alpha_cal: f64, sigma_j: f64, v_total: f64, sample_time: f64) -> Result<Self> {
        if !(alpha_cal > 0.0) || !alpha_cal.is_finite() {
            return Err(Error::domain("alpha_cal", alpha_cal, "alpha_cal > 0"));
        }
        if !(sigma_j >= 0.0) || !sigma_j.is_finite() {
            return Err(Error::domain("sigma_J", sigma_j, "sigma_J >= 0"));
        }
        if !(v_total > 0.0) || !v_total.is_finite() {
            return Err(Error::domain("v_total", v_total, "v_total > 0"));
        }
        if !(sample_time > 0.0) || !sample_time.is_finite() {
            return Err(Error::domain("T", sample_time, "T > 0"));
        }
        Ok(Self {
            alpha_cal,
            sigma_j,
            v_total,
            sample_time,
            saturation_v: None,
        })
    }

    pub fn with_saturation(mut self, volts: Option<f64>) -> Result<Self> {
        if let Some(v) = volts {
            if !(v > 0.0) {
                return Err(Error::domain("saturation_v", v, "saturation_v > 0"));
            }
        }
        self.saturation_v = volts;
        Ok(self)
    }

    pub fn with_sample_time(mut self, sample_time: f64) -> Result<Self> {
        if !(sample_time > 0.0) || !sample_time.is_finite() {
            return Err(Error::domain("T", sample_time, "T > 0"));
        }
        self.sample_time = sample_time;
        Ok(self)
    }

    pub fn with_v_total(mut self, v_total: f64) -> Result<Self> {
        if !(v_total > 0.0) || !v_total.is_finite() {
            return Err(Error::domain("v_total", v_total, "v_total > 0"));
        }
        self.v_total = v_total;
        Ok(self)
    }

    pub fn alpha_cal(&self) -> f64 {
        self.alpha_cal
    }

    pub fn sigma_j(&self) -> f64 {
        self.sigma_j
    }

    pub fn v_total(&self) -> f64 {
        self.v_total
    }

    pub fn sample_time(&self) -> f64 {
        self.sample_time
    }

    pub fn saturation_v(&self) -> Option<f64> {
        self.saturation_v
    }

    /// Electronic noise deviation of one sample (V).
    pub fn sample_noise(&self) -> f64 {
        self.sigma_j / self.sample_time.sqrt()
    }

    pub fn is_saturated(&self, volts: f64) -> bool {
        self.saturation_v.is_some_and(|s| volts.abs() >= s)
    }

    /// Linearized inversion `dx = 2 s alpha V / V_total`.
    pub fn displacement(&self, volts: f64, spot_sigma: f64) -> f64 {
        2.0 * spot_sigma * self.alpha_cal * volts / self.v_total
    }

    /// Linearized forward model `V = V_total dx / (2 s alpha)`.
    pub fn linear_voltage(&self, displacement: f64, spot_sigma: f64) -> f64 {
        self.v_total * displacement / (2.0 * spot_sigma * self.alpha_cal)
    }

    fn finish<R: Rng + ?Sized>(&self, normalized: f64, rng: &mut R) -> f64 {
        let mut v = self.v_total * normalized;
        if self.sigma_j > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            v += self.sample_noise() * z;
        }
        match self.saturation_v {
            Some(s) => v.clamp(-s, s),
            None => v,
        }
    }
}

/// Exact normalized difference `2 Phi(mu/s) - 1` for a Gaussian spot.
pub fn split_signal_exact(pdf_mean: f64, pdf_std: f64) -> Result<f64> {
    if !(pdf_std > 0.0) {
        return Err(Error::domain("pdf_std", pdf_std, "pdf_std > 0"));
    }
    Ok(libm::erf(pdf_mean / (pdf_std * SQRT_2)))
}

/// What to do with a batch that holds no photons.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmptyBatch {
    Error,
    /// Return electronic noise alone.
    NoiseOnly,
}

/// One voltage sample from an explicit photon batch.
pub fn batch_to_voltage<R: Rng + ?Sized>(
    batch: &PhotonBatch,
    det: &SplitDetector,
    rng: &mut R,
    empty: EmptyBatch,
) -> Result<f64> {
    counts_to_voltage(SplitCounts::from_batch(batch), det, rng, empty)
}

/// One voltage sample from split counts.
pub fn counts_to_voltage<R: Rng + ?Sized>(
    counts: SplitCounts,
    det: &SplitDetector,
    rng: &mut R,
    empty: EmptyBatch,
) -> Result<f64> {
    let n = counts.total();
    let normalized = if n == 0 {
        match empty {
            EmptyBatch::Error => return Err(Error::Empty("photon batch")),
            EmptyBatch::NoiseOnly => 0.0,
        }
    } else {
        (counts.right as f64 - counts.left as f64) / n as f64
    };
    Ok(det.finish(normalized, rng))
}

/// Electronic noise expressed as a momentum deviation 𝒥 (1/m).
///
/// WVT: `(sigma_j/sqrt T) (alpha 2 sigma / V_total) tan(phi/2) / (2 sigma^2)`.
/// ST: `(sigma_j/sqrt T) (alpha 2 sigma_f / V_total) k0 / f`.
pub fn electronic_noise_momentum(det: &SplitDetector, beam: &Beam, technique: &Technique) -> f64 {
    let volts = det.sample_noise();
    match technique {
        Technique::WeakValue(wv) => {
            let s = beam.sigma();
            volts * det.alpha_cal() * 2.0 * s / det.v_total() * wv.half_tan() / (2.0 * s * s)
        }
        Technique::Standard(st) => {
            volts * det.alpha_cal() * 2.0 * st.sigma_f() / det.v_total() * beam.k0() / st.focal_length()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{BeamParams, StConfig, WvConfig};
    use crate::rng::{domain, StreamId};
    use crate::sampler::Port;
    use approx::assert_relative_eq;

    fn rng() -> rand_chacha::ChaCha8Rng {
        StreamId::new(5, domain::ELECTRONIC, 0).rng()
    }

    fn batch(xs: Vec<f64>) -> PhotonBatch {
        PhotonBatch {
            positions: xs,
            port: Port::Standard,
            t: 0.0,
            seed_path: StreamId::new(0, 0, 0),
        }
    }

    #[test]
    fn exact_signal_examples() {
        assert_eq!(split_signal_exact(0.0, 1.0).unwrap(), 0.0);
        assert_relative_eq!(split_signal_exact(50.0, 1.0).unwrap(), 1.0);
        assert_relative_eq!(split_signal_exact(-50.0, 1.0).unwrap(), -1.0);
        let s = 2e-3;
        let h = 1e-9;
        let slope = (split_signal_exact(h, s).unwrap() - split_signal_exact(-h, s).unwrap()) / (2.0 * h);
        assert_relative_eq!(slope, (2.0 / std::f64::consts::PI).sqrt() / s, max_relative = 1e-8);
        assert_relative_eq!(slope, 1.0 / (2.0 * s * alpha_cal_ideal()), max_relative = 1e-8);
        assert_relative_eq!(alpha_cal_ideal(), 0.62666, max_relative = 1e-5);
        assert!(split_signal_exact(0.0, 0.0).is_err());
    }

    #[test]
    fn one_sided_beam_reads_v_total() {
        let det = SplitDetector::new(0.66, 0.0, 2.5, 8e-6).unwrap();
        let v = batch_to_voltage(&batch(vec![1.0, 2.0, 3.0]), &det, &mut rng(), EmptyBatch::Error).unwrap();
        assert_eq!(v, 2.5);
    }

    #[test]
    fn saturation_clips() {
        let det = SplitDetector::new(0.66, 0.0, 1.0, 8e-6)
            .unwrap()
            .with_saturation(Some(0.8))
            .unwrap();
        let v = batch_to_voltage(&batch(vec![1.0; 10]), &det, &mut rng(), EmptyBatch::Error).unwrap();
        assert_eq!(v, 0.8);
        assert!(det.is_saturated(v));
    }

    #[test]
    fn empty_batch_modes() {
        let det = SplitDetector::new(0.66, 1e-6, 1.0, 1e-6).unwrap();
        assert!(matches!(
            batch_to_voltage(&batch(vec![]), &det, &mut rng(), EmptyBatch::Error),
            Err(Error::Empty(_))
        ));
        let v = batch_to_voltage(&batch(vec![]), &det, &mut rng(), EmptyBatch::NoiseOnly).unwrap();
        assert!(v != 0.0 && v.abs() < 10e-3);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(SplitDetector::new(0.0, 0.0, 1.0, 1.0).is_err());
        assert!(SplitDetector::new(0.66, -1.0, 1.0, 1.0).is_err());
        assert!(SplitDetector::new(0.66, 0.0, 0.0, 1.0).is_err());
        assert!(SplitDetector::new(0.66, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn electronic_noise_examples() {
        let beam = BeamParams::new(1.075e-3, 780e-9).unwrap();
        let wv = Technique::WeakValue(WvConfig::new(0.38, 0.34).unwrap());
        let st = Technique::Standard(StConfig::new(1.0, &beam).unwrap());
        let quiet = SplitDetector::new(0.66, 0.0, 1.0, 8e-6).unwrap();
        assert_eq!(electronic_noise_momentum(&quiet, &beam, &wv), 0.0);

        let det = SplitDetector::new(0.66, 4.6e-7, 1.0, 8e-6).unwrap();
        let half = det.with_sample_time(4e-6).unwrap();
        assert_relative_eq!(
            electronic_noise_momentum(&half, &beam, &st),
            2f64.sqrt() * electronic_noise_momentum(&det, &beam, &st),
            max_relative = 1e-14
        );
        let ratio = electronic_noise_momentum(&det, &beam, &wv) / electronic_noise_momentum(&det, &beam, &st);
        assert_relative_eq!(ratio, 0.19f64.tan(), max_relative = 1e-12);
    }
}
