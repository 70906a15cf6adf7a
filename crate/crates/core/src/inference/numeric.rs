//! Quadrature Fisher information and the binary split-detector outcome.

use super::quadrature::integrate;
use crate::error::{Error, Result};
use crate::optics::port_probabilities;
use crate::sampler::{normal_cdf, Port};
use crate::{Beam, Technique};
use std::f64::consts::TAU;

/// Largest accepted relative normalization error.
pub const NORMALIZATION_TOL: f64 = 1e-6;
/// Relative tolerance of the score integral; the finite-difference score
/// carries roundoff near 1e-11 relative.
pub const SCORE_REL_TOL: f64 = 1e-10;
/// Half-width of the integration window in standard deviations.
pub const WINDOW_SIGMAS: f64 = 8.0;

/// A density `P(x; k)` parameterized by the kick.
pub trait DensityFamily: Sync {
    fn ln_density(&self, x: f64, k: f64) -> f64;

    fn density(&self, x: f64, k: f64) -> f64 {
        self.ln_density(x, k).exp()
    }

    /// Integration window holding all but a negligible tail at `k`.
    fn window(&self, k: f64) -> (f64, f64);

    /// Change of `k` that moves the density by about one width.
    fn parameter_scale(&self) -> f64;

    /// Total probability of the family; below 1 for a single port.
    fn mass(&self) -> f64 {
        1.0
    }
}

/// `weight * N(x; offset + gain k, std^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianShiftFamily {
    pub weight: f64,
    pub gain: f64,
    pub offset: f64,
    pub std: f64,
}

impl GaussianShiftFamily {
    pub fn new(weight: f64, gain: f64, offset: f64, std: f64) -> Result<Self> {
        if !(weight > 0.0 && weight <= 1.0) {
            return Err(Error::domain("weight", weight, "0 < weight <= 1"));
        }
        if !(std > 0.0) {
            return Err(Error::domain("std", std, "std > 0"));
        }
        if gain == 0.0 || !gain.is_finite() {
            return Err(Error::domain("gain", gain, "finite nonzero gain"));
        }
        Ok(Self {
            weight,
            gain,
            offset,
            std,
        })
    }

    /// The density one port of a technique produces, including the port
    /// weight.
    pub fn for_port(beam: &Beam, technique: &Technique, port: Port) -> Result<Self> {
        let gain = geometry_factor(beam, technique, port)?;
        let weight = match (technique, port) {
            (Technique::WeakValue(wv), Port::Dark) => port_probabilities(wv).0,
            (Technique::WeakValue(wv), Port::Bright) => port_probabilities(wv).1,
            _ => 1.0,
        };
        Self::new(weight, gain, 0.0, technique.spot_sigma(beam))
    }

    pub fn mean(&self, k: f64) -> f64 {
        self.offset + self.gain * k
    }

    /// `weight gain^2 / std^2`.
    pub fn information(&self) -> f64 {
        self.weight * (self.gain / self.std).powi(2)
    }
}

impl DensityFamily for GaussianShiftFamily {
    fn ln_density(&self, x: f64, k: f64) -> f64 {
        let z = (x - self.mean(k)) / self.std;
        self.weight.ln() - 0.5 * z * z - (self.std * TAU.sqrt()).ln()
    }

    fn window(&self, k: f64) -> (f64, f64) {
        let m = self.mean(k);
        (m - WINDOW_SIGMAS * self.std, m + WINDOW_SIGMAS * self.std)
    }

    fn parameter_scale(&self) -> f64 {
        (self.std / self.gain).abs()
    }

    fn mass(&self) -> f64 {
        self.weight
    }
}

/// Signed displacement per unit kick for one port: dark `-2 sigma^2
/// cot(phi/2)`, bright `+2 sigma^2 tan(phi/2)`, ST `f / k0`.
pub fn geometry_factor(beam: &Beam, technique: &Technique, port: Port) -> Result<f64> {
    let s2 = beam.sigma() * beam.sigma();
    match (technique, port) {
        (Technique::WeakValue(wv), Port::Dark) => Ok(-2.0 * s2 * wv.half_cot()),
        (Technique::WeakValue(wv), Port::Bright) => Ok(2.0 * s2 * wv.half_tan()),
        (Technique::Standard(st), Port::Standard) => Ok(st.focal_length() / beam.k0()),
        _ => Err(Error::Degenerate(format!(
            "port `{}` does not belong to this technique",
            port.name()
        ))),
    }
}

/// Default central-difference step: `max(1e-6 |k|, 1e-4 scale)`.
pub fn default_step(k: f64, parameter_scale: f64) -> f64 {
    (1e-6 * k.abs()).max(1e-4 * parameter_scale)
}

/// `∫ P(x;k) [∂k ln P(x;k)]² dx` with a central-difference score, per photon.
pub fn fisher_numeric(family: &impl DensityFamily, k: f64, step: Option<f64>) -> Result<f64> {
    let h = step.unwrap_or_else(|| default_step(k, family.parameter_scale()));
    if !(h > 0.0) || !h.is_finite() || k + h == k || k - h == k {
        return Err(Error::StepUnderflow(h));
    }
    let (a, b) = family.window(k);
    let mass = integrate(|x| family.density(x, k), a, b, 1e-300, 1e-13)?.value;
    if (mass / family.mass() - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized(mass / family.mass()));
    }
    let integrand = |x: f64| {
        let score = (family.ln_density(x, k + h) - family.ln_density(x, k - h)) / (2.0 * h);
        family.density(x, k) * score * score
    };
    Ok(integrate(integrand, a, b, 1e-300, SCORE_REL_TOL)?.value)
}

/// Fisher information per photon of the binary left/right outcome of a
/// split detector at `x = 0`, for a spot `N(mean, std^2)` whose mean moves by
/// `gain` per unit kick: `(gain phi(mu/s)/s)^2 / (p (1 - p))`.
pub fn binary_outcome_information(mean: f64, std: f64, gain: f64) -> Result<f64> {
    if !(std > 0.0) {
        return Err(Error::domain("std", std, "std > 0"));
    }
    let z = mean / std;
    let p = normal_cdf(z);
    let density = (-0.5 * z * z).exp() / TAU.sqrt();
    let dp = gain * density / std;
    let var = p * (1.0 - p);
    if var == 0.0 {
        return Ok(0.0);
    }
    Ok(dp * dp / var)
}

/// Same quantity with the derivative of `p(k)` taken numerically.
pub fn binary_outcome_information_numeric(mean: f64, std: f64, gain: f64) -> Result<f64> {
    if !(std > 0.0) {
        return Err(Error::domain("std", std, "std > 0"));
    }
    let h = 1e-3 * (std / gain).abs();
    let p = |dk: f64| 1.0 - normal_cdf(-(mean + gain * dk) / std);
    let dp = (8.0 * (p(h) - p(-h)) - (p(2.0 * h) - p(-2.0 * h))) / (12.0 * h);
    let p0 = p(0.0);
    Ok(dp * dp / (p0 * (1.0 - p0)))
}
