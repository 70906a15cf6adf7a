//! Drive waveforms for the kick `k(t)`.

use crate::error::{Error, Result};
use crate::units;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriveKind {
    Sine,
    /// Rise, plateau, fall and low level, each half period split into a ramp
    /// of `rise_time` and a flat part.
    Trapezoid,
    /// Constant at `amplitude`.
    Constant,
}

/// `amplitude` is in kick units (1/m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveWaveform {
    pub kind: DriveKind,
    pub amplitude: f64,
    #[serde(with = "units::frequency", default)]
    pub frequency: f64,
    #[serde(with = "units::time", default)]
    pub rise_time: f64,
    #[serde(default)]
    pub phase: f64,
}

impl DriveWaveform {
    pub fn sine(amplitude: f64, frequency: f64, phase: f64) -> Result<Self> {
        let d = Self {
            kind: DriveKind::Sine,
            amplitude,
            frequency,
            rise_time: 0.0,
            phase,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn trapezoid(amplitude: f64, frequency: f64, rise_time: f64) -> Result<Self> {
        let d = Self {
            kind: DriveKind::Trapezoid,
            amplitude,
            frequency,
            rise_time,
            phase: 0.0,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn constant(amplitude: f64) -> Self {
        Self {
            kind: DriveKind::Constant,
            amplitude,
            frequency: 0.0,
            rise_time: 0.0,
            phase: 0.0,
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() {
            return Err(Error::domain("drive amplitude", self.amplitude, "finite"));
        }
        match self.kind {
            DriveKind::Constant => Ok(()),
            DriveKind::Sine => {
                if !(self.frequency > 0.0) {
                    return Err(Error::domain("drive frequency", self.frequency, "frequency > 0"));
                }
                Ok(())
            }
            DriveKind::Trapezoid => {
                if !(self.frequency > 0.0) {
                    return Err(Error::domain("drive frequency", self.frequency, "frequency > 0"));
                }
                if !(self.rise_time > 0.0) || self.plateau() <= 0.0 {
                    return Err(Error::domain(
                        "rise_time",
                        self.rise_time,
                        "0 < rise_time < half the period",
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn period(&self) -> f64 {
        1.0 / self.frequency
    }

    /// Flat top duration of the trapezoid.
    pub fn plateau(&self) -> f64 {
        0.5 * self.period() - self.rise_time
    }

    /// Drive value at `t`. The trapezoid starts rising at `t = 0` and sits at
    /// `amplitude` on `[rise_time, period / 2)`.
    pub fn at(&self, t: f64) -> f64 {
        match self.kind {
            DriveKind::Constant => self.amplitude,
            DriveKind::Sine => self.amplitude * (TAU * self.frequency * t + self.phase).sin(),
            DriveKind::Trapezoid => {
                let p = self.period();
                let tau = (t - self.phase / TAU * p).rem_euclid(p);
                let r = self.rise_time;
                let half = 0.5 * p;
                let level = if tau < r {
                    tau / r
                } else if tau < half {
                    1.0
                } else if tau < half + r {
                    1.0 - (tau - half) / r
                } else {
                    0.0
                };
                self.amplitude * level
            }
        }
    }

    /// Start of an acquisition window of length `window` centred on the
    /// first plateau.
    pub fn plateau_window_start(&self, window: f64) -> Result<f64> {
        if self.kind != DriveKind::Trapezoid {
            return Ok(0.0);
        }
        if window > self.plateau() {
            return Err(Error::domain("window", window, "window <= plateau"));
        }
        let p = self.period();
        let centre = self.phase / TAU * p + self.rise_time + 0.5 * self.plateau();
        Ok(centre - 0.5 * window)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_trapezoid() {
        let d = DriveWaveform::trapezoid(1.0, 10.0, 10e-3).unwrap();
        assert!((d.plateau() - 40e-3).abs() < 1e-15);
        assert_eq!(d.at(0.0), 0.0);
        assert!((d.at(5e-3) - 0.5).abs() < 1e-12);
        assert_eq!(d.at(30e-3), 1.0);
        assert!((d.at(55e-3) - 0.5).abs() < 1e-12);
        assert_eq!(d.at(80e-3), 0.0);
        let start = d.plateau_window_start(4e-3).unwrap();
        assert!((start - 28e-3).abs() < 1e-15);
        let n = (4e-3 / 8e-6f64).round() as usize;
        assert_eq!(n, 500);
        assert!((0..n).all(|i| d.at(start + (i as f64 + 0.5) * 8e-6) == 1.0));
    }

    #[test]
    fn rejects_bad_trapezoid() {
        assert!(DriveWaveform::trapezoid(1.0, 10.0, 60e-3).is_err());
        assert!(DriveWaveform::trapezoid(1.0, 0.0, 1e-3).is_err());
        assert!(DriveWaveform::sine(1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn sine_values() {
        let d = DriveWaveform::sine(2.0, 7.0, 0.0).unwrap();
        assert!((d.at(1.0 / 28.0) - 2.0).abs() < 1e-12);
        assert_eq!(DriveWaveform::constant(3.0).at(12.0), 3.0);
    }
}
