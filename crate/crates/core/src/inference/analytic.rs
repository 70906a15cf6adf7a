//! Closed-form Fisher informations and bounds, generic over the scalar type.
//!
//! Informations are with respect to the kick `k` and carry units of m².
//! Momentum-valued jitters use `Q_k = k0 Q` for an angular deviation `Q`.

use crate::error::{Error, Result};
use crate::optics::{weak_validity, BeamParams, SignalKick, StConfig, WvConfig};
use crate::scalar::Real;

/// Fisher informations of the three readouts. `info_numeric` is filled in
/// when a quadrature value has been computed alongside.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FisherReport<T> {
    pub info_dark: T,
    pub info_bright: T,
    pub info_st: T,
    pub info_numeric: Option<T>,
    /// Weak-interaction approximation holds at the kick the report was made
    /// for.
    pub regime_flag: bool,
}

impl<T: Real> FisherReport<T> {
    pub fn dark_fraction(&self) -> T {
        self.info_dark / (self.info_dark + self.info_bright)
    }
}

/// `4 N sigma^2`.
pub fn info_full<T: Real>(beam: &BeamParams<T>) -> T {
    T::lit(4.0) * beam.n_photons() * beam.sigma().powi(2)
}

/// Dark `4 N sigma^2 cos^2(phi/2)`, bright `4 N sigma^2 sin^2(phi/2)`,
/// ST `4 N sigma^2`.
pub fn fisher_analytic<T: Real>(beam: &BeamParams<T>, wv: &WvConfig<T>, k: &SignalKick<T>) -> FisherReport<T> {
    let full = info_full(beam);
    let s2 = (wv.phi() / T::lit(2.0)).sin().powi(2);
    FisherReport {
        info_dark: full * (T::one() - s2),
        info_bright: full * s2,
        info_st: full,
        info_numeric: None,
        regime_flag: weak_validity(beam, wv, k).valid,
    }
}

/// Informations under per-shot Gaussian angular jitter of deviation `q_angle`
/// (rad). Returns `(wvt, st)`.
pub fn fisher_with_angular_jitter<T: Real>(
    beam: &BeamParams<T>,
    wv: &WvConfig<T>,
    _st: &StConfig<T>,
    q_angle: T,
) -> Result<(T, T)> {
    if !(q_angle >= T::zero()) {
        return Err(Error::domain("Q", q_angle.to_f64_lossy(), "Q >= 0"));
    }
    let full = info_full(beam);
    let s = beam.sigma();
    let two_s_q = (T::lit(2.0) * s * beam.k0() * q_angle).powi(2);
    let spread = (wv.lever_arm() / (T::lit(2.0) * beam.k0() * s * s)).powi(2);
    Ok((
        full / (T::one() + spread * (T::one() + two_s_q)),
        full / (T::one() + two_s_q),
    ))
}

/// Informations under per-shot Gaussian detector jitter of deviation `j`
/// (m). Returns `(wvt, st)`.
pub fn fisher_with_detector_jitter<T: Real>(
    beam: &BeamParams<T>,
    _wv: &WvConfig<T>,
    st: &StConfig<T>,
    j: T,
) -> Result<(T, T)> {
    if !(j >= T::zero()) {
        return Err(Error::domain("J", j.to_f64_lossy(), "J >= 0"));
    }
    let full = info_full(beam);
    let s2 = beam.sigma().powi(2);
    let st_term = (T::lit(2.0) * beam.k0() * beam.sigma() * j / st.focal_length()).powi(2);
    Ok((full * s2 / (s2 + j * j), full / (T::one() + st_term)))
}

/// How the beam position is read out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Readout {
    /// Full position information.
    Full,
    /// Two-segment split detector, costing a factor `2/pi` in information.
    Split,
}

/// `sqrt(1/I0 + J^2)`, with `I0` reduced by `2/pi` for split readout.
pub fn crb_with_noise<T: Real>(info0: T, j_elec: T, readout: Readout) -> Result<T> {
    if !(info0 > T::zero()) {
        return Err(Error::domain("info0", info0.to_f64_lossy(), "info0 > 0"));
    }
    if !(j_elec >= T::zero()) {
        return Err(Error::domain("J", j_elec.to_f64_lossy(), "J >= 0"));
    }
    let info = match readout {
        Readout::Full => info0,
        Readout::Split => info0 * T::lit(2.0) / T::PI(),
    };
    Ok((T::one() / info + j_elec * j_elec).sqrt())
}

/// `Delta k_B / Delta k = 1 / sqrt(1 + xi^2 / Delta k_B^2)`.
pub fn deviation_ratio<T: Real>(xi_rms: T, bound: T) -> T {
    T::one() / (T::one() + (xi_rms / bound).powi(2)).sqrt()
}

/// Split fractions `S_D^2 / (S_D^2 + S_B^2)` and its complement.
pub fn fisher_fraction_from_snr<T: Real>(snr_dark: T, snr_bright: T) -> Result<(T, T)> {
    if !(snr_dark >= T::zero()) || !(snr_bright >= T::zero()) {
        return Err(Error::domain(
            "snr",
            snr_dark.min(snr_bright).to_f64_lossy(),
            "snr >= 0",
        ));
    }
    let d = snr_dark * snr_dark;
    let b = snr_bright * snr_bright;
    if d + b == T::zero() {
        return Err(Error::ZeroDivision("both SNRs are zero"));
    }
    Ok((d / (d + b), b / (d + b)))
}

/// Largest post-selection angle keeping the dark port above `1 - eps` of the
/// information: `phi = 2 sqrt(eps)`.
pub fn efficiency_angle_bound<T: Real>(eps: T) -> Result<T> {
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::domain("epsilon", eps.to_f64_lossy(), "0 < epsilon < 1"));
    }
    Ok(T::lit(2.0) * eps.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn beam() -> BeamParams<f64> {
        BeamParams::new(1.075e-3, 780e-9).unwrap()
    }

    #[test]
    fn fisher_examples() {
        let b = beam();
        let k = SignalKick::new(0.0, &b);
        let r = fisher_analytic(&b, &WvConfig::new(0.22, 0.34).unwrap(), &k);
        assert_relative_eq!(r.info_dark + r.info_bright, r.info_st, max_relative = 1e-15);
        assert_relative_eq!(r.dark_fraction(), 0.9879, epsilon = 1e-4);
        assert_relative_eq!(r.info_st, 4.0 * 1.075e-3f64.powi(2), max_relative = 1e-15);
        let near_pi = fisher_analytic(&b, &WvConfig::new(std::f64::consts::PI - 1e-9, 0.34).unwrap(), &k);
        assert!(near_pi.info_dark < 1e-20);
    }

    #[test]
    fn angular_jitter_limits() {
        let b = beam();
        let st = StConfig::new(1.0, &b).unwrap();
        let full = info_full(&b);
        let (wv0, st0) = fisher_with_angular_jitter(&b, &WvConfig::new(0.38, 1e-12).unwrap(), &st, 0.0).unwrap();
        assert_relative_eq!(wv0, full, max_relative = 1e-12);
        assert_eq!(st0, full);
        let mut last = 0.0;
        for l in [2.0, 1.0, 0.5, 0.34, 0.1] {
            let (w, _) = fisher_with_angular_jitter(&b, &WvConfig::new(0.38, l).unwrap(), &st, 1e-6).unwrap();
            assert!(w > last);
            last = w;
        }
        assert!(fisher_with_angular_jitter(&b, &WvConfig::new(0.38, 0.34).unwrap(), &st, -1.0).is_err());
    }

    #[test]
    fn detector_jitter_limits() {
        let b = beam();
        let wv = WvConfig::new(0.38, 0.34).unwrap();
        let full = info_full(&b);
        let st = StConfig::new(1.0, &b).unwrap();
        let (w, s) = fisher_with_detector_jitter(&b, &wv, &st, 0.0).unwrap();
        assert_eq!((w, s), (full, full));
        let (w, _) = fisher_with_detector_jitter(&b, &wv, &st, 1e-9).unwrap();
        assert_relative_eq!(w, full, max_relative = 1e-6);
        let long = StConfig::new(1e6, &b).unwrap();
        let (_, s) = fisher_with_detector_jitter(&b, &wv, &long, 1e-7).unwrap();
        assert_relative_eq!(s, full, max_relative = 1e-6);
    }

    #[test]
    fn crb_examples() {
        assert_relative_eq!(crb_with_noise(4.0, 0.0, Readout::Full).unwrap(), 0.5);
        assert_relative_eq!(
            crb_with_noise(1e300, 0.3, Readout::Full).unwrap(),
            0.3,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            crb_with_noise(4.0, 0.0, Readout::Split).unwrap(),
            0.5 * (std::f64::consts::PI / 2.0).sqrt(),
            max_relative = 1e-15
        );
        assert!(crb_with_noise(0.0, 0.0, Readout::Full).is_err());
        assert_eq!(deviation_ratio(0.0, 1.0), 1.0);
        assert_relative_eq!(deviation_ratio(1.0, 1.0), 0.5f64.sqrt());
    }

    #[test]
    fn fractions_and_angle_bound() {
        assert_eq!(fisher_fraction_from_snr(3.0, 3.0).unwrap(), (0.5, 0.5));
        assert!(fisher_fraction_from_snr(0.0, 0.0).is_err());
        assert_relative_eq!(efficiency_angle_bound(0.01).unwrap(), 0.2, max_relative = 1e-15);
        assert!(0.1f64.cos().powi(2) >= 0.99);
        assert!(efficiency_angle_bound(1.0).is_err());
        assert!(efficiency_angle_bound(0.0).is_err());
        assert!(efficiency_angle_bound(1e-12f32).unwrap() < 1e-5);
    }
}
