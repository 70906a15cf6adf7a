//! Deterministic beam-deflection optics for the two detection schemes.
//!
//! The weak-value technique (WVT) sends a Gaussian beam through a Sagnac
//! interferometer whose beam splitter imparts a transverse momentum kick `k`
//! and a post-selection phase `phi`. The dark port shows the kick as a
//! displacement `2 sigma^2 k cot(phi/2)`, the bright port as
//! `2 sigma^2 k tan(phi/2)`. The standard technique (ST) focuses the whole
//! beam with a lens of focal length `f`, turning `k` into `f k / k0`.
//!
//! Sign convention: the dark-port intensity is centred at `x = -dark_shift`,
//! the bright port at `x = +bright_shift`, the focused beam at
//! `x = +st_shift`. External disturbances (detector offset `d`, momentum
//! modulation `q`) displace every port by `+d` and `+lever * q / k0`.
//!
//! Everything here is a pure function of value inputs and is generic over the
//! scalar type.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Weakness parameter above which the shifted-Gaussian approximation is
/// flagged as doubtful.
pub const WEAK_THRESHOLD: f64 = 0.1;

/// Gaussian beam and photon budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParams<T> {
    sigma: T,
    lambda: T,
    k0: T,
    n_photons: T,
    power: Option<T>,
}

impl<T: Real> BeamParams<T> {
    /// `sigma` is the intensity-profile standard deviation, `lambda` the
    /// centre wavelength. The photon count starts at 1 (per-photon values).
    pub fn new(sigma: T, lambda: T) -> Result<Self> {
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(Error::domain("sigma", sigma.to_f64_lossy(), "sigma > 0"));
        }
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(Error::domain("lambda", lambda.to_f64_lossy(), "lambda > 0"));
        }
        Ok(Self {
            sigma,
            lambda,
            k0: T::TAU() / lambda,
            n_photons: T::one(),
            power: None,
        })
    }

    pub fn with_photons(mut self, n: T) -> Result<Self> {
        if !(n >= T::zero()) || !n.is_finite() {
            return Err(Error::domain("n_photons", n.to_f64_lossy(), "n_photons >= 0"));
        }
        self.n_photons = n;
        Ok(self)
    }

    pub fn with_power(mut self, watts: T) -> Result<Self> {
        if !(watts >= T::zero()) || !watts.is_finite() {
            return Err(Error::domain("power", watts.to_f64_lossy(), "power >= 0"));
        }
        self.power = Some(watts);
        Ok(self)
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Wavenumber `2 pi / lambda`.
    pub fn k0(&self) -> T {
        self.k0
    }

    pub fn n_photons(&self) -> T {
        self.n_photons
    }

    pub fn power(&self) -> Option<T> {
        self.power
    }
}

/// Sagnac geometry: post-selection phase and lever arm from the external
/// modulating mirror to the detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WvConfig<T> {
    phi: T,
    lever_arm: T,
}

impl<T: Real> WvConfig<T> {
    pub fn new(phi: T, lever_arm: T) -> Result<Self> {
        if !(phi > T::zero() && phi < T::PI()) {
            return Err(Error::domain("phi", phi.to_f64_lossy(), "0 < phi < pi"));
        }
        if !(lever_arm > T::zero()) || !lever_arm.is_finite() {
            return Err(Error::domain("L", lever_arm.to_f64_lossy(), "L > 0"));
        }
        Ok(Self { phi, lever_arm })
    }

    pub fn phi(&self) -> T {
        self.phi
    }

    pub fn lever_arm(&self) -> T {
        self.lever_arm
    }

    pub fn half_cot(&self) -> T {
        T::one() / (self.phi / T::lit(2.0)).tan()
    }

    pub fn half_tan(&self) -> T {
        (self.phi / T::lit(2.0)).tan()
    }
}

/// Focusing lens geometry. `sigma_f` is derived from the beam it focuses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StConfig<T> {
    focal_length: T,
    sigma_f: T,
}

impl<T: Real> StConfig<T> {
    pub fn new(focal_length: T, beam: &BeamParams<T>) -> Result<Self> {
        if !(focal_length > T::zero()) || !focal_length.is_finite() {
            return Err(Error::domain("f", focal_length.to_f64_lossy(), "f > 0"));
        }
        Ok(Self {
            focal_length,
            sigma_f: focal_length / (T::lit(2.0) * beam.k0() * beam.sigma()),
        })
    }

    pub fn focal_length(&self) -> T {
        self.focal_length
    }

    /// Focused beam radius `f / (2 k0 sigma)`.
    pub fn sigma_f(&self) -> T {
        self.sigma_f
    }
}

/// One of the two detection schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Technique<T> {
    WeakValue(WvConfig<T>),
    Standard(StConfig<T>),
}

impl<T: Real> Technique<T> {
    /// Distance over which an upstream momentum change becomes a detector
    /// displacement: `L` for the WVT, `f` for the ST.
    pub fn lever_arm(&self) -> T {
        match self {
            Technique::WeakValue(wv) => wv.lever_arm(),
            Technique::Standard(st) => st.focal_length(),
        }
    }

    /// Beam standard deviation on the detector.
    pub fn spot_sigma(&self, beam: &BeamParams<T>) -> T {
        match self {
            Technique::WeakValue(_) => beam.sigma(),
            Technique::Standard(st) => st.sigma_f(),
        }
    }
}

/// Transverse momentum kick imparted by the tilted beam splitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalKick<T> {
    k: T,
    k0: T,
}

impl<T: Real> SignalKick<T> {
    pub fn new(k: T, beam: &BeamParams<T>) -> Self {
        Self { k, k0: beam.k0() }
    }

    /// Kick corresponding to a deflection angle, `k = k0 * theta`.
    pub fn from_angle(theta: T, beam: &BeamParams<T>) -> Self {
        Self {
            k: beam.k0() * theta,
            k0: beam.k0(),
        }
    }

    pub fn k(&self) -> T {
        self.k
    }

    pub fn equivalent_angle(&self) -> T {
        self.k / self.k0
    }
}

/// Detector-plane displacements for signal, detector modulation and momentum
/// modulation in one technique.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftRow<T> {
    pub dx_k: T,
    pub dx_d: T,
    pub dx_q: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftTable<T> {
    pub wv: ShiftRow<T>,
    pub st: ShiftRow<T>,
}

/// External disturbance whose effect is compared against the signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Modulation<T> {
    /// Transverse detector displacement (meters).
    Detector(T),
    /// Transverse momentum modulation upstream of the apparatus (1/meter).
    Momentum(T),
}

/// `delta_d = 2 sigma^2 k cot(phi/2)`.
pub fn dark_shift<T: Real>(beam: &BeamParams<T>, wv: &WvConfig<T>, k: &SignalKick<T>) -> T {
    T::lit(2.0) * beam.sigma().powi(2) * k.k() * wv.half_cot()
}

/// `delta_b = 2 sigma^2 k tan(phi/2)`.
pub fn bright_shift<T: Real>(beam: &BeamParams<T>, wv: &WvConfig<T>, k: &SignalKick<T>) -> T {
    T::lit(2.0) * beam.sigma().powi(2) * k.k() * wv.half_tan()
}

/// `f k / k0`.
pub fn st_shift<T: Real>(beam: &BeamParams<T>, st: &StConfig<T>, k: &SignalKick<T>) -> T {
    st.focal_length() * k.k() / beam.k0()
}

/// Fractions of photons leaving the dark and bright ports.
pub fn port_probabilities<T: Real>(wv: &WvConfig<T>) -> (T, T) {
    let s = (wv.phi() / T::lit(2.0)).sin().powi(2);
    (s, T::one() - s)
}

pub fn shift_table<T: Real>(
    beam: &BeamParams<T>,
    wv: &WvConfig<T>,
    st: &StConfig<T>,
    k: &SignalKick<T>,
    d: T,
    q: T,
) -> ShiftTable<T> {
    ShiftTable {
        wv: ShiftRow {
            dx_k: dark_shift(beam, wv, k),
            dx_d: d,
            dx_q: wv.lever_arm() * q / beam.k0(),
        },
        st: ShiftRow {
            dx_k: st_shift(beam, st, k),
            dx_d: d,
            dx_q: st.focal_length() * q / beam.k0(),
        },
    }
}

/// Signal displacement divided by modulation displacement for one technique.
pub fn ratio_r<T: Real>(
    beam: &BeamParams<T>,
    technique: &Technique<T>,
    k: &SignalKick<T>,
    modulation: Modulation<T>,
) -> Result<T> {
    let dx_k = match technique {
        Technique::WeakValue(wv) => dark_shift(beam, wv, k),
        Technique::Standard(st) => st_shift(beam, st, k),
    };
    let dx_mod = match modulation {
        Modulation::Detector(d) => d,
        Modulation::Momentum(q) => technique.lever_arm() * q / beam.k0(),
    };
    if dx_mod == T::zero() {
        return Err(Error::ZeroDivision("modulation displacement is zero"));
    }
    Ok(dx_k / dx_mod)
}

/// Closed form of `R_wv / R_st`: `2 k0 sigma^2 cot(phi/2) / f` for detector
/// modulation, `... / L` for momentum modulation.
pub fn ratio_of_ratios<T: Real>(
    beam: &BeamParams<T>,
    wv: &WvConfig<T>,
    st: &StConfig<T>,
    detector_modulation: bool,
) -> T {
    let num = T::lit(2.0) * beam.k0() * beam.sigma().powi(2) * wv.half_cot();
    if detector_modulation {
        num / st.focal_length()
    } else {
        num / wv.lever_arm()
    }
}

/// WVT/ST ratios of beam-radius-normalised detector signals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawSignalRatios<T> {
    pub signal: T,
    pub momentum: T,
    pub detector: T,
}

impl<T: Real> RawSignalRatios<T> {
    /// The same ratios in dBV, `20 log10`.
    pub fn to_db(&self) -> RawSignalRatios<T> {
        let db = |x: T| T::lit(20.0) * x.log10();
        RawSignalRatios {
            signal: db(self.signal),
            momentum: db(self.momentum),
            detector: db(self.detector),
        }
    }
}

pub fn raw_signal_ratios<T: Real>(beam: &BeamParams<T>, wv: &WvConfig<T>, st: &StConfig<T>) -> RawSignalRatios<T> {
    let two_k0_s2 = T::lit(2.0) * beam.k0() * beam.sigma().powi(2);
    RawSignalRatios {
        signal: wv.half_cot(),
        momentum: wv.lever_arm() / two_k0_s2,
        detector: st.focal_length() / two_k0_s2,
    }
}

/// Inverse comparison factor `f' / (2 sigma^2 k0 cot(phi/2))` over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricSurface<T> {
    pub sigmas: Vec<T>,
    pub fprimes: Vec<T>,
    /// Row-major, `values[i * fprimes.len() + j]` for `sigmas[i]`, `fprimes[j]`.
    pub values: Vec<T>,
    pub max: T,
}

impl<T: Real> GeometricSurface<T> {
    pub fn value(&self, i_sigma: usize, j_fprime: usize) -> T {
        self.values[i_sigma * self.fprimes.len() + j_fprime]
    }
}

pub fn geometric_factor<T: Real>(phi: T, k0: T, sigma: T, fprime: T) -> T {
    fprime * (phi / T::lit(2.0)).tan() / (T::lit(2.0) * sigma.powi(2) * k0)
}

/// Evaluates the factor on an inclusive linear grid over both ranges.
pub fn geometric_factor_surface<T: Real>(
    phi: T,
    lambda: T,
    sigma_range: (T, T),
    fprime_range: (T, T),
    n_sigma: usize,
    n_fprime: usize,
) -> Result<GeometricSurface<T>> {
    if n_sigma < 2 || n_fprime < 2 {
        return Err(Error::InsufficientPoints {
            need: 2,
            got: n_sigma.min(n_fprime),
        });
    }
    if !(phi > T::zero() && phi < T::PI()) {
        return Err(Error::domain("phi", phi.to_f64_lossy(), "0 < phi < pi"));
    }
    let k0 = T::TAU() / lambda;
    let grid = |(lo, hi): (T, T), n: usize| -> Vec<T> {
        (0..n)
            .map(|i| lo + (hi - lo) * T::lit(i as f64) / T::lit((n - 1) as f64))
            .collect()
    };
    let sigmas = grid(sigma_range, n_sigma);
    let fprimes = grid(fprime_range, n_fprime);
    let mut values = Vec::with_capacity(n_sigma * n_fprime);
    let mut max = T::neg_infinity();
    for &s in &sigmas {
        for &fp in &fprimes {
            let v = geometric_factor(phi, k0, s, fp);
            max = max.max(v);
            values.push(v);
        }
    }
    Ok(GeometricSurface {
        sigmas,
        fprimes,
        values,
        max,
    })
}

/// `k^2 sigma^2 cot^2(phi/2)` and whether it is below [`WEAK_THRESHOLD`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakValidity<T> {
    pub parameter: T,
    pub valid: bool,
}

pub fn weak_validity<T: Real>(beam: &BeamParams<T>, wv: &WvConfig<T>, k: &SignalKick<T>) -> WeakValidity<T> {
    let parameter = (k.k() * beam.sigma() * wv.half_cot()).powi(2);
    WeakValidity {
        parameter,
        valid: parameter.is_finite() && parameter < T::lit(WEAK_THRESHOLD),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const SIGMA: f64 = 1.075e-3;
    const LAMBDA: f64 = 780e-9;

    fn beam() -> BeamParams<f64> {
        BeamParams::new(SIGMA, LAMBDA).unwrap()
    }

    #[test]
    fn k0_is_two_pi_over_lambda() {
        let b = beam();
        assert_eq!(b.k0(), std::f64::consts::TAU / LAMBDA);
        assert_relative_eq!(b.k0(), 8.0554e6, max_relative = 1e-4);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(BeamParams::new(0.0, LAMBDA).is_err());
        assert!(BeamParams::new(SIGMA, -1.0).is_err());
        assert!(beam().with_photons(-1.0).is_err());
        assert!(WvConfig::new(0.0, 0.34).is_err());
        assert!(WvConfig::new(std::f64::consts::PI, 0.34).is_err());
        assert!(WvConfig::new(0.38, 0.0).is_err());
        assert!(StConfig::new(0.0, &beam()).is_err());
    }

    #[test]
    fn dark_shift_examples() {
        let b = beam();
        let wv = WvConfig::new(0.38, 0.34).unwrap();
        assert_eq!(dark_shift(&b, &wv, &SignalKick::new(0.0, &b)), 0.0);

        let quarter = WvConfig::new(std::f64::consts::FRAC_PI_2, 0.34).unwrap();
        let one = SignalKick::new(1.0, &b);
        assert_relative_eq!(dark_shift(&b, &quarter, &one), 2.31125e-6, max_relative = 1e-12);
        assert_relative_eq!(bright_shift(&b, &quarter, &one), 2.31125e-6, max_relative = 1e-12);

        // 24 nrad kick: 2 sigma^2 k0 24e-9 cot(0.19)
        let kick = SignalKick::from_angle(24e-9, &b);
        assert_relative_eq!(kick.k(), 0.193329, max_relative = 1e-5);
        let dd = dark_shift(&b, &wv, &kick);
        assert_relative_eq!(dd, 2.3234e-6, max_relative = 1e-4);
        let db = bright_shift(&b, &wv, &kick);
        assert_relative_eq!(db, dd * 0.19f64.tan().powi(2), max_relative = 1e-12);
        assert_relative_eq!(dd / db, 27.04, max_relative = 1e-3);
    }

    #[test]
    fn st_shift_examples() {
        let b = beam();
        let st = StConfig::new(1.0, &b).unwrap();
        assert_eq!(st_shift(&b, &st, &SignalKick::new(0.0, &b)), 0.0);
        let kick = SignalKick::from_angle(24e-9, &b);
        assert_relative_eq!(st_shift(&b, &st, &kick), 24e-9, max_relative = 1e-12);
        assert_relative_eq!(kick.equivalent_angle(), 24e-9, max_relative = 1e-12);
        // sigma_f = f / (2 k0 sigma)
        assert_relative_eq!(st.sigma_f(), 57.74e-6, max_relative = 1e-3);
    }

    #[test]
    fn port_probability_examples() {
        let (d, b) = port_probabilities(&WvConfig::new(0.22, 1.0).unwrap());
        assert_relative_eq!(d, 0.0120513, max_relative = 1e-5);
        assert_eq!(d + b, 1.0);
        let (d, b) = port_probabilities(&WvConfig::new(std::f64::consts::FRAC_PI_2, 1.0).unwrap());
        assert_relative_eq!(d, 0.5, max_relative = 1e-15);
        assert_relative_eq!(b, 0.5, max_relative = 1e-15);
        let (d, _) = port_probabilities(&WvConfig::new(0.38, 1.0).unwrap());
        assert_relative_eq!(d, 0.035668, max_relative = 1e-4);
    }

    #[test]
    fn shift_table_rows() {
        let b = beam();
        let wv = WvConfig::new(0.38, 0.34).unwrap();
        let st = StConfig::new(1.0, &b).unwrap();
        let q = b.k0() * 1.25e-6;
        let t = shift_table(&b, &wv, &st, &SignalKick::new(0.2, &b), 50e-9, q);
        assert_eq!(t.wv.dx_d, t.st.dx_d);
        assert_relative_eq!(t.wv.dx_q, 425e-9, max_relative = 1e-12);
        assert_relative_eq!(t.st.dx_q, 1.25e-6, max_relative = 1e-12);

        let zero = shift_table(&b, &wv, &st, &SignalKick::new(0.2, &b), 0.0, 0.0);
        assert!(zero.wv.dx_k != 0.0 && zero.st.dx_k != 0.0);
        assert_eq!(
            (zero.wv.dx_d, zero.wv.dx_q, zero.st.dx_d, zero.st.dx_q),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn ratio_r_matches_closed_forms() {
        let b = beam();
        let wv = WvConfig::new(0.38, 0.34).unwrap();
        let st = StConfig::new(1.0, &b).unwrap();
        let k = SignalKick::from_angle(24e-9, &b);
        let d = Modulation::Detector(100e-9);
        let q = Modulation::Momentum(b.k0() * 1e-6);
        let rd = ratio_r(&b, &Technique::WeakValue(wv), &k, d).unwrap()
            / ratio_r(&b, &Technique::Standard(st), &k, d).unwrap();
        let rq = ratio_r(&b, &Technique::WeakValue(wv), &k, q).unwrap()
            / ratio_r(&b, &Technique::Standard(st), &k, q).unwrap();
        assert_relative_eq!(rd, ratio_of_ratios(&b, &wv, &st, true), max_relative = 1e-13);
        assert_relative_eq!(rq, ratio_of_ratios(&b, &wv, &st, false), max_relative = 1e-13);
        assert_relative_eq!(rd, 96.81, max_relative = 1e-3);
        assert_relative_eq!(rq, 284.7, max_relative = 1e-3);

        let k2 = SignalKick::new(2.0 * k.k(), &b);
        assert_relative_eq!(
            ratio_r(&b, &Technique::WeakValue(wv), &k2, d).unwrap(),
            2.0 * ratio_r(&b, &Technique::WeakValue(wv), &k, d).unwrap(),
            max_relative = 1e-14
        );
        assert!(matches!(
            ratio_r(&b, &Technique::Standard(st), &k, Modulation::Detector(0.0)),
            Err(Error::ZeroDivision(_))
        ));
    }

    #[test]
    fn raw_ratios_match_predictions() {
        let b = beam();
        let st = StConfig::new(1.0, &b).unwrap();
        let r = raw_signal_ratios(&b, &WvConfig::new(0.38, 0.34).unwrap(), &st);
        assert_relative_eq!(r.signal, 5.1997, max_relative = 1e-4);
        let db = r.to_db();
        assert_relative_eq!(db.signal, 14.32, epsilon = 0.01);
        // Suppressions are -20 log10 of the momentum/detector ratios.
        assert_relative_eq!(-db.detector, 25.40, epsilon = 0.01);
        assert_relative_eq!(-db.momentum, 34.77, epsilon = 0.01);

        let r = raw_signal_ratios(&b, &WvConfig::new(std::f64::consts::FRAC_PI_2, 0.34).unwrap(), &st);
        assert_relative_eq!(r.signal, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn geometric_surface_examples() {
        let s = geometric_factor_surface(0.4, LAMBDA, (250e-6, 2e-3), (1e-3, 1.0), 40, 40).unwrap();
        assert!(s.max < 1.0);
        assert_relative_eq!(s.max, s.value(0, 39), max_relative = 1e-15);
        let k0 = std::f64::consts::TAU / LAMBDA;
        assert_relative_eq!(geometric_factor(0.4, k0, 250e-6, 1.0), 0.2013, max_relative = 1e-3);
        assert_eq!(geometric_factor(0.4, k0, 250e-6, 0.0), 0.0);
    }

    #[test]
    fn weak_validity_examples() {
        let b = beam();
        let wv = WvConfig::new(0.38, 0.34).unwrap();
        let w = weak_validity(&b, &wv, &SignalKick::new(0.0, &b));
        assert_eq!(w.parameter, 0.0);
        assert!(w.valid);
        let w = weak_validity(&b, &wv, &SignalKick::new(0.19, &b));
        assert_relative_eq!(w.parameter, 1.13e-6, max_relative = 0.02);
        assert!(w.valid);
        let tiny = WvConfig::new(1e-6, 0.34).unwrap();
        assert!(!weak_validity(&b, &tiny, &SignalKick::new(1.0, &b)).valid);
    }

    #[test]
    fn works_in_single_precision() {
        let b = BeamParams::<f32>::new(1.075e-3, 780e-9).unwrap();
        let wv = WvConfig::new(0.38f32, 0.34).unwrap();
        let st = StConfig::new(1.0f32, &b).unwrap();
        let r = ratio_of_ratios(&b, &wv, &st, false);
        assert_relative_eq!(r, 284.727, max_relative = 1e-4);
        let (d, br) = port_probabilities(&wv);
        assert_relative_eq!(d + br, 1.0, max_relative = 1e-6);
    }
}
