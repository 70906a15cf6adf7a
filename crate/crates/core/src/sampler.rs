//! Monte Carlo photon arrival positions.
//!
//! Disturbance geometry follows the shift table: a detector offset `d` moves
//! every spot by `d`, an upstream angle `theta` (deterministic `q / k0`, a
//! laser-jitter sample, or per-shot angular jitter) moves it by
//! `lever * theta` with lever `L` (WVT) or `f` (ST). Detector jitter adds
//! directly to `x`. Both WVT ports see the same disturbances.

use crate::error::{Error, Result};
use crate::optics::{bright_shift, dark_shift, port_probabilities, st_shift};
use crate::rng::StreamId;
use crate::{Beam, Kick, Technique, Wv, PLANCK, SPEED_OF_LIGHT};
use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::{SQRT_2, TAU};

/// Output port of a photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Port {
    Dark,
    Bright,
    #[serde(rename = "st")]
    Standard,
}

impl Port {
    pub fn name(self) -> &'static str {
        match self {
            Port::Dark => "dark",
            Port::Bright => "bright",
            Port::Standard => "st",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPdf {
    pub mean: f64,
    pub std: f64,
}

impl GaussianPdf {
    pub fn density(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.std;
        (-0.5 * z * z).exp() / (self.std * (TAU).sqrt())
    }

    pub fn cdf(&self, x: f64) -> f64 {
        normal_cdf((x - self.mean) / self.std)
    }

    pub fn variance(&self) -> f64 {
        self.std * self.std
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// Normalized intensity profile of one WVT port (port weight excluded).
pub fn pdf_wv(beam: &Beam, wv: &Wv, k: &Kick, port: Port) -> Result<GaussianPdf> {
    let mean = match port {
        Port::Dark => -dark_shift(beam, wv, k),
        Port::Bright => bright_shift(beam, wv, k),
        Port::Standard => {
            return Err(Error::Degenerate("the standard port belongs to the ST".into()));
        }
    };
    Ok(GaussianPdf {
        mean,
        std: beam.sigma(),
    })
}

pub fn pdf_st(beam: &Beam, st: &crate::St, k: &Kick) -> GaussianPdf {
    GaussianPdf {
        mean: st_shift(beam, st, k),
        std: st.sigma_f(),
    }
}

/// `amplitude * sin(2 pi frequency t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sinusoid {
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

impl Sinusoid {
    pub fn new(amplitude: f64, frequency: f64, phase: f64) -> Result<Self> {
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::domain("amplitude", amplitude, "amplitude >= 0"));
        }
        if !(frequency > 0.0) || !frequency.is_finite() {
            return Err(Error::domain("frequency", frequency, "frequency > 0"));
        }
        Ok(Self {
            amplitude,
            frequency,
            phase,
        })
    }

    pub fn at(&self, t: f64) -> f64 {
        self.amplitude * (TAU * self.frequency * t + self.phase).sin()
    }

    pub fn rms(&self) -> f64 {
        self.amplitude / SQRT_2
    }
}

/// Fixed tone of the laser-jitter model; amplitude in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub frequency: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Gaussian noise low-passed at `cutoff`, scaled to `rms` radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandNoise {
    pub cutoff: f64,
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LaserJitterSpec {
    #[serde(default)]
    pub tones: Vec<Tone>,
    #[serde(default)]
    pub noise: Option<BandNoise>,
}

impl LaserJitterSpec {
    /// Tones at 50 and 100 Hz plus noise to 300 Hz, 0.15 urad rms in total
    /// (0.3 urad peak to peak taken as twice the deviation).
    pub fn default_wild() -> Self {
        Self {
            tones: vec![
                Tone {
                    frequency: 50.0,
                    amplitude: 0.12e-6,
                    phase: 0.0,
                },
                Tone {
                    frequency: 100.0,
                    amplitude: 0.08e-6,
                    phase: 0.7,
                },
            ],
            noise: Some(BandNoise {
                cutoff: 300.0,
                rms: 0.11e-6,
            }),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.tones.iter().all(|t| t.amplitude == 0.0) && self.noise.is_none_or(|n| n.rms == 0.0)
    }

    /// Nominal rms of the model, tones and noise combined.
    pub fn rms(&self) -> f64 {
        let tones: f64 = self.tones.iter().map(|t| 0.5 * t.amplitude * t.amplitude).sum();
        let noise = self.noise.map_or(0.0, |n| n.rms * n.rms);
        (tones + noise).sqrt()
    }

    /// Peak to peak as twice the deviation.
    pub fn peak_to_peak(&self) -> f64 {
        2.0 * self.rms()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            tones: self
                .tones
                .iter()
                .map(|t| Tone {
                    amplitude: t.amplitude * factor,
                    ..*t
                })
                .collect(),
            noise: self.noise.map(|n| BandNoise {
                rms: n.rms * factor,
                ..n
            }),
        }
    }

    fn max_frequency(&self) -> f64 {
        self.tones
            .iter()
            .map(|t| t.frequency)
            .chain(self.noise.map(|n| n.cutoff))
            .fold(0.0, f64::max)
    }
}

/// Uniformly sampled waveform starting at `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl Waveform {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|i| self.t0 + i as f64 * self.dt)
    }

    pub fn rms(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64).sqrt()
    }

    /// Mean of the piecewise-constant waveform over `[a, b)`; samples outside
    /// the stored range count as zero.
    pub fn window_mean(&self, a: f64, b: f64) -> f64 {
        if self.values.is_empty() || b <= a {
            return 0.0;
        }
        let first = ((a - self.t0) / self.dt).floor().max(0.0) as usize;
        let mut acc = 0.0;
        let mut i = first;
        while i < self.values.len() {
            let lo = self.t0 + i as f64 * self.dt;
            let hi = lo + self.dt;
            if lo >= b {
                break;
            }
            let overlap = hi.min(b) - lo.max(a);
            if overlap > 0.0 {
                acc += overlap * self.values[i];
            }
            i += 1;
        }
        acc / (b - a)
    }

    /// Two-column CSV `t,value`.
    pub fn write_csv<W: std::io::Write>(&self, w: W, value_name: &str) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", value_name])?;
        for (t, v) in self.times().zip(&self.values) {
            out.write_record([format!("{t:e}"), format!("{v:e}")])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Laser-jitter angle series: tones plus Gaussian noise brick-wall filtered
/// at the cutoff and scaled to the requested rms.
pub fn laser_jitter_waveform(
    spec: &LaserJitterSpec,
    duration: f64,
    sample_rate: f64,
    stream: StreamId,
) -> Result<Waveform> {
    laser_jitter_waveform_with_envelope(spec, duration, sample_rate, stream, |_| 1.0)
}

/// As [`laser_jitter_waveform`], with the noise part multiplied by a
/// time-varying envelope.
pub fn laser_jitter_waveform_with_envelope(
    spec: &LaserJitterSpec,
    duration: f64,
    sample_rate: f64,
    stream: StreamId,
    envelope: impl Fn(f64) -> f64,
) -> Result<Waveform> {
    if !(duration > 0.0) || !(sample_rate > 0.0) {
        return Err(Error::domain("duration", duration, "duration > 0 and sample_rate > 0"));
    }
    let fmax = spec.max_frequency();
    if sample_rate <= 2.0 * fmax {
        return Err(Error::Aliasing {
            frequency: fmax,
            needed: 2.0 * fmax,
            rate: sample_rate,
        });
    }
    let n = (duration * sample_rate).round() as usize;
    let dt = 1.0 / sample_rate;
    let mut values = vec![0.0; n];
    if let Some(noise) = spec.noise.filter(|b| b.rms > 0.0 && n > 1) {
        let mut rng = stream.rng();
        let mut buf: Vec<Complex<f64>> = (0..n)
            .map(|_| Complex::new(rng.sample::<f64, _>(StandardNormal), 0.0))
            .collect();
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(n).process(&mut buf);
        let df = sample_rate / n as f64;
        for (i, c) in buf.iter_mut().enumerate() {
            let f = i.min(n - i) as f64 * df;
            if i == 0 || f > noise.cutoff {
                *c = Complex::new(0.0, 0.0);
            }
        }
        planner.plan_fft_inverse(n).process(&mut buf);
        let rms = (buf.iter().map(|c| c.re * c.re).sum::<f64>() / n as f64).sqrt();
        if rms > 0.0 {
            let scale = noise.rms / rms;
            for (i, (v, c)) in values.iter_mut().zip(&buf).enumerate() {
                *v = c.re * scale * envelope(i as f64 * dt);
            }
        }
    }
    for tone in &spec.tones {
        for (i, v) in values.iter_mut().enumerate() {
            *v += tone.amplitude * (TAU * tone.frequency * i as f64 * dt + tone.phase).sin();
        }
    }
    Ok(Waveform { t0: 0.0, dt, values })
}

/// Technical disturbances. `q_mod` amplitude is a transverse momentum
/// (1/m); `angular_jitter` is the per-shot angle deviation (rad);
/// `detector_jitter` the per-shot detector offset deviation (m).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DisturbanceSet {
    pub d_mod: Option<Sinusoid>,
    pub q_mod: Option<Sinusoid>,
    pub angular_jitter: f64,
    pub detector_jitter: f64,
    pub laser_jitter: Option<LaserJitterSpec>,
}

impl DisturbanceSet {
    pub fn validate(&self) -> Result<()> {
        if !(self.angular_jitter >= 0.0) {
            return Err(Error::domain("Q", self.angular_jitter, "Q >= 0"));
        }
        if !(self.detector_jitter >= 0.0) {
            return Err(Error::domain("J", self.detector_jitter, "J >= 0"));
        }
        if let Some(spec) = &self.laser_jitter {
            for t in &spec.tones {
                if !(t.amplitude >= 0.0) || !(t.frequency > 0.0) {
                    return Err(Error::domain(
                        "laser tone",
                        t.amplitude,
                        "amplitude >= 0, frequency > 0",
                    ));
                }
            }
            if let Some(n) = spec.noise {
                if !(n.rms >= 0.0) || !(n.cutoff > 0.0) {
                    return Err(Error::domain("laser noise", n.rms, "rms >= 0, cutoff > 0"));
                }
            }
        }
        Ok(())
    }

    /// Deterministic part at time `t` (laser jitter not included).
    pub fn at(&self, t: f64) -> DisturbanceState {
        DisturbanceState {
            d: self.d_mod.map_or(0.0, |s| s.at(t)),
            q: self.q_mod.map_or(0.0, |s| s.at(t)),
            angle: 0.0,
            angular_jitter: self.angular_jitter,
            detector_jitter: self.detector_jitter,
        }
    }
}

/// Disturbances frozen for one batch.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DisturbanceState {
    /// Detector offset (m).
    pub d: f64,
    /// Transverse momentum (1/m).
    pub q: f64,
    /// Extra deterministic upstream angle (rad), e.g. a laser-jitter sample.
    pub angle: f64,
    pub angular_jitter: f64,
    pub detector_jitter: f64,
}

impl DisturbanceState {
    /// Mean displacement the disturbances add to every port.
    pub fn offset(&self, beam: &Beam, technique: &Technique) -> f64 {
        self.d + technique.lever_arm() * (self.q / beam.k0() + self.angle)
    }

    /// Per-shot displacement deviation from the jitters.
    pub fn shot_spread(&self, technique: &Technique) -> f64 {
        (technique.lever_arm() * self.angular_jitter).hypot(self.detector_jitter)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhotonBatch {
    pub positions: Vec<f64>,
    pub port: Port,
    pub t: f64,
    pub seed_path: StreamId,
}

impl PhotonBatch {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn mean(&self) -> Option<f64> {
        if self.positions.is_empty() {
            return None;
        }
        Some(pairwise_sum(&self.positions) / self.positions.len() as f64)
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> Option<f64> {
        let n = self.positions.len();
        if n < 2 {
            return None;
        }
        let m = self.mean()?;
        let dev: Vec<f64> = self.positions.iter().map(|x| (x - m) * (x - m)).collect();
        Some(pairwise_sum(&dev) / (n - 1) as f64)
    }
}

/// Pairwise summation; result depends only on the slice, not on scheduling.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 64 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Port pdfs for a technique, including deterministic disturbance offsets
/// and the jitter-broadened width.
pub fn port_pdfs(
    beam: &Beam,
    technique: &Technique,
    k: &Kick,
    state: &DisturbanceState,
) -> Vec<(Port, f64, GaussianPdf)> {
    let offset = state.offset(beam, technique);
    let spread = state.shot_spread(technique);
    let widen = |p: GaussianPdf| GaussianPdf {
        mean: p.mean + offset,
        std: p.std.hypot(spread),
    };
    match technique {
        Technique::WeakValue(wv) => {
            let (p_dark, p_bright) = port_probabilities(wv);
            vec![
                (
                    Port::Dark,
                    p_dark,
                    widen(pdf_wv(beam, wv, k, Port::Dark).expect("dark port")),
                ),
                (
                    Port::Bright,
                    p_bright,
                    widen(pdf_wv(beam, wv, k, Port::Bright).expect("bright port")),
                ),
            ]
        }
        Technique::Standard(st) => vec![(Port::Standard, 1.0, widen(pdf_st(beam, st, k)))],
    }
}

/// Draws `n` photons at time `t`. Returns `[dark, bright]` for the WVT and
/// `[st]` for the ST.
pub fn sample_batch(
    beam: &Beam,
    technique: &Technique,
    k: &Kick,
    disturbances: &DisturbanceSet,
    t: f64,
    n: usize,
    stream: StreamId,
) -> Vec<PhotonBatch> {
    sample_batch_at(beam, technique, k, &disturbances.at(t), t, n, stream)
}

/// As [`sample_batch`] with an explicit disturbance state.
pub fn sample_batch_at(
    beam: &Beam,
    technique: &Technique,
    k: &Kick,
    state: &DisturbanceState,
    t: f64,
    n: usize,
    stream: StreamId,
) -> Vec<PhotonBatch> {
    let mut rng = stream.rng();
    let offset = state.offset(beam, technique);
    let lever = technique.lever_arm();
    let draw = |rng: &mut rand_chacha::ChaCha8Rng, centre: f64, std: f64| -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        let mut x = centre + offset + std * z;
        if state.angular_jitter > 0.0 {
            let a: f64 = rng.sample(StandardNormal);
            x += lever * state.angular_jitter * a;
        }
        if state.detector_jitter > 0.0 {
            let j: f64 = rng.sample(StandardNormal);
            x += state.detector_jitter * j;
        }
        x
    };
    match technique {
        Technique::WeakValue(wv) => {
            let (p_dark, _) = port_probabilities(wv);
            let dark = pdf_wv(beam, wv, k, Port::Dark).expect("dark port");
            let bright = pdf_wv(beam, wv, k, Port::Bright).expect("bright port");
            let mut dark_x = Vec::with_capacity((n as f64 * p_dark * 1.1) as usize + 8);
            let mut bright_x = Vec::with_capacity(n);
            for _ in 0..n {
                if rng.random::<f64>() < p_dark {
                    let x = draw(&mut rng, dark.mean, dark.std);
                    dark_x.push(x);
                } else {
                    let x = draw(&mut rng, bright.mean, bright.std);
                    bright_x.push(x);
                }
            }
            vec![
                PhotonBatch {
                    positions: dark_x,
                    port: Port::Dark,
                    t,
                    seed_path: stream,
                },
                PhotonBatch {
                    positions: bright_x,
                    port: Port::Bright,
                    t,
                    seed_path: stream,
                },
            ]
        }
        Technique::Standard(st) => {
            let pdf = pdf_st(beam, st, k);
            let xs = (0..n).map(|_| draw(&mut rng, pdf.mean, pdf.std)).collect();
            vec![PhotonBatch {
                positions: xs,
                port: Port::Standard,
                t,
                seed_path: stream,
            }]
        }
    }
}

/// Only the photon-count ports of a batch that a split detector sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SplitCounts {
    pub left: u64,
    pub right: u64,
}

impl SplitCounts {
    pub fn total(&self) -> u64 {
        self.left + self.right
    }

    pub fn from_batch(batch: &PhotonBatch) -> Self {
        let right = batch.positions.iter().filter(|&&x| x > 0.0).count() as u64;
        Self {
            left: batch.len() as u64 - right,
            right,
        }
    }
}

/// Split-detector counts per port for `n_photons` input photons, drawn with
/// binomials from the same per-photon distribution [`sample_batch_at`] uses.
pub fn sample_split_counts<R: Rng + ?Sized>(
    beam: &Beam,
    technique: &Technique,
    k: &Kick,
    state: &DisturbanceState,
    n_photons: u64,
    rng: &mut R,
) -> Vec<(Port, SplitCounts)> {
    let mut out = Vec::with_capacity(2);
    let pdfs = port_pdfs(beam, technique, k, state);
    let mut remaining = n_photons;
    let last = pdfs.len() - 1;
    for (i, (port, p, pdf)) in pdfs.into_iter().enumerate() {
        let n_port = if i == last {
            remaining
        } else {
            binomial(remaining, p, rng)
        };
        remaining -= n_port;
        let right = binomial(n_port, 1.0 - pdf.cdf(0.0), rng);
        out.push((
            port,
            SplitCounts {
                left: n_port - right,
                right,
            },
        ));
    }
    out
}

fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("p in (0, 1)").sample(rng)
}

/// Photons per sample window: `power T / (h c / lambda)`, rounded up with
/// probability equal to the fractional part.
pub fn photon_budget<R: Rng + ?Sized>(power: f64, sample_time: f64, lambda: f64, rng: &mut R) -> u64 {
    let mean = mean_photons(power, sample_time, lambda);
    let base = mean.floor();
    let extra = if rng.random::<f64>() < mean - base { 1 } else { 0 };
    base as u64 + extra
}

pub fn mean_photons(power: f64, sample_time: f64, lambda: f64) -> f64 {
    power * sample_time * lambda / (PLANCK * SPEED_OF_LIGHT)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{BeamParams, StConfig, WvConfig};
    use crate::rng::domain;
    use approx::assert_relative_eq;

    fn beam() -> Beam {
        BeamParams::new(1.075e-3, 780e-9).unwrap()
    }

    fn wv() -> Wv {
        WvConfig::new(0.38, 0.34).unwrap()
    }

    fn st() -> crate::St {
        StConfig::new(1.0, &beam()).unwrap()
    }

    fn id(i: u64) -> StreamId {
        StreamId::new(11, domain::BATCH, i)
    }

    #[test]
    fn pdf_means() {
        let b = beam();
        let k = Kick::from_angle(24e-9, &b);
        let dark = pdf_wv(&b, &wv(), &k, Port::Dark).unwrap();
        assert_relative_eq!(dark.mean, -2.3234e-6, max_relative = 1e-4);
        assert_eq!(dark.std, b.sigma());
        let zero = pdf_wv(&b, &wv(), &Kick::new(0.0, &b), Port::Bright).unwrap();
        assert_eq!(zero.mean, 0.0);
        let s = pdf_st(&b, &st(), &k);
        assert_relative_eq!(s.mean, 24e-9, max_relative = 1e-12);
        assert_relative_eq!(s.std, 57.74e-6, max_relative = 1e-3);
        assert!(pdf_wv(&b, &wv(), &k, Port::Standard).is_err());
    }

    #[test]
    fn empty_batch() {
        let b = beam();
        let out = sample_batch(
            &b,
            &Technique::Standard(st()),
            &Kick::new(0.0, &b),
            &DisturbanceSet::default(),
            0.0,
            0,
            id(0),
        );
        assert_eq!(out.len(), 1);
        assert!(out[0].is_empty());
    }

    #[test]
    fn centred_batch_mean() {
        let b = beam();
        let n = 1_000_000;
        let out = sample_batch(
            &b,
            &Technique::Standard(st()),
            &Kick::new(0.0, &b),
            &DisturbanceSet::default(),
            0.0,
            n,
            id(1),
        );
        let m = out[0].mean().unwrap();
        assert!(m.abs() < 5.0 * st().sigma_f() / (n as f64).sqrt());
    }

    #[test]
    fn q_and_angle_offset_route_identically() {
        let b = beam();
        let tech = Technique::WeakValue(wv());
        let k = Kick::new(0.1, &b);
        let theta = 1e-6;
        let via_q = DisturbanceState {
            q: b.k0() * theta,
            ..Default::default()
        };
        let via_angle = DisturbanceState {
            angle: theta,
            ..Default::default()
        };
        let a = sample_batch_at(&b, &tech, &k, &via_q, 0.0, 2000, id(3));
        let c = sample_batch_at(&b, &tech, &k, &via_angle, 0.0, 2000, id(3));
        for (x, y) in a.iter().zip(&c) {
            assert_eq!(x.len(), y.len());
            for (p, q) in x.positions.iter().zip(&y.positions) {
                assert_relative_eq!(*p, *q, max_relative = 1e-12, epsilon = 1e-18);
            }
        }
    }

    #[test]
    fn same_stream_same_batch() {
        let b = beam();
        let d = DisturbanceSet {
            angular_jitter: 1e-6,
            detector_jitter: 1e-7,
            ..Default::default()
        };
        let a = sample_batch(
            &b,
            &Technique::WeakValue(wv()),
            &Kick::new(0.2, &b),
            &d,
            0.0,
            1000,
            id(4),
        );
        let c = sample_batch(
            &b,
            &Technique::WeakValue(wv()),
            &Kick::new(0.2, &b),
            &d,
            0.0,
            1000,
            id(4),
        );
        assert_eq!(a, c);
    }

    #[test]
    fn split_counts_conserve_photons() {
        let b = beam();
        let mut rng = id(5).rng();
        let counts = sample_split_counts(
            &b,
            &Technique::WeakValue(wv()),
            &Kick::new(0.2, &b),
            &DisturbanceState::default(),
            1_000_000_007,
            &mut rng,
        );
        let total: u64 = counts.iter().map(|(_, c)| c.total()).sum();
        assert_eq!(total, 1_000_000_007);
        let dark = counts[0].1.total() as f64 / 1_000_000_007.0;
        assert!((dark - 0.19f64.sin().powi(2)).abs() < 5.0 * (0.0357f64 / 1e9).sqrt());
    }

    #[test]
    fn photon_budget_examples() {
        // 400 uW for 8 us at 780 nm
        assert_relative_eq!(mean_photons(4e-4, 8e-6, 780e-9), 1.25652e10, max_relative = 1e-5);
        let mut rng = id(6).rng();
        let mean: f64 = (0..20000)
            .map(|_| photon_budget(1e-18, 1.0, 780e-9, &mut rng) as f64)
            .sum::<f64>()
            / 20000.0;
        let expect = mean_photons(1e-18, 1.0, 780e-9);
        assert!((mean - expect).abs() < 0.03, "{mean} vs {expect}");
    }

    #[test]
    fn laser_jitter_examples() {
        let empty = laser_jitter_waveform(&LaserJitterSpec::default(), 1.0, 1000.0, id(7)).unwrap();
        assert!(empty.values.iter().all(|&v| v == 0.0));

        let spec = LaserJitterSpec::default_wild();
        assert_relative_eq!(spec.peak_to_peak(), 0.3e-6, max_relative = 0.01);
        let w = laser_jitter_waveform(&spec, 4.0, 2000.0, id(8)).unwrap();
        assert_relative_eq!(w.rms(), spec.rms(), max_relative = 0.02);
        let w2 = laser_jitter_waveform(&spec.scaled(2.0), 4.0, 2000.0, id(8)).unwrap();
        assert_relative_eq!(w2.rms(), 2.0 * w.rms(), max_relative = 1e-12);

        assert!(matches!(
            laser_jitter_waveform(&spec, 1.0, 500.0, id(9)),
            Err(Error::Aliasing { .. })
        ));
    }

    #[test]
    fn window_mean_integrates_piecewise_constant() {
        let w = Waveform {
            t0: 0.0,
            dt: 1.0,
            values: vec![1.0, 3.0, 5.0],
        };
        assert_relative_eq!(w.window_mean(0.0, 2.0), 2.0);
        assert_relative_eq!(w.window_mean(0.5, 1.5), 2.0);
        assert_relative_eq!(w.window_mean(1.25, 1.75), 3.0);
        assert_eq!(w.window_mean(5.0, 6.0), 0.0);
    }

    #[test]
    fn waveform_csv_header() {
        let w = Waveform {
            t0: 0.0,
            dt: 0.5,
            values: vec![1.0, 2.0],
        };
        let mut buf = Vec::new();
        w.write_csv(&mut buf, "theta_rad").unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,theta_rad\n"));
        assert_eq!(text.lines().count(), 3);
    }
}
