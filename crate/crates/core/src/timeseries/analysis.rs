//! Sweeps and comparisons built on the time-series engine.

use super::drive::DriveWaveform;
use super::engine::{run_segments, run_timeseries, Channel, Simulation};
use super::spectrum::{averaged_spectrum, floor_to_rms, SpectrumResult};
use crate::error::{Error, Result};
use crate::inference::{
    deviation_ratio, estimate_k_split, fisher_fraction_from_snr, geometry_factor, EstimationReport,
};
use crate::optics::{ratio_of_ratios, ratio_r, Modulation, WvConfig};
use crate::rng::{domain, StreamId};
use crate::sampler::{laser_jitter_waveform, LaserJitterSpec, Sinusoid};
use crate::{Beam, Kick, Technique};
use serde::Serialize;

/// Slopes measured experimentally, kept for comparison.
pub const MEASURED_SLOPE_MOMENTUM: f64 = 258.0;
pub const MEASURED_SLOPE_DETECTOR: f64 = 51.0;
/// Measured WVT-over-ST factors from the spectrum comparison.
pub const MEASURED_SIGNAL_GAIN: f64 = 3.2;
pub const MEASURED_D_SUPPRESSION: f64 = 11.0;
pub const MEASURED_Q_SUPPRESSION: f64 = 28.0;
/// Relative errors and suppression reported for the laser-jitter run.
pub const REFERENCE_RELATIVE_ERROR_ST: f64 = 144.0;
pub const REFERENCE_RELATIVE_ERROR_WV: f64 = 5.0;
pub const REFERENCE_JITTER_SUPPRESSION: f64 = 29.0;
pub const REFERENCE_SINGLE_TONE_SUPPRESSION: f64 = 44.0;

/// External modulation type. Detector amplitudes are in meters, momentum
/// amplitudes are angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModKind {
    Detector,
    Momentum,
}

impl ModKind {
    pub fn name(self) -> &'static str {
        match self {
            ModKind::Detector => "detector",
            ModKind::Momentum => "momentum",
        }
    }

    /// Displacement on the detector per unit amplitude.
    pub fn displacement_per_unit(self, technique: &Technique) -> f64 {
        match self {
            ModKind::Detector => 1.0,
            ModKind::Momentum => technique.lever_arm(),
        }
    }

    fn to_modulation(self, amplitude: f64, beam: &Beam) -> Modulation<f64> {
        match self {
            ModKind::Detector => Modulation::Detector(amplitude),
            ModKind::Momentum => Modulation::Momentum(beam.k0() * amplitude),
        }
    }

    /// Replaces the modulations of `sim` with this one.
    fn install(self, sim: &mut Simulation, amplitude: f64, frequency: f64) -> Result<()> {
        let tone = Sinusoid::new(amplitude, frequency, 0.0)?;
        sim.disturbances.d_mod = None;
        sim.disturbances.q_mod = None;
        match self {
            ModKind::Detector => sim.disturbances.d_mod = Some(tone),
            ModKind::Momentum => {
                sim.disturbances.q_mod = Some(Sinusoid {
                    amplitude: amplitude * sim.beam.k0(),
                    ..tone
                })
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub r2: f64,
    pub n: usize,
}

/// Least-squares line through the origin of `y` against `x`, with `r^2`
/// about the mean of `y`.
pub fn slope_fit_r(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientPoints {
            need: 3,
            got: points.len(),
        });
    }
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all x values are zero".into()));
    }
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let slope = sxy / sxx;
    let mean_y = points.iter().map(|(_, y)| y).sum::<f64>() / points.len() as f64;
    let ss_res: f64 = points.iter().map(|(x, y)| (y - slope * x).powi(2)).sum();
    let ss_tot: f64 = points.iter().map(|(_, y)| (y - mean_y).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(SlopeFit {
        slope,
        r2,
        n: points.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopePoint {
    pub amplitude: f64,
    pub kick_angle: f64,
    pub r_st: f64,
    pub r_wv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeSweep {
    pub kind: ModKind,
    pub points: Vec<SlopePoint>,
    pub fit: SlopeFit,
    pub predicted: f64,
}

/// `R_wv` against `R_st` from the closed-form shifts.
pub fn ideal_slope_sweep(
    beam: &Beam,
    wv: &WvConfig<f64>,
    st: &crate::St,
    kind: ModKind,
    amplitudes: &[f64],
    kick_angles: &[f64],
) -> Result<SlopeSweep> {
    let mut points = Vec::new();
    for &theta in kick_angles {
        let k = Kick::from_angle(theta, beam);
        for &a in amplitudes {
            let m = kind.to_modulation(a, beam);
            points.push(SlopePoint {
                amplitude: a,
                kick_angle: theta,
                r_st: ratio_r(beam, &Technique::Standard(*st), &k, m)?,
                r_wv: ratio_r(beam, &Technique::WeakValue(*wv), &k, m)?,
            });
        }
    }
    let fit = slope_fit_r(&points.iter().map(|p| (p.r_st, p.r_wv)).collect::<Vec<_>>())?;
    Ok(SlopeSweep {
        kind,
        points,
        fit,
        predicted: ratio_of_ratios(beam, wv, st, kind == ModKind::Detector),
    })
}

/// Acquisition settings of a spectral measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralAcquisition {
    pub sample_time: f64,
    pub segment_len: usize,
    pub n_averages: usize,
}

/// Spectra of the WVT dark port and of the ST.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumPair {
    pub wv: SpectrumResult,
    pub st: SpectrumResult,
    pub wv_bright: SpectrumResult,
}

pub fn simulate_spectra(sim: &Simulation, acq: &SpectralAcquisition, stream: StreamId) -> Result<SpectrumPair> {
    let segments = run_segments(sim, acq.n_averages, acq.segment_len, acq.sample_time, stream)?;
    let pick = |ch: Channel| -> Result<SpectrumResult> {
        let tr: Vec<Vec<f64>> = segments.iter().map(|s| s.channel(ch).to_vec()).collect();
        averaged_spectrum(&tr, acq.n_averages, acq.sample_time, sim.v_total(ch))
    };
    Ok(SpectrumPair {
        wv: pick(Channel::WvDark)?,
        st: pick(Channel::St)?,
        wv_bright: pick(Channel::WvBright)?,
    })
}

/// Monte Carlo version of [`ideal_slope_sweep`]: `R` is the ratio of the
/// signal and modulation peaks in each technique's spectrum.
#[allow(clippy::too_many_arguments)]
pub fn mc_slope_sweep(
    sim: &Simulation,
    kind: ModKind,
    amplitudes: &[f64],
    kick_angles: &[f64],
    signal_freq: f64,
    mod_freq: f64,
    acq: &SpectralAcquisition,
    stream: StreamId,
) -> Result<SlopeSweep> {
    let mut points = Vec::new();
    for (ik, &theta) in kick_angles.iter().enumerate() {
        for (ia, &a) in amplitudes.iter().enumerate() {
            let mut s = sim.clone();
            s.drive = DriveWaveform::sine(sim.beam.k0() * theta, signal_freq, 0.0)?;
            kind.install(&mut s, a, mod_freq)?;
            s.laser = None;
            let idx = (ik * amplitudes.len() + ia) as u64;
            let spectra = simulate_spectra(&s, acq, stream.child(domain::SWEEP, idx))?;
            let r = |sp: &SpectrumResult| sp.peak(signal_freq) / sp.peak(mod_freq);
            points.push(SlopePoint {
                amplitude: a,
                kick_angle: theta,
                r_st: r(&spectra.st),
                r_wv: r(&spectra.wv),
            });
        }
    }
    let fit = slope_fit_r(&points.iter().map(|p| (p.r_st, p.r_wv)).collect::<Vec<_>>())?;
    Ok(SlopeSweep {
        kind,
        points,
        fit,
        predicted: ratio_of_ratios(&sim.beam, &sim.wv, &sim.st, kind == ModKind::Detector),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationPoint {
    pub amplitude: f64,
    /// Modulation rms in kick units.
    pub xi_rms: f64,
    pub delta_k: f64,
    pub delta_k_bound: f64,
    /// Monte Carlo `Delta k_B / Delta k`.
    pub ratio_mc: f64,
    /// `1 / sqrt(1 + xi^2 / Delta k_B^2)`.
    pub ratio_closed: f64,
    /// Standard deviation of `ratio_mc` expected from `n` samples.
    pub band_sigma: f64,
    pub within_3_sigma: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationCurve {
    pub channel: &'static str,
    pub kind: ModKind,
    pub points: Vec<DeviationPoint>,
}

/// Acquisition on the drive plateau.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlateauAcquisition {
    pub sample_time: f64,
    pub n_samples: usize,
    pub mod_freq: f64,
}

/// Standard deviation of `B / s` when `s^2` is the sample variance of `n`
/// points holding Gaussian noise of variance `B^2` on top of a deterministic
/// modulation of mean square `xi^2`.
pub fn deviation_band_sigma(bound: f64, xi: f64, delta_k: f64, n: usize) -> f64 {
    let var_s2 = (2.0 * bound.powi(4) + 4.0 * xi * xi * bound * bound) / n as f64;
    bound / (2.0 * delta_k.powi(3)) * var_s2.sqrt()
}

/// `Delta k_B / Delta k` for one channel over modulation amplitudes, one
/// plateau window per amplitude.
pub fn deviation_curve(
    sim: &Simulation,
    channel: Channel,
    kind: ModKind,
    amplitudes: &[f64],
    acq: &PlateauAcquisition,
    stream: StreamId,
) -> Result<DeviationCurve> {
    let technique = sim.technique(channel);
    let gain = geometry_factor(&sim.beam, &technique, channel.port())?;
    let det = sim.detector_for(channel, acq.sample_time)?;
    let window = acq.n_samples as f64 * acq.sample_time;
    let start = sim.drive.plateau_window_start(window)?;
    let photons = sim.mean_input_photons(channel, acq.sample_time);
    let per_unit = kind.displacement_per_unit(&technique) / gain.abs();
    let mut points = Vec::with_capacity(amplitudes.len());
    for (i, &a) in amplitudes.iter().enumerate() {
        let mut s = sim.clone();
        if a > 0.0 {
            kind.install(&mut s, a, acq.mod_freq)?;
        } else {
            s.disturbances.d_mod = None;
            s.disturbances.q_mod = None;
        }
        let tr = run_timeseries(
            &s,
            start,
            acq.n_samples,
            acq.sample_time,
            stream.child(domain::SWEEP, i as u64),
        )?;
        let report = estimate_k_split(tr.channel(channel), &det, &s.beam, &technique, channel.port(), photons)?;
        // Sample rms of the programmed modulation at the same instants, with
        // the same estimator as `delta_k`.
        let modv: Vec<f64> =
            tr.t.iter()
                .map(|&t| a * per_unit * (std::f64::consts::TAU * acq.mod_freq * (t + 0.5 * acq.sample_time)).sin())
                .collect();
        let m = modv.iter().sum::<f64>() / modv.len() as f64;
        let xi = (modv.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (modv.len() - 1).max(1) as f64).sqrt();
        let b = report.delta_k_bound;
        let closed = deviation_ratio(xi, b);
        let expected_dk = (b * b + xi * xi).sqrt();
        let band = deviation_band_sigma(b, xi, expected_dk, report.samples_used);
        let ratio_mc = b / report.delta_k;
        points.push(DeviationPoint {
            amplitude: a,
            xi_rms: xi,
            delta_k: report.delta_k,
            delta_k_bound: b,
            ratio_mc,
            ratio_closed: closed,
            band_sigma: band,
            within_3_sigma: (ratio_mc - closed).abs() <= 3.0 * band,
        });
    }
    Ok(DeviationCurve {
        channel: channel.name(),
        kind,
        points,
    })
}

/// Closed-form WVT/ST ratio of `Delta k_B / Delta k` at modulation rms
/// `amplitude_rms` (meters or radians) given the two bounds.
pub fn closed_form_advantage(
    sim: &Simulation,
    kind: ModKind,
    amplitude_rms: f64,
    bound_wv: f64,
    bound_st: f64,
) -> Result<f64> {
    let xi = |ch: Channel| -> Result<f64> {
        let tech = sim.technique(ch);
        let g = geometry_factor(&sim.beam, &tech, ch.port())?;
        Ok(amplitude_rms * kind.displacement_per_unit(&tech) / g.abs())
    };
    Ok(deviation_ratio(xi(Channel::WvDark)?, bound_wv) / deviation_ratio(xi(Channel::St)?, bound_st))
}

/// Time-domain settings of the laser-jitter comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeDomainAcquisition {
    pub sample_time: f64,
    pub n_samples: usize,
    /// Detector noise density used for the time-domain run.
    pub sigma_j: f64,
    /// Rate at which the jitter waveform is generated.
    pub jitter_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JitterSummary {
    pub spectra: Option<SpectrumPair>,
    pub tones: Vec<JitterTone>,
    pub floor_db_wv: f64,
    pub floor_db_st: f64,
    pub estimate_wv: EstimationReport,
    pub estimate_st: EstimationReport,
    /// `Delta k / Delta k_B`.
    pub relative_error_wv: f64,
    pub relative_error_st: f64,
    /// `relative_error_st / relative_error_wv`.
    pub suppression: f64,
    /// Same ratio for a single tone of the same peak-to-peak angle, from the
    /// closed form with the time-domain bounds.
    pub single_tone_suppression: f64,
    pub jitter_rms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JitterTone {
    pub freq_hz: f64,
    /// Jitter peak without electronic noise.
    pub dbv_wv: f64,
    pub dbv_st: f64,
    /// Peak in the spectrum with the configured detector noise.
    pub dbv_wv_total: f64,
    pub dbv_st_total: f64,
    /// WVT peak below the WVT noise floor.
    pub wv_below_floor: bool,
    /// ST peak margin over the ST noise floor (dB).
    pub st_margin_db: f64,
}

/// Laser jitter seen by both techniques: spectra with the scenario's
/// detector, and relative errors from a time-domain run.
pub fn jitter_comparison(
    sim: &Simulation,
    spec: &LaserJitterSpec,
    spectral: Option<&SpectralAcquisition>,
    td: &TimeDomainAcquisition,
    stream: StreamId,
) -> Result<JitterSummary> {
    let mut spectra = None;
    let mut tones = Vec::new();
    let (mut floor_wv, mut floor_st) = (f64::NAN, f64::NAN);
    if let Some(acq) = spectral {
        let mut s = sim.clone();
        let duration = (acq.n_averages * acq.segment_len) as f64 * acq.sample_time;
        s.laser = Some(laser_jitter_waveform(
            spec,
            duration,
            1.0 / acq.sample_time,
            stream.child(domain::LASER_JITTER, 0),
        )?);
        let pair = simulate_spectra(&s, acq, stream.child(domain::SEGMENT, 0))?;
        // Same jitter and streams without electronic noise: the jitter peaks
        // themselves, compared with the electronic floor of the full run.
        let mut quiet = s.clone();
        quiet.detector.sigma_j = 0.0;
        let clean = simulate_spectra(&quiet, acq, stream.child(domain::SEGMENT, 0))?;
        let tone_freqs: Vec<f64> = spec.tones.iter().map(|t| t.frequency).collect();
        let cutoff = spec.noise.map_or(0.0, |n| n.cutoff);
        // Floor from bins above the jitter band.
        let band_floor = |sp: &SpectrumResult| -> f64 {
            let start = sp.bin_of(2.0 * cutoff.max(tone_freqs.iter().cloned().fold(0.0, f64::max))) + 1;
            let vals = &sp.amplitude[start.min(sp.amplitude.len() - 1)..];
            20.0 * (vals.iter().sum::<f64>() / vals.len() as f64).log10()
        };
        floor_wv = band_floor(&pair.wv);
        floor_st = band_floor(&pair.st);
        for &f in &tone_freqs {
            let w = clean.wv.peak_db(f);
            let st_db = clean.st.peak_db(f);
            tones.push(JitterTone {
                freq_hz: f,
                dbv_wv: w,
                dbv_st: st_db,
                dbv_wv_total: pair.wv.peak_db(f),
                dbv_st_total: pair.st.peak_db(f),
                wv_below_floor: w < floor_wv,
                st_margin_db: st_db - floor_st,
            });
        }
        spectra = Some(pair);
    }

    let mut s = sim.clone();
    s.detector.sigma_j = td.sigma_j;
    s.drive = DriveWaveform::zero();
    let duration = td.n_samples as f64 * td.sample_time;
    s.laser = Some(laser_jitter_waveform(
        spec,
        duration,
        td.jitter_rate,
        stream.child(domain::LASER_JITTER, 1),
    )?);
    let jitter_rms = s.laser.as_ref().map_or(0.0, |w| w.rms());
    let tr = run_timeseries(&s, 0.0, td.n_samples, td.sample_time, stream.child(domain::SEGMENT, 1))?;
    let est = |ch: Channel| -> Result<EstimationReport> {
        let det = s.detector_for(ch, td.sample_time)?;
        estimate_k_split(
            tr.channel(ch),
            &det,
            &s.beam,
            &s.technique(ch),
            ch.port(),
            s.mean_input_photons(ch, td.sample_time),
        )
    };
    let estimate_wv = est(Channel::WvDark)?;
    let estimate_st = est(Channel::St)?;
    let re_wv = estimate_wv.delta_k / estimate_wv.delta_k_bound;
    let re_st = estimate_st.delta_k / estimate_st.delta_k_bound;
    let single = closed_form_advantage(
        &s,
        ModKind::Momentum,
        spec.peak_to_peak() / 2.0 / std::f64::consts::SQRT_2,
        estimate_wv.delta_k_bound,
        estimate_st.delta_k_bound,
    )?;
    Ok(JitterSummary {
        spectra,
        tones,
        floor_db_wv: floor_wv,
        floor_db_st: floor_st,
        estimate_wv,
        estimate_st,
        relative_error_wv: re_wv,
        relative_error_st: re_st,
        suppression: re_st / re_wv,
        single_tone_suppression: single,
        jitter_rms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FisherPoint {
    pub phi: f64,
    pub snr_dark: f64,
    pub snr_bright: f64,
    pub fraction_dark: f64,
    pub fraction_bright: f64,
    pub analytic_dark: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FisherSweep {
    pub points: Vec<FisherPoint>,
    /// Best `c` in `cos^2(c phi / 2)` for the dark fractions.
    pub fit_c: f64,
    pub r2: f64,
    pub photons_per_sample: f64,
}

/// SNR of the tone at `freq`: peak amplitude over per-bin noise rms.
pub fn tone_snr(spec: &SpectrumResult, freq: f64) -> f64 {
    let floor = floor_to_rms(spec.noise_floor(&[freq]));
    spec.peak(freq) / floor
}

/// Dark and bright port Fisher fractions from simulated spectra at each
/// post-selection angle, with a fit of `cos^2(c phi / 2)`.
pub fn fisher_sweep(
    sim: &Simulation,
    phis: &[f64],
    signal_freq: f64,
    acq: &SpectralAcquisition,
    stream: StreamId,
) -> Result<FisherSweep> {
    if phis.is_empty() {
        return Err(Error::Empty("phi grid"));
    }
    let mut points = Vec::with_capacity(phis.len());
    for (i, &phi) in phis.iter().enumerate() {
        let mut s = sim.clone();
        s.wv = WvConfig::new(phi, sim.wv.lever_arm())?;
        s.laser = None;
        let pair = simulate_spectra(&s, acq, stream.child(domain::SWEEP, i as u64))?;
        let snr_d = tone_snr(&pair.wv, signal_freq);
        let snr_b = tone_snr(&pair.wv_bright, signal_freq);
        let (fd, fb) = fisher_fraction_from_snr(snr_d, snr_b)?;
        points.push(FisherPoint {
            phi,
            snr_dark: snr_d,
            snr_bright: snr_b,
            fraction_dark: fd,
            fraction_bright: fb,
            analytic_dark: (phi / 2.0).cos().powi(2),
        });
    }
    let (fit_c, r2) = fit_cos2(&points)?;
    Ok(FisherSweep {
        points,
        fit_c,
        r2,
        photons_per_sample: sim.mean_input_photons(Channel::WvDark, acq.sample_time),
    })
}

fn fit_cos2(points: &[FisherPoint]) -> Result<(f64, f64)> {
    let sse = |c: f64| -> f64 {
        points
            .iter()
            .map(|p| (p.fraction_dark - (c * p.phi / 2.0).cos().powi(2)).powi(2))
            .sum()
    };
    // Golden-section search on c.
    let (mut a, mut b) = (0.0f64, 3.0f64);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..200 {
        if sse(c) < sse(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    let best = 0.5 * (a + b);
    let n = points.len() as f64;
    let mean = points.iter().map(|p| p.fraction_dark).sum::<f64>() / n;
    let ss_tot: f64 = points.iter().map(|p| (p.fraction_dark - mean).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - sse(best) / ss_tot } else { 1.0 };
    Ok((best, r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{BeamParams, StConfig};

    #[test]
    fn fit_through_origin() {
        let pts: Vec<(f64, f64)> = (1..=5).map(|i| (i as f64, 3.0 * i as f64)).collect();
        let f = slope_fit_r(&pts).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!(slope_fit_r(&pts[..2]).is_err());
    }

    #[test]
    fn ideal_slopes() {
        let beam = BeamParams::new(1.075e-3, 780e-9).unwrap();
        let wv = WvConfig::new(0.38, 0.34).unwrap();
        let st = StConfig::new(1.0, &beam).unwrap();
        let amps: Vec<f64> = (1..=12).map(|i| i as f64 * 1e-8).collect();
        let d = ideal_slope_sweep(&beam, &wv, &st, ModKind::Detector, &amps, &[24e-9, 8e-9]).unwrap();
        assert!((d.fit.slope / d.predicted - 1.0).abs() < 1e-12);
        assert!((d.fit.slope - 96.8).abs() < 1.0);
        let qa: Vec<f64> = (1..=12).map(|i| i as f64 * 2e-7).collect();
        let q = ideal_slope_sweep(&beam, &wv, &st, ModKind::Momentum, &qa, &[24e-9]).unwrap();
        assert!((q.fit.slope - 284.7).abs() < 1.0);
    }

    #[test]
    fn band_shrinks_with_samples() {
        let a = deviation_band_sigma(1.0, 0.5, 1.118, 500);
        let b = deviation_band_sigma(1.0, 0.5, 1.118, 2000);
        assert!((a / b - 2.0).abs() < 1e-12);
    }
}
