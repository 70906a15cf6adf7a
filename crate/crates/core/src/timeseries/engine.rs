//! Detector voltage time series for both techniques.
//!
//! Each sample window of length `T` draws its photon budget, the split
//! counts of every port, and the electronic noise from its own random
//! stream, so samples can be generated in parallel and reassembled in order.

use super::drive::DriveWaveform;
use crate::detector::{counts_to_voltage, EmptyBatch, SplitDetector};
use crate::error::{Error, Result};
use crate::optics::port_probabilities;
use crate::rng::{domain, StreamId};
use crate::sampler::{mean_photons, photon_budget, sample_split_counts, DisturbanceSet, Port, Waveform};
use crate::{Beam, Kick, St, Technique, Wv};
use rayon::prelude::*;

/// Split-detector settings shared by every channel. `responsivity` (V/W)
/// turns detected optical power into `V_total`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSettings {
    pub alpha_cal: f64,
    pub sigma_j: f64,
    pub responsivity: f64,
    pub saturation_v: Option<f64>,
}

/// Everything needed to synthesize traces.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub beam: Beam,
    pub wv: Wv,
    pub st: St,
    pub drive: DriveWaveform,
    pub disturbances: DisturbanceSet,
    pub detector: DetectorSettings,
    pub power_wv: f64,
    pub power_st: f64,
    /// Fixed input photons per sample instead of the power-derived budget.
    pub photons_per_sample: Option<f64>,
    /// Laser-jitter angle applied to both techniques, averaged over each
    /// sample window.
    pub laser: Option<Waveform>,
}

/// One detector channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    WvDark,
    WvBright,
    St,
}

impl Channel {
    pub fn port(self) -> Port {
        match self {
            Channel::WvDark => Port::Dark,
            Channel::WvBright => Port::Bright,
            Channel::St => Port::Standard,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::WvDark => "wv_dark",
            Channel::WvBright => "wv_bright",
            Channel::St => "st",
        }
    }
}

impl Simulation {
    pub fn technique(&self, channel: Channel) -> Technique {
        match channel {
            Channel::WvDark | Channel::WvBright => Technique::WeakValue(self.wv),
            Channel::St => Technique::Standard(self.st),
        }
    }

    pub fn input_power(&self, channel: Channel) -> f64 {
        match channel {
            Channel::St => self.power_st,
            _ => self.power_wv,
        }
    }

    /// Fraction of the input light reaching the channel's detector.
    pub fn port_fraction(&self, channel: Channel) -> f64 {
        let (dark, bright) = port_probabilities(&self.wv);
        match channel {
            Channel::WvDark => dark,
            Channel::WvBright => bright,
            Channel::St => 1.0,
        }
    }

    /// Mean input photons per sample of length `sample_time`.
    pub fn mean_input_photons(&self, channel: Channel, sample_time: f64) -> f64 {
        self.photons_per_sample
            .unwrap_or_else(|| mean_photons(self.input_power(channel), sample_time, self.beam.lambda()))
    }

    /// Mean photons per sample on the channel's detector.
    pub fn mean_detected_photons(&self, channel: Channel, sample_time: f64) -> f64 {
        self.mean_input_photons(channel, sample_time) * self.port_fraction(channel)
    }

    pub fn v_total(&self, channel: Channel) -> f64 {
        self.detector.responsivity * self.input_power(channel) * self.port_fraction(channel)
    }

    pub fn detector_for(&self, channel: Channel, sample_time: f64) -> Result<SplitDetector> {
        SplitDetector::new(
            self.detector.alpha_cal,
            self.detector.sigma_j,
            self.v_total(channel),
            sample_time,
        )?
        .with_saturation(self.detector.saturation_v)
    }

    /// Geometric lever of each technique. Exposed for analyses that convert
    /// modulations to kick units.
    pub fn lever(&self, channel: Channel) -> f64 {
        self.technique(channel).lever_arm()
    }
}

/// Synthesized voltages. `t` holds window start times; the drive and
/// deterministic disturbances are evaluated at window centres.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Traces {
    pub sample_time: f64,
    pub t: Vec<f64>,
    pub k: Vec<f64>,
    pub wv_dark: Vec<f64>,
    pub wv_bright: Vec<f64>,
    pub st: Vec<f64>,
}

impl Traces {
    pub fn channel(&self, channel: Channel) -> &[f64] {
        match channel {
            Channel::WvDark => &self.wv_dark,
            Channel::WvBright => &self.wv_bright,
            Channel::St => &self.st,
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

struct Sample {
    k: f64,
    dark: f64,
    bright: f64,
    st: f64,
}

/// `n_samples` consecutive windows of length `sample_time` starting at
/// `start`. Sample `i` uses stream `stream.child(TIME_SAMPLE, i)`.
pub fn run_timeseries(
    sim: &Simulation,
    start: f64,
    n_samples: usize,
    sample_time: f64,
    stream: StreamId,
) -> Result<Traces> {
    if !(sample_time > 0.0) {
        return Err(Error::domain("T", sample_time, "T > 0"));
    }
    sim.disturbances.validate()?;
    sim.drive.validate()?;
    for ch in [Channel::WvDark, Channel::St] {
        if sim.mean_input_photons(ch, sample_time) <= 0.0 && sim.detector.sigma_j == 0.0 {
            return Err(Error::Degenerate(format!(
                "{} has no photons and no detector noise",
                ch.name()
            )));
        }
    }
    let det_dark = sim.detector_for(Channel::WvDark, sample_time)?;
    let det_bright = sim.detector_for(Channel::WvBright, sample_time)?;
    let det_st = sim.detector_for(Channel::St, sample_time)?;
    let wv = Technique::WeakValue(sim.wv);
    let st = Technique::Standard(sim.st);

    let samples: Vec<Result<Sample>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let t0 = start + i as f64 * sample_time;
            let tc = t0 + 0.5 * sample_time;
            let mut rng = stream.child(domain::TIME_SAMPLE, i as u64).rng();
            let k_val = sim.drive.at(tc);
            let kick = Kick::new(k_val, &sim.beam);
            let mut state = sim.disturbances.at(tc);
            if let Some(laser) = &sim.laser {
                state.angle += laser.window_mean(t0, t0 + sample_time);
            }
            let n_wv = match sim.photons_per_sample {
                Some(n) => n.round() as u64,
                None => photon_budget(sim.power_wv, sample_time, sim.beam.lambda(), &mut rng),
            };
            let wv_counts = sample_split_counts(&sim.beam, &wv, &kick, &state, n_wv, &mut rng);
            let dark = counts_to_voltage(wv_counts[0].1, &det_dark, &mut rng, EmptyBatch::NoiseOnly)?;
            let bright = counts_to_voltage(wv_counts[1].1, &det_bright, &mut rng, EmptyBatch::NoiseOnly)?;
            let n_st = match sim.photons_per_sample {
                Some(n) => n.round() as u64,
                None => photon_budget(sim.power_st, sample_time, sim.beam.lambda(), &mut rng),
            };
            let st_counts = sample_split_counts(&sim.beam, &st, &kick, &state, n_st, &mut rng);
            let st_v = counts_to_voltage(st_counts[0].1, &det_st, &mut rng, EmptyBatch::NoiseOnly)?;
            Ok(Sample {
                k: k_val,
                dark,
                bright,
                st: st_v,
            })
        })
        .collect();

    let mut out = Traces {
        sample_time,
        t: Vec::with_capacity(n_samples),
        k: Vec::with_capacity(n_samples),
        wv_dark: Vec::with_capacity(n_samples),
        wv_bright: Vec::with_capacity(n_samples),
        st: Vec::with_capacity(n_samples),
    };
    for (i, s) in samples.into_iter().enumerate() {
        let s = s?;
        out.t.push(start + i as f64 * sample_time);
        out.k.push(s.k);
        out.wv_dark.push(s.dark);
        out.wv_bright.push(s.bright);
        out.st.push(s.st);
    }
    Ok(out)
}

/// `n_segments` back-to-back segments of `segment_len` samples, segment `s`
/// drawn from `stream.child(SEGMENT, s)`.
pub fn run_segments(
    sim: &Simulation,
    n_segments: usize,
    segment_len: usize,
    sample_time: f64,
    stream: StreamId,
) -> Result<Vec<Traces>> {
    (0..n_segments)
        .map(|s| {
            let start = (s * segment_len) as f64 * sample_time;
            run_timeseries(
                sim,
                start,
                segment_len,
                sample_time,
                stream.child(domain::SEGMENT, s as u64),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::alpha_cal_ideal;
    use crate::optics::{BeamParams, StConfig, WvConfig};

    fn sim() -> Simulation {
        let beam = BeamParams::new(1.075e-3, 780e-9).unwrap();
        Simulation {
            beam,
            wv: WvConfig::new(0.38, 0.34).unwrap(),
            st: StConfig::new(1.0, &beam).unwrap(),
            drive: DriveWaveform::zero(),
            disturbances: DisturbanceSet::default(),
            detector: DetectorSettings {
                alpha_cal: alpha_cal_ideal(),
                sigma_j: 0.0,
                responsivity: 2500.0,
                saturation_v: None,
            },
            power_wv: 1.45e-3,
            power_st: 4e-4,
            photons_per_sample: None,
            laser: None,
        }
    }

    #[test]
    fn zero_drive_is_centred() {
        let s = sim();
        let tr = run_timeseries(&s, 0.0, 2000, 8e-6, StreamId::new(1, 0, 0)).unwrap();
        assert_eq!(tr.len(), 2000);
        let n = tr.st.len() as f64;
        let mean = tr.st.iter().sum::<f64>() / n;
        let per_sample = s.v_total(Channel::St) / s.mean_input_photons(Channel::St, 8e-6).sqrt();
        assert!(mean.abs() < 5.0 * per_sample / n.sqrt());
    }

    #[test]
    fn degenerate_budget() {
        let mut s = sim();
        s.photons_per_sample = Some(0.0);
        assert!(matches!(
            run_timeseries(&s, 0.0, 10, 8e-6, StreamId::new(1, 0, 0)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn v_totals() {
        let s = sim();
        assert!((s.v_total(Channel::St) - 1.0).abs() < 1e-12);
        let dark = 2500.0 * 1.45e-3 * 0.19f64.sin().powi(2);
        assert!((s.v_total(Channel::WvDark) - dark).abs() < 1e-12);
    }

    #[test]
    fn deterministic_across_calls() {
        let s = sim();
        let a = run_timeseries(&s, 0.0, 300, 8e-6, StreamId::new(9, 0, 0)).unwrap();
        let b = run_timeseries(&s, 0.0, 300, 8e-6, StreamId::new(9, 0, 0)).unwrap();
        assert_eq!(a, b);
    }
}
