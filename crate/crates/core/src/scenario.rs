//! Scenario files: one JSON document describing the apparatus, the drive,
//! the disturbances, the detector and the acquisition, plus optional
//! analysis settings.
//!
//! Quantities accept unit suffixes (`"1.075 mm"`, `"24 nrad"`); serialization
//! writes plain SI numbers. The drive amplitude and `q` modulation are given
//! as angles and converted to transverse momentum with `k0`.

use crate::detector::alpha_cal_ideal;
use crate::error::{Error, Result};
use crate::optics::{weak_validity, BeamParams, StConfig, WvConfig};
use crate::sampler::{BandNoise, DisturbanceSet, LaserJitterSpec, Sinusoid, Tone};
use crate::timeseries::{
    DetectorSettings, DriveKind, DriveWaveform, ModKind, PlateauAcquisition, Simulation, SpectralAcquisition,
    TimeDomainAcquisition,
};
use crate::units;
use crate::{Beam, Kick};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const PRESET_NAMES: [&str; 7] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "crb"];

fn preset_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig2" => include_str!("../presets/fig2.json"),
        "fig3" => include_str!("../presets/fig3.json"),
        "fig4" => include_str!("../presets/fig4.json"),
        "fig5" => include_str!("../presets/fig5.json"),
        "fig6" => include_str!("../presets/fig6.json"),
        "fig7" => include_str!("../presets/fig7.json"),
        "crb" => include_str!("../presets/crb.json"),
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    #[serde(with = "units::length")]
    pub sigma: f64,
    #[serde(with = "units::length")]
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WvSection {
    #[serde(with = "units::angle")]
    pub phi: f64,
    #[serde(with = "units::length")]
    pub lever_arm: f64,
    #[serde(with = "units::power")]
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StSection {
    #[serde(with = "units::length")]
    pub focal_length: f64,
    #[serde(with = "units::power")]
    pub power: f64,
}

/// Drive of the signal kick; `amplitude` is the equivalent deflection angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    pub kind: DriveKind,
    #[serde(with = "units::angle")]
    pub amplitude: f64,
    #[serde(with = "units::frequency", default)]
    pub frequency: f64,
    #[serde(with = "units::time", default)]
    pub rise_time: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorModConfig {
    #[serde(with = "units::length")]
    pub amplitude: f64,
    #[serde(with = "units::frequency")]
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleModConfig {
    #[serde(with = "units::angle")]
    pub amplitude: f64,
    #[serde(with = "units::frequency")]
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(with = "units::frequency")]
    pub cutoff: f64,
    #[serde(with = "units::angle")]
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserJitterConfig {
    #[serde(default)]
    pub tones: Vec<AngleModConfig>,
    #[serde(default)]
    pub noise: Option<NoiseConfig>,
}

impl LaserJitterConfig {
    pub fn spec(&self) -> LaserJitterSpec {
        LaserJitterSpec {
            tones: self
                .tones
                .iter()
                .map(|t| Tone {
                    frequency: t.frequency,
                    amplitude: t.amplitude,
                    phase: t.phase,
                })
                .collect(),
            noise: self.noise.as_ref().map(|n| BandNoise {
                cutoff: n.cutoff,
                rms: n.rms,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceConfig {
    #[serde(default)]
    pub d_mod: Option<DetectorModConfig>,
    #[serde(default)]
    pub q_mod: Option<AngleModConfig>,
    #[serde(with = "units::angle", default)]
    pub angular_jitter: f64,
    #[serde(with = "units::length", default)]
    pub detector_jitter: f64,
    #[serde(default)]
    pub laser_jitter: Option<LaserJitterConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    #[serde(default = "alpha_cal_ideal")]
    pub alpha_cal: f64,
    #[serde(with = "units::noise_density", default)]
    pub sigma_j: f64,
    /// V/W.
    pub responsivity: f64,
    #[serde(with = "units::voltage::option", default)]
    pub saturation_v: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(with = "units::time")]
    pub sample_time: f64,
    /// Samples per segment (spectra) or per plateau window (estimates).
    pub segment_len: usize,
    #[serde(default = "one")]
    pub n_averages: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub photons_per_sample: Option<f64>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FisherSweepConfig {
    #[serde(with = "units::angle")]
    pub phi_start: f64,
    #[serde(with = "units::angle")]
    pub phi_stop: f64,
    pub n_phi: usize,
}

impl FisherSweepConfig {
    pub fn phis(&self) -> Vec<f64> {
        if self.n_phi == 1 {
            return vec![self.phi_start];
        }
        (0..self.n_phi)
            .map(|i| self.phi_start + (self.phi_stop - self.phi_start) * i as f64 / (self.n_phi - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// Ratio-of-ratios slopes from spectra.
    Slope,
    /// Plateau deviations against the closed form.
    Deviation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationSweepConfig {
    pub mode: SweepMode,
    #[serde(with = "units::length::vec", default)]
    pub detector_amplitudes: Vec<f64>,
    #[serde(with = "units::angle::vec", default)]
    pub momentum_amplitudes: Vec<f64>,
    /// Signal amplitudes (angles) for slope sweeps; empty means the drive's.
    #[serde(with = "units::angle::vec", default)]
    pub kick_angles: Vec<f64>,
    #[serde(with = "units::frequency")]
    pub frequency: f64,
}

impl ModulationSweepConfig {
    pub fn amplitudes(&self, kind: ModKind) -> &[f64] {
        match kind {
            ModKind::Detector => &self.detector_amplitudes,
            ModKind::Momentum => &self.momentum_amplitudes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(with = "units::angle")]
    pub phi: f64,
    #[serde(with = "units::length")]
    pub sigma_min: f64,
    #[serde(with = "units::length")]
    pub sigma_max: f64,
    #[serde(with = "units::length")]
    pub fprime_min: f64,
    #[serde(with = "units::length")]
    pub fprime_max: f64,
    pub n_sigma: usize,
    pub n_fprime: usize,
}

/// Time-domain part of the laser-jitter comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JitterConfig {
    #[serde(with = "units::time")]
    pub sample_time: f64,
    pub n_samples: usize,
    #[serde(with = "units::noise_density")]
    pub sigma_j: f64,
    #[serde(with = "units::frequency")]
    pub jitter_rate: f64,
}

impl JitterConfig {
    pub fn acquisition(&self) -> TimeDomainAcquisition {
        TimeDomainAcquisition {
            sample_time: self.sample_time,
            n_samples: self.n_samples,
            sigma_j: self.sigma_j,
            jitter_rate: self.jitter_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fisher: Option<FisherSweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulation: Option<ModulationSweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jitter: Option<JitterConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub beam: BeamConfig,
    pub wv: WvSection,
    pub st: StSection,
    pub drive: DriveConfig,
    #[serde(default)]
    pub disturbances: DisturbanceConfig,
    pub detector: DetectorConfig,
    pub run: RunConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

fn section<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config { .. } => e,
        other => Error::config(name, other.to_string()),
    })
}

impl Scenario {
    /// Parses and validates a scenario document.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let sc: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Config {
                path,
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            }
        })?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let text = preset_text(name).ok_or_else(|| {
            Error::config(
                "scenario",
                format!("unknown preset `{name}` (available: {})", PRESET_NAMES.join(", ")),
            )
        })?;
        Self::from_json(text)
    }

    /// A preset name, or else a path to a scenario file.
    pub fn load(spec: &str) -> Result<Self> {
        if preset_text(spec).is_some() {
            return Self::preset(spec);
        }
        let path = Path::new(spec);
        if !path.exists() {
            return Err(Error::config(
                "scenario",
                format!("`{spec}` is neither a preset ({}) nor a file", PRESET_NAMES.join(", ")),
            ));
        }
        Self::from_file(path)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn beam(&self) -> Result<Beam> {
        section("beam", BeamParams::new(self.beam.sigma, self.beam.lambda))
    }

    pub fn validate(&self) -> Result<()> {
        self.simulation()?;
        let r = &self.run;
        if r.segment_len < 2 {
            return Err(Error::config("run.segment_len", "need at least 2 samples"));
        }
        if r.n_averages == 0 {
            return Err(Error::config("run.n_averages", "need at least 1 average"));
        }
        if let Some(n) = r.photons_per_sample {
            if !(n >= 0.0) || !n.is_finite() {
                return Err(Error::config("run.photons_per_sample", "must be finite and >= 0"));
            }
        }
        let a = &self.analysis;
        if let Some(f) = &a.fisher {
            if f.n_phi == 0 {
                return Err(Error::config("analysis.fisher.n_phi", "need at least 1 angle"));
            }
            for phi in f.phis() {
                section("analysis.fisher", WvConfig::new(phi, self.wv.lever_arm))?;
            }
        }
        if let Some(m) = &a.modulation {
            if !(m.frequency > 0.0) {
                return Err(Error::config("analysis.modulation.frequency", "must be > 0"));
            }
            if m.detector_amplitudes.is_empty() && m.momentum_amplitudes.is_empty() {
                return Err(Error::config("analysis.modulation", "no amplitudes given"));
            }
            if m.detector_amplitudes
                .iter()
                .chain(&m.momentum_amplitudes)
                .any(|x| !(*x >= 0.0))
            {
                return Err(Error::config("analysis.modulation", "amplitudes must be >= 0"));
            }
        }
        if let Some(g) = &a.geometry {
            if !(g.sigma_min > 0.0 && g.sigma_max >= g.sigma_min && g.fprime_min > 0.0 && g.fprime_max >= g.fprime_min)
            {
                return Err(Error::config(
                    "analysis.geometry",
                    "ranges must be positive and ordered",
                ));
            }
            if g.n_sigma < 2 || g.n_fprime < 2 {
                return Err(Error::config("analysis.geometry", "grids need at least 2 points"));
            }
        }
        if let Some(j) = &a.jitter {
            if !(j.sample_time > 0.0) || j.n_samples < 2 || !(j.sigma_j >= 0.0) || !(j.jitter_rate > 0.0) {
                return Err(Error::config("analysis.jitter", "invalid time-domain acquisition"));
            }
            if self.disturbances.laser_jitter.is_none() {
                return Err(Error::config("analysis.jitter", "requires disturbances.laser_jitter"));
            }
        }
        Ok(())
    }

    pub fn drive(&self) -> Result<DriveWaveform> {
        let k0 = self.beam()?.k0();
        let d = &self.drive;
        let w = DriveWaveform {
            kind: d.kind,
            amplitude: k0 * d.amplitude,
            frequency: d.frequency,
            rise_time: d.rise_time,
            phase: d.phase,
        };
        section("drive", w.validate())?;
        Ok(w)
    }

    pub fn disturbances(&self) -> Result<DisturbanceSet> {
        let k0 = self.beam()?.k0();
        let c = &self.disturbances;
        let d_mod = c
            .d_mod
            .as_ref()
            .map(|m| section("disturbances.d_mod", Sinusoid::new(m.amplitude, m.frequency, m.phase)))
            .transpose()?;
        let q_mod = c
            .q_mod
            .as_ref()
            .map(|m| {
                section(
                    "disturbances.q_mod",
                    Sinusoid::new(k0 * m.amplitude, m.frequency, m.phase),
                )
            })
            .transpose()?;
        let set = DisturbanceSet {
            d_mod,
            q_mod,
            angular_jitter: c.angular_jitter,
            detector_jitter: c.detector_jitter,
            laser_jitter: c.laser_jitter.as_ref().map(LaserJitterConfig::spec),
        };
        section("disturbances", set.validate())?;
        Ok(set)
    }

    /// The time-series engine configured by this scenario. Laser jitter is
    /// left for the analyses to generate over their own duration.
    pub fn simulation(&self) -> Result<Simulation> {
        let beam = self.beam()?;
        let wv = section("wv", WvConfig::new(self.wv.phi, self.wv.lever_arm))?;
        let st = section("st", StConfig::new(self.st.focal_length, &beam))?;
        for (name, p) in [("wv.power", self.wv.power), ("st.power", self.st.power)] {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::config(name, "power must be finite and >= 0"));
            }
        }
        let det = &self.detector;
        if !(det.responsivity > 0.0) {
            return Err(Error::config("detector.responsivity", "must be > 0"));
        }
        let sim = Simulation {
            beam,
            wv,
            st,
            drive: self.drive()?,
            disturbances: self.disturbances()?,
            detector: DetectorSettings {
                alpha_cal: det.alpha_cal,
                sigma_j: det.sigma_j,
                responsivity: det.responsivity,
                saturation_v: det.saturation_v,
            },
            power_wv: self.wv.power,
            power_st: self.st.power,
            photons_per_sample: self.run.photons_per_sample,
            laser: None,
        };
        for ch in [
            crate::timeseries::Channel::WvDark,
            crate::timeseries::Channel::WvBright,
            crate::timeseries::Channel::St,
        ] {
            section("detector", sim.detector_for(ch, self.run.sample_time))?;
        }
        Ok(sim)
    }

    pub fn spectral_acquisition(&self) -> SpectralAcquisition {
        SpectralAcquisition {
            sample_time: self.run.sample_time,
            segment_len: self.run.segment_len,
            n_averages: self.run.n_averages,
        }
    }

    /// Plateau acquisition of `segment_len` samples at the modulation
    /// frequency of the sweep (or the drive frequency).
    pub fn plateau_acquisition(&self) -> PlateauAcquisition {
        let mod_freq = self
            .analysis
            .modulation
            .as_ref()
            .map_or(self.drive.frequency, |m| m.frequency);
        PlateauAcquisition {
            sample_time: self.run.sample_time,
            n_samples: self.run.segment_len,
            mod_freq,
        }
    }

    /// Largest kick the scenario programs.
    pub fn max_kick(&self) -> Result<f64> {
        let k0 = self.beam()?.k0();
        let mut theta = self.drive.amplitude.abs();
        if let Some(m) = &self.analysis.modulation {
            theta = m.kick_angles.iter().fold(theta, |a, b| a.max(b.abs()));
        }
        Ok(k0 * theta)
    }

    /// Numerical-regime warnings; `--strict` turns them into failures.
    pub fn warnings(&self) -> Result<Vec<String>> {
        let beam = self.beam()?;
        let k = Kick::new(self.max_kick()?, &beam);
        let mut phis = vec![self.wv.phi];
        if let Some(f) = &self.analysis.fisher {
            phis.extend(f.phis());
        }
        let mut out = Vec::new();
        for phi in phis {
            let wv = section("wv", WvConfig::new(phi, self.wv.lever_arm))?;
            let v = weak_validity(&beam, &wv, &k);
            if !v.valid {
                out.push(format!(
                    "weak-interaction parameter k^2 sigma^2 cot^2(phi/2) = {:.3e} at phi = {phi} is not small",
                    v.parameter
                ));
            }
        }
        Ok(out)
    }

    pub fn drive_kind(&self) -> DriveKind {
        self.drive.kind
    }
}
