//! Averaged single-sided amplitude spectra in dBV and peak comparisons.

use crate::error::{Error, Result};
use rustfft::{num_complex::Complex, FftPlanner};
use serde::Serialize;
use std::f64::consts::PI;

/// Minimum margin of a peak over the noise floor to count as resolvable.
pub const RESOLVABLE_DB: f64 = 6.0;
/// Bins on either side of a listed peak kept out of the noise floor.
pub const FLOOR_GUARD_BINS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub freqs: Vec<f64>,
    /// Averaged amplitude per bin divided by `v_total`.
    pub amplitude: Vec<f64>,
    /// `20 log10(amplitude)`.
    pub dbv: Vec<f64>,
    pub n_averages: usize,
    pub segment_len: usize,
    pub bin_width: f64,
    pub window: &'static str,
    pub v_total: f64,
    /// Largest relative mismatch over segments between the time-domain
    /// variance and the integrated spectral power (DC excluded).
    pub parseval_rel_error: f64,
}

impl SpectrumResult {
    pub fn bin_of(&self, freq: f64) -> usize {
        ((freq / self.bin_width).round() as usize).min(self.freqs.len() - 1)
    }

    /// Mean amplitude over all bins but DC and the guarded neighbourhoods of
    /// `exclude`. For pure noise the per-bin rms is `2 / sqrt(pi)` times this.
    pub fn noise_floor(&self, exclude: &[f64]) -> f64 {
        let excluded: Vec<usize> = exclude.iter().map(|&f| self.bin_of(f)).collect();
        let keep = |i: usize| i != 0 && excluded.iter().all(|&b| i.abs_diff(b) > FLOOR_GUARD_BINS);
        let (sum, n) = self
            .amplitude
            .iter()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .fold((0.0, 0usize), |(s, n), (_, a)| (s + a, n + 1));
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }

    pub fn noise_floor_db(&self, exclude: &[f64]) -> f64 {
        20.0 * self.noise_floor(exclude).log10()
    }

    /// Largest amplitude within one bin of `freq`.
    pub fn peak(&self, freq: f64) -> f64 {
        let b = self.bin_of(freq);
        let lo = b.saturating_sub(1).max(1);
        let hi = (b + 1).min(self.amplitude.len() - 1);
        self.amplitude[lo..=hi].iter().cloned().fold(0.0, f64::max)
    }

    pub fn peak_db(&self, freq: f64) -> f64 {
        20.0 * self.peak(freq).log10()
    }

    /// Rows `freq_hz, dbv`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["freq_hz", "dbv"])?;
        for (f, d) in self.freqs.iter().zip(&self.dbv) {
            out.write_record([format!("{f}"), format!("{d:.6}")])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Averages the single-sided amplitude spectra of the first `n_avg` traces
/// (rectangular window) and normalizes by `v_total`.
pub fn averaged_spectrum(traces: &[Vec<f64>], n_avg: usize, sample_time: f64, v_total: f64) -> Result<SpectrumResult> {
    if n_avg == 0 || traces.is_empty() {
        return Err(Error::Empty("spectrum traces"));
    }
    if n_avg > traces.len() {
        return Err(Error::InsufficientPoints {
            need: n_avg,
            got: traces.len(),
        });
    }
    if !(v_total > 0.0) {
        return Err(Error::domain("v_total", v_total, "v_total > 0"));
    }
    let n = traces[0].len();
    if n < 2 {
        return Err(Error::InsufficientPoints { need: 2, got: n });
    }
    for t in &traces[..n_avg] {
        if t.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: t.len(),
            });
        }
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    let bins = n / 2 + 1;
    let mut acc = vec![0.0; bins];
    let mut parseval: f64 = 0.0;
    for t in &traces[..n_avg] {
        let mut buf: Vec<Complex<f64>> = t.iter().map(|&x| Complex::new(x, 0.0)).collect();
        fft.process(&mut buf);
        let nf = n as f64;
        for (i, a) in acc.iter_mut().enumerate() {
            let scale = if i == 0 || (n.is_multiple_of(2) && i == n / 2) {
                1.0
            } else {
                2.0
            };
            *a += scale * buf[i].norm() / nf;
        }
        let mean = t.iter().sum::<f64>() / nf;
        let var = t.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / nf;
        let spec = buf[1..].iter().map(|c| c.norm_sqr()).sum::<f64>() / (nf * nf);
        if var > 0.0 {
            parseval = parseval.max((spec - var).abs() / var);
        }
    }
    let amplitude: Vec<f64> = acc.iter().map(|a| a / n_avg as f64 / v_total).collect();
    let bin_width = 1.0 / (n as f64 * sample_time);
    Ok(SpectrumResult {
        freqs: (0..bins).map(|i| i as f64 * bin_width).collect(),
        dbv: amplitude.iter().map(|a| 20.0 * a.log10()).collect(),
        amplitude,
        n_averages: n_avg,
        segment_len: n,
        bin_width,
        window: "rectangular",
        v_total,
        parseval_rel_error: parseval,
    })
}

/// Mean-magnitude floor to rms per bin for Rayleigh-distributed noise.
pub fn floor_to_rms(mean_amplitude: f64) -> f64 {
    mean_amplitude * 2.0 / PI.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakFreqs {
    pub signal: f64,
    pub d_mod: f64,
    pub q_mod: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakRow {
    pub name: &'static str,
    pub freq_hz: f64,
    pub dbv_wv: f64,
    pub dbv_st: f64,
    /// WVT minus ST.
    pub diff_db: f64,
    /// `10^(diff_db / 20)`.
    pub linear: f64,
    pub resolvable_wv: bool,
    pub resolvable_st: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakTable {
    pub rows: Vec<PeakRow>,
    pub floor_db_wv: f64,
    pub floor_db_st: f64,
}

impl PeakTable {
    pub fn row(&self, name: &str) -> Option<&PeakRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

/// WVT minus ST peak levels at the three tone frequencies.
pub fn peak_ratio_table(spec_wv: &SpectrumResult, spec_st: &SpectrumResult, freqs: &PeakFreqs) -> Result<PeakTable> {
    peak_rows(
        spec_wv,
        spec_st,
        &[("signal", freqs.signal), ("d_mod", freqs.d_mod), ("q_mod", freqs.q_mod)],
    )
}

/// WVT minus ST peak levels at any set of named frequencies. The noise
/// floors exclude all listed frequencies.
pub fn peak_rows(
    spec_wv: &SpectrumResult,
    spec_st: &SpectrumResult,
    tones: &[(&'static str, f64)],
) -> Result<PeakTable> {
    if spec_wv.freqs.len() != spec_st.freqs.len() {
        return Err(Error::LengthMismatch {
            expected: spec_wv.freqs.len(),
            found: spec_st.freqs.len(),
        });
    }
    let all: Vec<f64> = tones.iter().map(|t| t.1).collect();
    let floor_wv = spec_wv.noise_floor_db(&all);
    let floor_st = spec_st.noise_floor_db(&all);
    let rows = tones
        .iter()
        .map(|&(name, f)| {
            let w = spec_wv.peak_db(f);
            let s = spec_st.peak_db(f);
            PeakRow {
                name,
                freq_hz: f,
                dbv_wv: w,
                dbv_st: s,
                diff_db: w - s,
                linear: 10f64.powf((w - s) / 20.0),
                resolvable_wv: w >= floor_wv + RESOLVABLE_DB,
                resolvable_st: s >= floor_st + RESOLVABLE_DB,
            }
        })
        .collect();
    Ok(PeakTable {
        rows,
        floor_db_wv: floor_wv,
        floor_db_st: floor_st,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn tone(a: f64, f: f64, n: usize, dt: f64) -> Vec<f64> {
        (0..n).map(|i| a * (TAU * f * i as f64 * dt + 0.3).sin()).collect()
    }

    #[test]
    fn bin_centred_sine_amplitude() {
        let tr = tone(0.05, 25.0, 1000, 1e-3);
        let s = averaged_spectrum(&[tr], 1, 1e-3, 2.0).unwrap();
        assert!((s.bin_width - 1.0).abs() < 1e-12);
        let expect = 20.0 * (0.05f64 / 2.0).log10();
        assert!((s.peak_db(25.0) - expect).abs() < 0.1);
        assert!(s.parseval_rel_error < 1e-10);
    }

    #[test]
    fn twenty_db_is_factor_ten() {
        let a = averaged_spectrum(&[tone(1.0, 10.0, 500, 1e-3)], 1, 1e-3, 1.0).unwrap();
        let b = averaged_spectrum(&[tone(0.1, 10.0, 500, 1e-3)], 1, 1e-3, 1.0).unwrap();
        assert!((a.peak_db(10.0) - b.peak_db(10.0) - 20.0).abs() < 1e-9);
    }

    #[test]
    fn identical_inputs_zero_difference() {
        let s = averaged_spectrum(&[tone(1.0, 10.0, 500, 1e-3)], 1, 1e-3, 1.0).unwrap();
        let t = peak_ratio_table(
            &s,
            &s,
            &PeakFreqs {
                signal: 10.0,
                d_mod: 20.0,
                q_mod: 40.0,
            },
        )
        .unwrap();
        assert!(t.rows.iter().all(|r| r.diff_db == 0.0 && r.linear == 1.0));
    }

    #[test]
    fn errors() {
        assert!(averaged_spectrum(&[], 1, 1e-3, 1.0).is_err());
        assert!(matches!(
            averaged_spectrum(&[vec![0.0; 10], vec![0.0; 12]], 2, 1e-3, 1.0),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
