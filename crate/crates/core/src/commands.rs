//! The four front-end commands. Each writes its tables and a
//! `summary.json` into an output directory and returns the bundle.

use crate::error::{Error, Result};
use crate::inference::{estimate_k_split, fisher_analytic, EstimationReport};
use crate::optics::{geometric_factor_surface, raw_signal_ratios};
use crate::report::{num, write_json, ResultBundle, Table};
use crate::rng::{domain, StreamId};
use crate::sampler::laser_jitter_waveform;
use crate::scenario::{Scenario, SweepMode};
use crate::timeseries::analysis::{
    MEASURED_D_SUPPRESSION, MEASURED_Q_SUPPRESSION, MEASURED_SIGNAL_GAIN, MEASURED_SLOPE_DETECTOR,
    MEASURED_SLOPE_MOMENTUM, REFERENCE_JITTER_SUPPRESSION, REFERENCE_RELATIVE_ERROR_ST, REFERENCE_RELATIVE_ERROR_WV,
    REFERENCE_SINGLE_TONE_SUPPRESSION,
};
use crate::timeseries::{
    closed_form_advantage, deviation_curve, fisher_sweep, ideal_slope_sweep, jitter_comparison, mc_slope_sweep,
    peak_rows, run_timeseries, simulate_spectra, Channel, DeviationCurve, DriveKind, ModKind, SlopeSweep, SpectrumPair,
    SpectrumResult,
};
use crate::Kick;
use serde::Serialize;
use serde_json::json;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Modulation,
    Geometry,
}

fn root(sc: &Scenario) -> StreamId {
    StreamId::new(sc.run.master_seed, 0, 0)
}

fn start(sc: &Scenario, command: &str, out: &Path) -> Result<ResultBundle> {
    fs::create_dir_all(out)?;
    let mut b = ResultBundle::new(command, &sc.name, sc.run.master_seed);
    b.warnings = sc.warnings()?;
    write_json(&out.join("scenario.json"), sc)?;
    b.outputs.push("scenario.json".into());
    Ok(b)
}

fn save(b: &mut ResultBundle, out: &Path, name: &str, table: &Table) -> Result<()> {
    table.write(&out.join(name))?;
    b.outputs.push(name.to_string());
    Ok(())
}

fn spectrum_table(wv: &SpectrumResult, st: &SpectrumResult) -> Table {
    let mut t = Table::new(&["freq_hz", "dbv_wv", "dbv_st"]);
    for i in 0..wv.freqs.len() {
        t.push(vec![num(wv.freqs[i]), num(wv.dbv[i]), num(st.dbv[i])]);
    }
    t
}

/// Fisher fractions of the two WVT ports over the post-selection angle.
pub fn cmd_fisher(sc: &Scenario, out: &Path) -> Result<ResultBundle> {
    let mut b = start(sc, "fisher", out)?;
    let sim = sc.simulation()?;
    if sc.drive.kind != DriveKind::Sine || sc.drive.amplitude == 0.0 {
        return Err(Error::config(
            "drive",
            "the Fisher sweep needs a sine drive with nonzero amplitude",
        ));
    }
    let phis = sc
        .analysis
        .fisher
        .as_ref()
        .map_or_else(|| vec![sc.wv.phi], |f| f.phis());
    let sweep = fisher_sweep(&sim, &phis, sc.drive.frequency, &sc.spectral_acquisition(), root(sc))?;
    let mut t = Table::new(&[
        "phi",
        "fraction_dark",
        "fraction_bright",
        "analytic_dark",
        "analytic_bright",
        "snr_dark",
        "snr_bright",
    ]);
    for p in &sweep.points {
        t.push(vec![
            num(p.phi),
            num(p.fraction_dark),
            num(p.fraction_bright),
            num(p.analytic_dark),
            num(1.0 - p.analytic_dark),
            num(p.snr_dark),
            num(p.snr_bright),
        ]);
    }
    save(&mut b, out, "fisher.csv", &t)?;
    let k = Kick::new(sim.drive.amplitude, &sim.beam);
    let analytic = fisher_analytic(&sim.beam, &sim.wv, &k);
    b.metrics = json!({
        "fit_c": sweep.fit_c,
        "r2": sweep.r2,
        "photons_per_sample": sweep.photons_per_sample,
        "first_phi": sweep.points[0].phi,
        "first_fraction_dark": sweep.points[0].fraction_dark,
        "first_analytic_dark": sweep.points[0].analytic_dark,
        "analytic_at_scenario_phi": {
            "info_dark": analytic.info_dark,
            "info_bright": analytic.info_bright,
            "info_st": analytic.info_st,
            "dark_fraction": analytic.dark_fraction(),
        },
    });
    b.write(out)?;
    Ok(b)
}

#[derive(Serialize)]
struct Predicted {
    signal_db: f64,
    d_suppression_db: f64,
    q_suppression_db: f64,
}

/// Averaged spectra of both techniques with the peak comparison, or the
/// laser-jitter comparison when the scenario configures one.
pub fn cmd_spectrum(sc: &Scenario, out: &Path) -> Result<ResultBundle> {
    let mut b = start(sc, "spectrum", out)?;
    let mut sim = sc.simulation()?;
    let acq = sc.spectral_acquisition();
    if let (Some(j), Some(spec)) = (&sc.analysis.jitter, &sim.disturbances.laser_jitter) {
        let spec = spec.clone();
        let mut summary = jitter_comparison(&sim, &spec, Some(&acq), &j.acquisition(), root(sc))?;
        let pair = summary
            .spectra
            .take()
            .ok_or_else(|| Error::Degenerate("no spectra".into()))?;
        save(&mut b, out, "spectrum.csv", &spectrum_table(&pair.wv, &pair.st))?;
        b.metrics = json!({
            "jitter": summary,
            "bin_width_hz": pair.wv.bin_width,
            "n_averages": pair.wv.n_averages,
            "reference": {
                "relative_error_st": REFERENCE_RELATIVE_ERROR_ST,
                "relative_error_wv": REFERENCE_RELATIVE_ERROR_WV,
                "suppression": REFERENCE_JITTER_SUPPRESSION,
                "single_tone_suppression": REFERENCE_SINGLE_TONE_SUPPRESSION,
            },
        });
        b.write(out)?;
        return Ok(b);
    }
    if let Some(spec) = &sim.disturbances.laser_jitter {
        let duration = (acq.n_averages * acq.segment_len) as f64 * acq.sample_time;
        sim.laser = Some(laser_jitter_waveform(
            spec,
            duration,
            1.0 / acq.sample_time,
            root(sc).child(domain::LASER_JITTER, 0),
        )?);
    }
    let pair: SpectrumPair = simulate_spectra(&sim, &acq, root(sc))?;
    save(&mut b, out, "spectrum.csv", &spectrum_table(&pair.wv, &pair.st))?;
    let mut tones: Vec<(&'static str, f64)> = Vec::new();
    if sc.drive.kind == DriveKind::Sine && sc.drive.amplitude != 0.0 {
        tones.push(("signal", sc.drive.frequency));
    }
    if let Some(d) = &sc.disturbances.d_mod {
        tones.push(("d_mod", d.frequency));
    }
    if let Some(q) = &sc.disturbances.q_mod {
        tones.push(("q_mod", q.frequency));
    }
    let table = peak_rows(&pair.wv, &pair.st, &tones)?;
    let ideal = raw_signal_ratios(&sim.beam, &sim.wv, &sim.st).to_db();
    b.metrics = json!({
        "peaks": table,
        "bin_width_hz": pair.wv.bin_width,
        "n_averages": pair.wv.n_averages,
        "parseval_rel_error_wv": pair.wv.parseval_rel_error,
        "parseval_rel_error_st": pair.st.parseval_rel_error,
        "predicted": Predicted {
            signal_db: ideal.signal,
            d_suppression_db: ideal.detector,
            q_suppression_db: ideal.momentum,
        },
        "reference": {
            "signal_gain": MEASURED_SIGNAL_GAIN,
            "d_suppression": MEASURED_D_SUPPRESSION,
            "q_suppression": MEASURED_Q_SUPPRESSION,
        },
    });
    b.write(out)?;
    Ok(b)
}

fn slope_rows(t: &mut Table, source: &str, s: &SlopeSweep) {
    for p in &s.points {
        t.push(vec![
            source.into(),
            num(p.amplitude),
            num(p.kick_angle),
            num(p.r_st),
            num(p.r_wv),
        ]);
    }
}

fn deviation_rows(t: &mut Table, c: &DeviationCurve) {
    for p in &c.points {
        t.push(vec![
            c.channel.into(),
            c.kind.name().into(),
            num(p.amplitude),
            num(p.xi_rms),
            num(p.delta_k),
            num(p.delta_k_bound),
            num(p.ratio_mc),
            num(p.ratio_closed),
            num(p.band_sigma),
            p.within_3_sigma.to_string(),
        ]);
    }
}

/// Modulation sweeps (slopes or deviation curves) or the geometric surface.
pub fn cmd_sweep(sc: &Scenario, axis: SweepAxis, out: &Path) -> Result<ResultBundle> {
    let mut b = start(sc, "sweep", out)?;
    match axis {
        SweepAxis::Geometry => {
            let g = sc
                .analysis
                .geometry
                .as_ref()
                .ok_or_else(|| Error::config("analysis.geometry", "missing; required for --axis geometry"))?;
            let surf = geometric_factor_surface(
                g.phi,
                sc.beam.lambda,
                (g.sigma_min, g.sigma_max),
                (g.fprime_min, g.fprime_max),
                g.n_sigma,
                g.n_fprime,
            )?;
            let mut t = Table::new(&["sigma_m", "fprime_m", "factor"]);
            for (i, s) in surf.sigmas.iter().enumerate() {
                for (j, f) in surf.fprimes.iter().enumerate() {
                    t.push(vec![num(*s), num(*f), num(surf.value(i, j))]);
                }
            }
            save(&mut b, out, "surface.csv", &t)?;
            b.metrics = json!({ "phi": g.phi, "max": surf.max, "below_one": surf.max < 1.0 });
        }
        SweepAxis::Modulation => {
            let m = sc
                .analysis
                .modulation
                .as_ref()
                .ok_or_else(|| Error::config("analysis.modulation", "missing; required for --axis modulation"))?;
            let sim = sc.simulation()?;
            let kinds: Vec<ModKind> = [ModKind::Detector, ModKind::Momentum]
                .into_iter()
                .filter(|k| !m.amplitudes(*k).is_empty())
                .collect();
            let mut metrics = serde_json::Map::new();
            match m.mode {
                SweepMode::Slope => {
                    let kicks = if m.kick_angles.is_empty() {
                        vec![sc.drive.amplitude]
                    } else {
                        m.kick_angles.clone()
                    };
                    if sc.drive.kind != DriveKind::Sine {
                        return Err(Error::config("drive", "slope sweeps need a sine drive"));
                    }
                    for (i, &kind) in kinds.iter().enumerate() {
                        let amps = m.amplitudes(kind);
                        let ideal = ideal_slope_sweep(&sim.beam, &sim.wv, &sim.st, kind, amps, &kicks)?;
                        let mc = mc_slope_sweep(
                            &sim,
                            kind,
                            amps,
                            &kicks,
                            sc.drive.frequency,
                            m.frequency,
                            &sc.spectral_acquisition(),
                            root(sc).child(domain::SWEEP, i as u64),
                        )?;
                        let mut t = Table::new(&["source", "amplitude", "kick_angle", "r_st", "r_wv"]);
                        slope_rows(&mut t, "ideal", &ideal);
                        slope_rows(&mut t, "monte_carlo", &mc);
                        save(&mut b, out, &format!("slope_{}.csv", kind.name()), &t)?;
                        let measured = match kind {
                            ModKind::Detector => MEASURED_SLOPE_DETECTOR,
                            ModKind::Momentum => MEASURED_SLOPE_MOMENTUM,
                        };
                        metrics.insert(
                            kind.name().into(),
                            json!({
                                "predicted": ideal.predicted,
                                "ideal_slope": ideal.fit.slope,
                                "ideal_r2": ideal.fit.r2,
                                "mc_slope": mc.fit.slope,
                                "mc_r2": mc.fit.r2,
                                "measured": measured,
                            }),
                        );
                    }
                }
                SweepMode::Deviation => {
                    let acq = sc.plateau_acquisition();
                    let mut t = Table::new(&[
                        "channel",
                        "kind",
                        "amplitude",
                        "xi_rms",
                        "delta_k",
                        "delta_k_bound",
                        "ratio_mc",
                        "ratio_closed",
                        "band_sigma",
                        "within_3_sigma",
                    ]);
                    for (i, &kind) in kinds.iter().enumerate() {
                        let amps = m.amplitudes(kind);
                        let stream = root(sc).child(domain::SWEEP, i as u64);
                        let wv =
                            deviation_curve(&sim, Channel::WvDark, kind, amps, &acq, stream.child(domain::SWEEP, 0))?;
                        let st = deviation_curve(&sim, Channel::St, kind, amps, &acq, stream.child(domain::SWEEP, 1))?;
                        deviation_rows(&mut t, &wv);
                        deviation_rows(&mut t, &st);
                        let (lw, ls) = (wv.points.last(), st.points.last());
                        let (lw, ls) = lw.zip(ls).ok_or(Error::Empty("modulation amplitudes"))?;
                        let closed = closed_form_advantage(
                            &sim,
                            kind,
                            lw.amplitude / std::f64::consts::SQRT_2,
                            lw.delta_k_bound,
                            ls.delta_k_bound,
                        )?;
                        let inside = wv.points.iter().chain(&st.points).filter(|p| p.within_3_sigma).count();
                        metrics.insert(
                            kind.name().into(),
                            json!({
                                "max_amplitude": lw.amplitude,
                                "advantage_mc": lw.ratio_mc / ls.ratio_mc,
                                "advantage_closed_form": closed,
                                "within_3_sigma": inside,
                                "points": wv.points.len() + st.points.len(),
                                "wv_min_ratio": wv.points.iter().map(|p| p.ratio_mc).fold(f64::INFINITY, f64::min),
                                "st_min_ratio": st.points.iter().map(|p| p.ratio_mc).fold(f64::INFINITY, f64::min),
                                "bound_wv": lw.delta_k_bound,
                                "bound_st": ls.delta_k_bound,
                            }),
                        );
                    }
                    save(&mut b, out, "deviation.csv", &t)?;
                }
            }
            b.metrics = serde_json::Value::Object(metrics);
        }
    }
    b.write(out)?;
    Ok(b)
}

#[derive(Debug, Clone, Serialize)]
struct EstimateRow {
    repetition: usize,
    channel: &'static str,
    report: EstimationReport,
}

/// Repeated estimates of the kick from one plateau window each.
pub fn cmd_estimate(sc: &Scenario, repetitions: usize, out: &Path) -> Result<ResultBundle> {
    if repetitions == 0 {
        return Err(Error::config("repetitions", "need at least 1 repetition"));
    }
    let mut b = start(sc, "estimate", out)?;
    let sim = sc.simulation()?;
    let n = sc.run.segment_len;
    let t = sc.run.sample_time;
    let window = n as f64 * t;
    let t0 = sim.drive.plateau_window_start(window)?;
    let k_true = sim.drive.at(t0 + 0.5 * window);
    let channels = [Channel::WvDark, Channel::WvBright, Channel::St];
    let mut rows = Vec::new();
    for r in 0..repetitions {
        let tr = run_timeseries(&sim, t0, n, t, root(sc).child(domain::TRIAL, r as u64))?;
        for ch in channels {
            let det = sim.detector_for(ch, t)?;
            let report = estimate_k_split(
                tr.channel(ch),
                &det,
                &sim.beam,
                &sim.technique(ch),
                ch.port(),
                sim.mean_input_photons(ch, t),
            )?;
            rows.push(EstimateRow {
                repetition: r,
                channel: ch.name(),
                report,
            });
        }
    }
    let mut table = Table::new(&[
        "repetition",
        "channel",
        "k_hat",
        "delta_k",
        "delta_k_bound",
        "efficiency",
        "samples_used",
        "samples_saturated",
    ]);
    for row in &rows {
        let rep = &row.report;
        table.push(vec![
            row.repetition.to_string(),
            row.channel.into(),
            num(rep.k_hat),
            num(rep.delta_k),
            num(rep.delta_k_bound),
            num(rep.efficiency),
            rep.samples_used.to_string(),
            rep.samples_saturated.to_string(),
        ]);
    }
    save(&mut b, out, "estimates.csv", &table)?;
    write_json(&out.join("estimates.json"), &rows)?;
    b.outputs.push("estimates.json".into());
    let mut metrics = serde_json::Map::new();
    metrics.insert("k_programmed".into(), json!(k_true));
    metrics.insert("samples_per_window".into(), json!(n));
    metrics.insert("window_start".into(), json!(t0));
    for ch in channels {
        let reps: Vec<&EstimationReport> = rows
            .iter()
            .filter(|r| r.channel == ch.name())
            .map(|r| &r.report)
            .collect();
        let m = reps.len() as f64;
        let mean = reps.iter().map(|r| r.k_hat).sum::<f64>() / m;
        let spread = if reps.len() > 1 {
            (reps.iter().map(|r| (r.k_hat - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
        } else {
            f64::NAN
        };
        metrics.insert(
            ch.name().into(),
            json!({
                "k_hat_mean": mean,
                "k_hat_std": spread,
                "delta_k_mean": reps.iter().map(|r| r.delta_k).sum::<f64>() / m,
                "delta_k_bound": reps[0].delta_k_bound,
                "efficiency_mean": reps.iter().map(|r| r.efficiency).sum::<f64>() / m,
            }),
        );
    }
    b.metrics = serde_json::Value::Object(metrics);
    b.write(out)?;
    Ok(b)
}
