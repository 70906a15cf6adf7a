use rand::SeedableRng;
use wvlab::optics::{port_probabilities, BeamParams, StConfig, WvConfig};
use wvlab::rng::{domain, StreamId};
use wvlab::sampler::{pdf_wv, sample_batch_at, sample_split_counts, DisturbanceState, Port, SplitCounts};
use wvlab::{Beam, Kick, Technique};

fn beam() -> Beam {
    BeamParams::new(1.075e-3, 780e-9).unwrap()
}

fn wv() -> Technique {
    Technique::WeakValue(WvConfig::new(0.38, 0.34).unwrap())
}

#[test]
fn same_stream_same_photons() {
    let b = beam();
    let k = Kick::from_angle(24e-9, &b);
    let s = StreamId::new(5, domain::TRIAL, 3);
    let a = sample_batch_at(&b, &wv(), &k, &DisturbanceState::default(), 0.0, 1000, s);
    let c = sample_batch_at(&b, &wv(), &k, &DisturbanceState::default(), 0.0, 1000, s);
    assert_eq!(a, c);
    let d = sample_batch_at(
        &b,
        &wv(),
        &k,
        &DisturbanceState::default(),
        0.0,
        1000,
        s.child(domain::TRIAL, 0),
    );
    assert_ne!(a, d);
}

#[test]
fn dark_port_mean_is_amplified() {
    let b = beam();
    let k = Kick::new(2.0, &b);
    let batches = sample_batch_at(
        &b,
        &wv(),
        &k,
        &DisturbanceState::default(),
        0.0,
        400_000,
        StreamId::new(9, 0, 0),
    );
    let w = WvConfig::new(0.38, 0.34).unwrap();
    let expect = pdf_wv(&b, &w, &k, Port::Dark).unwrap().mean;
    let dark = &batches[0];
    let se = b.sigma() / (dark.len() as f64).sqrt();
    assert!((dark.mean().unwrap() - expect).abs() < 5.0 * se);
    let (p_dark, _) = port_probabilities(&w);
    let frac = dark.len() as f64 / 400_000.0;
    assert!((frac - p_dark).abs() < 5.0 * (p_dark * (1.0 - p_dark) / 400_000.0).sqrt());
}

/// The binomial fast path and explicit photons give the same count statistics.
#[test]
fn binomial_counts_match_photon_counts() {
    let b = beam();
    let k = Kick::new(300.0, &b);
    let st = Technique::Standard(StConfig::new(1.0, &b).unwrap());
    let state = DisturbanceState {
        detector_jitter: 5e-6,
        ..Default::default()
    };
    for tech in [wv(), st] {
        let trials = 400;
        let n = 20_000u64;
        let mut explicit: Vec<Vec<SplitCounts>> = Vec::new();
        let mut fast: Vec<Vec<SplitCounts>> = Vec::new();
        for t in 0..trials {
            let s = StreamId::new(11, domain::TRIAL, t);
            explicit.push(
                sample_batch_at(&b, &tech, &k, &state, 0.0, n as usize, s)
                    .iter()
                    .map(SplitCounts::from_batch)
                    .collect(),
            );
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1000 + t);
            fast.push(
                sample_split_counts(&b, &tech, &k, &state, n, &mut rng)
                    .into_iter()
                    .map(|p| p.1)
                    .collect(),
            );
        }
        for port in 0..explicit[0].len() {
            let stats = |v: &[Vec<SplitCounts>]| {
                let d: Vec<f64> = v.iter().map(|c| c[port].right as f64 - c[port].left as f64).collect();
                let m = d.iter().sum::<f64>() / d.len() as f64;
                let var = d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (d.len() - 1) as f64;
                (m, var)
            };
            let (m1, v1) = stats(&explicit);
            let (m2, v2) = stats(&fast);
            let se = ((v1 + v2) / trials as f64).sqrt();
            assert!((m1 - m2).abs() < 5.0 * se, "port {port}: means {m1} vs {m2}");
            assert!((v1 / v2 - 1.0).abs() < 0.35, "port {port}: variances {v1} vs {v2}");
        }
    }
}
