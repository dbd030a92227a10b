use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rfcoh::correlations::{g2_filtered, hom_coincidences, DegeneracyClass};
use rfcoh::emitter::EmitterParams;
use rfcoh::interferometry::{AmziConfig, Port};
use rfcoh::sim::{
    histogram, read_clicks_binary, simulate_clicks, write_clicks_binary, ClickRecord, Histogram, Pairing, SimConfig,
};

const SIGMAS: f64 = 5.0;

fn config(p1: f64, phi: f64, slots: u64, seed: u64) -> SimConfig {
    let mut params = EmitterParams::with_populations(1.0 - p1, p1, 0.0);
    params.m = 1.0;
    params.m_prime = 1.0;
    let amzi = AmziConfig::with_phase(phi);
    let slot_width = amzi.tau / 4.0;
    SimConfig {
        params,
        amzi,
        slot_width,
        duration: slot_width * slots as f64,
        seed,
        ..Default::default()
    }
}

fn run(sim: &SimConfig, pairing: Pairing, max_lag: u64) -> (Histogram, usize) {
    let k = sim.delay_slots().unwrap();
    let stream = simulate_clicks(sim).unwrap();
    let n = stream.n_slots();
    (histogram(stream, pairing, max_lag, n, sim.slot_width).unwrap(), k)
}

fn within(value: f64, expected: f64, sigma: f64) -> bool {
    (value - expected).abs() <= SIGMAS * sigma
}

#[test]
fn filtered_g2_at_pi() {
    let p1 = 0.3;
    let (h, k) = run(&config(p1, PI, 2_000_000, 3), Pairing::AutoPortD, 200);
    let g = &h.normalized;
    let e = g.errors.as_ref().unwrap();
    let c = g.len() / 2;
    let zero = g2_filtered(DegeneracyClass::Zero, p1).unwrap();
    let side = g2_filtered(DegeneracyClass::Side, p1).unwrap();
    assert!(within(g.values[c], zero, e[c]), "{} ± {} vs {zero}", g.values[c], e[c]);
    assert!(within(g.values[c + k], side, e[c + k]));
    assert!(within(g.values[c - k], side, e[c - k]));
    // lag 2k is nondegenerate
    assert!(within(g.values[c + 2 * k], 1.0, e[c + 2 * k]));
    // baseline probability is <n_d>² = (p1²/2)²
    let b = h.raw.baseline.unwrap();
    assert!(within(b, (p1 * p1 / 2.0).powi(2), h.raw.baseline_error.unwrap()));
}

#[test]
fn cross_baseline_at_quarter_turn() {
    // n̄ = 0.62 parameters with ideal photons and p2 folded into p0
    let p1 = 0.50 / 0.998;
    let (h, k) = run(&config(p1, PI / 2.0, 1_000_000, 5), Pairing::CrossCD, 200);
    let b = h.raw.baseline.unwrap();
    let se = h.raw.baseline_error.unwrap();
    assert!(within(b, p1 * p1 / 4.0, se), "{b} ± {se}");
    let mut ideal = EmitterParams::with_populations(1.0 - p1, p1, 0.0);
    ideal.m = 1.0;
    ideal.m_prime = 1.0;
    let model = hom_coincidences(PI / 2.0, &ideal).unwrap();
    let raw = &h.raw;
    let e = raw.errors.as_ref().unwrap();
    let c = raw.len() / 2;
    assert!(within(raw.values[c], model.c_zero, e[c]));
    assert!(within(raw.values[c + k], model.c_side, e[c + k]));
    assert!(within(raw.values[c - k], model.c_side, e[c - k]));
}

/// Each slot carries `√p0|0> + √p1|1>` and the interferometer is lossless
/// overall, so both ports together see `p1` photons per slot.
#[test]
fn flux_is_p1_per_slot() {
    let p1 = 0.4;
    let slots = 400_000u64;
    let mut stream = simulate_clicks(&config(p1, 1.1, slots, 9)).unwrap();
    stream.by_ref().for_each(drop);
    let s = stream.stats();
    let photons = (s.photons_c + s.photons_d) as f64;
    let mean = p1 * slots as f64;
    // at most two photons per slot, so the variance is below 2 p1 per slot
    let sd = (2.0 * p1 * slots as f64).sqrt();
    assert!((photons - mean).abs() < SIGMAS * sd, "{photons} vs {mean}");
}

#[test]
fn uncorrelated_streams_give_flat_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 500_000u64;
    let mut clicks = Vec::new();
    for slot in 0..n {
        for port in [Port::C, Port::D] {
            if rng.gen::<f64>() < 0.02 {
                clicks.push(ClickRecord {
                    port,
                    slot,
                    multiplicity: 1,
                });
            }
        }
    }
    let h = histogram(clicks, Pairing::CrossCD, 40, n, 1e-9).unwrap();
    let e = h.normalized.errors.as_ref().unwrap();
    for (v, s) in h.normalized.values.iter().zip(e) {
        assert!(within(*v, 1.0, *s), "{v} ± {s}");
    }
}

#[test]
fn doubling_duration_shrinks_errors() {
    let short = run(&config(0.3, PI, 500_000, 21), Pairing::AutoPortD, 100).0;
    let long = run(&config(0.3, PI, 1_000_000, 21), Pairing::AutoPortD, 100).0;
    let c = short.raw.len() / 2;
    let rel = |h: &Histogram| h.raw.errors.as_ref().unwrap()[c] / h.raw.values[c];
    let ratio = rel(&short) / rel(&long);
    assert!((ratio - 2f64.sqrt()).abs() < 0.1, "{ratio}");
}

#[test]
fn binary_file_round_trip() {
    let clicks: Vec<ClickRecord> = simulate_clicks(&config(0.3, 0.4, 20_000, 1)).unwrap().collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("clicks.bin");
    write_clicks_binary(std::fs::File::create(&path).unwrap(), clicks.iter().copied()).unwrap();
    let back = read_clicks_binary(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back, clicks);
}
