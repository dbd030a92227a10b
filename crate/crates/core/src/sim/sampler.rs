//! Sequential sampler of AMZI output photon numbers.
//!
//! Each input slot carries `√p0|0> + √p1|1> + √p2|2>` and is split by the
//! entrance splitter into a short-arm part (reaching the output in the same
//! slot) and a long-arm part (reaching it `k` slots later). Output slot `s`
//! mixes the long arm of slot `s-k` with the short arm of slot `s`. The long
//! arm of slot `s` stays entangled with what was measured at slot `s`, so
//! its conditional state is carried in a ring buffer of length `k` until it
//! is consumed.

use std::collections::VecDeque;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Geometric};
use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use crate::error::Result;
use crate::fock::beam_splitter_amplitude;
use crate::interferometry::Port;

/// Slots simulated and discarded before the first emitted slot.
pub fn warmup_slots(k: usize) -> usize {
    64.max(16 * k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClickRecord {
    pub port: Port,
    pub slot: u64,
    pub multiplicity: u8,
}

/// Running totals of a stream.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub slots: u64,
    /// Photons reaching each port before detection.
    pub photons_c: u64,
    pub photons_d: u64,
    pub clicks_c: u64,
    pub clicks_d: u64,
    pub dark_counts: u64,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Transfer tensor `K[h][o][i][l]`: amplitude for outcome `o = (n_c, n_d)`
/// and new long-arm count `l`, given old long-arm count `i` and short-arm
/// count `h`, before the phase factor `e^{i h φ}`.
struct Transfer {
    dim: usize,
    outcomes: Vec<(u8, u8)>,
    k: Vec<C64>,
}

impl Transfer {
    fn new(amps: &[f64]) -> Self {
        let dim = amps.len();
        let n_out = 2 * (dim - 1);
        let outcomes: Vec<(u8, u8)> = (0..=n_out)
            .flat_map(|total| (0..=total).map(move |nc| (nc as u8, (total - nc) as u8)))
            .collect();
        let no = outcomes.len();
        let mut k = vec![C64::new(0.0, 0.0); dim * no * dim * dim];
        for h in 0..dim {
            for l in 0..dim {
                let n = h + l;
                if n >= dim {
                    continue;
                }
                // entrance splitter: a† -> (l† + h†)/√2
                let a = amps[n] * binomial(n, l).sqrt() / 2f64.powi(n as i32).sqrt();
                for i in 0..dim {
                    for (oi, &(nc, nd)) in outcomes.iter().enumerate() {
                        if nc as usize + nd as usize != i + h {
                            continue;
                        }
                        // exit splitter: old long arm -> d, short arm -> c
                        let b = beam_splitter_amplitude(i, h, nd as usize, 0.5, 0.0);
                        k[((h * no + oi) * dim + i) * dim + l] += b * a;
                    }
                }
            }
        }
        Transfer { dim, outcomes, k }
    }

    /// `M[o][i][l] = Σ_h e^{i h φ} K[h][o][i][l]`.
    fn at_phase(&self, phi: f64, out: &mut [C64]) {
        let block = self.outcomes.len() * self.dim * self.dim;
        out.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
        for h in 0..self.dim {
            let e = C64::from_polar(1.0, phi * h as f64);
            for (x, kv) in out.iter_mut().zip(&self.k[h * block..(h + 1) * block]) {
                *x += e * kv;
            }
        }
    }
}

/// Deterministic click stream; see [`simulate_clicks`].
pub struct ClickStream {
    rng: ChaCha8Rng,
    transfer: Transfer,
    m: Vec<C64>,
    ring: Vec<[C64; 3]>,
    k: usize,
    cursor: u64,
    n_slots: u64,
    phi0: f64,
    drift_per_slot: f64,
    efficiency: f64,
    dark: Option<Geometric>,
    next_dark: [u64; 2],
    pending: VecDeque<ClickRecord>,
    stats: SimStats,
}

impl ClickStream {
    pub fn stats(&self) -> SimStats {
        self.stats
    }

    pub fn n_slots(&self) -> u64 {
        self.n_slots
    }

    pub fn delay_slots(&self) -> usize {
        self.k
    }

    /// Samples one output slot; returns `(n_c, n_d)`.
    fn step(&mut self, absolute: u64) -> (u8, u8) {
        let dim = self.transfer.dim;
        let slot = (absolute % self.k as u64) as usize;
        let old = self.ring[slot];
        let u: f64 = self.rng.gen();
        let mut acc = 0.0;
        let mut chosen = 0usize;
        let mut v = [C64::new(0.0, 0.0); 3];
        let mut p_chosen = 0.0;
        let no = self.transfer.outcomes.len();
        for o in 0..no {
            let mut w = [C64::new(0.0, 0.0); 3];
            for (i, &li) in old.iter().enumerate().take(dim) {
                if li == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &self.m[(o * dim + i) * dim..(o * dim + i + 1) * dim];
                for l in 0..dim {
                    w[l] += li * row[l];
                }
            }
            let p: f64 = w.iter().take(dim).map(|x| x.norm_sqr()).sum();
            if p > 0.0 {
                chosen = o;
                v = w;
                p_chosen = p;
            }
            acc += p;
            if u < acc {
                break;
            }
        }
        let norm = p_chosen.sqrt();
        let mut next = [C64::new(0.0, 0.0); 3];
        for l in 0..dim {
            next[l] = v[l] / norm;
        }
        self.ring[slot] = next;
        self.transfer.outcomes[chosen]
    }

    fn refresh_phase(&mut self, emitted: u64) {
        if self.drift_per_slot != 0.0 {
            let phi = self.phi0 + self.drift_per_slot * emitted as f64;
            self.transfer.at_phase(phi, &mut self.m);
        }
    }

    fn detect(&mut self, n: u8) -> u8 {
        if n == 0 || self.efficiency >= 1.0 {
            return n;
        }
        Binomial::new(n as u64, self.efficiency)
            .expect("efficiency validated")
            .sample(&mut self.rng) as u8
    }

    fn dark_hit(&mut self, port: usize, slot: u64) -> u8 {
        let Some(g) = self.dark else { return 0 };
        let mut hits = 0;
        while self.next_dark[port] == slot {
            hits += 1;
            self.next_dark[port] = slot + 1 + g.sample(&mut self.rng);
        }
        hits
    }
}

impl Iterator for ClickStream {
    type Item = ClickRecord;

    fn next(&mut self) -> Option<ClickRecord> {
        loop {
            if let Some(r) = self.pending.pop_front() {
                return Some(r);
            }
            if self.cursor >= self.n_slots {
                return None;
            }
            let s = self.cursor;
            self.cursor += 1;
            self.refresh_phase(s);
            let warm = warmup_slots(self.k) as u64;
            let (nc, nd) = self.step(s + warm);
            self.stats.slots += 1;
            self.stats.photons_c += nc as u64;
            self.stats.photons_d += nd as u64;
            for (pi, (port, n)) in [(Port::C, nc), (Port::D, nd)].into_iter().enumerate() {
                let det = self.detect(n);
                let dark = self.dark_hit(pi, s);
                self.stats.dark_counts += dark as u64;
                let m = det + dark;
                if m > 0 {
                    match port {
                        Port::C => self.stats.clicks_c += 1,
                        Port::D => self.stats.clicks_d += 1,
                    }
                    self.pending.push_back(ClickRecord {
                        port,
                        slot: s,
                        multiplicity: m,
                    });
                }
            }
        }
    }
}

/// Streams detector clicks for `sim`. Photon-number multiplicities reach
/// at most 2 per port when `p2 = 0` and at most 4 otherwise.
pub fn simulate_clicks(sim: &SimConfig) -> Result<ClickStream> {
    sim.validate()?;
    let k = sim.delay_slots()?;
    let n_slots = sim.n_slots()?;
    let p = &sim.params;
    let amps: Vec<f64> = if p.p2 > 0.0 {
        vec![p.p0.sqrt(), p.p1.sqrt(), p.p2.sqrt()]
    } else {
        vec![p.p0.sqrt(), p.p1.sqrt()]
    };
    let transfer = Transfer::new(&amps);
    let mut m = vec![C64::new(0.0, 0.0); transfer.outcomes.len() * transfer.dim * transfer.dim];
    transfer.at_phase(sim.amzi.phi, &mut m);
    let mut vacuum = [C64::new(0.0, 0.0); 3];
    vacuum[0] = C64::new(1.0, 0.0);
    let p_dark = -(-sim.dark_rate * sim.slot_width).exp_m1();
    let dark = if p_dark > 0.0 {
        Some(Geometric::new(p_dark.min(1.0)).expect("dark probability in (0, 1]"))
    } else {
        None
    };
    let mut stream = ClickStream {
        rng: ChaCha8Rng::seed_from_u64(sim.seed),
        transfer,
        m,
        ring: vec![vacuum; k],
        k,
        cursor: 0,
        n_slots,
        phi0: sim.amzi.phi,
        drift_per_slot: sim.phase_drift_rate * sim.slot_width,
        efficiency: sim.detector_efficiency,
        dark,
        next_dark: [0; 2],
        pending: VecDeque::new(),
        stats: SimStats::default(),
    };
    for s in 0..warmup_slots(k) as u64 {
        stream.step(s);
    }
    if let Some(g) = stream.dark {
        let a = g.sample(&mut stream.rng);
        let b = g.sample(&mut stream.rng);
        stream.next_dark = [a, b];
    }
    Ok(stream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emitter::EmitterParams;
    use crate::interferometry::AmziConfig;

    fn config(p1: f64, phi: f64, slots: u64) -> SimConfig {
        let mut params = EmitterParams::with_populations(1.0 - p1, p1, 0.0);
        params.m = 1.0;
        let amzi = AmziConfig::with_phase(phi);
        let slot_width = amzi.tau / 3.0;
        SimConfig {
            params,
            amzi,
            slot_width,
            duration: slot_width * slots as f64,
            seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn transfer_is_an_isometry() {
        for amps in [vec![0.8f64.sqrt(), 0.2f64.sqrt()], vec![0.7f64.sqrt(), 0.25f64.sqrt(), 0.05f64.sqrt()]] {
            let t = Transfer::new(&amps);
            let mut m = vec![C64::new(0.0, 0.0); t.outcomes.len() * t.dim * t.dim];
            t.at_phase(0.9, &mut m);
            // any normalized old long-arm state yields total probability 1
            for i in 0..t.dim {
                let total: f64 = (0..t.outcomes.len())
                    .map(|o| (0..t.dim).map(|l| m[(o * t.dim + i) * t.dim + l].norm_sqr()).sum::<f64>())
                    .sum();
                assert!((total - 1.0).abs() < 1e-12, "i={i}: {total}");
            }
        }
    }

    #[test]
    fn no_emission_no_clicks() {
        let stream = simulate_clicks(&config(0.0, 0.0, 10_000)).unwrap();
        assert_eq!(stream.count(), 0);
    }

    #[test]
    fn deterministic_for_seed() {
        let a: Vec<_> = simulate_clicks(&config(0.3, 1.0, 5_000)).unwrap().collect();
        let b: Vec<_> = simulate_clicks(&config(0.3, 1.0, 5_000)).unwrap().collect();
        assert!(!a.is_empty());
        assert_eq!(a, b);
        let mut other = config(0.3, 1.0, 5_000);
        other.seed = 12;
        let c: Vec<_> = simulate_clicks(&other).unwrap().collect();
        assert_ne!(a, c);
    }

    #[test]
    fn multiplicity_bounded_and_sorted() {
        let clicks: Vec<_> = simulate_clicks(&config(0.9, 0.0, 20_000)).unwrap().collect();
        assert!(clicks.iter().all(|c| (1..=2).contains(&c.multiplicity)));
        assert!(clicks.windows(2).all(|w| w[0].slot <= w[1].slot));
    }

    #[test]
    fn dark_counts_only() {
        let mut c = config(0.0, 0.0, 100_000);
        c.dark_rate = 1e6;
        let mut s = simulate_clicks(&c).unwrap();
        let n = s.by_ref().count() as f64;
        let expected = 2.0 * 100_000.0 * c.dark_rate * c.slot_width;
        assert!((n - expected).abs() < 5.0 * expected.sqrt(), "{n} vs {expected}");
        assert_eq!(s.stats().dark_counts as f64, n);
    }
}
