use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::sampler::ClickRecord;
use crate::correlations::{Abscissa, CorrelationTrace, Normalization, TraceKind};
use crate::error::{Error, Result};
use crate::interferometry::Port;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pairing {
    /// Port d against itself; lag 0 is weighted `m (m - 1)`.
    AutoPortD,
    /// Port c at slot `s` against port d at slot `s + lag`.
    CrossCD,
}

/// Streaming coincidence accumulator over lags `-max_lag..=max_lag`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramAccumulator {
    pairing: Pairing,
    max_lag: u64,
    n_slots: u64,
    counts: Vec<f64>,
    sum_w2: Vec<f64>,
    events: Vec<u64>,
    #[serde(skip)]
    window_c: VecDeque<(u64, u8)>,
    #[serde(skip)]
    window_d: VecDeque<(u64, u8)>,
    #[serde(skip)]
    last_slot: Option<u64>,
    clicks: u64,
}

impl HistogramAccumulator {
    pub fn new(pairing: Pairing, max_lag: u64, n_slots: u64) -> Result<Self> {
        if max_lag >= n_slots {
            return Err(Error::LagExceedsDuration { max_lag, n_slots });
        }
        let bins = 2 * max_lag as usize + 1;
        Ok(HistogramAccumulator {
            pairing,
            max_lag,
            n_slots,
            counts: vec![0.0; bins],
            sum_w2: vec![0.0; bins],
            events: vec![0; bins],
            window_c: VecDeque::new(),
            window_d: VecDeque::new(),
            last_slot: None,
            clicks: 0,
        })
    }

    fn add(&mut self, lag: i64, w: f64) {
        let i = (lag + self.max_lag as i64) as usize;
        self.counts[i] += w;
        self.sum_w2[i] += w * w;
        self.events[i] += 1;
    }

    pub fn push(&mut self, click: ClickRecord) -> Result<()> {
        if let Some(last) = self.last_slot {
            if click.slot < last {
                return Err(Error::InvalidParameter {
                    name: "clicks",
                    reason: format!("stream not sorted by slot ({} after {last})", click.slot),
                });
            }
        }
        if click.slot >= self.n_slots {
            return Err(Error::InvalidParameter {
                name: "clicks",
                reason: format!("slot {} beyond run of {} slots", click.slot, self.n_slots),
            });
        }
        self.last_slot = Some(click.slot);
        let s = click.slot;
        let m = click.multiplicity as f64;
        let horizon = s.saturating_sub(self.max_lag);
        for w in [&mut self.window_c, &mut self.window_d] {
            while w.front().is_some_and(|&(t, _)| t < horizon) {
                w.pop_front();
            }
        }
        let mut pairs: Vec<(i64, f64)> = Vec::new();
        match (self.pairing, click.port) {
            (Pairing::AutoPortD, Port::D) => {
                self.clicks += 1;
                if m >= 2.0 {
                    pairs.push((0, m * (m - 1.0)));
                }
                for &(t, mo) in &self.window_d {
                    let lag = (s - t) as i64;
                    if lag > 0 {
                        pairs.push((lag, m * mo as f64));
                        pairs.push((-lag, m * mo as f64));
                    }
                }
                self.window_d.push_back((s, click.multiplicity));
            }
            (Pairing::AutoPortD, Port::C) => {}
            (Pairing::CrossCD, Port::D) => {
                self.clicks += 1;
                for &(t, mo) in &self.window_c {
                    pairs.push(((s - t) as i64, m * mo as f64));
                }
                self.window_d.push_back((s, click.multiplicity));
            }
            (Pairing::CrossCD, Port::C) => {
                self.clicks += 1;
                for &(t, mo) in &self.window_d {
                    pairs.push((-((s - t) as i64), m * mo as f64));
                }
                self.window_c.push_back((s, click.multiplicity));
            }
        }
        for (lag, w) in pairs {
            self.add(lag, w);
        }
        Ok(())
    }

    /// Combines an accumulator from an independent run with the same layout.
    pub fn merge(&mut self, other: &HistogramAccumulator) -> Result<()> {
        if other.pairing != self.pairing || other.max_lag != self.max_lag {
            return Err(Error::InvalidParameter {
                name: "histogram",
                reason: "cannot merge histograms with different pairing or lag range".into(),
            });
        }
        for i in 0..self.counts.len() {
            self.counts[i] += other.counts[i];
            self.sum_w2[i] += other.sum_w2[i];
            self.events[i] += other.events[i];
        }
        self.n_slots += other.n_slots;
        self.clicks += other.clicks;
        Ok(())
    }

    /// Raw per-slot-pair coincidence probabilities with the baseline taken
    /// from lags `|lag| >= max_lag / 2`.
    pub fn finish(&self, slot_width: f64) -> Result<CorrelationTrace> {
        if self.clicks == 0 {
            return Err(Error::Empty("click stream"));
        }
        let ml = self.max_lag as i64;
        let mut abscissa = Vec::with_capacity(self.counts.len());
        let mut values = Vec::with_capacity(self.counts.len());
        let mut errors = Vec::with_capacity(self.counts.len());
        let (mut bc, mut bw2, mut bp) = (0.0, 0.0, 0.0);
        for (i, lag) in (-ml..=ml).enumerate() {
            let pairs = (self.n_slots - lag.unsigned_abs()) as f64;
            abscissa.push(Abscissa::Lag(lag as f64 * slot_width));
            values.push(self.counts[i] / pairs);
            errors.push(self.sum_w2[i].max(1.0).sqrt() / pairs);
            let outer = 2 * lag.abs() >= ml && lag != 0;
            let counted = match self.pairing {
                Pairing::AutoPortD => lag > 0,
                Pairing::CrossCD => true,
            };
            if outer && counted {
                bc += self.counts[i];
                bw2 += self.sum_w2[i];
                bp += pairs;
            }
        }
        let kind = TraceKind::Coincidence;
        let mut tr = CorrelationTrace::new(kind, Normalization::RawProbability, abscissa, values)?.with_errors(errors)?;
        tr.counts = Some(self.counts.clone());
        if bp > 0.0 {
            tr.baseline = Some(bc / bp);
            tr.baseline_error = Some(bw2.max(1.0).sqrt() / bp);
        }
        Ok(tr)
    }

    pub fn clicks(&self) -> u64 {
        self.clicks
    }

    pub fn n_slots(&self) -> u64 {
        self.n_slots
    }
}

/// Raw and baseline-normalized coincidence traces of one click stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub raw: CorrelationTrace,
    pub normalized: CorrelationTrace,
}

/// Histograms a slot-sorted click stream of `n_slots` slots.
pub fn histogram<I>(clicks: I, pairing: Pairing, max_lag: u64, n_slots: u64, slot_width: f64) -> Result<Histogram>
where
    I: IntoIterator<Item = ClickRecord>,
{
    let mut acc = HistogramAccumulator::new(pairing, max_lag, n_slots)?;
    for c in clicks {
        acc.push(c)?;
    }
    let raw = acc.finish(slot_width)?;
    let normalized = g2_from_trace(&raw)?;
    Ok(Histogram { raw, normalized })
}

/// Divides a raw trace by its baseline, propagating both errors.
pub fn g2_from_trace(trace: &CorrelationTrace) -> Result<CorrelationTrace> {
    let b = trace.baseline.ok_or(Error::ZeroBaseline)?;
    if !(b > 0.0) {
        return Err(Error::ZeroBaseline);
    }
    let sb = trace.baseline_error.unwrap_or(0.0);
    let values: Vec<f64> = trace.values.iter().map(|v| v / b).collect();
    let errors = trace.errors.as_ref().map(|errs| {
        trace
            .values
            .iter()
            .zip(errs)
            .map(|(v, e)| ((e / b).powi(2) + (v * sb / (b * b)).powi(2)).sqrt())
            .collect()
    });
    let mut out = CorrelationTrace::new(TraceKind::G2, Normalization::BaselineNormalized, trace.abscissa.clone(), values)?;
    out.errors = errors;
    out.counts = trace.counts.clone();
    out.baseline = Some(b);
    out.baseline_error = trace.baseline_error;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn click(port: Port, slot: u64, m: u8) -> ClickRecord {
        ClickRecord {
            port,
            slot,
            multiplicity: m,
        }
    }

    #[test]
    fn lag_bookkeeping() {
        let clicks = vec![click(Port::C, 0, 1), click(Port::D, 2, 1), click(Port::D, 5, 2)];
        let mut acc = HistogramAccumulator::new(Pairing::CrossCD, 4, 100).unwrap();
        for c in &clicks {
            acc.push(*c).unwrap();
        }
        let tr = acc.finish(1.0).unwrap();
        let counts = tr.counts.unwrap();
        assert_eq!(counts[4 + 2], 1.0);
        assert_eq!(counts.iter().sum::<f64>(), 1.0);
        let mut auto = HistogramAccumulator::new(Pairing::AutoPortD, 4, 100).unwrap();
        for c in &clicks {
            auto.push(*c).unwrap();
        }
        let counts = auto.finish(1.0).unwrap().counts.unwrap();
        assert_eq!(counts[4], 2.0);
        assert_eq!(counts[4 + 3], 2.0);
        assert_eq!(counts[4 - 3], 2.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            HistogramAccumulator::new(Pairing::CrossCD, 10, 10),
            Err(Error::LagExceedsDuration { .. })
        ));
        assert!(matches!(
            histogram(Vec::new(), Pairing::CrossCD, 2, 10, 1.0),
            Err(Error::Empty(_))
        ));
        let mut acc = HistogramAccumulator::new(Pairing::CrossCD, 2, 10).unwrap();
        acc.push(click(Port::C, 5, 1)).unwrap();
        assert!(acc.push(click(Port::C, 4, 1)).is_err());
    }

    #[test]
    fn normalization_arithmetic() {
        let mut tr = CorrelationTrace::new(
            TraceKind::Coincidence,
            Normalization::RawProbability,
            vec![Abscissa::Lag(0.0), Abscissa::Lag(1.0)],
            vec![100.0, 25.0],
        )
        .unwrap()
        .with_errors(vec![10.0, 5.0])
        .unwrap();
        tr.baseline = Some(25.0);
        tr.baseline_error = Some(0.0);
        let g = g2_from_trace(&tr).unwrap();
        assert_eq!(g.values, vec![4.0, 1.0]);
        assert_eq!(g.errors.unwrap(), vec![0.4, 0.2]);
        tr.baseline = Some(0.0);
        assert_eq!(g2_from_trace(&tr).unwrap_err(), Error::ZeroBaseline);
        let flat = CorrelationTrace {
            baseline: Some(3.0),
            values: vec![3.0, 3.0],
            ..tr
        };
        assert_eq!(g2_from_trace(&flat).unwrap().values, vec![1.0, 1.0]);
    }

    #[test]
    fn merge_adds_runs() {
        let mut a = HistogramAccumulator::new(Pairing::CrossCD, 2, 10).unwrap();
        a.push(click(Port::C, 1, 1)).unwrap();
        a.push(click(Port::D, 2, 1)).unwrap();
        let b = a.clone();
        a.merge(&b).unwrap();
        assert_eq!(a.n_slots(), 20);
        assert_eq!(a.finish(1.0).unwrap().counts.unwrap()[3], 2.0);
        let c = HistogramAccumulator::new(Pairing::AutoPortD, 2, 10).unwrap();
        assert!(a.merge(&c).is_err());
    }
}
