use std::io::{BufWriter, Write};
use std::path::PathBuf;

use serde::Serialize;

use rfcoh::correlations::JSON_SCHEMA_VERSION;
use rfcoh::sim::{
    g2_from_trace, simulate_clicks, write_clicks_binary, write_clicks_csv, ClickRecord, HistogramAccumulator,
    Pairing, SimConfig, SimStats,
};

use crate::config::{Format, RunConfig, SimSection};
use crate::error::{CliError, CliResult};
use crate::output::{num, Output, Table};

/// File name of the coincidence table read back by `fit`.
pub const COINCIDENCES: &str = "coincidences.csv";

#[derive(Serialize)]
struct RunSummary {
    index: usize,
    phi: f64,
    seed: u64,
    delay_slots: usize,
    stats: SimStats,
    baseline: Option<f64>,
}

#[derive(Serialize)]
struct Summary {
    schema_version: u32,
    slot_width: f64,
    max_lag_slots: u64,
    runs: Vec<RunSummary>,
}

fn sim_config(cfg: &RunConfig, sec: &SimSection, phi: f64, seed: u64) -> SimConfig {
    let mut amzi = cfg.amzi.clone();
    amzi.phi = phi;
    SimConfig {
        params: cfg.emitter.clone(),
        slot_width: sec.slot_width.unwrap_or(amzi.tau / 4.0),
        amzi,
        duration: sec.duration,
        seed,
        detector_efficiency: sec.detector_efficiency,
        dark_rate: sec.dark_rate,
        phase_drift_rate: sec.phase_drift_rate,
    }
}

/// Outcome of `run`: the coincidence table path, or `None` when some run
/// produced no clicks.
pub type Simulated = Option<PathBuf>;

/// One cross-port run per phase. Writes the click streams, raw and
/// normalized histograms, and the normalized coincidences at lags 0 and ±τ.
pub fn run(cfg: &RunConfig, out: &mut Output) -> CliResult<Simulated> {
    let sec = cfg
        .sim
        .as_ref()
        .ok_or_else(|| CliError::Config("simulate needs a `sim` section".into()))?;
    let phases = if sec.phases.is_empty() { vec![cfg.amzi.phi] } else { sec.phases.clone() };
    let mut table = Table::new("coincidences", &["phi_radians", "class", "value", "error"]);
    let mut runs = Vec::new();
    let mut empty = false;
    let mut max_lag = 0;
    let slot_width = sec.slot_width.unwrap_or(cfg.amzi.tau / 4.0);
    for (i, &phi) in phases.iter().enumerate() {
        let seed = sec.seed.wrapping_add(i as u64);
        let sim = sim_config(cfg, sec, phi, seed);
        let mut stream = simulate_clicks(&sim)?;
        let k = stream.delay_slots();
        let n_slots = stream.n_slots();
        max_lag = sec.max_lag_slots.unwrap_or(50 * k as u64);
        if (max_lag as usize) < 2 * k {
            return Err(CliError::Config(format!("max_lag_slots {max_lag} must cover twice the delay of {k} slots")));
        }
        let mut acc = HistogramAccumulator::new(Pairing::CrossCD, max_lag, n_slots)?;
        let mut push_err = None;
        let mut kept: Vec<ClickRecord> = Vec::new();
        let bin = format!("clicks_{i}.bin");
        let path = out.path_of(&bin);
        let file = std::fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        write_clicks_binary(
            &mut w,
            stream.by_ref().inspect(|c| {
                if push_err.is_none() {
                    push_err = acc.push(*c).err();
                }
                if sec.write_click_csv {
                    kept.push(*c);
                }
            }),
        )?;
        w.flush().map_err(|e| CliError::io(&path, e))?;
        drop(w);
        out.record(&bin)?;
        if let Some(e) = push_err {
            return Err(e.into());
        }
        if sec.write_click_csv {
            let mut buf = Vec::new();
            write_clicks_csv(&mut buf, kept)?;
            out.write(&format!("clicks_{i}.csv"), &buf)?;
        }
        let stats = stream.stats();
        if acc.clicks() == 0 {
            log::warn!("empty histogram for phi = {phi}: no clicks in {n_slots} slots");
            empty = true;
            runs.push(RunSummary {
                index: i,
                phi,
                seed,
                delay_slots: k,
                stats,
                baseline: None,
            });
            continue;
        }
        let raw = acc.finish(sim.slot_width)?;
        let norm = g2_from_trace(&raw)?;
        write_trace(out, &format!("histogram_{i}"), &raw)?;
        write_trace(out, &format!("g2_{i}"), &norm)?;
        let c = norm.len() / 2;
        let errs = norm.errors.as_ref().expect("histogram errors");
        for (class, idx) in [("zero", c), ("side(+tau)", c + k), ("side(-tau)", c - k)] {
            table.rows.push(vec![num(phi), class.into(), num(norm.values[idx]), num(errs[idx])]);
        }
        runs.push(RunSummary {
            index: i,
            phi,
            seed,
            delay_slots: k,
            stats,
            baseline: raw.baseline,
        });
    }
    out.json(
        "summary",
        &Summary {
            schema_version: JSON_SCHEMA_VERSION,
            slot_width,
            max_lag_slots: max_lag,
            runs,
        },
    )?;
    if empty {
        log::warn!("no coincidence table written; no fit attempted");
        return Ok(None);
    }
    // always CSV: this is the fit input
    Ok(Some(out.write(COINCIDENCES, table.to_csv().as_bytes())?))
}

fn write_trace(out: &mut Output, name: &str, tr: &rfcoh::correlations::CorrelationTrace) -> CliResult<()> {
    match out.format {
        Format::Csv => {
            let mut buf = Vec::new();
            tr.write_csv(&mut buf)?;
            out.write(&format!("{name}.csv"), &buf)?;
        }
        Format::Json => {
            out.write(&format!("{name}.json"), (tr.to_json() + "\n").as_bytes())?;
        }
    }
    Ok(())
}
