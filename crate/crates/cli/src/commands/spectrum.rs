use serde::Serialize;

use rfcoh::correlations::{filtered_spectrum, frequency_grid, spectrum_analytic, SpectrumTrace, JSON_SCHEMA_VERSION};
use rfcoh::interferometry::Port;

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::Output;

#[derive(Serialize)]
struct Component {
    name: String,
    weight: f64,
    fwhm_hz: f64,
    effective_fwhm_hz: f64,
}

#[derive(Serialize)]
struct Summary {
    schema_version: u32,
    broadband_fwhm_hz: f64,
    laser_like_fwhm_hz: f64,
    instrument_fwhm_hz: f64,
    fringe_period_hz: f64,
    tau: f64,
    phi: f64,
    unfiltered: Vec<Component>,
    instrument: Vec<Component>,
    port_c: Vec<Component>,
    port_d: Vec<Component>,
}

fn components(s: &SpectrumTrace) -> Vec<Component> {
    s.components
        .iter()
        .map(|c| Component {
            name: c.name.clone(),
            weight: c.weight,
            fwhm_hz: c.fwhm,
            effective_fwhm_hz: c.effective_fwhm,
        })
        .collect()
}

fn fwhm_of(s: &SpectrumTrace, name: &str) -> f64 {
    s.component(name).map_or(f64::NAN, |c| c.fwhm)
}

fn write_trace(out: &mut Output, name: &str, s: &SpectrumTrace) -> CliResult<()> {
    match out.format {
        Format::Csv => {
            let mut buf = Vec::new();
            s.write_csv(&mut buf)?;
            out.write(&format!("{name}.csv"), &buf)?;
        }
        Format::Json => {
            out.write(&format!("{name}.json"), (s.to_json() + "\n").as_bytes())?;
        }
    }
    Ok(())
}

/// Unfiltered, instrument-convolved and per-port AMZI-filtered spectra.
pub fn run(cfg: &RunConfig, out: &mut Output) -> CliResult<()> {
    let sec = &cfg.spectrum;
    if sec.points < 2 || !(sec.half_span_hz > 0.0) {
        return Err(CliError::Config("spectrum grid needs at least 2 points and a positive span".into()));
    }
    let grid = frequency_grid(sec.half_span_hz, sec.points);
    let p = &cfg.emitter;
    let bare = spectrum_analytic(p, &grid, None, sec.include_indistinguishability)?;
    let fpi = spectrum_analytic(p, &grid, Some(sec.instrument_fwhm_hz), sec.include_indistinguishability)?;
    let port_c = filtered_spectrum(&fpi, &cfg.amzi, Port::C)?;
    let port_d = filtered_spectrum(&fpi, &cfg.amzi, Port::D)?;
    write_trace(out, "unfiltered", &bare)?;
    write_trace(out, "fpi", &fpi)?;
    write_trace(out, "amzi_c", &port_c)?;
    write_trace(out, "amzi_d", &port_d)?;
    let summary = Summary {
        schema_version: JSON_SCHEMA_VERSION,
        broadband_fwhm_hz: fwhm_of(&bare, "broadband"),
        laser_like_fwhm_hz: fwhm_of(&bare, "laser_like"),
        instrument_fwhm_hz: sec.instrument_fwhm_hz,
        fringe_period_hz: cfg.amzi.fringe_period(),
        tau: cfg.amzi.tau,
        phi: cfg.amzi.phi,
        unfiltered: components(&bare),
        instrument: components(&fpi),
        port_c: components(&port_c),
        port_d: components(&port_d),
    };
    out.json("summary", &summary)?;
    log::info!("spectrum: {} grid points, fringe period {} Hz", sec.points, summary.fringe_period_hz);
    Ok(())
}
