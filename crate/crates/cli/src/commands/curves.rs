use serde::Serialize;

use rfcoh::correlations::{g2_filtered, hom_coincidences, DegeneracyClass, JSON_SCHEMA_VERSION};
use rfcoh::emitter::{EmitterParams, SaturationModel};
use rfcoh::interferometry::fringe_visibility;

use crate::config::{ParameterSet, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{Output, Table};

#[derive(Serialize)]
struct SetSummary {
    name: String,
    p0: f64,
    p1: f64,
    p2: f64,
    #[serde(rename = "M")]
    m: f64,
    #[serde(rename = "Mprime")]
    m_prime: f64,
    side_min: f64,
    side_max: f64,
    /// `C(±τ)/C0` passes through 1 on the phase grid.
    side_crosses_baseline: bool,
    /// `C(0)` and `C(±τ)` swap order on the phase grid.
    zero_side_cross: bool,
}

#[derive(Serialize)]
struct Summary {
    schema_version: u32,
    x: f64,
    parameter_sets: Vec<SetSummary>,
}

fn finite_or_nan(r: rfcoh::Result<f64>) -> CliResult<f64> {
    match r {
        Ok(v) => Ok(v),
        Err(rfcoh::Error::DivergentLimit(_)) => Ok(f64::NAN),
        Err(e) => Err(e.into()),
    }
}

/// Visibility and filtered `g2` against flux, coincidence ratios against phase.
pub fn run(cfg: &RunConfig, out: &mut Output) -> CliResult<()> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("curves needs a `sweep` section with nbar and phi grids".into()))?;
    let sat = SaturationModel::new(cfg.emitter.x)?;

    let mut vis = Table::new("visibility", &["nbar", "p1", "visibility"]);
    let mut g2 = Table::new("g2-filtered", &["nbar", "p1", "g2_zero", "g2_side"]);
    for &nbar in &sweep.nbar {
        let p1 = sat.p1(nbar)?;
        let mut p = cfg.emitter.clone();
        p.p0 = 1.0 - p1;
        p.p1 = p1;
        p.p2 = 0.0;
        vis.push_numbers(&[nbar, p1, fringe_visibility(&p)]);
        let zero = finite_or_nan(g2_filtered(DegeneracyClass::Zero, p1))?;
        let side = finite_or_nan(g2_filtered(DegeneracyClass::Side, p1))?;
        g2.push_numbers(&[nbar, p1, zero, side]);
    }
    out.table("visibility", &vis)?;
    out.table("g2_filtered", &g2)?;

    let sets: Vec<(String, EmitterParams)> = if sweep.parameter_sets.is_empty() {
        vec![("emitter".into(), cfg.emitter.clone())]
    } else {
        sweep
            .parameter_sets
            .iter()
            .map(|s: &ParameterSet| Ok((s.name.clone(), s.to_params()?)))
            .collect::<CliResult<_>>()?
    };
    let mut summaries = Vec::new();
    for (name, p) in &sets {
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
            return Err(CliError::Config(format!("parameter set name `{name}` is not a plain file stem")));
        }
        let mut t = Table::new(
            "coincidences",
            &["phi_radians", "c0", "c_zero", "c_side", "zero_over_c0", "side_over_c0"],
        );
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut signs = Vec::new();
        for &phi in &sweep.phi {
            let c = hom_coincidences(phi, p)?;
            let (z, s) = (c.c_zero / c.c0, c.c_side / c.c0);
            t.push_numbers(&[phi, c.c0, c.c_zero, c.c_side, z, s]);
            if s.is_finite() {
                lo = lo.min(s);
                hi = hi.max(s);
            }
            signs.push((c.c_zero - c.c_side).signum());
        }
        out.table(&format!("coincidences_{name}"), &t)?;
        summaries.push(SetSummary {
            name: name.clone(),
            p0: p.p0,
            p1: p.p1,
            p2: p.p2,
            m: p.m,
            m_prime: p.m_prime,
            side_min: lo,
            side_max: hi,
            side_crosses_baseline: lo < 1.0 && hi > 1.0,
            zero_side_cross: signs.contains(&1.0) && signs.contains(&-1.0),
        });
    }
    out.json(
        "summary",
        &Summary {
            schema_version: JSON_SCHEMA_VERSION,
            x: cfg.emitter.x,
            parameter_sets: summaries,
        },
    )?;
    Ok(())
}
