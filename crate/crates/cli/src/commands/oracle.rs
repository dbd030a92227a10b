use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use rfcoh::correlations::{
    g2_filtered, hom_coincidences, oracle_coincidences, oracle_g2_filtered, DegeneracyClass, JSON_SCHEMA_VERSION,
};
use rfcoh::emitter::EmitterParams;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{num, Output, Table};

const CLASSES: [DegeneracyClass; 3] = [DegeneracyClass::Nondegenerate, DegeneracyClass::Side, DegeneracyClass::Zero];
const G2_P1: [f64; 5] = [0.05, 0.2, 0.4, 0.6, 0.9];

#[derive(Serialize)]
struct Report {
    schema_version: u32,
    samples: usize,
    seed: u64,
    tolerance: f64,
    max_abs_error: f64,
    max_g2_rel_error: f64,
    passed: bool,
}

/// Closed-form coincidences and filtered `g2` against the Fock-space oracle
/// on random identical-photon parameter sets.
pub fn run(cfg: &RunConfig, out: &mut Output) -> CliResult<()> {
    let sec = &cfg.oracle;
    if sec.samples == 0 || !(sec.tolerance > 0.0) {
        return Err(CliError::Config("oracle needs samples > 0 and a positive tolerance".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sec.seed);
    let mut t = Table::new(
        "oracle-check",
        &["p0", "p1", "p2", "phi_radians", "class", "closed_form", "oracle", "abs_error"],
    );
    let mut worst: f64 = 0.0;
    for _ in 0..sec.samples {
        let (a, b): (f64, f64) = (rng.gen(), rng.gen());
        let (lo, hi) = (a.min(b), a.max(b));
        let mut params = EmitterParams::with_populations(lo, hi - lo, 1.0 - hi);
        params.m = 1.0;
        params.m_prime = 1.0;
        let phi = rng.gen_range(0.0..2.0 * PI);
        let closed = hom_coincidences(phi, &params)?;
        for class in CLASSES {
            let c = closed.get(class);
            let o = oracle_coincidences(phi, &params, class)?;
            let err = (c - o).abs();
            worst = worst.max(err);
            t.rows.push(vec![
                num(params.p0),
                num(params.p1),
                num(params.p2),
                num(phi),
                class.to_string().into(),
                num(c),
                num(o),
                num(err),
            ]);
        }
    }
    out.table("samples", &t)?;
    let mut g2_worst: f64 = 0.0;
    for p1 in G2_P1 {
        for class in [DegeneracyClass::Zero, DegeneracyClass::Side] {
            let c = g2_filtered(class, p1)?;
            let o = oracle_g2_filtered(class, p1)?;
            g2_worst = g2_worst.max(((c - o) / c).abs());
        }
    }
    let passed = worst <= sec.tolerance && g2_worst <= sec.tolerance;
    out.json(
        "report",
        &Report {
            schema_version: JSON_SCHEMA_VERSION,
            samples: sec.samples,
            seed: sec.seed,
            tolerance: sec.tolerance,
            max_abs_error: worst,
            max_g2_rel_error: g2_worst,
            passed,
        },
    )?;
    log::info!("oracle-check: max |closed - oracle| = {worst:e}, filtered g2 relative error {g2_worst:e}");
    if !passed {
        return Err(CliError::Numeric(format!(
            "closed forms disagree with the oracle: {worst:e} / {g2_worst:e} exceeds {:e}",
            sec.tolerance
        )));
    }
    Ok(())
}
