use std::f64::consts::PI;
use std::path::Path;

use rfcoh::estimation::{
    fit_visibility_curve, mle_fit_coincidences, read_coincidence_csv, read_visibility_csv, write_coincidence_curve,
    write_visibility_curve, FitResult,
};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::Output;

fn open(path: &Path) -> CliResult<std::fs::File> {
    if !path.exists() {
        return Err(CliError::Config(format!("input {} does not exist", path.display())));
    }
    std::fs::File::open(path).map_err(|e| CliError::io(path, e))
}

fn with_source(path: &Path, e: rfcoh::Error) -> CliError {
    let inner = CliError::from(e);
    match inner {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    }
}

/// Coincidence fit of `input`, plus the visibility fit when configured.
pub fn run(cfg: &RunConfig, input: &Path, out: &mut Output) -> CliResult<FitResult> {
    let data = read_coincidence_csv(open(input)?).map_err(|e| with_source(input, e))?;
    let fixed_m = cfg.fit.fixed_m.unwrap_or(cfg.emitter.m);
    let fit = mle_fit_coincidences(&data, fixed_m)?;
    out.write("coincidence_fit.json", (fit.to_json() + "\n").as_bytes())?;
    let n = cfg.fit.curve_points.max(2);
    let phis: Vec<f64> = (0..n).map(|i| 2.0 * PI * i as f64 / (n - 1) as f64).collect();
    let mut buf = Vec::new();
    write_coincidence_curve(&fit, &phis, &mut buf)?;
    out.write("coincidence_curve.csv", &buf)?;
    for k in ["p0", "p1", "p2", "Mprime"] {
        if let Some(p) = fit.get(k) {
            log::info!("fit {k} = {} ± {}", p.value, p.std_error);
        }
    }

    if let Some(vpath) = &cfg.fit.visibility_input {
        let vdata = read_visibility_csv(open(vpath)?).map_err(|e| with_source(vpath, e))?;
        let vfit = fit_visibility_curve(&vdata, cfg.fit.visibility_model)?;
        out.write("visibility_fit.json", (vfit.to_json() + "\n").as_bytes())?;
        let hi = vdata.iter().map(|d| d.0).fold(0.0, f64::max);
        let nbars: Vec<f64> = (0..n).map(|i| hi * i as f64 / (n - 1) as f64).collect();
        let mut buf = Vec::new();
        write_visibility_curve(&vfit, &nbars, &mut buf)?;
        out.write("visibility_curve.csv", &buf)?;
    }
    Ok(fit)
}
