use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::optimize::{jacobian, levenberg_marquardt, nelder_mead};
use super::result::FitResult;
use crate::correlations::{hom_raw, DegeneracyClass, CSV_SCHEMA};
use crate::emitter::EmitterParams;
use crate::error::{check_unit_interval, Error, Result};

/// Number of multi-start points.
pub const N_STARTS: usize = 16;
const NM_MAX_ITER: usize = 4000;
const LM_MAX_ITER: usize = 200;

/// One baseline-normalized coincidence measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoincidencePoint {
    pub phi: f64,
    pub class: DegeneracyClass,
    pub value: f64,
    pub error: f64,
}

/// Coincidence of `class` at `phi` divided by the baseline.
pub fn normalized_model(p0: f64, p1: f64, p2: f64, m: f64, m_prime: f64, phi: f64, class: DegeneracyClass) -> f64 {
    let c = hom_raw(p0, p1, p2, m, m_prime, phi);
    c.get(class) / c.c0
}

/// Noiseless `zero` and `side` points on the given phases.
pub fn forward_points(params: &EmitterParams, phis: &[f64], rel_error: f64) -> Vec<CoincidencePoint> {
    let mut out = Vec::with_capacity(2 * phis.len());
    for &phi in phis {
        for class in [DegeneracyClass::Zero, DegeneracyClass::Side] {
            let value = normalized_model(params.p0, params.p1, params.p2, params.m, params.m_prime, phi, class);
            out.push(CoincidencePoint {
                phi,
                class,
                value,
                error: rel_error * value.abs(),
            });
        }
    }
    out
}

// softmax(0, u1, u2) for the populations and a logistic map for M'
fn unpack(theta: &[f64]) -> [f64; 4] {
    let mx = theta[0].max(theta[1]).max(0.0);
    let e = [(-mx).exp(), (theta[0] - mx).exp(), (theta[1] - mx).exp()];
    let s = e[0] + e[1] + e[2];
    [e[0] / s, e[1] / s, e[2] / s, 1.0 / (1.0 + (-theta[2]).exp())]
}

fn pack(p1: f64, p2: f64, m_prime: f64) -> [f64; 3] {
    let p0 = 1.0 - p1 - p2;
    [(p1 / p0).ln(), (p2 / p0).ln(), (m_prime / (1.0 - m_prime)).ln()]
}

fn residuals(data: &[CoincidencePoint], m: f64, p: [f64; 4]) -> Vec<f64> {
    data.iter()
        .map(|d| (normalized_model(p[0], p[1], p[2], m, p[3], d.phi, d.class) - d.value) / d.error)
        .collect()
}

fn check_data(data: &[CoincidencePoint]) -> Result<()> {
    let mut phis: Vec<f64> = data.iter().map(|d| d.phi).collect();
    phis.sort_by(f64::total_cmp);
    phis.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if phis.len() < 4 {
        return Err(Error::FitPrecondition(format!("need at least 4 distinct phases, got {}", phis.len())));
    }
    for class in [DegeneracyClass::Zero, DegeneracyClass::Side] {
        if !data.iter().any(|d| d.class == class) {
            return Err(Error::FitPrecondition(format!("no `{class}` points")));
        }
    }
    if let Some((i, d)) = data
        .iter()
        .enumerate()
        .find(|(_, d)| !(d.error > 0.0 && d.error.is_finite() && d.value.is_finite() && d.phi.is_finite()))
    {
        return Err(Error::FitPrecondition(format!(
            "point {i} has non-finite value or non-positive error ({:?})",
            d
        )));
    }
    let v0 = data[0].value;
    if data.iter().all(|d| d.value == v0) {
        return Err(Error::FitPrecondition("all values are equal".into()));
    }
    Ok(())
}

/// Gaussian maximum-likelihood fit of `{p0, p1, p2, M'}` to normalized
/// coincidences with `M` fixed. Standard errors come from the curvature of
/// the likelihood in `(p1, p2, M')`, with `p0 = 1 - p1 - p2`.
pub fn mle_fit_coincidences(data: &[CoincidencePoint], fixed_m: f64) -> Result<FitResult> {
    check_unit_interval("M", fixed_m)?;
    check_data(data)?;
    let cost = |theta: &[f64]| 0.5 * residuals(data, fixed_m, unpack(theta)).iter().map(|r| r * r).sum::<f64>();
    let mut best: Option<(f64, Vec<f64>, bool)> = None;
    let mut total_iter = 0;
    for &p1 in &[0.02, 0.1, 0.3, 0.6] {
        for &ratio in &[1e-3, 0.05] {
            for &mp in &[0.8, 0.97] {
                let start = pack(p1, ratio * p1, mp);
                let nm = nelder_mead(cost, &start, 0.5, NM_MAX_ITER);
                let lm = levenberg_marquardt(|t| residuals(data, fixed_m, unpack(t)), &nm.x, LM_MAX_ITER);
                total_iter += nm.iterations + lm.iterations;
                let (x, c, conv) = if 0.5 * lm.value <= nm.value {
                    (lm.x, 0.5 * lm.value, lm.converged || nm.converged)
                } else {
                    (nm.x, nm.value, nm.converged)
                };
                if c.is_finite() && best.as_ref().is_none_or(|b| c < b.0) {
                    best = Some((c, x, conv));
                }
            }
        }
    }
    let Some((c, theta, converged)) = best else {
        return Err(Error::NonConvergence { starts: N_STARTS });
    };
    if !converged {
        return Err(Error::NonConvergence { starts: N_STARTS });
    }
    let p = unpack(&theta);
    let mut natural = |q: &[f64]| residuals(data, fixed_m, [1.0 - q[0] - q[1], q[0], q[1], q[2]]);
    let j = jacobian(&mut natural, &[p[1], p[2], p[3]]);
    let cov = (j.transpose() * &j)
        .pseudo_inverse(1e-14)
        .unwrap_or_else(|_| DMatrix::from_element(3, 3, f64::NAN));
    let se = |v: f64| if v.is_finite() { v.max(0.0).sqrt() } else { f64::MAX };
    let mut fit = FitResult::new("coincidences", data.len());
    fit.set("p0", p[0], se(cov[(0, 0)] + cov[(1, 1)] + 2.0 * cov[(0, 1)]));
    fit.set("p1", p[1], se(cov[(0, 0)]));
    fit.set("p2", p[2], se(cov[(1, 1)]));
    fit.set("Mprime", p[3], se(cov[(2, 2)]));
    fit.fixed.insert("M".into(), fixed_m);
    let norm_const: f64 = data
        .iter()
        .map(|d| (d.error * (2.0 * std::f64::consts::PI).sqrt()).ln())
        .sum();
    fit.log_likelihood = Some(-c - norm_const);
    fit.residual_norm = (2.0 * c).sqrt();
    fit.converged = converged;
    fit.iterations = total_iter;
    fit.starts = N_STARTS;
    Ok(fit)
}

/// Fitted `zero` and `side` curves on `phis` as CSV.
pub fn write_coincidence_curve<W: Write>(fit: &FitResult, phis: &[f64], mut w: W) -> Result<()> {
    let get = |k: &str| {
        fit.value(k).ok_or(Error::InvalidParameter {
            name: "fit",
            reason: format!("missing parameter {k}"),
        })
    };
    let (p0, p1, p2, m, mp) = (get("p0")?, get("p1")?, get("p2")?, get("M")?, get("Mprime")?);
    writeln!(w, "# {CSV_SCHEMA} coincidence-fit")?;
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["phi_radians", "zero", "side"])?;
    for &phi in phis {
        wtr.write_record([
            format!("{phi:e}"),
            format!("{:e}", normalized_model(p0, p1, p2, m, mp, phi, DegeneracyClass::Zero)),
            format!("{:e}", normalized_model(p0, p1, p2, m, mp, phi, DegeneracyClass::Side)),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
