use std::io::Write;

use serde::{Deserialize, Serialize};

use super::optimize::{jacobian, levenberg_marquardt};
use super::result::FitResult;
use crate::correlations::CSV_SCHEMA;
use crate::emitter::{saturation_p1, SaturationModel};
use crate::error::{Error, Result};

/// Rabi-form drive: `Ω = omega_scale · √n̄` (rad/s), so that
/// `Ω² T1 T2 = x n̄` with `x = omega_scale² T1 T2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RabiModel {
    pub omega_scale: f64,
    #[serde(rename = "T1")]
    pub t1: f64,
    #[serde(rename = "T2")]
    pub t2: f64,
}

impl RabiModel {
    pub fn new(omega_scale: f64, t1: f64, t2: f64) -> Result<Self> {
        for (name, v) in [("omega_scale", omega_scale), ("T1", t1), ("T2", t2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{v} must be positive"),
                });
            }
        }
        Ok(RabiModel { omega_scale, t1, t2 })
    }

    /// Rabi model equivalent to saturation coefficient `x`.
    pub fn from_x(x: f64, t1: f64, t2: f64) -> Result<Self> {
        RabiModel::new((x / (t1 * t2)).sqrt(), t1, t2)
    }

    pub fn omega(&self, nbar: f64) -> f64 {
        self.omega_scale * nbar.sqrt()
    }

    pub fn x(&self) -> f64 {
        self.omega_scale * self.omega_scale * self.t1 * self.t2
    }

    pub fn visibility(&self, v0: f64, nbar: f64) -> f64 {
        let w = self.omega(nbar);
        v0 / (1.0 + w * w * self.t1 * self.t2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum VisibilityModel {
    /// `V = V0 / (1 + x n̄)`.
    Saturation,
    /// `V = V0 / (1 + Ω² T1 T2)` with `T1`, `T2` held fixed.
    Rabi {
        #[serde(rename = "T1")]
        t1: f64,
        #[serde(rename = "T2")]
        t2: f64,
    },
}

impl VisibilityModel {
    pub fn name(&self) -> &'static str {
        match self {
            VisibilityModel::Saturation => "saturation",
            VisibilityModel::Rabi { .. } => "rabi",
        }
    }
}

pub fn saturation_visibility(v0: f64, x: f64, nbar: f64) -> f64 {
    v0 / (1.0 + x * nbar)
}

fn check_spread(data: &[(f64, f64)]) -> Result<()> {
    if let Some((i, _)) = data
        .iter()
        .enumerate()
        .find(|(_, (n, v))| !(*n >= 0.0 && n.is_finite() && *v > 0.0 && v.is_finite()))
    {
        return Err(Error::FitPrecondition(format!("point {i} needs nbar >= 0 and visibility > 0")));
    }
    let mut ns: Vec<f64> = data.iter().map(|d| d.0).collect();
    ns.sort_by(f64::total_cmp);
    ns.dedup();
    let lo = ns.iter().copied().find(|&n| n > 0.0);
    let hi = ns.last().copied().unwrap_or(0.0);
    if ns.len() < 3 || lo.is_none_or(|lo| hi < 10.0 * lo) {
        return Err(Error::FitPrecondition(format!(
            "insufficient spread in nbar: need 3 distinct values spanning a decade, got {ns:?}"
        )));
    }
    Ok(())
}

/// Least-squares fit of a visibility-vs-flux curve. The saturation form
/// reports `{V0, x}`; the Rabi form reports `{V0, omega_scale}` and the
/// derived `x`.
pub fn fit_visibility_curve(data: &[(f64, f64)], model: VisibilityModel) -> Result<FitResult> {
    check_spread(data)?;
    // exact start from the linear relation 1/V = 1/V0 + (x/V0) n̄
    let n = data.len() as f64;
    let (sx, sy) = data.iter().fold((0.0, 0.0), |(a, b), (x, v)| (a + x, b + 1.0 / v));
    let (mx, my) = (sx / n, sy / n);
    let (sxx, sxy) = data
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, v)| (a + (x - mx).powi(2), b + (x - mx) * (1.0 / v - my)));
    let slope = sxy / sxx;
    let inv_v0 = my - slope * mx;
    let v0_start = 1.0 / inv_v0;
    let x_start = (slope / inv_v0).max(1e-12);

    let sat = |p: &[f64]| -> Vec<f64> { data.iter().map(|&(nb, v)| saturation_visibility(p[0], p[1], nb) - v).collect() };
    let lm = levenberg_marquardt(sat, &[v0_start, x_start], 200);
    let (v0, x) = (lm.x[0], lm.x[1]);
    let mut fit = FitResult::new(model.name(), data.len());
    fit.residual_norm = lm.value.sqrt();
    fit.converged = lm.converged;
    fit.iterations = lm.iterations;
    let dof = (data.len() as f64 - 2.0).max(1.0);
    let s2 = lm.value / dof;
    match model {
        VisibilityModel::Saturation => {
            let mut r = sat;
            let se = std_errors(&mut r, &[v0, x], s2);
            fit.set("V0", v0, se[0]);
            fit.set("x", x, se[1]);
        }
        VisibilityModel::Rabi { t1, t2 } => {
            let scale = RabiModel::from_x(x, t1, t2)
                .map_err(|e| Error::FitPrecondition(format!("fitted x = {x} has no Rabi form: {e}")))?
                .omega_scale;
            let mut rabi = |p: &[f64]| -> Vec<f64> {
                data.iter()
                    .map(|&(nb, v)| p[0] / (1.0 + p[1] * p[1] * nb * t1 * t2) - v)
                    .collect()
            };
            let se = std_errors(&mut rabi, &[v0, scale], s2);
            fit.residual_norm = rabi(&[v0, scale]).iter().map(|r| r * r).sum::<f64>().sqrt();
            fit.set("V0", v0, se[0]);
            fit.set("omega_scale", scale, se[1]);
            fit.set("x", x, 2.0 * scale * t1 * t2 * se[1]);
            fit.fixed.insert("T1".into(), t1);
            fit.fixed.insert("T2".into(), t2);
        }
    }
    Ok(fit)
}

fn std_errors<R: FnMut(&[f64]) -> Vec<f64>>(r: &mut R, p: &[f64], s2: f64) -> Vec<f64> {
    let j = jacobian(r, p);
    match (j.transpose() * &j).try_inverse() {
        Some(c) => (0..p.len()).map(|i| (c[(i, i)] * s2).max(0.0).sqrt()).collect(),
        None => vec![f64::MAX; p.len()],
    }
}

/// Visibility predicted by a saturation or Rabi fit.
pub fn visibility_at(fit: &FitResult, nbar: f64) -> Result<f64> {
    let missing = |k: &str| Error::InvalidParameter {
        name: "fit",
        reason: format!("missing parameter {k}"),
    };
    let v0 = fit.value("V0").ok_or_else(|| missing("V0"))?;
    match fit.model.as_str() {
        "saturation" => Ok(saturation_visibility(v0, fit.value("x").ok_or_else(|| missing("x"))?, nbar)),
        "rabi" => {
            let m = RabiModel::new(
                fit.value("omega_scale").ok_or_else(|| missing("omega_scale"))?,
                fit.value("T1").ok_or_else(|| missing("T1"))?,
                fit.value("T2").ok_or_else(|| missing("T2"))?,
            )?;
            Ok(m.visibility(v0, nbar))
        }
        other => Err(Error::InvalidParameter {
            name: "fit",
            reason: format!("`{other}` is not a visibility model"),
        }),
    }
}

pub fn write_visibility_curve<W: Write>(fit: &FitResult, nbars: &[f64], mut w: W) -> Result<()> {
    writeln!(w, "# {CSV_SCHEMA} visibility-fit")?;
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["nbar", "visibility"])?;
    for &nb in nbars {
        wtr.write_record([format!("{nb:e}"), format!("{:e}", visibility_at(fit, nb)?)])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Relative gap between `p1` from `g2` and from the saturation law above
/// which the two are reported inconsistent.
pub const CONSISTENCY_TOL: f64 = 0.25;

/// `p1 = 1/√g2(0)` of the filtered output at `φ = π`.
pub fn infer_p1_from_g2(g2_zero_filtered: f64) -> Result<f64> {
    if !(g2_zero_filtered >= 1.0) || !g2_zero_filtered.is_finite() {
        return Err(Error::OutOfModelRange(g2_zero_filtered));
    }
    Ok(1.0 / g2_zero_filtered.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct P1Check {
    pub p1_from_g2: f64,
    pub p1_from_flux: f64,
    /// `|p1_from_g2 - p1_from_flux| / p1_from_flux`.
    pub relative_gap: f64,
    pub consistent: bool,
}

/// Compares the `p1` implied by a filtered `g2(0)` with the saturation law
/// at flux `nbar`.
pub fn check_p1_against_flux(g2_zero_filtered: f64, nbar: f64, x: f64) -> Result<P1Check> {
    let p1_from_g2 = infer_p1_from_g2(g2_zero_filtered)?;
    let p1_from_flux = saturation_p1(nbar, SaturationModel::new(x)?.eta_ab())?;
    let relative_gap = (p1_from_g2 - p1_from_flux).abs() / p1_from_flux;
    let consistent = relative_gap <= CONSISTENCY_TOL;
    if !consistent {
        log::warn!(
            "g2(0) = {g2_zero_filtered} implies p1 = {p1_from_g2:.4}, but the saturation law gives {p1_from_flux:.4} at nbar = {nbar}"
        );
    }
    Ok(P1Check {
        p1_from_g2,
        p1_from_flux,
        relative_gap,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve() -> Vec<(f64, f64)> {
        [0.005, 0.02, 0.06, 0.15, 0.4, 1.0, 2.5]
            .iter()
            .map(|&n| (n, saturation_visibility(0.946, 1.94, n)))
            .collect()
    }

    #[test]
    fn saturation_round_trip() {
        let fit = fit_visibility_curve(&curve(), VisibilityModel::Saturation).unwrap();
        assert!((fit.value("x").unwrap() - 1.94).abs() < 1e-9);
        assert!((fit.value("V0").unwrap() - 0.946).abs() < 1e-9);
    }

    #[test]
    fn rabi_matches_saturation() {
        let (t1, t2) = (6.72e-11, 1.62 * 6.72e-11);
        let sat = fit_visibility_curve(&curve(), VisibilityModel::Saturation).unwrap();
        let rabi = fit_visibility_curve(&curve(), VisibilityModel::Rabi { t1, t2 }).unwrap();
        assert!((rabi.residual_norm - sat.residual_norm).abs() < 1e-9);
        for &(n, _) in &curve() {
            assert!((visibility_at(&sat, n).unwrap() - visibility_at(&rabi, n).unwrap()).abs() < 1e-12);
        }
        let m = RabiModel::new(rabi.value("omega_scale").unwrap(), t1, t2).unwrap();
        assert!((m.x() - 1.94).abs() < 1e-9);
    }

    #[test]
    fn spread_required() {
        assert!(matches!(
            fit_visibility_curve(&[(0.1, 0.5)], VisibilityModel::Saturation),
            Err(Error::FitPrecondition(_))
        ));
        let narrow = [(0.1, 0.8), (0.2, 0.7), (0.5, 0.5)];
        assert!(fit_visibility_curve(&narrow, VisibilityModel::Saturation).is_err());
    }

    #[test]
    fn p1_inference() {
        assert!((infer_p1_from_g2(3.35).unwrap() - 0.546).abs() < 1e-3);
        assert_eq!(infer_p1_from_g2(1.0).unwrap(), 1.0);
        assert_eq!(infer_p1_from_g2(0.9).unwrap_err(), Error::OutOfModelRange(0.9));
        let low = check_p1_against_flux(168.9, 0.0062, 1.94).unwrap();
        assert!((low.p1_from_g2 - 0.0770).abs() < 1e-4);
        assert!(!low.consistent);
        assert!(check_p1_against_flux(3.35, 0.62, 1.94).unwrap().consistent);
    }
}
