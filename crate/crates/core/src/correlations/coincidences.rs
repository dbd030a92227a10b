use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::emitter::{EmitterParams, SIMPLEX_TOL};
use crate::error::{check_unit_interval, Error, Result};

/// Below this `p1` the filtered `g2` is reported as divergent.
pub const DIVERGENCE_FLOOR: f64 = 1e-12;

/// Coincidence lags grouped by how many input time bins coincide.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DegeneracyClass {
    /// `|Δt|` and `|Δt ± τ|` all much longer than `T1`.
    Nondegenerate,
    /// `Δt = ±τ`.
    Side,
    /// `Δt = 0`.
    Zero,
}

impl DegeneracyClass {
    pub const ALL: [DegeneracyClass; 3] = [DegeneracyClass::Nondegenerate, DegeneracyClass::Side, DegeneracyClass::Zero];

    pub fn as_str(self) -> &'static str {
        match self {
            DegeneracyClass::Nondegenerate => "nondegenerate",
            DegeneracyClass::Side => "side",
            DegeneracyClass::Zero => "zero",
        }
    }
}

impl fmt::Display for DegeneracyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DegeneracyClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nondegenerate" | "baseline" | "c0" => Ok(DegeneracyClass::Nondegenerate),
            "side" | "side+" | "side-" | "side(+tau)" | "side(-tau)" | "+tau" | "-tau" | "tau" => Ok(DegeneracyClass::Side),
            "zero" | "0" => Ok(DegeneracyClass::Zero),
            other => Err(Error::Parse {
                row: 0,
                reason: format!("unknown degeneracy class `{other}`"),
            }),
        }
    }
}

/// Coincidence probabilities per pair of output time bins.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomCoincidences {
    /// Baseline (nondegenerate lags).
    pub c0: f64,
    /// `Δt = ±τ`.
    pub c_side: f64,
    /// `Δt = 0`.
    pub c_zero: f64,
}

impl HomCoincidences {
    pub fn get(&self, class: DegeneracyClass) -> f64 {
        match class {
            DegeneracyClass::Nondegenerate => self.c0,
            DegeneracyClass::Side => self.c_side,
            DegeneracyClass::Zero => self.c_zero,
        }
    }
}

fn check_params(params: &EmitterParams) -> Result<()> {
    for (name, v) in [
        ("p0", params.p0),
        ("p1", params.p1),
        ("p2", params.p2),
        ("M", params.m),
        ("Mprime", params.m_prime),
    ] {
        check_unit_interval(name, v)?;
    }
    let sum = params.p0 + params.p1 + params.p2;
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::InvalidParameter {
            name: "p0+p1+p2",
            reason: format!("sums to {sum}"),
        });
    }
    Ok(())
}

/// Unchecked closed forms, shared with the fitter.
#[inline]
pub(crate) fn hom_raw(p0: f64, p1: f64, p2: f64, m: f64, m_prime: f64, phi: f64) -> HomCoincidences {
    let cos = phi.cos();
    let cos2 = (2.0 * phi).cos();
    HomCoincidences {
        c0: 0.25 * p1 * p1 * (1.0 - p0 * p0 * m * cos * cos),
        c_side: p1 * p1 / 16.0 * (3.0 - 2.0 * p0 * m * cos2),
        c_zero: 0.25 * p2 * (1.0 - p0 * m * cos2) + (p1 * p1 + 4.0 * p1 * p2 + 4.0 * p2 * p2) / 8.0 * (1.0 - m_prime),
    }
}

/// Phase-dependent two-photon interference coincidences behind the AMZI
/// (entrance splitter kept as 3 dB loss). The side value is
/// `(p1²/16)(3 - 2 p0 M cos 2φ)`; [`hom_side_extended`] gives the variant
/// with an explicit `p1³` term, which agrees when `p2 = 0`.
pub fn hom_coincidences(phi: f64, params: &EmitterParams) -> Result<HomCoincidences> {
    check_params(params)?;
    Ok(hom_raw(params.p0, params.p1, params.p2, params.m, params.m_prime, phi))
}

/// `(1/16) p0 p1² (3 - 2M cos 2φ) + (3/16) p1³`: the side coincidence of a
/// two-photon-truncated pure input `√p0|0> + √p1|1>`.
pub fn hom_side_extended(phi: f64, params: &EmitterParams) -> Result<f64> {
    check_params(params)?;
    let (p0, p1) = (params.p0, params.p1);
    Ok(p0 * p1 * p1 / 16.0 * (3.0 - 2.0 * params.m * (2.0 * phi).cos()) + 3.0 / 16.0 * p1.powi(3))
}

/// `(C_zero / C0, C_side / C0)`.
pub fn normalized_coincidences(phi: f64, params: &EmitterParams) -> Result<(f64, f64)> {
    let c = hom_coincidences(phi, params)?;
    if c.c0 <= 0.0 {
        return Err(Error::ZeroBaseline);
    }
    Ok((c.c_zero / c.c0, c.c_side / c.c0))
}

/// Port-d intensity correlation of the AMZI output at `φ = π`.
pub fn g2_filtered(class: DegeneracyClass, p1: f64) -> Result<f64> {
    if !(p1 <= 1.0) || p1 < 0.0 {
        return Err(Error::InvalidParameter {
            name: "p1",
            reason: format!("{p1} not in (0, 1]"),
        });
    }
    if p1 <= DIVERGENCE_FLOOR {
        return Err(Error::DivergentLimit(p1));
    }
    Ok(match class {
        DegeneracyClass::Nondegenerate => 1.0,
        DegeneracyClass::Zero => 1.0 / (p1 * p1),
        DegeneracyClass::Side => (1.0 + 2.0 * p1) / (4.0 * p1 * p1),
    })
}

/// `g2(±τ) / g2(0) = (1 + 2 p1)/4`.
pub fn g2_filtered_ratio(p1: f64) -> Result<f64> {
    Ok(g2_filtered(DegeneracyClass::Side, p1)? / g2_filtered(DegeneracyClass::Zero, p1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn baseline_peaks_at_quadrature() {
        let p = EmitterParams::with_populations(0.49, 0.5, 0.01);
        let c = hom_coincidences(PI / 2.0, &p).unwrap();
        assert!((c.c0 - 0.0625).abs() < 1e-16);
        for phi in [0.0, 0.3, 1.0, 2.0] {
            assert!(hom_coincidences(phi, &p).unwrap().c0 <= c.c0);
        }
    }

    #[test]
    fn perfect_interference_without_pairs_has_no_zero_coincidence() {
        let mut p = EmitterParams::with_populations(0.6, 0.4, 0.0);
        p.m_prime = 1.0;
        for phi in [0.0, 0.5, 2.0] {
            assert_eq!(hom_coincidences(phi, &p).unwrap().c_zero, 0.0);
        }
    }

    #[test]
    fn side_forms_agree_without_pairs() {
        for i in 0..=10 {
            let p1 = i as f64 / 10.0;
            let mut p = EmitterParams::with_populations(1.0 - p1, p1, 0.0);
            p.m = 0.7;
            for phi in [0.0, 0.4, 1.9] {
                let a = hom_coincidences(phi, &p).unwrap().c_side;
                let b = hom_side_extended(phi, &p).unwrap();
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(hom_coincidences(0.0, &EmitterParams::with_populations(0.5, 0.4, 0.0)).is_err());
        let mut p = EmitterParams::with_populations(0.5, 0.5, 0.0);
        p.m = 1.5;
        assert!(hom_coincidences(0.0, &p).is_err());
    }

    #[test]
    fn filtered_g2_values() {
        assert!((g2_filtered(DegeneracyClass::Zero, 0.546).unwrap() - 3.3544).abs() < 1e-4);
        assert_eq!(g2_filtered(DegeneracyClass::Zero, 1.0).unwrap(), 1.0);
        assert_eq!(g2_filtered(DegeneracyClass::Nondegenerate, 0.3).unwrap(), 1.0);
        assert!(matches!(g2_filtered(DegeneracyClass::Zero, 0.0), Err(Error::DivergentLimit(_))));
        assert!(g2_filtered(DegeneracyClass::Zero, 1.1).is_err());
        assert!((g2_filtered_ratio(1e-6).unwrap() - 0.25).abs() < 1e-6);
    }

    #[test]
    fn class_parsing() {
        assert_eq!("side+".parse::<DegeneracyClass>().unwrap(), DegeneracyClass::Side);
        assert_eq!("Zero".parse::<DegeneracyClass>().unwrap(), DegeneracyClass::Zero);
        assert!("middle".parse::<DegeneracyClass>().is_err());
    }
}
