//! Brute-force evaluation of coincidence probabilities: build the product
//! state of every input time bin an output pair touches, apply the AMZI port
//! operators as ladder polynomials, and take the norm.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::coincidences::{DegeneracyClass, DIVERGENCE_FLOOR};
use crate::emitter::{photon_pure_state, steady_state, EmitterParams, SIMPLEX_TOL};
use crate::error::{check_unit_interval, Error, Result};
use crate::fock::{DensityState, LadderPolynomial, Mode, ModeSpec, ModeState};

/// Per-bin input state used by the oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleInput {
    /// Lowest-order state for the nondegenerate and side classes, full pure
    /// state for the zero class.
    PerClass,
    /// `√p0|0> + √p1|1> + √p2|2>`.
    FullPure,
    /// Full pure state with the two-photon population moved to vacuum:
    /// `(1-p1)|0><0| + p1|1><1| + √(p0 p1)(|0><1| + h.c.)`.
    LowestOrder,
    /// `√p0|0> + √p1|1>` without renormalization.
    Projected,
}

/// Mode label of input time bin `s` (in units of the AMZI delay).
pub fn slot_label(s: i64) -> String {
    format!("t{s}")
}

fn bin_state(params: &EmitterParams, input: OracleInput, label: &str) -> Result<DensityState> {
    let (p0, p1, p2) = (params.p0, params.p1, params.p2);
    match input {
        OracleInput::FullPure | OracleInput::PerClass => Ok(photon_pure_state(p0, p1, p2, label, 2)?.to_density()),
        OracleInput::LowestOrder => photon_pure_state(p0, p1, p2, label, 2)?
            .to_density()
            .collapse_multiphoton(label),
        OracleInput::Projected => {
            let spec = ModeSpec::new(vec![Mode::photon(label, 1)])?;
            let v = nalgebra::DVector::from_vec(vec![C64::new(p0.sqrt(), 0.0), C64::new(p1.sqrt(), 0.0)]);
            // sub-normalized: trace p0 + p1
            Ok(DensityState::from_parts(spec, &v * v.adjoint()))
        }
    }
}

/// Port operators with the entrance splitter kept as 3 dB loss:
/// `c_s = (a_{s-1} - e^{iφ} a_s)/2`, `d_s = (a_{s-1} + e^{iφ} a_s)/2`.
fn port_c(s: i64, phi: f64) -> LadderPolynomial {
    LadderPolynomial::linear(&[
        (C64::new(0.5, 0.0), &slot_label(s - 1)),
        (-C64::from_polar(0.5, phi), &slot_label(s)),
    ])
}

fn port_d(s: i64, phi: f64) -> LadderPolynomial {
    LadderPolynomial::linear(&[
        (C64::new(0.5, 0.0), &slot_label(s - 1)),
        (C64::from_polar(0.5, phi), &slot_label(s)),
    ])
}

fn involved_slots(s1: i64, s2: i64) -> Vec<i64> {
    let mut v = vec![s1 - 1, s1, s2 - 1, s2];
    v.sort_unstable();
    v.dedup();
    v
}

/// Output slots `(s_c, s_d)` representing each class.
fn class_slots(class: DegeneracyClass) -> (i64, i64) {
    match class {
        DegeneracyClass::Nondegenerate => (0, 3),
        DegeneracyClass::Side => (0, 1),
        DegeneracyClass::Zero => (0, 0),
    }
}

/// `<d†_{s_d} c†_{s_c} c_{s_c} d_{s_d}>` on a product of identical bins.
pub(crate) fn coincidence_at(params: &EmitterParams, input: OracleInput, phi: f64, s_c: i64, s_d: i64) -> Result<f64> {
    let slots = involved_slots(s_c, s_d);
    let mut joint: Option<DensityState> = None;
    for &s in &slots {
        let b = bin_state(params, input, &slot_label(s))?;
        joint = Some(match joint {
            None => b,
            Some(j) => j.tensor_with(&b)?,
        });
    }
    let joint = joint.expect("at least two slots");
    joint.expect_normal(&port_c(s_c, phi).product(&port_d(s_d, phi)))
}

fn check_ideal(params: &EmitterParams) -> Result<()> {
    if params.m != 1.0 || params.m_prime != 1.0 {
        return Err(Error::OracleRequiresIdealPhotons {
            m: params.m,
            m_prime: params.m_prime,
        });
    }
    for (name, v) in [("p0", params.p0), ("p1", params.p1), ("p2", params.p2)] {
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

/// Oracle coincidence for `class` with the per-class input states.
pub fn oracle_coincidences(phi: f64, params: &EmitterParams, class: DegeneracyClass) -> Result<f64> {
    oracle_coincidences_with(phi, params, class, OracleInput::PerClass)
}

pub fn oracle_coincidences_with(
    phi: f64,
    params: &EmitterParams,
    class: DegeneracyClass,
    input: OracleInput,
) -> Result<f64> {
    check_ideal(params)?;
    let input = match (input, class) {
        (OracleInput::PerClass, DegeneracyClass::Zero) => OracleInput::FullPure,
        (OracleInput::PerClass, _) => OracleInput::LowestOrder,
        (other, _) => other,
    };
    let (s_c, s_d) = class_slots(class);
    coincidence_at(params, input, phi, s_c, s_d)
}

/// Filtered port-d `g2` at `φ = π` from the light-matter steady state of
/// each input bin.
pub fn oracle_g2_filtered(class: DegeneracyClass, p1: f64) -> Result<f64> {
    check_unit_interval("p1", p1)?;
    if p1 <= DIVERGENCE_FLOOR {
        return Err(Error::DivergentLimit(p1));
    }
    let params = EmitterParams::with_populations(1.0 - p1, p1, 0.0);
    let phi = std::f64::consts::PI;
    let (s1, s2) = match class {
        DegeneracyClass::Zero => (0, 0),
        DegeneracyClass::Side => (0, 1),
        DegeneracyClass::Nondegenerate => (0, 3),
    };
    let slots = involved_slots(s1, s2);
    let states: Vec<ModeState> = slots
        .iter()
        .map(|&s| steady_state(&params, &slot_label(s), 1, 0.0))
        .collect::<Result<_>>()?;
    let refs: Vec<&ModeState> = states.iter().collect();
    let joint = ModeState::tensor(&refs)?;
    let num = joint.expect_normal(&port_d(s1, phi).product(&port_d(s2, phi)))?;
    let single = joint.expect_normal(&port_d(s1, phi))?;
    Ok(num / (single * single))
}

/// Dense matrix of the lowest-order bin state, for inspection.
#[cfg(test)]
pub(crate) fn lowest_order_matrix(params: &EmitterParams) -> Result<nalgebra::DMatrix<C64>> {
    Ok(bin_state(params, OracleInput::LowestOrder, "x")?.matrix().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::{g2_filtered, hom_coincidences, hom_side_extended};

    fn ideal(p0: f64, p1: f64, p2: f64) -> EmitterParams {
        let mut p = EmitterParams::with_populations(p0, p1, p2);
        p.m = 1.0;
        p.m_prime = 1.0;
        p
    }

    #[test]
    fn recomputed_examples_without_pairs() {
        let p = ideal(0.6, 0.4, 0.0);
        for phi in [0.0, 0.7, 2.2] {
            let c0 = oracle_coincidences(phi, &p, DegeneracyClass::Nondegenerate).unwrap();
            assert!((c0 - 0.04 * (1.0 - 0.36 * phi.cos().powi(2))).abs() < 1e-14);
            let side = oracle_coincidences(phi, &p, DegeneracyClass::Side).unwrap();
            let want = 3.0 / 16.0 * 0.16 - 0.125 * 0.6 * 0.16 * (2.0 * phi).cos();
            assert!((side - want).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_class_with_pairs() {
        let p = ideal(0.5, 0.45, 0.05);
        for phi in [0.0, 1.0, 2.5] {
            let z = oracle_coincidences(phi, &p, DegeneracyClass::Zero).unwrap();
            assert!((z - 0.05 / 4.0 * (1.0 - 0.5 * (2.0 * phi).cos())).abs() < 1e-14);
        }
    }

    #[test]
    fn side_lag_is_symmetric() {
        let p = ideal(0.5, 0.45, 0.05);
        let plus = coincidence_at(&p, OracleInput::LowestOrder, 0.9, 0, 1).unwrap();
        let minus = coincidence_at(&p, OracleInput::LowestOrder, 0.9, 1, 0).unwrap();
        assert!((plus - minus).abs() < 1e-14);
    }

    #[test]
    fn projected_input_gives_extended_side_form() {
        let p = ideal(0.5, 0.45, 0.05);
        for phi in [0.0, 0.6, 1.7] {
            let side = oracle_coincidences_with(phi, &p, DegeneracyClass::Side, OracleInput::Projected).unwrap();
            assert!((side - hom_side_extended(phi, &p).unwrap()).abs() < 1e-14);
            let c0 = oracle_coincidences_with(phi, &p, DegeneracyClass::Nondegenerate, OracleInput::Projected).unwrap();
            let want = 0.45f64.powi(2) / 4.0 * (0.95f64.powi(2) - 0.25 * phi.cos().powi(2));
            assert!((c0 - want).abs() < 1e-14);
            // the per-class oracle tracks the closed forms instead
            let c = hom_coincidences(phi, &p).unwrap();
            let lo = oracle_coincidences(phi, &p, DegeneracyClass::Side).unwrap();
            assert!((lo - c.c_side).abs() < 1e-14);
        }
    }

    #[test]
    fn lowest_order_state_is_physical() {
        let m = lowest_order_matrix(&ideal(0.5, 0.3, 0.2)).unwrap();
        assert!((m[(0, 0)].re - 0.7).abs() < 1e-15);
        assert!((m[(1, 0)].re - 0.15f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_ideal_photons() {
        let p = EmitterParams::with_populations(0.5, 0.5, 0.0);
        assert!(matches!(
            oracle_coincidences(0.0, &p, DegeneracyClass::Zero),
            Err(Error::OracleRequiresIdealPhotons { .. })
        ));
    }

    #[test]
    fn filtered_g2_matches_closed_form() {
        for p1 in [0.05, 0.3, 0.546, 1.0] {
            for class in DegeneracyClass::ALL {
                let o = oracle_g2_filtered(class, p1).unwrap();
                let c = g2_filtered(class, p1).unwrap();
                assert!((o - c).abs() < 1e-10 * c, "{class} {p1}: {o} vs {c}");
            }
        }
    }
}
