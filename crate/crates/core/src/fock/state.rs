use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::density::DensityState;
use super::ops::{self, LadderPolynomial};
use super::spec::{Mode, ModeSpec};
use crate::error::{check_unit_interval, Error, Result};

/// Tolerance on the squared norm of a pure state.
pub const NORM_TOL: f64 = 1e-12;

/// Normalized pure state on a [`ModeSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct ModeState {
    spec: ModeSpec,
    amps: Vec<C64>,
}

#[derive(Debug, Serialize)]
pub struct BasisAmplitude {
    pub basis: String,
    pub re: f64,
    pub im: f64,
}

impl ModeState {
    pub fn new(spec: ModeSpec, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                got: amps.len(),
            });
        }
        let s = ModeState { spec, amps };
        let n2 = s.norm_sqr();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(s)
    }

    /// Unchecked constructor for results of unitary maps on normalized input.
    pub(crate) fn from_unitary(spec: ModeSpec, amps: Vec<C64>) -> Self {
        debug_assert!((amps.iter().map(|a| a.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-10);
        ModeState { spec, amps }
    }

    /// Builds a state from `(digits, amplitude)` pairs; must be normalized.
    pub fn from_terms(spec: ModeSpec, terms: &[(&[usize], C64)]) -> Result<Self> {
        let mut amps = vec![C64::new(0.0, 0.0); spec.dim()];
        for (digits, c) in terms {
            amps[spec.index(digits)?] += c;
        }
        Self::new(spec, amps)
    }

    /// All photon modes empty, all matter modes in |g>.
    pub fn vacuum(spec: ModeSpec) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); spec.dim()];
        amps[0] = C64::new(1.0, 0.0);
        ModeState { spec, amps }
    }

    /// Single-mode photon-number state `|n>`.
    pub fn fock(label: &str, n_max: usize, n: usize) -> Result<Self> {
        let spec = ModeSpec::new(vec![Mode::photon(label, n_max)])?;
        Self::from_terms(spec, &[(&[n], C64::new(1.0, 0.0))])
    }

    pub fn spec(&self) -> &ModeSpec {
        &self.spec
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, digits: &[usize]) -> Result<C64> {
        Ok(self.amps[self.spec.index(digits)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Kronecker product in the order given.
    pub fn tensor(states: &[&ModeState]) -> Result<ModeState> {
        let (first, rest) = states.split_first().ok_or(Error::Empty("tensor of no states"))?;
        let mut acc = (*first).clone();
        for s in rest {
            acc = acc.tensor_with(s)?;
        }
        Ok(acc)
    }

    pub fn tensor_with(&self, other: &ModeState) -> Result<ModeState> {
        let spec = self.spec.concat(&other.spec)?;
        let mut amps = Vec::with_capacity(spec.dim());
        for x in &self.amps {
            for y in &other.amps {
                amps.push(x * y);
            }
        }
        Ok(ModeState { spec, amps })
    }

    pub fn apply_beam_splitter(&self, mode_a: &str, mode_b: &str, transmissivity: f64, phase: f64) -> Result<ModeState> {
        check_unit_interval("transmissivity", transmissivity)?;
        let pair = ops::check_pair(&self.spec, mode_a, mode_b)?;
        let amps = ops::beam_splitter_vec(&self.spec, &self.amps, pair, transmissivity, phase)?;
        Ok(ModeState::from_unitary(self.spec.clone(), amps))
    }

    /// `|n> -> e^{i n φ} |n>` on one photon mode.
    pub fn apply_phase(&self, mode: &str, phi: f64) -> Result<ModeState> {
        let (m, _) = self.spec.photon_index(mode)?;
        Ok(ModeState::from_unitary(
            self.spec.clone(),
            ops::phase_vec(&self.spec, &self.amps, m, phi),
        ))
    }

    /// Channel of transmission `eta` on `mode`: mix with a vacuum ancilla on a
    /// splitter of transmissivity `eta` and trace the ancilla out.
    pub fn apply_loss(&self, mode: &str, eta: f64) -> Result<DensityState> {
        self.to_density().apply_loss(mode, eta)
    }

    /// `<a†_{c1} ... a†_{ck} a_{a1} ... a_{aj}>`.
    pub fn correlator(&self, creation: &[&str], annihilation: &[&str]) -> Result<C64> {
        let cm = self.spec.photon_indices(creation)?;
        let am = self.spec.photon_indices(annihilation)?;
        let lowered = |modes: &[usize]| {
            let mut v = vec![C64::new(0.0, 0.0); self.amps.len()];
            for (i, &x) in self.amps.iter().enumerate() {
                if let Some((j, k)) = self.spec.lower_many(i, modes) {
                    v[j] += x * k;
                }
            }
            v
        };
        let u = lowered(&cm);
        let v = lowered(&am);
        Ok(u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum())
    }

    /// `O|ψ>` for a polynomial in annihilators (not normalized).
    pub fn apply_polynomial(&self, op: &LadderPolynomial) -> Result<Vec<C64>> {
        op.apply_vec(&self.spec, &self.amps)
    }

    /// `<ψ|O†O|ψ>`.
    pub fn expect_normal(&self, op: &LadderPolynomial) -> Result<f64> {
        Ok(self.apply_polynomial(op)?.iter().map(|a| a.norm_sqr()).sum())
    }

    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityState> {
        if keep.is_empty() {
            return Err(Error::Empty("partial trace keep-set"));
        }
        let (kspec, pos) = self.spec.select(keep)?;
        let split = self.spec.split_indices(&pos);
        let n_rest = self.spec.dim() / kspec.dim();
        let mut groups: Vec<Vec<(usize, C64)>> = vec![Vec::new(); n_rest];
        for (i, &(k, r)) in split.iter().enumerate() {
            if self.amps[i] != C64::new(0.0, 0.0) {
                groups[r].push((k, self.amps[i]));
            }
        }
        let d = kspec.dim();
        let mut m = DMatrix::<C64>::zeros(d, d);
        for g in &groups {
            for &(ki, xi) in g {
                for &(kj, xj) in g {
                    m[(ki, kj)] += xi * xj.conj();
                }
            }
        }
        DensityState::new(kspec, m)
    }

    pub fn to_density(&self) -> DensityState {
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        DensityState::from_parts(self.spec.clone(), &v * v.adjoint())
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<ModeState> {
        Ok(ModeState {
            spec: self.spec.with_label_replaced(from, to)?,
            amps: self.amps.clone(),
        })
    }

    /// Same state with modes permuted into `labels` order (all modes).
    pub fn reorder(&self, labels: &[&str]) -> Result<ModeState> {
        if labels.len() != self.spec.len() {
            return Err(Error::DimensionMismatch {
                expected: self.spec.len(),
                got: labels.len(),
            });
        }
        let (nspec, pos) = self.spec.select(labels)?;
        let split = self.spec.split_indices(&pos);
        let mut amps = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (i, &(k, _)) in split.iter().enumerate() {
            amps[k] = self.amps[i];
        }
        Ok(ModeState { spec: nspec, amps })
    }

    /// Nonzero amplitudes as `(basis, re, im)` records.
    pub fn dump(&self) -> Vec<BasisAmplitude> {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 0.0)
            .map(|(i, a)| BasisAmplitude {
                basis: self.spec.basis_label(i),
                re: a.re,
                im: a.im,
            })
            .collect()
    }

    pub fn dump_json(&self) -> String {
        serde_json::to_string_pretty(&self.dump()).expect("amplitudes serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn two_mode(na: usize, nb: usize, n_max: usize) -> ModeState {
        let a = ModeState::fock("a", n_max, na).unwrap();
        let b = ModeState::fock("b", n_max, nb).unwrap();
        ModeState::tensor(&[&a, &b]).unwrap()
    }

    #[test]
    fn tensor_product_basis() {
        let s = two_mode(1, 0, 2);
        assert_eq!(s.amplitude(&[1, 0]).unwrap(), c(1.0));
        assert_eq!(s.norm_sqr(), 1.0);
    }

    #[test]
    fn tensor_label_collision() {
        let a = ModeState::fock("a", 2, 1).unwrap();
        assert_eq!(
            ModeState::tensor(&[&a, &a]).unwrap_err(),
            Error::LabelCollision("a".into())
        );
    }

    #[test]
    fn hong_ou_mandel_coalescence() {
        let out = two_mode(1, 1, 2).apply_beam_splitter("a", "b", 0.5, 0.0).unwrap();
        assert!(out.amplitude(&[1, 1]).unwrap().norm() < 1e-15);
        assert!((out.amplitude(&[2, 0]).unwrap() - c(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((out.amplitude(&[0, 2]).unwrap() + c(FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn single_photon_splitting_and_identity() {
        let s = two_mode(1, 0, 2);
        let same = s.apply_beam_splitter("a", "b", 1.0, 0.0).unwrap();
        assert!((same.amplitude(&[1, 0]).unwrap() - c(1.0)).norm() < 1e-15);
        let half = s.apply_beam_splitter("a", "b", 0.5, 0.0).unwrap();
        assert!((half.amplitude(&[1, 0]).unwrap().norm() - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((half.amplitude(&[0, 1]).unwrap().norm() - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn splitter_overflow_is_an_error() {
        let s = two_mode(2, 1, 2);
        assert!(matches!(
            s.apply_beam_splitter("a", "b", 0.5, 0.0),
            Err(Error::TruncationOverflow { .. })
        ));
        // the same input fits once the truncation allows three photons
        assert!(two_mode(2, 1, 3).apply_beam_splitter("a", "b", 0.5, 0.0).is_ok());
    }

    #[test]
    fn splitter_rejects_unequal_truncation_and_matter() {
        let a = ModeState::fock("a", 2, 1).unwrap();
        let b = ModeState::fock("b", 3, 0).unwrap();
        let s = ModeState::tensor(&[&a, &b]).unwrap();
        assert!(s.apply_beam_splitter("a", "b", 0.5, 0.0).is_err());
        assert_eq!(
            s.apply_beam_splitter("a", "z", 0.5, 0.0).unwrap_err(),
            Error::UnknownLabel("z".into())
        );
    }

    #[test]
    fn phase_shifts() {
        let one = ModeState::fock("a", 2, 1).unwrap().apply_phase("a", PI).unwrap();
        assert!((one.amplitude(&[1]).unwrap() + c(1.0)).norm() < 1e-15);
        let two = ModeState::fock("a", 2, 2).unwrap().apply_phase("a", PI / 2.0).unwrap();
        assert!((two.amplitude(&[2]).unwrap() + c(1.0)).norm() < 1e-15);
        let vac = ModeState::fock("a", 2, 0).unwrap().apply_phase("a", 0.7).unwrap();
        assert_eq!(vac.amplitude(&[0]).unwrap(), c(1.0));
    }

    #[test]
    fn number_correlators() {
        let one = ModeState::fock("a", 2, 1).unwrap();
        assert!((one.correlator(&["a"], &["a"]).unwrap() - c(1.0)).norm() < 1e-15);
        let two = ModeState::fock("a", 2, 2).unwrap();
        assert!((two.correlator(&["a", "a"], &["a", "a"]).unwrap() - c(2.0)).norm() < 1e-14);
    }

    #[test]
    fn reorder_and_relabel() {
        let s = two_mode(2, 0, 2);
        let r = s.reorder(&["b", "a"]).unwrap();
        assert_eq!(r.amplitude(&[0, 2]).unwrap(), c(1.0));
        let l = s.relabel("a", "x").unwrap();
        assert_eq!(l.spec().labels(), vec!["x", "b"]);
        assert!(s.relabel("a", "b").is_err());
    }

    #[test]
    fn json_dump_lists_nonzero_terms() {
        let s = two_mode(1, 0, 1);
        let dump = s.dump();
        assert_eq!(dump.len(), 1);
        assert_eq!(dump[0].basis, "a=1,b=0");
        assert!(s.dump_json().contains("\"re\": 1.0"));
    }

    #[test]
    fn partial_trace_edge_cases() {
        let s = two_mode(1, 0, 2);
        assert!(matches!(s.partial_trace(&[]), Err(Error::Empty(_))));
        let r = s.partial_trace(&["a"]).unwrap();
        assert!((r.matrix()[(1, 1)] - c(1.0)).norm() < 1e-15);
        assert!((r.purity() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn maximally_entangled_reduced_purity() {
        let spec = ModeSpec::new(vec![Mode::matter("x"), Mode::matter("y")]).unwrap();
        let s = ModeState::from_terms(spec, &[(&[0, 0], c(FRAC_1_SQRT_2)), (&[1, 1], c(FRAC_1_SQRT_2))]).unwrap();
        let r = s.partial_trace(&["x"]).unwrap();
        assert!((r.purity() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_unnormalized() {
        let spec = ModeSpec::new(vec![Mode::photon("a", 1)]).unwrap();
        assert!(matches!(
            ModeState::new(spec, vec![c(1.0), c(1.0)]),
            Err(Error::NotNormalized(_))
        ));
    }
}
