use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::ops::{self, LadderPolynomial};
use super::spec::{Mode, ModeSpec};
use crate::error::{check_unit_interval, Error, Result};

pub const TRACE_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

/// Density matrix on a [`ModeSpec`], validated on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    spec: ModeSpec,
    matrix: DMatrix<C64>,
}

impl DensityState {
    pub fn new(spec: ModeSpec, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != spec.dim() || matrix.ncols() != spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                got: matrix.nrows(),
            });
        }
        let tr = matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} != 1")));
        }
        let herm = (&matrix - matrix.adjoint()).camax();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian (max deviation {herm:e})")));
        }
        let sym = (&matrix + matrix.adjoint()).scale(0.5);
        let min_eig = sym.symmetric_eigenvalues().min();
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(DensityState { spec, matrix })
    }

    /// Unchecked constructor for images of valid states under CPTP maps.
    pub(crate) fn from_parts(spec: ModeSpec, matrix: DMatrix<C64>) -> Self {
        DensityState { spec, matrix }
    }

    pub fn spec(&self) -> &ModeSpec {
        &self.spec
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn element(&self, row: &[usize], col: &[usize]) -> Result<C64> {
        Ok(self.matrix[(self.spec.index(row)?, self.spec.index(col)?)])
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn tensor_with(&self, other: &DensityState) -> Result<DensityState> {
        let spec = self.spec.concat(&other.spec)?;
        Ok(DensityState::from_parts(spec, self.matrix.kronecker(&other.matrix)))
    }

    /// `U ρ U†` for a map `U` acting on amplitude vectors.
    fn conjugate<F>(&self, u: F) -> Result<DensityState>
    where
        F: Fn(&[C64]) -> Result<Vec<C64>>,
    {
        let d = self.spec.dim();
        let mut a = DMatrix::<C64>::zeros(d, d);
        for j in 0..d {
            let col: Vec<C64> = self.matrix.column(j).iter().copied().collect();
            a.set_column(j, &DVector::from_vec(u(&col)?));
        }
        // (U (U ρ)†)† = U ρ U†
        let at = a.adjoint();
        let mut b = DMatrix::<C64>::zeros(d, d);
        for j in 0..d {
            let col: Vec<C64> = at.column(j).iter().copied().collect();
            b.set_column(j, &DVector::from_vec(u(&col)?));
        }
        Ok(DensityState::from_parts(self.spec.clone(), b.adjoint()))
    }

    pub fn apply_beam_splitter(&self, mode_a: &str, mode_b: &str, transmissivity: f64, phase: f64) -> Result<DensityState> {
        check_unit_interval("transmissivity", transmissivity)?;
        let pair = ops::check_pair(&self.spec, mode_a, mode_b)?;
        self.conjugate(|v| ops::beam_splitter_vec(&self.spec, v, pair, transmissivity, phase))
    }

    pub fn apply_phase(&self, mode: &str, phi: f64) -> Result<DensityState> {
        let (m, _) = self.spec.photon_index(mode)?;
        self.conjugate(|v| Ok(ops::phase_vec(&self.spec, v, m, phi)))
    }

    /// Transmission `eta` on `mode` through a splitter with a vacuum ancilla.
    pub fn apply_loss(&self, mode: &str, eta: f64) -> Result<DensityState> {
        check_unit_interval("eta", eta)?;
        let (_, n_max) = self.spec.photon_index(mode)?;
        let anc = self.spec.fresh_label("__loss");
        let anc_spec = ModeSpec::with_cap(vec![Mode::photon(anc.clone(), n_max)], self.spec.cap())?;
        let mut vac = DMatrix::<C64>::zeros(n_max + 1, n_max + 1);
        vac[(0, 0)] = C64::new(1.0, 0.0);
        let joint = self.tensor_with(&DensityState::from_parts(anc_spec, vac))?;
        let mixed = joint.apply_beam_splitter(mode, &anc, eta, 0.0)?;
        let keep = self.spec.labels();
        mixed.partial_trace(&keep)
    }

    /// `Tr(ρ a†_{c1}… a_{a1}…)`.
    pub fn correlator(&self, creation: &[&str], annihilation: &[&str]) -> Result<C64> {
        let cm = self.spec.photon_indices(creation)?;
        let am = self.spec.photon_indices(annihilation)?;
        let d = self.spec.dim();
        let lowered = |modes: &[usize]| -> Vec<Option<(usize, f64)>> {
            (0..d).map(|i| self.spec.lower_many(i, modes)).collect()
        };
        let lc = lowered(&cm);
        let la = lowered(&am);
        let mut sum = C64::new(0.0, 0.0);
        // Σ_ij ρ_ij <j|C† A|i>
        for (i, a) in la.iter().enumerate() {
            let Some((ti, ki)) = a else { continue };
            for (j, c) in lc.iter().enumerate() {
                if let Some((tj, kj)) = c {
                    if tj == ti {
                        sum += self.matrix[(i, j)] * (ki * kj);
                    }
                }
            }
        }
        Ok(sum)
    }

    /// `Tr(O ρ O†)`.
    pub fn expect_normal(&self, op: &LadderPolynomial) -> Result<f64> {
        let d = self.spec.dim();
        let mut o = DMatrix::<C64>::zeros(d, d);
        let mut e = vec![C64::new(0.0, 0.0); d];
        for i in 0..d {
            e[i] = C64::new(1.0, 0.0);
            o.set_column(i, &DVector::from_vec(op.apply_vec(&self.spec, &e)?));
            e[i] = C64::new(0.0, 0.0);
        }
        Ok((&o * &self.matrix * o.adjoint()).trace().re)
    }

    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityState> {
        if keep.is_empty() {
            return Err(Error::Empty("partial trace keep-set"));
        }
        let (kspec, pos) = self.spec.select(keep)?;
        let split = self.spec.split_indices(&pos);
        let n_rest = self.spec.dim() / kspec.dim();
        let mut by_rest: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_rest];
        for (i, &(k, r)) in split.iter().enumerate() {
            by_rest[r].push((i, k));
        }
        let d = kspec.dim();
        let mut m = DMatrix::<C64>::zeros(d, d);
        for group in &by_rest {
            for &(i, ki) in group {
                for &(j, kj) in group {
                    m[(ki, kj)] += self.matrix[(i, j)];
                }
            }
        }
        Ok(DensityState::from_parts(kspec, m))
    }

    /// Channel that keeps the `n <= 1` block of `mode` and sends every
    /// multiphoton population to vacuum (Kraus operators `P_{n<=1}` and
    /// `|0><n|` for `n >= 2`). Coherences involving `n >= 2` are dropped.
    pub fn collapse_multiphoton(&self, mode: &str) -> Result<DensityState> {
        let (m, _) = self.spec.photon_index(mode)?;
        let d = self.spec.dim();
        let stride = self.spec.stride(m);
        let mut out = DMatrix::<C64>::zeros(d, d);
        for i in 0..d {
            let ni = self.spec.digit(i, m);
            for j in 0..d {
                let nj = self.spec.digit(j, m);
                if ni <= 1 && nj <= 1 {
                    out[(i, j)] += self.matrix[(i, j)];
                } else if ni == nj {
                    out[(i - ni * stride, j - nj * stride)] += self.matrix[(i, j)];
                }
            }
        }
        Ok(DensityState::from_parts(self.spec.clone(), out))
    }

    /// Minimum eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (&self.matrix + self.matrix.adjoint()).scale(0.5);
        sym.symmetric_eigenvalues().min()
    }

    /// Photon-number distribution of one mode.
    pub fn number_distribution(&self, mode: &str) -> Result<Vec<f64>> {
        let (m, n_max) = self.spec.photon_index(mode)?;
        let mut p = vec![0.0; n_max + 1];
        for i in 0..self.spec.dim() {
            p[self.spec.digit(i, m)] += self.matrix[(i, i)].re;
        }
        Ok(p)
    }
}
