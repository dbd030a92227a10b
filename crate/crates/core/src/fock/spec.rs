use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the total Hilbert-space dimension.
pub const DEFAULT_DIM_CAP: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    /// Bosonic mode truncated at `n_max` photons.
    Photon { n_max: usize },
    /// Two-level system with basis {g, e}.
    Matter,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mode {
    pub label: String,
    pub kind: ModeKind,
}

impl Mode {
    pub fn photon(label: impl Into<String>, n_max: usize) -> Self {
        Mode {
            label: label.into(),
            kind: ModeKind::Photon { n_max },
        }
    }

    pub fn matter(label: impl Into<String>) -> Self {
        Mode {
            label: label.into(),
            kind: ModeKind::Matter,
        }
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            ModeKind::Photon { n_max } => n_max + 1,
            ModeKind::Matter => 2,
        }
    }

    pub fn n_max(&self) -> Option<usize> {
        match self.kind {
            ModeKind::Photon { n_max } => Some(n_max),
            ModeKind::Matter => None,
        }
    }
}

/// Ordered list of modes. Basis states are indexed in mixed radix with the
/// first mode most significant, so amplitudes of a product state are the
/// Kronecker product of the factors in declaration order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeSpec {
    modes: Vec<Mode>,
    strides: Vec<usize>,
    dim: usize,
    cap: usize,
}

impl ModeSpec {
    pub fn new(modes: Vec<Mode>) -> Result<Self> {
        Self::with_cap(modes, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(modes: Vec<Mode>, cap: usize) -> Result<Self> {
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].iter().any(|o| o.label == m.label) {
                return Err(Error::LabelCollision(m.label.clone()));
            }
            if let ModeKind::Photon { n_max } = m.kind {
                if n_max < 1 {
                    return Err(Error::Truncation {
                        label: m.label.clone(),
                        reason: "n_max must be at least 1".into(),
                    });
                }
            }
        }
        let mut dim: usize = 1;
        for m in &modes {
            dim = dim
                .checked_mul(m.dim())
                .filter(|d| *d <= cap)
                .ok_or(Error::DimensionCap {
                    dim: dim.saturating_mul(m.dim()),
                    cap,
                })?;
        }
        let mut strides = vec![1; modes.len()];
        for i in (0..modes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * modes[i + 1].dim();
        }
        Ok(ModeSpec {
            modes,
            strides,
            dim,
            cap,
        })
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.modes.iter().map(|m| m.label.as_str()).collect()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.modes.iter().any(|m| m.label == label)
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Position and truncation of a photon mode.
    pub fn photon_index(&self, label: &str) -> Result<(usize, usize)> {
        let i = self.index_of(label)?;
        match self.modes[i].kind {
            ModeKind::Photon { n_max } => Ok((i, n_max)),
            ModeKind::Matter => Err(Error::NotPhotonMode(label.to_string())),
        }
    }

    pub fn stride(&self, mode: usize) -> usize {
        self.strides[mode]
    }

    #[inline]
    pub fn digit(&self, index: usize, mode: usize) -> usize {
        (index / self.strides[mode]) % self.modes[mode].dim()
    }

    pub fn digits(&self, index: usize) -> Vec<usize> {
        (0..self.modes.len()).map(|m| self.digit(index, m)).collect()
    }

    pub fn index(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.modes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.modes.len(),
                got: digits.len(),
            });
        }
        let mut idx = 0;
        for (m, (&d, mode)) in digits.iter().zip(&self.modes).enumerate() {
            if d >= mode.dim() {
                return Err(Error::Truncation {
                    label: mode.label.clone(),
                    reason: format!("level {d} exceeds dimension {}", mode.dim()),
                });
            }
            idx += d * self.strides[m];
        }
        Ok(idx)
    }

    /// Concatenation `self ⊗ other`; the cap of `self` applies.
    pub fn concat(&self, other: &ModeSpec) -> Result<ModeSpec> {
        let mut modes = self.modes.clone();
        modes.extend(other.modes.iter().cloned());
        ModeSpec::with_cap(modes, self.cap)
    }

    /// Sub-spec over `labels` in the given order, plus the positions of those
    /// modes in `self`.
    pub fn select(&self, labels: &[&str]) -> Result<(ModeSpec, Vec<usize>)> {
        let mut pos = Vec::with_capacity(labels.len());
        for l in labels {
            let i = self.index_of(l)?;
            if pos.contains(&i) {
                return Err(Error::LabelCollision(l.to_string()));
            }
            pos.push(i);
        }
        let modes = pos.iter().map(|&i| self.modes[i].clone()).collect();
        Ok((ModeSpec::with_cap(modes, self.cap)?, pos))
    }

    pub fn with_label_replaced(&self, from: &str, to: &str) -> Result<ModeSpec> {
        let i = self.index_of(from)?;
        if from != to && self.contains(to) {
            return Err(Error::LabelCollision(to.to_string()));
        }
        let mut modes = self.modes.clone();
        modes[i].label = to.to_string();
        ModeSpec::with_cap(modes, self.cap)
    }

    /// Human-readable basis label, e.g. `c=1,d=0,m=g`.
    pub fn basis_label(&self, index: usize) -> String {
        self.modes
            .iter()
            .enumerate()
            .map(|(m, mode)| {
                let d = self.digit(index, m);
                match mode.kind {
                    ModeKind::Photon { .. } => format!("{}={}", mode.label, d),
                    ModeKind::Matter => {
                        format!("{}={}", mode.label, if d == 0 { 'g' } else { 'e' })
                    }
                }
            })
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Index obtained by annihilating one photon in `mode`, with the bosonic
    /// factor sqrt(n).
    #[inline]
    pub(crate) fn lower(&self, index: usize, mode: usize) -> Option<(usize, f64)> {
        let n = self.digit(index, mode);
        if n == 0 {
            None
        } else {
            Some((index - self.strides[mode], (n as f64).sqrt()))
        }
    }

    /// Applies a sequence of annihilators to a basis state.
    #[inline]
    pub(crate) fn lower_many(&self, index: usize, modes: &[usize]) -> Option<(usize, f64)> {
        let mut idx = index;
        let mut coeff = 1.0;
        for &m in modes {
            let (i, c) = self.lower(idx, m)?;
            idx = i;
            coeff *= c;
        }
        Some((idx, coeff))
    }

    pub(crate) fn photon_indices(&self, labels: &[&str]) -> Result<Vec<usize>> {
        labels
            .iter()
            .map(|l| self.photon_index(l).map(|(i, _)| i))
            .collect()
    }

    /// Map from full index to (kept index, traced index) for a bipartition.
    pub(crate) fn split_indices(&self, keep: &[usize]) -> Vec<(usize, usize)> {
        let rest: Vec<usize> = (0..self.modes.len()).filter(|m| !keep.contains(m)).collect();
        (0..self.dim)
            .map(|idx| {
                let mut k = 0;
                for &m in keep {
                    k = k * self.modes[m].dim() + self.digit(idx, m);
                }
                let mut r = 0;
                for &m in &rest {
                    r = r * self.modes[m].dim() + self.digit(idx, m);
                }
                (k, r)
            })
            .collect()
    }

    pub(crate) fn fresh_label(&self, base: &str) -> String {
        let mut label = base.to_string();
        let mut k = 0;
        while self.contains(&label) {
            k += 1;
            label = format!("{base}{k}");
        }
        label
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_radix_round_trip() {
        let spec = ModeSpec::new(vec![Mode::photon("a", 2), Mode::matter("m"), Mode::photon("b", 1)])
            .unwrap();
        assert_eq!(spec.dim(), 12);
        for idx in 0..spec.dim() {
            assert_eq!(spec.index(&spec.digits(idx)).unwrap(), idx);
        }
        assert_eq!(spec.index(&[1, 0, 1]).unwrap(), 5);
        assert_eq!(spec.basis_label(5), "a=1,m=g,b=1");
    }

    #[test]
    fn rejects_duplicates_and_cap() {
        let dup = ModeSpec::new(vec![Mode::photon("a", 2), Mode::matter("a")]);
        assert_eq!(dup.unwrap_err(), Error::LabelCollision("a".into()));
        let big = ModeSpec::with_cap((0..5).map(|i| Mode::photon(format!("m{i}"), 4)).collect(), 1000);
        assert!(matches!(big, Err(Error::DimensionCap { .. })));
        let bad = ModeSpec::new(vec![Mode::photon("a", 0)]);
        assert!(matches!(bad, Err(Error::Truncation { .. })));
    }
}
