//! Vector-level kernels shared by pure and mixed states.

use num_complex::Complex64 as C64;

use super::spec::ModeSpec;
use crate::error::{Error, Result};

/// Amplitudes below this magnitude are treated as exact zeros when checking
/// for truncation overflow.
const OVERFLOW_EPS: f64 = 1e-13;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Matrix element `<m_a, n_a + n_b - m_a| U |n_a, n_b>` of the two-mode
/// splitter defined on creation operators by
///
/// ```text
/// a† -> sqrt(T) a† + sqrt(1-T) b†
/// b† -> e^{iθ} (sqrt(1-T) a† - sqrt(T) b†)
/// ```
///
/// At `T = 1/2, θ = 0` this is `(a, b) -> ((a+b)/√2, (a-b)/√2)`; at
/// `T = 1, θ = π` it is the identity.
pub fn beam_splitter_amplitude(n_a: usize, n_b: usize, m_a: usize, transmissivity: f64, phase: f64) -> C64 {
    let n = n_a + n_b;
    if m_a > n {
        return C64::new(0.0, 0.0);
    }
    let m_b = n - m_a;
    let st = transmissivity.sqrt();
    let sr = (1.0 - transmissivity).max(0.0).sqrt();
    let mut sum = 0.0;
    // j photons from a† land in a, k = m_a - j from b† land in a
    for j in 0..=n_a.min(m_a) {
        let k = m_a - j;
        if k > n_b {
            continue;
        }
        let term = binomial(n_a, j)
            * binomial(n_b, k)
            * st.powi(j as i32)
            * sr.powi((n_a - j) as i32)
            * sr.powi(k as i32)
            * (-st).powi((n_b - k) as i32);
        sum += term;
    }
    let norm = (factorial(m_a) * factorial(m_b) / (factorial(n_a) * factorial(n_b))).sqrt();
    C64::from_polar(sum * norm, phase * n_b as f64)
}

pub(crate) fn check_pair(spec: &ModeSpec, a: &str, b: &str) -> Result<(usize, usize, usize)> {
    let (ia, na) = spec.photon_index(a)?;
    let (ib, nb) = spec.photon_index(b)?;
    if ia == ib {
        return Err(Error::LabelCollision(a.to_string()));
    }
    if na != nb {
        return Err(Error::Truncation {
            label: b.to_string(),
            reason: format!("splitter modes need equal truncation ({na} vs {nb})"),
        });
    }
    Ok((ia, ib, na))
}

pub(crate) fn beam_splitter_vec(
    spec: &ModeSpec,
    amps: &[C64],
    (ia, ib, n_max): (usize, usize, usize),
    transmissivity: f64,
    phase: f64,
) -> Result<Vec<C64>> {
    let sa = spec.stride(ia);
    let sb = spec.stride(ib);
    // table[n_a][n_b][m_a]
    let table: Vec<Vec<Vec<C64>>> = (0..=n_max)
        .map(|na| {
            (0..=n_max)
                .map(|nb| {
                    (0..=na + nb)
                        .map(|ma| beam_splitter_amplitude(na, nb, ma, transmissivity, phase))
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut out = vec![C64::new(0.0, 0.0); amps.len()];
    for base in 0..amps.len() {
        if spec.digit(base, ia) != 0 || spec.digit(base, ib) != 0 {
            continue;
        }
        for na in 0..=n_max {
            for nb in 0..=n_max {
                let x = amps[base + na * sa + nb * sb];
                if x.norm() <= OVERFLOW_EPS {
                    continue;
                }
                let n = na + nb;
                for (ma, &c) in table[na][nb].iter().enumerate() {
                    if c.norm() <= 1e-15 {
                        continue;
                    }
                    let mb = n - ma;
                    if ma > n_max || mb > n_max {
                        return Err(Error::TruncationOverflow {
                            a: spec.modes()[ia].label.clone(),
                            b: spec.modes()[ib].label.clone(),
                            n_max,
                        });
                    }
                    out[base + ma * sa + mb * sb] += c * x;
                }
            }
        }
    }
    Ok(out)
}

pub(crate) fn phase_vec(spec: &ModeSpec, amps: &[C64], mode: usize, phi: f64) -> Vec<C64> {
    amps.iter()
        .enumerate()
        .map(|(i, &x)| x * C64::from_polar(1.0, phi * spec.digit(i, mode) as f64))
        .collect()
}

/// Linear combination of products of annihilation operators,
/// `Σ_k c_k a_{l_k1} a_{l_k2} ...`. Annihilators on distinct modes commute,
/// so each product is an unordered multiset of labels.
#[derive(Clone, Debug, Default)]
pub struct LadderPolynomial {
    terms: Vec<(C64, Vec<String>)>,
}

impl LadderPolynomial {
    /// `Σ c_i a_{label_i}`
    pub fn linear(terms: &[(C64, &str)]) -> Self {
        LadderPolynomial {
            terms: terms.iter().map(|(c, l)| (*c, vec![l.to_string()])).collect(),
        }
    }

    pub fn identity() -> Self {
        LadderPolynomial {
            terms: vec![(C64::new(1.0, 0.0), vec![])],
        }
    }

    pub fn terms(&self) -> &[(C64, Vec<String>)] {
        &self.terms
    }

    pub fn scale(&self, c: C64) -> Self {
        LadderPolynomial {
            terms: self.terms.iter().map(|(k, l)| (k * c, l.clone())).collect(),
        }
    }

    pub fn product(&self, other: &LadderPolynomial) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (c1, l1) in &self.terms {
            for (c2, l2) in &other.terms {
                let mut labels = l1.clone();
                labels.extend(l2.iter().cloned());
                terms.push((c1 * c2, labels));
            }
        }
        LadderPolynomial { terms }
    }

    pub(crate) fn apply_vec(&self, spec: &ModeSpec, amps: &[C64]) -> Result<Vec<C64>> {
        let resolved: Vec<(C64, Vec<usize>)> = self
            .terms
            .iter()
            .map(|(c, labels)| {
                let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
                spec.photon_indices(&refs).map(|m| (*c, m))
            })
            .collect::<Result<_>>()?;
        let mut out = vec![C64::new(0.0, 0.0); amps.len()];
        for (i, &x) in amps.iter().enumerate() {
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            for (c, modes) in &resolved {
                if let Some((j, k)) = spec.lower_many(i, modes) {
                    out[j] += c * k * x;
                }
            }
        }
        Ok(out)
    }
}
