//! Steady-state light-matter states of a driven two-level emitter and the
//! flux-to-population saturation law.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{check_unit_interval, Error, Result};
use crate::fock::{DensityState, Mode, ModeSpec, ModeState};

/// Measured device constants shipped with the crate.
pub const DEVICE_DEFAULTS_JSON: &str = include_str!("../data/device_defaults.json");

/// Tolerance on `p0 + p1 + p2 = 1`.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Relative slack on `T2 <= 2 T1` before a dephasing warning.
pub const T2_SLACK: f64 = 0.05;

/// Emitter and photon-statistics parameters. Times in seconds, `nu` in Hz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmitterParams {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    /// Mean incident photons per `T1`.
    pub nbar: f64,
    /// Saturation coefficient `x = 2 eta_ab`.
    pub x: f64,
    #[serde(rename = "T1")]
    pub t1: f64,
    #[serde(rename = "T2")]
    pub t2: f64,
    #[serde(rename = "TL")]
    pub tl: f64,
    pub nu: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "Mprime")]
    pub m_prime: f64,
    pub no_pure_dephasing: bool,
}

#[derive(Deserialize)]
struct BundledParams {
    p0: f64,
    p1: f64,
    p2: f64,
    nbar: f64,
    x: f64,
    #[serde(rename = "T1")]
    t1: f64,
    #[serde(rename = "T2")]
    t2: f64,
    #[serde(rename = "TL")]
    tl: f64,
    nu: f64,
    #[serde(rename = "M")]
    m: f64,
    #[serde(rename = "Mprime")]
    m_prime: f64,
    no_pure_dephasing: bool,
}

impl Default for EmitterParams {
    fn default() -> Self {
        let b: BundledParams = serde_json::from_str(DEVICE_DEFAULTS_JSON).expect("bundled defaults parse");
        EmitterParams {
            p0: b.p0,
            p1: b.p1,
            p2: b.p2,
            nbar: b.nbar,
            x: b.x,
            t1: b.t1,
            t2: b.t2,
            tl: b.tl,
            nu: b.nu,
            m: b.m,
            m_prime: b.m_prime,
            no_pure_dephasing: b.no_pure_dephasing,
        }
    }
}

/// Apparatus constants that no model operation consumes directly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceConstants {
    pub tau: f64,
    pub fpi_fwhm: f64,
    pub detector_jitter: f64,
    pub detector_efficiency: f64,
    pub cavity_linewidth: f64,
    pub cavity_q: f64,
}

impl Default for DeviceConstants {
    fn default() -> Self {
        serde_json::from_str(DEVICE_DEFAULTS_JSON).expect("bundled defaults parse")
    }
}

impl EmitterParams {
    /// Device defaults with the given populations.
    pub fn with_populations(p0: f64, p1: f64, p2: f64) -> Self {
        EmitterParams {
            p0,
            p1,
            p2,
            ..Default::default()
        }
    }

    /// Device defaults with `p1` from the saturation law at flux `nbar`.
    pub fn from_flux(nbar: f64, x: f64) -> Result<Self> {
        let p1 = SaturationModel::new(x)?.p1(nbar)?;
        Ok(EmitterParams {
            p0: 1.0 - p1,
            p1,
            p2: 0.0,
            nbar,
            x,
            ..Default::default()
        })
    }

    /// Scattering efficiency inferred from `x`.
    pub fn eta_ab(&self) -> f64 {
        self.x / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        check_unit_interval("p0", self.p0)?;
        check_unit_interval("p1", self.p1)?;
        check_unit_interval("p2", self.p2)?;
        check_unit_interval("M", self.m)?;
        check_unit_interval("Mprime", self.m_prime)?;
        let sum = self.p0 + self.p1 + self.p2;
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidParameter {
                name: "p0+p1+p2",
                reason: format!("sums to {sum}"),
            });
        }
        for (name, v) in [("T1", self.t1), ("T2", self.t2), ("TL", self.tl)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{v} must be positive"),
                });
            }
        }
        if self.nbar < 0.0 || self.nbar.is_nan() {
            return Err(Error::InvalidParameter {
                name: "nbar",
                reason: format!("{} is negative", self.nbar),
            });
        }
        if !(self.x > 0.0) {
            return Err(Error::InvalidParameter {
                name: "x",
                reason: format!("{} must be positive", self.x),
            });
        }
        for w in self.warnings() {
            log::warn!("{w}");
        }
        Ok(())
    }

    /// Model-validity warnings that do not prevent evaluation.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.no_pure_dephasing && self.t2 > 2.0 * self.t1 * (1.0 + T2_SLACK) {
            out.push(format!(
                "T2 = {:e} s exceeds 2 T1 = {:e} s; the saturation law assumes no pure dephasing",
                self.t2,
                2.0 * self.t1
            ));
        }
        if self.no_pure_dephasing && self.t2 < 2.0 * self.t1 * (1.0 - T2_SLACK) {
            out.push(format!(
                "T2 = {:e} s is below 2 T1 = {:e} s: pure dephasing present, saturation law is approximate",
                self.t2,
                2.0 * self.t1
            ));
        }
        if self.p2 > 0.0 && self.p2 >= self.p1 * self.p1 / 2.0 {
            out.push(format!(
                "p2 = {:e} is not small against p1^2/2 = {:e}",
                self.p2,
                self.p1 * self.p1 / 2.0
            ));
        }
        out
    }

    /// Copy with populations rescaled to sum to one.
    pub fn normalized(&self) -> Result<Self> {
        let sum = self.p0 + self.p1 + self.p2;
        if !(sum > 0.0) {
            return Err(Error::InvalidParameter {
                name: "p0+p1+p2",
                reason: format!("sums to {sum}"),
            });
        }
        Ok(EmitterParams {
            p0: self.p0 / sum,
            p1: self.p1 / sum,
            p2: self.p2 / sum,
            ..self.clone()
        })
    }
}

/// `p1 = x nbar / (1 + x nbar)` with `x = 2 eta_ab`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturationModel {
    pub x: f64,
}

impl SaturationModel {
    pub fn new(x: f64) -> Result<Self> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "x",
                reason: format!("{x} must be positive"),
            });
        }
        Ok(SaturationModel { x })
    }

    pub fn from_eta_ab(eta_ab: f64) -> Result<Self> {
        if !(eta_ab > 0.0 && eta_ab <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "eta_ab",
                reason: format!("{eta_ab} not in (0, 1]"),
            });
        }
        Self::new(2.0 * eta_ab)
    }

    pub fn eta_ab(&self) -> f64 {
        self.x / 2.0
    }

    pub fn p1(&self, nbar: f64) -> Result<f64> {
        if nbar < 0.0 || nbar.is_nan() {
            return Err(Error::InvalidParameter {
                name: "nbar",
                reason: format!("{nbar} is negative"),
            });
        }
        if nbar.is_infinite() {
            return Ok(1.0);
        }
        let s = self.x * nbar;
        Ok(s / (1.0 + s))
    }

    /// Inverse of [`Self::p1`].
    pub fn nbar(&self, p1: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p1) {
            return Err(Error::InvalidParameter {
                name: "p1",
                reason: format!("{p1} not in [0, 1)"),
            });
        }
        Ok(p1 / (self.x * (1.0 - p1)))
    }
}

/// Saturation law in terms of the scattering efficiency.
pub fn saturation_p1(nbar: f64, eta_ab: f64) -> Result<f64> {
    SaturationModel::from_eta_ab(eta_ab)?.p1(nbar)
}

/// Label of the matter mode paired with photon mode `time_label`.
pub fn matter_label(time_label: &str) -> String {
    format!("{time_label}.m")
}

/// `√p0|0,g> + e^{iθ}√(p1/2)(|0,e> + |1,g>)` on modes `[time_label, time_label.m]`.
/// `carrier_phase` is the accumulated laser phase `θ` of this time bin.
pub fn steady_state(params: &EmitterParams, time_label: &str, n_max: usize, carrier_phase: f64) -> Result<ModeState> {
    if params.p2 != 0.0 {
        return Err(Error::TwoPhotonPopulation(params.p2));
    }
    check_unit_interval("p1", params.p1)?;
    let p0 = 1.0 - params.p1;
    if (params.p0 - p0).abs() > SIMPLEX_TOL {
        return Err(Error::InvalidParameter {
            name: "p0+p1",
            reason: format!("sums to {}", params.p0 + params.p1),
        });
    }
    let spec = ModeSpec::new(vec![Mode::photon(time_label, n_max), Mode::matter(matter_label(time_label))])?;
    let half = C64::from_polar((params.p1 / 2.0).sqrt(), carrier_phase);
    ModeState::from_terms(
        spec,
        &[
            (&[0, 0], C64::new(p0.sqrt(), 0.0)),
            (&[0, 1], half),
            (&[1, 0], half),
        ],
    )
}

/// `√p0|0> + √p1|1> + √p2|2>` on one photon mode.
pub fn photon_pure_state(p0: f64, p1: f64, p2: f64, time_label: &str, n_max: usize) -> Result<ModeState> {
    for (name, v) in [("p0", p0), ("p1", p1), ("p2", p2)] {
        check_unit_interval(name, v)?;
    }
    if p2 > 0.0 && n_max < 2 {
        return Err(Error::Truncation {
            label: time_label.to_string(),
            reason: format!("p2 = {p2} needs n_max >= 2"),
        });
    }
    let spec = ModeSpec::new(vec![Mode::photon(time_label, n_max)])?;
    let mut amps = vec![C64::new(0.0, 0.0); n_max + 1];
    amps[0] = C64::new(p0.sqrt(), 0.0);
    amps[1] = C64::new(p1.sqrt(), 0.0);
    if n_max >= 2 {
        amps[2] = C64::new(p2.sqrt(), 0.0);
    }
    ModeState::new(spec, amps)
}

/// Photon state left after tracing the matter mode out of [`steady_state`].
pub fn reduced_photon_density(p0: f64, p1: f64, time_label: &str) -> Result<DensityState> {
    check_unit_interval("p0", p0)?;
    check_unit_interval("p1", p1)?;
    if (p0 + p1 - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::InvalidParameter {
            name: "p0+p1",
            reason: format!("sums to {}", p0 + p1),
        });
    }
    let spec = ModeSpec::new(vec![Mode::photon(time_label, 1)])?;
    let off = C64::new((p0 * p1 / 2.0).sqrt(), 0.0);
    let m = nalgebra::DMatrix::from_row_slice(
        2,
        2,
        &[C64::new(p0 + p1 / 2.0, 0.0), off, off, C64::new(p1 / 2.0, 0.0)],
    );
    DensityState::new(spec, m)
}
