//! Asymmetric Mach-Zehnder interferometer (AMZI) acting on the emitter's
//! temporal modes: output states, port rates and fringe visibility.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::emitter::{matter_label, steady_state, EmitterParams};
use crate::error::{Error, Result};
use crate::fock::{DensityState, Mode, ModeSpec, ModeState};

/// Agreement required between the closed-form and pipeline output states.
pub const STATE_TOL: f64 = 1e-12;

/// Photon-mode labels of the two input time bins in pipeline states.
pub const EARLY: &str = "early";
pub const LATE: &str = "late";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Port {
    C,
    D,
}

impl Port {
    pub fn as_str(self) -> &'static str {
        match self {
            Port::C => "c",
            Port::D => "d",
        }
    }
}

/// How the entrance splitter of the AMZI is accounted for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntranceConvention {
    /// Entrance splitter kept as a 3 dB attenuation of each arm:
    /// `c_t = (a_{t-τ} - e^{iφ} a_t)/2`, `d_t = (a_{t-τ} + e^{iφ} a_t)/2`.
    #[serde(rename = "keep-3dB", alias = "keep-3db")]
    Keep3dB,
    /// Entrance splitter dropped: `c_t = (a_{t-τ} - e^{iφ} a_t)/√2`,
    /// `d_t = (a_{t-τ} + e^{iφ} a_t)/√2`.
    Drop,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AmziConfig {
    /// Differential delay in seconds.
    pub tau: f64,
    pub phi: f64,
    pub entrance_loss_convention: EntranceConvention,
    pub port_c: String,
    pub port_d: String,
    /// Required margin in `T1 << tau << TL`.
    pub validity_ratio: f64,
}

impl Default for AmziConfig {
    fn default() -> Self {
        AmziConfig {
            tau: 4.92e-9,
            phi: 0.0,
            entrance_loss_convention: EntranceConvention::Drop,
            port_c: "c".into(),
            port_d: "d".into(),
            validity_ratio: 10.0,
        }
    }
}

impl AmziConfig {
    pub fn with_phase(phi: f64) -> Self {
        AmziConfig {
            phi,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "tau",
                reason: format!("{} must be positive", self.tau),
            });
        }
        if !self.phi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phi",
                reason: "must be finite".into(),
            });
        }
        if self.port_c == self.port_d {
            return Err(Error::LabelCollision(self.port_c.clone()));
        }
        Ok(())
    }

    /// Warnings when `T1 << tau << TL` fails by less than `validity_ratio`.
    pub fn warnings(&self, params: &EmitterParams) -> Vec<String> {
        let mut out = Vec::new();
        if self.tau < self.validity_ratio * params.t1 {
            out.push(format!(
                "tau = {:e} s is not much longer than T1 = {:e} s",
                self.tau, params.t1
            ));
        }
        if self.tau * self.validity_ratio > params.tl {
            out.push(format!(
                "tau = {:e} s is not much shorter than TL = {:e} s",
                self.tau, params.tl
            ));
        }
        out
    }

    pub fn port_label(&self, port: Port) -> &str {
        match port {
            Port::C => &self.port_c,
            Port::D => &self.port_d,
        }
    }

    /// Fringe period in frequency, `1/tau`.
    pub fn fringe_period(&self) -> f64 {
        1.0 / self.tau
    }

    /// Power transfer of `port` at detuning `f` from the carrier.
    pub fn transfer(&self, port: Port, f: f64) -> f64 {
        let c = (2.0 * PI * f * self.tau + self.phi).cos();
        match port {
            Port::D => 0.5 * (1.0 + c),
            Port::C => 0.5 * (1.0 - c),
        }
    }
}

fn check_no_two_photon(params: &EmitterParams) -> Result<()> {
    if params.p2 != 0.0 {
        return Err(Error::TwoPhotonPopulation(params.p2));
    }
    Ok(())
}

/// Output state at ports (c, d) with matter modes of the early and late bins,
/// written term by term. Drop convention, indistinguishable photons.
pub fn amzi_output_closed_form(params: &EmitterParams, cfg: &AmziConfig) -> Result<ModeState> {
    check_no_two_photon(params)?;
    cfg.validate()?;
    let spec = output_spec(cfg)?;
    let (p0, p1) = (params.p0, params.p1);
    let e = C64::from_polar(1.0, cfg.phi);
    let one = C64::new(1.0, 0.0);
    let a = C64::new((p0 * p1 / 2.0).sqrt(), 0.0);
    let b = C64::new(p1 / (2.0 * 2f64.sqrt()), 0.0);
    let r2 = C64::new(FRAC_1_SQRT_2, 0.0);
    // digits: [n_c, n_d, m_early, m_late]
    let terms: Vec<([usize; 4], C64)> = vec![
        ([0, 0, 0, 0], C64::new(p0, 0.0)),
        ([0, 0, 0, 1], a),
        ([0, 0, 1, 0], a),
        ([0, 0, 1, 1], C64::new(p1 / 2.0, 0.0)),
        ([1, 0, 0, 0], a * (one - e) * r2),
        ([1, 0, 0, 1], b),
        ([1, 0, 1, 0], -e * b),
        ([2, 0, 0, 0], -e * b),
        ([0, 1, 0, 0], a * (one + e) * r2),
        ([0, 1, 0, 1], b),
        ([0, 1, 1, 0], e * b),
        ([0, 2, 0, 0], e * b),
    ];
    let refs: Vec<(&[usize], C64)> = terms.iter().map(|(d, c)| (&d[..], *c)).collect();
    ModeState::from_terms(spec, &refs)
}

fn output_spec(cfg: &AmziConfig) -> Result<ModeSpec> {
    ModeSpec::new(vec![
        Mode::photon(cfg.port_c.as_str(), 2),
        Mode::photon(cfg.port_d.as_str(), 2),
        Mode::matter(matter_label(EARLY)),
        Mode::matter(matter_label(LATE)),
    ])
}

/// Same output state built by the engine: tensor of two steady states,
/// phase on the late bin, 50:50 splitter.
pub fn amzi_output_pipeline(params: &EmitterParams, cfg: &AmziConfig) -> Result<ModeState> {
    check_no_two_photon(params)?;
    cfg.validate()?;
    let early = steady_state(params, EARLY, 2, 0.0)?;
    let late = steady_state(params, LATE, 2, 0.0)?;
    let joint = ModeState::tensor(&[&early, &late])?
        .apply_phase(LATE, cfg.phi)?
        .apply_beam_splitter(EARLY, LATE, 0.5, 0.0)?;
    let em = matter_label(EARLY);
    let lm = matter_label(LATE);
    joint
        .relabel(EARLY, "__d")?
        .relabel(LATE, &cfg.port_c)?
        .relabel("__d", &cfg.port_d)?
        .reorder(&[&cfg.port_c, &cfg.port_d, &em, &lm])
}

/// Output state in the drop convention, checked against the engine pipeline.
pub fn amzi_output_state(params: &EmitterParams, cfg: &AmziConfig) -> Result<ModeState> {
    if cfg.entrance_loss_convention != EntranceConvention::Drop {
        return Err(Error::ConventionMismatch(
            "the closed-form output state drops the entrance splitter; use amzi_output_density for keep-3dB".into(),
        ));
    }
    let closed = amzi_output_closed_form(params, cfg)?;
    let pipeline = amzi_output_pipeline(params, cfg)?;
    let diff = closed
        .amplitudes()
        .iter()
        .zip(pipeline.amplitudes())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if diff > STATE_TOL {
        return Err(Error::ConventionMismatch(format!(
            "closed form and pipeline differ by {diff:e}"
        )));
    }
    Ok(closed)
}

/// Output state in either convention. Keep-3dB attenuates each input bin by
/// half before recombination, which leaves a mixed state.
pub fn amzi_output_density(params: &EmitterParams, cfg: &AmziConfig) -> Result<DensityState> {
    match cfg.entrance_loss_convention {
        EntranceConvention::Drop => Ok(amzi_output_pipeline(params, cfg)?.to_density()),
        EntranceConvention::Keep3dB => {
            check_no_two_photon(params)?;
            cfg.validate()?;
            let early = steady_state(params, EARLY, 2, 0.0)?;
            let late = steady_state(params, LATE, 2, 0.0)?;
            let joint = ModeState::tensor(&[&early, &late])?
                .apply_loss(EARLY, 0.5)?
                .apply_loss(LATE, 0.5)?
                .apply_phase(LATE, cfg.phi)?
                .apply_beam_splitter(EARLY, LATE, 0.5, 0.0)?;
            let keep = [EARLY, LATE, &matter_label(EARLY), &matter_label(LATE)];
            let r = joint.partial_trace(&keep)?;
            // rename by rebuilding with port labels in c, d order
            let spec = ModeSpec::new(vec![
                Mode::photon(cfg.port_d.as_str(), 2),
                Mode::photon(cfg.port_c.as_str(), 2),
                Mode::matter(matter_label(EARLY)),
                Mode::matter(matter_label(LATE)),
            ])?;
            let relabeled = DensityState::new(spec, r.matrix().clone())?;
            relabeled.partial_trace(&[&cfg.port_c, &cfg.port_d, &matter_label(EARLY), &matter_label(LATE)])
        }
    }
}

/// `√M · p0`.
pub fn fringe_visibility(params: &EmitterParams) -> f64 {
    params.m.sqrt() * params.p0
}

/// Mean photon number per time bin at ports (c, d) for the steady state,
/// which carries `p1/2` photons per bin.
pub fn port_rates(params: &EmitterParams, cfg: &AmziConfig) -> (f64, f64) {
    let v = fringe_visibility(params) * cfg.phi.cos();
    let scale = match cfg.entrance_loss_convention {
        EntranceConvention::Drop => 0.5,
        EntranceConvention::Keep3dB => 0.25,
    };
    (scale * params.p1 * (1.0 - v), scale * params.p1 * (1.0 + v))
}

/// Fringe visibility from two-channel count series. Each bin is normalized
/// by its two-channel sum; the visibility of each normalized channel is
/// `(max - min)/(max + min)` and the two are averaged. If one channel never
/// clicks the normalized series carry no information, so the raw fringe of
/// the other channel is used.
pub fn visibility_from_counts(counts_c: &[f64], counts_d: &[f64]) -> Result<f64> {
    if counts_c.is_empty() || counts_d.is_empty() {
        return Err(Error::Empty("count series"));
    }
    if counts_c.len() != counts_d.len() {
        return Err(Error::DimensionMismatch {
            expected: counts_c.len(),
            got: counts_d.len(),
        });
    }
    let fringe = |xs: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        if hi + lo > 0.0 {
            (hi - lo) / (hi + lo)
        } else {
            0.0
        }
    };
    let dead_c = counts_c.iter().all(|&x| x == 0.0);
    let dead_d = counts_d.iter().all(|&x| x == 0.0);
    if dead_c && dead_d {
        return Err(Error::ZeroCountBin(0));
    }
    if dead_c {
        return Ok(fringe(&mut counts_d.iter().copied()));
    }
    if dead_d {
        return Ok(fringe(&mut counts_c.iter().copied()));
    }
    let mut norm_c = Vec::with_capacity(counts_c.len());
    for (i, (&c, &d)) in counts_c.iter().zip(counts_d).enumerate() {
        let total = c + d;
        if total <= 0.0 {
            return Err(Error::ZeroCountBin(i));
        }
        norm_c.push(c / total);
    }
    let vc = fringe(&mut norm_c.iter().copied());
    let vd = fringe(&mut norm_c.iter().map(|x| 1.0 - x));
    Ok(0.5 * (vc + vd))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p1: f64) -> EmitterParams {
        let mut p = EmitterParams::with_populations(1.0 - p1, p1, 0.0);
        p.m = 1.0;
        p
    }

    #[test]
    fn constructive_port_at_zero_phase() {
        let s = amzi_output_state(&params(0.3), &AmziConfig::with_phase(0.0)).unwrap();
        assert!(s.amplitude(&[1, 0, 0, 0]).unwrap().norm() < 1e-15);
    }

    #[test]
    fn destructive_port_at_pi() {
        let p = params(0.4);
        let s = amzi_output_state(&p, &AmziConfig::with_phase(PI)).unwrap();
        assert!(s.amplitude(&[0, 1, 0, 0]).unwrap().norm() < 1e-15);
        for phi in [0.0, 1.0, 2.5] {
            let s = amzi_output_state(&p, &AmziConfig::with_phase(phi)).unwrap();
            let c2 = s.amplitude(&[2, 0, 0, 0]).unwrap().norm();
            assert!((c2 - 0.4 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_two_photon_and_keep_convention() {
        let p = EmitterParams::with_populations(0.5, 0.49, 0.01);
        assert!(matches!(
            amzi_output_state(&p, &AmziConfig::default()),
            Err(Error::TwoPhotonPopulation(_))
        ));
        let cfg = AmziConfig {
            entrance_loss_convention: EntranceConvention::Keep3dB,
            ..Default::default()
        };
        assert!(matches!(
            amzi_output_state(&params(0.3), &cfg),
            Err(Error::ConventionMismatch(_))
        ));
    }

    #[test]
    fn port_flux_matches_correlators() {
        let p = params(0.35);
        for conv in [EntranceConvention::Drop, EntranceConvention::Keep3dB] {
            for phi in [0.0, 0.7, PI / 2.0, 2.9] {
                let cfg = AmziConfig {
                    phi,
                    entrance_loss_convention: conv,
                    ..Default::default()
                };
                let rho = amzi_output_density(&p, &cfg).unwrap();
                let nc = rho.correlator(&["c"], &["c"]).unwrap().re;
                let nd = rho.correlator(&["d"], &["d"]).unwrap().re;
                let (rc, rd) = port_rates(&p, &cfg);
                assert!((nc - rc).abs() < 1e-12, "{conv:?} {phi}");
                assert!((nd - rd).abs() < 1e-12, "{conv:?} {phi}");
            }
        }
    }

    #[test]
    fn visibility_values() {
        let mut p = params(0.0);
        p.m = 0.89;
        assert!((fringe_visibility(&p) - 0.89f64.sqrt()).abs() < 1e-15);
        assert_eq!(visibility_from_counts(&[5.0; 10], &[5.0; 10]).unwrap(), 0.0);
        assert!(visibility_from_counts(&[], &[]).is_err());
        assert_eq!(
            visibility_from_counts(&[1.0, 0.0], &[1.0, 0.0]).unwrap_err(),
            Error::ZeroCountBin(1)
        );
    }

    #[test]
    fn transfer_and_fringe_period() {
        let cfg = AmziConfig::with_phase(PI);
        assert!(cfg.transfer(Port::D, 0.0).abs() < 1e-15);
        assert!((cfg.fringe_period() - 203.252e6).abs() < 1e3);
        for f in [0.0, 1e7, 3.3e8] {
            assert!((cfg.transfer(Port::C, f) + cfg.transfer(Port::D, f) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn validity_warnings() {
        let p = EmitterParams::default();
        assert!(AmziConfig::default().warnings(&p).is_empty());
        let short = AmziConfig {
            tau: 100e-12,
            ..Default::default()
        };
        assert_eq!(short.warnings(&p).len(), 1);
    }
}
