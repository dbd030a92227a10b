use serde::{Deserialize, Serialize};

use crate::emitter::EmitterParams;
use crate::error::{check_unit_interval, Error, Result};
use crate::interferometry::AmziConfig;

/// Relative tolerance for `tau / slot_width` being an integer.
pub const SLOT_RATIO_TOL: f64 = 1e-9;

/// Monte Carlo run description. Times in seconds, rates in Hz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub params: EmitterParams,
    pub amzi: AmziConfig,
    pub slot_width: f64,
    pub duration: f64,
    pub seed: u64,
    pub detector_efficiency: f64,
    /// Dark-count rate per detector.
    pub dark_rate: f64,
    /// Interferometer phase drift in rad/s.
    pub phase_drift_rate: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        let amzi = AmziConfig::default();
        SimConfig {
            params: EmitterParams::default(),
            slot_width: amzi.tau / 7.0,
            amzi,
            duration: 1e-3,
            seed: 0,
            detector_efficiency: 1.0,
            dark_rate: 0.0,
            phase_drift_rate: 0.0,
        }
    }
}

impl SimConfig {
    /// AMZI delay in slots.
    pub fn delay_slots(&self) -> Result<usize> {
        let ratio = self.amzi.tau / self.slot_width;
        let k = ratio.round();
        if !(k >= 1.0) || ((ratio - k) / k).abs() > SLOT_RATIO_TOL {
            return Err(Error::SimConfig(format!(
                "tau / slot_width = {ratio} is not a positive integer"
            )));
        }
        Ok(k as usize)
    }

    pub fn n_slots(&self) -> Result<u64> {
        let n = (self.duration / self.slot_width).round();
        if !(n >= 1.0) || !n.is_finite() {
            return Err(Error::SimConfig(format!(
                "duration {} s is shorter than one slot of {} s",
                self.duration, self.slot_width
            )));
        }
        Ok(n as u64)
    }

    /// Checks invariants and returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        if !(self.slot_width > 0.0 && self.slot_width.is_finite()) {
            return Err(Error::SimConfig(format!("slot_width {} must be positive", self.slot_width)));
        }
        self.amzi.validate()?;
        self.params.validate().map_err(|e| Error::SimConfig(e.to_string()))?;
        self.delay_slots()?;
        self.n_slots()?;
        check_unit_interval("detector_efficiency", self.detector_efficiency)
            .map_err(|e| Error::SimConfig(e.to_string()))?;
        if !(self.dark_rate >= 0.0 && self.dark_rate.is_finite()) {
            return Err(Error::SimConfig(format!("dark_rate {} must be non-negative", self.dark_rate)));
        }
        if !self.phase_drift_rate.is_finite() {
            return Err(Error::SimConfig("phase_drift_rate must be finite".into()));
        }
        let mut warnings = Vec::new();
        if self.slot_width < 10.0 * self.params.t1 {
            warnings.push(format!(
                "slot_width {:e} s is shorter than 10 T1 = {:e} s; bins are not independent",
                self.slot_width,
                10.0 * self.params.t1
            ));
        }
        if self.params.m != 1.0 || self.params.m_prime != 1.0 {
            warnings.push("M and M' are not sampled; the simulation uses identical photons".into());
        }
        for w in &warnings {
            log::warn!("{w}");
        }
        Ok(warnings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        let c = SimConfig::default();
        assert_eq!(c.delay_slots().unwrap(), 7);
        assert!(c.validate().unwrap().iter().any(|w| w.contains("identical photons")));
    }

    #[test]
    fn rejects_non_integer_delay() {
        let c = SimConfig {
            slot_width: 0.7e-9,
            ..Default::default()
        };
        assert!(matches!(c.validate(), Err(Error::SimConfig(_))));
    }

    #[test]
    fn warns_on_short_slots() {
        let mut c = SimConfig {
            slot_width: 4.92e-9 / 100.0,
            ..Default::default()
        };
        c.params.m = 1.0;
        let w = c.validate().unwrap();
        assert_eq!(w.len(), 1);
        assert!(w[0].contains("10 T1"));
    }

    #[test]
    fn rejects_bad_detector() {
        let c = SimConfig {
            detector_efficiency: 1.5,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = SimConfig {
            dark_rate: -1.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
