use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::trace::{write_schema_line, JSON_SCHEMA_VERSION};
use crate::emitter::EmitterParams;
use crate::error::{Error, Result};
use crate::interferometry::{AmziConfig, Port};

pub const MIN_POINTS_PER_FRINGE: f64 = 8.0;
pub const MIN_PERIODS: f64 = 3.0;

/// First-order coherence at delay `tau_delay` (seconds):
/// `|g1| = p1 e^{-τ/T2} + s p0 e^{-τ/TL}` with `s = √M` when
/// `include_indistinguishability`, carrier phase `e^{-i 2π ν τ}`.
pub fn g1_model(tau_delay: f64, params: &EmitterParams, include_indistinguishability: bool) -> Result<C64> {
    if !(tau_delay >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "tau_delay",
            reason: format!("{tau_delay} is negative"),
        });
    }
    let s = if include_indistinguishability { params.m.sqrt() } else { 1.0 };
    let mag = params.p1 * (-tau_delay / params.t2).exp() + s * params.p0 * (-tau_delay / params.tl).exp();
    // reduce the optical phase in cycles before scaling to radians
    let cycles = (params.nu * tau_delay).fract();
    Ok(C64::from_polar(mag, -2.0 * PI * cycles))
}

/// Unit-area Lorentzian of full width `fwhm` centred at zero.
pub fn lorentzian(f: f64, fwhm: f64) -> f64 {
    let h = 0.5 * fwhm;
    h / (PI * (f * f + h * h))
}

/// Symmetric grid of `n` points on `[-half_span, half_span]`.
pub fn frequency_grid(half_span: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|i| -half_span + 2.0 * half_span * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumComponent {
    pub name: String,
    /// Integrated weight of this component in the trace.
    pub weight: f64,
    /// Intrinsic FWHM in Hz.
    pub fwhm: f64,
    /// FWHM after instrument convolution.
    pub effective_fwhm: f64,
    pub density: Vec<f64>,
}

/// Spectral density against detuning from the carrier (Hz).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTrace {
    pub schema_version: u32,
    pub frequencies: Vec<f64>,
    pub density: Vec<f64>,
    pub components: Vec<SpectrumComponent>,
    /// Lorentzian instrument resolution, FWHM in Hz.
    pub instrument_fwhm: Option<f64>,
    pub port: Option<Port>,
    pub tau: Option<f64>,
    pub phi: Option<f64>,
}

impl SpectrumTrace {
    pub fn component(&self, name: &str) -> Option<&SpectrumComponent> {
        self.components.iter().find(|c| c.name == name)
    }

    /// Sum of component weights.
    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    /// Trapezoidal integral of the density over the grid.
    pub fn integrate(&self) -> f64 {
        trapezoid(&self.frequencies, &self.density)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write_schema_line(&mut w, "spectrum")?;
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["frequency_hz".to_string(), "density".to_string()];
        header.extend(self.components.iter().map(|c| c.name.clone()));
        wtr.write_record(&header)?;
        for (i, f) in self.frequencies.iter().enumerate() {
            let mut row = vec![format!("{f:e}"), format!("{:e}", self.density[i])];
            row.extend(self.components.iter().map(|c| format!("{:e}", c.density[i])));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spectrum serializes")
    }
}

pub(crate) fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Two Lorentzians: broadband (weight `p1`, FWHM `1/(π T2)`) and laser-like
/// (weight `p0`, or `√M p0`, FWHM `1/(π TL)`). An instrument Lorentzian adds
/// its width to both.
pub fn spectrum_analytic(
    params: &EmitterParams,
    frequencies: &[f64],
    instrument_fwhm: Option<f64>,
    include_indistinguishability: bool,
) -> Result<SpectrumTrace> {
    if frequencies.is_empty() {
        return Err(Error::Empty("frequency grid"));
    }
    if let Some(w) = instrument_fwhm {
        if !(w >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "instrument_fwhm",
                reason: format!("{w} is negative"),
            });
        }
    }
    let extra = instrument_fwhm.unwrap_or(0.0);
    let laser_weight = if include_indistinguishability { params.m.sqrt() * params.p0 } else { params.p0 };
    let parts = [
        ("laser_like", laser_weight, 1.0 / (PI * params.tl)),
        ("broadband", params.p1, 1.0 / (PI * params.t2)),
    ];
    let components: Vec<SpectrumComponent> = parts
        .iter()
        .map(|&(name, weight, fwhm)| {
            let eff = fwhm + extra;
            SpectrumComponent {
                name: name.into(),
                weight,
                fwhm,
                effective_fwhm: eff,
                density: frequencies.iter().map(|&f| weight * lorentzian(f, eff)).collect(),
            }
        })
        .collect();
    let density = (0..frequencies.len())
        .map(|i| components.iter().map(|c| c.density[i]).sum())
        .collect();
    Ok(SpectrumTrace {
        schema_version: JSON_SCHEMA_VERSION,
        frequencies: frequencies.to_vec(),
        density,
        components,
        instrument_fwhm,
        port: None,
        tau: None,
        phi: None,
    })
}

/// Spectrum transmitted to one AMZI port. Component weights become the
/// transmitted fractions `w (1 ± e^{-π Γ τ} cos φ)/2` of each Lorentzian.
pub fn filtered_spectrum(spec: &SpectrumTrace, cfg: &AmziConfig, port: Port) -> Result<SpectrumTrace> {
    cfg.validate()?;
    let f = &spec.frequencies;
    if f.len() < 2 {
        return Err(Error::GridTooCoarse { points_per_fringe: 0.0 });
    }
    let period = cfg.fringe_period();
    let max_step = f.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    let ppf = period / max_step;
    if ppf < MIN_POINTS_PER_FRINGE {
        return Err(Error::GridTooCoarse { points_per_fringe: ppf });
    }
    let span = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - f.iter().cloned().fold(f64::INFINITY, f64::min);
    let periods = span / period;
    if periods < MIN_PERIODS {
        return Err(Error::GridTooNarrow {
            periods,
            required: MIN_PERIODS,
        });
    }
    let t: Vec<f64> = f.iter().map(|&x| cfg.transfer(port, x)).collect();
    let sign = match port {
        Port::D => 1.0,
        Port::C => -1.0,
    };
    let components = spec
        .components
        .iter()
        .map(|c| SpectrumComponent {
            name: c.name.clone(),
            weight: c.weight * 0.5 * (1.0 + sign * (-PI * c.effective_fwhm * cfg.tau).exp() * cfg.phi.cos()),
            fwhm: c.fwhm,
            effective_fwhm: c.effective_fwhm,
            density: c.density.iter().zip(&t).map(|(d, k)| d * k).collect(),
        })
        .collect();
    Ok(SpectrumTrace {
        schema_version: JSON_SCHEMA_VERSION,
        frequencies: f.clone(),
        density: spec.density.iter().zip(&t).map(|(d, k)| d * k).collect(),
        components,
        instrument_fwhm: spec.instrument_fwhm,
        port: Some(port),
        tau: Some(cfg.tau),
        phi: Some(cfg.phi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> EmitterParams {
        EmitterParams::with_populations(0.7, 0.3, 0.0)
    }

    #[test]
    fn g1_limits() {
        let p = params();
        assert!((g1_model(0.0, &p, false).unwrap().norm() - 1.0).abs() < 1e-15);
        let mid = g1_model(4.92e-9, &p, false).unwrap().norm();
        assert!((mid - 0.7).abs() < 0.003);
        assert!(g1_model(100.0 * p.tl, &p, false).unwrap().norm() < 1e-40);
        assert!(g1_model(-1.0, &p, false).is_err());
        let m = g1_model(4.92e-9, &p, true).unwrap().norm();
        assert!((m - 0.7 * 0.89f64.sqrt()).abs() < 0.003);
    }

    #[test]
    fn broadband_width() {
        let s = spectrum_analytic(&params(), &[0.0], None, false).unwrap();
        let bb = s.component("broadband").unwrap();
        assert!((bb.fwhm - 2.3166e9).abs() < 1e6);
        let half = lorentzian(bb.fwhm / 2.0, bb.fwhm) / lorentzian(0.0, bb.fwhm);
        assert!((half - 0.5).abs() < 1e-15);
    }

    #[test]
    fn laser_only_without_broadband() {
        let p = EmitterParams::with_populations(1.0, 0.0, 0.0);
        let s = spectrum_analytic(&p, &frequency_grid(1e6, 11), None, false).unwrap();
        assert!(s.component("broadband").unwrap().density.iter().all(|&d| d == 0.0));
        assert_eq!(s.total_weight(), 1.0);
    }

    #[test]
    fn grid_checks() {
        let cfg = AmziConfig::with_phase(PI);
        let s = spectrum_analytic(&params(), &frequency_grid(1e9, 21), None, false).unwrap();
        assert!(matches!(filtered_spectrum(&s, &cfg, Port::D), Err(Error::GridTooCoarse { .. })));
        let narrow = spectrum_analytic(&params(), &frequency_grid(2e8, 401), None, false).unwrap();
        assert!(matches!(
            filtered_spectrum(&narrow, &cfg, Port::D),
            Err(Error::GridTooNarrow { .. })
        ));
    }

    #[test]
    fn carrier_rejected_at_pi() {
        let cfg = AmziConfig::with_phase(PI);
        let s = spectrum_analytic(&params(), &frequency_grid(2e9, 4001), Some(2e7), false).unwrap();
        let d = filtered_spectrum(&s, &cfg, Port::D).unwrap();
        assert!(d.density[2000] < 1e-30);
        let c = filtered_spectrum(&s, &cfg, Port::C).unwrap();
        for (a, b) in c.components.iter().zip(&d.components) {
            let orig = s.component(&a.name).unwrap().weight;
            assert!((a.weight + b.weight - orig).abs() < 1e-15);
        }
    }

    #[test]
    fn csv_has_schema_line() {
        let s = spectrum_analytic(&params(), &frequency_grid(1e9, 3), None, false).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# rfcoh-csv v1 spectrum\nfrequency_hz,density,laser_like,broadband\n"));
    }
}
