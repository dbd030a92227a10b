use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use rfcoh::emitter::{DeviceConstants, EmitterParams};
use rfcoh::estimation::VisibilityModel;
use rfcoh::interferometry::AmziConfig;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// One JSON document drives every command; command-line flags override it.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub emitter: EmitterParams,
    pub amzi: AmziConfig,
    pub spectrum: SpectrumSection,
    pub sweep: Option<SweepSection>,
    pub sim: Option<SimSection>,
    pub fit: FitSection,
    pub oracle: OracleSection,
    pub output_dir: PathBuf,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            emitter: EmitterParams::default(),
            amzi: AmziConfig::default(),
            spectrum: SpectrumSection::default(),
            sweep: None,
            sim: None,
            fit: FitSection::default(),
            oracle: OracleSection::default(),
            output_dir: PathBuf::from("out"),
            format: Format::Csv,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    /// The grid covers `[-half_span_hz, half_span_hz]`.
    pub half_span_hz: f64,
    pub points: usize,
    /// Scanning Fabry-Perot linewidth convolved into the measured spectra.
    pub instrument_fwhm_hz: f64,
    pub include_indistinguishability: bool,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection {
            half_span_hz: 5e9,
            points: 8001,
            instrument_fwhm_hz: DeviceConstants::default().fpi_fwhm,
            include_indistinguishability: false,
        }
    }
}

/// Populations are renormalized to sum to one.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterSet {
    pub name: String,
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "Mprime")]
    pub m_prime: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub nbar: Vec<f64>,
    pub phi: Vec<f64>,
    /// Sets for the coincidence curves; the emitter populations when empty.
    #[serde(default)]
    pub parameter_sets: Vec<ParameterSet>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    /// Defaults to a quarter of the AMZI delay.
    pub slot_width: Option<f64>,
    pub duration: f64,
    pub seed: u64,
    pub detector_efficiency: f64,
    pub dark_rate: f64,
    pub phase_drift_rate: f64,
    /// One run per phase; the AMZI phase alone when empty.
    pub phases: Vec<f64>,
    /// Defaults to 50 AMZI delays.
    pub max_lag_slots: Option<u64>,
    pub write_click_csv: bool,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            slot_width: None,
            duration: 1e-3,
            seed: 0,
            detector_efficiency: 1.0,
            dark_rate: 0.0,
            phase_drift_rate: 0.0,
            phases: Vec::new(),
            max_lag_slots: None,
            write_click_csv: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    /// Coincidence table; defaults to the one written by `simulate`.
    pub input: Option<PathBuf>,
    /// Defaults to the emitter `M`.
    #[serde(rename = "fixed_M")]
    pub fixed_m: Option<f64>,
    pub visibility_input: Option<PathBuf>,
    pub visibility_model: VisibilityModel,
    pub curve_points: usize,
}

impl Default for FitSection {
    fn default() -> Self {
        FitSection {
            input: None,
            fixed_m: None,
            visibility_input: None,
            visibility_model: VisibilityModel::Saturation,
            curve_points: 181,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection {
            samples: 200,
            seed: 0,
            tolerance: 1e-10,
        }
    }
}

/// Values given on the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, ov: &Overrides) -> CliResult<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(out) = &ov.out {
            cfg.output_dir = out.clone();
        }
        if let Some(f) = ov.format {
            cfg.format = f;
        }
        if let Some(seed) = ov.seed {
            cfg.oracle.seed = seed;
            if let Some(sim) = cfg.sim.as_mut() {
                sim.seed = seed;
            }
        }
        // relative input paths resolve against the config file
        if let Some(base) = path.and_then(Path::parent) {
            for p in [&mut cfg.fit.input, &mut cfg.fit.visibility_input].into_iter().flatten() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.emitter.validate()?;
        self.amzi.validate()?;
        if let Some(sweep) = &self.sweep {
            if sweep.nbar.is_empty() || sweep.phi.is_empty() {
                return Err(CliError::Config("sweep grids must be nonempty".into()));
            }
            if sweep.nbar.iter().any(|n| !(*n >= 0.0 && n.is_finite())) {
                return Err(CliError::Config("sweep.nbar entries must be finite and non-negative".into()));
            }
            if sweep.phi.iter().any(|p| !p.is_finite()) {
                return Err(CliError::Config("sweep.phi entries must be finite".into()));
            }
        }
        for p in [&self.fit.input, &self.fit.visibility_input].into_iter().flatten() {
            if !p.exists() {
                return Err(CliError::Config(format!("referenced file {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    /// SHA-256 of the effective config with the output directory cleared.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let text = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

impl ParameterSet {
    pub fn to_params(&self) -> CliResult<EmitterParams> {
        let total = self.p0 + self.p1 + self.p2;
        if !(total > 0.0) || [self.p0, self.p1, self.p2].iter().any(|p| *p < 0.0) {
            return Err(CliError::Config(format!("parameter set `{}` has invalid populations", self.name)));
        }
        let mut p = EmitterParams::with_populations(self.p0 / total, self.p1 / total, self.p2 / total);
        p.m = self.m;
        p.m_prime = self.m_prime;
        p.validate()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_field_is_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"emiter": {}}"#).is_err());
    }

    #[test]
    fn hash_ignores_output_dir() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.output_dir = "elsewhere".into();
        assert_eq!(a.hash(), b.hash());
        b.amzi.phi = 1.0;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn seed_override_reaches_sim() {
        let mut cfg = RunConfig {
            sim: Some(SimSection::default()),
            ..Default::default()
        };
        cfg.validate().unwrap();
        let path = std::env::temp_dir().join(format!("rfcoh-cfg-{}.json", std::process::id()));
        std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
        let ov = Overrides {
            seed: Some(7),
            ..Default::default()
        };
        cfg = RunConfig::load(Some(&path), &ov).unwrap();
        std::fs::remove_file(&path).unwrap();
        assert_eq!(cfg.sim.unwrap().seed, 7);
        assert_eq!(cfg.oracle.seed, 7);
    }

    #[test]
    fn empty_grid_is_a_config_error() {
        let cfg = RunConfig {
            sweep: Some(SweepSection {
                nbar: vec![],
                phi: vec![0.0],
                parameter_sets: vec![],
            }),
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }
}
