use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::correlations::JSON_SCHEMA_VERSION;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamEstimate {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub schema_version: u32,
    /// `coincidences`, `saturation` or `rabi`.
    pub model: String,
    pub parameters: BTreeMap<String, ParamEstimate>,
    /// Parameters held fixed during the fit.
    pub fixed: BTreeMap<String, f64>,
    /// Gaussian log-likelihood, for likelihood fits.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub log_likelihood: Option<f64>,
    /// Euclidean norm of the (weighted) residual vector.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub starts: usize,
    pub n_points: usize,
}

impl FitResult {
    pub(crate) fn new(model: &str, n_points: usize) -> Self {
        FitResult {
            schema_version: JSON_SCHEMA_VERSION,
            model: model.into(),
            parameters: BTreeMap::new(),
            fixed: BTreeMap::new(),
            log_likelihood: None,
            residual_norm: 0.0,
            converged: false,
            iterations: 0,
            starts: 1,
            n_points,
        }
    }

    pub(crate) fn set(&mut self, name: &str, value: f64, std_error: f64) {
        self.parameters.insert(name.into(), ParamEstimate { value, std_error });
    }

    pub fn get(&self, name: &str) -> Option<ParamEstimate> {
        self.parameters.get(name).copied()
    }

    /// Fitted or fixed value of `name`.
    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).map(|p| p.value).or_else(|| self.fixed.get(name).copied())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit result serializes")
    }
}
