use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::coincidences::{hom_coincidences, DegeneracyClass};
use super::spectrum::g1_model;
use crate::emitter::EmitterParams;
use crate::error::{Error, Result};

/// First line of every CSV artifact is `# rfcoh-csv v1 <kind>`.
pub const CSV_SCHEMA: &str = "rfcoh-csv v1";
pub const JSON_SCHEMA_VERSION: u32 = 1;

pub(crate) fn write_schema_line<W: Write>(w: &mut W, kind: &str) -> Result<()> {
    writeln!(w, "# {CSV_SCHEMA} {kind}")?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    G1,
    G2,
    Coincidence,
}

impl TraceKind {
    fn as_str(self) -> &'static str {
        match self {
            TraceKind::G1 => "g1",
            TraceKind::G2 => "g2",
            TraceKind::Coincidence => "coincidence",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    RawProbability,
    BaselineNormalized,
}

/// A lag in seconds or a degeneracy-class label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Abscissa {
    Lag(f64),
    Class(String),
}

impl fmt::Display for Abscissa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Abscissa::Lag(x) => write!(f, "{x:e}"),
            Abscissa::Class(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTrace {
    pub schema_version: u32,
    pub kind: TraceKind,
    pub normalization: Normalization,
    pub abscissa: Vec<Abscissa>,
    pub values: Vec<f64>,
    /// Imaginary parts, for complex `g1`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub imag: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub errors: Option<Vec<f64>>,
    /// Raw event counts per bin, when the trace comes from data.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub counts: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub baseline: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub baseline_error: Option<f64>,
}

impl CorrelationTrace {
    pub fn new(kind: TraceKind, normalization: Normalization, abscissa: Vec<Abscissa>, values: Vec<f64>) -> Result<Self> {
        if abscissa.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: abscissa.len(),
                got: values.len(),
            });
        }
        if kind != TraceKind::G1 {
            if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
                return Err(Error::InvalidParameter {
                    name: "values",
                    reason: format!("negative or NaN correlation value {v}"),
                });
            }
        }
        Ok(CorrelationTrace {
            schema_version: JSON_SCHEMA_VERSION,
            kind,
            normalization,
            abscissa,
            values,
            imag: None,
            errors: None,
            counts: None,
            baseline: None,
            baseline_error: None,
        })
    }

    pub fn with_errors(mut self, errors: Vec<f64>) -> Result<Self> {
        if errors.len() != self.values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.values.len(),
                got: errors.len(),
            });
        }
        self.errors = Some(errors);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value_at(&self, label: &str) -> Option<f64> {
        self.abscissa
            .iter()
            .position(|a| matches!(a, Abscissa::Class(s) if s == label))
            .map(|i| self.values[i])
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write_schema_line(&mut w, self.kind.as_str())?;
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["abscissa", "value"];
        if self.imag.is_some() {
            header.push("imag");
        }
        if self.errors.is_some() {
            header.push("error");
        }
        if self.counts.is_some() {
            header.push("count");
        }
        wtr.write_record(&header)?;
        for i in 0..self.values.len() {
            let mut row = vec![self.abscissa[i].to_string(), format!("{:e}", self.values[i])];
            for col in [&self.imag, &self.errors, &self.counts].into_iter().flatten() {
                row.push(format!("{:e}", col[i]));
            }
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    /// Complex `g1` on a grid of delays.
    pub fn g1(delays: &[f64], params: &EmitterParams, include_indistinguishability: bool) -> Result<Self> {
        let g: Vec<_> = delays
            .iter()
            .map(|&t| g1_model(t, params, include_indistinguishability))
            .collect::<Result<_>>()?;
        let mut tr = CorrelationTrace::new(
            TraceKind::G1,
            Normalization::BaselineNormalized,
            delays.iter().map(|&t| Abscissa::Lag(t)).collect(),
            g.iter().map(|z| z.re).collect(),
        )?;
        tr.imag = Some(g.iter().map(|z| z.im).collect());
        Ok(tr)
    }

    /// Coincidence probabilities per class at phase `phi`; with `normalize`
    /// they are divided by the baseline.
    pub fn coincidences(phi: f64, params: &EmitterParams, normalize: bool) -> Result<Self> {
        let c = hom_coincidences(phi, params)?;
        let (scale, norm) = if normalize {
            if c.c0 <= 0.0 {
                return Err(Error::ZeroBaseline);
            }
            (1.0 / c.c0, Normalization::BaselineNormalized)
        } else {
            (1.0, Normalization::RawProbability)
        };
        let mut tr = CorrelationTrace::new(
            TraceKind::Coincidence,
            norm,
            vec![
                Abscissa::Class(DegeneracyClass::Nondegenerate.to_string()),
                Abscissa::Class("side(+tau)".into()),
                Abscissa::Class("side(-tau)".into()),
                Abscissa::Class(DegeneracyClass::Zero.to_string()),
            ],
            [c.c0, c.c_side, c.c_side, c.c_zero].iter().map(|v| v * scale).collect(),
        )?;
        tr.baseline = Some(c.c0);
        Ok(tr)
    }
}
