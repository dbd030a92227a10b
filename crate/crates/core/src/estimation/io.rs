//! CSV inputs for the fitters. Lines starting with `#` are skipped; error
//! rows are 1-based file line numbers.

use std::io::Read;

use serde::Deserialize;

use super::coincidence_fit::CoincidencePoint;
use crate::correlations::DegeneracyClass;
use crate::error::{Error, Result};
use crate::table::read_rows;

#[derive(Deserialize)]
struct CoincidenceRow {
    #[serde(alias = "phi")]
    phi_radians: f64,
    class: String,
    value: f64,
    #[serde(default)]
    error: Option<f64>,
    /// Raw coincidence count; gives a Poisson error when `error` is empty.
    #[serde(default)]
    count: Option<f64>,
}

/// Reads `phi_radians,class,value,error[,count]` rows. `nondegenerate`
/// rows are kept; a missing error falls back to `value/√count`.
pub fn read_coincidence_csv<R: Read>(r: R) -> Result<Vec<CoincidencePoint>> {
    let mut out = Vec::new();
    for (line, row) in read_rows::<CoincidenceRow, _>(r)? {
        let at = |reason: String| Error::Parse { row: line, reason };
        let class: DegeneracyClass = row.class.parse().map_err(|e: Error| at(e.to_string()))?;
        let error = match (row.error, row.count) {
            (Some(e), _) => e,
            (None, Some(n)) if n > 0.0 => row.value.abs() / n.sqrt(),
            _ => return Err(at("no error and no positive count".into())),
        };
        if !(error > 0.0) || !row.value.is_finite() || !row.phi_radians.is_finite() {
            return Err(at(format!("invalid value {} or error {error}", row.value)));
        }
        out.push(CoincidencePoint {
            phi: row.phi_radians,
            class,
            value: row.value,
            error,
        });
    }
    if out.is_empty() {
        return Err(Error::Empty("coincidence table"));
    }
    Ok(out)
}

#[derive(Deserialize)]
struct VisibilityRow {
    nbar: f64,
    visibility: f64,
}

pub fn read_visibility_csv<R: Read>(r: R) -> Result<Vec<(f64, f64)>> {
    let out: Vec<(f64, f64)> = read_rows::<VisibilityRow, _>(r)?
        .into_iter()
        .map(|(_, row)| (row.nbar, row.visibility))
        .collect();
    if out.is_empty() {
        return Err(Error::Empty("visibility table"));
    }
    Ok(out)
}
