//! Shared CSV reading: `#` comment lines, trimmed fields, and rows tagged
//! with their 1-based file line number.

use std::io::Read;

use serde::de::DeserializeOwned;

use crate::error::{Error, Result};

pub(crate) fn read_rows<T: DeserializeOwned, R: Read>(r: R) -> Result<Vec<(usize, T)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(r);
    let headers = rdr.headers()?.clone();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let row = rec.deserialize(Some(&headers)).map_err(|e| Error::Parse {
            row: line,
            reason: e.to_string(),
        })?;
        out.push((line, row));
    }
    Ok(out)
}
