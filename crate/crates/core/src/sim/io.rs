//! Click-stream persistence: 10-byte little-endian records
//! (`u8` port with c = 0 and d = 1, `u64` slot, `u8` multiplicity) and CSV.

use std::io::{ErrorKind, Read, Write};

use super::sampler::ClickRecord;
use crate::correlations::CSV_SCHEMA;
use crate::error::{Error, Result};
use crate::table::read_rows;
use crate::interferometry::Port;

pub const RECORD_BYTES: usize = 10;

pub fn write_clicks_binary<W: Write, I: IntoIterator<Item = ClickRecord>>(mut w: W, clicks: I) -> Result<u64> {
    let mut n = 0;
    for c in clicks {
        let mut buf = [0u8; RECORD_BYTES];
        buf[0] = match c.port {
            Port::C => 0,
            Port::D => 1,
        };
        buf[1..9].copy_from_slice(&c.slot.to_le_bytes());
        buf[9] = c.multiplicity;
        w.write_all(&buf)?;
        n += 1;
    }
    w.flush()?;
    Ok(n)
}

pub fn read_clicks_binary<R: Read>(mut r: R) -> Result<Vec<ClickRecord>> {
    let mut out = Vec::new();
    let mut buf = [0u8; RECORD_BYTES];
    loop {
        let mut filled = 0;
        while filled < RECORD_BYTES {
            match r.read(&mut buf[filled..]) {
                Ok(0) => break,
                Ok(k) => filled += k,
                Err(e) if e.kind() == ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
        if filled == 0 {
            return Ok(out);
        }
        let row = out.len() + 1;
        if filled < RECORD_BYTES {
            return Err(Error::Parse {
                row,
                reason: format!("truncated record ({filled} of {RECORD_BYTES} bytes)"),
            });
        }
        let port = match buf[0] {
            0 => Port::C,
            1 => Port::D,
            b => {
                return Err(Error::Parse {
                    row,
                    reason: format!("unknown port byte {b}"),
                })
            }
        };
        let slot = u64::from_le_bytes(buf[1..9].try_into().expect("8 bytes"));
        if buf[9] == 0 {
            return Err(Error::Parse {
                row,
                reason: "multiplicity must be at least 1".into(),
            });
        }
        out.push(ClickRecord {
            port,
            slot,
            multiplicity: buf[9],
        });
    }
}

pub fn write_clicks_csv<W: Write, I: IntoIterator<Item = ClickRecord>>(mut w: W, clicks: I) -> Result<u64> {
    writeln!(w, "# {CSV_SCHEMA} clicks")?;
    let mut wtr = csv::Writer::from_writer(w);
    let mut n = 0;
    for c in clicks {
        wtr.serialize(c)?;
        n += 1;
    }
    wtr.flush()?;
    Ok(n)
}

/// Reads the CSV layout written by [`write_clicks_csv`]; the schema comment
/// line is optional. Errors carry the 1-based file line number.
pub fn read_clicks_csv<R: Read>(r: R) -> Result<Vec<ClickRecord>> {
    let mut out = Vec::new();
    for (line, c) in read_rows::<ClickRecord, _>(r)? {
        if c.multiplicity == 0 {
            return Err(Error::Parse {
                row: line,
                reason: "multiplicity must be at least 1".into(),
            });
        }
        out.push(c);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<ClickRecord> {
        vec![
            ClickRecord {
                port: Port::C,
                slot: 3,
                multiplicity: 1,
            },
            ClickRecord {
                port: Port::D,
                slot: u64::MAX - 1,
                multiplicity: 2,
            },
        ]
    }

    #[test]
    fn binary_round_trip() {
        let mut buf = Vec::new();
        assert_eq!(write_clicks_binary(&mut buf, sample()).unwrap(), 2);
        assert_eq!(buf.len(), 20);
        assert_eq!(buf[0], 0);
        assert_eq!(buf[1], 3);
        assert_eq!(read_clicks_binary(&buf[..]).unwrap(), sample());
        assert!(matches!(read_clicks_binary(&buf[..15]), Err(Error::Parse { row: 2, .. })));
    }

    #[test]
    fn csv_round_trip() {
        let mut buf = Vec::new();
        write_clicks_csv(&mut buf, sample()).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# rfcoh-csv v1 clicks\nport,slot,multiplicity\nc,3,1\n"));
        assert_eq!(read_clicks_csv(&buf[..]).unwrap(), sample());
    }

    #[test]
    fn csv_bad_row_is_named() {
        let text = "port,slot,multiplicity\nc,1,1\nx,2,1\n";
        match read_clicks_csv(text.as_bytes()) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 3),
            other => panic!("{other:?}"),
        }
    }
}
