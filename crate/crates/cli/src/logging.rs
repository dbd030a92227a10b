//! Logger that prints to stderr and keeps timestamped lines for the run's
//! sidecar log, the only place timestamps are written.

use std::path::Path;
use std::sync::Mutex;

use log::{Level, LevelFilter, Log, Metadata, Record};

pub const SIDECAR: &str = "run.log";

struct Sidecar {
    lines: Mutex<Vec<String>>,
}

static LOGGER: Sidecar = Sidecar {
    lines: Mutex::new(Vec::new()),
};

impl Log for Sidecar {
    fn enabled(&self, m: &Metadata) -> bool {
        m.level() <= Level::Info
    }

    fn log(&self, r: &Record) {
        if !self.enabled(r.metadata()) {
            return;
        }
        if r.level() == Level::Warn {
            eprintln!("{}: {}", r.level().as_str().to_lowercase(), r.args());
        }
        let stamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true);
        if let Ok(mut lines) = self.lines.lock() {
            lines.push(format!("{stamp} {} {}", r.level(), r.args()));
        }
    }

    fn flush(&self) {}
}

pub fn init() {
    if log::set_logger(&LOGGER).is_ok() {
        log::set_max_level(LevelFilter::Info);
    }
}

/// Appends buffered lines to `<dir>/run.log`.
pub fn write_sidecar(dir: &Path) -> std::io::Result<()> {
    use std::io::Write;
    let lines = std::mem::take(&mut *LOGGER.lines.lock().expect("log buffer"));
    if !dir.exists() {
        return Ok(());
    }
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(dir.join(SIDECAR))?;
    for l in lines {
        writeln!(f, "{l}")?;
    }
    Ok(())
}
