//! Slot-based Monte Carlo of detector clicks behind the AMZI, with
//! coincidence histogramming.

mod config;
mod histogram;
mod io;
mod sampler;

pub use config::{SimConfig, SLOT_RATIO_TOL};
pub use histogram::{g2_from_trace, histogram, Histogram, HistogramAccumulator, Pairing};
pub use io::{read_clicks_binary, read_clicks_csv, write_clicks_binary, write_clicks_csv, RECORD_BYTES};
pub use sampler::{simulate_clicks, warmup_slots, ClickRecord, ClickStream, SimStats};
