//! Closed-form correlation functions and spectra, with an exact
//! truncated-Fock oracle for the two-photon quantities.

mod coincidences;
mod oracle;
mod spectrum;
mod trace;

pub use coincidences::{
    g2_filtered, g2_filtered_ratio, hom_coincidences, hom_side_extended, normalized_coincidences, DegeneracyClass,
    HomCoincidences, DIVERGENCE_FLOOR,
};
pub(crate) use coincidences::hom_raw;
pub use oracle::{oracle_coincidences, oracle_coincidences_with, oracle_g2_filtered, slot_label, OracleInput};
pub use spectrum::{
    filtered_spectrum, frequency_grid, g1_model, lorentzian, spectrum_analytic, SpectrumComponent, SpectrumTrace,
    MIN_PERIODS, MIN_POINTS_PER_FRINGE,
};
pub use trace::{Abscissa, CorrelationTrace, Normalization, TraceKind, CSV_SCHEMA, JSON_SCHEMA_VERSION};
