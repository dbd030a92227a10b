//! Exact state-vector and density-matrix engine for few-mode truncated Fock
//! spaces with two-level matter modes.

mod density;
mod ops;
mod spec;
mod state;

pub use density::DensityState;
pub use ops::{beam_splitter_amplitude, LadderPolynomial};
pub use spec::{Mode, ModeKind, ModeSpec, DEFAULT_DIM_CAP};
pub use state::{BasisAmplitude, ModeState, NORM_TOL};
