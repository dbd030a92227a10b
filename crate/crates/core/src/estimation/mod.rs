//! Parameter recovery from coincidence and visibility data.

mod coincidence_fit;
mod io;
pub mod optimize;
mod result;
mod visibility;

pub use coincidence_fit::{
    forward_points, mle_fit_coincidences, normalized_model, write_coincidence_curve, CoincidencePoint, N_STARTS,
};
pub use io::{read_coincidence_csv, read_visibility_csv};
pub use result::{FitResult, ParamEstimate};
pub use visibility::{
    check_p1_against_flux, fit_visibility_curve, infer_p1_from_g2, saturation_visibility, visibility_at,
    write_visibility_curve, P1Check, RabiModel, VisibilityModel, CONSISTENCY_TOL,
};
