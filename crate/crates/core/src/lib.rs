pub mod correlations;
pub mod emitter;
pub mod error;
pub mod estimation;
pub mod fock;
pub mod interferometry;
pub mod sim;
mod table;

pub use error::{Error, Result};
