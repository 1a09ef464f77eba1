pub mod besov;
pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod initial;
pub mod integrator;
pub mod snapshot;
pub mod spectral;
pub mod systems;

pub use error::{Error, Result};
