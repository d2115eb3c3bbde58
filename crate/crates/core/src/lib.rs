//! Exact dense simulation of two-time spin correlation measurements.

pub mod bounds;
pub mod error;
pub mod evolution;
pub mod measurement;
pub mod models;
pub mod operator;
pub mod oracle;
pub mod protocols;
pub mod sampling;
pub mod spin;
pub mod state;

pub type C64 = num_complex::Complex64;

pub use error::{Error, ErrorKind, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
