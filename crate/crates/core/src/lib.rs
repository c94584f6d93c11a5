//! Single-qubit pulse engineering: lab-frame two-level dynamics under shaped
//! near-resonant drives, Bloch-Siegert aware calibration of Y rotations, and
//! the coherent-error metrics used to compare calibration schemes.

pub mod calibration;
pub mod dynamics;
pub mod effective;
pub mod envelopes;
pub mod error;
pub mod gates;
pub mod model;
pub mod numeric;

pub use error::{Error, Result};
