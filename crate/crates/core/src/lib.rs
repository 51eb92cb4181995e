//! Exact simulation of heralded amplification of small collective-spin
//! rotations, in truncated Fock space.

pub mod error;
pub mod fock;
pub mod metrology;
pub mod optics;
pub mod oracle;
pub mod protocol;
pub mod spin;
pub mod validate;

pub use error::{Error, Result};
