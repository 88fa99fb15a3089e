//! Zeta functions of nodal hypersurfaces over prime fields.

pub mod arith;
pub mod cli;
pub mod error;

pub use error::{Error, Result};
pub mod forms;
pub mod oracle;
pub mod frobenius;
pub mod poly;
pub mod singular;
pub mod spectral;
pub mod zeta;
