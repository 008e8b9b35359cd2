//! Exact sampling laws, divergences and finite de Finetti bounds for
//! exchangeable laws on finite alphabets.

pub mod arith;
pub mod error;

pub use arith::{ExactRational, PrecisionFloat};
pub use error::{Error, Result};
pub mod bounds;
pub mod divergence;
pub mod exchangeable;
pub mod suite;
pub mod urn;
