//! Exact arithmetic for hyperelliptic curves over finite fields and the
//! moduli counts built from their zeta functions.

pub mod curve;
pub mod error;
pub mod family;
pub mod field;
pub mod hn;
pub mod hp;
pub mod moduli;
pub mod poly;
pub mod rng;
pub mod survey;
pub mod theory;

pub use error::{Error, ErrorClass, Result};
