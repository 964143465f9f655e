//! Unary-output transducers: nested pebble, marble and blind bimachines,
//! their compilation to streaming string transducers, exact equivalence of
//! such transducers, factorization forests, and a decision procedure for
//! computability by blind transducers among one-marble functions.

pub mod equivalence;
pub mod error;
pub mod forest;
pub mod format;
pub mod machines;
pub mod membership;
pub mod monoid;
pub mod random;
pub mod sst;

pub use error::{Error, Result};
